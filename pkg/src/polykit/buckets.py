"""Equal-frequency four-way bucketing (XS/S/L/XL) and per-bucket scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .features import compute_feature
from .metrics import exact_match, f1_score
from .predictions import PredictionRecord, UnjoinableError
from .tasks import Sample

BUCKET_LABELS = ("XS", "S", "L", "XL")


@dataclass(frozen=True)
class BucketInfo:
    label: str
    lo: float | None  # None for empty buckets
    hi: float | None
    count: int


@dataclass(frozen=True)
class BucketAssignment:
    labels: dict[str, str]  # id -> bucket label
    buckets: tuple[BucketInfo, ...]
    degenerate: bool


def bucketize(values: list[tuple[str, float]], k: int = 4) -> BucketAssignment:
    """Partition ids into ``k`` value-ordered, equal-frequency buckets.

    Equal values never straddle a boundary: when an ideal cut lands inside
    a tie group the boundary moves forward to the next distinct value,
    which can leave later buckets empty (flagged as degenerate).
    """
    if not values:
        raise ValidationError("bucketize requires a non-empty value list")
    if k != len(BUCKET_LABELS):
        raise ValidationError("bucketize is fixed to four buckets")
    ordered = sorted(values, key=lambda item: (item[1], item[0]))
    n = len(ordered)
    labels: dict[str, str] = {}
    infos: list[BucketInfo] = []
    start = 0
    for b, label in enumerate(BUCKET_LABELS):
        if b == k - 1:
            end = n
        else:
            end = max((n * (b + 1)) // k, start)
            while 0 < end < n and ordered[end][1] == ordered[end - 1][1]:
                end += 1
        members = ordered[start:end]
        for sample_id, _ in members:
            labels[sample_id] = label
        if members:
            infos.append(BucketInfo(label, members[0][1], members[-1][1], len(members)))
        else:
            infos.append(BucketInfo(label, None, None, 0))
        start = end
    degenerate = any(info.count == 0 for info in infos)
    return BucketAssignment(labels, tuple(infos), degenerate)


@dataclass(frozen=True)
class BucketScore:
    label: str
    lo: float | None
    hi: float | None
    count: int
    score: float | None  # None for empty buckets


@dataclass(frozen=True)
class BucketReport:
    feature: str
    metric: str
    buckets: tuple[BucketScore, ...]
    degenerate: bool
    overall_score: float

    def rows(self) -> list[tuple]:
        return [(b.label, b.lo, b.hi, b.count, b.score) for b in self.buckets]


def score_prediction(record: PredictionRecord, sample: Sample, metric: str) -> float:
    if record.decoded is None:
        raise ValidationError(f"prediction for {record.sample_id!r} was not decoded")
    if metric == "f1":
        return f1_score(record.decoded, list(sample.golds), sample.language)
    if metric == "em":
        return float(exact_match(record.decoded, list(sample.golds), sample.language))
    if metric == "accuracy":
        return float(record.decoded == sample.label)
    raise ValidationError(f"unknown metric {metric!r}")


def bucket_performance(
    predictions: list[PredictionRecord],
    samples: list[Sample],
    feature: str,
    metric: str,
    use_entity_heuristic: bool = False,
) -> BucketReport:
    """Bucket samples by a feature and average the metric inside each bucket."""
    samples_by_id = {s.id: s for s in samples}
    missing = {p.sample_id for p in predictions} - set(samples_by_id)
    if missing:
        raise UnjoinableError("predictions reference unknown sample ids", missing)
    values = [
        (
            p.sample_id,
            compute_feature(samples_by_id[p.sample_id], feature, use_entity_heuristic),
        )
        for p in predictions
    ]
    assignment = bucketize(values)
    per_sample = {
        p.sample_id: score_prediction(p, samples_by_id[p.sample_id], metric)
        for p in predictions
    }
    scores: list[BucketScore] = []
    for info in assignment.buckets:
        members = [sid for sid, label in assignment.labels.items() if label == info.label]
        if members:
            mean = math.fsum(per_sample[sid] for sid in members) / len(members)
        else:
            mean = None
        scores.append(BucketScore(info.label, info.lo, info.hi, info.count, mean))
    overall = math.fsum(per_sample.values()) / len(per_sample)
    return BucketReport(feature, metric, tuple(scores), assignment.degenerate, overall)
