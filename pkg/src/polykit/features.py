"""Per-sample text features used for bucketed analysis.

Length features count surface tokens (plain whitespace/char split, no
normalization) so they reflect the text users actually see; BLEU-based
features reuse the metric-level normalization.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from functools import lru_cache

from .errors import ValidationError
from .metrics import plain_tokenize, plain_tokenize_with_offsets, sentence_bleu
from .tasks import Sample


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    task_kinds: frozenset[str]


_QA = frozenset({"qa_extractive"})
_PAIR = frozenset({"sentence_pair"})
_SINGLE = frozenset({"topic_cls", "sentiment_cls"})

FEATURES: dict[str, FeatureSpec] = {
    "cLen": FeatureSpec("cLen", _QA),
    "qLen": FeatureSpec("qLen", _QA),
    "aLen": FeatureSpec("aLen", _QA),
    "BLUE_AC": FeatureSpec("BLUE_AC", _QA),
    "t1Len": FeatureSpec("t1Len", _PAIR | _SINGLE),
    "t2Len": FeatureSpec("t2Len", _PAIR),
    "t1t2Ratio": FeatureSpec("t1t2Ratio", _PAIR),
    "BLUE_t1t2": FeatureSpec("BLUE_t1t2", _PAIR),
    "t1basic": FeatureSpec("t1basic", _SINGLE),
    "t1eNum": FeatureSpec("t1eNum", _SINGLE),
}


def feature_spec(name: str) -> FeatureSpec:
    try:
        return FEATURES[name]
    except KeyError:
        raise ValidationError(f"unknown feature {name!r}") from None


def applicable_features(task: str) -> list[str]:
    return [name for name, spec in FEATURES.items() if task in spec.task_kinds]


@lru_cache(maxsize=1)
def basic_words() -> frozenset[str]:
    import importlib.resources

    text = importlib.resources.files("polykit.data").joinpath("basic_words.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def _entity_spans(sample: Sample) -> list[tuple[int, int]]:
    """Parse ``fields.entities``: semicolon-separated ``start:end`` character
    offsets into the t1 text. Missing or empty means no annotations."""
    raw = sample.fields.get("entities", "").strip()
    if not raw:
        return []
    spans = []
    for part in raw.split(";"):
        try:
            start, end = part.split(":")
            spans.append((int(start), int(end)))
        except ValueError:
            raise ValidationError(
                f"sample {sample.id!r}: bad entity span {part!r} (expected start:end)"
            ) from None
    return spans


def _is_latin(ch: str) -> bool:
    return "LATIN" in unicodedata.name(ch, "")


def _entity_fraction(sample: Sample, use_heuristic: bool) -> float:
    text = sample.fields["t1"]
    tokens = plain_tokenize_with_offsets(text, sample.language)
    if not tokens:
        return 0.0
    spans = _entity_spans(sample)
    if spans:
        flagged = sum(
            1 for _, start, end in tokens if any(start < e and s < end for s, e in spans)
        )
        return flagged / len(tokens)
    if not use_heuristic:
        return 0.0
    # crude fallback: capitalized tokens past the first one, Latin scripts only
    flagged = 0
    for index, (token, _, _) in enumerate(tokens):
        first = token[0]
        if index > 0 and _is_latin(first) and first.isupper():
            flagged += 1
    return flagged / len(tokens)


def compute_feature(sample: Sample, name: str, use_entity_heuristic: bool = False) -> float:
    """Feature value for one sample; raises when the feature does not apply."""
    spec = feature_spec(name)
    if sample.task not in spec.task_kinds:
        raise ValidationError(f"feature {name!r} does not apply to task {sample.task!r}")
    lang = sample.language
    if name == "cLen":
        return float(len(plain_tokenize(sample.fields["context"], lang)))
    if name == "qLen":
        return float(len(plain_tokenize(sample.fields["question"], lang)))
    if name == "aLen":
        return float(len(plain_tokenize(sample.golds[0], lang)))
    if name == "BLUE_AC":
        return sentence_bleu(sample.golds[0], sample.fields["context"], lang)
    if name == "t1Len":
        return float(len(plain_tokenize(sample.fields["t1"], lang)))
    if name == "t2Len":
        return float(len(plain_tokenize(sample.fields["t2"], lang)))
    if name == "t1t2Ratio":
        t2_len = len(plain_tokenize(sample.fields["t2"], lang))
        if t2_len == 0:
            raise ValidationError(f"sample {sample.id!r}: t2 has no tokens, ratio undefined")
        return len(plain_tokenize(sample.fields["t1"], lang)) / t2_len
    if name == "BLUE_t1t2":
        return sentence_bleu(sample.fields["t1"], sample.fields["t2"], lang)
    if name == "t1basic":
        tokens = plain_tokenize(sample.fields["t1"], lang)
        if not tokens:
            return 0.0
        vocabulary = basic_words()
        return sum(1 for t in tokens if t.lower() in vocabulary) / len(tokens)
    if name == "t1eNum":
        return _entity_fraction(sample, use_entity_heuristic)
    raise ValidationError(f"unknown feature {name!r}")


def dataset_feature(
    samples: list[Sample], name: str, by_language: bool = False
) -> float | dict[str, float]:
    """Arithmetic mean of a feature over a (test) sample set."""
    if not samples:
        raise ValidationError("dataset_feature requires a non-empty sample set")
    if by_language:
        groups: dict[str, list[float]] = {}
        for sample in samples:
            groups.setdefault(sample.language, []).append(compute_feature(sample, name))
        return {lang: math.fsum(vals) / len(vals) for lang, vals in sorted(groups.items())}
    values = [compute_feature(sample, name) for sample in samples]
    return math.fsum(values) / len(values)
