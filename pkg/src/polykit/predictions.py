"""Prediction records: reading model output files and joining them to samples."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

from .errors import DataError, ValidationError
from .prompting import decode_prediction
from .tasks import Sample
from .templates import Template


class UnjoinableError(DataError):
    """Prediction ids and sample ids do not line up (exit 2 in the CLI)."""

    def __init__(self, message, ids):
        ids = sorted(ids)
        shown = ", ".join(repr(i) for i in ids[:10])
        more = f" (+{len(ids) - 10} more)" if len(ids) > 10 else ""
        super().__init__(f"{message}: {shown}{more}")
        self.ids = ids


@dataclass(frozen=True)
class PredictionRecord:
    model_id: str
    sample_id: str
    raw_output: str
    decoded: str | None = None
    fallback_used: bool = False


def read_predictions(path: str | Path, model_id: str | None = None) -> list[PredictionRecord]:
    """Read a prediction file (JSON lines: model_id, sample_id, output).

    When ``model_id`` is given, other models' records are filtered out.
    """
    records: list[PredictionRecord] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} line {line_no}: {exc}") from None
        try:
            record = PredictionRecord(
                model_id=str(obj["model_id"]),
                sample_id=str(obj["sample_id"]),
                raw_output=str(obj["output"]),
            )
        except KeyError as exc:
            raise DataError(f"{path} line {line_no}: missing key {exc}") from None
        if model_id is not None and record.model_id != model_id:
            continue
        key = (record.model_id, record.sample_id)
        if key in seen:
            raise DataError(f"{path} line {line_no}: duplicate prediction for {key}")
        seen.add(key)
        records.append(record)
    return records


def single_model_id(records: list[PredictionRecord], requested: str | None = None) -> str:
    models = sorted({r.model_id for r in records})
    if requested is not None:
        if requested not in models:
            raise ValidationError(f"model {requested!r} not in prediction file {models}")
        return requested
    if len(models) != 1:
        raise ValidationError(f"prediction file holds several models {models}; pass --model-id")
    return models[0]


def join_and_decode(
    records: list[PredictionRecord],
    samples: list[Sample],
    templates: dict[str, Template] | Callable[[Sample], Template],
) -> list[PredictionRecord]:
    """Attach decoded answers; both sides must cover the same sample ids.

    ``templates`` is either a dataset -> Template map or a callable picking
    the template per sample (needed when template language follows the
    sample language).
    """
    samples_by_id = {s.id: s for s in samples}
    record_ids = {r.sample_id for r in records}
    orphans = record_ids - set(samples_by_id)
    if orphans:
        raise UnjoinableError("predictions reference unknown sample ids", orphans)
    unpredicted = set(samples_by_id) - record_ids
    if unpredicted:
        raise UnjoinableError("samples have no prediction", unpredicted)
    decoded_records: list[PredictionRecord] = []
    for record in records:
        sample = samples_by_id[record.sample_id]
        if callable(templates):
            template = templates(sample)
        else:
            template = templates.get(sample.dataset)
        if template is None:
            raise ValidationError(f"dataset {sample.dataset!r} has no selected template")
        decoded = decode_prediction(template, record.raw_output)
        decoded_records.append(
            replace(record, decoded=decoded.value, fallback_used=decoded.fallback_used)
        )
    return decoded_records
