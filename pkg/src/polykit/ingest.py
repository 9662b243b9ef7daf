"""Reading, validating, and subsampling line-delimited sample files.

Interchange format: one UTF-8 JSON object per line (LF line endings, no
BOM) with keys ``id``, ``lang``, ``dataset``, ``task``, ``fields`` (object
of strings), ``golds`` (array of strings).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import SchemaError, ValidationError
from .languages import lookup_language
from .tasks import Sample, task_kind, validate_sample

_RECORD_KEYS = ("id", "lang", "dataset", "task", "fields", "golds")

# Defaults mirror the usual multi-task training budget: target datasets
# keep 3,000 training samples per language, expanding datasets 5,000.
DEFAULT_TARGET_PER_LANGUAGE = 3000
DEFAULT_EXPANDING_PER_LANGUAGE = 5000


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    task: str
    role: str  # "target" | "expanding"
    languages: tuple[str, ...] = ()
    split_paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.role not in ("target", "expanding"):
            raise ValidationError(f"dataset {self.name!r}: bad role {self.role!r}")
        task_kind(self.task)
        unknown = set(self.split_paths) - {"train", "dev", "test"}
        if unknown:
            raise ValidationError(f"dataset {self.name!r}: unknown splits {sorted(unknown)}")
        if self.role == "target":
            missing = {"train", "dev", "test"} - set(self.split_paths)
            if missing:
                raise ValidationError(
                    f"target dataset {self.name!r} must provide all splits, missing {sorted(missing)}"
                )
        elif "train" not in self.split_paths:
            raise ValidationError(f"expanding dataset {self.name!r} must provide a train split")


@dataclass(frozen=True)
class SamplingPolicy:
    per_language_n: int
    seed: int

    def __post_init__(self):
        if self.per_language_n < 1:
            raise ValidationError("per_language_n must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")


def _parse_record(obj: object, descriptor: DatasetDescriptor, line: int) -> Sample:
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object", line)
    missing = [k for k in _RECORD_KEYS if k not in obj]
    if missing:
        raise SchemaError(f"record is missing keys {missing}", line)
    extra = [k for k in obj if k not in _RECORD_KEYS]
    if extra:
        raise SchemaError(f"record has unknown keys {extra}", line)
    fields = obj["fields"]
    golds = obj["golds"]
    if not isinstance(fields, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in fields.items()
    ):
        raise SchemaError("fields must be an object of strings", line)
    if not isinstance(golds, list) or not all(isinstance(g, str) for g in golds):
        raise SchemaError("golds must be an array of strings", line)
    if obj["dataset"] != descriptor.name:
        raise SchemaError(
            f"record dataset {obj['dataset']!r} does not match descriptor {descriptor.name!r}",
            line,
        )
    if obj["task"] != descriptor.task:
        raise SchemaError(
            f"record task {obj['task']!r} does not match descriptor task {descriptor.task!r}",
            line,
        )
    kind = task_kind(descriptor.task)
    # non-evaluable tasks carry their target text in a named field
    if not golds and kind.kind == "summarization":
        golds = [fields.get("summary", "")]
    elif not golds and kind.kind == "ner":
        golds = [fields.get("tags", "")]
    language = lookup_language(str(obj["lang"])).code
    sample = Sample(
        id=str(obj["id"]),
        language=language,
        dataset=obj["dataset"],
        task=obj["task"],
        fields=dict(fields),
        golds=tuple(golds),
    )
    validate_sample(sample, line)
    return sample


def read_samples(path: str | Path, descriptor: DatasetDescriptor) -> list[Sample]:
    """Read and validate one sample file; order is preserved."""
    raw = Path(path).read_bytes()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise SchemaError(f"{path}: byte order mark not allowed", line=1)
    samples: list[Sample] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(raw.split(b"\n"), start=1):
        if not line:
            continue
        if line.endswith(b"\r"):
            raise SchemaError("lines must end with LF, found CRLF", line_no)
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SchemaError(f"invalid record: {exc}", line_no) from None
        sample = _parse_record(obj, descriptor, line_no)
        if sample.id in seen_ids:
            raise SchemaError(f"duplicate sample id {sample.id!r}", line_no)
        seen_ids.add(sample.id)
        samples.append(sample)
    return samples


def sample_to_record(sample: Sample) -> dict:
    return {
        "id": sample.id,
        "lang": sample.language,
        "dataset": sample.dataset,
        "task": sample.task,
        "fields": dict(sorted(sample.fields.items())),
        "golds": list(sample.golds),
    }


def write_samples(samples: Iterable[Sample], path: str | Path) -> None:
    """Write samples in the canonical interchange form (stable bytes)."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sample in samples:
            f.write(json.dumps(sample_to_record(sample), ensure_ascii=False))
            f.write("\n")


_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 sequence; returns (value, next_state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def subsample(samples: list[Sample], policy: SamplingPolicy) -> list[Sample]:
    """Seeded per-language draw without replacement.

    Within each language, ids are sorted and each receives one value from a
    splitmix64 stream seeded by (seed XOR fnv1a64(language)); the
    ``per_language_n`` smallest keys win. Output is sorted by
    (language, id), so equal seeds give byte-identical files.
    """
    by_language: dict[str, list[Sample]] = {}
    for sample in samples:
        by_language.setdefault(sample.language, []).append(sample)
    selected: list[Sample] = []
    for language in sorted(by_language):
        group = sorted(by_language[language], key=lambda s: s.id)
        state = policy.seed ^ _fnv1a64(language)
        keyed = []
        for sample in group:
            value, state = _splitmix64(state)
            keyed.append((value, sample.id, sample))
        keyed.sort(key=lambda t: (t[0], t[1]))
        selected.extend(s for _, _, s in keyed[: policy.per_language_n])
    selected.sort(key=lambda s: (s.language, s.id))
    return selected
