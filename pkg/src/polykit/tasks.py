"""Task-kind schemas and the Sample record.

A Sample carries named text fields plus a ``golds`` list. For extractive
QA the golds are the reference answer strings; for classification tasks
the single gold is the class label. NER and summarization samples can be
ingested and compiled into prompts but are never scored (metric "none").
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SchemaError, UnknownTaskError
from .languages import lookup_language


@dataclass(frozen=True)
class TaskKind:
    kind: str
    required_fields: tuple[str, ...]
    metric: str  # "f1_em" | "accuracy" | "none"

    @property
    def text_fields(self) -> tuple[str, ...]:
        """Required fields that live in Sample.fields (answers/label live in golds)."""
        return tuple(f for f in self.required_fields if f not in ("answers", "label"))

    @property
    def evaluable(self) -> bool:
        return self.metric != "none"

    @property
    def is_classification(self) -> bool:
        return self.kind in ("sentence_pair", "topic_cls", "sentiment_cls")


TASK_KINDS: dict[str, TaskKind] = {
    "qa_extractive": TaskKind("qa_extractive", ("question", "context", "answers"), "f1_em"),
    "sentence_pair": TaskKind("sentence_pair", ("t1", "t2", "label"), "accuracy"),
    "topic_cls": TaskKind("topic_cls", ("t1", "label"), "accuracy"),
    "sentiment_cls": TaskKind("sentiment_cls", ("t1", "label"), "accuracy"),
    "ner": TaskKind("ner", ("tokens", "tags"), "none"),
    "summarization": TaskKind("summarization", ("document", "summary"), "none"),
}


def task_kind(kind: str) -> TaskKind:
    try:
        return TASK_KINDS[kind]
    except KeyError:
        raise UnknownTaskError(kind) from None


@dataclass(frozen=True)
class Sample:
    id: str
    language: str
    dataset: str
    task: str
    fields: dict[str, str] = field(compare=True)
    golds: tuple[str, ...] = ()

    @property
    def task_kind(self) -> TaskKind:
        return task_kind(self.task)

    @property
    def label(self) -> str:
        """Gold class label; classification samples carry exactly one gold."""
        return self.golds[0]


def validate_sample(sample: Sample, line: int | None = None) -> None:
    """Check a sample against its task schema; raises SchemaError."""
    kind = task_kind(sample.task)
    lookup_language(sample.language)
    if not sample.id:
        raise SchemaError("sample id must be non-empty", line)
    for name in kind.text_fields:
        value = sample.fields.get(name)
        if value is None:
            raise SchemaError(f"sample {sample.id!r} is missing field {name!r}", line)
        if value == "":
            raise SchemaError(f"sample {sample.id!r} has empty field {name!r}", line)
    if kind.kind == "qa_extractive":
        if not any(g != "" for g in sample.golds):
            raise SchemaError(
                f"sample {sample.id!r} has no answer (unanswerable QA records are rejected)",
                line,
            )
    elif kind.is_classification:
        if len(sample.golds) != 1 or sample.golds[0] == "":
            raise SchemaError(
                f"sample {sample.id!r} must carry exactly one non-empty gold label", line
            )
