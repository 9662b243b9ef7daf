"""Prompt template DSL: parsing, printing, registry files, selection.

A template source is literal text with placeholders written ``[Q]``,
``[C]``, ``[T1]``, ``[T2]`` (encoder side) or ``[A]``, ``[LABEL]``
(answer side). ``|`` and any bracket that does not open a known
placeholder are ordinary characters, so the printed form of a parsed
template reproduces its source byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, MissingTemplateError, TemplateParseError, ValidationError
from .languages import lookup_language
from .metrics import normalize_and_tokenize

ENCODER_PLACEHOLDERS = frozenset({"Q", "C", "T1", "T2"})
ANSWER_PLACEHOLDERS = frozenset({"A", "LABEL"})

# Which encoder placeholders a task kind may use, and the sample field
# each one reads from.
PLACEHOLDER_FIELDS: dict[str, dict[str, str]] = {
    "qa_extractive": {"Q": "question", "C": "context"},
    "sentence_pair": {"T1": "t1", "T2": "t2"},
    "topic_cls": {"T1": "t1"},
    "sentiment_cls": {"T1": "t1"},
    "ner": {"T1": "tokens"},
    "summarization": {"T1": "document"},
}

_NAME_CHARS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")


@dataclass(frozen=True)
class Segment:
    kind: str  # "literal" | "placeholder"
    value: str


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def parse_segments(source: str, vocabulary: frozenset[str]) -> tuple[Segment, ...]:
    """Split ``source`` into alternating literal/placeholder segments."""
    segments: list[Segment] = []
    literal_start = 0
    i = 0
    n = len(source)
    while i < n:
        if source[i] != "[":
            i += 1
            continue
        j = i + 1
        while j < n and source[j] in _NAME_CHARS:
            j += 1
        name = source[i + 1 : j]
        if not name:
            i += 1
            continue
        if j >= n:
            raise TemplateParseError(
                f"unterminated placeholder '[{name}'", _byte_offset(source, i)
            )
        if source[j] != "]":
            i += 1
            continue
        if name not in vocabulary:
            raise TemplateParseError(
                f"unknown placeholder name {name!r}", _byte_offset(source, i)
            )
        if literal_start < i:
            segments.append(Segment("literal", source[literal_start:i]))
        segments.append(Segment("placeholder", name))
        i = j + 1
        literal_start = i
    if literal_start < n:
        segments.append(Segment("literal", source[literal_start:]))
    return tuple(segments)


def print_segments(segments: tuple[Segment, ...]) -> str:
    return "".join(
        s.value if s.kind == "literal" else f"[{s.value}]" for s in segments
    )


@dataclass(frozen=True)
class Template:
    id: str
    dataset: str
    template_lang: str
    segments: tuple[Segment, ...]
    answer_segments: tuple[Segment, ...]
    verbalizer: tuple[tuple[str, str], ...] | None
    uniformity: str  # "unified" | "diversified"
    group: int  # 0 for unified, 1..k for diversified

    @property
    def source(self) -> str:
        return print_segments(self.segments)

    @property
    def answer_source(self) -> str:
        return print_segments(self.answer_segments)

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(s.value for s in self.segments if s.kind == "placeholder")

    def option_for(self, label: str) -> str | None:
        if self.verbalizer is None:
            return None
        for known, option in self.verbalizer:
            if known == label:
                return option
        return None

    def validate_for_task(self, kind: str) -> None:
        legal = PLACEHOLDER_FIELDS.get(kind, {})
        for name in self.placeholders:
            if name not in legal:
                raise ValidationError(
                    f"template {self.id!r}: placeholder [{name}] is not legal for task {kind!r}"
                )


def _decode_key(text: str, lang: str) -> tuple[str, ...]:
    # article-preserving normalization so "(A)" stays distinguishable
    return normalize_and_tokenize(text, lang, drop_articles=False).tokens


def make_template(
    id: str,
    dataset: str,
    lang: str,
    text: str,
    answer_text: str,
    verbalizer: list | None = None,
    uniformity: str = "unified",
    group: int = 0,
) -> Template:
    """Parse and structurally validate one template definition."""
    lookup_language(lang)
    if uniformity not in ("unified", "diversified"):
        raise ValidationError(f"template {id!r}: bad uniformity {uniformity!r}")
    if uniformity == "unified" and group != 0:
        raise ValidationError(f"template {id!r}: unified templates use group 0")
    if uniformity == "diversified" and group < 1:
        raise ValidationError(f"template {id!r}: diversified templates need group >= 1")
    segments = parse_segments(text, ENCODER_PLACEHOLDERS)
    answer_segments = parse_segments(answer_text, ANSWER_PLACEHOLDERS)
    answer_names = {s.value for s in answer_segments if s.kind == "placeholder"}
    verb: tuple[tuple[str, str], ...] | None = None
    if verbalizer:
        verb = tuple((str(label), str(option)) for label, option in verbalizer)
        if "LABEL" not in answer_names:
            raise ValidationError(f"template {id!r}: verbalizer requires [LABEL] in answer")
        if "A" in answer_names:
            raise ValidationError(f"template {id!r}: [A] and a verbalizer cannot be combined")
        labels = [label for label, _ in verb]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"template {id!r}: duplicate verbalizer labels")
        keys = [_decode_key(option, lang) for _, option in verb]
        if len(set(keys)) != len(keys):
            raise ValidationError(
                f"template {id!r}: verbalizer options collide after normalization"
            )
    elif "LABEL" in answer_names:
        raise ValidationError(f"template {id!r}: [LABEL] requires a verbalizer")
    return Template(
        id=id,
        dataset=dataset,
        template_lang=lookup_language(lang).code,
        segments=segments,
        answer_segments=answer_segments,
        verbalizer=verb,
        uniformity=uniformity,
        group=int(group),
    )


def load_registry(path: str | Path) -> list[Template]:
    """Load a template registry file (one JSON object per line)."""
    templates: list[Template] = []
    seen: set[str] = set()
    text = Path(path).read_text("utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} line {line_no}: {exc}") from None
        try:
            template = make_template(
                id=obj["id"],
                dataset=obj["dataset"],
                lang=obj["lang"],
                text=obj["text"],
                answer_text=obj.get("answer_text", "[A]"),
                verbalizer=obj.get("verbalizer"),
                uniformity=obj.get("uniformity", "unified"),
                group=int(obj.get("group") or 0),
            )
        except KeyError as exc:
            raise DataError(f"{path} line {line_no}: missing key {exc}") from None
        if template.id in seen:
            raise DataError(f"{path} line {line_no}: duplicate template id {template.id!r}")
        seen.add(template.id)
        templates.append(template)
    return templates


def bundled_registry_path() -> Path:
    import importlib.resources

    return Path(str(importlib.resources.files("polykit.data").joinpath("templates.jsonl")))


def parse_uniformity(value: str) -> tuple[str, int]:
    """'unified' -> ('unified', 0); 'diversified-vK' -> ('diversified', K)."""
    if value == "unified":
        return "unified", 0
    if value.startswith("diversified-v"):
        suffix = value[len("diversified-v") :]
        if suffix.isdigit() and int(suffix) >= 1:
            return "diversified", int(suffix)
    raise ValidationError(f"bad uniformity {value!r} (use unified or diversified-vK)")


def select_templates(
    registry: list[Template],
    uniformity: str,
    language_policy: str,
    eval_lang: str,
    datasets: list[str] | None = None,
) -> dict[str, Template]:
    """Pick one template per dataset for a regime.

    ``cross`` always selects English templates; ``in`` selects templates
    written in the evaluated language.
    """
    if language_policy not in ("cross", "in"):
        raise ValidationError(f"bad language policy {language_policy!r} (use cross or in)")
    label, group = parse_uniformity(uniformity)
    lang = "en" if language_policy == "cross" else lookup_language(eval_lang).code
    wanted = datasets if datasets is not None else sorted({t.dataset for t in registry})
    selection: dict[str, Template] = {}
    for dataset in wanted:
        matches = [
            t
            for t in registry
            if t.dataset == dataset
            and t.uniformity == label
            and t.group == group
            and t.template_lang == lang
        ]
        if not matches:
            raise MissingTemplateError(dataset, uniformity, lang)
        if len(matches) > 1:
            ids = sorted(t.id for t in matches)
            raise ValidationError(
                f"ambiguous templates for ({dataset}, {uniformity}, {lang}): {ids}"
            )
        selection[dataset] = matches[0]
    return selection
