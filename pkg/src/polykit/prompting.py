"""Applying templates to samples and decoding model output back to answers."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import MissingFieldError, UnknownLabelError, ValidationError
from .metrics import normalize_and_tokenize
from .tasks import Sample
from .templates import PLACEHOLDER_FIELDS, Template

logger = logging.getLogger(__name__)

# Soft cap on encoder text length; overruns are reported, never truncated.
DEFAULT_CHAR_BUDGET = 4000


@dataclass(frozen=True)
class PromptedPair:
    sample_id: str
    template_id: str
    encoder_text: str
    decoder_text: str


def render(template: Template, sample: Sample) -> PromptedPair:
    """Substitute sample fields into a template; pure and rewriting-free."""
    field_map = PLACEHOLDER_FIELDS.get(sample.task, {})
    template.validate_for_task(sample.task)
    encoder_parts: list[str] = []
    for segment in template.segments:
        if segment.kind == "literal":
            encoder_parts.append(segment.value)
            continue
        field_name = field_map[segment.value]
        value = sample.fields.get(field_name)
        if value is None:
            raise MissingFieldError(sample.id, field_name)
        encoder_parts.append(value)
    decoder_parts: list[str] = []
    for segment in template.answer_segments:
        if segment.kind == "literal":
            decoder_parts.append(segment.value)
        elif segment.value == "A":
            if not sample.golds:
                raise ValidationError(f"sample {sample.id!r} has no gold answer to render")
            decoder_parts.append(sample.golds[0])
        else:  # LABEL
            option = template.option_for(sample.label)
            if option is None:
                raise UnknownLabelError(sample.label, template.id, sample.id)
            decoder_parts.append(option)
    decoder_text = "".join(decoder_parts)
    if sample.task_kind.evaluable and not decoder_text:
        raise ValidationError(f"sample {sample.id!r} rendered an empty decoder text")
    return PromptedPair(sample.id, template.id, "".join(encoder_parts), decoder_text)


def iter_compile(
    samples: Iterable[Sample],
    selection: dict[str, Template],
    char_budget: int | None = DEFAULT_CHAR_BUDGET,
) -> Iterator[PromptedPair]:
    """Render one pair per sample, preserving order, constant memory."""
    oversized = 0
    for sample in samples:
        template = selection.get(sample.dataset)
        if template is None:
            raise ValidationError(
                f"sample {sample.id!r}: dataset {sample.dataset!r} has no selected template"
            )
        pair = render(template, sample)
        if char_budget is not None and len(pair.encoder_text) > char_budget:
            oversized += 1
        yield pair
    if oversized:
        logger.warning(
            "%d prompted pair(s) exceed the %d-character budget", oversized, char_budget
        )


def compile_pairs(
    samples: Iterable[Sample],
    selection: dict[str, Template],
    char_budget: int | None = DEFAULT_CHAR_BUDGET,
) -> list[PromptedPair]:
    return list(iter_compile(samples, selection, char_budget))


@dataclass(frozen=True)
class Decoded:
    value: str
    fallback_used: bool


def _decode_tokens(text: str, lang: str) -> tuple[str, ...]:
    return normalize_and_tokenize(text, lang, drop_articles=False).tokens


def decode_prediction(template: Template, output_text: str) -> Decoded:
    """Map raw model output back to a label (classification) or span text.

    Classification matching is exact on the normalized option text first,
    then unique substring, then highest bag-of-token overlap with ties
    broken by verbalizer order. Always returns a decision.
    """
    if template.verbalizer is None:
        return Decoded(output_text.strip(), False)
    lang = template.template_lang
    out_tokens = _decode_tokens(output_text, lang)
    out_joined = " ".join(out_tokens)
    options = [
        (label, _decode_tokens(option, lang)) for label, option in template.verbalizer
    ]
    for label, opt_tokens in options:
        if out_tokens == opt_tokens:
            return Decoded(label, False)
    substring_hits = []
    for label, opt_tokens in options:
        opt_joined = " ".join(opt_tokens)
        if out_joined and opt_joined and (out_joined in opt_joined or opt_joined in out_joined):
            substring_hits.append(label)
    if len(substring_hits) == 1:
        return Decoded(substring_hits[0], True)
    best_label, best_overlap = options[0][0], -1
    out_bag = dict.fromkeys(out_tokens, 0)
    for token in out_tokens:
        out_bag[token] += 1
    for label, opt_tokens in options:
        remaining = dict(out_bag)
        overlap = 0
        for token in opt_tokens:
            if remaining.get(token, 0) > 0:
                remaining[token] -= 1
                overlap += 1
        if overlap > best_overlap:
            best_label, best_overlap = label, overlap
    return Decoded(best_label, True)


def pair_to_record(pair: PromptedPair) -> dict:
    return {
        "sample_id": pair.sample_id,
        "template_id": pair.template_id,
        "x": pair.encoder_text,
        "y": pair.decoder_text,
    }


def write_pairs(
    pairs: Iterable[PromptedPair], path: str | Path, header: dict | None = None
) -> None:
    """Write prompted pairs as JSON lines, optionally led by a header record."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header is not None:
            f.write(json.dumps({"header": header}, ensure_ascii=False, sort_keys=True))
            f.write("\n")
        for pair in pairs:
            f.write(json.dumps(pair_to_record(pair), ensure_ascii=False))
            f.write("\n")


def read_pairs(path: str | Path) -> tuple[dict | None, list[PromptedPair]]:
    header: dict | None = None
    pairs: list[PromptedPair] = []
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if line_no == 1 and "header" in obj and "sample_id" not in obj:
            header = obj["header"]
            continue
        pairs.append(PromptedPair(obj["sample_id"], obj["template_id"], obj["x"], obj["y"]))
    return header, pairs
