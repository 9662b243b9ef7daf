"""Multilingual-aware text normalization and scoring.

Normalization follows the SQuAD convention (NFC, lowercase, strip
punctuation, drop English articles, collapse whitespace) and then splits
either on whitespace or, for languages written without spaces between
words, into individual characters.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .errors import ValidationError
from .languages import lookup_language

_EN_ARTICLES = frozenset({"a", "an", "the"})


@dataclass(frozen=True)
class TokenizedText:
    tokens: tuple[str, ...]
    language: str
    mode: str  # "word" | "char"


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not _is_punct(ch))


def normalize_and_tokenize(text: str, lang: str, drop_articles: bool = True) -> TokenizedText:
    """SQuAD-style normalization followed by word or character splitting.

    ``drop_articles`` applies to English only; label decoding turns it off
    so that option letters like "(A)" survive as the token "a".
    """
    language = lookup_language(lang)
    norm = unicodedata.normalize("NFC", text).lower()
    norm = _strip_punct(norm)
    if language.space_delimited:
        tokens = norm.split()
        if drop_articles and language.code == "en":
            tokens = [t for t in tokens if t not in _EN_ARTICLES]
        return TokenizedText(tuple(tokens), language.code, "word")
    tokens = tuple(ch for ch in norm if not ch.isspace())
    return TokenizedText(tokens, language.code, "char")


def plain_tokenize(text: str, lang: str) -> tuple[str, ...]:
    """Surface token count basis: whitespace split, or characters for
    non-space-delimited languages. No case folding or punctuation removal."""
    language = lookup_language(lang)
    if language.space_delimited:
        return tuple(text.split())
    return tuple(ch for ch in text if not ch.isspace())


def plain_tokenize_with_offsets(text: str, lang: str) -> list[tuple[str, int, int]]:
    """plain_tokenize plus [start, end) character offsets into ``text``."""
    language = lookup_language(lang)
    spans: list[tuple[str, int, int]] = []
    if language.space_delimited:
        i = 0
        n = len(text)
        while i < n:
            while i < n and text[i].isspace():
                i += 1
            if i >= n:
                break
            start = i
            while i < n and not text[i].isspace():
                i += 1
            spans.append((text[start:i], start, i))
    else:
        for i, ch in enumerate(text):
            if not ch.isspace():
                spans.append((ch, i, i + 1))
    return spans


def _f1_from_bags(pred: tuple[str, ...], gold: tuple[str, ...]) -> float:
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    overlap = sum((Counter(pred) & Counter(gold)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(gold)
    return 2 * precision * recall / (precision + recall)


def f1_score(pred: str, golds: list[str], lang: str) -> float:
    """Bag-of-tokens F1 against each gold, maximized over golds."""
    if not golds:
        raise ValidationError("f1_score requires at least one gold answer")
    pred_tokens = normalize_and_tokenize(pred, lang).tokens
    return max(
        _f1_from_bags(pred_tokens, normalize_and_tokenize(g, lang).tokens) for g in golds
    )


def exact_match(pred: str, golds: list[str], lang: str) -> int:
    """1 iff the normalized prediction equals any normalized gold."""
    if not golds:
        raise ValidationError("exact_match requires at least one gold answer")
    pred_tokens = normalize_and_tokenize(pred, lang).tokens
    return int(any(pred_tokens == normalize_and_tokenize(g, lang).tokens for g in golds))


def accuracy(pairs: list[tuple[str, str]]) -> float:
    """Fraction of (decoded label, gold label) pairs that are equal."""
    if not pairs:
        raise ValidationError("accuracy requires a non-empty list of pairs")
    return sum(1 for decoded, gold in pairs if decoded == gold) / len(pairs)


def _ngram_counts(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))


def sentence_bleu(candidate: str, reference: str, lang: str) -> float:
    """Sentence-level BLEU-4 with brevity penalty.

    Unigram precision is unsmoothed (no shared unigrams gives 0); higher
    n-gram precisions use add-one smoothing so short identical texts still
    score 1.0.
    """
    cand = normalize_and_tokenize(candidate, lang).tokens
    ref = normalize_and_tokenize(reference, lang).tokens
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        matched = sum((cand_counts & ref_counts).values())
        total = max(len(cand) - n + 1, 0)
        if n == 1:
            if matched == 0:
                return 0.0
            precision = matched / total
        else:
            precision = (matched + 1) / (total + 1)
        log_sum += math.log(precision)
    bleu = math.exp(log_sum / 4)
    if len(cand) < len(ref):
        bleu *= math.exp(1 - len(ref) / len(cand))
    return bleu
