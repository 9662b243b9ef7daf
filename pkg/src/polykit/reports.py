"""Report emission: headers, TSV/JSON writers, percent formatting, color."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Iterable

BUCKETING_METHOD = "equal-frequency quartiles with tie coalescing"


def fmt_percent(fraction: float) -> str:
    """Fraction -> percent with two decimals (banker's rounding)."""
    return f"{fraction * 100:.2f}"


def fmt_points(value: float) -> str:
    """A score already on the 0-100 scale, two decimals."""
    return f"{value:.2f}"


def fmt_delta(value: float) -> str:
    return f"{value:+.2f}"


def fmt_value(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def header_lines(meta: dict) -> list[str]:
    return [f"# {key}: {meta[key]}" for key in sorted(meta)]


def write_tsv(path: str | Path, meta: dict, columns: list[str], rows: Iterable[Iterable]) -> None:
    lines = header_lines(meta)
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(fmt_value(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: str | Path, document: dict) -> None:
    Path(path).write_text(
        json.dumps(document, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _color_enabled(stream) -> bool:
    if os.environ.get("POLYKIT_NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def paint(text: str, code: str, stream=None) -> str:
    stream = stream if stream is not None else sys.stderr
    if not _color_enabled(stream):
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def error_text(text: str) -> str:
    return paint(text, "31")


def warn_text(text: str) -> str:
    return paint(text, "33")
