"""Language registry with family and word-segmentation metadata.

The registry ships as a tab-separated data file (``data/languages.tsv``)
with columns ``code``, ``space_delimited``, ``family``. A handful of
languages (zh, ja, th, te, km) are marked as not using spaces between
words; metrics switch to character-level tokenization for those.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from functools import lru_cache

from .errors import DataError, UnknownLanguageError


@dataclass(frozen=True)
class Language:
    code: str
    space_delimited: bool
    family: str


def _data_text(name: str) -> str:
    return importlib.resources.files("polykit.data").joinpath(name).read_text("utf-8")


@lru_cache(maxsize=None)
def _registry() -> tuple[dict[str, Language], dict[str, str]]:
    languages: dict[str, Language] = {}
    aliases: dict[str, str] = {}
    for lineno, raw in enumerate(_data_text("languages.tsv").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line.lstrip("#").split()
            if parts[:1] == ["alias"] and len(parts) == 3:
                aliases[parts[1]] = parts[2]
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"languages.tsv line {lineno}: expected 3 columns, got {len(cols)}")
        code, space_delimited, family = cols
        if code in languages:
            raise DataError(f"languages.tsv line {lineno}: duplicate code {code!r}")
        languages[code] = Language(code, space_delimited == "true", family)
    for alias, target in aliases.items():
        if target not in languages:
            raise DataError(f"languages.tsv alias {alias!r} points at unknown code {target!r}")
    return languages, aliases


def lookup_language(code: str) -> Language:
    """Return the registry entry for ``code``, resolving aliases (np -> ne)."""
    languages, aliases = _registry()
    resolved = aliases.get(code, code)
    try:
        return languages[resolved]
    except KeyError:
        raise UnknownLanguageError(code) from None


def family_of(code: str) -> str:
    return lookup_language(code).family


def registered_codes() -> list[str]:
    """All canonical codes, sorted (aliases are not listed)."""
    return sorted(_registry()[0])


def is_registered(code: str) -> bool:
    languages, aliases = _registry()
    return code in languages or code in aliases
