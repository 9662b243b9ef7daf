"""Pairwise model comparison: keyed deltas, extremes, family roll-ups."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import KeyMismatchError
from .languages import family_of, is_registered


@dataclass(frozen=True)
class DiagnosisReport:
    model_1: str
    model_2: str
    overall_delta: float
    deltas: dict[str, float]  # key -> score(M1) - score(M2)
    max_positive: float
    max_negative: float
    family_deltas: dict[str, float]  # filled when keys are language codes

    def as_dict(self) -> dict:
        return {
            "model_1": self.model_1,
            "model_2": self.model_2,
            "overall_delta": self.overall_delta,
            "deltas": dict(sorted(self.deltas.items())),
            "max_positive": self.max_positive,
            "max_negative": self.max_negative,
            "family_deltas": dict(sorted(self.family_deltas.items())),
        }


def _check_keys(left: dict, right: dict, what: str) -> None:
    if set(left) != set(right):
        raise KeyMismatchError(
            f"{what}: result maps cover different keys",
            only_left=set(left) - set(right),
            only_right=set(right) - set(left),
        )


def pairwise_delta(
    results_m1: dict[str, float],
    results_m2: dict[str, float],
    model_1: str = "M1",
    model_2: str = "M2",
) -> DiagnosisReport:
    """Per-key deltas of M1 over M2 on identical key sets.

    Keys that are registered language codes are additionally averaged per
    language family.
    """
    _check_keys(results_m1, results_m2, "pairwise_delta")
    if not results_m1:
        raise KeyMismatchError("pairwise_delta: empty result maps")
    deltas = {key: results_m1[key] - results_m2[key] for key in results_m1}
    overall = math.fsum(deltas.values()) / len(deltas)
    positives = [d for d in deltas.values() if d > 0]
    negatives = [d for d in deltas.values() if d < 0]
    families: dict[str, list[float]] = {}
    for key, delta in deltas.items():
        if isinstance(key, str) and is_registered(key):
            families.setdefault(family_of(key), []).append(delta)
    family_deltas = {
        family: math.fsum(values) / len(values) for family, values in families.items()
    }
    return DiagnosisReport(
        model_1=model_1,
        model_2=model_2,
        overall_delta=overall,
        deltas=deltas,
        max_positive=max(positives) if positives else 0.0,
        max_negative=min(negatives) if negatives else 0.0,
        family_deltas=family_deltas,
    )


@dataclass(frozen=True)
class ImprovementMatrix:
    datasets: tuple[str, ...]
    rows: tuple[tuple[str, str], ...]  # (family, language), family-major order
    deltas: tuple[tuple[float | None, ...], ...]

    def as_rows(self) -> list[list]:
        out = []
        for (family, language), row in zip(self.rows, self.deltas):
            out.append([family, language, *row])
        return out


def improvement_matrix(
    baseline_results: dict[tuple[str, str], float],
    model_results: dict[tuple[str, str], float],
) -> ImprovementMatrix:
    """Delta matrix over (dataset, language) cells, rows grouped by family."""
    _check_keys(baseline_results, model_results, "improvement_matrix")
    if not baseline_results:
        raise KeyMismatchError("improvement_matrix: empty result maps")
    datasets = tuple(sorted({dataset for dataset, _ in baseline_results}))
    languages = sorted(
        {language for _, language in baseline_results},
        key=lambda code: (family_of(code), code),
    )
    rows = tuple((family_of(code), code) for code in languages)
    matrix = []
    for code in languages:
        row = []
        for dataset in datasets:
            key = (dataset, code)
            if key in baseline_results:
                row.append(model_results[key] - baseline_results[key])
            else:
                row.append(None)
        matrix.append(tuple(row))
    return ImprovementMatrix(datasets, rows, tuple(matrix))
