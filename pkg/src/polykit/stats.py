"""Paired signed-rank significance testing.

The p-value is exact (full null distribution over sign assignments,
computed by convolution over the tie-averaged ranks) up to 20 effective
pairs, and a tie-corrected normal approximation beyond that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

EXACT_LIMIT = 20


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # W = min(W+, W-)
    p_value: float
    n_effective: int
    degenerate: bool
    method: str  # "exact" | "normal" | "degenerate"


def _doubled_ranks(abs_diffs: list[float]) -> list[int]:
    """Average ranks of |d|, doubled so ties (.5 steps) stay integral."""
    order = sorted(range(len(abs_diffs)), key=lambda i: abs_diffs[i])
    doubled = [0] * len(abs_diffs)
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and abs_diffs[order[j]] == abs_diffs[order[i]]:
            j += 1
        # positions i+1..j (1-based) share the average rank (i+1+j)/2
        for k in range(i, j):
            doubled[order[k]] = i + 1 + j
        i = j
    return doubled


def _exact_cdf_counts(doubled: list[int]) -> list[int]:
    """counts[s] = number of sign assignments with doubled W+ equal to s."""
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for rank in doubled:
        for s in range(total, rank - 1, -1):
            if counts[s - rank]:
                counts[s] += counts[s - rank]
    return counts


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2))


def wilcoxon_signed_rank(
    x: list[float], y: list[float], alternative: str = "two-sided"
) -> WilcoxonResult:
    """Signed-rank test on paired scores.

    Zero differences are dropped; tied absolute differences get average
    ranks. All-zero differences return p = 1.0 with the degenerate flag.
    """
    if len(x) != len(y):
        raise ValidationError(f"paired inputs differ in length: {len(x)} vs {len(y)}")
    if not x:
        raise ValidationError("wilcoxon_signed_rank requires at least one pair")
    if alternative not in ("two-sided", "greater", "less"):
        raise ValidationError(f"bad alternative {alternative!r}")
    diffs = [a - b for a, b in zip(x, y) if a != b]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, True, "degenerate")
    doubled = _doubled_ranks([abs(d) for d in diffs])
    w_plus2 = sum(r for d, r in zip(diffs, doubled) if d > 0)
    total2 = sum(doubled)
    w_minus2 = total2 - w_plus2
    statistic = min(w_plus2, w_minus2) / 2.0

    if n <= EXACT_LIMIT:
        counts = _exact_cdf_counts(doubled)
        denom = float(2**n)

        def cdf(s: int) -> float:
            if s < 0:
                return 0.0
            return sum(counts[: min(s, total2) + 1]) / denom

        if alternative == "two-sided":
            p = min(1.0, 2.0 * cdf(min(w_plus2, w_minus2)))
        elif alternative == "greater":
            p = 1.0 - cdf(w_plus2 - 1)
        else:
            p = cdf(w_plus2)
        return WilcoxonResult(statistic, p, n, False, "exact")

    tie_term = 0.0
    seen: dict[int, int] = {}
    for r in doubled:
        seen[r] = seen.get(r, 0) + 1
    for size in seen.values():
        tie_term += (size**3 - size) / 48.0
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var <= 0:
        return WilcoxonResult(statistic, 1.0, n, True, "degenerate")
    z = (w_plus2 / 2.0 - mean) / math.sqrt(var)
    if alternative == "two-sided":
        p = min(1.0, 2.0 * _normal_sf(abs(z)))
    elif alternative == "greater":
        p = _normal_sf(z)
    else:
        p = _normal_sf(-z)
    return WilcoxonResult(statistic, p, n, False, "normal")
