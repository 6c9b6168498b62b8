"""Rank-based comparison of several methods over many items: the
Iman-Davenport corrected Friedman test, the Nemenyi critical difference and
the critical-difference diagram."""
from __future__ import annotations

import math
from dataclasses import dataclass
from html import escape
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
from scipy import stats as sps

from .errors import ContractError
from .evaluation import ScoreTable

# Studentized range quantile / sqrt(2) at infinite degrees of freedom, k = 2..20.
NEMENYI_Q = {
    0.05: (1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219,
           3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544),
    0.10: (1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
           3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319),
}


def rank_rows(scores) -> np.ndarray:
    """Rank methods within each row: 1 = highest score, ties share the average rank."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.vstack([sps.rankdata(-row, method="average") for row in scores])


@dataclass(frozen=True)
class FriedmanResult:
    avg_ranks: np.ndarray
    chi2: float
    ff: Optional[float]  # None when the correction is singular
    df1: float
    df2: float
    critical: float
    p_value: float
    reject: bool
    corrected: bool
    alpha: float

    def to_dict(self, methods=None):
        ranks = [float(r) for r in self.avg_ranks]
        return {
            "avg_ranks": dict(zip(methods, ranks)) if methods is not None else ranks,
            "chi2_F": self.chi2,
            "F_F": self.ff,
            "df": [self.df1, self.df2],
            "critical_value": self.critical,
            "p_value": self.p_value,
            "reject": self.reject,
            "corrected": self.corrected,
            "alpha": self.alpha,
        }


def friedman_test(table, alpha=0.05) -> FriedmanResult:
    """Friedman statistic on average ranks with the Iman-Davenport F correction.

    When ``N(k-1) == chi2`` (every item ranks the methods identically) the
    correction divides by zero; the uncorrected chi-square test is used
    instead and ``corrected`` is False.
    """
    scores = table.scores if isinstance(table, ScoreTable) else np.asarray(table, dtype=np.float64)
    n_items, k = scores.shape
    if k < 2 or n_items < 2:
        raise ContractError(f"need at least 2 methods and 2 items, got {k} and {n_items}")
    avg = rank_rows(scores).mean(axis=0)
    chi2 = 12.0 * n_items / (k * (k + 1)) * (float(np.sum(avg ** 2)) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    denom = n_items * (k - 1) - chi2
    if abs(denom) <= 1e-12 * n_items * k:
        crit = float(sps.chi2.ppf(1 - alpha, k - 1))
        p = float(sps.chi2.sf(chi2, k - 1))
        return FriedmanResult(avg, chi2, None, k - 1, math.inf, crit, p, chi2 > crit, False, alpha)
    ff = (n_items - 1) * chi2 / denom
    df1, df2 = k - 1, (k - 1) * (n_items - 1)
    crit = float(sps.f.ppf(1 - alpha, df1, df2))
    p = float(sps.f.sf(ff, df1, df2))
    return FriedmanResult(avg, chi2, ff, df1, df2, crit, p, ff > crit, True, alpha)


def nemenyi_cd(k: int, n_items: int, alpha=0.05) -> float:
    """Critical difference in average rank for ``k`` methods over ``n_items`` items."""
    if alpha not in NEMENYI_Q:
        raise ContractError(f"alpha must be one of {sorted(NEMENYI_Q)}")
    if not 2 <= k <= 1 + len(NEMENYI_Q[alpha]):
        raise ContractError(f"k={k} outside the tabulated range 2..{1 + len(NEMENYI_Q[alpha])}")
    if n_items < 1:
        raise ContractError("n_items must be positive")
    return NEMENYI_Q[alpha][k - 2] * math.sqrt(k * (k + 1) / (6.0 * n_items))


def cliques(avg_ranks, cd) -> list[tuple[int, int]]:
    """Maximal runs (in rank order) whose spread is below ``cd``.

    Returns ``(first, last)`` index pairs into the rank-sorted method list.
    """
    r = np.sort(np.asarray(avg_ranks, dtype=np.float64))
    out = []
    last_end = -1
    for i in range(len(r)):
        j = i
        while j + 1 < len(r) and r[j + 1] - r[i] < cd:
            j += 1
        if j > i and j > last_end:
            out.append((i, j))
            last_end = j
    return out


def render_cd_plot(avg_ranks: Mapping[str, float], cd: float, out_path=None) -> str:
    """Critical-difference diagram as a standalone SVG string.

    Rank 1 sits at the left end of the axis. Methods in the better half are
    labelled on the left, the rest on the right; thick bars join methods
    whose ranks differ by less than ``cd``. Output is byte-stable.
    """
    names = list(avg_ranks)
    k = len(names)
    if k < 2:
        raise ContractError("a CD diagram needs at least two methods")
    order = sorted(range(k), key=lambda i: (avg_ranks[names[i]], names[i]))
    ranks = [float(avg_ranks[names[i]]) for i in order]

    width, margin = 640.0, 150.0
    axis_y, row_h = 80.0, 22.0
    x0, x1 = margin, width - margin

    def xpos(rank):
        return x0 + (rank - 1.0) * (x1 - x0) / max(k - 1, 1)

    n_left = (k + 1) // 2
    bars = cliques(ranks, cd)
    label_top = axis_y + 30.0 + len(bars) * 8.0
    height = label_top + max(n_left, k - n_left) * row_h + 20.0
    f = "{:.2f}".format

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(width)}" height="{f(height)}" '
        f'viewBox="0 0 {f(width)} {f(height)}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{f(width)}" height="{f(height)}" fill="white"/>',
        f'<line x1="{f(x0)}" y1="{f(axis_y)}" x2="{f(x1)}" y2="{f(axis_y)}" stroke="black" stroke-width="1.5"/>',
    ]
    for r in range(1, k + 1):
        x = xpos(r)
        parts.append(f'<line x1="{f(x)}" y1="{f(axis_y - 6)}" x2="{f(x)}" y2="{f(axis_y)}" stroke="black"/>')
        parts.append(f'<text x="{f(x)}" y="{f(axis_y - 10)}" text-anchor="middle">{r}</text>')

    # CD ruler
    ruler_y = 25.0
    parts.append(f'<line class="cd-ruler" x1="{f(xpos(1))}" y1="{f(ruler_y)}" x2="{f(xpos(1 + cd))}" '
                 f'y2="{f(ruler_y)}" stroke="black" stroke-width="1.5"/>')
    for xr in (xpos(1), xpos(1 + cd)):
        parts.append(f'<line x1="{f(xr)}" y1="{f(ruler_y - 4)}" x2="{f(xr)}" y2="{f(ruler_y + 4)}" stroke="black"/>')
    parts.append(f'<text x="{f((xpos(1) + xpos(1 + cd)) / 2)}" y="{f(ruler_y - 8)}" '
                 f'text-anchor="middle">CD = {cd:.3f}</text>')

    for pos, (i, rank) in enumerate(zip(order, ranks)):
        x = xpos(rank)
        left = pos < n_left
        row = pos if left else k - 1 - pos
        y = label_top + row * row_h
        tx = x0 - 10 if left else x1 + 10
        anchor = "end" if left else "start"
        label = escape(names[i])
        parts.append(f'<polyline class="method" points="{f(x)},{f(axis_y)} {f(x)},{f(y)} {f(tx)},{f(y)}" '
                     f'fill="none" stroke="black"/>')
        parts.append(f'<text x="{f(tx + (-4 if left else 4))}" y="{f(y + 4)}" text-anchor="{anchor}">'
                     f'{label} ({rank:.2f})</text>')

    for b, (i, j) in enumerate(bars):
        y = axis_y + 14.0 + b * 8.0
        parts.append(f'<line class="clique" x1="{f(xpos(ranks[i]) - 3)}" y1="{f(y)}" '
                     f'x2="{f(xpos(ranks[j]) + 3)}" y2="{f(y)}" stroke="black" stroke-width="4"/>')
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if out_path is not None:
        Path(out_path).write_text(svg, encoding="utf-8")
    return svg
