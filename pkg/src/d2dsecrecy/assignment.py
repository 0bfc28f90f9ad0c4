"""Hungarian algorithm and the rectangular-to-square padding used for matching."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Assignment", "hungarian", "pad_to_square", "solve_matching"]


@dataclass(frozen=True)
class Assignment:
    """Injective row -> column map. ``total_cost`` is the sum of selected costs."""

    match: dict
    total_cost: float

    @property
    def total_profit(self) -> float:
        return -self.total_cost


def _as_cost_matrix(cost):
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("cost matrix has non-finite entries")
    return a


def hungarian(cost) -> Assignment:
    """Minimum-cost perfect matching of a square cost matrix.

    Shortest augmenting path formulation with row/column potentials,
    O(n^3). Rows are inserted in index order and, among equally short
    augmenting columns, the lowest index wins, so results are deterministic.
    """
    a = _as_cost_matrix(cost)
    n, m = a.shape
    if n != m:
        raise ValueError(f"hungarian needs a square matrix, got {n}x{m}")
    if n == 0:
        return Assignment(match={}, total_cost=0.0)

    rows = a.tolist()
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    owner = [0] * (n + 1)  # owner[j]: 1-based row matched to column j; column 0 is a sentinel
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            row = rows[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - ui0 - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    match = {owner[j] - 1: j - 1 for j in range(1, n + 1)}
    match = dict(sorted(match.items()))
    total = 0.0
    for i in range(n):
        total += rows[i][match[i]]
    return Assignment(match=match, total_cost=total)


def pad_to_square(profit) -> np.ndarray:
    """Zero-pad a profit matrix to square (rows at the bottom or columns on the right), then negate."""
    p = _as_cost_matrix(profit)
    r, c = p.shape
    size = max(r, c)
    out = np.zeros((size, size))
    out[:r, :c] = p
    return -out


def solve_matching(profit) -> Assignment:
    """Maximum-profit injective matching of rows to columns.

    Pairs landing in padding, or carrying zero profit, are reported as
    unmatched. The returned ``total_cost`` is the negated total profit.
    """
    p = _as_cost_matrix(profit)
    r, c = p.shape
    if r == 0 or c == 0:
        return Assignment(match={}, total_cost=0.0)
    sol = hungarian(pad_to_square(p))
    match = {i: j for i, j in sol.match.items() if i < r and j < c and p[i, j] > 0}
    total = 0.0
    for i, j in match.items():
        total += p[i, j]
    return Assignment(match=match, total_cost=-total)
