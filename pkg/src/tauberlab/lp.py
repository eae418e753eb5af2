"""Matrix-game values by dense tableau simplex with Bland's rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-12


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    gap: float
    pivots: int


def _simplex_max(A: np.ndarray, max_pivots: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Maximize ``1.y`` subject to ``A y <= 1, y >= 0`` (A strictly positive).

    Returns the primal ``y``, the dual ``x`` (read off the slack reduced
    costs) and the pivot count.  The slack basis is feasible, so there is no
    phase one.
    """
    m, n = A.shape
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = 1.0
    tab[m, :n] = -1.0
    basis = list(range(n, n + m))
    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if tab[m, j] < -PIVOT_EPS), None)
        if entering is None:
            break
        if pivots >= max_pivots:
            raise LPError(f"simplex exceeded {max_pivots} pivots")
        col = tab[:m, entering]
        best = None
        for i in range(m):
            if col[i] > PIVOT_EPS:
                ratio = tab[i, -1] / col[i]
                key = (ratio, basis[i])
                if best is None or key[0] < best[0][0] - PIVOT_EPS or (
                    abs(key[0] - best[0][0]) <= PIVOT_EPS and key[1] < best[0][1]
                ):
                    best = (key, i)
        if best is None:
            raise LPError("unbounded matrix-game LP")
        r = best[1]
        tab[r] /= tab[r, entering]
        for i in range(m + 1):
            if i != r and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[r]
        basis[r] = entering
        pivots += 1
    y = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            y[j] = tab[i, -1]
    x = tab[m, n : n + m].copy()
    return y, x, pivots


def pure_bounds(M: np.ndarray) -> tuple[float, int, float, int]:
    """Pure maximin (first row achieving it) and pure minimax (first column)."""
    rowmin = M.min(axis=1)
    colmax = M.max(axis=0)
    i = int(np.argmax(rowmin))
    j = int(np.argmin(colmax))
    return float(rowmin[i]), i, float(colmax[j]), j


def _mixed_by_simplex(M: np.ndarray, max_pivots: int):
    lo, hi = float(M.min()), float(M.max())
    # shift into [1, 2] so the LP value is positive and well scaled
    A = (M - lo) / (hi - lo) + 1.0
    y, x, pivots = _simplex_max(A, max_pivots)
    sy, sx = y.sum(), x.sum()
    if not (sy > 0 and sx > 0):
        raise LPError("degenerate simplex solution")
    p = np.clip(x / sx, 0.0, None)
    q = np.clip(y / sy, 0.0, None)
    return p / p.sum(), q / q.sum(), pivots


def solve_matrix_game(M, tol: float = 1e-9, max_pivots: int = 10_000) -> MatrixGameSolution:
    """Value and optimal mixed strategies of the zero-sum game ``M`` (rows maximize).

    The reported duality gap ``max_i (M q)_i - min_j (p M)_j`` is certified
    against ``tol``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise LPError("matrix game needs a non-empty 2-d table")
    m, n = M.shape
    lower, i, upper, j = pure_bounds(M)
    if lower == upper:
        p = np.zeros(m)
        p[i] = 1.0
        q = np.zeros(n)
        q[j] = 1.0
        return MatrixGameSolution(lower, p, q, 0.0, 0)
    if (m, n) == (2, 2):
        # no saddle point, so both players mix fully and the indifference
        # equations have the classical closed-form solution
        (a, b), (c, d) = M
        den = a + d - b - c
        p = np.array([d - c, a - b]) / den
        q = np.array([d - b, a - c]) / den
        pivots = 0
    else:
        p, q, pivots = _mixed_by_simplex(M, max_pivots)
    guaranteed = float((p @ M).min())
    conceded = float((M @ q).max())
    gap = conceded - guaranteed
    if gap > tol:
        raise LPError(f"duality gap {gap:.3g} exceeds tolerance {tol:.3g}")
    value = min(max(0.5 * (guaranteed + conceded), lower), upper)
    return MatrixGameSolution(value, p, q, max(gap, 0.0), pivots)
