"""Small dense linear programming, enough for cone feasibility certificates.

Two-phase tableau simplex with Bland's rule (no cycling) on problems with
at most a few hundred rows and columns.  Exposes the two shapes the cone
machinery needs: conic-hull feasibility (does t lie in cone(columns of M)?)
and linear maximization over a working state polytope {s : G s >= 0,
e . s = 1} with unbounded rays reported for cut generation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["LPStatus", "LPResult", "solve_standard", "conic_combination", "maximize_over_section"]

_PIVOT_TOL = 1e-9


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: Optional[np.ndarray] = None
    objective: float = 0.0
    ray: Optional[np.ndarray] = None


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and tab[r, col] != 0.0:
            tab[r] -= tab[r, col] * tab[row]
    basis[row] = col


def _run(tab: np.ndarray, basis: np.ndarray, allowed: np.ndarray, max_iter: int):
    """Drive the cost row (last) to optimality over the allowed columns.

    Returns None on optimality or the entering column index on
    unboundedness (the tableau is left as-is in that case).
    """
    m = tab.shape[0] - 1
    for _ in range(max_iter):
        costs = tab[-1, :-1]
        entering = -1
        for j in np.where(allowed)[0]:  # Bland: smallest eligible index
            if costs[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return None
        col = tab[:m, entering]
        rows = np.where(col > _PIVOT_TOL)[0]
        if rows.size == 0:
            return entering
        ratios = tab[rows, -1] / col[rows]
        best = np.min(ratios)
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        leave = ties[np.argmin(basis[ties])]  # Bland tie-break
        _pivot(tab, basis, int(leave), entering)
    raise RuntimeError("simplex iteration limit exceeded")


def solve_standard(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, max_iter: int = 20_000
) -> LPResult:
    """min c.x subject to a x = b, x >= 0 (dense two-phase simplex)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = a.shape if a.ndim == 2 else (0, len(c))
    if m == 0:
        return LPResult(LPStatus.OPTIMAL, np.zeros(n), 0.0)

    a = a.copy()
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    scale = 1.0 + float(np.max(np.abs(b))) + float(np.max(np.abs(a))) if a.size else 1.0

    # phase I tableau: [A | I | b] with artificial cost row
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    basis = np.arange(n, n + m)
    tab[-1, :n] = -a.sum(axis=0)
    tab[-1, -1] = -b.sum()

    allowed = np.ones(n + m, dtype=bool)
    if _run(tab, basis, allowed, max_iter) is not None:
        raise RuntimeError("phase I cannot be unbounded")
    if -tab[-1, -1] > 1e-8 * scale:
        return LPResult(LPStatus.INFEASIBLE)

    # drive artificials out of the basis (or drop redundant rows)
    keep_rows = []
    for r in range(m):
        if basis[r] >= n:
            piv = -1
            for j in range(n):
                if abs(tab[r, j]) > 1e-9:
                    piv = j
                    break
            if piv >= 0:
                _pivot(tab, basis, r, piv)
                keep_rows.append(r)
            # else: redundant row, dropped below
        else:
            keep_rows.append(r)
    rows = np.array(keep_rows, dtype=int)
    tab = np.vstack([tab[rows][:, list(range(n)) + [n + m]], np.zeros(n + 1)])
    basis = basis[rows]
    m2 = len(rows)

    # phase II cost row: reduced costs of c for the current basis
    tab[-1, :n] = c
    tab[-1, -1] = 0.0
    for r in range(m2):
        if tab[-1, basis[r]] != 0.0:
            tab[-1] -= tab[-1, basis[r]] * tab[r]

    allowed = np.ones(n, dtype=bool)
    entering = _run(tab, basis, allowed, max_iter)
    if entering is not None:
        ray = np.zeros(n)
        ray[entering] = 1.0
        for r in range(m2):
            ray[basis[r]] = -tab[r, entering]
        # entries below the pivot tolerance are noise; a valid ray is >= 0
        ray = np.clip(ray, 0.0, None)
        return LPResult(LPStatus.UNBOUNDED, ray=ray)

    x = np.zeros(n)
    for r in range(m2):
        x[basis[r]] = tab[r, -1]
    return LPResult(LPStatus.OPTIMAL, x, float(c @ x))


def conic_combination(
    m: np.ndarray, t: np.ndarray, tol: float = 1e-9
) -> Optional[np.ndarray]:
    """Coefficients lam >= 0 with (columns of m) lam = t, or None.

    Feasibility is decided by phase I; tol scales the acceptable residual.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    t = np.asarray(t, dtype=float)
    res = solve_standard(m, t, np.zeros(m.shape[1]))
    if res.status is not LPStatus.OPTIMAL:
        return None
    gap = float(np.max(np.abs(m @ res.x - t))) if res.x is not None else np.inf
    if gap > tol * (1.0 + float(np.max(np.abs(t)))):
        return None
    return res.x


def maximize_over_section(
    g: np.ndarray, e: np.ndarray, c: np.ndarray
) -> LPResult:
    """max c.s subject to g s >= 0 (rowwise) and e.s = 1, s free.

    Returns the optimizer in s coordinates; on unboundedness the ray is a
    free direction with g ray >= 0 and e.ray = 0, ready for cut generation.
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    e = np.asarray(e, dtype=float)
    c = np.asarray(c, dtype=float)
    k, d = g.shape
    # s = u - w with u, w >= 0; slack turns g s >= 0 into equality
    a = np.zeros((k + 1, 2 * d + k))
    a[:k, :d] = g
    a[:k, d:2 * d] = -g
    a[:k, 2 * d:] = -np.eye(k)
    a[k, :d] = e
    a[k, d:2 * d] = -e
    b = np.zeros(k + 1)
    b[k] = 1.0
    cost = np.zeros(2 * d + k)
    cost[:d] = -c
    cost[d:2 * d] = c
    res = solve_standard(a, b, cost)
    if res.status is LPStatus.OPTIMAL:
        s = res.x[:d] - res.x[d:2 * d]
        return LPResult(LPStatus.OPTIMAL, s, float(c @ s))
    if res.status is LPStatus.UNBOUNDED:
        ray = res.ray[:d] - res.ray[d:2 * d]
        return LPResult(LPStatus.UNBOUNDED, ray=ray)
    return res
