"""Small dense two-phase simplex method for equality-form linear programs.

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

Pivoting follows Bland's rule (lowest eligible index enters, ties in the
ratio test go to the lowest basic index), which rules out cycling.  Intended
for a handful of constraints and at most a few thousand columns.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "solve_lp"]


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None
    value: float
    pivots: int


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    basis[row] = col


def _run(T, basis, ncols, eps, max_pivots):
    """Bland-rule simplex on tableau ``T`` whose last row holds reduced costs.

    Only the first ``ncols`` columns may enter the basis.  Returns
    ("optimal" | "unbounded", pivots).
    """
    m = T.shape[0] - 1
    pivots = 0
    while pivots < max_pivots:
        reduced = T[-1, :ncols]
        candidates = np.nonzero(reduced < -eps)[0]
        if candidates.size == 0:
            return "optimal", pivots
        col = candidates[0]
        column = T[:m, col]
        rows = np.nonzero(column > eps)[0]
        if rows.size == 0:
            return "unbounded", pivots
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + eps * max(1.0, abs(best))]
        row = ties[np.argmin(basis[ties])]
        _pivot(T, basis, row, col)
        pivots += 1
    raise RuntimeError("simplex pivot limit reached")


def solve_lp(c, A, b, eps: float = 1e-10, feas_tol: float = 1e-9, max_pivots: int = 100_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float)).copy()
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError(f"shape mismatch: c {c.shape}, A {A.shape}, b {b.shape}")

    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase I: artificial columns n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    _, piv1 = _run(T, basis, n + m, eps, max_pivots)
    infeas = -T[-1, -1]
    if infeas > feas_tol * (1.0 + np.abs(b).max(initial=0.0)):
        return LPResult("infeasible", None, np.inf, piv1)

    # drive remaining artificials out; rows with no usable pivot are redundant
    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if basis[row] >= n:
            nz = np.nonzero(np.abs(T[row, :n]) > eps)[0]
            if nz.size:
                _pivot(T, basis, row, nz[0])
                piv1 += 1
            else:
                keep[row] = False
    rows = np.nonzero(keep)[0]
    T2 = np.zeros((rows.size + 1, n + 1))
    T2[:-1, :n] = T[rows, :n]
    T2[:-1, -1] = T[rows, -1]
    basis = basis[rows]
    T2[-1, :n] = c
    T2[-1, -1] = 0.0
    for r, j in enumerate(basis):
        T2[-1] -= c[j] * T2[r]

    status, piv2 = _run(T2, basis, n, eps, max_pivots)
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, piv1 + piv2)
    x = np.zeros(n)
    x[basis] = np.maximum(T2[:-1, -1], 0.0)
    return LPResult("optimal", x, float(c @ x), piv1 + piv2)
