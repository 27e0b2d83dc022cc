"""Finite maxima of affine functions, with exact conjugation by linear programming."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .simplex import solve_lp

__all__ = ["MaxAffineFn", "eval_max_affine", "conjugate_max_affine"]


class MaxAffineFn:
    """``p -> max_j <slopes[j], p> + offsets[j]``.

    Args:
        slopes: array of shape ``(m, d)``.
        offsets: array of shape ``(m,)``.
    """

    def __init__(self, slopes, offsets):
        slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
        if slopes.shape[0] == 0:
            raise ValueError("a max-affine function needs at least one piece")
        if offsets.shape != (slopes.shape[0],):
            raise DimensionError(
                f"{slopes.shape[0]} slopes but {offsets.shape[0]} offsets"
            )
        if not (np.isfinite(slopes).all() and np.isfinite(offsets).all()):
            raise ValueError("slopes and offsets must be finite")
        slopes.setflags(write=False)
        offsets.setflags(write=False)
        self.slopes = slopes
        self.offsets = offsets

    @classmethod
    def from_pieces(cls, pieces) -> "MaxAffineFn":
        """Build from an iterable of ``(slope, offset)`` pairs."""
        pieces = list(pieces)
        lengths = {np.atleast_1d(s).size for s, _ in pieces}
        if len(lengths) > 1:
            raise DimensionError(f"slopes of different lengths: {sorted(lengths)}")
        return cls([np.atleast_1d(s) for s, _ in pieces], [o for _, o in pieces])

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @property
    def n_pieces(self) -> int:
        return self.slopes.shape[0]

    def _check(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1:] != (self.dim,):
            raise DimensionError(f"expected points of length {self.dim}, got shape {p.shape}")
        return p

    def __call__(self, p):
        """Evaluate at one point ``(d,)`` or a batch ``(..., d)``."""
        p = self._check(p)
        vals = p @ self.slopes.T + self.offsets
        out = vals.max(axis=-1)
        return float(out) if out.ndim == 0 else out

    def active_piece(self, p) -> int:
        """Index of a maximizing piece (lowest index on ties)."""
        p = self._check(p)
        return int(np.argmax(self.slopes @ p + self.offsets))

    def subgradient(self, p) -> np.ndarray:
        return self.slopes[self.active_piece(p)].copy()

    def conjugate(self, q) -> float:
        return conjugate_max_affine(self, q)


def eval_max_affine(m: MaxAffineFn, p) -> float:
    return m(p)


def conjugate_max_affine(m: MaxAffineFn, q) -> float:
    """Exact conjugate ``m*(q)``.

    ``m*(q) = min { -sum_j lam_j offsets[j] : sum_j lam_j slopes[j] = q, lam in simplex }``
    and +inf when ``q`` lies outside the convex hull of the slopes.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (m.dim,):
        raise DimensionError(f"expected a point of length {m.dim}, got shape {q.shape}")
    A = np.vstack([m.slopes.T, np.ones(m.n_pieces)])
    b = np.append(q, 1.0)
    res = solve_lp(-m.offsets, A, b)
    if res.status == "infeasible":
        return np.inf
    return res.value
