"""Smooth norms on R^n and their duality maps.

``jmap`` is the gradient of ``x -> ||x||^2 / 2`` and ``jstar`` is its
inverse, the gradient of the dual half-squared norm.  Both norms offered here
are differentiable away from the origin together with their duals, so no
renorming is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SpecError

__all__ = [
    "DualityMap",
    "EUCLIDEAN",
    "norm",
    "dual_norm",
    "jmap",
    "jstar",
    "pairing_defect",
    "DEFAULT_EQUALITY_TOL",
]

DEFAULT_EQUALITY_TOL = 1e-9


@dataclass(frozen=True)
class DualityMap:
    """Euclidean norm, or weighted norm ``||x||^2 = sum_i w_i x_i^2``.

    The dual norm of the weighted case is ``||v||_*^2 = sum_i v_i^2 / w_i``.
    """

    kind: str = "euclidean"
    weights: tuple | None = field(default=None)

    def __post_init__(self):
        if self.kind == "euclidean":
            if self.weights is not None:
                raise ValueError("euclidean duality map takes no weights")
        elif self.kind == "weighted":
            if self.weights is None:
                raise ValueError("weighted duality map needs weights")
            w = tuple(float(a) for a in np.atleast_1d(self.weights))
            if not w or not all(np.isfinite(a) and a > 0 for a in w):
                raise ValueError(f"weights must be finite and positive, got {w}")
            object.__setattr__(self, "weights", w)
        else:
            raise ValueError(f"unknown duality map kind {self.kind!r}")

    @classmethod
    def weighted(cls, weights) -> "DualityMap":
        return cls("weighted", tuple(np.atleast_1d(weights)))

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "euclidean"

    def _w(self, x: np.ndarray):
        if self.weights is None:
            return None
        if x.shape[-1] != len(self.weights):
            raise DimensionError(
                f"weighted norm of dimension {len(self.weights)} applied to a vector of length {x.shape[-1]}"
            )
        return np.asarray(self.weights)

    def strong_convexity(self, n: int) -> float:
        """Modulus of ``(x, v) -> (||x||^2 + ||v||_*^2) / 2`` on R^n x R^n."""
        if self.weights is None:
            return 1.0
        w = np.asarray(self.weights)
        return float(min(w.min(), (1.0 / w).min()))

    def to_json(self) -> dict:
        if self.is_euclidean:
            return {"norm": "euclidean"}
        return {"norm": "weighted", "weights": list(self.weights)}

    @classmethod
    def from_json(cls, obj) -> "DualityMap":
        if not isinstance(obj, dict) or "norm" not in obj:
            raise SpecError("duality map: missing field 'norm'")
        if obj["norm"] == "euclidean":
            return EUCLIDEAN
        if obj["norm"] == "weighted":
            if "weights" not in obj:
                raise SpecError("duality map: missing field 'weights'")
            try:
                return cls.weighted(obj["weights"])
            except (TypeError, ValueError) as exc:
                raise SpecError(f"duality map: bad field 'weights': {exc}") from None
        raise SpecError(f"duality map: unknown value for field 'norm': {obj['norm']!r}")


EUCLIDEAN = DualityMap()


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def norm(dm: DualityMap, x) -> float:
    x = _vec(x)
    w = dm._w(x)
    sq = np.sum(x * x, axis=-1) if w is None else np.sum(w * x * x, axis=-1)
    return np.sqrt(sq)


def dual_norm(dm: DualityMap, v) -> float:
    v = _vec(v)
    w = dm._w(v)
    sq = np.sum(v * v, axis=-1) if w is None else np.sum(v * v / w, axis=-1)
    return np.sqrt(sq)


def jmap(dm: DualityMap, x) -> np.ndarray:
    x = _vec(x)
    w = dm._w(x)
    return x.copy() if w is None else w * x


def jstar(dm: DualityMap, v) -> np.ndarray:
    v = _vec(v)
    w = dm._w(v)
    return v.copy() if w is None else v / w


def pairing_defect(dm: DualityMap, z, u, tol: float = DEFAULT_EQUALITY_TOL):
    """``||z||^2 + ||u||_*^2 + 2 <z, u>``, always >= 0.

    Returns ``(value, witness)`` where ``witness`` is ``-jmap(z)`` when the value
    is within ``tol`` of zero (the only ``u`` achieving equality) and None
    otherwise.
    """
    z, u = _vec(z), _vec(u)
    if z.shape != u.shape:
        raise DimensionError(f"z has shape {z.shape}, u has shape {u.shape}")
    # sum of squares of sqrt(w) z + u / sqrt(w): same quantity, no cancellation
    w = dm._w(z)
    root = 1.0 if w is None else np.sqrt(w)
    value = float(np.sum((root * z + u / root) ** 2))
    witness = -jmap(dm, z) if value <= tol else None
    return value, witness
