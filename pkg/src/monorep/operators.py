"""Finite operator graphs, a catalog of maximal monotone operators with
closed-form resolvents, and the surjectivity probe for ``T + J``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .duality import DualityMap
from .errors import DimensionError, MonotonicityError, SpecError, UnsupportedError
from .grid import GridSpec

__all__ = [
    "probe_points",
    "OperatorGraph",
    "AnalyticOperator",
    "MONOTONE_TOL",
    "monotonicity_check",
    "sample_graph",
    "analytic_resolvent",
    "maximality_probe",
    "ProbeReport",
    "thread_cap",
]

MONOTONE_TOL = 1e-12
_PSD_TOL = 1e-12


def thread_cap() -> int:
    """Worker count for parallel sweeps, capped by ``MONOREP_THREADS``."""
    raw = os.environ.get("MONOREP_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


class OperatorGraph:
    """Finite set of pairs ``(x, v)`` with ``v in T(x)``.

    Duplicate pairs are dropped (first occurrence kept).  ``verified`` records
    whether the graph came from a representative that passed verification;
    it is None for graphs built directly.
    """

    def __init__(self, xs, vs, verified: bool | None = None):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        vs = np.atleast_2d(np.asarray(vs, dtype=float))
        if xs.shape != vs.shape:
            raise DimensionError(f"x block has shape {xs.shape}, v block has shape {vs.shape}")
        if xs.size:
            _, first = np.unique(np.hstack([xs, vs]), axis=0, return_index=True)
            keep = np.sort(first)
            xs, vs = xs[keep], vs[keep]
        xs.setflags(write=False)
        vs.setflags(write=False)
        self.xs = xs
        self.vs = vs
        self.verified = verified

    @classmethod
    def from_pairs(cls, pairs, dim: int | None = None) -> "OperatorGraph":
        pairs = [(np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(v, float))) for x, v in pairs]
        if not pairs:
            if dim is None:
                raise ValueError("empty graph needs an explicit dim")
            return cls(np.empty((0, dim)), np.empty((0, dim)))
        lengths = {p.size for pair in pairs for p in pair}
        if len(lengths) != 1:
            raise DimensionError(f"pairs mix vector lengths {sorted(lengths)}")
        return cls([x for x, _ in pairs], [v for _, v in pairs])

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def __len__(self) -> int:
        return self.xs.shape[0]

    def __iter__(self):
        return iter(zip(self.xs, self.vs))

    def __repr__(self) -> str:
        return f"OperatorGraph(dim={self.dim}, points={len(self)})"

    def point_set(self, decimals: int = 9) -> set:
        """Pairs as a set of rounded tuples, for set comparisons."""
        z = np.round(np.hstack([self.xs, self.vs]), decimals) + 0.0
        return {tuple(row) for row in z}

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "points": [[x.tolist(), v.tolist()] for x, v in self],
        }

    @classmethod
    def from_json(cls, obj) -> "OperatorGraph":
        if not isinstance(obj, dict):
            raise SpecError("graph: expected an object")
        if "points" not in obj:
            raise SpecError("graph: missing field 'points'")
        try:
            pairs = [(p[0], p[1]) for p in obj["points"]]
            g = cls.from_pairs(pairs, dim=obj.get("dim"))
        except (TypeError, IndexError, ValueError) as exc:
            raise SpecError(f"graph: bad field 'points': {exc}") from None
        if "dim" in obj and g.dim != obj["dim"]:
            raise SpecError(f"graph: field 'dim' is {obj['dim']} but points have length {g.dim}")
        return g


def monotonicity_check(g: OperatorGraph, tol: float = MONOTONE_TOL):
    """``(True, None)`` if ``<x_i - x_j, v_i - v_j> >= -tol`` for every pair,
    else ``(False, (i, j))`` for the first violating pair in row-major order."""
    X, V = g.xs, g.vs
    m = X.shape[0]
    block = max(1, 2_000_000 // max(1, m * max(1, g.dim)))
    for start in range(0, m, block):
        dx = X[start:start + block, None, :] - X[None, :, :]
        dv = V[start:start + block, None, :] - V[None, :, :]
        prod = np.einsum("ijk,ijk->ij", dx, dv)
        bad = np.argwhere(prod < -tol)
        if bad.size:
            i, j = bad[0]
            i += start
            return False, (int(min(i, j)), int(max(i, j)))
    return True, None


def _check_square(A, name):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} has non-finite entries")
    return A


def _min_sym_eig(A) -> float:
    return float(np.linalg.eigvalsh(0.5 * (A + A.T)).min())


@dataclass(frozen=True, eq=False)
class AnalyticOperator:
    """Maximal monotone operator with a closed-form resolvent.

    kind is one of ``linear`` (T x = A x), ``subdiff-quadratic``
    (T x = A x + b, the gradient of x'Ax/2 + b'x with A symmetric PSD),
    ``rotation2d`` (T x = R(theta) x, |theta| <= pi/2) and
    ``normal-cone-box`` (normal cone of the box [lower, upper]).
    """

    kind: str
    params: dict = field(default_factory=dict, compare=False)

    # -- constructors -------------------------------------------------
    @classmethod
    def linear(cls, A) -> "AnalyticOperator":
        A = _check_square(A, "A")
        scale = max(1.0, float(np.abs(A).max()))
        if _min_sym_eig(A) < -_PSD_TOL * scale:
            raise MonotonicityError("linear operator needs A + A^T positive semidefinite")
        return cls("linear", {"A": A})

    @classmethod
    def subdiff_quadratic(cls, A, b=None) -> "AnalyticOperator":
        A = _check_square(A, "A")
        scale = max(1.0, float(np.abs(A).max()))
        if not np.allclose(A, A.T, atol=1e-12 * scale, rtol=0):
            raise MonotonicityError("subdiff-quadratic needs a symmetric A")
        if _min_sym_eig(A) < -_PSD_TOL * scale:
            raise MonotonicityError("subdiff-quadratic needs A positive semidefinite")
        b = np.zeros(A.shape[0]) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        if b.shape != (A.shape[0],):
            raise DimensionError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
        return cls("subdiff-quadratic", {"A": A, "b": b})

    @classmethod
    def rotation2d(cls, theta: float) -> "AnalyticOperator":
        theta = float(theta)
        if not abs(theta) <= np.pi / 2 + 1e-15:
            raise MonotonicityError(f"rotation angle must satisfy |theta| <= pi/2, got {theta}")
        return cls("rotation2d", {"theta": theta})

    @classmethod
    def normal_cone_box(cls, lower, upper) -> "AnalyticOperator":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise DimensionError("lower and upper have different lengths")
        if not np.all(lower < upper):
            raise ValueError("normal-cone-box needs lower < upper on every axis")
        return cls("normal-cone-box", {"lower": lower, "upper": upper})

    @classmethod
    def identity(cls, n: int = 1) -> "AnalyticOperator":
        return cls.linear(np.eye(n))

    # -- structure ----------------------------------------------------
    @property
    def dim(self) -> int:
        if self.kind == "rotation2d":
            return 2
        if self.kind == "normal-cone-box":
            return self.params["lower"].size
        return self.params["A"].shape[0]

    @property
    def is_affine(self) -> bool:
        return self.kind != "normal-cone-box"

    def affine_parts(self):
        """``(A, b)`` with ``T x = A x + b`` for the single-valued kinds."""
        if self.kind == "linear":
            return self.params["A"], np.zeros(self.dim)
        if self.kind == "subdiff-quadratic":
            return self.params["A"], self.params["b"]
        if self.kind == "rotation2d":
            t = self.params["theta"]
            c, s = np.cos(t), np.sin(t)
            # exact zeros at multiples of pi/2 keep rotation graphs on the grid
            c = 0.0 if abs(c) < 1e-15 else c
            s = 0.0 if abs(s) < 1e-15 else s
            return np.array([[c, -s], [s, c]]), np.zeros(2)
        raise UnsupportedError(f"{self.kind} is not single-valued")

    def apply(self, x) -> np.ndarray:
        A, b = self.affine_parts()
        return np.asarray(x, dtype=float) @ A.T + b

    def contains(self, x, v, tol: float = 1e-10) -> bool:
        """Graph membership ``v in T(x)`` up to ``tol``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.is_affine:
            return bool(np.linalg.norm(v - self.apply(x)) <= tol * (1.0 + np.linalg.norm(v)))
        lo, hi = self.params["lower"], self.params["upper"]
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        at_lo = np.abs(x - lo) <= tol
        at_hi = np.abs(x - hi) <= tol
        interior = ~(at_lo | at_hi)
        return bool(
            np.all(np.abs(v[interior]) <= tol)
            and np.all(v[at_lo & ~at_hi] <= tol)
            and np.all(v[at_hi & ~at_lo] >= -tol)
        )

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "A": self.params["A"].tolist()}
        if self.kind == "subdiff-quadratic":
            return {"kind": "subdiff-quadratic", "A": self.params["A"].tolist(), "b": self.params["b"].tolist()}
        if self.kind == "rotation2d":
            return {"kind": "rotation2d", "theta": self.params["theta"]}
        return {
            "kind": "normal-cone-box",
            "lower": self.params["lower"].tolist(),
            "upper": self.params["upper"].tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "AnalyticOperator":
        if not isinstance(obj, dict):
            raise SpecError("operator: expected an object")
        if "kind" not in obj:
            raise SpecError("operator: missing field 'kind'")
        kind = obj["kind"]
        required = {
            "linear": ("A",),
            "subdiff-quadratic": ("A",),
            "rotation2d": ("theta",),
            "normal-cone-box": ("lower", "upper"),
        }
        if kind not in required:
            raise SpecError(f"operator: unknown value for field 'kind': {kind!r}")
        for name in required[kind]:
            if name not in obj:
                raise SpecError(f"operator: missing field {name!r}")
        try:
            if kind == "linear":
                return cls.linear(obj["A"])
            if kind == "subdiff-quadratic":
                return cls.subdiff_quadratic(obj["A"], obj.get("b"))
            if kind == "rotation2d":
                return cls.rotation2d(obj["theta"])
            return cls.normal_cone_box(obj["lower"], obj["upper"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"operator ({kind}): bad field: {exc}") from None


def sample_graph(op: AnalyticOperator, box: GridSpec, fan: int = 5, fan_step: float = 1.0) -> OperatorGraph:
    """Pairs of ``op`` at the points of ``box``.

    For the normal cone of a box, every sampled ``x`` in the box gives
    ``(x, 0)``, and each active face additionally gives ``fan`` outward normals
    of lengths ``fan_step, 2*fan_step, ...``.
    """
    if box.dim != op.dim:
        raise DimensionError(f"box has dim {box.dim}, operator has dim {op.dim}")
    X = box.points()
    if op.is_affine:
        return OperatorGraph(X, op.apply(X))
    lo, hi = op.params["lower"], op.params["upper"]
    scale = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    eps = 1e-12 * scale
    xs, vs = [], []
    for x in X:
        if np.any(x < lo - eps) or np.any(x > hi + eps):
            continue
        xs.append(x)
        vs.append(np.zeros(op.dim))
        for i in range(op.dim):
            for side, bound in ((-1.0, lo[i]), (1.0, hi[i])):
                if abs(x[i] - bound) <= eps[i]:
                    for k in range(1, fan + 1):
                        v = np.zeros(op.dim)
                        v[i] = side * k * fan_step
                        xs.append(x)
                        vs.append(v)
    if not xs:
        return OperatorGraph(np.empty((0, op.dim)), np.empty((0, op.dim)))
    return OperatorGraph(xs, vs)


def analytic_resolvent(op: AnalyticOperator, dm: DualityMap, v0) -> np.ndarray:
    """The unique ``x`` with ``v0 in T(x) + x`` (Euclidean duality map only)."""
    if not dm.is_euclidean:
        raise UnsupportedError("closed-form resolvents assume the Euclidean duality map")
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if v0.shape != (op.dim,):
        raise DimensionError(f"v0 has shape {v0.shape}, operator has dim {op.dim}")
    if op.kind == "normal-cone-box":
        return np.clip(v0, op.params["lower"], op.params["upper"])
    A, b = op.affine_parts()
    return np.linalg.solve(A + np.eye(op.dim), v0 - b)


@dataclass
class ProbeReport:
    """Outcome of :func:`maximality_probe`.

    A fraction of 1 is evidence of surjectivity of ``T + J`` at the probed
    points only; it does not prove maximality.
    """

    fraction: float
    accepted: list
    certificates: list
    failures: dict
    note: str = (
        "surjectivity of T+J certified at probed points only; evidence, not proof of maximality"
    )

    @property
    def n_probes(self) -> int:
        return len(self.accepted)


def probe_points(probes) -> np.ndarray:
    """Probe targets from a :class:`GridSpec` or an ``(m, n)`` array."""
    if isinstance(probes, GridSpec):
        return probes.points()
    pts = np.asarray(probes, dtype=float)
    return pts.reshape(-1, 1) if pts.ndim == 1 else pts


def maximality_probe(h, dm: DualityMap, probes, tol: float = 1e-4,
                     budget: int = 200_000, workers: int | None = None) -> ProbeReport:
    """Run the resolvent solver at every point of ``probes`` (a grid or a point
    array) and report the fraction of accepted certificates.  Solver failures
    count as rejections."""
    from .witness import solve_resolvent

    v0s = probe_points(probes)
    workers = thread_cap() if workers is None else max(1, workers)

    def run(k):
        try:
            return k, solve_resolvent(h, dm, v0s[k], tol=tol, budget=budget), None
        except Exception as exc:  # recorded, not raised
            return k, None, f"{type(exc).__name__}: {exc}"

    if workers == 1:
        results = [run(k) for k in range(len(v0s))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(v0s))))
    results.sort(key=lambda r: r[0])
    certs = [c for _, c, _ in results]
    accepted = [c is not None and c.accepted for c in certs]
    failures = {k: err for k, _, err in results if err is not None}
    return ProbeReport(float(np.mean(accepted)), accepted, certs, failures)
