"""Convex functions on R^n x R^n that represent monotone operators.

Every representative ``h`` is evaluated at pairs ``(x, v)``; it may take the
value +inf.  Besides evaluation, representatives expose what the resolvent
solver needs: a subgradient, a projection onto a closed convex set containing
``dom h`` and, where cheap, a proximal map.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GridFormatError, MonotonicityError, SpecError, UnsupportedError
from .grid import GridFn, GridSpec, conjugate_nd, read_gridfn
from .maxaffine import MaxAffineFn, conjugate_max_affine
from .operators import AnalyticOperator, OperatorGraph, sample_graph

__all__ = [
    "Representative",
    "FitzpatrickRep",
    "AffinePhi",
    "AffineIndicator",
    "BoxPhi",
    "FenchelYoungQuadratic",
    "GridRep",
    "MixRep",
    "identity_phi",
    "identity_indicator",
    "closed_form_phi",
    "closed_form_indicator",
    "fenchel_young",
    "fitzpatrick_eval",
    "fitzpatrick_linear_closed_form",
    "j_transform",
    "membership_check",
    "minimality_check",
    "MembershipVerdict",
    "MinimalityVerdict",
    "representative_from_json",
    "load_representative",
    "coupling",
]

# relative tolerance for "c lies in range(S)" / "v = Ax + b" tests
_SUBSPACE_TOL = 1e-9


def coupling(x, v):
    """Duality product ``<x, v>`` over the last axis."""
    return np.sum(np.asarray(x, float) * np.asarray(v, float), axis=-1)


def _as_pair(x, v, n):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape[-1:] != (n,) or v.shape[-1:] != (n,) or x.shape != v.shape:
        raise DimensionError(f"expected x, v of length {n}, got shapes {x.shape} and {v.shape}")
    return x, v


def _scalar(out):
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _affine_projector(M, r):
    """Closure projecting ``z`` onto ``{z : M z = r}``."""
    if M.shape[0] == 0:
        return lambda z: z
    pinv = np.linalg.pinv(M)
    return lambda z: z - pinv @ (M @ z - r)


class Representative:
    """Base class; subclasses set ``dim`` and implement ``_value``."""

    dim: int
    has_prox = False

    def __call__(self, x, v):
        x, v = _as_pair(x, v, self.dim)
        return _scalar(self._value(x, v))

    def _value(self, x, v):
        raise NotImplementedError

    def subgradient(self, x, v):
        """Some element of the subdifferential at a point of the domain."""
        raise NotImplementedError

    def project(self, x, v):
        """Projection onto a closed convex superset of ``dom h`` (identity by default)."""
        return np.asarray(x, float), np.asarray(v, float)

    def prox(self, x, v, alpha):
        raise UnsupportedError(f"{type(self).__name__} has no proximal map")

    def sample(self, spec: GridSpec) -> GridFn:
        """Values on a grid over R^n x R^n (x axes first)."""
        if spec.dim != 2 * self.dim:
            raise DimensionError(f"grid has dim {spec.dim}, need {2 * self.dim}")
        P = spec.points()
        return GridFn(spec, self(P[:, :self.dim], P[:, self.dim:]))

    def to_json(self) -> dict:
        raise NotImplementedError


class FitzpatrickRep(Representative):
    """Fitzpatrick function of a finite graph, as a maximum of affine maps.

    ``phi(x, v) = max_{(y, u) in G} <x, u> + <y, v> - <y, u>``.
    """

    def __init__(self, graph: OperatorGraph):
        if len(graph) == 0:
            raise ValueError("Fitzpatrick function of an empty graph")
        self.graph = graph
        self.dim = graph.dim
        slopes = np.hstack([graph.vs, graph.xs])
        offsets = -coupling(graph.xs, graph.vs)
        self.max_affine = MaxAffineFn(slopes, offsets)

    def _value(self, x, v):
        return self.max_affine(np.concatenate([x, v], axis=-1))

    def subgradient(self, x, v):
        g = self.max_affine.subgradient(np.concatenate([x, v]))
        return g[:self.dim], g[self.dim:]

    def j_exact(self, x, v) -> float:
        """``J(phi)(x, v) = phi*(v, x)`` by linear programming."""
        x, v = _as_pair(x, v, self.dim)
        return conjugate_max_affine(self.max_affine, np.concatenate([v, x]))

    def to_json(self):
        return {"form": "fitzpatrick", "graph": self.graph.to_json()}


def fitzpatrick_eval(g: OperatorGraph, x, v) -> float:
    return FitzpatrickRep(g)(x, v)


def _sym_split(S):
    """Pseudo-inverse of symmetric PSD ``S`` and an orthonormal null-space basis."""
    lam, Q = np.linalg.eigh(S)
    thr = 1e-12 * max(1.0, float(np.abs(lam).max(initial=0.0)))
    rng = lam > thr
    Sinv = (Q[:, rng] / lam[rng]) @ Q[:, rng].T
    return Sinv, Q[:, ~rng]


def fitzpatrick_linear_closed_form(A, x, v) -> float:
    """Exact Fitzpatrick function of ``T x = A x`` at one point.

    Maximizes the concave quadratic ``y -> <x - y, A y - v> + <x, v>``; its
    stationarity condition is ``(A + A^T) y = A^T x + v``, and the supremum is
    +inf when that system is inconsistent.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if A.shape != (x.size, x.size) or v.shape != x.shape:
        raise DimensionError(f"A {A.shape}, x {x.shape}, v {v.shape}")
    S = A + A.T
    scale = max(1.0, float(np.abs(A).max()))
    if np.linalg.eigvalsh(0.5 * S).min() < -1e-12 * scale:
        raise MonotonicityError("A + A^T is not positive semidefinite")
    c = A.T @ x + v
    y, *_ = np.linalg.lstsq(S, c, rcond=1e-12)
    if np.linalg.norm(S @ y - c) > _SUBSPACE_TOL * (1.0 + np.linalg.norm(c)):
        return np.inf
    return float(np.dot(x - y, A @ y - v) + np.dot(x, v))


class AffinePhi(Representative):
    """Closed-form Fitzpatrick function of ``T x = A x + b`` (A + A^T PSD).

    With ``c = A^T x + v - b`` and ``S = A + A^T``:
    ``phi(x, v) = c' S^+ c / 2 + <x, b>`` when ``c`` lies in the range of ``S``,
    +inf otherwise.
    """

    def __init__(self, A, b=None, name: str | None = None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        b = np.zeros(n) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        S = A + A.T
        if np.linalg.eigvalsh(0.5 * S).min() < -1e-12 * max(1.0, float(np.abs(A).max())):
            raise MonotonicityError("A + A^T is not positive semidefinite")
        self.A, self.b, self.dim, self.name = A, b, n, name
        self.Sinv, self.null = _sym_split(S)
        M = self.null.T @ np.hstack([A.T, np.eye(n)])
        self._proj = _affine_projector(M, self.null.T @ b)

    def _c(self, x, v):
        return x @ self.A + v - self.b

    def _value(self, x, v):
        c = self._c(x, v)
        quad = 0.5 * np.einsum("...i,ij,...j->...", c, self.Sinv, c) + x @ self.b
        if self.null.shape[1]:
            off = np.linalg.norm(c @ self.null, axis=-1)
            quad = np.where(off > _SUBSPACE_TOL * (1.0 + np.linalg.norm(c, axis=-1)), np.inf, quad)
        return quad

    def subgradient(self, x, v):
        y = self.Sinv @ self._c(np.asarray(x, float), np.asarray(v, float))
        return self.A @ y + self.b, y

    def project(self, x, v):
        z = self._proj(np.concatenate([x, v]))
        return z[:self.dim], z[self.dim:]

    def to_json(self):
        if self.name == "identity-phi":
            return {"form": "closed", "id": "identity-phi", "dim": self.dim}
        op = {"kind": "subdiff-quadratic", "A": self.A.tolist(), "b": self.b.tolist()} if np.any(self.b) \
            else {"kind": "linear", "A": self.A.tolist()}
        return {"form": "closed", "id": "phi", "operator": op}


class AffineIndicator(Representative):
    """``<x, v> + indicator{v = A x + b}``, the largest representative of an
    affine monotone operator."""

    def __init__(self, A, b=None, name: str | None = None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        b = np.zeros(n) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        if np.linalg.eigvalsh(0.5 * (A + A.T)).min() < -1e-12 * max(1.0, float(np.abs(A).max())):
            raise MonotonicityError("A + A^T is not positive semidefinite")
        self.A, self.b, self.dim, self.name = A, b, n, name
        self._proj = _affine_projector(np.hstack([-A, np.eye(n)]), b)

    def _value(self, x, v):
        r = np.linalg.norm(v - x @ self.A.T - self.b, axis=-1)
        on = r <= _SUBSPACE_TOL * (1.0 + np.linalg.norm(v, axis=-1))
        return np.where(on, coupling(x, v), np.inf)

    def subgradient(self, x, v):
        # gradient of the smooth extension <x, v>
        return np.array(v, float), np.array(x, float)

    def project(self, x, v):
        z = self._proj(np.concatenate([x, v]))
        return z[:self.dim], z[self.dim:]

    def to_json(self):
        if self.name == "identity-indicator":
            return {"form": "closed", "id": "identity-indicator", "dim": self.dim}
        op = {"kind": "subdiff-quadratic", "A": self.A.tolist(), "b": self.b.tolist()} if np.any(self.b) \
            else {"kind": "linear", "A": self.A.tolist()}
        return {"form": "closed", "id": "indicator", "operator": op}


class BoxPhi(Representative):
    """``indicator_C(x) + sigma_C(v)`` for a box C: the Fitzpatrick function
    (and the Fenchel-Young representative) of the normal cone of C."""

    has_prox = True

    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        self.dim = self.lower.size
        self._eps = 1e-12 * np.maximum(1.0, np.maximum(np.abs(self.lower), np.abs(self.upper)))

    def support(self, v):
        return np.sum(np.maximum(self.lower * v, self.upper * v), axis=-1)

    def _value(self, x, v):
        inside = np.all((x >= self.lower - self._eps) & (x <= self.upper + self._eps), axis=-1)
        return np.where(inside, self.support(v), np.inf)

    def subgradient(self, x, v):
        v = np.asarray(v, float)
        gv = np.where(v > 0, self.upper, np.where(v < 0, self.lower, np.clip(x, self.lower, self.upper)))
        return np.zeros(self.dim), gv

    def project(self, x, v):
        return np.clip(x, self.lower, self.upper), np.asarray(v, float)

    def prox(self, x, v, alpha):
        # Moreau: prox of alpha * sigma_C is w - alpha * P_C(w / alpha)
        v = np.asarray(v, float)
        return np.clip(x, self.lower, self.upper), v - alpha * np.clip(v / alpha, self.lower, self.upper)

    def to_json(self):
        return {
            "form": "closed",
            "id": "phi",
            "operator": {"kind": "normal-cone-box", "lower": self.lower.tolist(), "upper": self.upper.tolist()},
        }


class FenchelYoungQuadratic(Representative):
    """``f(x) + f*(v)`` for ``f(x) = x'Ax/2 + b'x`` with A symmetric PSD."""

    def __init__(self, A, b=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        b = np.zeros(n) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        if not np.allclose(A, A.T, atol=1e-12 * max(1.0, float(np.abs(A).max())), rtol=0):
            raise MonotonicityError("Fenchel-Young representative needs a symmetric A")
        self.A, self.b, self.dim = A, b, n
        self.Ainv, self.null = _sym_split(A)
        if np.linalg.eigvalsh(A).min() < -1e-12 * max(1.0, float(np.abs(A).max())):
            raise MonotonicityError("A is not positive semidefinite")
        M = np.hstack([np.zeros((self.null.shape[1], n)), self.null.T])
        self._proj = _affine_projector(M, self.null.T @ b)

    def _value(self, x, v):
        w = v - self.b
        f = 0.5 * np.einsum("...i,ij,...j->...", x, self.A, x) + x @ self.b
        fstar = 0.5 * np.einsum("...i,ij,...j->...", w, self.Ainv, w)
        if self.null.shape[1]:
            off = np.linalg.norm(w @ self.null, axis=-1)
            fstar = np.where(off > _SUBSPACE_TOL * (1.0 + np.linalg.norm(w, axis=-1)), np.inf, fstar)
        return f + fstar

    def subgradient(self, x, v):
        x, v = np.asarray(x, float), np.asarray(v, float)
        return self.A @ x + self.b, self.Ainv @ (v - self.b)

    def project(self, x, v):
        z = self._proj(np.concatenate([x, v]))
        return z[:self.dim], z[self.dim:]

    def to_json(self):
        return {
            "form": "closed",
            "id": "fenchel-young",
            "operator": {"kind": "subdiff-quadratic", "A": self.A.tolist(), "b": self.b.tolist()},
        }


class GridRep(Representative):
    """Representative given by samples on a grid over R^n x R^n.

    Off-grid values use multilinear interpolation; a cell corner at +inf with
    positive weight makes the value +inf, and points outside the box are +inf.
    """

    def __init__(self, fn: GridFn, source: str | None = None):
        if fn.dim % 2:
            raise DimensionError(f"grid representative needs an even grid dimension, got {fn.dim}")
        self.fn = fn
        self.dim = fn.dim // 2
        self.source = source
        self._lo = np.asarray(fn.spec.lower)
        self._hi = np.asarray(fn.spec.upper)
        self._h = fn.spec.spacing
        self._n = np.asarray(fn.spec.counts)

    @property
    def spec(self) -> GridSpec:
        return self.fn.spec

    def _interp(self, P):
        P = np.atleast_2d(P)
        out = np.zeros(P.shape[0])
        inside = np.all((P >= self._lo - 1e-12 * self._h) & (P <= self._hi + 1e-12 * self._h), axis=1)
        t = (np.clip(P, self._lo, self._hi) - self._lo) / self._h
        i0 = np.clip(np.floor(t).astype(int), 0, self._n - 2)
        frac = np.clip(t - i0, 0.0, 1.0)
        frac = np.where(frac < 1e-12, 0.0, np.where(frac > 1 - 1e-12, 1.0, frac))
        d = P.shape[1]
        vals = self.fn.values
        for corner in range(1 << d):
            bits = np.array([(corner >> (d - 1 - k)) & 1 for k in range(d)])
            w = np.prod(np.where(bits == 1, frac, 1.0 - frac), axis=1)
            idx = tuple((i0 + bits).T)
            fc = vals[idx]
            contrib = np.where(w > 0, w * np.where(np.isfinite(fc), fc, 0.0), 0.0)
            out += contrib
            out = np.where((w > 0) & ~np.isfinite(fc), np.inf, out)
        return np.where(inside, out, np.inf)

    def _value(self, x, v):
        z = np.concatenate([x, v], axis=-1)
        flat = z.reshape(-1, 2 * self.dim)
        return self._interp(flat).reshape(z.shape[:-1])

    def subgradient(self, x, v):
        z = np.concatenate([np.asarray(x, float), np.asarray(v, float)])
        f0 = self._interp(z)[0]
        g = np.zeros_like(z)
        for i in range(z.size):
            e = np.zeros_like(z)
            e[i] = self._h[i]
            fwd = self._interp(z + e)[0]
            if np.isfinite(fwd) and np.isfinite(f0):
                g[i] = (fwd - f0) / self._h[i]
                continue
            bwd = self._interp(z - e)[0]
            if np.isfinite(bwd) and np.isfinite(f0):
                g[i] = (f0 - bwd) / self._h[i]
        return g[:self.dim], g[self.dim:]

    def project(self, x, v):
        z = np.clip(np.concatenate([x, v]), self._lo, self._hi)
        return z[:self.dim], z[self.dim:]

    def nearest_finite(self, x, v):
        """Finite grid point closest to ``(x, v)``."""
        P = self.spec.points()
        vals = self.fn.values.ravel()
        P = P[np.isfinite(vals)]
        z = np.concatenate([x, v])
        k = int(np.argmin(np.sum((P - z) ** 2, axis=1)))
        return P[k, :self.dim], P[k, self.dim:]

    def to_json(self):
        if self.source is None:
            raise UnsupportedError("grid representative without a source file cannot be serialized")
        return {"form": "grid", "file": self.source}


class MixRep(Representative):
    """Convex combination ``sum_k w_k h_k`` evaluated lazily.

    The projection composes the members' projections, which is exact when at
    most one member restricts the domain (or the domains are nested).
    """

    def __init__(self, parts):
        parts = [(float(w), h) for w, h in parts]
        if not parts:
            raise ValueError("empty convex combination")
        weights = np.array([w for w, _ in parts])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must lie in the unit simplex, got {weights.tolist()}")
        dims = {h.dim for _, h in parts}
        if len(dims) != 1:
            raise DimensionError(f"members have different dimensions {sorted(dims)}")
        self.parts = parts
        self.dim = dims.pop()

    def _value(self, x, v):
        total = np.zeros(np.broadcast_shapes(x.shape[:-1]))
        for w, h in self.parts:
            if w == 0:
                continue
            total = total + w * np.asarray(h(x, v))
        return total

    def subgradient(self, x, v):
        gx = np.zeros(self.dim)
        gv = np.zeros(self.dim)
        for w, h in self.parts:
            if w:
                a, b = h.subgradient(x, v)
                gx += w * a
                gv += w * b
        return gx, gv

    def project(self, x, v):
        for w, h in self.parts:
            if w:
                x, v = h.project(x, v)
        return x, v

    def nearest_finite(self, x, v):
        for w, h in self.parts:
            if w and hasattr(h, "nearest_finite"):
                return h.nearest_finite(x, v)
        return self.project(x, v)

    def to_json(self):
        return {"form": "mix", "parts": [[w, h.to_json()] for w, h in self.parts]}


# -- catalog -----------------------------------------------------------------

def identity_phi(n: int = 1) -> AffinePhi:
    """``|x + v|^2 / 4``: Fitzpatrick function of the identity."""
    return AffinePhi(np.eye(n), name="identity-phi")


def identity_indicator(n: int = 1) -> AffineIndicator:
    """``<x, v> + indicator{v = x}``: largest representative of the identity."""
    return AffineIndicator(np.eye(n), name="identity-indicator")


def closed_form_phi(op: AnalyticOperator) -> Representative:
    if op.kind == "normal-cone-box":
        return BoxPhi(op.params["lower"], op.params["upper"])
    return AffinePhi(*op.affine_parts())


def closed_form_indicator(op: AnalyticOperator) -> Representative:
    if not op.is_affine:
        raise UnsupportedError("indicator representative needs a single-valued operator")
    return AffineIndicator(*op.affine_parts())


def fenchel_young(op: AnalyticOperator) -> Representative:
    if op.kind == "normal-cone-box":
        return BoxPhi(op.params["lower"], op.params["upper"])
    A, b = op.affine_parts()
    if not np.allclose(A, A.T):
        raise UnsupportedError("Fenchel-Young representative needs a gradient operator (symmetric A)")
    return FenchelYoungQuadratic(A, b)


def j_transform(h: Representative, eval_spec: GridSpec, sample_spec: GridSpec | None = None,
                exact: bool = False) -> GridRep:
    """``J(h)(x, v) = h*(v, x)`` on the points of ``eval_spec``.

    The conjugate is the discrete one of ``h`` sampled on ``sample_spec``
    (default: ``eval_spec``), so the result never exceeds the true transform.
    With ``exact=True`` and a :class:`FitzpatrickRep`, each value is computed
    exactly by linear programming instead.
    """
    n = h.dim
    if eval_spec.dim != 2 * n:
        raise DimensionError(f"evaluation grid has dim {eval_spec.dim}, need {2 * n}")
    if exact:
        if not isinstance(h, FitzpatrickRep):
            raise UnsupportedError("exact J-transform is available for Fitzpatrick functions of graphs only")
        P = eval_spec.points()
        vals = [h.j_exact(p[:n], p[n:]) for p in P]
        return GridRep(GridFn(eval_spec, vals))
    sample_spec = eval_spec if sample_spec is None else sample_spec
    hs = h.sample(sample_spec)
    dual = GridSpec.product(eval_spec.sub(n, 2 * n), eval_spec.sub(0, n))
    conj = conjugate_nd(hs, dual)
    values = np.transpose(conj.values, list(range(n, 2 * n)) + list(range(n)))
    return GridRep(GridFn(eval_spec, values))


@dataclass
class MembershipVerdict:
    passed: bool
    lower_ok: bool
    graph_ok: bool
    min_gap: float
    argmin: tuple
    max_graph_deviation: float
    worst_graph_index: int | None
    tol: float

    def to_json(self):
        return {
            "passed": self.passed,
            "lower_ok": self.lower_ok,
            "graph_ok": self.graph_ok,
            "min_gap": self.min_gap,
            "argmin": [list(map(float, a)) for a in self.argmin],
            "max_graph_deviation": self.max_graph_deviation,
            "worst_graph_index": self.worst_graph_index,
            "tol": self.tol,
        }


def _grid_gap(h: Representative, box: GridSpec):
    n = h.dim
    if box.dim != 2 * n:
        raise DimensionError(f"box has dim {box.dim}, need {2 * n}")
    P = box.points()
    X, V = P[:, :n], P[:, n:]
    return X, V, np.asarray(h(X, V), dtype=float) - coupling(X, V)


def membership_check(h: Representative, g: OperatorGraph, box: GridSpec, tol: float) -> MembershipVerdict:
    """Check ``h >= <x, v> - tol`` on the box grid and ``|h - <x, v>| <= tol`` on ``g``."""
    X, V, gap = _grid_gap(h, box)
    k = int(np.argmin(gap))
    min_gap = float(gap[k])
    if len(g):
        dev = np.abs(np.asarray(h(g.xs, g.vs), dtype=float) - coupling(g.xs, g.vs))
        j = int(np.argmax(dev))
        max_dev, worst = float(dev[j]), j
    else:
        max_dev, worst = 0.0, None
    lower_ok = min_gap >= -tol
    graph_ok = max_dev <= tol
    return MembershipVerdict(lower_ok and graph_ok, lower_ok, graph_ok, min_gap, (X[k], V[k]),
                             max_dev, worst, tol)


@dataclass
class MinimalityVerdict:
    passed: bool
    max_excess: list  # per candidate, max of phi_G - candidate over the box grid
    worst_points: list
    tol: float

    def to_json(self):
        return {
            "passed": self.passed,
            "max_excess": self.max_excess,
            "worst_points": [[list(map(float, a)) for a in p] for p in self.worst_points],
            "tol": self.tol,
        }


def minimality_check(g: OperatorGraph, candidates, box: GridSpec, tol: float) -> MinimalityVerdict:
    """Check ``phi_G <= candidate + tol`` at every box grid point, per candidate.

    Candidates are expected to represent the operator sampled by ``g``; that
    precondition is not re-checked here.
    """
    phi = FitzpatrickRep(g)
    n = g.dim
    P = box.points()
    X, V = P[:, :n], P[:, n:]
    base = phi(X, V)
    excess, worst = [], []
    for c in candidates:
        diff = base - np.asarray(c(X, V), dtype=float)
        k = int(np.argmax(diff))
        excess.append(float(diff[k]))
        worst.append((X[k], V[k]))
    return MinimalityVerdict(all(e <= tol for e in excess), excess, worst, tol)


# -- JSON specs --------------------------------------------------------------

def _box_from_json(obj, field_name) -> GridSpec:
    try:
        axes = [(float(a), float(b), int(n)) for a, b, n in obj]
        return GridSpec([a for a, _, _ in axes], [b for _, b, _ in axes], [n for _, _, n in axes])
    except (TypeError, ValueError) as exc:
        raise SpecError(f"representative: bad field {field_name!r}: {exc}") from None


def representative_from_json(obj, base_dir: str = ".") -> Representative:
    """Build a representative from its JSON spec (see README for the schema)."""
    if not isinstance(obj, dict):
        raise SpecError("representative: expected an object")
    if "form" not in obj:
        raise SpecError("representative: missing field 'form'")
    form = obj["form"]
    if form == "closed":
        if "id" not in obj:
            raise SpecError("representative: missing field 'id'")
        rid = obj["id"]
        if rid in ("identity-phi", "identity-indicator"):
            n = obj.get("dim", 1)
            if not isinstance(n, int) or n < 1:
                raise SpecError("representative: field 'dim' must be a positive integer")
            return identity_phi(n) if rid == "identity-phi" else identity_indicator(n)
        builders = {"phi": closed_form_phi, "indicator": closed_form_indicator, "fenchel-young": fenchel_young}
        if rid not in builders:
            raise SpecError(f"representative: unknown value for field 'id': {rid!r}")
        if "operator" not in obj:
            raise SpecError("representative: missing field 'operator'")
        op = AnalyticOperator.from_json(obj["operator"])
        try:
            return builders[rid](op)
        except (UnsupportedError, MonotonicityError) as exc:
            raise SpecError(f"representative: field 'id' {rid!r} not available: {exc}") from None
    if form == "fitzpatrick":
        if "graph" in obj:
            g = OperatorGraph.from_json(obj["graph"])
        elif "operator" in obj:
            if "box" not in obj:
                raise SpecError("representative: missing field 'box'")
            op = AnalyticOperator.from_json(obj["operator"])
            box = _box_from_json(obj["box"], "box")
            try:
                g = sample_graph(op, box, fan=int(obj.get("fan", 5)))
            except (DimensionError, ValueError) as exc:
                raise SpecError(f"representative: bad field 'box': {exc}") from None
        else:
            raise SpecError("representative: missing field 'graph'")
        if len(g) == 0:
            raise SpecError("representative: field 'graph' is empty")
        return FitzpatrickRep(g)
    if form == "grid":
        if "file" not in obj:
            raise SpecError("representative: missing field 'file'")
        path = obj["file"]
        if not isinstance(path, str):
            raise SpecError("representative: field 'file' must be a string")
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            fn = read_gridfn(full)
        except OSError as exc:
            raise SpecError(f"representative: field 'file': cannot read {full}: {exc.strerror}") from None
        except GridFormatError as exc:
            raise SpecError(f"representative: field 'file': {full}: {exc}") from None
        try:
            return GridRep(fn, source=path)
        except DimensionError as exc:
            raise SpecError(f"representative: field 'file': {exc}") from None
    if form == "mix":
        parts = obj.get("parts")
        if not isinstance(parts, list) or not parts:
            raise SpecError("representative: field 'parts' must be a nonempty list")
        built = []
        for k, item in enumerate(parts):
            if not (isinstance(item, list) and len(item) == 2):
                raise SpecError(f"representative: field 'parts[{k}]' must be [weight, spec]")
            built.append((item[0], representative_from_json(item[1], base_dir)))
        try:
            return MixRep(built)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"representative: bad field 'parts': {exc}") from None
    raise SpecError(f"representative: unknown value for field 'form': {form!r}")


def load_representative(path: str) -> Representative:
    """Read a JSON representative spec; relative grid files resolve against its directory."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(obj, dict) and "representative" in obj:
        obj = obj["representative"]
    return representative_from_json(obj, os.path.dirname(os.path.abspath(path)))
