"""Verification of representative functions, extraction of the operator they
encode, and resolvent computation certified by the residual gap ``C``.

For a representative ``h`` (``h >= <x, v>`` and ``J(h) >= <x, v>``) and a
target ``v0`` the objective

    phi(x, v) = (||v - v0||_*^2 + ||x||^2) / 2 - <v0, x> + h(x, v)

is strongly convex, nonnegative, and vanishes exactly at the pair with
``v in T(x)`` and ``v + J(x) = v0``.  The solver minimizes it and reports the
two components that must vanish: the coupling gap ``h(x, v) - <x, v>`` and the
fixed-point residual ``||v + J(x) - v0||_*``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .duality import DualityMap, dual_norm, jmap, jstar, norm, pairing_defect
from .errors import DimensionError, InfeasibleStartError, NonMonotoneExtractionError
from .grid import GridSpec
from .operators import OperatorGraph, monotonicity_check
from .representations import Representative, coupling, j_transform

__all__ = [
    "RepresentativeVerdict",
    "verify_representative",
    "extract_operator",
    "phi_objective",
    "phi_objective_first_form",
    "residuals",
    "ResolventCertificate",
    "solve_resolvent",
    "DEFAULT_TOL",
    "DEFAULT_BUDGET",
]

DEFAULT_TOL = 1e-4
DEFAULT_BUDGET = 200_000


@dataclass
class RepresentativeVerdict:
    passed: bool
    primal_ok: bool
    dual_ok: bool
    min_gap_h: float
    argmin_h: tuple
    min_gap_jh: float
    argmin_jh: tuple
    tol: float
    note: str = "J(h) is the conjugate of the grid restriction of h (a lower bound of the true transform)"

    def to_json(self):
        return {
            "passed": self.passed,
            "primal_ok": self.primal_ok,
            "dual_ok": self.dual_ok,
            "min_gap_h": self.min_gap_h,
            "argmin_h": [list(map(float, a)) for a in self.argmin_h],
            "min_gap_jh": self.min_gap_jh,
            "argmin_jh": [list(map(float, a)) for a in self.argmin_jh],
            "tol": self.tol,
            "note": self.note,
        }


def verify_representative(h: Representative, box: GridSpec, tol: float,
                          sample_box: GridSpec | None = None) -> RepresentativeVerdict:
    """Check ``h(x, v) >= <x, v> - tol`` and ``J(h)(x, v) >= <x, v> - tol`` on the box grid.

    ``sample_box`` is the grid on which ``h`` is sampled for the discrete
    conjugate; it defaults to ``box``.  Raises :class:`ProperError` if ``h`` is
    +inf on the whole sampling grid.
    """
    n = h.dim
    if box.dim != 2 * n:
        raise DimensionError(f"box has dim {box.dim}, need {2 * n}")
    P = box.points()
    X, V = P[:, :n], P[:, n:]
    pairing = coupling(X, V)
    gap_h = np.asarray(h(X, V), dtype=float) - pairing
    jh = j_transform(h, box, sample_spec=sample_box)
    gap_jh = jh.fn.values.ravel() - pairing
    i, j = int(np.argmin(gap_h)), int(np.argmin(gap_jh))
    primal_ok = bool(gap_h[i] >= -tol)
    dual_ok = bool(gap_jh[j] >= -tol)
    return RepresentativeVerdict(primal_ok and dual_ok, primal_ok, dual_ok,
                                 float(gap_h[i]), (X[i], V[i]), float(gap_jh[j]), (X[j], V[j]), tol)


def extract_operator(h: Representative, box: GridSpec, tol: float, verify: bool = True,
                     verify_tol: float | None = None) -> OperatorGraph:
    """Grid points of ``box`` where ``h(x, v) - <x, v> <= tol``.

    With ``verify=True`` the representative is verified first (at
    ``verify_tol``, default ``tol``) and the result's ``verified`` flag records
    the outcome.  Raises :class:`NonMonotoneExtractionError` when the extracted
    set is not monotone.
    """
    verified = None
    if verify:
        verified = verify_representative(h, box, tol if verify_tol is None else verify_tol).passed
    n = h.dim
    P = box.points()
    X, V = P[:, :n], P[:, n:]
    gap = np.asarray(h(X, V), dtype=float) - coupling(X, V)
    keep = gap <= tol
    g = OperatorGraph(X[keep], V[keep], verified=verified) if keep.any() else \
        OperatorGraph(np.empty((0, n)), np.empty((0, n)), verified=verified)
    ok, pair = monotonicity_check(g)
    if not ok:
        i, j = pair
        raise NonMonotoneExtractionError(
            f"extracted points {i} (x={g.xs[i].tolist()}, v={g.vs[i].tolist()}) and "
            f"{j} (x={g.xs[j].tolist()}, v={g.vs[j].tolist()}) violate monotonicity; "
            f"tol={tol} is too loose or h is not a representative",
            pair,
        )
    return g


def phi_objective(h: Representative, dm: DualityMap, v0, x, v) -> float:
    """``(||v - v0||_*^2 + ||x||^2) / 2 - <v0, x> + h(x, v)``."""
    x, v, v0 = (np.asarray(a, dtype=float) for a in (x, v, v0))
    return float(0.5 * (dual_norm(dm, v - v0) ** 2 + norm(dm, x) ** 2) - np.dot(v0, x) + h(x, v))


def phi_objective_first_form(h: Representative, dm: DualityMap, v0, x, v) -> float:
    """Same objective written as half a pairing defect plus the coupling gap."""
    x, v, v0 = (np.asarray(a, dtype=float) for a in (x, v, v0))
    defect = norm(dm, x) ** 2 + dual_norm(dm, v - v0) ** 2 + 2.0 * np.dot(x, v - v0)
    return float(0.5 * defect + (h(x, v) - np.dot(x, v)))


def residuals(dm: DualityMap, x, v, v0):
    """``r = J_*(v - v0) + x``, ``rho = v - v0 + J(x)`` and ``C = <r, rho>``."""
    x, v, v0 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (x, v, v0))
    if not (x.shape == v.shape == v0.shape):
        raise DimensionError(f"shapes {x.shape}, {v.shape}, {v0.shape} differ")
    r = jstar(dm, v - v0) + x
    rho = v - v0 + jmap(dm, x)
    return r, rho, float(np.dot(r, rho))


def gap_decomposition(dm: DualityMap, x, v, v0) -> float:
    """``C`` as half of two pairing defects; equals ``residuals(...)[2]``."""
    x, v, v0 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (x, v, v0))
    first, _ = pairing_defect(dm, x, v - v0)
    second, _ = pairing_defect(dm, jstar(dm, v - v0), jmap(dm, x))
    return 0.5 * first + 0.5 * second


@dataclass
class ResolventCertificate:
    """Result of :func:`solve_resolvent`.

    ``gap = h(x, v) - <x, v>`` and ``fixedpoint_residual = ||v + J(x) - v0||_*``;
    the certificate is accepted when both are within ``tol`` in absolute value.
    ``distance_bound`` bounds the distance of ``(x, v)`` to the exact solution
    whenever ``h`` is a genuine representative (the objective's minimum is 0).
    """

    x: np.ndarray
    v: np.ndarray
    v0: np.ndarray
    gap: float
    fixedpoint_residual: float
    C_value: float
    iterations: int
    accepted: bool
    objective: float
    distance_bound: float
    tol: float
    history: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "x": self.x.tolist(),
            "v": self.v.tolist(),
            "v0": self.v0.tolist(),
            "gap": self.gap,
            "fixedpoint_residual": self.fixedpoint_residual,
            "C_value": self.C_value,
            "iterations": self.iterations,
            "accepted": self.accepted,
            "objective": self.objective,
            "distance_bound": self.distance_bound,
            "tol": self.tol,
        }


def _init_candidates(h, dm, v0):
    x0, w0 = 0.5 * jstar(dm, v0), 0.5 * v0
    yield x0, w0
    yield h.project(x0, w0)
    if hasattr(h, "nearest_finite"):
        yield h.nearest_finite(x0, w0)


def _evaluate(h, dm, v0, x, v, mu, tol):
    hv = float(h(x, v))
    gap = hv - float(np.dot(x, v))
    fp = float(dual_norm(dm, v + jmap(dm, x) - v0))
    _, _, C = residuals(dm, x, v, v0)
    obj = float(0.5 * (dual_norm(dm, v - v0) ** 2 + norm(dm, x) ** 2) - np.dot(v0, x) + hv)
    bound = float(np.sqrt(2.0 * max(obj, 0.0) / mu)) if np.isfinite(obj) else np.inf
    accepted = bool(np.isfinite(hv) and abs(gap) <= tol and fp <= tol)
    return gap, fp, C, obj, bound, accepted


def solve_resolvent(h: Representative, dm: DualityMap, v0, tol: float = DEFAULT_TOL,
                    budget: int = DEFAULT_BUDGET, record_history: bool = False) -> ResolventCertificate:
    """Minimize the strongly convex resolvent objective for target ``v0``.

    Projected (or proximal, when ``h`` offers a prox) subgradient steps of
    length ``2 / (mu (k + 1))``, with ``mu`` the strong-convexity modulus of the
    quadratic part (1 for the Euclidean map), and ``k``-weighted iterate
    averaging.  Steps that land where ``h`` is +inf are shortened by halving,
    and discarded if that fails; two discarded steps in a row from the same
    point end the run, since smaller steps cannot leave it either.

    Both the last iterate and the running average are certified; the solver
    stops once a candidate is accepted and its distance bound is within
    ``tol``, or when ``budget`` iterations are spent.  The returned certificate
    is the best candidate seen (accepted first, then smallest objective).
    """
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    n = h.dim
    if v0.shape != (n,):
        raise DimensionError(f"v0 has shape {v0.shape}, representative has dim {n}")
    mu = dm.strong_convexity(n)

    start = None
    for cand in _init_candidates(h, dm, v0):
        if np.isfinite(h(*cand)):
            start = (np.array(cand[0], float), np.array(cand[1], float))
            break
    if start is None:
        raise InfeasibleStartError("representative is +inf at every initialization candidate")
    x, v = start
    ax, av = x.copy(), v.copy()

    best = None
    history = []

    def consider(px, pv, k):
        nonlocal best
        gap, fp, C, obj, bound, acc = _evaluate(h, dm, v0, px, pv, mu, tol)
        key = (not acc, obj)
        if best is None or key < best[0]:
            best = (key, ResolventCertificate(px.copy(), pv.copy(), v0.copy(), gap, fp, C, k, acc,
                                              obj, bound, tol))
        return acc and bound <= tol

    done = consider(x, v, 0)
    k = 0
    rejected = 0
    while not done and k < budget:
        k += 1
        alpha = 2.0 / (mu * (k + 1))
        qx = jmap(dm, x) - v0
        qv = jstar(dm, v - v0)
        if h.has_prox:
            nx, nv = h.prox(x - alpha * qx, v - alpha * qv, alpha)
        else:
            gx, gv = h.subgradient(x, v)
            nx, nv = h.project(x - alpha * (qx + gx), v - alpha * (qv + gv))
        dx, dv = nx - x, nv - v
        t = 1.0
        while not np.isfinite(h(nx, nv)) and t > 1e-9:
            t *= 0.5
            nx, nv = x + t * dx, v + t * dv
        if np.isfinite(h(nx, nv)):
            x, v = nx, nv
            rejected = 0
        else:
            # later steps from the same point only probe shorter pieces of the same ray
            rejected += 1
            if rejected >= 2:
                consider(ax, av, k)
                break
        w = 2.0 / (k + 1)
        ax, av = ax + w * (x - ax), av + w * (v - av)
        if k <= 100 or k % 25 == 0 or k == budget:
            if record_history:
                history.append((k, phi_objective(h, dm, v0, ax, av)))
            done = consider(x, v, k) or consider(ax, av, k)

    cert = best[1]
    cert.iterations = k
    cert.history = history
    return cert
