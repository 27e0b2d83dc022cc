import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monorep import (
    AffineIndicator,
    AffinePhi,
    AnalyticOperator,
    BoxPhi,
    FenchelYoungQuadratic,
    FitzpatrickRep,
    GridFn,
    GridRep,
    GridSpec,
    MixRep,
    OperatorGraph,
    closed_form_indicator,
    closed_form_phi,
    fenchel_young,
    fitzpatrick_eval,
    fitzpatrick_linear_closed_form,
    identity_indicator,
    identity_phi,
    j_transform,
    load_representative,
    membership_check,
    minimality_check,
    sample_graph,
    write_gridfn,
)
from monorep.errors import MonotonicityError, SpecError, UnsupportedError
from monorep.representations import coupling, representative_from_json

from oracles import fitzpatrick_loop, grid_points, loop_conjugate

ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])
IDENTITY_SAMPLES = sample_graph(AnalyticOperator.identity(), GridSpec([-4.0], [4.0], [801]))
BOX2 = GridSpec.uniform(-1.0, 1.0, 21, dim=2)


def grid_rep(spec, fn):
    return GridRep(GridFn.from_callable(spec, fn))


# Fitzpatrick functions of finite graphs

def test_fitzpatrick_of_identity_samples():
    assert fitzpatrick_eval(IDENTITY_SAMPLES, [1.0], [1.0]) == pytest.approx(1.0, abs=1e-3)
    assert fitzpatrick_eval(IDENTITY_SAMPLES, [1.0], [-1.0]) == pytest.approx(0.0, abs=1e-3)


def test_fitzpatrick_of_single_point_is_zero():
    g = OperatorGraph.from_pairs([(0.0, 0.0)])
    for x, v in [(1.0, 2.0), (-3.0, 0.5), (0.0, 0.0)]:
        assert fitzpatrick_eval(g, [x], [v]) == 0.0


def test_fitzpatrick_matches_loop_oracle():
    rng = np.random.default_rng(7)
    g = sample_graph(AnalyticOperator.rotation2d(0.8), GridSpec.uniform(-1, 1, 5, dim=2))
    pairs = list(g)
    phi = FitzpatrickRep(g)
    for _ in range(50):
        x, v = rng.normal(size=2), rng.normal(size=2)
        assert phi(x, v) == pytest.approx(fitzpatrick_loop(pairs, x, v), abs=1e-12)


def test_fitzpatrick_is_exact_on_monotone_graph():
    g = sample_graph(AnalyticOperator.linear([[1.0, 1.0], [-1.0, 1.0]]), GridSpec.uniform(-1, 1, 9, dim=2))
    phi = FitzpatrickRep(g)
    assert np.max(np.abs(phi(g.xs, g.vs) - coupling(g.xs, g.vs))) <= 1e-10


@pytest.mark.parametrize("x, v, expect", [
    ([1.0], [1.0], 1.0),
    ([1.0, 0.0], [0.0, 1.0], 0.0),
    ([1.0, 0.0], [1.0, 0.0], math.inf),
])
def test_linear_closed_form_examples(x, v, expect):
    A = [[1.0]] if len(x) == 1 else ROT90
    assert fitzpatrick_linear_closed_form(A, x, v) == expect


def test_linear_closed_form_against_dense_samples():
    A = np.array([[1.0, 0.5], [-0.5, 2.0]])
    g = sample_graph(AnalyticOperator.linear(A), GridSpec.uniform(-6.0, 6.0, 121, dim=2))
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, v = rng.uniform(-1, 1, size=2), rng.uniform(-1, 1, size=2)
        exact = fitzpatrick_linear_closed_form(A, x, v)
        sampled = fitzpatrick_eval(g, x, v)
        assert sampled <= exact + 1e-12
        assert exact - sampled <= 1e-2


def test_linear_closed_form_rejects_non_monotone():
    with pytest.raises(MonotonicityError):
        fitzpatrick_linear_closed_form([[-1.0]], [1.0], [1.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_affine_phi_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(2, 2))
    K = rng.normal(size=(2, 2))
    A = B @ B.T + (K - K.T)
    phi = AffinePhi(A)
    for _ in range(5):
        x, v = rng.normal(size=2), rng.normal(size=2)
        assert phi(x, v) == pytest.approx(fitzpatrick_linear_closed_form(A, x, v), rel=1e-9, abs=1e-9)
        assert phi(x, v) >= x @ v - 1e-9
        assert phi(x, A @ x) == pytest.approx(x @ A @ x, rel=1e-9, abs=1e-9)


def test_affine_phi_subgradient_is_gradient():
    A = np.array([[2.0, 1.0], [-1.0, 1.0]])
    b = np.array([0.3, -0.2])
    phi = AffinePhi(A, b)
    rng = np.random.default_rng(9)
    x, v = rng.normal(size=2), rng.normal(size=2)
    gx, gv = phi.subgradient(x, v)
    eps = 1e-6
    for i in range(2):
        e = np.eye(2)[i] * eps
        assert (phi(x + e, v) - phi(x - e, v)) / (2 * eps) == pytest.approx(gx[i], abs=1e-6)
        assert (phi(x, v + e) - phi(x, v - e)) / (2 * eps) == pytest.approx(gv[i], abs=1e-6)


def test_rotation_phi_is_infinite_off_graph_and_projects_onto_it():
    phi = AffinePhi(ROT90)
    assert phi([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert phi([1.0, 0.0], [1.0, 0.0]) == math.inf
    x, v = phi.project(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert np.isfinite(phi(x, v))


def test_indicator_and_fenchel_young_are_representatives():
    op = AnalyticOperator.subdiff_quadratic([[3.0]], [0.5])
    P = GridSpec([-1.0, -3.0], [1.0, 3.0], [41, 121]).points()
    X, V = P[:, :1], P[:, 1:]
    for h in (closed_form_phi(op), closed_form_indicator(op), fenchel_young(op)):
        gap = h(X, V) - coupling(X, V)
        assert gap.min() >= -1e-12
        on = np.abs(V[:, 0] - (3 * X[:, 0] + 0.5)) < 1e-12
        assert np.max(np.abs(gap[on])) <= 1e-12
        assert np.all(gap[~on] > 1e-6)


def test_fenchel_young_of_singular_quadratic():
    h = FenchelYoungQuadratic([[1.0, 0.0], [0.0, 0.0]], [0.0, 1.0])
    assert h([0.0, 5.0], [0.0, 1.0]) == pytest.approx(5.0)
    assert h([0.0, 5.0], [0.0, 2.0]) == math.inf
    with pytest.raises(UnsupportedError):
        fenchel_young(AnalyticOperator.rotation2d(0.3))


def test_box_phi_values_and_prox():
    h = BoxPhi([0.0], [1.0])
    assert h([0.5], [-2.0]) == 0.0
    assert h([0.5], [2.0]) == 2.0
    assert h([1.5], [0.0]) == math.inf
    # prox of alpha * sigma_[0,1] against a brute-force minimization
    ws = np.linspace(-5, 5, 200001)
    for w, alpha in [(2.0, 0.5), (-1.0, 0.25), (0.1, 1.0)]:
        obj = alpha * np.maximum(0.0, ws) + 0.5 * (ws - w) ** 2
        _, pv = h.prox(np.array([0.3]), np.array([w]), alpha)
        assert pv[0] == pytest.approx(ws[np.argmin(obj)], abs=1e-4)


# grid representatives and J-transforms

def test_grid_rep_interpolation_and_infinity():
    spec = GridSpec([-1.0, -1.0], [1.0, 1.0], [3, 3])
    vals = np.arange(9.0).reshape(3, 3)
    vals[2, 2] = np.inf
    h = GridRep(GridFn(spec, vals))
    assert h([-0.5], [-0.5]) == pytest.approx(2.0)
    assert h([0.5], [0.5]) == math.inf
    assert h([1.0], [0.0]) == 7.0
    assert h([2.0], [0.0]) == math.inf


def test_j_transform_of_identity_phi():
    jh = j_transform(identity_phi(), BOX2, sample_spec=BOX2.expanded(2))
    P = BOX2.points()
    X, V = P[:, 0], P[:, 1]
    vals = jh.fn.values.ravel()
    diag = np.abs(X - V) < 1e-12
    # J(phi) is the diagonal indicator plus xv: equal to x^2 on the diagonal
    assert np.max(np.abs(vals[diag] - X[diag] ** 2)) <= 1e-12
    # off the diagonal the grid conjugate is finite but strictly above the coupling
    assert np.all(vals[~diag] - X[~diag] * V[~diag] > 1e-3)


def test_j_transform_of_identity_indicator():
    jh = j_transform(identity_indicator(), BOX2, sample_spec=BOX2.expanded(2))
    P = BOX2.points()
    target = (P[:, 0] + P[:, 1]) ** 2 / 4
    assert np.max(np.abs(jh.fn.values.ravel() - target)) <= BOX2.spacing[0]


def test_j_transform_of_zero_is_box_support():
    h = grid_rep(BOX2, lambda P: np.zeros(len(P)))
    jh = j_transform(h, BOX2)
    P = BOX2.points()
    assert np.allclose(jh.fn.values.ravel(), np.abs(P[:, 0]) + np.abs(P[:, 1]), atol=1e-12)


def test_j_transform_matches_loop_oracle():
    spec = GridSpec([-1.0, -2.0], [1.0, 2.0], [7, 9])
    h = grid_rep(spec, lambda P: (P[:, 0] + P[:, 1]) ** 2 / 4 + 0.1 * np.abs(P[:, 1]))
    jh = j_transform(h, spec)
    pts = grid_points(spec.lower, spec.upper, spec.counts)
    vals = h.fn.values.ravel().tolist()
    # J(h)(x, v) = h*(v, x): evaluate the conjugate at the swapped point
    duals = [(v, x) for x, v in pts]
    ref = loop_conjugate(pts, vals, duals)
    assert np.max(np.abs(jh.fn.values.ravel() - ref)) <= 1e-12


def test_exact_j_transform_of_fitzpatrick_bounds_grid_version():
    g = sample_graph(AnalyticOperator.identity(), GridSpec([-1.0], [1.0], [9]))
    phi = FitzpatrickRep(g)
    box = GridSpec.uniform(-1.0, 1.0, 9, dim=2)
    exact = j_transform(phi, box, exact=True).fn.values
    grid = j_transform(phi, box).fn.values
    assert np.all(grid <= exact + 1e-9)
    P = box.points()
    assert np.all(exact.ravel() >= coupling(P[:, :1], P[:, 1:]) - 1e-9)
    with pytest.raises(UnsupportedError):
        j_transform(identity_phi(), box, exact=True)


# membership and minimality

def test_membership_examples():
    box = GridSpec.uniform(-1.0, 1.0, 11, dim=2)
    g = sample_graph(AnalyticOperator.identity(), GridSpec([-1.0], [1.0], [11]))
    ok = membership_check(identity_phi(), g, box, 1e-12)
    assert ok.passed
    below = grid_rep(box, lambda P: P[:, 0] * P[:, 1] - 1.0)
    verdict = membership_check(below, g, box, 1e-9)
    assert not verdict.lower_ok and not verdict.passed
    point = FitzpatrickRep(OperatorGraph.from_pairs([(0.0, 0.0)]))
    verdict = membership_check(point, g, box, 1e-9)
    assert not verdict.graph_ok
    assert g.xs[verdict.worst_graph_index][0] in (-1.0, 1.0)
    assert verdict.max_graph_deviation == pytest.approx(1.0)


def test_minimality_examples():
    box = GridSpec.uniform(-1.0, 1.0, 21, dim=2)
    g = sample_graph(AnalyticOperator.identity(), GridSpec([-4.0], [4.0], [801]))
    phi = FitzpatrickRep(g)
    assert minimality_check(g, [phi], box, 1e-12).passed
    mix = MixRep([(0.5, identity_phi()), (0.5, identity_indicator())])
    verdict = minimality_check(g, [identity_phi(), identity_indicator(), mix], box, 1e-9)
    assert verdict.passed


def test_mix_rep_validation():
    with pytest.raises(ValueError):
        MixRep([(0.7, identity_phi()), (0.7, identity_indicator())])
    with pytest.raises(ValueError):
        MixRep([])


# JSON specs

@pytest.mark.parametrize("rep", [
    identity_phi(2),
    identity_indicator(),
    closed_form_phi(AnalyticOperator.rotation2d(0.4)),
    closed_form_indicator(AnalyticOperator.subdiff_quadratic([[3.0]], [0.5])),
    fenchel_young(AnalyticOperator.subdiff_quadratic([[3.0]], [0.5])),
    BoxPhi([0.0, -1.0], [1.0, 1.0]),
    FitzpatrickRep(OperatorGraph.from_pairs([(0.0, 0.0), (1.0, 2.0)])),
    MixRep([(0.25, identity_phi()), (0.75, identity_indicator())]),
])
def test_representative_json_roundtrip(rep):
    back = representative_from_json(json.loads(json.dumps(rep.to_json())))
    rng = np.random.default_rng(0)
    X, V = rng.normal(size=(20, rep.dim)), rng.normal(size=(20, rep.dim))
    # random points and points on the diagonal, where the identity forms are finite
    for x, v in [(X, V), (X, X)]:
        assert np.array_equal(back(x, v), rep(x, v))


def test_grid_representative_file(tmp_path):
    spec = GridSpec.uniform(-1.0, 1.0, 5, dim=2)
    write_gridfn(GridFn.from_callable(spec, lambda P: (P[:, 0] + P[:, 1]) ** 2 / 4), tmp_path / "h.grid")
    (tmp_path / "h.json").write_text(json.dumps({"representative": {"form": "grid", "file": "h.grid"}}))
    h = load_representative(str(tmp_path / "h.json"))
    assert h([0.5], [0.5]) == pytest.approx(0.25)
    assert h.to_json() == {"form": "grid", "file": "h.grid"}


def test_fitzpatrick_spec_from_operator():
    h = representative_from_json({"form": "fitzpatrick", "operator": {"kind": "linear", "A": [[1.0]]},
                                  "box": [[-2.0, 2.0, 41]]})
    assert h([1.0], [1.0]) == pytest.approx(1.0, abs=1e-2)


@pytest.mark.parametrize("spec", [
    None,
    {},
    {"form": "magic"},
    {"form": "closed"},
    {"form": "closed", "id": "nope"},
    {"form": "closed", "id": "identity-phi", "dim": 0},
    {"form": "closed", "id": "phi"},
    {"form": "closed", "id": "indicator", "operator": {"kind": "normal-cone-box", "lower": [0], "upper": [1]}},
    {"form": "closed", "id": "fenchel-young", "operator": {"kind": "rotation2d", "theta": 0.5}},
    {"form": "fitzpatrick"},
    {"form": "fitzpatrick", "operator": {"kind": "linear", "A": [[1.0]]}},
    {"form": "fitzpatrick", "graph": {"points": []}, "dim": 1},
    {"form": "grid"},
    {"form": "grid", "file": 3},
    {"form": "grid", "file": "does-not-exist.grid"},
    {"form": "mix", "parts": []},
    {"form": "mix", "parts": [[0.5, {"form": "closed", "id": "identity-phi"}]]},
    {"form": "mix", "parts": [1.0]},
])
def test_bad_specs_raise_spec_error(spec, tmp_path):
    with pytest.raises(SpecError):
        representative_from_json(spec, str(tmp_path))


def test_corrupt_grid_file_is_spec_error(tmp_path):
    (tmp_path / "bad.grid").write_text("gridfn v1\ndim 2\naxis 0 0 1 2\n")
    with pytest.raises(SpecError):
        representative_from_json({"form": "grid", "file": "bad.grid"}, str(tmp_path))


def test_odd_dimensional_grid_file_is_spec_error(tmp_path):
    write_gridfn(GridFn(GridSpec([0.0], [1.0], [2]), [0.0, 1.0]), tmp_path / "odd.grid")
    with pytest.raises(SpecError):
        representative_from_json({"form": "grid", "file": "odd.grid"}, str(tmp_path))


def test_affine_indicator_constructor_checks():
    with pytest.raises(MonotonicityError):
        AffineIndicator([[-1.0]])
    with pytest.raises(MonotonicityError):
        AffinePhi([[0.0, 1.0], [0.0, -1.0]])
