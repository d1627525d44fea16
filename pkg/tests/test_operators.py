import numpy as np
import pytest
from scipy.optimize import minimize

from bregproj.convex_sets import Affine, Halfspace, Hyperplane, Simplex
from bregproj.divergence import bregman_value
from bregproj.errors import PreconditionError, ValidationError
from bregproj.operators import (MonotoneMap, certify_quasinonexpansive, cyclic_project, left_prox,
                                left_resolvent, right_prox, right_resolvent)
from bregproj.potentials import KL, Quadratic, hilbert
from bregproj.projections import left_project
from bregproj.spaces import Space

V3 = Space.vector(3)
M = np.array([[1.0, 0.5, 0.0], [-0.5, 2.0, 0.3], [0.0, -0.3, 0.5]])


def test_hilbert_resolvent_of_linear_map_is_a_linear_solve(rng):
    c = rng.normal(size=3)
    T = MonotoneMap.linear(V3, M, c)
    x, lam = rng.normal(size=3), 0.7
    res = left_resolvent(hilbert(V3), T, lam, x)
    assert res.converged
    assert np.allclose(res.point, np.linalg.solve(np.eye(3) + lam * M, x - lam * c), atol=1e-12)


def test_kl_resolvent_solves_its_defining_equation(rng):
    psi = KL(V3)
    T = MonotoneMap.linear(V3, M, -np.ones(3))
    x = psi.sample_interior(rng)
    res = left_resolvent(psi, T, 1.3, x)
    z = res.point
    assert np.allclose(np.log(z) + 1.3 * T(z), np.log(x), atol=1e-11)


def test_right_resolvent_conjugates_the_left_one(rng):
    psi = KL(V3)
    T = MonotoneMap.linear(V3, M)
    x = psi.sample_interior(rng)
    r = right_resolvent(psi, T, 0.5, psi.grad(x))
    l = left_resolvent(psi, T, 0.5, x)
    assert np.allclose(r.point, psi.grad(l.point), atol=1e-11)


def test_indicator_resolvent_is_the_projection(rng):
    psi = KL(V3)
    K = Simplex(1.0)
    x = psi.sample_interior(rng)
    res = left_resolvent(psi, MonotoneMap.indicator(K, V3), 2.0, x)
    assert np.allclose(res.point, x / x.sum(), atol=1e-12)


def test_kl_prox_of_kl_has_a_power_closed_form(rng):
    psi = KL(V3)
    y = psi.sample_interior(rng)
    for lam in (0.5, 2.0):
        res = left_prox(psi, KL(V3), lam, y)
        assert np.allclose(res.point, y ** (lam / (lam + 1.0)), atol=1e-12)


def test_prox_of_an_indicator_is_the_projection(rng):
    psi = KL(V3)
    y = psi.sample_interior(rng)
    assert np.allclose(left_prox(psi, Simplex(2.0), 1.0, y).point, 2 * y / y.sum())


def test_right_prox_matches_a_generic_minimizer():
    psi = KL(V3)
    f = Quadratic(V3, np.diag([1.0, 2.0, 0.5]))
    y, lam = np.array([1.0, 3.0, 0.5]), 2.0
    res = right_prox(psi, f, lam, y)
    ref = minimize(lambda u: f.value(np.exp(u)) + lam * bregman_value(psi, y, np.exp(u)),
                   np.zeros(3), method="BFGS", options={"gtol": 1e-12})
    assert res.converged and res.residual <= 1e-10
    assert np.allclose(res.point, np.exp(ref.x), atol=1e-6)
    # x_i^2 d_i + lam (x_i - y_i) = 0 coordinatewise
    d = np.array([1.0, 2.0, 0.5])
    assert np.allclose(d * res.point ** 2 + lam * (res.point - y), 0.0, atol=1e-9)


def test_right_prox_of_kl_by_hand():
    # f = KL, lam = 2: log x + 2 (1 - y / x) = 0
    psi = KL(Space.vector(2))
    x = right_prox(psi, KL(Space.vector(2)), 2.0, np.array([1.0, 3.0])).point
    assert x[0] == pytest.approx(1.0, abs=1e-9)
    assert np.log(x[1]) + 2 * (1 - 3 / x[1]) == pytest.approx(0.0, abs=1e-9)


def test_invalid_operator_inputs():
    with pytest.raises(ValidationError):
        MonotoneMap.linear(V3, -np.eye(3))
    with pytest.raises(ValidationError):
        MonotoneMap.linear(V3, np.eye(2))
    with pytest.raises(ValidationError):
        left_resolvent(hilbert(V3), MonotoneMap.linear(V3, np.eye(3)), 0.0, np.zeros(3))
    with pytest.raises(PreconditionError):
        left_resolvent(KL(V3), MonotoneMap.linear(V3, np.eye(3)), 1.0, np.array([0.0, 1.0, 1.0]))


def test_linear_map_monotonicity_check(rng):
    T = MonotoneMap.linear(V3, M)
    assert T.check_monotone(rng, 100) <= 1e-12


def test_dykstra_reaches_the_intersection_projection():
    psi = hilbert(Space.vector(2))
    K1, K2 = Halfspace([1.0, 0.0], 0.0), Halfspace([1.0, 1.0], 0.5)
    y = np.array([2.0, 3.0])
    tr = cyclic_project(psi, [K1, K2], y, mode="dykstra_hilbert", sweeps=200, tol=1e-14)
    # only x1 + x2 <= 0.5 is active: y - 2.25 (1, 1), which has x1 < 0
    assert np.allclose(tr.final, [-0.25, 0.75], atol=1e-6)
    assert tr.sweeps <= 200


def test_naive_kl_cyclic_matches_stacked_affine_projection():
    psi = KL(V3)
    A = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 0.5]])
    b = np.array([3.0, 0.2])
    y = np.array([0.5, 2.0, 1.5])
    target = left_project(psi, Affine(A, b), y).point
    tr = cyclic_project(psi, [Hyperplane(A[0], b[0]), Hyperplane(A[1], b[1])], y, sweeps=500,
                        tol=1e-13, target=target)
    assert tr.converged and np.allclose(tr.final, target, atol=1e-6)
    assert np.all(np.diff(tr.divergences) <= 1e-12)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "step,x0,x1,x2,divergence"
    assert len(lines) == len(tr.points) + 1


def test_dykstra_requires_the_hilbert_potential():
    with pytest.raises(PreconditionError):
        cyclic_project(KL(V3), [Simplex(1.0)], np.ones(3), mode="dykstra_hilbert")
    with pytest.raises(ValidationError):
        cyclic_project(KL(V3), [Simplex(1.0)], np.ones(3), mode="random")


def test_projection_is_certified_quasinonexpansive(rng):
    psi = KL(V3)
    K = Hyperplane([1.0, 1.0, 1.0], 3.0)
    T = lambda x: left_project(psi, K, x).point  # noqa: E731
    fps = [p for p in K.sample(rng, np.ones(3), 5, spread=0.3) if psi.in_interior(p)]
    pts = [psi.sample_interior(rng) for _ in range(50)]
    rep = certify_quasinonexpansive(psi, T, fps, pts)
    assert rep.left_certified and rep.left_violation <= 1e-9


def test_expanding_map_is_not_certified(rng):
    psi = hilbert(V3)
    rep = certify_quasinonexpansive(psi, lambda x: 2.0 * x, [np.zeros(3)],
                                    [rng.normal(size=3) for _ in range(20)])
    assert not rep.left_certified and rep.left_violation > 0


def test_claimed_fixed_points_are_checked():
    psi = hilbert(V3)
    with pytest.raises(PreconditionError):
        certify_quasinonexpansive(psi, lambda x: 0.5 * x, [np.ones(3)], [np.zeros(3)])
