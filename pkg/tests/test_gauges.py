import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from bregproj.errors import UnsupportedOperation, ValidationError
from bregproj.gauges import (GaugePotential, PowerGauge, Quasigauge, TabulatedGauge,
                             conjugate_integral_check, gauge_from_dict, generalized_inverses)
from bregproj.spaces import Space


@pytest.mark.parametrize("alpha,beta", [(1.0, 0.5), (1.0, 0.25), (0.5, 0.4), (2.0, 0.7)])
def test_power_gauge_integrals_match_quadrature(alpha, beta):
    g = PowerGauge(alpha, beta)
    for t in (0.3, 1.0, 2.5):
        assert float(g.integral(t)) == pytest.approx(quad(g, 0, t)[0], rel=1e-9)
        s = float(g(t))
        assert float(g.inverse(s)) == pytest.approx(t, rel=1e-12)
        assert float(g.inverse_integral(s)) == pytest.approx(quad(g.inverse, 0, s)[0], rel=1e-9)


def test_identity_gauge_is_half_squared_norm(rng):
    gp = GaugePotential(Space.vector(3), PowerGauge(1.0, 0.5))
    x = rng.normal(size=3)
    assert gp.value(x) == pytest.approx(0.5 * x @ x, rel=1e-14)
    assert np.allclose(gp.grad(x), x)


def test_inverse_gauge_is_the_functional_inverse():
    g = PowerGauge(0.7, 0.3)
    h = g.inverse_gauge()
    s = np.array([0.2, 1.0, 3.0])
    assert np.allclose(h(s), g.inverse(s), rtol=1e-12)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_gauge_potential_conjugate_matches_numerical_supremum(rng, p):
    sp = Space.vector(3, p)
    gp = GaugePotential(sp, PowerGauge(1.0, 1.0 / 3.0))
    y = rng.normal(size=3)
    r = sp.dual_norm_of(y)
    # sup_x <x, y> - Psi(x) reduces to a radial problem along j^{-1}(y)
    res = minimize_scalar(lambda t: -(t * r - float(gp.gauge.integral(t))), bounds=(0, 50),
                          method="bounded", options={"xatol": 1e-12})
    assert gp.conj(y) == pytest.approx(-res.fun, rel=1e-8)


@pytest.mark.parametrize("p", [1.5, 4.0])
def test_gauge_potential_gradient_matches_finite_differences(rng, p):
    sp = Space.vector(4, p)
    gp = GaugePotential(sp, PowerGauge(0.5, 0.4))
    x = rng.normal(size=4)
    h = 1e-6
    fd = np.array([(gp.value(x + h * e) - gp.value(x - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.allclose(gp.grad(x), fd, rtol=1e-6, atol=1e-8)
    assert np.allclose(gp.conj_grad(gp.grad(x)), x, atol=1e-10)


def test_schatten_gauge_potential_is_spectral(rng):
    sp = Space.matrix(3, 3.0)
    gp = GaugePotential(sp, PowerGauge(1.0, 0.25))
    x = sp.random(rng)
    s = np.linalg.eigvalsh(x)
    r = np.sum(np.abs(s) ** 3) ** (1 / 3)
    assert gp.value(x) == pytest.approx(0.25 * r ** 4, rel=1e-12)
    assert np.allclose(gp.conj_grad(gp.grad(x)), x, atol=1e-9)


def test_step_quasigauge_values_and_integrals():
    q = Quasigauge.step(1.0, 2.0, 0.0)
    assert list(q([0.0, 0.5, 1.0, 3.0])) == [0.0, 0.0, 2.0, 2.0]
    assert float(q.integral(3.0)) == pytest.approx(4.0)
    lo, hi = generalized_inverses(q)
    # phi_vee jumps to 1 as soon as s > 0; phi_wedge is 1 below the jump height
    assert float(lo(1.0)) == pytest.approx(1.0)
    assert float(hi(1.0)) == pytest.approx(1.0)
    assert float(hi(2.5)) == np.inf


def test_flat_quasigauge_integral_and_inverses():
    q = Quasigauge.flat(1.0, 2.0, 1.0)
    # t on [0,1], 1 on [1,2], 1 + (t-2) afterwards
    assert float(q.integral(3.0)) == pytest.approx(0.5 + 1.0 + 1.5)
    lo, hi = generalized_inverses(q)
    assert float(lo(1.0)) == pytest.approx(1.0)
    assert float(hi(1.0)) == pytest.approx(2.0)
    assert float(q.inverse_integral(1.5)) == pytest.approx(quad(lambda s: float(hi(s)), 0, 1.5,
                                                               points=[1.0])[0], rel=1e-9)


@pytest.mark.parametrize("q", [PowerGauge(1.0, 1.0 / 3.0), Quasigauge.step(1, 2, 0),
                               Quasigauge.flat(1, 2, 1)])
@pytest.mark.parametrize("u", [0.5, 1.0, 2.0, 5.0])
def test_conjugate_integral_lemma(q, u):
    lhs, rhs, residual = conjugate_integral_check(q, u)
    assert residual <= 1e-4
    if np.isfinite(lhs):
        assert lhs == pytest.approx(rhs, abs=1e-4)


def test_tabulated_gauge_interpolates():
    g = TabulatedGauge([[0, 0], [1, 1], [2, 3]], tail_slope=2.0)
    assert float(g(1.5)) == pytest.approx(2.0)
    assert float(g(3.0)) == pytest.approx(5.0)
    assert float(g.integral(2.0)) == pytest.approx(0.5 + 2.0)


def test_quasigauge_potential_has_no_single_valued_gradient():
    gp = GaugePotential(Space.vector(2), Quasigauge.step())
    with pytest.raises(UnsupportedOperation):
        gp.grad(np.array([1.0, 0.0]))


@pytest.mark.parametrize("bad", [
    {"kind": "power", "alpha": -1},
    {"kind": "power", "beta": 1.0},
    {"kind": "quasigauge"},
    {"kind": "quasigauge", "vertices": [[0, 0], [1, 2], [0.5, 3]]},
    {"kind": "wavelet"},
])
def test_bad_gauge_specs(bad):
    with pytest.raises(ValidationError):
        gauge_from_dict(bad)


def test_gauge_spec_round_trip():
    for g in (PowerGauge(0.5, 0.4), Quasigauge.flat()):
        h = gauge_from_dict(g.to_dict())
        assert h.to_dict() == g.to_dict()
