import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from bregproj.errors import ValidationError
from bregproj.gauges import GaugePotential, PowerGauge
from bregproj.potentials import (KL, AlphaFamily, Burg, FermiDirac, LinearCombination, PowerSum,
                                 Quadratic, SquaredPNorm, hilbert, potential_from_dict,
                                 spectral_lift)
from bregproj.spaces import Space

V3 = Space.vector(3)


def _catalog():
    T = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 1.5]])
    return {
        "gauge_l3": GaugePotential(Space.vector(3, 3.0), PowerGauge(1.0, 1 / 3)),
        "power_sum": PowerSum(V3, 0.4, 2.0),
        "kl": KL(V3),
        "burg": Burg(V3),
        "fermi_dirac": FermiDirac(V3),
        "alpha_pos": AlphaFamily(V3, 0.3),
        "alpha_neg": AlphaFamily(V3, -0.5),
        "squared_pnorm": SquaredPNorm(V3, 0.75),
        "quadratic": Quadratic(V3, T),
        "spectral_kl": spectral_lift(KL(V3)),
        "spectral_burg": spectral_lift(Burg(V3)),
        "spectral_fd": spectral_lift(FermiDirac(V3)),
    }


CATALOG = _catalog()


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_fenchel_young_equality_and_gradient_inverse(rng, name):
    psi = CATALOG[name]
    for _ in range(20):
        x = psi.sample_interior(rng)
        g = psi.grad(x)
        fy = psi.value(x) + psi.conj(g) - psi.space.pairing(x, g)
        assert abs(fy) <= 1e-9 * (1 + abs(psi.value(x)) + abs(psi.conj(g)))
        assert np.allclose(psi.conj_grad(g), x, atol=1e-8)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_gradient_matches_central_differences(rng, name):
    psi = CATALOG[name]
    sp = psi.space
    x = psi.sample_interior(rng)
    h = 1e-6
    basis = [sp.unflatten(e) for e in np.eye(sp.real_dim)]
    fd = np.array([(psi.value(x + h * e) - psi.value(x - h * e)) / (2 * h) for e in basis])
    assert np.allclose(sp.flatten(psi.grad(x)), fd, rtol=1e-5, atol=1e-7)


@pytest.mark.parametrize("name", ["kl", "burg", "fermi_dirac", "alpha_pos", "alpha_neg",
                                  "power_sum"])
def test_separable_conjugate_matches_numerical_supremum(rng, name):
    psi = CATALOG[name]
    s = psi.grad(psi.sample_interior(rng))
    lo = getattr(psi, "lo", -np.inf)
    hi = getattr(psi, "hi", np.inf)
    lo = -50.0 if lo is None or not np.isfinite(lo) else lo
    hi = 50.0 if hi is None or not np.isfinite(hi) else hi
    total = 0.0
    for si in s:
        def neg(t, si=si):
            v = psi.f(np.array([t]))
            return -(t * si - float(np.sum(v)))
        res = minimize_scalar(neg, bounds=(lo + 1e-12, hi - 1e-12), method="bounded",
                              options={"xatol": 1e-12})
        total += -res.fun
    assert psi.conj(s) == pytest.approx(total, rel=1e-7, abs=1e-9)


def test_closed_form_values():
    x = np.array([0.5, 2.0])
    sp = Space.vector(2)
    assert KL(sp).value(x) == pytest.approx(np.sum(x * np.log(x) - x))
    assert Burg(sp).value(x) == pytest.approx(-np.sum(np.log(x)))
    y = np.array([0.25, 0.5])
    assert FermiDirac(sp).value(y) == pytest.approx(np.sum(y * np.log(y) + (1 - y) * np.log(1 - y)))
    assert FermiDirac(sp).conj(np.array([0.3, -1.0])) == pytest.approx(
        np.sum(np.log1p(np.exp([0.3, -1.0]))))
    assert PowerSum(sp, 0.5).value(x) == pytest.approx(0.5 * x @ x)
    assert AlphaFamily(sp, 0.5).value(x) == pytest.approx(-2.0 * np.sum(np.sqrt(x) - 1))


def test_boundary_values_and_domains():
    sp = Space.vector(2)
    assert KL(sp).value(np.array([0.0, 1.0])) == pytest.approx(-1.0)
    assert not KL(sp).in_interior(np.array([0.0, 1.0]))
    assert KL(sp).value(np.array([-0.1, 1.0])) == np.inf
    assert Burg(sp).value(np.array([0.0, 1.0])) == np.inf
    assert FermiDirac(sp).value(np.array([1.2, 0.5])) == np.inf
    assert not Burg(sp).conj_in_interior(np.array([0.5, -1.0]))


def test_spectral_lift_is_eigenvalue_function(rng):
    psi = spectral_lift(KL(Space.vector(3)))
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = a @ a.conj().T + 0.1 * np.eye(3)
    lam, v = np.linalg.eigh(x)
    assert psi.value(x) == pytest.approx(np.sum(lam * np.log(lam) - lam), rel=1e-12)
    g = v @ np.diag(np.log(lam)) @ v.conj().T
    assert np.allclose(psi.grad(x), g, atol=1e-12)


def test_spectral_lift_rejects_asymmetric_inner():
    T = np.diag([1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        spectral_lift(Quadratic(Space.vector(3), T))


def test_hessian_matches_gradient_differences(rng):
    psi = CATALOG["kl"]
    x = psi.sample_interior(rng)
    assert np.allclose(psi.hessian(x), np.diag(1 / x), rtol=1e-6)
    q = CATALOG["quadratic"]
    assert np.allclose(q.conj_hessian(q.grad(x)) @ q.hessian(x), np.eye(3), atol=1e-12)


def test_conjugate_potential_swaps_roles(rng):
    psi = CATALOG["kl"]
    dual = psi.conjugate()
    y = rng.normal(size=3)
    assert dual.value(y) == pytest.approx(np.sum(np.exp(y)))
    assert np.allclose(dual.grad(y), np.exp(y))


def test_linear_combination_value_and_gradient(rng):
    sp = Space.vector(3)
    lc = LinearCombination([(2.0, KL(sp)), (0.5, hilbert(sp))], shift=np.ones(3), const=1.0)
    x = KL(sp).sample_interior(rng)
    assert lc.value(x) == pytest.approx(2 * KL(sp).value(x) + 0.25 * x @ x + x.sum() + 1.0)
    assert np.allclose(lc.grad(x), 2 * np.log(x) + 0.5 * x + 1.0)


@pytest.mark.parametrize("spec,kind", [
    ({"kind": "kl"}, "kl"),
    ({"kind": "burg"}, "burg"),
    ({"kind": "power_sum", "gamma": 0.3}, "power_sum"),
    ({"kind": "alpha_family", "alpha": -1.0}, "alpha"),
    ({"kind": "gauge", "gauge": {"kind": "power", "alpha": 1, "beta": 0.25}}, "gauge"),
    ({"kind": "squared_pnorm", "gamma": 0.6}, "squared_pnorm"),
])
def test_potential_specs_round_trip(spec, kind):
    psi = potential_from_dict(spec, Space.vector(3))
    assert psi.to_dict()["kind"] == kind
    again = potential_from_dict(psi.to_dict(), Space.vector(3))
    assert again.to_dict() == psi.to_dict()


def test_matrix_space_lifts_separable_specs():
    psi = potential_from_dict({"kind": "kl"}, Space.matrix(2))
    assert psi.space.is_matrix
    assert psi.value(np.eye(2)) == pytest.approx(-2.0)


@pytest.mark.parametrize("spec", [
    {"kind": "entropy"},
    {"kind": "power_sum", "gamma": 1.5},
    {"kind": "alpha_family", "alpha": 1.0},
    {"kind": "squared_pnorm", "gamma": 0.2},
    {"kind": "quadratic", "T": [[1, 0], [0, -1], [0, 0]]},
])
def test_invalid_potential_specs(spec):
    with pytest.raises(ValidationError):
        potential_from_dict(spec, Space.vector(3))
