import numpy as np
import pytest

from bregproj.convex_sets import Hyperplane
from bregproj.divergence import extended_bregman
from bregproj.embeddings import (Embedding, SpinFactorPoint, apply_channel, d_gamma,
                                 d_gamma_potential, embedding_from_dict,
                                 extended_power_divergence, lozanovskii_forward,
                                 lozanovskii_inverse, mazur, pullback_project, random_channel,
                                 spin_embed, trace_norm)
from bregproj.errors import PreconditionError, ValidationError
from bregproj.potentials import hilbert
from bregproj.spaces import NormSpec, Space


def _density(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = a @ a.conj().T + 0.05 * np.eye(n)
    return r / np.trace(r).real


@pytest.mark.parametrize("g1,g2", [(1.0, 0.5), (0.5, 0.25), (0.25, 0.75)])
def test_mazur_map_interlocks_norms(rng, g1, g2):
    x = rng.normal(size=5)
    lx = mazur(g1, g2, x, 1.5)
    lhs = np.sum(np.abs(lx) ** (1 / g2))
    rhs = 1.5 ** (1 / g2) * np.sum(np.abs(x) ** (1 / g1))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    emb = Embedding("mazur", g1, g2, 1.5)
    assert np.allclose(emb.inverse(emb.forward(x)), x, atol=1e-12)


def test_d_gamma_on_commuting_states_is_the_alpha_divergence(rng):
    p, q = rng.uniform(0.1, 1, 4), rng.uniform(0.1, 1, 4)
    g = 0.3
    ref = np.sum(p / (1 - g) + q / g - p ** g * q ** (1 - g) / (g * (1 - g)))
    assert d_gamma(np.diag(p), np.diag(q), g) == pytest.approx(ref, rel=1e-12)
    assert d_gamma(p, q, g) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_d_gamma_closed_form_equals_composed_divergence(rng, gamma):
    phi, psi = _density(rng, 4), _density(rng, 4)
    pot = d_gamma_potential(phi, gamma)
    emb = Embedding("mazur", 1.0, gamma)
    composed = extended_bregman(emb, pot, phi, psi).value
    assert d_gamma(phi, psi, gamma) == pytest.approx(composed, rel=1e-10, abs=1e-12)
    assert abs(d_gamma(phi, phi, gamma)) <= 1e-12
    assert d_gamma(phi, psi, gamma) > 0


def test_scale_identity_of_the_power_divergence(rng):
    phi, psi = _density(rng, 3), _density(rng, 3)
    g, a, b, lam = 0.4, 0.7, 0.3, 2.5
    lhs = extended_power_divergence(phi, psi, g, a, b, scale=lam)
    rhs = extended_power_divergence(phi, psi, g, a * lam ** (-1 / b), b)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # with alpha = g(1-g), beta = g the power divergence is D_gamma
    assert extended_power_divergence(phi, psi, g, g * (1 - g), g) == pytest.approx(
        d_gamma(phi, psi, g), rel=1e-10)


def test_d_gamma_is_monotone_under_channels(rng):
    for _ in range(20):
        phi, psi = _density(rng, 2), _density(rng, 2)
        E = random_channel(2, rng)
        for g in (0.3, 0.7):
            assert d_gamma(apply_channel(E, phi), apply_channel(E, psi), g) <= \
                d_gamma(phi, psi, g) + 1e-9


def test_random_channel_is_trace_preserving(rng):
    E = random_channel(3, rng, kraus=3, m=2)
    assert np.allclose(sum(K.conj().T @ K for K in E), np.eye(3), atol=1e-12)
    rho = _density(rng, 3)
    assert np.trace(apply_channel(E, rho)).real == pytest.approx(1.0)


@pytest.mark.parametrize("space", [
    Space.vector(4, 3.0),
    Space("vector", 4, NormSpec("weighted_p", 1.5, weights=(1.0, 2.0, 0.5, 3.0))),
    Space("vector", 4, NormSpec("block_pq", 3.0, 1.5, blocks=(2, 2))),
    Space.matrix(3, 4.0),
])
def test_lozanovskii_round_trip(rng, space):
    z = space.random(rng)
    z = z / trace_norm(z)
    y = lozanovskii_forward(space, z)
    assert space.norm_of(y) == pytest.approx(1.0, rel=1e-10)
    assert np.allclose(lozanovskii_inverse(space, y), z, atol=1e-9)


def test_lozanovskii_needs_unit_sphere_points():
    sp = Space.vector(3, 3.0)
    with pytest.raises(PreconditionError):
        lozanovskii_forward(sp, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(PreconditionError):
        Embedding("lozanovskii", norm=NormSpec("p_norm", 3.0)).check_domain(np.ones(3))


def test_lozanovskii_ball_extension_is_positively_homogeneous(rng):
    emb = Embedding("lozanovskii", norm=NormSpec("p_norm", 3.0), domain="ball")
    z = rng.normal(size=3)
    z = 0.4 * z / np.sum(np.abs(z))
    y = emb.forward(z)
    assert np.allclose(y, 0.4 * emb.forward(z / 0.4))
    assert np.allclose(emb.inverse(y), z, atol=1e-9)


def test_spin_factor_base_map():
    v = SpinFactorPoint(np.array([0.3, -0.4]), 1.0)
    assert v.is_positive() and v.order_norm() == 1.0
    assert np.allclose(spin_embed(v), [0.3, -0.4])
    with pytest.raises(PreconditionError):
        spin_embed(SpinFactorPoint(np.array([0.3, 0.4]), 2.0))
    emb = Embedding("spin_factor")
    assert np.allclose(emb.inverse(emb.forward(v)).x, v.x)


def test_pullback_projection_through_mazur():
    emb = Embedding("mazur", 1.0, 0.5)
    psi = hilbert(Space.vector(2))
    y = np.array([4.0, 1.0])
    res = pullback_project(emb, psi, Hyperplane([1.0, 1.0], 1.0), y)
    # image (2, 1) projects to (1, 0) in the Hilbert image space; pull back squares it
    assert np.allclose(res.point, [1.0, 0.0], atol=1e-12)


def test_embedding_specs():
    e = embedding_from_dict({"kind": "mazur", "g1": 1, "g2": 0.5, "lambda": 2})
    assert e.to_dict() == {"kind": "mazur", "g1": 1.0, "g2": 0.5, "lambda": 2.0}
    assert e.holder_exponent == 0.5
    with pytest.raises(ValidationError):
        embedding_from_dict({"kind": "warp"})
    with pytest.raises(ValidationError):
        embedding_from_dict({"kind": "mazur", "g1": -1})
    with pytest.raises(ValidationError):
        d_gamma(np.eye(2), np.eye(2), 1.0)
