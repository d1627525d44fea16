import numpy as np
import pytest

from bregproj.errors import ValidationError
from bregproj.spaces import (NormSpec, Space, conjugate_exponent, eigen_sorted, polar_decompose,
                             random_unitary, signed_power)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 7.0])
def test_vector_norm_matches_numpy(rng, p):
    sp = Space.vector(5, p)
    x = rng.normal(size=5)
    assert sp.norm_of(x) == pytest.approx(np.linalg.norm(x, p), rel=1e-12)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 4.0])
def test_schatten_norm_matches_singular_values(rng, p):
    sp = Space.matrix(3, p)
    x = sp.random(rng)
    s = np.linalg.svd(x, compute_uv=False)
    assert sp.norm_of(x) == pytest.approx(np.sum(s ** p) ** (1 / p), rel=1e-12)


def test_conjugate_exponent():
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(4.0) == pytest.approx(4.0 / 3.0)
    assert 1 / 3.0 + 1 / conjugate_exponent(3.0) == pytest.approx(1.0)


@pytest.mark.parametrize("space", [Space.vector(4, 1.5), Space.vector(4, 3.0),
                                   Space.matrix(3, 3.0), Space.matrix(2, 1.5)])
def test_duality_map_defining_properties(rng, space):
    x = space.random(rng)
    jx = space.j(x)
    nx = space.norm_of(x)
    assert space.pairing(x, jx) == pytest.approx(nx ** 2, rel=1e-10)
    assert space.dual_norm_of(jx) == pytest.approx(nx, rel=1e-10)
    back = space.j_dual(jx)
    assert np.allclose(back, x, atol=1e-9)


def test_flatten_is_an_isometry_of_the_pairing(rng):
    sp = Space.matrix(3)
    x, y = sp.random(rng), sp.random(rng)
    fx, fy = sp.flatten(x), sp.flatten(y)
    assert fx.size == sp.real_dim == 9
    assert fx @ fy == pytest.approx(sp.pairing(x, y), rel=1e-12)
    assert np.allclose(sp.unflatten(fx), x)


def test_polar_decomposition_recomposes(rng):
    sp = Space.matrix(4)
    x = sp.random(rng)
    parts = polar_decompose(x)
    assert np.allclose(parts.recompose(), x, atol=1e-12)
    lam, v = eigen_sorted(x)
    assert np.all(np.diff(lam) <= 0)
    assert np.allclose(v @ np.diag(lam) @ v.conj().T, x, atol=1e-12)


def test_signed_power_on_vectors_and_matrices(rng):
    assert np.allclose(signed_power(np.array([-8.0, 0.0, 27.0]), 1 / 3), [-2.0, 0.0, 3.0])
    sp = Space.matrix(3)
    x = sp.random(rng)
    y = signed_power(x, 0.5)
    # u|x|^r with the same eigenvectors: squaring back the magnitudes recovers |x|
    lam, _ = eigen_sorted(x)
    lam_y = np.linalg.eigvalsh(y)
    assert np.allclose(np.sort(np.sign(lam) * np.sqrt(np.abs(lam))), np.sort(lam_y), atol=1e-12)


def test_random_unitary_is_unitary(rng):
    u = random_unitary(4, rng)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_space_round_trips_through_dict():
    sp = Space.from_dict({"kind": "vector", "n": 3, "norm": {"family": "p", "p": 3}})
    assert sp.norm.family == "p_norm" and sp.norm.p == 3.0
    assert Space.from_dict(sp.to_dict()) == sp
    m = Space.from_dict({"kind": "matrix", "n": 2, "norm": {"family": "p", "p": 1.5}})
    assert m.norm.family == "schatten_p"


@pytest.mark.parametrize("bad", [
    {"kind": "tensor", "n": 2},
    {"kind": "vector"},
    {"kind": "vector", "n": 0},
    {"kind": "vector", "n": 2, "norm": {"family": "p", "p": 0.5}},
    {"kind": "vector", "n": 2, "norm": {"family": "p", "p": 1.0}},
    {"kind": "vector", "n": 2, "norm": {"family": "schatten_p", "p": 2}},
])
def test_bad_space_specs_are_rejected(bad):
    with pytest.raises(ValidationError):
        Space.from_dict(bad)


def test_validate_rejects_nan_and_non_hermitian():
    with pytest.raises(ValidationError):
        Space.vector(2).validate([1.0, np.nan])
    with pytest.raises(ValidationError):
        Space.vector(2).validate([1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        Space.matrix(2).validate(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_dual_space_has_conjugate_exponent():
    sp = Space.vector(3, 3.0)
    assert sp.dual().norm.p == pytest.approx(1.5)
    assert NormSpec("p_norm", 4.0).dual().p == pytest.approx(4 / 3)
