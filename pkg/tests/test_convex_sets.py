import numpy as np
import pytest
from scipy.optimize import minimize

from bregproj.convex_sets import (Affine, Box, FinitelyGeneratedCone, Halfspace, Hyperplane,
                                  Intersection, NormBall, Orthant, PolyhedralCone, PsdTraceSlice,
                                  SecondOrderCone, Simplex, Subspace, euclidean_project,
                                  polar_cone, project_simplex, reflected_translate, set_from_dict)
from bregproj.errors import InfeasibleError, UnsupportedOperation, ValidationError


def _sets():
    return {
        "hyperplane": Hyperplane([1.0, 2.0, -1.0], 0.5),
        "halfspace": Halfspace([1.0, -1.0, 0.5], 0.2),
        "affine": Affine([[1.0, 1.0, 0.0], [0.0, 1.0, -1.0]], [1.0, 0.5]),
        "box": Box([-0.5, 0.0, 0.2], [0.5, 1.0, 2.0]),
        "simplex": Simplex(2.0),
        "ball": NormBall([0.3, -0.2, 0.1], 0.7),
        "orthant": Orthant(3),
        "ray": FinitelyGeneratedCone([[1.0, 2.0, 0.5]]),
        "cone2": FinitelyGeneratedCone([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]),
        "polyhedral": PolyhedralCone([[1.0, 0.0, -1.0], [0.0, 1.0, -0.5]]),
        "subspace": Subspace([[1.0, 1.0, 0.0]]),
        "soc": SecondOrderCone(),
        "intersection": Intersection([Halfspace([1.0, 0.0, 0.0], 0.0), NormBall([0, 0, 0], 1.0)]),
    }


SETS = _sets()


def _oracle_projection(name, v):
    """Independent Euclidean projection from a smooth formulation of each set."""
    obj = (lambda x: np.sum((x - v) ** 2), lambda x: 2 * (x - v))
    if name in ("ray", "cone2"):
        G = SETS[name].G
        res = minimize(lambda c: np.sum((G.T @ c - v) ** 2), np.ones(G.shape[0]),
                       jac=lambda c: 2 * G @ (G.T @ c - v), method="L-BFGS-B",
                       bounds=[(0, None)] * G.shape[0], options={"ftol": 1e-15, "gtol": 1e-12})
        return G.T @ res.x
    if name == "halfspace":
        K = SETS[name]
        cons = [{"type": "ineq", "fun": lambda x: K.b - K.a @ x, "jac": lambda x: -K.a}]
    elif name == "box":
        K = SETS[name]
        res = minimize(obj[0], np.zeros(3), jac=obj[1], method="L-BFGS-B",
                       bounds=list(zip(K.lower, K.upper)), options={"ftol": 1e-15, "gtol": 1e-12})
        return res.x
    elif name == "ball":
        c, r = np.array([0.3, -0.2, 0.1]), 0.7
        cons = [{"type": "ineq", "fun": lambda x: r * r - np.sum((x - c) ** 2),
                 "jac": lambda x: -2 * (x - c)}]
    elif name == "intersection":
        cons = [{"type": "ineq", "fun": lambda x: -x[0], "jac": lambda x: np.array([-1.0, 0, 0])},
                {"type": "ineq", "fun": lambda x: 1 - x @ x, "jac": lambda x: -2 * x}]
    res = minimize(obj[0], np.zeros(3), jac=obj[1], constraints=cons, method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    return res.x


@pytest.mark.parametrize("name", sorted(SETS))
def test_projection_is_in_the_set_and_satisfies_the_obtuse_angle_rule(rng, name):
    K = SETS[name]
    for _ in range(5):
        v = 2 * rng.normal(size=3)
        z = K.euclidean_project(v)
        assert K.contains(z, 1e-9)
        for k in K.sample(rng, v, 30, spread=2.0):
            assert (v - z) @ (k - z) <= 1e-9 * (1 + np.linalg.norm(v - z) * np.linalg.norm(k - z))


@pytest.mark.parametrize("name", ["halfspace", "box", "ball", "ray", "cone2", "intersection"])
def test_projection_matches_a_generic_solver(rng, name):
    K = SETS[name]
    v = 2 * rng.normal(size=3)
    z = K.euclidean_project(v)
    ref = _oracle_projection(name, v)
    assert np.linalg.norm(v - z) <= np.linalg.norm(v - ref) + 1e-7
    assert np.allclose(z, ref, atol=1e-6)


def test_project_simplex_examples():
    assert np.allclose(project_simplex(np.array([2.0, 2.0])), [0.5, 0.5])
    assert np.allclose(project_simplex(np.array([3.0, 0.0, -1.0]), 1.0), [1.0, 0.0, 0.0])
    assert np.allclose(project_simplex(np.array([0.2, 0.3]), 1.0), [0.45, 0.55])
    v = np.array([0.1, 0.4, 0.5])
    assert np.allclose(project_simplex(v), v)


@pytest.mark.parametrize("name", ["orthant", "ray", "cone2", "polyhedral", "subspace", "soc"])
def test_moreau_decomposition_through_the_polar(rng, name):
    K = SETS[name]
    P = polar_cone(K)
    for _ in range(5):
        v = rng.normal(size=3)
        a, b = K.euclidean_project(v), P.euclidean_project(v)
        assert np.allclose(a + b, v, atol=1e-8)
        assert abs(a @ b) <= 1e-8


def test_reflected_translate_membership(rng):
    xi = rng.normal(size=3)
    for name in ("orthant", "halfspace", "subspace", "ray", "box", "cone2"):
        K = SETS[name]
        R = reflected_translate(K, xi)
        for k in K.sample(rng, xi, 5):
            assert R.contains(xi - k, 1e-8)


def test_psd_trace_slice_projection(rng):
    K = PsdTraceSlice(1.0)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = a + a.conj().T
    z = K.euclidean_project(x)
    assert K.contains(z, 1e-10)
    lam = np.linalg.eigvalsh(z)
    assert lam.min() >= -1e-12 and lam.sum() == pytest.approx(1.0)
    with pytest.raises(UnsupportedOperation):
        K.residual(np.ones(3))


def test_intersection_as_affine_stacks_rows():
    I = Intersection([Hyperplane([1.0, 1.0, 0.0], 1.0), Hyperplane([0.0, 1.0, 1.0], 2.0)])
    A = I.as_affine()
    assert A.A.shape == (2, 3)
    assert A.contains([0.0, 1.0, 1.0])


def test_empty_intersection_is_infeasible():
    I = Intersection([Halfspace([1.0, 0.0], -1.0), Halfspace([-1.0, 0.0], -1.0)])
    with pytest.raises(InfeasibleError):
        I.witness(np.zeros(2))


@pytest.mark.parametrize("name", sorted(SETS))
def test_set_specs_round_trip(name):
    K = SETS[name]
    d = K.to_dict()
    K2 = set_from_dict(d)
    assert K2.to_dict() == d


def test_dual_coordinates_flag_and_no_primal_projection():
    K = set_from_dict({"kind": "hyperplane", "a": [1, 1], "b": 0.0, "coordinates": "dual"})
    assert K.coordinates == "dual"
    with pytest.raises(UnsupportedOperation):
        euclidean_project(K, np.zeros(2))


@pytest.mark.parametrize("spec,err", [
    ({"kind": "hyperplane", "a": [0, 0], "b": 1}, ValidationError),
    ({"kind": "hyperplane", "a": [1, 0]}, ValidationError),
    ({"kind": "box", "lower": [1, 1], "upper": [0, 2]}, InfeasibleError),
    ({"kind": "simplex", "s": -1}, InfeasibleError),
    ({"kind": "ball", "center": [0, 0], "radius": 0}, InfeasibleError),
    ({"kind": "affine", "A": [[1, 1], [2, 2]], "b": [1, 2]}, ValidationError),
    ({"kind": "hyperplane", "a": [1, 0], "b": 0, "coordinates": "mixed"}, ValidationError),
    ({"kind": "dodecahedron"}, ValidationError),
])
def test_invalid_set_specs(spec, err):
    with pytest.raises(err):
        set_from_dict(spec)
