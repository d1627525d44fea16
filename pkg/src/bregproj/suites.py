"""
Verification suites shared by the command line and the acceptance tests.

Each suite returns a :class:`SuiteReport`: a list of named checks, each a
measured value against a limit, plus a table of raw rows. A suite passes
iff every check passes. All randomness derives from the ``seed`` argument.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
from scipy.linalg import logm
from scipy.optimize import root

from .convex_sets import (Affine, Box, FinitelyGeneratedCone, Halfspace, Hyperplane, NormBall,
                          Orthant, Simplex, Subspace)
from .divergence import bregman_value, identity_suite
from .embeddings import (d_gamma, d_gamma_potential, extended_power_divergence, lozanovskii_forward,
                         lozanovskii_inverse, mazur, random_channel, apply_channel, trace_norm)
from .errors import ValidationError
from .gauges import GaugePotential, PowerGauge, Quasigauge, conjugate_integral_check
from .metrology import convexity_smoothness_moduli, estimate_holder, gradient_check
from .operators import (MonotoneMap, certify_quasinonexpansive, cyclic_project, left_prox,
                        left_resolvent)
from .potentials import (KL, AlphaFamily, Burg, FermiDirac, PowerSum, Quadratic, SquaredPNorm,
                         hilbert, spectral_lift)
from .projections import (alber_decompose, grid_left_project_2d, grid_right_project_2d,
                          left_project, right_project, verify_pythagorean)
from .spaces import NormSpec, Space, random_unitary

__all__ = ["Check", "SuiteReport", "SUITES", "HOLDER_CASES", "run_suite", "catalog"]


@dataclass
class Check:
    """One assertion: ``value <= limit`` (or ``>=``)."""

    name: str
    value: float
    limit: float
    relation: str = "<="
    note: str = ""

    @property
    def passed(self) -> bool:
        v = float(self.value)
        if np.isnan(v):
            return False
        return v <= self.limit if self.relation == "<=" else v >= self.limit

    def to_dict(self):
        return {"name": self.name, "value": float(self.value), "limit": float(self.limit),
                "relation": self.relation, "passed": self.passed, "note": self.note}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    checks: List[Check] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)
    runtime: float = 0.0
    case: str | None = None

    def add(self, name, value, limit, relation="<=", note=""):
        self.checks.append(Check(name, float(value), float(limit), relation, note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {"suite": self.suite, "case": self.case, "seed": self.seed,
                "passed": self.passed, "runtime_seconds": self.runtime,
                "checks": [c.to_dict() for c in self.checks], "rows": self.rows}


def _rel(a, b) -> float:
    a, b = np.ravel(np.asarray(a)), np.ravel(np.asarray(b))
    return float(np.linalg.norm(a - b) / (1.0 + np.linalg.norm(b)))


# ---------------------------------------------------------------------------
# catalog used by the conjugacy and identity suites


def catalog(rng) -> list:
    """``(label, potential)`` pairs covering every catalog kind."""
    out = []
    for n in (2, 4, 8):
        v = Space.vector(n)
        A = rng.standard_normal((n, n))
        out += [
            (f"gauge/l3/n{n}", GaugePotential(Space.vector(n, 3.0), PowerGauge(1.0, 1.0 / 3.0))),
            (f"power_sum/n{n}", PowerSum(v, 0.5)),
            (f"kl/n{n}", KL(v)),
            (f"burg/n{n}", Burg(v)),
            (f"fermi_dirac/n{n}", FermiDirac(v)),
            (f"alpha_family/n{n}", AlphaFamily(v, 0.3)),
            (f"squared_pnorm/n{n}", SquaredPNorm(v, 0.75)),
            (f"quadratic/n{n}", Quadratic(v, A @ A.T + n * np.eye(n))),
        ]
    for n in (2, 4):
        v = Space.vector(n)
        out += [
            (f"spectral_lift/kl/m{n}", spectral_lift(KL(v))),
            (f"spectral_lift/burg/m{n}", spectral_lift(Burg(v))),
            (f"spectral_lift/fermi_dirac/m{n}", spectral_lift(FermiDirac(v))),
            (f"spectral_lift/alpha_family/m{n}", spectral_lift(AlphaFamily(v, 0.3))),
            (f"spectral_lift/power_sum/m{n}", spectral_lift(PowerSum(v, 0.5))),
            (f"gauge/schatten3/m{n}", GaugePotential(Space.matrix(n, 3.0), PowerGauge(0.5, 0.4))),
        ]
    return out


def _interior(psi, rng):
    x = psi.sample_interior(rng)
    while not psi.in_interior(x):
        x = psi.sample_interior(rng)
    return x


def suite_conjugacy(seed: int = 0, points: int = 1000) -> SuiteReport:
    rep = SuiteReport("conjugacy", seed)
    rng = np.random.default_rng(seed)
    worst = {"fenchel_young": 0.0, "roundtrip": 0.0, "gradient": 0.0}
    for label, psi in catalog(rng):
        sp = psi.space
        fy = rt = 0.0
        pts = [_interior(psi, rng) for _ in range(points)]
        for x in pts:
            g = psi.grad(x)
            a, b, c = psi.value(x), psi.conj(g), sp.pairing(x, g)
            fy = max(fy, abs(a + b - c) / (1.0 + abs(a) + abs(b) + abs(c)))
            rt = max(rt, _rel(psi.conj_grad(g), x))
        gr = gradient_check(psi, pts)
        rep.rows.append({"potential": label, "points": points, "fenchel_young": fy,
                         "roundtrip": rt, "gradient": gr})
        worst["fenchel_young"] = max(worst["fenchel_young"], fy)
        worst["roundtrip"] = max(worst["roundtrip"], rt)
        worst["gradient"] = max(worst["gradient"], gr)
    rep.add("fenchel_young_relative", worst["fenchel_young"], 1e-8)
    rep.add("conj_grad_after_grad", worst["roundtrip"], 1e-6)
    rep.add("gradient_vs_finite_differences", worst["gradient"], 1e-5)
    return rep


def suite_identities(seed: int = 0, quadruples: int = 1000) -> SuiteReport:
    rep = SuiteReport("identities", seed)
    rng = np.random.default_rng(seed)
    names = ("affine", "symmetric_sum", "cosine", "quadruple", "dual_swap")
    worst = dict.fromkeys(names, 0.0)
    for label, psi in catalog(rng):
        sp = psi.space
        row = dict.fromkeys(names, 0.0)
        for _ in range(quadruples):
            x, y, z, w = (_interior(psi, rng) for _ in range(4))
            lam1, lam2 = rng.uniform(0.1, 3.0, 2)
            ir = identity_suite(psi, x, y, z, w, lam1, lam2, shift=sp.random(rng),
                                const=rng.standard_normal())
            for k, v in zip(names, ir):
                row[k] = max(row[k], v)
        rep.rows.append({"potential": label, "quadruples": quadruples, **row})
        for k in names:
            worst[k] = max(worst[k], row[k])
    for k in names:
        rep.add(f"{k}_identity", worst[k], 1e-8)
    return rep


# ---------------------------------------------------------------------------
# projections


def _pyth_potentials(n):
    return [("hilbert", hilbert(Space.vector(n))),
            ("gauge_phi_1_quarter_l4", GaugePotential(Space.vector(n, 4.0), PowerGauge(1.0, 0.25))),
            ("kl", KL(Space.vector(n))),
            ("burg", Burg(Space.vector(n)))]


def _pyth_sets(n, rng):
    a = rng.uniform(0.5, 1.5, n)
    A = np.vstack([rng.uniform(0.5, 1.5, n), rng.uniform(-0.5, 1.5, n)])
    xa = rng.uniform(0.5, 1.5, n)
    return [("hyperplane", Hyperplane(a, float(a @ rng.uniform(0.3, 0.8, n)))),
            ("affine2", Affine(A, A @ xa)),
            ("halfspace", Halfspace(a, float(a @ rng.uniform(0.3, 0.8, n)))),
            ("box", Box(np.full(n, 0.3), np.full(n, 0.9))),
            ("simplex", Simplex(1.0)),
            ("ball", NormBall(np.full(n, 1.0), 0.5))]


def _dual_sets(label, n, rng):
    """Dual-coordinate hyperplane and halfspace meeting the conjugate domain."""
    a = rng.uniform(0.5, 1.5, n)
    if label == "burg":
        eta0 = -rng.uniform(0.5, 2.0, n)
    elif label == "kl":
        eta0 = rng.uniform(-1.0, 0.5, n)
    else:
        eta0 = rng.uniform(-0.5, 0.5, n)
    b = float(a @ eta0)
    return [("dual_hyperplane", Hyperplane(a, b, coordinates="dual")),
            ("dual_halfspace", Halfspace(a, b, coordinates="dual"))]


def suite_pythagorean(seed: int = 0, probes: int = 500, n: int = 3, starts: int = 2) -> SuiteReport:
    rep = SuiteReport("pythagorean", seed)
    rng = np.random.default_rng(seed)
    ineq, eq, r_ineq, r_eq = np.inf, 0.0, np.inf, 0.0
    for plabel, psi in _pyth_potentials(n):
        for slabel, K in _pyth_sets(n, rng):
            for _ in range(starts):
                y = rng.uniform(0.05, 2.5, n)
                pr = verify_pythagorean(psi, K, y, "left", probes, rng=rng)
                ineq = min(ineq, pr.min_residual)
                if pr.equality_expected:
                    eq = max(eq, pr.max_abs_residual)
                rep.rows.append({"side": "left", "potential": plabel, "set": slabel,
                                 "min_residual": pr.min_residual,
                                 "max_abs_residual": pr.max_abs_residual,
                                 "affine": pr.equality_expected})
        for slabel, K in _dual_sets(plabel, n, rng):
            for _ in range(starts):
                y = rng.uniform(0.05, 2.5, n)
                pr = verify_pythagorean(psi, K, y, "right", probes, rng=rng)
                r_ineq = min(r_ineq, pr.min_residual)
                if pr.equality_expected:
                    r_eq = max(r_eq, pr.max_abs_residual)
                rep.rows.append({"side": "right", "potential": plabel, "set": slabel,
                                 "min_residual": pr.min_residual,
                                 "max_abs_residual": pr.max_abs_residual,
                                 "affine": pr.equality_expected})
    rep.add("left_min_residual", ineq, -1e-8, ">=")
    rep.add("left_affine_max_abs_residual", eq, 1e-6)
    rep.add("right_min_residual", r_ineq, -1e-8, ">=")
    rep.add("right_grad_affine_max_abs_residual", r_eq, 1e-6)
    return rep


def suite_oracle(seed: int = 0, instances: int = 50, step: float = 1e-3) -> SuiteReport:
    """Grid brute force and forced first-order solves on R^2 instances."""
    rep = SuiteReport("oracle", seed)
    rng = np.random.default_rng(seed)
    pots = _pyth_potentials(2)
    worst_grid = worst_fo = worst_rgrid = worst_rfo = 0.0
    for k in range(instances):
        plabel, psi = pots[k % len(pots)]
        slabel, K = _pyth_sets(2, rng)[[0, 2, 3, 4, 5][(k // len(pots)) % 5]]
        y = rng.uniform(0.05, 2.5, 2)
        while K.contains(y):
            y = rng.uniform(0.05, 2.5, 2)
        z = left_project(psi, K, y).point
        _, zg, _ = grid_left_project_2d(psi, K, y, step)
        zf = left_project(psi, K, y, method="first_order").point
        dg, df = float(np.max(np.abs(z - zg))) / step, float(np.max(np.abs(z - zf)))
        _, Kh = _dual_sets(plabel, 2, rng)[0]
        yr = rng.uniform(0.05, 2.5, 2)
        w = right_project(psi, Kh, yr).point
        _, wg, _ = grid_right_project_2d(psi, Kh, yr, step)
        wf = right_project(psi, Kh, yr, method="first_order").point
        # the right grid lives in dual coordinates
        drg = float(np.max(np.abs(psi.grad(w) - psi.grad(wg)))) / step
        drf = float(np.max(np.abs(w - wf)))
        worst_grid, worst_fo = max(worst_grid, dg), max(worst_fo, df)
        worst_rgrid, worst_rfo = max(worst_rgrid, drg), max(worst_rfo, drf)
        rep.rows.append({"instance": k, "potential": plabel, "set": slabel,
                         "left_grid_steps": dg, "left_first_order": df,
                         "right_grid_steps": drg, "right_first_order": drf})
    rep.add("left_vs_grid_in_steps", worst_grid, 2.0)
    rep.add("left_vs_first_order", worst_fo, 1e-6)
    rep.add("right_vs_grid_in_steps", worst_rgrid, 2.0)
    rep.add("right_vs_first_order", worst_rfo, 1e-6)
    return rep


def suite_alber(seed: int = 0, points: int = 100) -> SuiteReport:
    """
    Decompositions against cones and subspaces in R^3 for the gauge
    ``phi(t) = t^(p-1)``. The reconstruction ``x = grad Psi^*(P_hat) + LP_K(x)``
    is checked as stated; the dual-coordinate reconstruction
    ``grad Psi(x) = P_hat + grad Psi(LP_K(x))`` is reported alongside.
    """
    rep = SuiteReport("alber", seed)
    rng = np.random.default_rng(seed)
    worst = {"primal": 0.0, "dual": 0.0, "pairing": 0.0}
    for p in (1.5, 2.0, 3.0):
        gp = GaugePotential(Space.vector(3, p), PowerGauge(1.0, 1.0 / p))
        cones = [("orthant", Orthant(3)),
                 ("ray", FinitelyGeneratedCone(rng.standard_normal((1, 3)))),
                 ("subspace1", Subspace(rng.standard_normal((1, 3)))),
                 ("subspace2", Subspace(rng.standard_normal((2, 3))))]
        for label, K in cones:
            row = {"p": p, "cone": label, "primal": 0.0, "dual": 0.0, "pairing": 0.0}
            for _ in range(points):
                r = alber_decompose(gp, K, rng.standard_normal(3))
                row["primal"] = max(row["primal"], r.primal_form_residual)
                row["dual"] = max(row["dual"], r.reconstruction_residual)
                row["pairing"] = max(row["pairing"], r.pairing_residual)
            rep.rows.append(row)
            for k in worst:
                worst[k] = max(worst[k], row[k])
    rep.add("reconstruction_residual", worst["primal"], 1e-6,
            note="x = grad Psi^*(P_hat(grad Psi x)) + LP_K(x)")
    rep.add("pairing_residual", worst["pairing"], 1e-6)
    rep.add("dual_reconstruction_residual", worst["dual"], 1e-6,
            note="grad Psi(x) = P_hat(grad Psi x) + grad Psi(LP_K(x)); informational")
    return rep


def _halfplanes_oracle(a1, b1, a2, b2, y):
    """Euclidean projection onto two half-planes by active-set enumeration."""
    cands = [y]
    for a, b in ((a1, b1), (a2, b2)):
        cands.append(y - max(0.0, a @ y - b) / (a @ a) * a)
    cands.append(np.linalg.solve(np.vstack([a1, a2]), np.array([b1, b2])))
    feas = [c for c in cands if a1 @ c <= b1 + 1e-12 and a2 @ c <= b2 + 1e-12]
    return min(feas, key=lambda c: np.linalg.norm(c - y))


def suite_cyclic(seed: int = 0, instances: int = 5) -> SuiteReport:
    rep = SuiteReport("cyclic", seed)
    rng = np.random.default_rng(seed)
    H = hilbert(Space.vector(2))
    err_h, sw_h = 0.0, 0
    setups = [(np.array([1.0, 1.0]), 1.0, np.array([1.0, -2.0]), 0.0, np.array([2.0, 0.0]))]
    for _ in range(instances - 1):
        a1, a2 = rng.standard_normal(2), rng.standard_normal(2)
        setups.append((a1, float(rng.uniform(-1, 1)), a2, float(rng.uniform(-1, 1)),
                       3.0 * rng.standard_normal(2)))
    for a1, b1, a2, b2, y in setups:
        exact = _halfplanes_oracle(a1, b1, a2, b2, y)
        tr = cyclic_project(H, [Halfspace(a1, b1), Halfspace(a2, b2)], y,
                            mode="dykstra_hilbert", sweeps=200, tol=1e-13)
        e = float(np.linalg.norm(tr.final - exact))
        err_h, sw_h = max(err_h, e), max(sw_h, tr.sweeps)
        rep.rows.append({"case": "hilbert_dykstra", "error": e, "sweeps": tr.sweeps})
    rep.add("dykstra_error", err_h, 1e-6)
    rep.add("dykstra_sweeps", sw_h, 200)
    psi = KL(Space.vector(3))
    err_k, sw_k = 0.0, 0
    for _ in range(instances):
        A = rng.uniform(0.2, 1.5, (2, 3))
        # alternating projections converge at a rate set by the angle between
        # the hyperplanes; keep it away from zero
        while A[0] @ A[1] > 0.95 * np.linalg.norm(A[0]) * np.linalg.norm(A[1]):
            A = rng.uniform(-0.5, 1.5, (2, 3))
        x0 = rng.uniform(0.3, 1.5, 3)
        b = A @ x0
        y = rng.uniform(0.1, 3.0, 3)
        direct = left_project(psi, Affine(A, b), y).point
        tr = cyclic_project(psi, [Hyperplane(A[0], b[0]), Hyperplane(A[1], b[1])], y,
                            mode="naive_cyclic", sweeps=500, tol=1e-13)
        e = float(np.linalg.norm(tr.final - direct))
        err_k, sw_k = max(err_k, e), max(sw_k, tr.sweeps)
        rep.rows.append({"case": "kl_naive_cyclic", "error": e, "sweeps": tr.sweeps})
    rep.add("kl_cyclic_error", err_k, 1e-6)
    rep.add("kl_cyclic_sweeps", sw_k, 500)
    return rep


# ---------------------------------------------------------------------------
# operators


def suite_operators(seed: int = 0, samples: int = 1000) -> SuiteReport:
    rep = SuiteReport("operators", seed)
    rng = np.random.default_rng(seed)
    n = 3
    psi = KL(Space.vector(n))
    D = lambda a, b: bregman_value(psi, a, b)  # noqa: E731
    c = rng.uniform(0.5, 1.5, n)
    B = rng.standard_normal((n, n))
    M = B @ B.T / n + 0.5 * np.eye(n) + (B - B.T) / 2
    T = MonotoneMap.linear(psi.space, M, offset=-(M @ c))

    # resolvent pythagorean inequality at the zero c of T
    worst_pyth = np.inf
    for _ in range(samples):
        x = rng.uniform(0.05, 3.0, n)
        lam = float(rng.uniform(0.1, 3.0))
        z = left_resolvent(psi, T, lam, x).point
        dyx = D(c, x)
        worst_pyth = min(worst_pyth, (dyx - D(c, z) - D(z, x)) / (1.0 + dyx))
    rep.add("resolvent_pythagorean_min", worst_pyth, -1e-9, ">=")

    # lprox against a primal stationarity solve (independent of the dual path)
    target = rng.uniform(0.5, 2.0, n)
    f = Quadratic(psi.space, np.diag(rng.uniform(0.5, 2.0, n)))
    shifted = _ShiftedQuadratic(f, target)
    worst_coh = 0.0
    for _ in range(50):
        y = rng.uniform(0.1, 3.0, n)
        lam = float(rng.uniform(0.2, 5.0))
        zp = left_prox(psi, shifted, lam, y).point
        gy = psi.grad(y)
        sol = root(lambda u: shifted.grad(np.exp(u)) + lam * (u - gy), np.log(y), tol=1e-14)
        worst_coh = max(worst_coh, _rel(zp, np.exp(sol.x)))
    rep.add("lprox_resolvent_coherence", worst_coh, 1e-7)

    # quasinonexpansive certificates
    pts = [rng.uniform(0.05, 3.0, n) for _ in range(200)]
    K = Simplex(float(c.sum()))
    fps_K = [rng.dirichlet(np.ones(n)) * c.sum() for _ in range(10)] + [c]
    lp = lambda x: left_project(psi, K, x).point  # noqa: E731
    lres = lambda x: left_resolvent(psi, T, 1.0, x).point  # noqa: E731
    r1 = certify_quasinonexpansive(psi, lp, fps_K, pts)
    r2 = certify_quasinonexpansive(psi, lres, [c], pts)
    r3 = certify_quasinonexpansive(psi, lambda x: lp(lres(x)), [c], pts)
    rep.add("left_projection_left_qne_violation", r1.left_violation, 1e-9)
    rep.add("left_resolvent_left_qne_violation", r2.left_violation, 1e-9)
    rep.add("composition_left_qne_violation", r3.left_violation, 1e-9)
    rep.rows += [{"map": "left_projection_simplex", **vars(r1)},
                 {"map": "left_resolvent_linear", **vars(r2)},
                 {"map": "projection_after_resolvent", **vars(r3)}]
    return rep


class _ShiftedQuadratic(Quadratic):
    """``1/2 <T(x - t), x - t>``."""

    def __init__(self, base: Quadratic, target):
        super().__init__(base.space, base.T)
        self.target = np.asarray(target, float)

    def value(self, x):
        return super().value(np.asarray(x) - self.target)

    def grad(self, x):
        return super().grad(np.asarray(x) - self.target)


# ---------------------------------------------------------------------------
# spectral


def _random_density(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = a @ a.conj().T + 1e-3 * np.eye(n)
    return r / np.trace(r).real


def _umegaki_closed(rho, sigma):
    """``tr rho (log rho - log sigma) - tr rho + tr sigma`` via matrix logarithms."""
    val = np.trace(rho @ (logm(rho) - logm(sigma))).real
    return float(val - np.trace(rho).real + np.trace(sigma).real)


def suite_spectral(seed: int = 0, pairs: int = 1000, n: int = 3) -> SuiteReport:
    rep = SuiteReport("spectral", seed)
    rng = np.random.default_rng(seed)
    v = Space.vector(n)
    lifts = [("umegaki", KL(v)), ("log_det", Burg(v)), ("fermi_dirac", FermiDirac(v)),
             ("alpha_0.3", AlphaFamily(v, 0.3))]
    inv = diag = 0.0
    for label, f in lifts:
        S = spectral_lift(f)
        for _ in range(100):
            x, y = _interior(S, rng), _interior(S, rng)
            U = random_unitary(n, rng)
            d0 = bregman_value(S, x, y)
            d1 = bregman_value(S, U @ x @ U.conj().T, U @ y @ U.conj().T)
            inv = max(inv, abs(d1 - d0) / (1.0 + abs(d0)))
            a, b = _interior(f, rng), _interior(f, rng)
            dm = bregman_value(S, np.diag(a).astype(complex), np.diag(b).astype(complex))
            dv = bregman_value(f, a, b)
            diag = max(diag, abs(dm - dv) / (1.0 + abs(dv)))
        rep.rows.append({"lift": label, "unitary_invariance": inv, "diagonal_reduction": diag})
    rep.add("unitary_invariance", inv, 1e-8)
    rep.add("diagonal_reduction", diag, 1e-10)
    U = spectral_lift(KL(v))
    neg, agree = np.inf, 0.0
    for _ in range(pairs):
        rho, sigma = _random_density(n, rng), _random_density(n, rng)
        d = bregman_value(U, rho, sigma)
        ref = _umegaki_closed(rho, sigma)
        neg = min(neg, d)
        agree = max(agree, abs(d - ref) / (1.0 + abs(ref)))
    rep.add("umegaki_min_over_density_pairs", neg, 0.0, ">=")
    rep.add("umegaki_vs_matrix_log_closed_form", agree, 1e-8)
    return rep


# ---------------------------------------------------------------------------
# embeddings


def suite_embeddings(seed: int = 0, samples: int = 200) -> SuiteReport:
    rep = SuiteReport("embeddings", seed)
    rng = np.random.default_rng(seed)
    # Mazur norm interlock |l(x)|_{1/g2}^{1/g2} = scale^{1/g2} |x|_{1/g1}^{1/g1}
    lock = 0.0
    for _ in range(samples):
        g1, g2 = rng.uniform(0.2, 0.9, 2)
        lam = float(rng.uniform(0.5, 2.0))
        x = Space.matrix(3).random(rng) if rng.uniform() < 0.5 else rng.standard_normal(5)
        y = mazur(g1, g2, x, lam)
        nx = _schatten_or_p(x, 1.0 / g1) ** (1.0 / g1)
        ny = _schatten_or_p(y, 1.0 / g2) ** (1.0 / g2)
        lock = max(lock, abs(ny - lam ** (1.0 / g2) * nx) / (1.0 + abs(ny)))
    rep.add("mazur_norm_interlock", lock, 1e-10)

    closed = zero = scale = 0.0
    for _ in range(samples):
        g = float(rng.uniform(0.1, 0.9))
        phi, psi = _random_density(4, rng), _random_density(4, rng)
        gp = d_gamma_potential(phi, g)
        composed = bregman_value(gp, mazur(1.0, g, phi), mazur(1.0, g, psi))
        dg = d_gamma(phi, psi, g)
        closed = max(closed, abs(composed - dg) / (1.0 + abs(dg)))
        zero = max(zero, abs(d_gamma(phi, phi, g)))
        a, b, lam = float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.3, 3.0))
        lhs = bregman_value(GaugePotential(Space.matrix(4, 1.0 / g), PowerGauge(a, b)),
                            mazur(1.0, g, phi, lam), mazur(1.0, g, psi, lam))
        rhs = bregman_value(GaugePotential(Space.matrix(4, 1.0 / g), PowerGauge(a * lam ** (-1.0 / b), b)),
                            mazur(1.0, g, phi), mazur(1.0, g, psi))
        ref = extended_power_divergence(phi, psi, g, a, b, lam)
        scale = max(scale, abs(lhs - rhs) / (1.0 + abs(rhs)), abs(lhs - ref) / (1.0 + abs(ref)))
    rep.add("d_gamma_closed_form_vs_composed", closed, 1e-10)
    rep.add("d_gamma_self", zero, 1e-10)
    rep.add("scale_identity", scale, 1e-10)

    fams = [("p_norm", Space.vector(6, 3.0)), ("schatten", Space.matrix(3, 2.5)),
            ("weighted", Space("vector", 5, NormSpec("weighted_p", 1.7, weights=tuple(rng.uniform(0.5, 2.0, 5))))),
            ("block", Space("vector", 6, NormSpec("block_pq", 3.0, q=1.5, blocks=(2, 4))))]
    rt = 0.0
    for label, sp in fams:
        row = 0.0
        for _ in range(samples // 4):
            x = sp.random(rng)
            x = x / sp.norm_of(x)
            z = lozanovskii_inverse(sp, x)
            row = max(row, _rel(lozanovskii_forward(sp, z), x))
            z2 = sp.random(rng)
            z2 = z2 / trace_norm(z2)
            row = max(row, _rel(lozanovskii_inverse(sp, lozanovskii_forward(sp, z2)), z2))
        rep.rows.append({"lozanovskii_family": label, "roundtrip": row})
        rt = max(rt, row)
    rep.add("lozanovskii_roundtrip", rt, 1e-8)

    slack = np.inf
    for _ in range(samples):
        g = float(rng.uniform(0.1, 0.9))
        rho, sigma = _random_density(2, rng), _random_density(2, rng)
        ch = random_channel(2, rng, kraus=int(rng.integers(1, 4)))
        before = d_gamma(rho, sigma, g)
        after = d_gamma(apply_channel(ch, rho), apply_channel(ch, sigma), g)
        slack = min(slack, before - after)
    rep.add("cptp_monotonicity_slack", slack, -1e-9, ">=")
    return rep


def _schatten_or_p(x, p):
    x = np.asarray(x)
    if x.ndim == 2:
        s = np.abs(np.linalg.eigvalsh(x))
    else:
        s = np.abs(x)
    return float(np.sum(s ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Hoelder exponents


def _holder_hilbert(seed):
    H = hilbert(Space.vector(4))
    K = Halfspace(np.ones(4), 0.3)

    def sampler(rng, r):
        x = rng.standard_normal(4)
        d = rng.standard_normal(4)
        return x, x + r * d / np.linalg.norm(d)

    return estimate_holder(lambda y: left_project(H, K, y).point, sampler, 600, 1.0,
                           decades=(1, 6), seed=seed)


def _holder_lp(seed):
    sp = Space.vector(8, 4.0)
    G = GaugePotential(sp, PowerGauge(1.0, 0.25))
    rng = np.random.default_rng(seed + 1)
    K = Hyperplane(rng.standard_normal(8), 0.2)

    def sampler(rng, r):
        x = 0.5 * rng.standard_normal(8)
        if rng.uniform() < 0.5:
            x *= 1e-3          # near the origin, where the gradient degenerates
        d = rng.standard_normal(8)
        return x, x + r * d / np.linalg.norm(d)

    return estimate_holder(lambda y: left_project(G, K, y).point, sampler, 600, 1.0 / 3.0,
                           decades=(1, 5), seed=seed)


def _holder_mazur(seed):
    l1 = lambda a, b: float(np.sum(np.abs(np.asarray(a) - np.asarray(b))))  # noqa: E731

    def sampler(rng, r):
        x = rng.standard_normal(5)
        x[rng.uniform(size=5) < 0.5] = 0.0
        x = x / max(1.0, np.sum(np.abs(x))) * rng.uniform()
        d = rng.standard_normal(5)
        y = x + r * d / np.sum(np.abs(d))
        return x, y / max(1.0, np.sum(np.abs(y)))

    return estimate_holder(lambda x: mazur(1.0, 0.5, x), sampler, 2000, 0.5, dist_in=l1,
                           decades=(1, 6), seed=seed)


HOLDER_CASES: Dict[str, Callable] = {
    "hilbert-halfspace": _holder_hilbert,
    "lp-left-beta025": _holder_lp,
    "mazur-l1": _holder_mazur,
}


def suite_holder(seed: int = 0, case: str | None = None) -> SuiteReport:
    rep = SuiteReport("holder", seed, case=case)
    if case is not None and case not in HOLDER_CASES:
        raise ValidationError(f"unknown holder case {case!r}; choose from {sorted(HOLDER_CASES)}")
    for name in ([case] if case else HOLDER_CASES):
        h = HOLDER_CASES[name](seed)
        rep.rows.append({"case": name, **h.to_dict()})
        if name == "hilbert-halfspace":
            rep.add("hilbert_slope_deviation", abs(h.exponent - 1.0), 0.05)
        elif name == "lp-left-beta025":
            rep.add("lp_left_ratio_drift", h.drift, 10.0)
            rep.add("lp_left_finest_slope", h.finest_exponent, 0.28, ">=")
        else:
            rep.add("mazur_ratio_drift", h.drift, 10.0)
    return rep


# ---------------------------------------------------------------------------
# moduli and quasigauges


def suite_moduli(seed: int = 0) -> SuiteReport:
    rep = SuiteReport("moduli", seed)
    spaces = [Space.vector(4, p) for p in (1.5, 2.0, 3.0, 4.0)]
    spaces += [Space.matrix(3, p) for p in (1.5, 2.0, 3.0, 4.0)]
    for sp in spaces:
        p = sp.norm.p
        m = convexity_smoothness_moduli(sp, seed=seed)
        tag = f"{'schatten' if sp.is_matrix else 'lp'}{p:g}"
        rep.rows.append({"space": tag, **m.to_dict()})
        rep.add(f"{tag}_delta_exponent_error", abs(m.delta_exponent - max(2.0, p)), 0.5)
        rep.add(f"{tag}_rho_exponent_error", abs(m.rho_exponent - min(2.0, p)), 0.3)
    return rep


def suite_quasigauge(seed: int = 0, grid: float = 1e-4) -> SuiteReport:
    rep = SuiteReport("quasigauge", seed)
    qs = [("gauge", PowerGauge(1.0, 1.0 / 3.0)), ("one_step", Quasigauge.step(1.0, 2.0, 0.0)),
          ("flat_segment", Quasigauge.flat(1.0, 2.0, 1.0))]
    worst = 0.0
    for label, q in qs:
        for u in (0.5, 1.0, 2.0, 5.0):
            lhs, rhs, res = conjugate_integral_check(q, u, grid)
            rep.rows.append({"quasigauge": label, "u": u, "brute_force": lhs,
                             "inverse_integral": rhs, "residual": res})
            worst = max(worst, res)
    rep.add("conjugate_integral_residual", worst, 1e-4)
    return rep


SUITES: Dict[str, Callable] = {
    "identities": suite_identities,
    "conjugacy": suite_conjugacy,
    "pythagorean": suite_pythagorean,
    "oracle": suite_oracle,
    "alber": suite_alber,
    "cyclic": suite_cyclic,
    "spectral": suite_spectral,
    "embeddings": suite_embeddings,
    "moduli": suite_moduli,
    "holder": suite_holder,
    "quasigauge": suite_quasigauge,
    "operators": suite_operators,
}


def run_suite(name: str, seed: int = 0, case: str | None = None) -> SuiteReport:
    """Run a suite by name and record its wall time."""
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if case is not None and name != "holder":
        raise ValidationError("--case only applies to the holder suite")
    t0 = time.perf_counter()
    rep = SUITES[name](seed=seed, case=case) if name == "holder" else SUITES[name](seed=seed)
    rep.runtime = time.perf_counter() - t0
    return rep
