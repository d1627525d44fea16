"""
Left and right D_Psi-projections with certificates.

Solver hierarchy, first applicable wins:

1. ``y`` already in ``K``: return ``y``.
2. Hyperplanes: safeguarded scalar root of ``mu -> <a, grad Psi^*(g + mu a)> - b``.
3. Affine sets (and subspaces): damped Newton on the concave dual
   ``mu -> b.mu - Psi^*(g + A^T mu)``.
4. Halfspaces: test membership, else the boundary hyperplane.
5. Separable potentials on boxes/orthants, simplices and Euclidean balls:
   coordinatewise closed forms driven by one scalar multiplier.
6. Spectral potentials on trace slices: the vector problem on eigenvalues.
7. Single rays: a scalar convex minimization.
8. Everything else: accelerated projected gradient with Armijo
   backtracking and restarts.

Right projections onto dual-coordinate sets are left projections under
``Psi^*`` conjugated by ``grad Psi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._base import Potential
from .convex_sets import (Affine, Box, ConvexSet, FinitelyGeneratedCone, Halfspace, Hyperplane,
                          Intersection, NormBall, Orthant, PsdTraceSlice, Simplex, Subspace,
                          polar_cone, reflected_translate)
from .divergence import bregman_value
from .errors import InfeasibleError, PreconditionError, ValidationError
from .gauges import GaugePotential, PowerGauge
from .potentials import PowerSum, SeparablePotential
from .spaces import Space, eigen_sorted, hermitian_from_eigen

__all__ = [
    "ProjectionResult",
    "PythagoreanReport",
    "AlberResult",
    "left_project",
    "right_project",
    "verify_pythagorean",
    "variational_residual",
    "alber_decompose",
    "dual_metric_project",
    "separable_view",
    "grid_left_project_2d",
    "grid_right_project_2d",
]


@dataclass
class ProjectionResult:
    """Projected point and its certificates."""

    point: np.ndarray
    objective: float
    variational_residual: float
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    converged: bool = True
    method: str = ""
    side: str = "left"

    def to_dict(self):
        pt = self.point
        return {
            "point": _point_json(pt),
            "objective": self.objective,
            "variational_residual": self.variational_residual,
            "multipliers": np.asarray(self.multipliers, float).tolist(),
            "iterations": self.iterations,
            "converged": bool(self.converged),
            "method": self.method,
            "side": self.side,
        }


def _point_json(x):
    x = np.asarray(x)
    if x.ndim == 1:
        return x.astype(float).tolist()
    return [[[float(v.real), float(v.imag)] for v in row] for row in x]


def default_tol(space: Space) -> float:
    return 1e-7 if space.is_matrix else 1e-8


def separable_view(psi: Potential) -> Optional[SeparablePotential]:
    """
    A coordinatewise-separable potential equal to ``psi`` on vectors, or
    ``None``. Power gauges with ``1/beta = p`` on ``l_p`` are separable:
    ``(beta/alpha) |x|_p^p = sum (beta/alpha) |x_i|^(1/beta)``.
    """
    if isinstance(psi, SeparablePotential):
        return None if psi.spectral else psi
    if isinstance(psi, GaugePotential) and isinstance(psi.gauge, PowerGauge):
        sp = psi.space
        if (not sp.is_matrix and sp.norm.family == "p_norm"
                and abs(sp.norm.p * psi.gauge.beta - 1.0) < 1e-14):
            return PowerSum(sp, psi.gauge.beta, 1.0 / psi.gauge.alpha)
    return None


# ---------------------------------------------------------------------------
# certificates


def variational_residual(psi: Potential, K: ConvexSet, y, z, probes: int = 64, rng=None) -> float:
    """
    Worst normalized violation of ``<x - z, grad Psi(z) - grad Psi(y)> >= 0``
    over probe points ``x`` of ``K`` inside the domain of ``psi``.
    """
    rng = np.random.default_rng(12345) if rng is None else rng
    sp = psi.space
    dg = sp.flatten(psi.grad(y) - psi.grad(z))
    ndg = np.linalg.norm(dg)
    if ndg == 0:
        return 0.0
    spread = 1.0 + np.linalg.norm(sp.flatten(z))
    pts = K.sample(rng, z, probes // 2, spread=spread, center=z)
    pts += K.sample(rng, z, probes - probes // 2, spread=0.1 * spread, center=z)
    try:
        pts.append(K.witness(z))
    except Exception:
        pass
    worst = 0.0
    zf = sp.flatten(z)
    for x in pts:
        if not np.isfinite(psi.value(x)):
            continue
        d = sp.flatten(x) - zf
        nd = np.linalg.norm(d)
        if nd == 0:
            continue
        worst = max(worst, float(d @ dg) / (nd * (1.0 + ndg)))
    return worst


def _finish(psi, K, y, z, mult, iters, method, tol, side="left", probes=64, rng=None):
    sp = psi.space
    z = sp.validate(z) if not sp.is_matrix else 0.5 * (z + np.conj(z).T)
    vr = variational_residual(psi, K, y, z, probes, rng)
    memb = K.residual(z)
    scale = 1.0 + np.linalg.norm(sp.flatten(z))
    ok = vr <= tol and memb <= max(tol, 1e-10) * scale
    return ProjectionResult(z, float(bregman_value(psi, z, y)), vr, np.atleast_1d(mult),
                            iters, bool(ok), method, side)


# ---------------------------------------------------------------------------
# solvers


def _hyperplane_solve(psi: Potential, a, b: float, g):
    """Root of ``h(mu) = <a, grad Psi^*(g + mu a)> - b``."""
    sp = psi.space
    A = sp.unflatten(a)

    def xi(mu):
        return g + mu * A

    def h(mu):
        return sp.pairing(psi.conj_grad(xi(mu)), A) - b

    h0 = h(0.0)
    if h0 == 0:
        return psi.conj_grad(g), 0.0, 0
    direction = -1.0 if h0 > 0 else 1.0
    step = 1.0 / max(float(a @ a), 1e-300) * max(1.0, np.linalg.norm(sp.flatten(g)))
    mu_ok, h_ok = 0.0, h0
    evals = 0
    for _ in range(400):
        trial = mu_ok + direction * step
        evals += 1
        if not psi.conj_in_interior(xi(trial)):
            step *= 0.5
            if step < 1e-300:
                break
            continue
        ht = h(trial)
        if np.sign(ht) != np.sign(h0) or ht == 0:
            lo, hi = sorted((mu_ok, trial))
            mu = brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            return psi.conj_grad(xi(mu)), mu, evals
        if abs(ht - h_ok) <= 1e-15 * (1 + abs(ht)) and step > 1e8:
            break
        mu_ok, h_ok = trial, ht
        step *= 2.0
    raise InfeasibleError("hyperplane does not meet the interior of the domain")


def _affine_solve(psi: Potential, A, b, g, tol=1e-14, max_iter=200):
    """Newton on the dual ``G(mu) = Psi^*(g + A^T mu) - b.mu`` (minimized)."""
    sp = psi.space
    A = np.atleast_2d(A)
    m = A.shape[0]
    rows = [sp.unflatten(r) for r in A]

    def xi(mu):
        return g + sum(mu[k] * rows[k] for k in range(m))

    def G(mu):
        e = xi(mu)
        if not psi.conj_in_interior(e):
            return np.inf
        return psi.conj(e) - b @ mu

    mu = np.zeros(m)
    Gm = G(mu)
    scale = 1.0 + np.linalg.norm(b) + np.linalg.norm(A)
    for it in range(max_iter):
        e = xi(mu)
        x = psi.conj_grad(e)
        grad = A @ sp.flatten(x) - b
        if np.linalg.norm(grad) <= tol * scale * (1 + np.linalg.norm(sp.flatten(x))):
            return x, mu, it
        hc = psi.conj_hessian(e)
        if not np.all(np.isfinite(hc)):
            # singular curvature at zero coordinates: cap it
            finite = np.abs(hc[np.isfinite(hc)])
            cap = 1e8 * (finite.max() if finite.size else 1.0)
            hc = np.where(np.isfinite(hc), hc, cap)
        H = A @ hc @ A.T
        try:
            step = np.linalg.solve(H + 1e-300 * np.eye(m), grad)
        except np.linalg.LinAlgError:
            step = grad
        if not np.all(np.isfinite(step)):
            step = grad
        t = 1.0
        while True:
            trial = mu - t * step
            Gt = G(trial)
            if Gt <= Gm - 1e-4 * t * (grad @ step) or (np.isfinite(Gt) and t < 1e-12):
                break
            t *= 0.5
            if t < 1e-20:
                break
        if not np.isfinite(Gt):
            raise InfeasibleError("affine set does not meet the interior of the domain")
        if Gt < -1e300:
            raise InfeasibleError("dual objective unbounded: affine set misses the domain")
        if np.linalg.norm(trial - mu) <= 1e-16 * (1 + np.linalg.norm(mu)):
            mu = trial
            break
        mu, Gm = trial, Gt
    return psi.conj_grad(xi(mu)), mu, max_iter


def _affine_primal(psi: Potential, A, b, g, x_start, tol=1e-14, max_iter=200):
    """
    Minimize ``Psi(x) - <x, g>`` over ``x = x0 + N c`` (``N`` a null-space
    basis of ``A``) by damped Newton in ``c``. Used when the multiplier Newton
    stalls on a singular conjugate Hessian.
    """
    sp = psi.space
    A = np.atleast_2d(A)
    v0 = sp.flatten(x_start)
    v0 = v0 - np.linalg.pinv(A) @ (A @ v0 - b)
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > 1e-12 * sv.max()))
    N = vt[rank:].T
    gv = sp.flatten(g)

    def F(c):
        x = sp.unflatten(v0 + N @ c)
        if not psi.in_interior(x):
            return np.inf
        return psi.value(x) - float(gv @ sp.flatten(x))

    c = np.zeros(N.shape[1])
    Fc = F(c)
    if not np.isfinite(Fc):
        return None
    for it in range(max_iter):
        x = sp.unflatten(v0 + N @ c)
        grad = N.T @ (sp.flatten(psi.grad(x)) - gv)
        if np.linalg.norm(grad) <= tol * (1.0 + np.linalg.norm(gv)):
            return x, it
        H = N.T @ psi.hessian(x) @ N
        reg = 1e-14 * (1.0 + np.abs(H).max())
        step = np.linalg.solve(H + reg * np.eye(H.shape[0]), grad)
        t = 1.0
        while t > 1e-20:
            trial = c - t * step
            Ft = F(trial)
            if Ft <= Fc - 1e-4 * t * (grad @ step):
                break
            t *= 0.5
        if t <= 1e-20:
            return x, it
        c, Fc = trial, Ft
    return sp.unflatten(v0 + N @ c), max_iter


def _simplex_separable(f: SeparablePotential, s: float, g):
    """``x_i(mu) = max(0, f*'(g_i - mu))`` with ``sum x(mu) = s``."""
    g = np.asarray(g, float)

    def x_of(mu):
        return np.maximum(f.dfc(g - mu), 0.0)

    def h(mu):
        return x_of(mu).sum() - s

    # lower bracket: sum large
    if np.isfinite(f.chi):
        base = g.max() - f.chi
        gap = 1.0
        lo = base + gap
        while h(lo) <= 0:
            gap *= 0.5
            lo = base + gap
            if gap < 1e-300:
                raise InfeasibleError("simplex misses the domain")
    else:
        lo = -1.0
        while h(lo) <= 0:
            lo = 2 * lo - 1.0
            if lo < -1e300:
                raise InfeasibleError("simplex misses the domain")
    hi = lo + 1.0
    while h(hi) >= 0:
        hi = hi + 2 * (hi - lo)
        if hi > 1e300:
            raise InfeasibleError("simplex bracket failed")
    mu = brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x_of(mu), mu


def _scalar_root_between(fun, a, b, lo_dom, hi_dom):
    """Root of an increasing ``fun`` known to lie between ``a`` and ``b``,
    shrinking endpoints that fall outside ``(lo_dom, hi_dom)``."""
    lo, hi = min(a, b), max(a, b)
    if lo <= lo_dom:
        ref = hi
        gap = ref - lo_dom
        while True:
            gap *= 0.5
            lo = lo_dom + gap
            if fun(lo) < 0 or gap < 1e-300:
                break
    if hi >= hi_dom:
        ref = lo
        gap = hi_dom - ref
        while True:
            gap *= 0.5
            hi = hi_dom - gap
            if fun(hi) > 0 or gap < 1e-300:
                break
    if lo == hi:
        return lo
    flo, fhi = fun(lo), fun(hi)
    if flo >= 0:
        return lo
    if fhi <= 0:
        return hi
    return brentq(fun, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _ball_separable(f: SeparablePotential, K: NormBall, y, g):
    """KKT ``f'(x_i) - g_i + nu (x_i - c_i) = 0`` with ``|x - c| = r``."""
    c, r = K.center, K.radius
    lo_d, hi_d = f.lo, f.hi

    def x_of(nu):
        out = np.empty_like(y)
        for i in range(y.size):
            fun = lambda t, i=i: float(f.df(np.array([t]))[0]) - g[i] + nu * (t - c[i])  # noqa: E731
            out[i] = _scalar_root_between(fun, y[i], c[i], lo_d, hi_d)
        return out

    def h(nu):
        return np.linalg.norm(x_of(nu) - c) - r

    hi = 1.0
    while h(hi) > 0:
        hi *= 4.0
        if hi > 1e300:
            raise InfeasibleError("ball projection bracket failed")
    nu = brentq(h, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x_of(nu), nu


def _ray_solve(psi: Potential, direction, y, g):
    """Minimize ``t -> D(t d, y)`` over ``t >= 0``."""
    sp = psi.space
    d = sp.unflatten(direction)

    def dphi(t):
        x = t * d
        if not psi.in_interior(x):
            return -np.inf
        return sp.pairing(d, psi.grad(x) - g)

    if psi.in_interior(sp.zeros()) and dphi(0.0) >= 0:
        return sp.zeros() * 0.0, 0.0
    hi = 1.0
    while dphi(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleError("ray projection bracket failed")
    lo = 0.0
    if not np.isfinite(dphi(lo)):
        lo = hi
        while np.isfinite(dphi(lo * 0.5)) and dphi(lo * 0.5) >= 0:
            lo *= 0.5
        lo *= 0.5
        while not np.isfinite(dphi(lo)):
            lo = 0.5 * (lo + hi)
        if dphi(lo) >= 0:
            return lo * d, lo
    t = brentq(dphi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return t * d, t


def _first_order(psi: Potential, K: ConvexSet, y, g, tol: float, max_iter: int, x0=None):
    """
    Accelerated projected gradient on ``x -> Psi(x) - <x, g>`` over ``K``.

    Armijo backtracking on the local Lipschitz estimate, function-value
    restarts, stop when the projected-gradient step is below ``tol``.
    """
    sp = psi.space

    def F(v):
        x = sp.unflatten(v)
        val = psi.value(x)
        if not np.isfinite(val) or not psi.in_interior(x):
            return np.inf
        return val - sp.pairing(x, g)

    def dF(v):
        return sp.flatten(psi.grad(sp.unflatten(v)) - g)

    P = K._project
    if x0 is None:
        x0 = y
    v = P(sp.flatten(x0))
    if not np.isfinite(F(v)):
        # pull towards y until inside the domain
        vy = sp.flatten(y)
        w = K._witness(vy.size)
        for s in np.linspace(0.0, 1.0, 41)[1:]:
            cand = P((1 - s) * vy + s * w)
            if np.isfinite(F(cand)):
                v = cand
                break
        else:
            if not np.isfinite(F(w)):
                raise InfeasibleError("no interior point of the domain found in the set")
            v = w
    L = 1.0
    u, t_acc = v.copy(), 1.0
    Fv = F(v)
    it = 0
    stall, best_r = 0, np.inf

    def natural_residual(w):
        gw = dF(w)
        return np.linalg.norm(w - P(w - gw)) / (1.0 + np.linalg.norm(w) + np.linalg.norm(gw))

    for it in range(1, max_iter + 1):
        gu = dF(u)
        Fu = F(u)
        while True:
            cand = P(u - gu / L)
            Fc = F(cand)
            diff = cand - u
            if np.isfinite(Fc) and Fc <= Fu + gu @ diff + 0.5 * L * (diff @ diff) + 1e-15 * abs(Fu):
                break
            L *= 2.0
            if L > 1e300:
                raise RuntimeError("line search failed")
        if Fc > Fv + 1e-15 * (1.0 + abs(Fv)) and t_acc > 1.0:
            # momentum overshoot: restart from v
            u, t_acc = v.copy(), 1.0
            continue
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t_acc * t_acc))
        u = cand + (t_acc - 1) / t_new * (cand - v)
        if not np.isfinite(F(u)):
            u = cand.copy()
            t_new = 1.0
        # accept within roundoff so gradient steps keep moving near the floor
        v, Fv = cand, min(Fc, Fv) if Fc > Fv else Fc
        t_acc = t_new
        L *= 0.9
        r = natural_residual(v)
        if r <= tol:
            return sp.unflatten(v), it, True
        if r < best_r * (1.0 - 1e-3):
            best_r, stall = r, 0
        else:
            stall += 1
            if stall >= 200:
                # roundoff floor reached
                return sp.unflatten(v), it, best_r <= 1e2 * tol
    return sp.unflatten(v), it, False


def _dispatch(psi, K, y, g, tol, max_iter, method):
    sep = separable_view(psi)
    if method == "first_order":
        z, it, ok = _first_order(psi, K, y, g, tol * 1e-2, max_iter)
        return z, np.zeros(0), it, "first_order" + ("" if ok else "-unconverged")
    if isinstance(K, Hyperplane):
        z, mu, it = _hyperplane_solve(psi, K.a, K.b, g)
        return z, np.array([mu]), it, "hyperplane-root"
    if isinstance(K, Halfspace):
        z, mu, it = _hyperplane_solve(psi, K.a, K.b, g)
        return z, np.array([mu]), it, "halfspace-root"
    if isinstance(K, (Affine, Subspace)) or (isinstance(K, Intersection) and K.is_affine):
        aff = K if isinstance(K, Affine) else K.as_affine()
        target = sep if sep is not None else psi
        z, mu, it = _affine_solve(target, aff.A, aff.b, g)
        if it < 200:
            return z, mu, it, "affine-newton"
        alt = _affine_primal(psi, aff.A, aff.b, g, z)
        if alt is None:
            return z, mu, it, "affine-newton-unconverged"
        return alt[0], np.zeros(0), alt[1], "affine-primal-newton"
    if sep is not None:
        if isinstance(K, (Box, Orthant)):
            if isinstance(K, Orthant):
                lo = np.where(K.sign > 0, 0.0, -np.inf) * np.ones(y.size)
                hi = np.where(K.sign > 0, np.inf, 0.0) * np.ones(y.size)
            else:
                lo, hi = K.lower, K.upper
            z = np.clip(y, lo, hi)
            if not np.isfinite(psi.value(z)):
                raise InfeasibleError("box misses the domain")
            return z, np.zeros(0), 0, "box-clamp"
        if isinstance(K, Simplex):
            z, mu = _simplex_separable(sep, K.s, g)
            return z, np.array([mu]), 0, "simplex-root"
        if isinstance(K, NormBall):
            z, nu = _ball_separable(sep, K, y, g)
            return z, np.array([nu]), 0, "ball-root"
    if isinstance(K, PsdTraceSlice) and isinstance(psi, SeparablePotential) and psi.spectral:
        lam, v = eigen_sorted(y)
        vec = psi.with_space(Space.vector(psi.space.n))
        x, mu = _simplex_separable(vec, K.s, vec.df(lam))
        return hermitian_from_eigen(x, v), np.array([mu]), 0, "spectral-simplex-root"
    if isinstance(K, FinitelyGeneratedCone) and K.G.shape[0] == 1:
        z, t = _ray_solve(psi, K.G[0], y, g)
        return z, np.array([t]), 0, "ray-root"
    z, it, ok = _first_order(psi, K, y, g, tol * 1e-2, max_iter)
    return z, np.zeros(0), it, "first_order" + ("" if ok else "-unconverged")


def left_project(psi: Potential, K: ConvexSet, y, tol: float | None = None,
                 max_iter: int = 100000, method: str = "auto", probes: int = 64,
                 rng=None) -> ProjectionResult:
    """
    ``argmin_{x in K} D_Psi(x, y)``.

    Parameters
    ----------
    psi : Potential
    K : ConvexSet
        A primal-coordinate set meeting the interior of the domain.
    y : array_like
        Interior point of the domain.
    tol : float, optional
        Certificate tolerance (1e-8 for vectors, 1e-7 for matrices).
    method : {'auto', 'first_order'}
        ``'first_order'`` forces the generic projected-gradient solver.

    Returns
    -------
    ProjectionResult
    """
    sp = psi.space
    y = sp.validate(y)
    tol = default_tol(sp) if tol is None else float(tol)
    if K.coordinates != "primal":
        raise ValidationError("left projections take primal-coordinate sets")
    if not psi.in_interior(y):
        raise PreconditionError("y must lie in the interior of the domain")
    if K.contains(y, 1e-14 * (1 + np.linalg.norm(sp.flatten(y)))):
        return ProjectionResult(y.copy(), 0.0, 0.0, np.zeros(0), 0, True, "member", "left")
    g = psi.grad(y)
    z, mult, it, name = _dispatch(psi, K, y, g, tol, max_iter, method)
    res = _finish(psi, K, y, z, mult, it, name, tol, "left", probes, rng)
    if name.endswith("unconverged"):
        res.converged = False
    return res


def right_project(psi: Potential, K_hat: ConvexSet, y, tol: float | None = None,
                  max_iter: int = 100000, method: str = "auto", probes: int = 64,
                  rng=None) -> ProjectionResult:
    """
    ``argmin {D_Psi(y, x) : grad Psi(x) in K_hat}`` computed as
    ``grad Psi^* o LP^{Psi^*}_{K_hat} o grad Psi``.
    """
    sp = psi.space
    y = sp.validate(y)
    if K_hat.coordinates != "dual":
        raise ValidationError("right projections take dual-coordinate sets")
    if not psi.in_interior(y):
        raise PreconditionError("y must lie in the interior of the domain")
    dual = psi.conjugate()
    inner = left_project(dual, K_hat.with_coordinates("primal"), psi.grad(y), tol,
                         max_iter, method, probes, rng)
    x = psi.conj_grad(inner.point)
    return ProjectionResult(x, float(bregman_value(psi, y, x)), inner.variational_residual,
                            inner.multipliers, inner.iterations, inner.converged,
                            inner.method, "right")


# ---------------------------------------------------------------------------
# pythagorean checks


@dataclass
class PythagoreanReport:
    """Residuals ``D(x,y) - D(x,z) - D(z,y)`` (left) or ``D(y,w) - D(z,w) - D(y,z)`` (right)."""

    side: str
    projection: np.ndarray
    residuals: np.ndarray
    relative: np.ndarray
    min_residual: float
    max_abs_residual: float
    equality_expected: bool
    passed: bool


def verify_pythagorean(psi: Potential, K: ConvexSet, y, side: str = "left", probes: int = 500,
                       tol: float = 1e-8, eq_tol: float = 1e-6, rng=None,
                       result: ProjectionResult | None = None) -> PythagoreanReport:
    """
    Sample points of ``K`` (or of ``{grad Psi in K_hat}``) and evaluate the
    pythagorean residuals at the projection of ``y``. Residuals are scaled by
    ``1 + D(x, y)``; inequality means ``min >= -tol``, equality (affine sets)
    means ``max |.| <= eq_tol``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    sp = psi.space
    y = sp.validate(y)
    D = lambda a, b: bregman_value(psi, a, b)  # noqa: E731
    if side == "left":
        res = left_project(psi, K, y) if result is None else result
        z = res.point
        spread = 1.0 + np.linalg.norm(sp.flatten(z - y))
        pts = K.sample(rng, z, probes, spread=spread, center=z)
        raw, rel = [], []
        for x in pts:
            if not np.isfinite(psi.value(x)):
                continue
            dxy = D(x, y)
            r = dxy - D(x, z) - D(z, y)
            raw.append(r)
            rel.append(r / (1.0 + abs(dxy)))
        equality = K.is_affine
    elif side == "right":
        res = right_project(psi, K, y) if result is None else result
        z = res.point
        dual = psi.conjugate()
        gz = psi.grad(z)
        spread = 1.0 + np.linalg.norm(sp.flatten(gz - psi.grad(y)))
        etas = K.with_coordinates("primal").sample(rng, gz, probes, spread=spread, center=gz)
        raw, rel = [], []
        for eta in etas:
            if not dual.in_interior(eta):
                continue
            w = psi.conj_grad(eta)
            dyw = D(y, w)
            r = dyw - D(z, w) - D(y, z)
            raw.append(r)
            rel.append(r / (1.0 + abs(dyw)))
        equality = K.is_affine
    else:
        raise ValidationError("side must be 'left' or 'right'")
    raw, rel = np.asarray(raw), np.asarray(rel)
    if rel.size == 0:
        raise PreconditionError("no probe landed in the domain")
    mn, mx = float(rel.min()), float(np.abs(rel).max())
    ok = mn >= -tol and (not equality or mx <= eq_tol)
    return PythagoreanReport(side, z, raw, rel, mn, mx, equality, bool(ok))


# ---------------------------------------------------------------------------
# Alber decompositions


@dataclass
class AlberResult:
    """
    ``left_part = LP_K(x)`` and ``dual_part = P_hat_{K polar}(j_phi(x))``.

    ``reconstruction_residual`` measures ``j_phi(x) = dual_part + j_phi(left_part)``;
    ``pairing_residual`` is ``|<left_part, dual_part>|``; ``primal_form_residual``
    measures ``x = j_phi^{-1}(dual_part) + left_part``, which only holds when
    ``j_phi`` is additive on the two parts (e.g. Hilbert spaces, or separable
    duality maps with disjoint supports).
    """

    left_part: np.ndarray
    dual_part: np.ndarray
    pairing_residual: float
    reconstruction_residual: float
    primal_form_residual: float


def dual_metric_project(psi: Potential, C: ConvexSet, xi):
    """
    ``argmin_{z in C} Psi^*(xi - z)`` for a cone or halfspace ``C`` in dual
    coordinates, solved as ``xi - LP^{Psi^*}_{xi - C}(0)`` (valid because
    ``grad Psi^*(0) = 0`` for gauge potentials).
    """
    dual = psi.conjugate()
    zero = psi.space.zeros()
    shifted = reflected_translate(C.with_coordinates("primal"), xi)
    if shifted.contains(zero, 1e-15):
        u = zero
    else:
        u = left_project(dual, shifted, zero).point
    return xi - u


def alber_decompose(gp: GaugePotential, K: ConvexSet, x) -> AlberResult:
    """
    Decompose ``x`` against a closed convex cone ``K`` with vertex 0 (or a
    subspace, whose polar is its annihilator).
    """
    if not isinstance(gp, GaugePotential):
        raise ValidationError("Alber decompositions need a gauge potential")
    if not K.is_cone:
        raise PreconditionError("K must be a closed convex cone with vertex 0")
    sp = gp.space
    x = sp.validate(x)
    left = left_project(gp, K, x).point
    Kp = polar_cone(K)
    jx = gp.grad(x)
    dual_part = dual_metric_project(gp, Kp, jx)
    scale = 1.0 + np.linalg.norm(sp.flatten(jx))
    recon = np.linalg.norm(sp.flatten(jx - dual_part - gp.grad(left))) / scale
    pair = abs(sp.pairing(left, dual_part)) / (1.0 + sp.norm_of(left) * sp.dual_norm_of(dual_part))
    primal = np.linalg.norm(sp.flatten(x - gp.conj_grad(dual_part) - left)) / (1.0 + sp.norm_of(x))
    return AlberResult(left, dual_part, float(pair), float(recon), float(primal))


# ---------------------------------------------------------------------------
# grid oracles on R^2


def _values_rows(psi: Potential, X) -> np.ndarray:
    """``Psi`` at the rows of ``X`` (+inf off the domain)."""
    return psi.values(np.asarray(X, float))


def _members_rows(K: ConvexSet, X) -> np.ndarray:
    if isinstance(K, Halfspace):
        return X @ K.a <= K.b
    if isinstance(K, Box):
        return np.all((X >= K.lower) & (X <= K.upper), axis=1)
    if isinstance(K, NormBall):
        return np.linalg.norm(X - K.center, axis=1) <= K.radius
    return np.array([K.contains(x, 0.0) for x in X])


def _grid_min(fun, center, half, step, dims):
    """Minimize ``fun`` (evaluated on an array of grid points) on a square or segment grid."""
    ticks = np.arange(-half, half + step / 2, step)
    if dims == 2:
        X, Y = np.meshgrid(center[0] + ticks, center[1] + ticks, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    else:
        pts = (center[0] + ticks)[:, None]
    vals = np.asarray(fun(pts), float)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    k = int(np.argmin(vals))
    return pts[k], vals[k]


def _parametrize(K: ConvexSet):
    """Return (to_points, dims, member, to_param); lines are 1-D. ``to_points`` maps grid rows to points."""
    if isinstance(K, Hyperplane):
        a = K.a / np.linalg.norm(K.a)
        base = K.b / np.linalg.norm(K.a) * a
        tangent = np.array([-a[1], a[0]])
        return ((lambda T: base + T[:, :1] * tangent), 1, None,
                (lambda x: np.array([float(tangent @ (x - base))])))
    if isinstance(K, Simplex):
        e = np.array([1.0, -1.0]) / np.sqrt(2)
        base = np.full(2, K.s / 2)
        lim = K.s / np.sqrt(2)
        return ((lambda T: base + T[:, :1] * e), 1, (lambda T: np.abs(T[:, 0]) <= lim + 1e-15),
                (lambda x: np.array([float(e @ (x - base))])))
    return (lambda T: T), 2, (lambda T: _members_rows(K, T)), (lambda x: np.asarray(x, float))


def _boundary_points(K: ConvexSet, step: float):
    """Points of the boundary of a 2-D ball or box at arclength spacing ``step``."""
    if isinstance(K, NormBall):
        m = int(np.ceil(2 * np.pi * K.radius / step))
        th = 2 * np.pi * np.arange(m) / m
        return K.center + K.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    lo, hi = K.lower, K.upper
    edges = []
    corners = [lo, np.array([hi[0], lo[1]]), hi, np.array([lo[0], hi[1]]), lo]
    for a, b in zip(corners[:-1], corners[1:]):
        m = max(1, int(np.ceil(np.linalg.norm(b - a) / step)))
        s = np.arange(m)[:, None] / m
        edges.append(a + s * (b - a))
    return np.concatenate(edges)


def grid_left_project_2d(psi: Potential, K: ConvexSet, y, step: float = 1e-3,
                         coarse: float = 1e-2, half: float = 4.0):
    """
    Brute-force ``argmin_{x in K} D(x, y)`` on a grid of spacing ``step``,
    refined around the best point of a ``coarse`` grid.

    Returns the grid minimizer in the grid parametrization, the point and
    a function mapping points to that parametrization.
    """
    y = np.asarray(y, float)
    vy, gy = psi.value(y), psi.grad(y)
    if isinstance(K, Halfspace) and not K.contains(y, 0.0):
        K = K.boundary()
    elif isinstance(K, (NormBall, Box)) and not K.contains(y, 0.0):
        # the minimizer lies on the boundary: sweep it directly
        X = _boundary_points(K, step)
        with np.errstate(invalid="ignore"):
            v = _values_rows(psi, X) - vy - (X - y) @ gy
        v = np.where(np.isfinite(v), v, np.inf)
        z = X[int(np.argmin(v))]
        return z, z, (lambda x: np.asarray(x, float))
    to_points, dims, member, to_param = _parametrize(K)

    def obj(T):
        X = to_points(T)
        with np.errstate(invalid="ignore"):
            v = _values_rows(psi, X) - vy - (X - y) @ gy
        if member is not None:
            v = np.where(member(T), v, np.inf)
        return v

    c0 = to_param(y)
    t1, _ = _grid_min(obj, c0, half, coarse, dims)
    t2, _ = _grid_min(obj, t1, 5 * coarse, step, dims)
    return t2, to_points(t2[None, :])[0], to_param


def grid_right_project_2d(psi: Potential, K_hat: Hyperplane, y, step: float = 1e-3,
                          coarse: float = 1e-2, half: float | None = None):
    """
    Brute-force ``argmin D(y, x)`` over ``grad Psi(x)`` on the dual line
    ``K_hat``, gridded in dual coordinates. The default window half-width is
    ``4 (1 + |grad Psi(y)|)``.

    Uses ``D(y, grad Psi^*(eta)) = Psi(y) + Psi^*(eta) - <y, eta>``.
    """
    to_points, dims, member, to_param = _parametrize(K_hat)
    dual = psi.conjugate()
    y = np.asarray(y, float)
    vy = psi.value(y)

    def obj(T):
        E = to_points(T)
        with np.errstate(invalid="ignore"):
            return vy + _values_rows(dual, E) - E @ y

    gy = psi.grad(y)
    c0 = to_param(gy)
    if half is None:
        half = 4.0 * (1.0 + float(np.linalg.norm(gy)))
    t1, _ = _grid_min(obj, c0, half, coarse, 1)
    t2, _ = _grid_min(obj, t1, 5 * coarse, step, 1)
    return t2, psi.conj_grad(to_points(t2[None, :])[0]), to_param
