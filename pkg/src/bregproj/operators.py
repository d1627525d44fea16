"""
Proximal maps, resolvents, cyclic projections and sampled certificates of
quasinonexpansivity.

Resolvents use the inverse form ``lres = (grad Psi + lam T)^(-1) o grad Psi``
and are solved in dual coordinates: find ``eta`` with
``eta + lam T(grad Psi^*(eta)) = xi``. The same solve gives the right
resolvent ``(id + lam T o grad Psi^*)^(-1)`` directly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import root

from ._base import Potential
from .convex_sets import ConvexSet
from .divergence import bregman_value
from .errors import PreconditionError, ValidationError
from .gauges import GaugePotential, PowerGauge
from .projections import left_project, right_project
from .spaces import Space

__all__ = [
    "MonotoneMap",
    "OperatorResult",
    "IterationTrace",
    "QuasinonexpansiveReport",
    "left_resolvent",
    "right_resolvent",
    "left_prox",
    "right_prox",
    "cyclic_project",
    "certify_quasinonexpansive",
    "is_hilbert",
]


class MonotoneMap:
    """
    A monotone map ``T`` from primal to dual coordinates.

    Use the constructors :meth:`gradient_of`, :meth:`linear` and
    :meth:`indicator`; the last one stands for ``d iota_K`` and is not
    single-valued, so it is only consumed by resolvents (as projections).
    """

    def __init__(self, kind: str, space: Space, fun=None, jac=None, payload=None):
        self.kind = kind
        self.space = space
        self._fun = fun
        self._jac = jac
        self.payload = payload

    @classmethod
    def gradient_of(cls, f: Potential) -> "MonotoneMap":
        """``T = grad f`` for a convex potential ``f``."""
        return cls("gradient_of", f.space, f.grad, f.hessian, f)

    @classmethod
    def linear(cls, space: Space, M, offset=None) -> "MonotoneMap":
        """
        ``T(x) = M x + offset`` on flattened coordinates; the symmetric part
        of ``M`` must be positive semidefinite.
        """
        M = np.atleast_2d(np.asarray(M, float))
        d = space.real_dim
        if M.shape != (d, d):
            raise ValidationError(f"linear map must be {d} x {d}")
        sym = 0.5 * (M + M.T)
        if np.linalg.eigvalsh(sym)[0] < -1e-10 * max(1.0, np.abs(sym).max()):
            raise ValidationError("linear map is not monotone (symmetric part not PSD)")
        c = np.zeros(d) if offset is None else space.flatten(np.asarray(offset))

        def fun(x):
            return space.unflatten(M @ space.flatten(x) + c)

        return cls("linear", space, fun, lambda x: M, (M, c))

    @classmethod
    def indicator(cls, K: ConvexSet, space: Space) -> "MonotoneMap":
        """The normal-cone map ``d iota_K``."""
        return cls("subdifferential_of_indicator", space, None, None, K)

    def __call__(self, x):
        if self._fun is None:
            raise ValidationError("the normal-cone map is set-valued")
        return self._fun(x)

    def jacobian(self, x) -> np.ndarray:
        """Jacobian in flattened coordinates."""
        if self._jac is None:
            raise ValidationError("the normal-cone map has no Jacobian")
        return np.asarray(self._jac(x), float)

    def check_monotone(self, rng, samples: int = 200, sampler=None) -> float:
        """Worst normalized ``-<x - y, T x - T y>`` over sampled pairs (<= 0 if monotone)."""
        sp = self.space
        draw = sampler if sampler is not None else (lambda r: sp.random(r))
        worst = -np.inf
        for _ in range(samples):
            x, y = draw(rng), draw(rng)
            v = sp.pairing(x - y, self(x) - self(y))
            scale = 1.0 + sp.norm_of(x - y) * sp.dual_norm_of(self(x) - self(y))
            worst = max(worst, -v / scale)
        return float(worst)


@dataclass
class OperatorResult:
    """Output point of a prox/resolvent with its defining-equation residual."""

    point: np.ndarray
    residual: float
    iterations: int
    converged: bool
    method: str = ""


def is_hilbert(psi: Potential) -> bool:
    """True for half the squared Euclidean norm (identity gauge on ``p = 2``)."""
    return (isinstance(psi, GaugePotential) and isinstance(psi.gauge, PowerGauge)
            and psi.gauge.alpha == 1.0 and psi.gauge.beta == 0.5
            and psi.space.norm.family in ("p_norm", "schatten_p") and psi.space.norm.p == 2.0)


# ---------------------------------------------------------------------------
# resolvents


def _dual_solve(psi: Potential, T: MonotoneMap, lam: float, xi, tol: float, max_iter: int):
    """Damped Newton for ``R(eta) = eta + lam T(grad Psi^*(eta)) - xi = 0``."""
    sp = psi.space
    xi_f = sp.flatten(xi)

    def R(eta_f):
        eta = sp.unflatten(eta_f)
        if not psi.conj_in_interior(eta):
            return None
        return eta_f + lam * sp.flatten(T(psi.conj_grad(eta))) - xi_f

    eta = xi_f.copy()
    r = R(eta)
    scale = 1.0 + np.linalg.norm(xi_f)
    for it in range(max_iter):
        nr = np.linalg.norm(r)
        if nr <= tol * scale:
            return sp.unflatten(eta), nr / scale, it, True
        e = sp.unflatten(eta)
        J = np.eye(eta.size) + lam * T.jacobian(psi.conj_grad(e)) @ psi.conj_hessian(e)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            step = r
        if not np.all(np.isfinite(step)):
            step = r
        t = 1.0
        while t > 1e-12:
            trial = eta - t * step
            rt = R(trial)
            if rt is not None and np.linalg.norm(rt) <= (1.0 - 1e-4 * t) * nr:
                break
            t *= 0.5
        else:
            # no decrease along Newton: fall back to a short fixed-point step
            trial = eta - 1e-3 * r
            rt = R(trial)
            if rt is None:
                return sp.unflatten(eta), nr / scale, it, False
        eta, r = trial, rt
    nr = np.linalg.norm(r)
    return sp.unflatten(eta), nr / scale, max_iter, nr <= tol * scale


def left_resolvent(psi: Potential, T: MonotoneMap, lam: float, x, tol: float = 1e-12,
                   max_iter: int = 200) -> OperatorResult:
    """
    ``lres^Psi_{lam T}(x) = (grad Psi + lam T)^(-1)(grad Psi(x))``.

    For the normal-cone map of ``K`` this is the left projection onto ``K``.
    """
    lam = _check_lam(lam)
    sp = psi.space
    x = sp.validate(x)
    if not psi.in_interior(x):
        raise PreconditionError("x must lie in the interior of the domain")
    if T.kind == "subdifferential_of_indicator":
        res = left_project(psi, T.payload, x)
        return OperatorResult(res.point, res.variational_residual, res.iterations,
                              res.converged, "left-projection")
    eta, resid, it, ok = _dual_solve(psi, T, lam, psi.grad(x), tol, max_iter)
    return OperatorResult(psi.conj_grad(eta), resid, it, ok, "dual-newton")


def right_resolvent(psi: Potential, T: MonotoneMap, lam: float, xi, tol: float = 1e-12,
                    max_iter: int = 200) -> OperatorResult:
    """
    ``rres^Psi_{lam T}(xi) = (id + lam T o grad Psi^*)^(-1)(xi)`` for a dual
    point ``xi``; equals ``grad Psi o lres o grad Psi^*``.
    """
    lam = _check_lam(lam)
    sp = psi.space
    xi = sp.validate(xi)
    if not psi.conj_in_interior(xi):
        raise PreconditionError("xi must lie in the interior of the conjugate domain")
    if T.kind == "subdifferential_of_indicator":
        res = left_project(psi, T.payload, psi.conj_grad(xi))
        return OperatorResult(psi.grad(res.point), res.variational_residual, res.iterations,
                              res.converged, "left-projection")
    eta, resid, it, ok = _dual_solve(psi, T, lam, xi, tol, max_iter)
    return OperatorResult(eta, resid, it, ok, "dual-newton")


def _check_lam(lam):
    lam = float(lam)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValidationError("lambda must be a positive real")
    return lam


# ---------------------------------------------------------------------------
# proximal maps


def left_prox(psi: Potential, f, lam: float, y, tol: float = 1e-12,
              max_iter: int = 200) -> OperatorResult:
    """
    ``argmin_x f(x) + lam D_Psi(x, y)``.

    ``f`` is a convex :class:`Potential` (smooth) or a :class:`ConvexSet`
    standing for its indicator. Stationarity reads
    ``grad Psi(z) + (1/lam) grad f(z) = grad Psi(y)``, so the map is the left
    resolvent of ``(1/lam) grad f``.
    """
    lam = _check_lam(lam)
    if isinstance(f, ConvexSet):
        res = left_project(psi, f, y)
        return OperatorResult(res.point, res.variational_residual, res.iterations,
                              res.converged, "left-projection")
    T = MonotoneMap.gradient_of(f)
    return left_resolvent(psi, T, 1.0 / lam, y, tol, max_iter)


def right_prox(psi: Potential, f, lam: float, y, tol: float = 1e-10,
               max_iter: int = 500) -> OperatorResult:
    """
    ``argmin_x f(x) + lam D_Psi(y, x)``, computed as
    ``grad Psi^* o lprox^{Psi^*}_{lam, f o grad Psi^*} o grad Psi``.

    The inner problem ``min_eta f(grad Psi^*(eta)) + lam D_{Psi^*}(eta, grad Psi(y))``
    is solved by damped Gauss-Newton in ``eta``. A :class:`ConvexSet` ``f``
    in dual coordinates gives the right projection.
    """
    lam = _check_lam(lam)
    sp = psi.space
    y = sp.validate(y)
    if not psi.in_interior(y):
        raise PreconditionError("y must lie in the interior of the domain")
    if isinstance(f, ConvexSet):
        res = right_project(psi, f, y)
        return OperatorResult(res.point, res.variational_residual, res.iterations,
                              res.converged, "right-projection")
    dual = psi.conjugate()
    xi_y = psi.grad(y)

    def G(eta):
        if not psi.conj_in_interior(eta):
            return np.inf
        x = psi.conj_grad(eta)
        fx = f.value(x)
        return fx + lam * bregman_value(dual, eta, xi_y) if np.isfinite(fx) else np.inf

    def gradG(eta):
        x = psi.conj_grad(eta)
        H = psi.conj_hessian(eta)
        return H @ sp.flatten(f.grad(x)) + lam * sp.flatten(x - y), H, x

    eta = xi_y.copy()
    Gv = G(eta)
    scale = 1.0 + np.linalg.norm(sp.flatten(y))

    def residual(eta):
        g, H, x = gradG(eta)
        # stationarity in primal form: grad f(x) + lam Hess Psi(x) (x - y) = 0
        r = np.linalg.norm(np.linalg.solve(H, g)) / (scale + np.linalg.norm(sp.flatten(f.grad(x))))
        return float(r), g, H, x

    it = 0
    for it in range(max_iter):
        resid, g, H, x = residual(eta)
        if resid <= tol:
            return OperatorResult(x, resid, it, True, "dual-gauss-newton")
        B = H @ f.hessian(x) @ H + lam * H
        try:
            step = np.linalg.solve(B + 1e-14 * np.trace(B) / B.shape[0] * np.eye(B.shape[0]), g)
        except np.linalg.LinAlgError:
            step = g
        t = 1.0
        while t > 1e-14:
            trial = eta - t * sp.unflatten(step)
            Gt = G(trial)
            if Gt <= Gv - 1e-4 * t * (g @ step):
                break
            t *= 0.5
        else:
            break
        eta, Gv = trial, Gt
        if t < 1.0 and resid < 1e-6:
            break  # Gauss-Newton drops a curvature term; finish with a root solve
    # polish: hybrid root of the exact dual stationarity map
    def stationarity(v):
        e = sp.unflatten(v)
        if not psi.conj_in_interior(e):
            return np.full(v.size, 1e10)
        return gradG(e)[0]

    sol = root(stationarity, sp.flatten(eta), method="hybr", options={"xtol": 1e-15})
    cand = sp.unflatten(sol.x)
    resid, _, _, x = residual(eta)
    if psi.conj_in_interior(cand):
        r2, _, _, x2 = residual(cand)
        if r2 < resid:
            resid, x = r2, x2
    return OperatorResult(x, resid, it + 1, resid <= tol, "dual-gauss-newton+root")


# ---------------------------------------------------------------------------
# cyclic projections


@dataclass
class IterationTrace:
    """Iterates of a cyclic scheme with divergences to an optional target."""

    points: list
    divergences: list = field(default_factory=list)
    stop_reason: str = ""
    sweeps: int = 0
    converged: bool = False

    @property
    def final(self):
        return self.points[-1]

    def to_csv(self) -> str:
        """Rows ``step, x_0, ..., x_{d-1}, divergence`` (flattened coordinates)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        first = np.asarray(self.points[0])
        flat = _flat_any(first)
        w.writerow(["step"] + [f"x{i}" for i in range(flat.size)] + ["divergence"])
        for k, p in enumerate(self.points):
            d = self.divergences[k] if k < len(self.divergences) else ""
            w.writerow([k] + [f"{v:.12g}" for v in _flat_any(np.asarray(p))]
                       + [f"{d:.12g}" if d != "" else ""])
        return buf.getvalue()


def _flat_any(x):
    if x.ndim == 1:
        return x.astype(float)
    n = x.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.real(np.diag(x)), np.sqrt(2) * np.real(x[iu]),
                           np.sqrt(2) * np.imag(x[iu])])


def cyclic_project(psi: Potential, sets: Sequence[ConvexSet], y, mode: str = "naive_cyclic",
                   sweeps: int = 500, tol: float = 1e-10, target=None) -> IterationTrace:
    """
    Cyclic projections onto ``sets`` starting from ``y``.

    ``naive_cyclic`` applies the left projections in order once per sweep.
    ``dykstra_hilbert`` is Dykstra's correction scheme and needs the
    Hilbert potential; its limit is the metric projection onto the
    intersection. Iteration stops when a sweep moves the point by at most
    ``tol * (1 + |x|)``.

    ``target`` (e.g. a known point of the intersection) adds
    ``D_Psi(target, x_k)`` to the trace.
    """
    if mode not in ("naive_cyclic", "dykstra_hilbert"):
        raise ValidationError("mode must be 'naive_cyclic' or 'dykstra_hilbert'")
    if not sets:
        raise ValidationError("need at least one set")
    sp = psi.space
    x = sp.validate(y)
    pts = [x.copy()]
    divs = []

    def record(p):
        pts.append(p.copy())
        if target is not None:
            divs.append(float(bregman_value(psi, target, p)))

    if target is not None:
        divs.append(float(bregman_value(psi, target, x)))
    if mode == "dykstra_hilbert":
        if not is_hilbert(psi):
            raise PreconditionError("Dykstra's scheme is implemented for the Hilbert potential only")
        incr = [np.zeros_like(sp.flatten(x)) for _ in sets]
        v = sp.flatten(x)
        for s in range(1, sweeps + 1):
            prev = v.copy()
            for i, K in enumerate(sets):
                w = K._project(v + incr[i])
                incr[i] = v + incr[i] - w
                v = w
            record(sp.unflatten(v))
            if np.linalg.norm(v - prev) <= tol * (1.0 + np.linalg.norm(v)):
                return IterationTrace(pts, divs, "converged", s, True)
        return IterationTrace(pts, divs, "sweep budget exhausted", sweeps, False)
    for s in range(1, sweeps + 1):
        prev = sp.flatten(x)
        for K in sets:
            x = left_project(psi, K, x).point
        record(x)
        if np.linalg.norm(sp.flatten(x) - prev) <= tol * (1.0 + np.linalg.norm(prev)):
            return IterationTrace(pts, divs, "converged", s, True)
    return IterationTrace(pts, divs, "sweep budget exhausted", sweeps, False)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class QuasinonexpansiveReport:
    """
    Worst normalized violations (positive = violated) of

    * left:  ``D(y, T x) <= D(y, x)`` for fixed points ``y``;
    * right: ``D(T x, y) <= D(x, y)`` for fixed points ``y``;
    * firm:  ``D(Tx, Ty) + D(Ty, Tx) + D(Tx, x) + D(Ty, y) <= D(Tx, y) + D(Ty, x)``.

    Fixed points are exact (``T(y) = y``); the asymptotic clause of the
    strong variants is not sampled.
    """

    left_violation: float
    right_violation: float
    firm_violation: float
    fixed_point_residual: float
    samples: int
    left_certified: bool
    right_certified: bool
    firm_certified: bool


def certify_quasinonexpansive(psi: Potential, T: Callable, fixed_points: Sequence,
                              points: Sequence, tol: float = 1e-9) -> QuasinonexpansiveReport:
    """
    Sample the quasinonexpansivity inequalities of a point map ``T``.

    Parameters
    ----------
    psi : Potential
    T : callable
        Point map on the interior of the domain.
    fixed_points : sequence
        Points with ``T(y) = y``; checked to 1e-8.
    points : sequence
        Sample points ``x``; consecutive pairs are used for the firm check.
    """
    sp = psi.space
    D = lambda a, b: bregman_value(psi, a, b)  # noqa: E731
    fps = [sp.validate(y) for y in fixed_points]
    fp_res = 0.0
    for y in fps:
        r = np.linalg.norm(sp.flatten(T(y) - y)) / (1.0 + np.linalg.norm(sp.flatten(y)))
        fp_res = max(fp_res, float(r))
    if fp_res > 1e-8:
        raise PreconditionError(f"claimed fixed points move by {fp_res:.3g}")
    imgs = [T(sp.validate(x)) for x in points]
    left = right = firm = -np.inf
    for x, tx in zip(points, imgs):
        for y in fps:
            dyx, dytx = D(y, x), D(y, tx)
            left = max(left, (dytx - dyx) / (1.0 + abs(dyx)))
            dxy, dtxy = D(x, y), D(tx, y)
            right = max(right, (dtxy - dxy) / (1.0 + abs(dxy)))
    for k in range(len(points) - 1):
        x, y = points[k], points[k + 1]
        tx, ty = imgs[k], imgs[k + 1]
        lhs = D(tx, ty) + D(ty, tx) + D(tx, x) + D(ty, y)
        rhs = D(tx, y) + D(ty, x)
        firm = max(firm, (lhs - rhs) / (1.0 + abs(rhs)))
    left, right, firm = (float(v) if np.isfinite(v) else 0.0 for v in (left, right, firm))
    return QuasinonexpansiveReport(left, right, firm, fp_res, len(points),
                                   left <= tol, right <= tol, firm <= tol)
