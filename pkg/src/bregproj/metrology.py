"""
Empirical measurement of the quantities continuity results are phrased in:
gradient accuracy, Hoelder exponents of point maps, moduli of convexity and
smoothness, strength of monotonicity and the modulus of total convexity.

All searches are randomized with an explicit seed and polished with
Nelder-Mead. Infimum-type outputs are upper bounds of the true value and
supremum-type outputs are lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from ._base import Potential
from .divergence import bregman_value
from .errors import PreconditionError, ValidationError
from .spaces import Space

__all__ = [
    "HolderReport",
    "ModulusReport",
    "MonotonicityReport",
    "gradient_check",
    "estimate_holder",
    "fit_power_law",
    "modulus_of_convexity",
    "modulus_of_smoothness",
    "convexity_smoothness_moduli",
    "monotonicity_strength",
    "total_convexity_modulus",
]


def gradient_check(psi: Potential, points: Sequence, steps=(1e-4, 1e-5, 1e-6)) -> float:
    """
    Largest relative error between ``grad Psi`` and central differences.

    For each point the best step of the ladder is used (scaled by
    ``1 + |x|``); the error is ``|g_fd - g| / max(1, |g|)``.
    """
    sp = psi.space
    d = sp.real_dim
    basis = np.stack([sp.unflatten(e) for e in np.eye(d)])
    worst = 0.0
    for x in points:
        x = sp.validate(x)
        v = sp.flatten(x)
        g = sp.flatten(psi.grad(x))
        best = np.inf
        for h in steps:
            hh = h * (1.0 + np.linalg.norm(v, np.inf))
            vals = psi.values(np.concatenate([x + hh * basis, x - hh * basis]))
            fd = (vals[:d] - vals[d:]) / (2 * hh)
            if np.all(np.isfinite(fd)):
                best = min(best, np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))
        worst = max(worst, best)
    return float(worst)


def fit_power_law(xs, ys) -> tuple:
    """Least-squares ``log y = log c + k log x``; returns ``(k, c)``."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = (xs > 0) & (ys > 0) & np.isfinite(xs) & np.isfinite(ys)
    if ok.sum() < 2:
        return np.nan, np.nan
    k, b = np.polyfit(np.log(xs[ok]), np.log(ys[ok]), 1)
    return float(k), float(np.exp(b))


# ---------------------------------------------------------------------------
# Hoelder exponents


@dataclass
class HolderReport:
    """
    Output of :func:`estimate_holder`.

    ``exponent`` and ``constant`` fit the per-bin maximum of the output
    distance against the bin's input distance; ``finest_exponent`` uses the
    finest decade only. ``ratios`` holds, per bin, the largest
    ``|f(x) - f(y)| / |x - y|^t`` at the predicted ``t`` and ``drift`` is
    ``max_k ratios[k] / ratios[0]`` (bin 0 is the coarsest).
    """

    exponent: float
    constant: float
    finest_exponent: float
    predicted: float | None
    bin_distances: np.ndarray
    bin_max_output: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    drift: float
    samples: int
    distance_range: tuple
    seed: int | None = None

    def to_dict(self):
        return {
            "exponent": self.exponent, "constant": self.constant,
            "finest_exponent": self.finest_exponent, "predicted": self.predicted,
            "bin_distances": self.bin_distances.tolist(),
            "bin_max_output": self.bin_max_output.tolist(),
            "ratios": self.ratios.tolist(), "max_ratio": self.max_ratio,
            "drift": self.drift, "samples": self.samples,
            "distance_range": list(self.distance_range), "seed": self.seed,
        }


def estimate_holder(fmap: Callable, pair_sampler: Callable, pairs: int = 2000,
                    predicted_t: float | None = None, dist_in: Callable | None = None,
                    dist_out: Callable | None = None, decades=(1, 6), bins_per_decade: int = 1,
                    seed: int = 0) -> HolderReport:
    """
    Measure how ``|f(x) - f(y)|`` scales with ``|x - y|``.

    Parameters
    ----------
    fmap : callable
        The point map.
    pair_sampler : callable
        ``pair_sampler(rng, r) -> (x, y)`` returning a pair at distance
        about ``r`` inside the domain.
    pairs : int
        Total number of pairs, spread evenly over the distance bins.
    predicted_t : float, optional
        Exponent at which ratios are tabulated.
    dist_in, dist_out : callable, optional
        Distances on the domain and the range (Euclidean by default).
    decades : (int, int)
        Distances run from ``10**-decades[0]`` down to ``10**-decades[1]``.
    """
    rng = np.random.default_rng(seed)
    euclid = lambda a, b: float(np.linalg.norm(np.ravel(np.asarray(a) - np.asarray(b))))  # noqa: E731
    dist_in = euclid if dist_in is None else dist_in
    dist_out = euclid if dist_out is None else dist_out
    nb = (decades[1] - decades[0]) * bins_per_decade + 1
    centers = np.logspace(-decades[0], -decades[1], nb)
    per = max(1, pairs // nb)
    t = 1.0 if predicted_t is None else float(predicted_t)
    dmax = np.zeros(nb)
    dins = np.zeros(nb)
    ratios = np.zeros(nb)
    count = 0
    for k, r in enumerate(centers):
        for _ in range(per):
            x, y = pair_sampler(rng, r)
            di = dist_in(x, y)
            if di == 0:
                continue
            do = dist_out(fmap(x), fmap(y))
            count += 1
            if do > dmax[k]:
                dmax[k] = do
            ratios[k] = max(ratios[k], do / di ** t)
        dins[k] = r
    if count == 0:
        raise PreconditionError("degenerate sampler: no pair at positive distance")
    k_all, c_all = fit_power_law(dins, dmax)
    fine = dins <= dins[-1] * 10.0 ** 1.0001
    k_fine, _ = fit_power_law(dins[fine], dmax[fine])
    base = ratios[0] if ratios[0] > 0 else np.nan
    drift = float(np.nanmax(ratios / base)) if np.isfinite(base) else np.inf
    return HolderReport(k_all, c_all, k_fine, predicted_t, dins, dmax, ratios,
                        float(ratios.max()), drift, count, (float(dins[-1]), float(dins[0])), seed)


# ---------------------------------------------------------------------------
# moduli of convexity and smoothness


@dataclass
class ModulusReport:
    """Measured moduli on an epsilon grid with fitted power laws."""

    eps: np.ndarray
    delta: np.ndarray
    rho: np.ndarray
    delta_exponent: float
    rho_exponent: float
    delta_constant: float
    rho_constant: float
    seed: int
    labels: dict = field(default_factory=lambda: {"delta": "upper bound (inf search)",
                                                  "rho": "lower bound (sup search)"})

    def to_dict(self):
        return {"eps": self.eps.tolist(), "delta": self.delta.tolist(), "rho": self.rho.tolist(),
                "delta_exponent": self.delta_exponent, "rho_exponent": self.rho_exponent,
                "delta_constant": self.delta_constant, "rho_constant": self.rho_constant,
                "seed": self.seed, "labels": self.labels}


def _flat_norm(space: Space):
    """Norm as a function of flattened coordinates (fast paths for p and Schatten)."""
    p = space.norm.p
    if space.is_matrix:
        def nrm(v):
            lam = np.abs(np.linalg.eigvalsh(space.unflatten(v)))
            m = lam.max()
            return 0.0 if m == 0 else m * np.sum((lam / m) ** p) ** (1.0 / p)
        return nrm
    if space.norm.family == "p_norm":
        def nrm(v):
            a = np.abs(v)
            m = a.max()
            return 0.0 if m == 0 else m * np.sum((a / m) ** p) ** (1.0 / p)
        return nrm
    return lambda v: space.norm_of(space.unflatten(v))


def _delta_objective(space: Space, eps: float):
    """``1 - |(x + y)/2|`` for unit ``x`` and unit ``y`` at distance ``eps`` from ``x``."""
    d = space.real_dim
    nrm = _flat_norm(space)

    def obj(params):
        a, direc = params[:d], params[d:]
        na = nrm(a)
        if na == 0 or nrm(direc) == 0:
            return 2.0
        x = a / na

        def gap(s):
            w = x + s * direc
            return nrm(x - w / nrm(w)) - eps

        # distance grows from 0; find the first s reaching eps
        hi = eps
        for _ in range(60):
            if gap(hi) >= 0:
                break
            hi *= 2.0
        else:
            return 2.0
        try:
            s = brentq(gap, 0.0, hi, xtol=1e-15, rtol=1e-13)
        except ValueError:
            return 2.0
        y = x + s * direc
        y = y / nrm(y)
        return 1.0 - nrm(0.5 * (x + y))

    return obj


def _rho_objective(space: Space, tau: float):
    d = space.real_dim
    nrm = _flat_norm(space)

    def obj(params):
        a, b = params[:d], params[d:]
        na, nb = nrm(a), nrm(b)
        if na == 0 or nb == 0:
            return 0.0
        x, y = a / na, b / nb
        return -(0.5 * (nrm(x + tau * y) + nrm(x - tau * y)) - 1.0)

    return obj


def _search(obj, dim, rng, starts, polish, maxiter):
    vals = []
    cands = []
    for _ in range(starts):
        p = rng.standard_normal(dim)
        cands.append(p)
        vals.append(obj(p))
    order = np.argsort(vals)
    best = float(vals[order[0]])
    for k in order[:polish]:
        res = minimize(obj, cands[k], method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-9, "fatol": 1e-15})
        best = min(best, float(res.fun))
    return best


def modulus_of_convexity(space: Space, eps: float, rng, starts: int = 300, polish: int = 4,
                         maxiter: int = 2000, seeds: Sequence | None = None) -> float:
    """
    ``delta(eps) = inf {1 - |(x+y)/2| : |x| = |y| = 1, |x - y| = eps}``
    (an upper bound from the search). ``seeds`` adds extra starting points.
    """
    if not 0 < eps <= 2:
        raise ValidationError("eps must lie in (0, 2]")
    obj = _delta_objective(space, eps)
    best = _search(obj, 2 * space.real_dim, rng, starts, polish, maxiter)
    for s in seeds or ():
        res = minimize(obj, np.asarray(s, float), method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-9, "fatol": 1e-15})
        best = min(best, float(res.fun))
    return max(best, 0.0)


def modulus_of_smoothness(space: Space, tau: float, rng, starts: int = 300, polish: int = 4,
                          maxiter: int = 2000, seeds: Sequence | None = None) -> float:
    """
    ``rho(tau) = sup {(|x + tau y| + |x - tau y|)/2 - 1 : |x| = |y| = 1}``
    (a lower bound from the search).
    """
    if tau <= 0:
        raise ValidationError("tau must be positive")
    obj = _rho_objective(space, tau)
    best = _search(obj, 2 * space.real_dim, rng, starts, polish, maxiter)
    for s in seeds or ():
        res = minimize(obj, np.asarray(s, float), method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-9, "fatol": 1e-15})
        best = min(best, float(res.fun))
    return max(-best, 0.0)


def _axis_seeds(space: Space, kind: str):
    """Coordinate-aligned starting points that reach the extremal regimes."""
    d = space.real_dim
    e0, e1 = np.zeros(d), np.zeros(d)
    e0[0], e1[1] = 1.0, 1.0
    diag = np.zeros(d)
    diag[: min(d, space.n)] = 1.0
    if kind == "delta":
        return [np.concatenate([e0 + 1e-3 * e1, e1]), np.concatenate([diag, e0])]
    return [np.concatenate([e0, e1]), np.concatenate([diag, e0])]


def convexity_smoothness_moduli(space: Space, eps_grid=None, starts: int = 40, polish: int = 1,
                                maxiter: int = 600, seed: int = 0) -> ModulusReport:
    """
    Measure ``delta`` and ``rho`` on ``eps_grid`` and fit power laws.

    Expected behavior for p-norms and Schatten norms:
    ``delta ~ eps^max(2, p)`` and ``rho ~ eps^min(2, p)``.
    """
    if space.norm.family not in ("p_norm", "schatten_p"):
        raise ValidationError("moduli are measured for p-norm and Schatten spaces")
    eps_grid = np.geomspace(0.05, 0.4, 5) if eps_grid is None else np.asarray(eps_grid, float)
    rng = np.random.default_rng(seed)
    sd, sr = _axis_seeds(space, "delta"), _axis_seeds(space, "rho")
    delta = np.array([modulus_of_convexity(space, e, rng, starts, polish, maxiter, sd)
                      for e in eps_grid])
    rho = np.array([modulus_of_smoothness(space, e, rng, starts, polish, maxiter, sr)
                    for e in eps_grid])
    kd, cd = fit_power_law(eps_grid, delta)
    kr, cr = fit_power_law(eps_grid, rho)
    return ModulusReport(eps_grid, delta, rho, kd, kr, cd, cr, seed)


# ---------------------------------------------------------------------------
# monotonicity and total convexity


@dataclass
class MonotonicityReport:
    """Fitted constant ``c`` and worst held-out slack of ``<x-y, jx-jy> >= c|x-y|^r``."""

    constant: float
    min_ratio: float
    worst_slack: float
    samples: int
    seed: int


def monotonicity_strength(gp: Potential, r: float, samples: int = 2000, radius: float | None = None,
                          seed: int = 0) -> MonotonicityReport:
    """
    Fit ``c`` in ``<x - y, grad(x) - grad(y)> >= c |x - y|^r`` on half of the
    sampled pairs (``c`` is half their smallest ratio) and report the worst
    slack on the other half. ``radius`` restricts samples to a ball.
    """
    sp = gp.space
    rng = np.random.default_rng(seed)

    def draw():
        x = sp.random(rng)
        if radius is not None:
            nx = sp.norm_of(x)
            x = x / nx * radius * rng.uniform() ** (1.0 / sp.real_dim)
        return x

    def ratio_and_terms():
        x, y = draw(), draw()
        lhs = sp.pairing(x - y, gp.grad(x) - gp.grad(y))
        dn = sp.norm_of(x - y) ** r
        return lhs, dn

    half = samples // 2
    fit = [ratio_and_terms() for _ in range(half)]
    ratios = [a / b for a, b in fit if b > 0]
    c = 0.5 * min(ratios)
    hold = [ratio_and_terms() for _ in range(samples - half)]
    slack = min(a - c * b for a, b in hold)
    min_ratio = min(ratios + [a / b for a, b in hold if b > 0])
    return MonotonicityReport(float(c), float(min_ratio), float(slack), samples, seed)


def total_convexity_modulus(psi: Potential, x, t_grid, starts: int = 200, polish: int = 3,
                            maxiter: int = 1000, seed: int = 0) -> np.ndarray:
    """
    ``nu(x, t) = inf {D(y, x) : |y - x| = t}`` (space norm) for each ``t``;
    values are upper bounds from the search. Points ``y`` outside the domain
    count as ``+inf``.
    """
    sp = psi.space
    x = sp.validate(x)
    if not psi.in_interior(x):
        raise PreconditionError("x must be interior")
    rng = np.random.default_rng(seed)
    out = []
    for t in np.atleast_1d(t_grid):
        def obj(v, t=t):
            u = sp.unflatten(v)
            nu = sp.norm_of(u)
            if nu == 0:
                return np.inf
            val = bregman_value(psi, x + t * u / nu, x)
            return val if np.isfinite(val) else 1e300
        out.append(_search(obj, sp.real_dim, rng, starts, polish, maxiter))
    return np.asarray(out, float)
