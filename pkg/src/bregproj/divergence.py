"""
Brègman-type divergences.

``D(x, y) = Psi(x) - Psi(y) - <x - y, grad Psi(y)>`` with ``D = +inf`` when
``y`` leaves the interior of the domain. Also here: the one-sided variant
built from right directional derivatives, the standard identities, the
Psi-angle and the extended divergence ``D(l(phi), l(psi))``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from ._base import Potential
from .errors import PreconditionError
from .potentials import LinearCombination, Quadratic

__all__ = [
    "DivergenceValue",
    "IdentityReport",
    "bregman",
    "bregman_value",
    "fenchel_form",
    "one_sided_bregman",
    "identity_suite",
    "psi_angle",
    "extended_bregman",
    "DEFAULT_STEPS",
]

DEFAULT_STEPS = tuple(10.0 ** -k for k in range(2, 8))


class DivergenceValue(NamedTuple):
    """Raw divergence value plus the domain flags it was computed under."""

    value: float
    left_in_domain: bool
    right_in_interior: bool

    def __float__(self):
        return float(self.value)


class IdentityReport(NamedTuple):
    """Relative residuals of the five divergence identities."""

    affine_scaling: float
    symmetric_sum: float
    cosine: float
    quadruple: float
    dual_swap: float

    @property
    def max_residual(self) -> float:
        return float(max(self))


def bregman_value(psi: Potential, x, y) -> float:
    """Fast float version of :func:`bregman` without input validation."""
    if not psi.in_interior(y):
        return np.inf
    vx = psi.value(x)
    if not np.isfinite(vx):
        return np.inf
    g = psi.grad(y)
    return vx - psi.value(y) - psi.space.pairing(np.asarray(x) - np.asarray(y), g)


def bregman(psi: Potential, x, y) -> DivergenceValue:
    """
    ``D_Psi(x, y)``.

    Parameters
    ----------
    psi : Potential
    x, y : array_like
        Points of ``psi.space``.

    Returns
    -------
    DivergenceValue
        The raw value (never clipped at 0) and domain flags.
    """
    x = psi.space.validate(x)
    y = psi.space.validate(y)
    right = psi.in_interior(y)
    left = bool(np.isfinite(psi.value(x)))
    if not (right and left):
        return DivergenceValue(np.inf, left, right)
    return DivergenceValue(float(bregman_value(psi, x, y)), left, right)


def fenchel_form(psi: Potential, x, y) -> float:
    """``Psi(x) + Psi^*(grad Psi(y)) - <x, grad Psi(y)>``."""
    if not psi.in_interior(y):
        return np.inf
    g = psi.grad(y)
    return psi.value(x) + psi.conj(g) - psi.space.pairing(x, g)


def one_sided_bregman(psi: Potential, x, y, steps: Sequence[float] = DEFAULT_STEPS) -> float:
    """
    ``Psi(x) - Psi(y) - D^+Psi(y; x - y)`` with a numerical right
    directional derivative.

    Difference quotients ``q(t) = (Psi(y + t h) - Psi(y)) / t`` along the
    decreasing ``steps`` are combined by Richardson extrapolation
    (``(10 q(t/10) - q(t)) / 9`` for a ratio-10 ladder). When successive
    quotients keep moving down by comparable amounts, the derivative is
    taken to be ``-inf`` and the result is ``+inf``.

    Returns ``+inf`` when ``y`` is outside the effective domain.
    """
    x = psi.space.validate(x)
    y = psi.space.validate(y)
    vy = psi.value(y)
    vx = psi.value(x)
    if not np.isfinite(vy) or not np.isfinite(vx):
        return np.inf
    h = x - y
    steps = np.asarray(steps, float)
    if np.all(h == 0):
        return 0.0
    q = np.array([(psi.value(y + t * h) - vy) / t for t in steps])
    if not np.all(np.isfinite(q)):
        return np.inf
    dq = np.diff(q)
    ratios = dq[1:] / np.where(dq[:-1] == 0, np.nan, dq[:-1])
    scale = 1.0 + abs(vx) + abs(vy)
    if (len(dq) >= 3 and np.all(dq < 0) and np.all(ratios[-2:] > 0.5)
            and abs(dq[-1]) > 1e-6 * scale):
        return np.inf
    rho = steps[:-1] / steps[1:]
    rich = (rho * q[1:] - q[:-1]) / (rho - 1.0)
    if len(rich) >= 2:
        k = int(np.argmin(np.abs(np.diff(rich)))) + 1
        deriv = rich[k]
    else:
        deriv = rich[-1]
    return float(vx - vy - deriv)


def _rel(res, *terms):
    return abs(res) / (1.0 + sum(abs(t) for t in terms))


def identity_suite(psi: Potential, x, y, z, w, lam1: float = 1.0, lam2: float = 1.0,
                   shift=None, const: float = 0.0, other: Potential | None = None) -> IdentityReport:
    """
    Evaluate the five standard identities at interior points.

    The affine-scaling check uses ``lam1 Psi + lam2 other + <shift, .> + const``
    where ``other`` defaults to the Euclidean half squared norm.

    Raises
    ------
    PreconditionError
        If a point is off the interior of ``psi``'s domain.
    """
    sp = psi.space
    pts = [sp.validate(p) for p in (x, y, z, w)]
    if not all(psi.in_interior(p) for p in pts):
        raise PreconditionError("identity checks need interior points")
    x, y, z, w = pts
    if other is None:
        other = Quadratic(sp)
    if shift is None:
        shift = sp.zeros()
    pair = sp.pairing
    gx, gy = psi.grad(x), psi.grad(y)
    vals = {"x": psi.value(x), "y": psi.value(y), "z": psi.value(z), "w": psi.value(w)}
    pts = {"x": x, "y": y, "z": z, "w": w}
    grads = {"x": gx, "y": gy}

    def D(a, b):
        return vals[a] - vals[b] - pair(pts[a] - pts[b], grads[b])

    combo = LinearCombination([(lam1, psi), (lam2, other)], shift=shift, const=const)
    d_combo = bregman_value(combo, x, y)
    d1, d2 = D("x", "y"), bregman_value(other, x, y)
    affine = _rel(d_combo - lam1 * d1 - lam2 * d2, d_combo, lam1 * d1, lam2 * d2)

    dxy, dyx = d1, D("y", "x")
    inner = pair(x - y, gx - gy)
    sym = _rel(dxy + dyx - inner, dxy, dyx, inner)

    dzx, dzy = D("z", "x"), D("z", "y")
    c_inner = pair(z - y, gx - gy)
    cos = _rel(dzx - (dzy + dyx - c_inner), dzx, dzy, dyx, c_inner)

    dwy, dwx = D("w", "y"), D("w", "x")
    q_inner = pair(z - w, gx - gy)
    quad = _rel(dzx + dwy - (dzy + dwx - q_inner), dzx, dwy, dzy, dwx, q_inner)

    dual = psi.conjugate()
    dswap = bregman_value(dual, gy, gx)
    swap = _rel(dxy - dswap, dxy, dswap)
    return IdentityReport(affine, sym, cos, quad, swap)


def psi_angle(psi: Potential, x, y, z, return_ratio: bool = False):
    """
    ``arccos(<x - y, grad Psi(z) - grad Psi(y)> / (2 |x - y| |z - y|))``.

    The ratio is clamped to ``[-1, 1]`` before the arccos; the factor 2 in
    the denominator is part of the definition, so for the half squared
    Hilbert norm parallel vectors give ``arccos(1/2)``.
    """
    sp = psi.space
    x, y, z = (sp.validate(p) for p in (x, y, z))
    a, b = sp.norm_of(x - y), sp.norm_of(z - y)
    if a == 0 or b == 0:
        raise PreconditionError("Psi-angle needs x != y and z != y")
    if not (psi.in_interior(y) and psi.in_interior(z)):
        raise PreconditionError("y and z must be interior")
    ratio = sp.pairing(x - y, psi.grad(z) - psi.grad(y)) / (2.0 * a * b)
    ang = float(np.arccos(np.clip(ratio, -1.0, 1.0)))
    return (ang, float(ratio)) if return_ratio else ang


def extended_bregman(embedding, psi: Potential, phi, psi_pt) -> DivergenceValue:
    """``D_{l,Psi}(phi, psi) = D_Psi(l(phi), l(psi))``."""
    embedding.check_domain(phi)
    embedding.check_domain(psi_pt)
    return bregman(psi, embedding.forward(phi), embedding.forward(psi_pt))
