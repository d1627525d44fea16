"""
Nonlinear coordinate maps ``l`` feeding extended divergences
``D_{l,Psi}(phi, psi) = D_Psi(l(phi), l(psi))``.

Mazur maps ``x -> lam u_x |x|^(g2/g1)``, the Lozanovskii factorization
between the positive unit spheres of ``L_1`` and a uniformly convex norm,
the spin-factor base map, and the ``D_gamma`` family of relative entropies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._base import Potential
from .convex_sets import ConvexSet
from .errors import PreconditionError, ValidationError
from .gauges import GaugePotential, PowerGauge
from .projections import ProjectionResult, left_project, right_project
from .spaces import NormSpec, Space, duality_map, polar_decompose, signed_power

__all__ = [
    "Embedding",
    "SpinFactorPoint",
    "mazur",
    "trace_norm",
    "d_gamma",
    "d_gamma_potential",
    "extended_power_divergence",
    "lozanovskii_inverse",
    "lozanovskii_forward",
    "spin_embed",
    "spin_unembed",
    "pullback_project",
    "embedding_from_dict",
    "random_channel",
    "apply_channel",
]


def trace_norm(x) -> float:
    """``|x|_1``: sum of absolute entries (vectors) or eigenvalues (Hermitian)."""
    x = np.asarray(x)
    if x.ndim == 1:
        return float(np.sum(np.abs(x)))
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (x + x.conj().T)))))


def _pair(x, y) -> float:
    x, y = np.asarray(x), np.asarray(y)
    if x.ndim == 1:
        return float(np.dot(x, y))
    return float(np.real(np.sum(x * y.T)))


def _space_like(x, p: float, spec: NormSpec | None = None) -> Space:
    x = np.asarray(x)
    if x.ndim == 2:
        return Space.matrix(x.shape[0], p)
    if spec is None:
        return Space.vector(x.size, p)
    return Space("vector", x.size, spec)


# ---------------------------------------------------------------------------
# Mazur maps


def mazur(g1: float, g2: float, x, scale: float = 1.0):
    """
    ``l_{g1,g2}(x) = scale * u_x |x|^(g2/g1)``.

    Maps ``L_{1/g1}`` to ``L_{1/g2}`` with
    ``|l(x)|_{1/g2}^{1/g2} = scale^{1/g2} |x|_{1/g1}^{1/g1}``.
    """
    g1, g2, scale = float(g1), float(g2), float(scale)
    if not (g1 > 0 and g2 > 0 and scale > 0):
        raise ValidationError("Mazur exponents and scale must be positive")
    if g1 == g2 and scale == 1.0:
        return np.array(x, copy=True)
    return scale * signed_power(x, g2 / g1)


# ---------------------------------------------------------------------------
# D_gamma


def d_gamma(phi, psi, gamma: float) -> float:
    """
    ``D_gamma(phi, psi) = |phi|_1/(1-g) + |psi|_1/g
    - Re tr(u_phi|phi|^g u_psi|psi|^(1-g)) / (g(1-g))``.

    The cross term enters with a minus sign; this is what the composed
    extended divergence gives and what makes ``D_gamma(phi, phi) = 0``.
    """
    g = _check_gamma(gamma)
    cross = _pair(signed_power(phi, g), signed_power(psi, 1.0 - g))
    return (trace_norm(phi) / (1.0 - g) + trace_norm(psi) / g
            - cross / (g * (1.0 - g)))


def _check_gamma(gamma):
    g = float(gamma)
    if not 0 < g < 1:
        raise ValidationError("gamma must lie in (0, 1)")
    return g


def d_gamma_potential(like, gamma: float, alpha: float | None = None,
                      beta: float | None = None) -> GaugePotential:
    """
    ``Psi_{phi_{alpha,beta}}`` on ``L_{1/gamma}`` shaped like ``like``;
    defaults ``beta = gamma``, ``alpha = gamma(1 - gamma)``.
    """
    g = _check_gamma(gamma)
    beta = g if beta is None else float(beta)
    alpha = g * (1.0 - g) if alpha is None else float(alpha)
    return GaugePotential(_space_like(like, 1.0 / g), PowerGauge(alpha, beta))


def extended_power_divergence(phi, psi, gamma: float, alpha: float, beta: float,
                              scale: float = 1.0) -> float:
    """
    Closed form of ``D_{scale l_gamma, Psi_{phi_{alpha,beta}}}(phi, psi)``:

    ``scale^(1/beta)/alpha * (beta |phi|_1^(g/beta) + (1-beta) |psi|_1^(g/beta)
    - |psi|_1^(g(1/beta - 1/g)) Re tr(u_phi|phi|^g u_psi|psi|^(1-g)))``.
    """
    g = _check_gamma(gamma)
    a, b, lam = float(alpha), float(beta), float(scale)
    nphi, npsi = trace_norm(phi), trace_norm(psi)
    cross = _pair(signed_power(phi, g), signed_power(psi, 1.0 - g))
    if npsi == 0.0:
        tail = 0.0
    else:
        tail = npsi ** (g * (1.0 / b - 1.0 / g)) * cross
    return lam ** (1.0 / b) / a * (b * nphi ** (g / b) + (1.0 - b) * npsi ** (g / b) - tail)


# ---------------------------------------------------------------------------
# Lozanovskii factorization


def _on_unit_sphere(value, what, tol):
    if abs(value - 1.0) > tol:
        raise PreconditionError(f"{what} must have unit norm (got {value:.12g})")


def lozanovskii_inverse(space: Space, x, tol: float = 1e-10):
    """
    ``l_X^(-1)(x) = |j(x)| x`` for ``x`` on the unit sphere of ``space``;
    the output lies on the unit sphere of ``L_1``.
    """
    x = space.validate(x)
    _on_unit_sphere(space.norm_of(x), "x", tol)
    jx = duality_map(space, x)
    if space.is_matrix:
        pol = polar_decompose(jx)
        out = pol.modulus @ x
        return 0.5 * (out + out.conj().T)
    return np.abs(jx) * x


def lozanovskii_forward(space: Space, z, tol: float = 1e-9):
    """
    ``l_X(z)`` for ``z`` on the unit sphere of ``L_1``: the unique ``y`` on
    the unit sphere of ``space`` with ``|j(y)| y = z`` and the signs of ``z``.

    Closed forms: ``|z|^(1/p)`` for p-norms and Schatten norms,
    ``(|z|/w)^(1/p)`` for weighted norms and
    ``(|z_i| m_b^((q-p)/p))^(1/q)`` for block norms with block masses ``m_b``.
    """
    z = space.validate(z)
    _on_unit_sphere(trace_norm(z), "z", tol)
    spec = space.norm
    if space.is_matrix:
        return signed_power(z, 1.0 / spec.p)
    s, a = np.sign(z), np.abs(z)
    if spec.family == "p_norm":
        return s * a ** (1.0 / spec.p)
    if spec.family == "weighted_p":
        return s * (a / np.asarray(spec.weights)) ** (1.0 / spec.p)
    p, q = spec.p, spec.q
    out = np.zeros_like(a)
    for sl in space.block_slices():
        m = a[sl].sum()
        if m > 0:
            out[sl] = (a[sl] * m ** ((q - p) / p)) ** (1.0 / q)
    return s * out


def _ball_extend(fun, x, norm_in):
    r = norm_in(x)
    if r == 0.0:
        return np.zeros_like(np.asarray(x), dtype=np.asarray(x).dtype)
    return r * fun(np.asarray(x) / r)


# ---------------------------------------------------------------------------
# spin factors


@dataclass(frozen=True)
class SpinFactorPoint:
    """``v = (x, lam)`` in ``X (+) R`` with the order ``v >= 0 iff lam >= |x|``."""

    x: np.ndarray
    lam: float
    norm: NormSpec = NormSpec("p_norm", 2.0)

    def _space(self):
        return Space("vector", np.asarray(self.x).size, self.norm)

    def is_positive(self, tol: float = 0.0) -> bool:
        return self.lam >= self._space().norm_of(self.x) - tol

    def order_norm(self) -> float:
        """``max(|lam|, |x|)``."""
        return max(abs(self.lam), self._space().norm_of(self.x))

    def in_base(self, tol: float = 1e-12) -> bool:
        return abs(self.lam - 1.0) <= tol and self._space().norm_of(self.x) <= 1.0 + tol


def spin_embed(v: SpinFactorPoint, tol: float = 1e-12) -> np.ndarray:
    """Base map ``(x, 1) -> x`` onto the unit ball of ``X``."""
    if abs(v.lam - 1.0) > tol:
        raise PreconditionError("spin-factor base points have lam = 1")
    if v._space().norm_of(v.x) > 1.0 + tol:
        raise PreconditionError("spin-factor base points have |x| <= 1")
    return np.asarray(v.x, float).copy()


def spin_unembed(x, norm_spec: NormSpec = NormSpec("p_norm", 2.0)) -> SpinFactorPoint:
    return SpinFactorPoint(np.asarray(x, float).copy(), 1.0, norm_spec)


# ---------------------------------------------------------------------------
# embedding objects


class Embedding:
    """
    A coordinate map with forward/inverse rules and a domain check.

    Parameters
    ----------
    kind : {'identity', 'mazur', 'lozanovskii', 'spin_factor'}
    g1, g2, scale : float
        Mazur parameters.
    norm : NormSpec
        Target norm (Lozanovskii) or inner norm (spin factor).
    domain : {'full', 'sphere', 'ball'}
        Lozanovskii maps act on unit spheres; ``'ball'`` uses the radial
        extension ``|x| l(x/|x|)`` with ``l(0) = 0``.
    """

    def __init__(self, kind: str, g1: float = 1.0, g2: float = 1.0, scale: float = 1.0,
                 norm: NormSpec | None = None, domain: str | None = None):
        if kind not in ("identity", "mazur", "lozanovskii", "spin_factor"):
            raise ValidationError(f"unknown embedding kind {kind!r}")
        self.kind = kind
        self.g1, self.g2, self.scale = float(g1), float(g2), float(scale)
        if kind == "mazur" and not (self.g1 > 0 and self.g2 > 0 and self.scale > 0):
            raise ValidationError("Mazur exponents and scale must be positive")
        if kind in ("lozanovskii", "spin_factor") and norm is None:
            norm = NormSpec("p_norm", 2.0)
        self.norm = norm
        default = {"lozanovskii": "sphere", "spin_factor": "ball"}.get(kind, "full")
        self.domain = default if domain is None else domain
        if self.domain not in ("full", "sphere", "ball"):
            raise ValidationError("domain must be 'full', 'sphere' or 'ball'")

    @property
    def holder_exponent(self) -> float | None:
        """Claimed Lipschitz-Hoelder exponent of the forward map on unit balls."""
        if self.kind == "mazur":
            return min(self.g2 / self.g1, 1.0)
        if self.kind in ("identity", "spin_factor"):
            return 1.0
        return None

    def target_space(self, like) -> Space:
        """Space the image lives in (for building the potential)."""
        like = np.asarray(like)
        if self.kind == "mazur":
            return _space_like(like, 1.0 / self.g2)
        if self.kind == "lozanovskii":
            if like.ndim == 2:
                return Space.matrix(like.shape[0], self.norm.p)
            return Space("vector", like.size, self.norm)
        if self.kind == "spin_factor":
            return Space("vector", like.size, self.norm)
        if like.ndim == 2:
            return Space.matrix(like.shape[0])
        return Space.vector(like.size)

    def check_domain(self, x):
        x = x if isinstance(x, SpinFactorPoint) else np.asarray(x)
        if self.kind == "spin_factor":
            if not isinstance(x, SpinFactorPoint) or not x.in_base():
                raise PreconditionError("spin-factor embedding takes base points (x, 1), |x| <= 1")
            return
        if not np.all(np.isfinite(x)):
            raise ValidationError("point contains NaN or Inf")
        if self.kind == "lozanovskii":
            r = trace_norm(x)
            if self.domain == "sphere" and abs(r - 1.0) > 1e-9:
                raise PreconditionError("Lozanovskii map acts on the unit sphere of L_1")
            if self.domain == "ball" and r > 1.0 + 1e-9:
                raise PreconditionError("point outside the unit ball of L_1")

    def forward(self, x):
        if self.kind == "identity":
            return np.array(x, copy=True)
        if self.kind == "mazur":
            return mazur(self.g1, self.g2, x, self.scale)
        if self.kind == "spin_factor":
            return spin_embed(x)
        sp = self.target_space(x)
        if self.domain == "ball":
            return _ball_extend(lambda u: lozanovskii_forward(sp, u), x, trace_norm)
        return lozanovskii_forward(sp, x)

    def inverse(self, y):
        if self.kind == "identity":
            return np.array(y, copy=True)
        if self.kind == "mazur":
            return signed_power(np.asarray(y) / self.scale, self.g1 / self.g2)
        if self.kind == "spin_factor":
            return spin_unembed(y, self.norm)
        sp = self.target_space(y)
        if self.domain == "ball":
            return _ball_extend(lambda u: lozanovskii_inverse(sp, u), y, sp.norm_of)
        return lozanovskii_inverse(sp, y)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "mazur":
            d.update({"g1": self.g1, "g2": self.g2, "lambda": self.scale})
        if self.kind in ("lozanovskii", "spin_factor"):
            d["norm"] = self.norm.to_dict()
            d["domain"] = self.domain
        return d

    def __repr__(self):
        return f"Embedding({self.to_dict()})"


def embedding_from_dict(d: dict) -> Embedding:
    """``{"kind": "mazur", "g1": 1.0, "g2": 0.5, "lambda": 1.0}`` and friends."""
    if not isinstance(d, dict):
        raise ValidationError("embedding spec must be a JSON object")
    kind = d.get("kind", "identity")
    nrm = NormSpec.from_dict(d["norm"]) if "norm" in d else None
    return Embedding(kind, d.get("g1", 1.0), d.get("g2", 1.0), d.get("lambda", 1.0),
                     nrm, d.get("domain"))


# ---------------------------------------------------------------------------
# pull-back projections


def pullback_project(emb: Embedding, psi: Potential, image_set: ConvexSet, y,
                     side: str = "left", **kw) -> ProjectionResult:
    """
    ``l^(-1) o LP_{l(C)} o l`` (or the right analog), with ``l(C)`` given
    directly as ``image_set``. Certificates refer to the image space.
    """
    emb.check_domain(y)
    ly = emb.forward(y)
    if side == "left":
        res = left_project(psi, image_set, ly, **kw)
    elif side == "right":
        res = right_project(psi, image_set, ly, **kw)
    else:
        raise ValidationError("side must be 'left' or 'right'")
    res.point = emb.inverse(res.point)
    return res


# ---------------------------------------------------------------------------
# quantum channels


def random_channel(n: int, rng, kraus: int = 2, m: int | None = None) -> list:
    """
    Kraus operators of a random completely positive trace-preserving map
    from ``n x n`` to ``m x m`` matrices (from a random isometry).
    """
    m = n if m is None else m
    a = rng.standard_normal((kraus * m, n)) + 1j * rng.standard_normal((kraus * m, n))
    q, _ = np.linalg.qr(a)
    return [q[k * m:(k + 1) * m, :] for k in range(kraus)]


def apply_channel(kraus: Sequence[np.ndarray], rho) -> np.ndarray:
    out = sum(K @ rho @ K.conj().T for K in kraus)
    return 0.5 * (out + out.conj().T)
