"""
Catalog of Euler-Legendre potentials.

Separable potentials act coordinatewise on vectors and through the
eigenvalues on Hermitian matrices (spectral lift). Gauge potentials, the
squared p-norm and quadratic forms complete the catalog. Every member has
a closed-form conjugate.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, xlogy

from ._base import ConjugatePotential, Potential, PotentialEval
from .errors import ValidationError
from .gauges import GaugePotential, PowerGauge, gauge_from_dict
from .spaces import NormSpec, Space, eigen_sorted, hermitian_from_eigen, random_unitary

__all__ = [
    "Potential",
    "PotentialEval",
    "ConjugatePotential",
    "GaugePotential",
    "SeparablePotential",
    "PowerSum",
    "KL",
    "Burg",
    "FermiDirac",
    "AlphaFamily",
    "SquaredPNorm",
    "Quadratic",
    "LinearCombination",
    "spectral_lift",
    "hilbert",
    "potential_from_dict",
    "CATALOG_KINDS",
]

CATALOG_KINDS = ("gauge", "power_sum", "kl", "burg", "fermi_dirac",
                 "alpha_family", "squared_pnorm", "quadratic", "spectral_lift")


class SeparablePotential(Potential):
    """
    ``Psi(x) = sum_i f(x_i)``, or ``sum_i f(lambda_i(x))`` on matrices.

    Subclasses provide the scalar pieces ``f, df, d2f`` and the conjugate
    pieces ``fc, dfc, d2fc`` together with domain tests. The scalar
    functions are vectorized and never see values outside their domain.
    """

    kind = "separable"
    # closed domain of f is [lo, hi] with the given inclusion flags
    lo, hi = -np.inf, np.inf
    lo_closed, hi_closed = False, False
    # open interior of the conjugate domain (clo, chi)
    clo, chi = -np.inf, np.inf

    def __init__(self, space: Space):
        super().__init__(space)
        self.spectral = space.is_matrix

    # scalar pieces --------------------------------------------------------

    def f(self, t):
        raise NotImplementedError

    def df(self, t):
        raise NotImplementedError

    def d2f(self, t):
        raise NotImplementedError

    def fc(self, s):
        raise NotImplementedError

    def dfc(self, s):
        raise NotImplementedError

    def d2fc(self, s):
        raise NotImplementedError

    def fc_outside(self, s):
        """Conjugate value outside the open conjugate interior."""
        return np.inf

    # domain tests on coordinates / eigenvalues ------------------------------

    def _in_dom(self, t):
        t = np.asarray(t)
        ok_lo = t >= self.lo if self.lo_closed else t > self.lo
        ok_hi = t <= self.hi if self.hi_closed else t < self.hi
        return ok_lo & ok_hi

    def _in_int(self, t):
        t = np.asarray(t)
        return (t > self.lo) & (t < self.hi)

    def _in_cint(self, s):
        s = np.asarray(s)
        return (s > self.clo) & (s < self.chi)

    def _coords(self, x):
        if self.spectral:
            return np.linalg.eigvalsh(np.asarray(x))
        return np.asarray(x, float)

    # potential interface --------------------------------------------------

    def value(self, x):
        t = self._coords(x)
        if not np.all(self._in_dom(t)):
            return np.inf
        return float(np.sum(self.f(t)))

    def values(self, X):
        X = np.asarray(X)
        t = np.linalg.eigvalsh(X) if self.spectral else X.astype(float)
        inside = self._in_dom(t)
        with np.errstate(all="ignore"):
            v = np.sum(np.where(inside, self.f(np.where(inside, t, self._fill())), 0.0), axis=-1)
        return np.where(np.all(inside, axis=-1), v, np.inf)

    def _fill(self):
        """A point of the interior of the scalar domain."""
        lo = self.lo if np.isfinite(self.lo) else (self.hi - 1.0 if np.isfinite(self.hi) else 0.0)
        hi = self.hi if np.isfinite(self.hi) else lo + 2.0
        return 0.5 * (lo + hi)

    def in_interior(self, x):
        return bool(np.all(self._in_int(self._coords(x))))

    def grad(self, x):
        if self.spectral:
            lam, v = eigen_sorted(x)
            return hermitian_from_eigen(self.df(lam), v)
        return self.df(np.asarray(x, float))

    def conj(self, y):
        s = self._coords(y)
        inside = self._in_cint(s)
        out = np.empty_like(s, dtype=float)
        out[inside] = self.fc(s[inside])
        if not np.all(inside):
            out[~inside] = self.fc_outside(s[~inside])
        return float(np.sum(out))

    def conj_in_interior(self, y):
        return bool(np.all(self._in_cint(self._coords(y))))

    def conj_grad(self, y):
        if self.spectral:
            lam, v = eigen_sorted(y)
            return hermitian_from_eigen(self.dfc(lam), v)
        return self.dfc(np.asarray(y, float))

    def hessian(self, x):
        if self.spectral:
            return super().hessian(x)
        return np.diag(self.d2f(np.asarray(x, float)))

    def conj_hessian(self, y):
        if self.spectral:
            return super().conj_hessian(y)
        return np.diag(self.d2fc(np.asarray(y, float)))

    # sampling -------------------------------------------------------------

    sample_low, sample_high = -2.0, 2.0

    def sample_interior(self, rng):
        if self.spectral:
            lam = rng.uniform(self.sample_low, self.sample_high, self.space.n)
            return hermitian_from_eigen(lam, random_unitary(self.space.n, rng))
        return rng.uniform(self.sample_low, self.sample_high, self.space.n)

    def with_space(self, space):
        """Same scalar function on another space."""
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        Potential.__init__(new, space)
        new.spectral = space.is_matrix
        return new


class PowerSum(SeparablePotential):
    """
    ``c sum gamma |x_i|^(1/gamma)`` for ``0 < gamma < 1`` and ``c > 0``;
    conjugate ``c sum (1 - gamma) |y_i / c|^(1/(1 - gamma))``.
    ``gamma = 1/2, c = 1`` is half the squared Euclidean norm.
    """

    kind = "power_sum"

    def __init__(self, space: Space, gamma: float = 0.5, scale: float = 1.0):
        super().__init__(space)
        gamma, scale = float(gamma), float(scale)
        if not 0 < gamma < 1:
            raise ValidationError("power_sum needs 0 < gamma < 1")
        if not (scale > 0 and np.isfinite(scale)):
            raise ValidationError("power_sum scale must be positive")
        self.gamma = gamma
        self.c = scale
        self.r = 1.0 / gamma
        self.rc = 1.0 / (1.0 - gamma)

    def to_dict(self):
        d = {"kind": "power_sum", "gamma": self.gamma}
        if self.c != 1.0:
            d["scale"] = self.c
        return d

    def f(self, t):
        return self.c * self.gamma * np.abs(t) ** self.r

    def df(self, t):
        return self.c * np.sign(t) * np.abs(t) ** (self.r - 1.0)

    def d2f(self, t):
        with np.errstate(divide="ignore"):
            return self.c * (self.r - 1.0) * np.abs(t) ** (self.r - 2.0)

    def fc(self, s):
        return self.c * (1.0 - self.gamma) * np.abs(s / self.c) ** self.rc

    def dfc(self, s):
        return np.sign(s) * np.abs(s / self.c) ** (self.rc - 1.0)

    def d2fc(self, s):
        with np.errstate(divide="ignore"):
            return (self.rc - 1.0) * np.abs(s / self.c) ** (self.rc - 2.0) / self.c


class KL(SeparablePotential):
    """``sum x_i log x_i - x_i`` on ``x >= 0`` (``0 log 0 = 0``); conjugate ``sum exp(y_i)``."""

    kind = "kl"
    lo, lo_closed = 0.0, True
    sample_low, sample_high = 0.2, 3.0

    def to_dict(self):
        return {"kind": "kl"}

    def f(self, t):
        return xlogy(t, t) - t

    def df(self, t):
        return np.log(t)

    def d2f(self, t):
        return 1.0 / t

    def fc(self, s):
        return np.exp(s)

    dfc = fc
    d2fc = fc


class Burg(SeparablePotential):
    """``-sum log x_i`` on ``x > 0``; conjugate ``-sum log(-y_i) - n`` on ``y < 0``."""

    kind = "burg"
    lo = 0.0
    chi = 0.0
    sample_low, sample_high = 0.2, 3.0

    def to_dict(self):
        return {"kind": "burg"}

    def f(self, t):
        return -np.log(t)

    def df(self, t):
        return -1.0 / t

    def d2f(self, t):
        return 1.0 / t ** 2

    def fc(self, s):
        return -np.log(-s) - 1.0

    def dfc(self, s):
        return -1.0 / s

    def d2fc(self, s):
        return 1.0 / s ** 2


class FermiDirac(SeparablePotential):
    """``sum x log x + (1 - x) log(1 - x)`` on ``[0, 1]``; conjugate ``sum log(1 + e^y)``."""

    kind = "fermi_dirac"
    lo, lo_closed = 0.0, True
    hi, hi_closed = 1.0, True
    sample_low, sample_high = 0.05, 0.95

    def to_dict(self):
        return {"kind": "fermi_dirac"}

    def f(self, t):
        return xlogy(t, t) + xlogy(1.0 - t, 1.0 - t)

    def df(self, t):
        return np.log(t) - np.log1p(-t)

    def d2f(self, t):
        return 1.0 / t + 1.0 / (1.0 - t)

    def fc(self, s):
        return np.logaddexp(0.0, s)

    def dfc(self, s):
        return expit(s)

    def d2fc(self, s):
        e = expit(s)
        return e * (1.0 - e)


class AlphaFamily(SeparablePotential):
    """
    ``c sum (x_i^alpha - 1)`` with ``c = 1/(alpha - 1)`` on ``x >= 0`` for
    ``0 < alpha < 1`` and ``c = 1/(1 - alpha)`` on ``x > 0`` for ``alpha < 0``.

    The conjugate lives on ``y < 0``: with ``x(y) = (y / (c alpha))^(1/(alpha-1))``
    it equals ``sum x y - c (x^alpha - 1)``. At ``y = 0`` it is ``+inf`` for
    ``0 < alpha < 1`` and ``c`` per coordinate for ``alpha < 0``.
    """

    kind = "alpha_family"
    lo = 0.0
    chi = 0.0
    sample_low, sample_high = 0.2, 3.0

    def __init__(self, space: Space, alpha: float = 0.5):
        super().__init__(space)
        alpha = float(alpha)
        if alpha >= 1 or alpha == 0 or not np.isfinite(alpha):
            raise ValidationError("alpha_family needs alpha in (0, 1) or alpha < 0")
        self.alpha = alpha
        self.c = 1.0 / (alpha - 1.0) if alpha > 0 else 1.0 / (1.0 - alpha)
        self.lo_closed = alpha > 0

    def to_dict(self):
        return {"kind": "alpha", "alpha": self.alpha}

    def f(self, t):
        return self.c * (t ** self.alpha - 1.0)

    def df(self, t):
        return self.c * self.alpha * t ** (self.alpha - 1.0)

    def d2f(self, t):
        a = self.alpha
        return self.c * a * (a - 1.0) * t ** (a - 2.0)

    def _x_of(self, s):
        return (s / (self.c * self.alpha)) ** (1.0 / (self.alpha - 1.0))

    def fc(self, s):
        x = self._x_of(s)
        return x * s - self.c * (x ** self.alpha - 1.0)

    def fc_outside(self, s):
        s = np.asarray(s)
        if self.alpha < 0:
            return np.where(s == 0, self.c, np.inf)
        return np.full(s.shape, np.inf)

    def dfc(self, s):
        return self._x_of(s)

    def d2fc(self, s):
        a = self.alpha
        return self._x_of(s) / ((a - 1.0) * s)


class SquaredPNorm(Potential):
    """
    ``1/2 |x|_{1/gamma}^2`` for ``1/2 <= gamma < 1`` (p-norm or Schatten).

    The gradient is the normalized duality map; at points with a zero
    coordinate it is defined by its limit.
    """

    kind = "squared_pnorm"

    def __init__(self, space: Space, gamma: float = 0.75):
        gamma = float(gamma)
        if not 0.5 <= gamma < 1:
            raise ValidationError("squared_pnorm needs 1/2 <= gamma < 1")
        fam = "schatten_p" if space.is_matrix else "p_norm"
        super().__init__(Space(space.kind, space.n, NormSpec(fam, 1.0 / gamma)))
        self.gamma = gamma

    def to_dict(self):
        return {"kind": "squared_pnorm", "gamma": self.gamma}

    def value(self, x):
        return 0.5 * self.space.norm_of(x) ** 2

    def grad(self, x):
        return self.space.j(x)

    def conj(self, y):
        return 0.5 * self.space.dual_norm_of(y) ** 2

    def conj_grad(self, y):
        return self.space.j_dual(y)


class Quadratic(Potential):
    """
    ``1/2 <T x, x>`` with ``T`` whose symmetric part is positive definite.

    On matrix spaces ``T`` acts on the flattened real coordinates.
    """

    kind = "quadratic"

    def __init__(self, space: Space, T=None):
        super().__init__(space)
        d = space.real_dim
        T = np.eye(d) if T is None else np.asarray(T, float)
        if T.shape != (d, d) or not np.all(np.isfinite(T)):
            raise ValidationError(f"T must be a finite {d}x{d} matrix")
        S = 0.5 * (T + T.T)
        if np.linalg.eigvalsh(S).min() < 1e-8:
            raise ValidationError("symmetric part of T must be positive definite")
        self.T = T
        self.S = S
        self.S_inv = np.linalg.inv(S)

    def to_dict(self):
        return {"kind": "quadratic", "T": self.T.tolist()}

    def value(self, x):
        v = self.space.flatten(x)
        return 0.5 * float(v @ self.T @ v)

    def grad(self, x):
        return self.space.unflatten(self.S @ self.space.flatten(x))

    def conj(self, y):
        v = self.space.flatten(y)
        return 0.5 * float(v @ self.S_inv @ v)

    def conj_grad(self, y):
        return self.space.unflatten(self.S_inv @ self.space.flatten(y))

    def hessian(self, x):
        return self.S.copy()

    def conj_hessian(self, y):
        return self.S_inv.copy()


class LinearCombination(Potential):
    """
    ``l1 Psi1 + l2 Psi2 + <a, x> + b``.

    Only values and gradients are provided; the conjugate of a sum has no
    closed form in general.
    """

    kind = "linear_combination"

    def __init__(self, terms, shift=None, const=0.0):
        first = terms[0][1]
        super().__init__(first.space)
        self.terms = [(float(c), p) for c, p in terms]
        self.shift = None if shift is None else np.asarray(shift)
        self.const = float(const)

    def value(self, x):
        v = sum(c * p.value(x) for c, p in self.terms)
        if self.shift is not None:
            v += self.space.pairing(x, self.shift)
        return v + self.const

    def grad(self, x):
        g = sum(c * p.grad(x) for c, p in self.terms)
        if self.shift is not None:
            g = g + self.shift
        return g

    def in_interior(self, x):
        return all(p.in_interior(x) for _, p in self.terms)

    def conj(self, y):
        raise NotImplementedError("no closed conjugate for sums")

    conj_grad = conj


def hilbert(space: Space) -> GaugePotential:
    """Half the squared norm on a p = 2 space (identity gauge)."""
    return GaugePotential(space, PowerGauge(1.0, 0.5))


_SEPARABLE = {
    "power_sum": PowerSum,
    "kl": KL,
    "burg": Burg,
    "fermi_dirac": FermiDirac,
    "alpha": AlphaFamily,
    "alpha_family": AlphaFamily,
}


def spectral_lift(f: SeparablePotential, n: int | None = None, check_symmetric: bool = True,
                  rng=None) -> SeparablePotential:
    """
    Lift a permutation-symmetric separable potential to ``n x n``
    Hermitian matrices: ``Psi(xi) = f(lambda(xi))``.

    The gradient is ``v diag(f'(lambda)) v*`` and the conjugate is
    ``f^* o lambda``.
    """
    if not isinstance(f, SeparablePotential):
        raise ValidationError("spectral lifts need a separable inner potential")
    n = f.space.n if n is None else int(n)
    if check_symmetric:
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(3):
            x = f.with_space(Space.vector(n)).sample_interior(rng)
            vec = f.with_space(Space.vector(n))
            if abs(vec.value(x) - vec.value(rng.permutation(x))) > 1e-10 * (1 + abs(vec.value(x))):
                raise ValidationError("inner potential is not permutation symmetric")
    space = Space("hermitian_matrix", n, NormSpec("schatten_p", f.space.norm.p))
    return f.with_space(space)


def potential_from_dict(d: dict, space: Space) -> Potential:
    """Build a potential from its JSON description on ``space``."""
    if not isinstance(d, dict):
        raise ValidationError("potential spec must be a JSON object")
    kind = d.get("kind")
    if kind in _SEPARABLE:
        cls = _SEPARABLE[kind]
        vspace = Space.vector(space.n, 2.0) if space.is_matrix else space
        if cls is PowerSum:
            p = cls(vspace, d.get("gamma", 0.5), d.get("scale", 1.0))
        elif cls is AlphaFamily:
            p = cls(vspace, d.get("alpha", 0.5))
        else:
            p = cls(vspace)
        return spectral_lift(p, space.n) if space.is_matrix else p
    if kind == "spectral" or kind == "spectral_lift":
        inner = potential_from_dict(d.get("inner", {}), Space.vector(space.n))
        return spectral_lift(inner, space.n)
    if kind == "gauge":
        return GaugePotential(space, gauge_from_dict(d.get("gauge", {"kind": "power"})))
    if kind == "hilbert":
        return hilbert(space)
    if kind == "squared_pnorm":
        return SquaredPNorm(space, d.get("gamma", 0.75))
    if kind == "quadratic":
        return Quadratic(space, d.get("T"))
    raise ValidationError(f"unknown potential kind {kind!r}")
