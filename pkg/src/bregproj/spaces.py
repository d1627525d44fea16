"""
Finite-dimensional model spaces.

A point is a plain numpy array: a real vector of length ``n`` or an
``n x n`` Hermitian matrix (complex or real symmetric). The dual space is
the same coordinate space carrying the dual norm, and the duality pairing
is ``sum(x * y)`` for vectors and ``Re tr(x y)`` for matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import ValidationError

__all__ = [
    "NormSpec",
    "Space",
    "PolarParts",
    "pairing",
    "norm",
    "dual_norm",
    "dual_norm_spec",
    "duality_map",
    "polar_decompose",
    "eigen_sorted",
    "signed_power",
    "hermitian_from_eigen",
    "random_unitary",
    "conjugate_exponent",
]

_FAMILY_ALIASES = {
    "p": "p_norm",
    "p_norm": "p_norm",
    "lp": "p_norm",
    "schatten": "schatten_p",
    "schatten_p": "schatten_p",
    "weighted": "weighted_p",
    "weighted_p": "weighted_p",
    "block": "block_pq",
    "block_pq": "block_pq",
}

HERMITIAN_TOL = 1e-12


def conjugate_exponent(p: float) -> float:
    """Return ``p'`` with ``1/p + 1/p' = 1``."""
    return p / (p - 1.0)


def _check_exponent(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 1.0:
        raise ValidationError(f"{name} must lie strictly between 1 and inf, got {value}")
    return value


@dataclass(frozen=True)
class NormSpec:
    """
    Norm family and its parameters.

    Parameters
    ----------
    family : str
        One of ``p_norm``, ``schatten_p``, ``weighted_p``, ``block_pq``
        (short aliases ``p``, ``schatten``, ``weighted``, ``block`` work too).
    p : float
        Outer exponent, ``1 < p < inf``.
    q : float, optional
        Inner exponent for ``block_pq``.
    weights : tuple of float, optional
        Positive weights for ``weighted_p``.
    blocks : tuple of int, optional
        Block sizes for ``block_pq``. When omitted the coordinates are split
        into two blocks as evenly as possible.
    """

    family: str = "p_norm"
    p: float = 2.0
    q: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = None
    blocks: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValidationError(f"unknown norm family {self.family!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "p", _check_exponent("p", self.p))
        if fam == "block_pq":
            if self.q is None:
                raise ValidationError("block_pq needs q")
            object.__setattr__(self, "q", _check_exponent("q", self.q))
            if self.blocks is not None:
                b = tuple(int(s) for s in self.blocks)
                if any(s < 1 for s in b):
                    raise ValidationError("block sizes must be positive")
                object.__setattr__(self, "blocks", b)
        else:
            object.__setattr__(self, "q", None)
        if fam == "weighted_p":
            if self.weights is None:
                raise ValidationError("weighted_p needs weights")
            w = tuple(float(v) for v in self.weights)
            if any((not np.isfinite(v)) or v <= 0 for v in w):
                raise ValidationError("weights must be positive and finite")
            object.__setattr__(self, "weights", w)
        else:
            object.__setattr__(self, "weights", None)

    def dual(self) -> "NormSpec":
        """Norm of the dual space (conjugate exponents, transformed weights)."""
        pd = conjugate_exponent(self.p)
        if self.family == "block_pq":
            return NormSpec("block_pq", pd, conjugate_exponent(self.q), blocks=self.blocks)
        if self.family == "weighted_p":
            w = np.asarray(self.weights) ** (1.0 - pd)
            return NormSpec("weighted_p", pd, weights=tuple(w))
        return NormSpec(self.family, pd)

    def to_dict(self) -> dict:
        d = {"family": self.family, "p": self.p}
        if self.q is not None:
            d["q"] = self.q
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.blocks is not None:
            d["blocks"] = list(self.blocks)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormSpec":
        if not isinstance(d, dict):
            raise ValidationError("norm spec must be a JSON object")
        try:
            return cls(
                family=d.get("family", "p_norm"),
                p=d["p"],
                q=d.get("q"),
                weights=tuple(d["weights"]) if d.get("weights") is not None else None,
                blocks=tuple(d["blocks"]) if d.get("blocks") is not None else None,
            )
        except KeyError as exc:
            raise ValidationError(f"norm spec missing field {exc}") from None
        except TypeError as exc:
            raise ValidationError(f"bad norm spec: {exc}") from None


def dual_norm_spec(n: NormSpec) -> NormSpec:
    """Norm spec of the dual space; an involution."""
    return n.dual()


class PolarParts(NamedTuple):
    """Polar decomposition ``x = sign * modulus``.

    For matrices ``sign`` and ``modulus`` commute and share ``basis``;
    ``signs`` holds the per-eigenvalue sign (0 off the support).
    """

    sign: np.ndarray
    modulus: np.ndarray
    signs: np.ndarray
    basis: Optional[np.ndarray]

    def recompose(self) -> np.ndarray:
        if self.basis is None:
            return self.sign * self.modulus
        return self.sign @ self.modulus


@dataclass(frozen=True)
class Space:
    """
    A finite-dimensional model space.

    Parameters
    ----------
    kind : {'vector', 'hermitian_matrix'}
    n : int
        Vector length or matrix side.
    norm : NormSpec
        For matrices only ``schatten_p`` is meaningful; a ``p_norm`` spec is
        read as the Schatten norm with the same exponent.
    """

    kind: str = "vector"
    n: int = 2
    norm: NormSpec = field(default_factory=NormSpec)

    def __post_init__(self):
        kind = {"vector": "vector", "matrix": "hermitian_matrix",
                "hermitian": "hermitian_matrix",
                "hermitian_matrix": "hermitian_matrix"}.get(str(self.kind))
        if kind is None:
            raise ValidationError(f"unknown space kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if int(self.n) != self.n or int(self.n) < 1:
            raise ValidationError("dimension must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        nrm = self.norm
        if isinstance(nrm, dict):
            nrm = NormSpec.from_dict(nrm)
        if kind == "hermitian_matrix":
            if nrm.family == "p_norm":
                nrm = NormSpec("schatten_p", nrm.p)
            elif nrm.family != "schatten_p":
                raise ValidationError("matrix spaces carry Schatten norms only")
        else:
            if nrm.family == "schatten_p":
                raise ValidationError("Schatten norms need a matrix space")
            if nrm.family == "weighted_p" and len(nrm.weights) != self.n:
                raise ValidationError("weights length must equal n")
            if nrm.family == "block_pq" and nrm.blocks is not None and sum(nrm.blocks) != self.n:
                raise ValidationError("block sizes must add up to n")
        object.__setattr__(self, "norm", nrm)

    # construction helpers -------------------------------------------------

    @classmethod
    def vector(cls, n, p=2.0, **kw):
        return cls("vector", n, NormSpec(kw.pop("family", "p_norm"), p, **kw))

    @classmethod
    def matrix(cls, n, p=2.0):
        return cls("hermitian_matrix", n, NormSpec("schatten_p", p))

    @classmethod
    def from_dict(cls, d: dict) -> "Space":
        if not isinstance(d, dict):
            raise ValidationError("space spec must be a JSON object")
        try:
            return cls(d.get("kind", "vector"), d["n"],
                       NormSpec.from_dict(d.get("norm", {"family": "p", "p": 2.0})))
        except KeyError as exc:
            raise ValidationError(f"space spec missing field {exc}") from None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "norm": self.norm.to_dict()}

    @property
    def is_matrix(self) -> bool:
        return self.kind == "hermitian_matrix"

    @property
    def shape(self):
        return (self.n, self.n) if self.is_matrix else (self.n,)

    @property
    def real_dim(self) -> int:
        """Number of real coordinates (n^2 for Hermitian matrices)."""
        return self.n * self.n if self.is_matrix else self.n

    def dual(self) -> "Space":
        return Space(self.kind, self.n, self.norm.dual())

    def block_slices(self):
        sizes = self.norm.blocks
        if sizes is None:
            half = (self.n + 1) // 2
            sizes = (half, self.n - half) if self.n > 1 else (1,)
        out, start = [], 0
        for s in sizes:
            if s > 0:
                out.append(slice(start, start + s))
            start += s
        return out

    # points ---------------------------------------------------------------

    def validate(self, x) -> np.ndarray:
        """Return ``x`` as an array of this space or raise ValidationError."""
        arr = np.asarray(x)
        if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
            raise ValidationError("point data must be numeric")
        if arr.shape != self.shape:
            raise ValidationError(f"expected shape {self.shape}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("point data contains NaN or Inf")
        if self.is_matrix:
            scale = max(np.linalg.norm(arr), 1.0)
            if np.linalg.norm(arr - arr.conj().T) > HERMITIAN_TOL * scale:
                raise ValidationError("matrix point is not Hermitian")
        elif np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ValidationError("vector points are real")
            arr = arr.real
        return arr.astype(complex if np.iscomplexobj(arr) else float)

    def zeros(self):
        return np.zeros(self.shape)

    def identity(self):
        if not self.is_matrix:
            return np.ones(self.n)
        return np.eye(self.n)

    def random(self, rng, scale=1.0, complex_=True):
        """Gaussian random point (complex Hermitian for matrix spaces)."""
        if not self.is_matrix:
            return scale * rng.standard_normal(self.n)
        a = rng.standard_normal((self.n, self.n))
        if complex_:
            a = a + 1j * rng.standard_normal((self.n, self.n))
        return scale * 0.5 * (a + a.conj().T)

    def random_positive(self, rng, low=0.2, high=3.0):
        """Point with entries (or eigenvalues) uniform in ``[low, high]``."""
        if not self.is_matrix:
            return rng.uniform(low, high, self.n)
        lam = rng.uniform(low, high, self.n)
        u = random_unitary(self.n, rng)
        return hermitian_from_eigen(lam, u)

    def flatten(self, x) -> np.ndarray:
        """Real coordinate vector of a point (for generic solvers)."""
        if not self.is_matrix:
            return np.asarray(x, float).ravel()
        x = np.asarray(x)
        iu = np.triu_indices(self.n, 1)
        return np.concatenate([np.real(np.diag(x)),
                               np.sqrt(2) * np.real(x[iu]),
                               np.sqrt(2) * np.imag(x[iu])])

    def unflatten(self, v) -> np.ndarray:
        """Inverse of :meth:`flatten`; isometric for the Frobenius norm."""
        v = np.asarray(v, float)
        if not self.is_matrix:
            return v.copy()
        n = self.n
        iu = np.triu_indices(n, 1)
        m = len(iu[0])
        x = np.zeros((n, n), complex)
        x[np.diag_indices(n)] = v[:n]
        off = (v[n:n + m] + 1j * v[n + m:n + 2 * m]) / np.sqrt(2)
        x[iu] = off
        x[(iu[1], iu[0])] = off.conj()
        return x

    # geometry -------------------------------------------------------------

    def pairing(self, x, y) -> float:
        return pairing(x, y)

    def norm_of(self, x) -> float:
        return norm(self, x)

    def dual_norm_of(self, y) -> float:
        return dual_norm(self, y)

    def j(self, x):
        """Normalized duality map: ``<x, j(x)> = |x|^2``, ``|j(x)|_* = |x|``."""
        return duality_map(self, x)

    def j_dual(self, y):
        """Normalized duality map of the dual space; inverse of :meth:`j`."""
        return duality_map(self.dual(), y)


def pairing(x, y) -> float:
    """
    Duality pairing ``<x, y>``.

    Vectors use the dot product and matrices ``Re tr(x y)``.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.ndim == 2:
        return float(np.real(np.sum(x * y.T)))
    return float(np.real(np.dot(x, y)))


def _vector_norm(spec: NormSpec, x, slices=None) -> float:
    a = np.abs(np.asarray(x, float))
    m = a.max() if a.size else 0.0
    if m == 0.0:
        return 0.0
    a = a / m
    p = spec.p
    if spec.family == "p_norm":
        return m * np.sum(a ** p) ** (1.0 / p)
    if spec.family == "weighted_p":
        return m * np.sum(np.asarray(spec.weights) * a ** p) ** (1.0 / p)
    if spec.family == "block_pq":
        q = spec.q
        inner = np.array([np.sum(a[s] ** q) ** (1.0 / q) for s in slices])
        return m * np.sum(inner ** p) ** (1.0 / p)
    raise ValidationError(f"norm family {spec.family} is not a vector norm")


def _singular_values(x) -> np.ndarray:
    return np.abs(np.linalg.eigvalsh(x))


def norm(space: Space, x) -> float:
    """Norm of ``x`` in ``space``."""
    x = np.asarray(x)
    if space.is_matrix:
        s = _singular_values(x)
        m = s.max()
        if m == 0.0:
            return 0.0
        return float(m * np.sum((s / m) ** space.norm.p) ** (1.0 / space.norm.p))
    return float(_vector_norm(space.norm, x, space.block_slices()))


def dual_norm(space: Space, y) -> float:
    """Dual norm of ``y`` (a point in dual coordinates)."""
    return norm(space.dual(), y)


def _unit_j_vector(space: Space, u) -> np.ndarray:
    spec = space.norm
    p = spec.p
    au = np.abs(u)
    s = np.sign(u)
    if spec.family == "p_norm":
        return s * au ** (p - 1.0)
    if spec.family == "weighted_p":
        return np.asarray(spec.weights) * s * au ** (p - 1.0)
    q = spec.q
    out = np.zeros_like(u)
    for sl in space.block_slices():
        bn = _vector_norm(NormSpec("p_norm", q), u[sl])
        if bn > 0:
            out[sl] = bn ** (p - q) * s[sl] * au[sl] ** (q - 1.0)
    return out


def duality_map(space: Space, x) -> np.ndarray:
    """
    Normalized duality map ``j`` of ``space``.

    Closed forms per family; ``j`` is positively 1-homogeneous and
    ``j(0) = 0``.
    """
    x = np.asarray(x)
    r = norm(space, x)
    if r == 0.0:
        return np.zeros_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
    u = x / r
    if space.is_matrix:
        lam, v = np.linalg.eigh(u)
        return r * hermitian_from_eigen(np.sign(lam) * np.abs(lam) ** (space.norm.p - 1.0), v)
    return r * _unit_j_vector(space, u)


def hermitian_from_eigen(lam, v) -> np.ndarray:
    """Return ``v diag(lam) v*``."""
    out = (v * np.asarray(lam)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def _require_hermitian(x):
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValidationError("expected a square matrix")
    if not np.all(np.isfinite(x)):
        raise ValidationError("matrix contains NaN or Inf")
    scale = max(np.linalg.norm(x), 1.0)
    if np.linalg.norm(x - x.conj().T) > 1e-10 * scale:
        raise ValidationError("matrix is not Hermitian")
    return x


def eigen_sorted(x):
    """
    Eigenvalues in nonincreasing order and the matching unitary basis.

    Returns
    -------
    lam : ndarray
    basis : ndarray
        ``basis @ diag(lam) @ basis.conj().T`` reproduces ``x``.
    """
    x = _require_hermitian(x)
    lam, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    return lam[::-1].copy(), v[:, ::-1].copy()


def polar_decompose(x, tol: float = 1e-12) -> PolarParts:
    """
    Polar parts ``u_x`` and ``|x|`` of a real vector or Hermitian matrix.

    Eigenvalues with modulus below ``tol * max|lambda|`` count as off the
    support and get sign 0.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        if np.iscomplexobj(x) or not np.all(np.isfinite(x)):
            raise ValidationError("vector input must be real and finite")
        return PolarParts(np.sign(x), np.abs(x), np.sign(x), None)
    lam, v = eigen_sorted(x)
    cut = tol * max(np.max(np.abs(lam)), 1e-300)
    sg = np.where(np.abs(lam) > cut, np.sign(lam), 0.0)
    return PolarParts(hermitian_from_eigen(sg, v), hermitian_from_eigen(np.abs(lam), v), sg, v)


def signed_power(x, r: float) -> np.ndarray:
    """``u_x |x|^r``: componentwise ``sgn(x)|x|^r`` or its spectral analogue."""
    x = np.asarray(x)
    if x.ndim == 1:
        return np.sign(x) * np.abs(x) ** r
    lam, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    return hermitian_from_eigen(np.sign(lam) * np.abs(lam) ** r, v)


def random_unitary(n: int, rng, real: bool = False) -> np.ndarray:
    """Haar-distributed unitary (orthogonal if ``real``)."""
    a = rng.standard_normal((n, n))
    if not real:
        a = a + 1j * rng.standard_normal((n, n))
    qm, rm = np.linalg.qr(a)
    d = np.diag(rm)
    return qm * (d / np.abs(d))
