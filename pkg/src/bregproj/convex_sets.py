"""
Closed convex constraint sets.

Each set knows its membership residual, its exact Euclidean projection, a
witness point and a sampler. ``coordinates='dual'`` marks a set ``K_hat``
that stands for ``{x : grad Psi(x) in K_hat}``; such sets carry no primal
geometry and are consumed by right projections.

Sets act on the flattened real coordinates of a point, so the same
descriptions work for vectors and (mostly) for Hermitian matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import nnls

from .errors import InfeasibleError, UnsupportedOperation, ValidationError
from .spaces import hermitian_from_eigen

__all__ = [
    "ConvexSet",
    "Hyperplane",
    "Halfspace",
    "Affine",
    "Box",
    "Simplex",
    "NormBall",
    "Orthant",
    "FinitelyGeneratedCone",
    "PolyhedralCone",
    "Subspace",
    "SecondOrderCone",
    "PsdTraceSlice",
    "Intersection",
    "contains",
    "euclidean_project",
    "polar_cone",
    "project_simplex",
    "set_from_dict",
    "reflected_translate",
]


def project_simplex(v, s: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = s}`` by sorted thresholds."""
    v = np.asarray(v, float)
    u = -np.sort(-v, kind="stable")
    css = np.cumsum(u) - s
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _flat(x):
    x = np.asarray(x)
    if x.ndim == 1:
        return x.astype(float)
    n = x.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.real(np.diag(x)), np.sqrt(2) * np.real(x[iu]),
                           np.sqrt(2) * np.imag(x[iu])])


def _unflat_like(v, like):
    like = np.asarray(like)
    if like.ndim == 1:
        return np.asarray(v, float)
    n = like.shape[0]
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    out = np.zeros((n, n), complex)
    out[np.diag_indices(n)] = v[:n]
    off = (v[n:n + m] + 1j * v[n + m:]) / np.sqrt(2)
    out[iu] = off
    out[(iu[1], iu[0])] = off.conj()
    return out


class ConvexSet:
    """Base class; subclasses work on flattened coordinates ``v``."""

    variant = "abstract"
    is_cone = False
    is_affine = False

    def __init__(self, coordinates: str = "primal"):
        if coordinates not in ("primal", "dual"):
            raise ValidationError("coordinates must be 'primal' or 'dual'")
        self.coordinates = coordinates

    # flattened-coordinate primitives --------------------------------------

    def _residual(self, v) -> float:
        raise NotImplementedError

    def _project(self, v) -> np.ndarray:
        raise NotImplementedError

    def _witness(self, dim) -> np.ndarray:
        raise NotImplementedError

    # public API -----------------------------------------------------------

    def residual(self, x) -> float:
        """Largest violation of the defining constraints (0 inside)."""
        return float(self._residual(_flat(x)))

    def contains(self, x, tol: float = 1e-10) -> bool:
        return self.residual(x) <= tol

    def euclidean_project(self, x):
        return _unflat_like(self._project(_flat(x)), x)

    def witness(self, like):
        """A point of the set shaped like ``like``."""
        return _unflat_like(self._witness(_flat(like).size), like)

    def sample(self, rng, like, count: int, spread: float = 1.0, center=None):
        """
        Points of the set: Euclidean projections of Gaussian points around
        ``center`` (the witness by default).
        """
        c = _flat(self.witness(like) if center is None else center)
        out = []
        for _ in range(count):
            v = c + spread * rng.standard_normal(c.size)
            out.append(_unflat_like(self._project(v), like))
        return out

    def with_coordinates(self, coordinates):
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.coordinates = coordinates
        return new

    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        d.update(self._fields())
        if self.coordinates != "primal":
            d["coordinates"] = self.coordinates
        return d

    def _fields(self):
        return {}

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


def _vec(a, name):
    a = np.asarray(a, float).ravel()
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} must be finite")
    return a


class Hyperplane(ConvexSet):
    """``{x : <a, x> = b}``."""

    variant = "hyperplane"
    is_affine = True

    def __init__(self, a, b: float, coordinates="primal"):
        super().__init__(coordinates)
        self.a = _vec(a, "a")
        if np.linalg.norm(self.a) == 0:
            raise ValidationError("hyperplane normal must be nonzero")
        self.b = float(b)

    def _fields(self):
        return {"a": self.a.tolist(), "b": self.b}

    def _residual(self, v):
        return abs(self.a @ v - self.b)

    def _project(self, v):
        return v - (self.a @ v - self.b) / (self.a @ self.a) * self.a

    def _witness(self, dim):
        return self.b / (self.a @ self.a) * self.a

    def as_affine(self):
        return Affine(self.a[None, :], [self.b], self.coordinates)


class Halfspace(ConvexSet):
    """``{x : <a, x> <= b}``."""

    variant = "halfspace"

    def __init__(self, a, b: float, coordinates="primal"):
        super().__init__(coordinates)
        self.a = _vec(a, "a")
        if np.linalg.norm(self.a) == 0:
            raise ValidationError("halfspace normal must be nonzero")
        self.b = float(b)
        self.is_cone = self.b == 0.0

    def _fields(self):
        return {"a": self.a.tolist(), "b": self.b}

    def _residual(self, v):
        return max(0.0, self.a @ v - self.b)

    def _project(self, v):
        excess = self.a @ v - self.b
        if excess <= 0:
            return v.copy()
        return v - excess / (self.a @ self.a) * self.a

    def _witness(self, dim):
        return self.b / (self.a @ self.a) * self.a

    def boundary(self):
        return Hyperplane(self.a, self.b, self.coordinates)


class Affine(ConvexSet):
    """``{x : A x = b}`` with independent rows."""

    variant = "affine"
    is_affine = True

    def __init__(self, A, b, coordinates="primal"):
        super().__init__(coordinates)
        A = np.atleast_2d(np.asarray(A, float))
        b = _vec(b, "b")
        if A.shape[0] != b.size:
            raise ValidationError("A and b disagree in the number of rows")
        if not np.all(np.isfinite(A)):
            raise ValidationError("A must be finite")
        sv = np.linalg.svd(A, compute_uv=False)
        if sv.size == 0 or sv[-1] <= 1e-10 * max(sv[0], 1.0):
            raise ValidationError("rows of A must be linearly independent")
        self.A, self.b = A, b
        self._gram_inv = np.linalg.inv(A @ A.T)

    def _fields(self):
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    def _residual(self, v):
        return float(np.max(np.abs(self.A @ v - self.b)))

    def _project(self, v):
        return v - self.A.T @ (self._gram_inv @ (self.A @ v - self.b))

    def _witness(self, dim):
        return self.A.T @ (self._gram_inv @ self.b)


class Box(ConvexSet):
    """``{l <= x <= u}`` (entries may be infinite)."""

    variant = "box"

    def __init__(self, lower, upper, coordinates="primal"):
        super().__init__(coordinates)
        self.lower = np.asarray(lower, float).ravel()
        self.upper = np.asarray(upper, float).ravel()
        if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
            raise InfeasibleError("box needs lower <= upper")

    def _fields(self):
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    def _residual(self, v):
        return float(max(0.0, np.max(self.lower - v), np.max(v - self.upper)))

    def _project(self, v):
        return np.clip(v, self.lower, self.upper)

    def _witness(self, dim):
        lo = np.where(np.isfinite(self.lower), self.lower, np.minimum(self.upper, 0.0))
        hi = np.where(np.isfinite(self.upper), self.upper, np.maximum(lo, 0.0) + 1.0)
        lo = np.where(np.isfinite(lo), lo, hi - 1.0)
        return 0.5 * (lo + hi)


class Simplex(ConvexSet):
    """``{x >= 0, sum x = s}``."""

    variant = "simplex"

    def __init__(self, s: float = 1.0, coordinates="primal"):
        super().__init__(coordinates)
        self.s = float(s)
        if not self.s > 0:
            raise InfeasibleError("simplex needs s > 0")

    def _fields(self):
        return {"s": self.s}

    def _residual(self, v):
        return float(max(abs(v.sum() - self.s), max(0.0, -v.min())))

    def _project(self, v):
        return project_simplex(v, self.s)

    def _witness(self, dim):
        return np.full(dim, self.s / dim)


class NormBall(ConvexSet):
    """Euclidean ball ``{|x - c|_2 <= r}``."""

    variant = "norm_ball"

    def __init__(self, center, radius: float, coordinates="primal"):
        super().__init__(coordinates)
        self.center = _vec(center, "center")
        self.radius = float(radius)
        if not self.radius > 0:
            raise InfeasibleError("ball radius must be positive")

    def _fields(self):
        return {"center": self.center.tolist(), "radius": self.radius}

    def _residual(self, v):
        return max(0.0, np.linalg.norm(v - self.center) - self.radius)

    def _project(self, v):
        d = v - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return v.copy()
        return self.center + self.radius / nd * d

    def _witness(self, dim):
        return self.center.copy()


class Orthant(ConvexSet):
    """``{x >= 0}`` (``sign=+1``) or ``{x <= 0}`` (``sign=-1``)."""

    variant = "orthant"
    is_cone = True

    def __init__(self, dim: int, sign: int = 1, coordinates="primal"):
        super().__init__(coordinates)
        self.dim = int(dim)
        self.sign = 1 if sign >= 0 else -1

    def _fields(self):
        return {"dim": self.dim, "sign": self.sign}

    def _residual(self, v):
        return float(max(0.0, np.max(-self.sign * v)))

    def _project(self, v):
        return np.maximum(self.sign * v, 0.0) * self.sign

    def _witness(self, dim):
        return np.zeros(dim)

    def generators(self):
        return self.sign * np.eye(self.dim)


class FinitelyGeneratedCone(ConvexSet):
    """``{G^T lam : lam >= 0}`` for generator rows ``G``; one row is a ray."""

    variant = "cone"
    is_cone = True

    def __init__(self, generators, coordinates="primal"):
        super().__init__(coordinates)
        G = np.atleast_2d(np.asarray(generators, float))
        if np.any(np.linalg.norm(G, axis=1) == 0):
            raise ValidationError("generators must be nonzero")
        self.G = G

    def _fields(self):
        return {"generators": self.G.tolist()}

    def _project(self, v):
        lam, _ = nnls(self.G.T, v)
        return self.G.T @ lam

    def _residual(self, v):
        return float(np.linalg.norm(v - self._project(v)))

    def _witness(self, dim):
        return np.zeros(dim)

    def generators(self):
        return self.G


class PolyhedralCone(ConvexSet):
    """``{x : H x <= 0}``."""

    variant = "polyhedral_cone"
    is_cone = True

    def __init__(self, H, coordinates="primal"):
        super().__init__(coordinates)
        self.H = np.atleast_2d(np.asarray(H, float))

    def _fields(self):
        return {"H": self.H.tolist()}

    def _residual(self, v):
        return float(max(0.0, np.max(self.H @ v)))

    def _project(self, v):
        # Moreau: v = P_K v + P_{K polar} v with K polar = cone(rows of H)
        lam, _ = nnls(self.H.T, v)
        return v - self.H.T @ lam

    def _witness(self, dim):
        return np.zeros(dim)


class Subspace(ConvexSet):
    """Linear span of the rows of ``basis``."""

    variant = "subspace"
    is_cone = True
    is_affine = True

    def __init__(self, basis, coordinates="primal"):
        super().__init__(coordinates)
        B = np.atleast_2d(np.asarray(basis, float))
        q, r = np.linalg.qr(B.T)
        if np.min(np.abs(np.diag(r))) <= 1e-10 * max(1.0, np.max(np.abs(r))):
            raise ValidationError("subspace basis must be linearly independent")
        self.basis = B
        self._q = q

    def _fields(self):
        return {"basis": self.basis.tolist()}

    def _project(self, v):
        return self._q @ (self._q.T @ v)

    def _residual(self, v):
        return float(np.linalg.norm(v - self._project(v)))

    def _witness(self, dim):
        return np.zeros(dim)

    def annihilator_basis(self):
        dim = self.basis.shape[1]
        full, _ = np.linalg.qr(np.hstack([self._q, np.eye(dim)]))
        k = self._q.shape[1]
        return full[:, k:dim].T

    def as_affine(self):
        ann = self.annihilator_basis()
        return Affine(ann, np.zeros(ann.shape[0]), self.coordinates)


class SecondOrderCone(ConvexSet):
    """``{(u, t) : |u|_2 <= sign * t}`` with ``t`` the last coordinate."""

    variant = "second_order_cone"
    is_cone = True

    def __init__(self, sign: int = 1, coordinates="primal"):
        super().__init__(coordinates)
        self.sign = 1 if sign >= 0 else -1

    def _fields(self):
        return {"sign": self.sign}

    def _residual(self, v):
        return max(0.0, np.linalg.norm(v[:-1]) - self.sign * v[-1])

    def _project(self, v):
        u, t = v[:-1], self.sign * v[-1]
        nu = np.linalg.norm(u)
        if nu <= t:
            return v.copy()
        if nu <= -t:
            return np.zeros_like(v)
        a = 0.5 * (nu + t)
        out = np.append(a * u / nu, self.sign * a)
        return out

    def _witness(self, dim):
        return np.zeros(dim)


class PsdTraceSlice(ConvexSet):
    """``{xi PSD, tr xi = s}`` on Hermitian matrices."""

    variant = "psd_trace_slice"

    def __init__(self, s: float = 1.0, coordinates="primal"):
        super().__init__(coordinates)
        self.s = float(s)
        if not self.s > 0:
            raise InfeasibleError("trace slice needs s > 0")

    def _fields(self):
        return {"s": self.s}

    @staticmethod
    def _side(dim):
        n = int(round(np.sqrt(dim)))
        if n * n != dim:
            raise UnsupportedOperation("trace slices live on matrix spaces")
        return n

    def residual(self, x):
        x = np.asarray(x)
        if x.ndim != 2:
            raise UnsupportedOperation("trace slices live on matrix spaces")
        lam = np.linalg.eigvalsh(x)
        return float(max(abs(np.real(np.trace(x)) - self.s), max(0.0, -lam.min())))

    def _residual(self, v):
        return self.residual(_unflat_like(v, np.zeros((self._side(v.size),) * 2)))

    def euclidean_project(self, x):
        x = np.asarray(x)
        lam, vec = np.linalg.eigh(0.5 * (x + x.conj().T))
        return hermitian_from_eigen(project_simplex(lam, self.s), vec)

    def _project(self, v):
        n = self._side(v.size)
        return _flat(self.euclidean_project(_unflat_like(v, np.zeros((n, n)))))

    def _witness(self, dim):
        n = self._side(dim)
        return _flat(self.s / n * np.eye(n))


class Intersection(ConvexSet):
    """Intersection of finitely many sets; Euclidean projection by Dykstra."""

    variant = "intersection"

    def __init__(self, sets, coordinates="primal", witness=None):
        super().__init__(coordinates)
        self.sets = list(sets)
        if not self.sets:
            raise ValidationError("intersection of no sets")
        self.is_affine = all(s.is_affine for s in self.sets)
        self.is_cone = all(s.is_cone for s in self.sets)
        self._given_witness = None if witness is None else _vec(witness, "witness")

    def _fields(self):
        return {"sets": [s.to_dict() for s in self.sets]}

    def _residual(self, v):
        return float(max(s._residual(v) for s in self.sets))

    def _project(self, v, sweeps: int = 5000, tol: float = 1e-13):
        x = v.copy()
        incs = [np.zeros_like(v) for _ in self.sets]
        for _ in range(sweeps):
            x_old = x
            for k, s in enumerate(self.sets):
                z = s._project(x + incs[k])
                incs[k] = x + incs[k] - z
                x = z
            if np.linalg.norm(x - x_old) <= tol * (1 + np.linalg.norm(x)):
                break
        return x

    def _witness(self, dim):
        if self._given_witness is not None:
            return self._given_witness
        w = self._project(np.zeros(dim))
        if self._residual(w) > 1e-8:
            raise InfeasibleError("intersection appears to be empty")
        return w

    def as_affine(self):
        if not self.is_affine:
            raise UnsupportedOperation("not all components are affine")
        rows, rhs = [], []
        for s in self.sets:
            a = s if isinstance(s, Affine) else s.as_affine()
            rows.append(a.A)
            rhs.append(a.b)
        return Affine(np.vstack(rows), np.concatenate(rhs), self.coordinates)


def contains(K: ConvexSet, x, tol: float = 1e-10) -> bool:
    """``True`` iff all defining residuals of ``K`` at ``x`` are at most ``tol``."""
    return K.contains(x, tol)


def euclidean_project(K: ConvexSet, x):
    """Exact Euclidean projection onto a primal-coordinate set."""
    if K.coordinates != "primal":
        raise UnsupportedOperation("dual-coordinate sets have no primal projection")
    return K.euclidean_project(x)


def polar_cone(K: ConvexSet) -> ConvexSet:
    """
    Polar cone ``{y : <x, y> <= 0 for all x in K}``.

    Subspaces map to their annihilators, orthants to opposite orthants,
    rays to halfspaces and finitely generated cones to polyhedral cones.
    """
    c = K.coordinates
    if isinstance(K, Subspace):
        return Subspace(K.annihilator_basis(), c)
    if isinstance(K, Orthant):
        return Orthant(K.dim, -K.sign, c)
    if isinstance(K, FinitelyGeneratedCone):
        if K.G.shape[0] == 1:
            return Halfspace(K.G[0], 0.0, c)
        return PolyhedralCone(K.G, c)
    if isinstance(K, PolyhedralCone):
        return FinitelyGeneratedCone(K.H, c)
    if isinstance(K, Halfspace) and K.b == 0.0:
        return FinitelyGeneratedCone(K.a[None, :], c)
    if isinstance(K, SecondOrderCone):
        return SecondOrderCone(-K.sign, c)
    raise UnsupportedOperation(f"no polar for {K.variant}")


def set_from_dict(d: dict) -> ConvexSet:
    """Build a set from its JSON description."""
    if not isinstance(d, dict):
        raise ValidationError("set spec must be a JSON object")
    v = d.get("variant", d.get("kind"))
    c = d.get("coordinates", "primal")
    try:
        if v == "hyperplane":
            return Hyperplane(d["a"], d["b"], c)
        if v == "halfspace":
            return Halfspace(d["a"], d["b"], c)
        if v == "affine":
            return Affine(d["A"], d["b"], c)
        if v == "box":
            return Box(d["lower"], d["upper"], c)
        if v == "simplex":
            return Simplex(d.get("s", 1.0), c)
        if v in ("norm_ball", "ball"):
            return NormBall(d["center"], d["radius"], c)
        if v == "orthant":
            return Orthant(d["dim"], d.get("sign", 1), c)
        if v in ("cone", "ray"):
            return FinitelyGeneratedCone(d["generators"], c)
        if v == "polyhedral_cone":
            return PolyhedralCone(d["H"], c)
        if v == "subspace":
            return Subspace(d["basis"], c)
        if v == "second_order_cone":
            return SecondOrderCone(d.get("sign", 1), c)
        if v == "psd_trace_slice":
            return PsdTraceSlice(d.get("s", 1.0), c)
        if v == "intersection":
            return Intersection([set_from_dict(s) for s in d["sets"]], c)
    except KeyError as exc:
        raise ValidationError(f"set spec missing field {exc}") from None
    raise ValidationError(f"unknown set variant {v!r}")


def reflected_translate(K: ConvexSet, xi) -> ConvexSet:
    """The set ``xi - K = {xi - k : k in K}`` for cones and halfspaces."""
    v = _flat(xi)
    c = K.coordinates
    if isinstance(K, Orthant):
        # xi - k with sign*k >= 0
        if K.sign > 0:
            return Box(np.full(v.size, -np.inf), v, c)
        return Box(v, np.full(v.size, np.inf), c)
    if isinstance(K, Halfspace):
        return Halfspace(-K.a, K.b - K.a @ v, c)
    if isinstance(K, Hyperplane):
        return Hyperplane(-K.a, K.b - K.a @ v, c)
    if isinstance(K, Subspace):
        ann = K.annihilator_basis()
        return Affine(ann, ann @ v, c)
    if isinstance(K, Affine):
        return Affine(-K.A, K.b - K.A @ v, c)
    if isinstance(K, Box):
        return Box(v - K.upper, v - K.lower, c)
    if isinstance(K, FinitelyGeneratedCone) and K.G.shape[0] == 1:
        return _ShiftedRay(v, -K.G[0], c)
    return _Reflected(K, v, c)


class _ShiftedRay(ConvexSet):
    """``{o + t d : t >= 0}``."""

    variant = "shifted_ray"

    def __init__(self, origin, direction, coordinates="primal"):
        super().__init__(coordinates)
        self.origin = _vec(origin, "origin")
        self.direction = _vec(direction, "direction")

    def _fields(self):
        return {"origin": self.origin.tolist(), "direction": self.direction.tolist()}

    def _project(self, v):
        d = self.direction
        t = max(0.0, (v - self.origin) @ d / (d @ d))
        return self.origin + t * d

    def _residual(self, v):
        return float(np.linalg.norm(v - self._project(v)))

    def _witness(self, dim):
        return self.origin.copy()


class _Reflected(ConvexSet):
    """Generic ``o - K`` through the Euclidean projection of ``K``."""

    variant = "reflected"

    def __init__(self, base: ConvexSet, origin, coordinates="primal"):
        super().__init__(coordinates)
        self.base = base
        self.origin = _vec(origin, "origin")

    def _fields(self):
        return {"base": self.base.to_dict(), "origin": self.origin.tolist()}

    def _project(self, v):
        return self.origin - self.base._project(self.origin - v)

    def _residual(self, v):
        return self.base._residual(self.origin - v)

    def _witness(self, dim):
        return self.origin - self.base._witness(dim)
