"""
Gauges, quasigauges and the potentials they induce.

A gauge ``phi`` is strictly increasing, continuous, unbounded, with
``phi(0) = 0``. Its potential is ``Psi_phi(x) = int_0^{|x|} phi(t) dt`` and
its duality map is ``j_phi(x) = phi(|x|) / |x| * j(x)``.

Quasigauges are nondecreasing and may jump, stay flat, or become infinite.
They are stored as the *filled graph*: a monotone polyline starting at
``(0, 0)`` where vertical pieces are jumps and horizontal pieces are flats.
Reflecting the filled graph in the diagonal gives the generalized inverses,
and every integral is an exact polyline area.
"""

from __future__ import annotations

import numpy as np

from ._base import Potential
from .errors import UnsupportedOperation, ValidationError
from .spaces import Space

__all__ = [
    "Quasigauge",
    "PowerGauge",
    "TabulatedGauge",
    "GaugePotential",
    "gauge_from_dict",
    "psi_phi_value",
    "psi_phi_conjugate",
    "duality_map",
    "generalized_inverses",
    "conjugate_integral_check",
]


class Quasigauge:
    """
    Nondecreasing ``[0, inf]``-valued function given by its filled graph.

    Parameters
    ----------
    vertices : array_like, shape (m, 2)
        Points ``(t, s)`` of the filled graph, nondecreasing in both
        coordinates. A leading ``(0, 0)`` is added when missing.
    tail : tuple of float
        Direction ``(dt, ds)`` of the graph after the last vertex.
        ``(1, c)`` continues with slope ``c >= 0``; ``(0, 1)`` means the
        function is ``+inf`` beyond the last vertex.

    Notes
    -----
    Pointwise values at a jump take the upper end (right continuity).
    Integrals do not depend on this choice.
    """

    kind = "quasigauge"

    def __init__(self, vertices, tail=(1.0, 0.0)):
        v = np.atleast_2d(np.asarray(vertices, float))
        if v.shape[1] != 2 or v.size == 0:
            raise ValidationError("vertices must have shape (m, 2)")
        if not np.allclose(v[0], 0.0):
            v = np.vstack([[0.0, 0.0], v])
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("vertices must be finite and nonnegative")
        if np.any(np.diff(v[:, 0]) < 0) or np.any(np.diff(v[:, 1]) < 0):
            raise ValidationError("filled graph must be nondecreasing")
        dt, ds = (float(tail[0]), float(tail[1]))
        if dt < 0 or ds < 0 or dt + ds == 0:
            raise ValidationError("tail direction must be nonnegative and nonzero")
        if dt == 0:
            if v[-1, 0] == 0:
                raise ValidationError("quasigauge must be finite somewhere right of 0")
        if v[-1, 1] == 0 and ds == 0:
            raise ValidationError("quasigauge must not vanish identically")
        # collapse repeated vertices
        keep = np.ones(len(v), bool)
        keep[1:] = np.any(np.diff(v, axis=0) != 0, axis=1)
        self.vertices = v[keep]
        norm_ = np.hypot(dt, ds)
        if abs(norm_ - 1.0) > 1e-14:  # keep already-unit tails exact for round trips
            dt, ds = dt / norm_, ds / norm_
        self.tail = (float(dt), float(ds))

    # constructors ---------------------------------------------------------

    @classmethod
    def step(cls, at=1.0, height=2.0, tail_slope=0.0):
        """``0`` on ``[0, at)``, then ``height`` (plus ``tail_slope * (t - at)``)."""
        return cls([[0, 0], [at, 0], [at, height]], (1.0, tail_slope))

    @classmethod
    def flat(cls, start=1.0, stop=2.0, tail_slope=1.0):
        """``t`` on ``[0, start]``, flat at ``start`` until ``stop``, then slope."""
        return cls([[0, 0], [start, start], [stop, start]], (1.0, tail_slope))

    def to_dict(self):
        return {"kind": "quasigauge", "vertices": self.vertices.tolist(),
                "tail": list(self.tail)}

    # evaluation -----------------------------------------------------------

    @property
    def _tail_slope(self):
        dt, ds = self.tail
        return np.inf if dt == 0 else ds / dt

    def __call__(self, t):
        return np.vectorize(self._value1, otypes=[float])(t)

    def _value1(self, t):
        if t < 0:
            raise ValidationError("quasigauges live on [0, inf)")
        v = self.vertices
        tm, sm = v[-1]
        if t > tm:
            slope = self._tail_slope
            return np.inf if np.isinf(slope) else sm + slope * (t - tm)
        # last vertex with abscissa <= t gives the right-continuous value
        k = np.searchsorted(v[:, 0], t, side="right") - 1
        if k >= len(v) - 1:
            return v[-1, 1] if self.tail[0] > 0 else v[-1, 1]
        (t0, s0), (t1, s1) = v[k], v[k + 1]
        if t1 == t0:
            return s1
        return s0 + (s1 - s0) * (t - t0) / (t1 - t0)

    def integral(self, t):
        """Exact ``int_0^t phi`` (``+inf`` once the graph goes vertical)."""
        return np.vectorize(self._integral1, otypes=[float])(t)

    def _integral1(self, t):
        v = self.vertices
        total = 0.0
        for (t0, s0), (t1, s1) in zip(v[:-1], v[1:]):
            if t <= t0:
                return total
            if t1 == t0:
                continue
            hi = min(t, t1)
            s_hi = s0 + (s1 - s0) * (hi - t0) / (t1 - t0)
            total += 0.5 * (s0 + s_hi) * (hi - t0)
        tm, sm = v[-1]
        if t <= tm:
            return total
        slope = self._tail_slope
        if np.isinf(slope):
            return np.inf
        d = t - tm
        return total + sm * d + 0.5 * slope * d * d

    def inverse_graph(self) -> "Quasigauge":
        """Reflected filled graph; its function is the right inverse."""
        dt, ds = self.tail
        return Quasigauge(self.vertices[:, ::-1], (ds, dt))

    def left_inverse(self, s):
        """``phi_vee(s) = inf{t >= 0 : phi(t) >= s}``, ``inf(empty) = inf``."""
        return np.vectorize(self._left_inv1, otypes=[float])(s)

    def right_inverse(self, s):
        """``phi_wedge(s) = sup{t >= 0 : phi(t) <= s}``, ``sup(empty) = 0``."""
        return np.vectorize(self._right_inv1, otypes=[float])(s)

    def _left_inv1(self, s):
        if s <= 0:
            return 0.0
        v = self.vertices
        for (t0, s0), (t1, s1) in zip(v[:-1], v[1:]):
            if s1 >= s:
                if s0 >= s or s1 == s0:
                    return t0
                return t0 + (t1 - t0) * (s - s0) / (s1 - s0)
        tm, sm = v[-1]
        dt, ds = self.tail
        if ds == 0:
            return np.inf
        if dt == 0:
            return tm
        return tm + (s - sm) * dt / ds

    def _right_inv1(self, s):
        v = self.vertices
        tm, sm = v[-1]
        dt, ds = self.tail
        if s >= sm:
            if ds == 0:
                return np.inf
            if dt == 0:
                return tm
            return tm + (s - sm) * dt / ds
        for k in range(len(v) - 2, -1, -1):
            (t0, s0), (t1, s1) = v[k], v[k + 1]
            if s0 <= s:
                if s1 <= s or s1 == s0:
                    return t1
                return t0 + (t1 - t0) * (s - s0) / (s1 - s0)
        return 0.0

    def inverse_integral(self, u):
        """Exact ``int_0^u phi_wedge`` (equal to ``int_0^u phi_vee``)."""
        return self.inverse_graph().integral(u)


class PowerGauge:
    """
    ``phi(t) = t^(1/beta - 1) / alpha`` with ``alpha > 0``, ``0 < beta < 1``.

    ``beta = 1/2, alpha = 1`` is the identity gauge whose potential is half
    the squared norm.
    """

    kind = "power"

    def __init__(self, alpha: float = 1.0, beta: float = 0.5):
        alpha, beta = float(alpha), float(beta)
        if not (alpha > 0 and np.isfinite(alpha)):
            raise ValidationError("alpha must be positive")
        if not (0 < beta < 1):
            raise ValidationError("beta must lie in (0, 1)")
        self.alpha, self.beta = alpha, beta

    def to_dict(self):
        return {"kind": "power", "alpha": self.alpha, "beta": self.beta}

    def __call__(self, t):
        return np.asarray(t, float) ** (1.0 / self.beta - 1.0) / self.alpha

    def integral(self, t):
        return self.beta / self.alpha * np.asarray(t, float) ** (1.0 / self.beta)

    def inverse(self, s):
        b = self.beta
        return (self.alpha * np.asarray(s, float)) ** (b / (1.0 - b))

    def inverse_integral(self, s):
        b = self.beta
        return (1.0 - b) * self.alpha ** (b / (1.0 - b)) * np.asarray(s, float) ** (1.0 / (1.0 - b))

    def derivative(self, t):
        e = 1.0 / self.beta - 1.0
        return e * np.asarray(t, float) ** (e - 1.0) / self.alpha

    def inverse_gauge(self):
        """``phi^{-1}`` as a power gauge on the dual side."""
        b = self.beta
        # (alpha s)^(b/(1-b)) = s^(1/b' - 1) / alpha' with b' = 1 - b
        return PowerGauge(self.alpha ** (-b / (1.0 - b)), 1.0 - b)

    left_inverse = inverse
    right_inverse = inverse


class TabulatedGauge(Quasigauge):
    """
    Piecewise-linear gauge through ``knots`` with a positive tail slope.

    Parameters
    ----------
    knots : array_like, shape (m, 2)
        Strictly increasing in both coordinates, starting at ``(0, 0)``.
    tail_slope : float
        Slope after the last knot; must be positive.
    """

    kind = "tabulated"

    def __init__(self, knots, tail_slope: float = 1.0):
        k = np.atleast_2d(np.asarray(knots, float))
        if k.ndim != 2 or k.shape[1] != 2 or not np.allclose(k[0], 0.0):
            raise ValidationError("knots must start at (0, 0)")
        if np.any(np.diff(k[:, 0]) <= 0) or np.any(np.diff(k[:, 1]) <= 0):
            raise ValidationError("tabulated gauge must be strictly increasing")
        if not (tail_slope > 0 and np.isfinite(tail_slope)):
            raise ValidationError("tail slope must be positive")
        super().__init__(k, (1.0, float(tail_slope)))
        self.tail_slope = float(tail_slope)

    def to_dict(self):
        return {"kind": "tabulated", "knots": self.vertices.tolist(),
                "tail_slope": self.tail_slope}

    def inverse(self, s):
        return self.right_inverse(s)

    def inverse_gauge(self):
        return TabulatedGauge(self.vertices[:, ::-1], 1.0 / self.tail_slope)


def gauge_from_dict(d: dict):
    """Build a gauge or quasigauge from its JSON description."""
    if not isinstance(d, dict):
        raise ValidationError("gauge spec must be a JSON object")
    kind = d.get("kind", "power")
    try:
        if kind == "power":
            return PowerGauge(d.get("alpha", 1.0), d.get("beta", 0.5))
        if kind == "tabulated":
            return TabulatedGauge(d["knots"], d.get("tail_slope", 1.0))
        if kind == "quasigauge":
            return Quasigauge(d["vertices"], tuple(d.get("tail", (1.0, 0.0))))
    except KeyError as exc:
        raise ValidationError(f"gauge spec missing field {exc}") from None
    raise ValidationError(f"unknown gauge kind {kind!r}")


def _is_gauge(g):
    return isinstance(g, (PowerGauge, TabulatedGauge))


class GaugePotential(Potential):
    """
    ``Psi_phi(x) = int_0^{|x|} phi``.

    Parameters
    ----------
    space : Space
    gauge : PowerGauge, TabulatedGauge or Quasigauge
    """

    kind = "gauge"

    def __init__(self, space: Space, gauge=None):
        super().__init__(space)
        self.gauge = PowerGauge() if gauge is None else gauge

    def to_dict(self):
        return {"kind": "gauge", "gauge": self.gauge.to_dict()}

    def value(self, x):
        return float(self.gauge.integral(self.space.norm_of(x)))

    def values(self, X):
        sp = self.space
        if sp.norm.family not in ("p_norm", "schatten_p"):
            return super().values(X)
        X = np.asarray(X)
        a = np.abs(np.linalg.eigvalsh(X)) if sp.is_matrix else np.abs(X.astype(float))
        p = sp.norm.p
        m = a.max(axis=-1)
        safe = np.where(m > 0, m, 1.0)
        r = m * np.sum((a / safe[..., None]) ** p, axis=-1) ** (1.0 / p)
        return np.asarray(self.gauge.integral(r), float)

    def in_interior(self, x):
        if _is_gauge(self.gauge):
            return True
        r = self.space.norm_of(x)
        return bool(np.isfinite(self.gauge(r)))

    def grad(self, x):
        return duality_map(self, x)

    def conj(self, y):
        r = self.space.dual_norm_of(y)
        return float(self.gauge.inverse_integral(r))

    def conj_grad(self, y):
        if not _is_gauge(self.gauge):
            raise UnsupportedOperation("quasigauge duality maps are set valued")
        y = np.asarray(y)
        r = self.space.dual_norm_of(y)
        if r == 0:
            return np.zeros_like(y)
        return float(self.gauge.inverse(r)) / r * self.space.j_dual(y)

    def sample_interior(self, rng):
        return self.space.random(rng)


def psi_phi_value(gp: GaugePotential, x) -> float:
    """``Psi_phi(x)``; ``+inf`` where a quasigauge has infinite integral."""
    return gp.value(x)


def psi_phi_conjugate(gp: GaugePotential, y) -> float:
    """``Psi_phi^*(y) = int_0^{|y|_*} phi^{-1}``."""
    return gp.conj(y)


def duality_map(gp: GaugePotential, x) -> np.ndarray:
    """``j_phi(x) = phi(|x|)/|x| * j(x)``, ``j_phi(0) = 0``."""
    if not _is_gauge(gp.gauge):
        raise UnsupportedOperation("duality maps need a gauge, not a quasigauge")
    x = np.asarray(x)
    r = gp.space.norm_of(x)
    if r == 0:
        return np.zeros_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
    return float(gp.gauge(r)) / r * gp.space.j(x)


def generalized_inverses(q):
    """Return the pair of callables ``(phi_vee, phi_wedge)``."""
    return q.left_inverse, q.right_inverse


def conjugate_integral_check(q, u: float, grid: float = 1e-4):
    """
    Compare a brute-force conjugate of ``f_phi(t) = int_0^t phi`` with the
    integral of a generalized inverse.

    The left side is ``max_t {t u - f_phi(t)}`` over the grid ``t = k * grid``
    on ``[0, T]`` where ``T`` is past the last vertex of the graph; beyond
    ``T`` the function is affine and its supremum is taken exactly.

    Returns
    -------
    lhs, rhs, residual : float
        ``residual`` is 0 when both sides are infinite.
    """
    u = float(u)
    if isinstance(q, PowerGauge):
        t_end = 2.0 * float(q.inverse(u)) + 1.0
        slope_end = None
    else:
        t_end = float(q.vertices[-1, 0]) + 1.0
        slope_end = q._tail_slope
    n = int(np.ceil(t_end / grid))
    t = np.arange(n + 1) * grid
    vals = t * u - q.integral(t)
    k = int(np.argmax(vals))
    lhs = float(vals[k])
    if slope_end is not None:
        # beyond t_end: d/dt (t u - f) = u - phi(t), phi affine from phi(t_end)
        s_end = float(q(t_end))
        if np.isinf(slope_end):
            pass
        elif slope_end == 0:
            if u > s_end:
                lhs = np.inf
        elif u > s_end:
            d = (u - s_end) / slope_end
            tail = t_end * u - float(q.integral(t_end)) + (u - s_end) * d - 0.5 * slope_end * d * d
            lhs = max(lhs, tail)
    elif k == n:
        raise RuntimeError("grid too short for the power gauge")
    # both inverses differ only on a null set, so they share this area
    rhs = float(q.inverse_integral(u))
    if np.isinf(lhs) and np.isinf(rhs):
        return lhs, rhs, 0.0
    return lhs, rhs, abs(lhs - rhs)
