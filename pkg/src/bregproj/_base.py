"""Common interface of convex potentials."""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .spaces import Space

__all__ = ["Potential", "PotentialEval", "ConjugatePotential"]


class PotentialEval(NamedTuple):
    """Value, gradient (``None`` off the interior) and interior flag."""

    value: float
    gradient: Optional[np.ndarray]
    in_interior: bool


class Potential:
    """
    Proper convex function on a model space.

    Subclasses implement ``value``, ``grad``, ``in_interior``, ``conj``,
    ``conj_grad`` and ``conj_in_interior``. Values are ``+inf`` outside the
    effective domain. Gradients are only meaningful on the interior.
    """

    kind = "abstract"
    strictly_convex = True

    def __init__(self, space: Space):
        self.space = space

    # primal side ----------------------------------------------------------

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def in_interior(self, x) -> bool:
        return True

    def values(self, X) -> np.ndarray:
        """``value`` at each point of a stack ``X`` (first axis indexes points)."""
        return np.array([self.value(x) for x in X], dtype=float)

    def in_domain(self, x) -> bool:
        return bool(np.isfinite(self.value(x)))

    # conjugate side -------------------------------------------------------

    def conj(self, y) -> float:
        raise NotImplementedError

    def conj_grad(self, y) -> np.ndarray:
        raise NotImplementedError

    def conj_in_interior(self, y) -> bool:
        return True

    # second order ---------------------------------------------------------

    def hessian(self, x) -> np.ndarray:
        """Hessian in flattened real coordinates (central differences)."""
        return _fd_jacobian(self.grad, x, self.space)

    def conj_hessian(self, y) -> np.ndarray:
        return _fd_jacobian(self.conj_grad, y, self.space)

    # evaluation records ---------------------------------------------------

    def eval(self, x) -> PotentialEval:
        x = self.space.validate(x)
        if not self.in_interior(x):
            return PotentialEval(self.value(x), None, False)
        return PotentialEval(self.value(x), self.grad(x), True)

    def conjugate_eval(self, y) -> PotentialEval:
        y = self.space.validate(y)
        if not self.conj_in_interior(y):
            return PotentialEval(self.conj(y), None, False)
        return PotentialEval(self.conj(y), self.conj_grad(y), True)

    def conjugate(self) -> "Potential":
        """The Fenchel conjugate as a potential on the dual space."""
        return ConjugatePotential(self)

    # sampling -------------------------------------------------------------

    def sample_interior(self, rng) -> np.ndarray:
        """A random point of the interior of the domain."""
        return self.space.random(rng)

    def sample_dual_interior(self, rng) -> np.ndarray:
        return self.grad(self.sample_interior(rng))

    def to_dict(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class ConjugatePotential(Potential):
    """Swap the roles of a potential and its conjugate."""

    def __init__(self, base: Potential):
        super().__init__(base.space.dual())
        self.base = base
        self.kind = f"conjugate({base.kind})"
        self.strictly_convex = base.strictly_convex

    def value(self, x):
        return self.base.conj(x)

    def grad(self, x):
        return self.base.conj_grad(x)

    def in_interior(self, x):
        return self.base.conj_in_interior(x)

    def conj(self, y):
        return self.base.value(y)

    def conj_grad(self, y):
        return self.base.grad(y)

    def conj_in_interior(self, y):
        return self.base.in_interior(y)

    def hessian(self, x):
        return self.base.conj_hessian(x)

    def conj_hessian(self, y):
        return self.base.hessian(y)

    def conjugate(self):
        return self.base

    def sample_interior(self, rng):
        return self.base.sample_dual_interior(rng)

    def sample_dual_interior(self, rng):
        return self.base.sample_interior(rng)

    def to_dict(self):
        return {"kind": "conjugate", "base": self.base.to_dict()}


def _fd_jacobian(fun, x, space: Space, rel_step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x)
    v = space.flatten(x)
    h = rel_step * max(1.0, np.max(np.abs(v)))
    d = v.size
    jac = np.empty((d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        gp = space.flatten(fun(space.unflatten(v + e)))
        gm = space.flatten(fun(space.unflatten(v - e)))
        jac[:, k] = (gp - gm) / (2 * h)
    return 0.5 * (jac + jac.T)
