"""Problem data for quadratic programs with two quadratic constraints.

The problem is::

    minimize    z'Q0 z + 2 b0'z
    subject to  z'Qi z + 2 bi'z + ci <= 0,   i = 1, 2

with no definiteness assumption on any ``Qi``. Homogenizing with ``x = [t; z]``
turns every quadratic into ``M(qi) . x x'`` with the bordered matrices built
by :func:`homogenize`.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateT
from .symmat import sym

DEHOMOGENIZE_TOL = 1e-8


def _vector(v, n, name):
    v = np.array(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class Qc2qpInstance:
    Q0: np.ndarray
    b0: np.ndarray
    Q1: np.ndarray
    b1: np.ndarray
    c1: float
    Q2: np.ndarray
    b2: np.ndarray
    c2: float

    def __post_init__(self):
        Q0 = sym(self.Q0)
        n = Q0.shape[0]
        if n < 1:
            raise ValueError("n must be positive")
        set_ = object.__setattr__
        set_(self, "Q0", Q0)
        for name in ("Q1", "Q2"):
            Q = sym(getattr(self, name))
            if Q.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {Q.shape}")
            set_(self, name, Q)
        for name in ("b0", "b1", "b2"):
            set_(self, name, _vector(getattr(self, name), n, name))
        for name in ("c1", "c2"):
            c = float(getattr(self, name))
            if not np.isfinite(c):
                raise ValueError(f"{name} must be finite")
            set_(self, name, c)

    @property
    def n(self):
        return self.Q0.shape[0]

    def quadratic(self, i):
        """``(Q, b, c)`` of quadratic ``i``; the objective has ``c = 0``."""
        if i == 0:
            return self.Q0, self.b0, 0.0
        if i == 1:
            return self.Q1, self.b1, self.c1
        if i == 2:
            return self.Q2, self.b2, self.c2
        raise IndexError(f"quadratic index must be 0, 1 or 2, got {i}")

    def swapped(self):
        """The same problem with the two constraints listed in the other order."""
        return Qc2qpInstance(self.Q0, self.b0, self.Q2, self.b2, self.c2,
                             self.Q1, self.b1, self.c1)

    def __eq__(self, other):
        if not isinstance(other, Qc2qpInstance):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("Q0", "b0", "Q1", "b1", "c1", "Q2", "b2", "c2"))

    __hash__ = None


@dataclass(frozen=True)
class HomogenizedInstance:
    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    I00: np.ndarray

    @property
    def dim(self):
        return self.M0.shape[0]

    @property
    def n(self):
        return self.dim - 1

    def form(self, i):
        return (self.M0, self.M1, self.M2)[i]


@dataclass(frozen=True)
class HomogeneousVector:
    t: float
    z: np.ndarray

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(float(x[0]), x[1:].copy())

    def as_array(self):
        return np.concatenate([[self.t], self.z])


def bordered(Q, b, c):
    n = len(b)
    M = np.empty((n + 1, n + 1))
    M[0, 0] = c
    M[0, 1:] = b
    M[1:, 0] = b
    M[1:, 1:] = Q
    return sym(M)


def homogenize(inst):
    n = inst.n
    I00 = np.zeros((n + 1, n + 1))
    I00[0, 0] = 1.0
    return HomogenizedInstance(
        M0=bordered(inst.Q0, inst.b0, 0.0),
        M1=bordered(inst.Q1, inst.b1, inst.c1),
        M2=bordered(inst.Q2, inst.b2, inst.c2),
        I00=sym(I00),
    )


def dehomogenized_instance(h):
    """Inverse of :func:`homogenize` (reads the blocks back)."""
    M0, M1, M2 = h.M0, h.M1, h.M2
    return Qc2qpInstance(M0[1:, 1:], M0[0, 1:], M1[1:, 1:], M1[0, 1:], M1[0, 0],
                         M2[1:, 1:], M2[0, 1:], M2[0, 0])


def evaluate_q(inst, i, z):
    """Value of ``z'Qi z + 2 bi'z + ci``."""
    Q, b, c = inst.quadratic(i)
    z = np.asarray(z, dtype=float)
    if z.shape != (inst.n,):
        raise ValueError(f"z must have length {inst.n}")
    return float(z @ Q @ z + 2.0 * b @ z + c)


def dehomogenize(x, tol=DEHOMOGENIZE_TOL):
    """Map ``x = [t; z]`` back to ``z / t``."""
    if not isinstance(x, HomogeneousVector):
        x = HomogeneousVector.from_array(x)
    if abs(x.t) <= tol:
        raise DegenerateT(f"|t| = {abs(x.t):.3g} <= {tol:.3g}; cannot dehomogenize")
    return np.asarray(x.z, dtype=float) / x.t
