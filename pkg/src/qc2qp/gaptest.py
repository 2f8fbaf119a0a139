"""Purification of approximate relaxation solutions and the gap conditions.

A purified pair has every eigenvalue of ``X`` and ``Z`` either zero or at
least ``eps2``. On such a pair the test checks, in this order,

1. ``y1 > eps2`` and ``y2 > eps2``
2. ``rank(Z, eps2) == n - 1``
3. ``rank(X, eps2) == 2``

and only then builds one decomposition ``X = x1 x1' + x2 x2'`` with
``|M1 . xi xi'| < eps2`` and checks

4. ``(M2 . x1 x1')(M2 . x2 x2') < -eps2**2``
5. ``|M1 . x1 x2'| > eps2``.

All five holding means the relaxation has an optimality gap.
"""
from dataclasses import dataclass, field

import numpy as np

from .decomp import ZERO, balanced_decomposition
from .symmat import eigendecompose, max_abs, numerical_rank, sym

EPS2 = 1e-5


@dataclass(frozen=True)
class PurifiedPair:
    Xstar: np.ndarray
    Zstar: np.ndarray
    y0: float
    y1: float
    y2: float
    eps1: float
    eps2: float

    # let a purified pair be purified again
    @property
    def X(self):
        return self.Xstar

    @property
    def Z(self):
        return self.Zstar


def _purify_matrix(A, eps2):
    ed = eigendecompose(A)
    lam = np.where(ed.eigenvalues >= eps2, ed.eigenvalues, 0.0)
    return sym((ed.basis * lam) @ ed.basis.T)


def purify(sol, eps2=EPS2, eps1=None):
    """Zero the eigenvalues of ``X`` and ``Z`` below ``eps2``; pass ``y`` through."""
    if eps1 is None:
        eps1 = getattr(sol, "eps1", float("nan"))
    return PurifiedPair(
        Xstar=_purify_matrix(sol.X, eps2),
        Zstar=_purify_matrix(sol.Z, eps2),
        y0=float(sol.y0), y1=float(sol.y1), y2=float(sol.y2),
        eps1=float(eps1), eps2=float(eps2),
    )


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the condition checks with every measured quantity.

    ``measured`` keys: ``y1``, ``y2``, ``rank_X``, ``rank_Z``, ``n`` always;
    ``m1_values``, ``m2_values``, ``m2_product``, ``m1_cross``, ``m2_cross``
    and ``t_values`` once a decomposition has been built.
    """

    cond_I1: bool
    cond_I2: bool
    cond_I3: bool
    cond_4_equalities: bool
    cond_4_product: bool
    cond_4_cross: bool
    measured: dict
    eps2: float
    decomposition: object = field(default=None, repr=False)

    @property
    def property_I(self):
        return (self.cond_I1 and self.cond_I2 and self.cond_I3
                and self.cond_4_equalities and self.cond_4_product)

    @property
    def property_I_plus(self):
        return self.property_I and self.cond_4_cross

    holds = property_I_plus

    def recompute_flags(self):
        """Flags re-derived from ``measured`` alone."""
        m, e = self.measured, self.eps2
        i1 = m["y1"] > e and m["y2"] > e
        i2 = m["rank_Z"] == m["n"] - 1
        i3 = m["rank_X"] == 2
        if "m1_values" not in m:
            return (i1, i2, i3, False, False, False)
        eq = all(abs(v) < e for v in m["m1_values"])
        prod = m["m2_product"] < -e * e
        cross = abs(m["m1_cross"]) > e
        return (i1, i2, i3, eq, prod, cross)


def _decomposition_measures(decomposition, h):
    x1, x2 = decomposition.vectors
    m1 = [float(x @ h.M1 @ x) for x in (x1, x2)]
    m2 = [float(x @ h.M2 @ x) for x in (x1, x2)]
    return {
        "m1_values": m1,
        "m2_values": m2,
        "m2_product": m2[0] * m2[1],
        "m1_cross": float(x1 @ h.M1 @ x2),
        "m2_cross": float(x1 @ h.M2 @ x2),
        "t_values": [float(x1[0]), float(x2[0])],
    }


def _base_measures(pair, h):
    return {
        "y1": pair.y1,
        "y2": pair.y2,
        "rank_X": numerical_rank(pair.Xstar, pair.eps2),
        "rank_Z": numerical_rank(pair.Zstar, pair.eps2),
        "n": h.n,
    }


def _report(measured, eps2, decomposition):
    i1 = measured["y1"] > eps2 and measured["y2"] > eps2
    i2 = measured["rank_Z"] == measured["n"] - 1
    i3 = measured["rank_X"] == 2
    if decomposition is None:
        return PropertyReport(i1, i2, i3, False, False, False, measured, eps2, None)
    eq = all(abs(v) < eps2 for v in measured["m1_values"])
    prod = measured["m2_product"] < -eps2 * eps2
    cross = abs(measured["m1_cross"]) > eps2
    return PropertyReport(i1, i2, i3, eq, prod, cross, measured, eps2, decomposition)


def decompose_against_m1(pair, h):
    """The single decomposition of ``X*`` with both terms ``M1``-isotropic."""
    return balanced_decomposition(pair.Xstar, h.M1, ZERO, pair.eps2)


def evaluate_property_I_plus(pair, h):
    """Check conditions 1-3, and 4-5 on one decomposition only if 1-3 hold."""
    measured = _base_measures(pair, h)
    first = _report(measured, pair.eps2, None)
    if not (first.cond_I1 and first.cond_I2 and first.cond_I3):
        return first
    dec = decompose_against_m1(pair, h)
    measured.update(_decomposition_measures(dec, h))
    return _report(measured, pair.eps2, dec)


def evaluate_property_I(pair, h):
    """Same checks; the verdict is :attr:`PropertyReport.property_I`."""
    return evaluate_property_I_plus(pair, h)


@dataclass(frozen=True)
class UniquenessCertificate:
    gamma: np.ndarray
    determinant: float
    nullspace_dim_of_AV: int
    formula_determinant: float


def uniqueness_certificate(report, h):
    """3x3 system whose nonsingularity shows the rank-2 ``X*`` is the unique solution.

    Rows are the ``M1`` values ``[x1'M1x1, 2 x1'M1x2, x2'M1x2]``, the ``M2``
    values ``[a, 2 x1'M2x2, -a]`` with ``a = x1'M2x1``, and ``[t1^2, 2 t1 t2, t2^2]``.
    A perturbation ``V D V'`` of ``X* = V V'`` keeping every constraint value
    fixed needs ``gamma @ (D11, D12, D22) = 0``.
    """
    dec = report.decomposition
    if dec is None or len(dec.vectors) != 2:
        raise ValueError("report carries no rank-2 decomposition")
    x1, x2 = dec.vectors
    t1, t2 = float(x1[0]), float(x2[0])
    alpha = float(x1 @ h.M2 @ x1)
    cross1 = float(x1 @ h.M1 @ x2)
    gamma = np.array([
        [float(x1 @ h.M1 @ x1), 2.0 * cross1, float(x2 @ h.M1 @ x2)],
        [alpha, 2.0 * float(x1 @ h.M2 @ x2), -alpha],
        [t1 * t1, 2.0 * t1 * t2, t2 * t2],
    ])
    det = float(np.linalg.det(gamma))
    formula = -(2.0 * cross1) * (alpha * (t1 * t1 + t2 * t2))
    eps2 = report.eps2
    scale = 1.0 + max_abs(gamma)
    if abs(det) > eps2 ** 3 * scale:
        null = 0
    else:
        s = np.linalg.svd(gamma, compute_uv=False)
        null = max(1, int(np.sum(s <= eps2 * scale)))
    return UniquenessCertificate(gamma, det, null, formula)
