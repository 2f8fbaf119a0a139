"""Recovering a global solution when there is no gap, and the end-to-end test.

When the gap conditions fail, some vector ``x`` in the range of ``X*`` is
isotropic (or nonpositive) for each active constraint form. Such an ``x``
lies in the null space of ``Z*``, so ``x x' / t^2`` satisfies complementarity
and ``z = x[1:] / x[0]`` solves the original problem. Which vector to take
depends on which condition failed first:

========== ================================================================
Rank1Direct ``X*`` already has rank one
Case1       a multiplier is (numerically) zero; balance against the other form
Case2       both multipliers positive, ``rank(X*) >= 3``; joint isotropic vector
Case3       rank two, the ``M2`` values of the ``M1``-balanced pair vanish
Case4       ``rank(Z*) < n - 1``; enlarge ``X*`` by a common null vector first
Case5       the ``M1`` cross term vanishes; one rotation against ``M2``
========== ================================================================
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.optimize import minimize

from .decomp import NONPOSITIVE, ZERO, balanced_decomposition, joint_zero_vector, rotate_pair, spectral_rank_one
from .errors import AssumptionViolated, DecompositionError, DegenerateT, NoFeasiblePointInBox
from .gaptest import EPS2, decompose_against_m1, evaluate_property_I_plus, purify, uniqueness_certificate
from .model import DEHOMOGENIZE_TOL, HomogeneousVector, dehomogenize, evaluate_q, homogenize
from .sdp import SolverConfig, build_relaxation, check_dual_slater, check_primal_slater, solve
from .symmat import eigendecompose

log = logging.getLogger(__name__)

CASE_LABELS = ("Rank1Direct", "Case1", "Case2", "Case3", "Case4", "Case5")


@dataclass(frozen=True)
class RecoveredSolution:
    z: np.ndarray
    objective: float
    q1_value: float
    q2_value: float
    case_label: str
    witness_vector: HomogeneousVector


def _solution(inst, x, label):
    x = np.asarray(x, dtype=float)
    if x[0] < 0:
        x = -x
    z = dehomogenize(x, DEHOMOGENIZE_TOL)
    return RecoveredSolution(
        z=z,
        objective=evaluate_q(inst, 0, z),
        q1_value=evaluate_q(inst, 1, z),
        q2_value=evaluate_q(inst, 2, z),
        case_label=label,
        witness_vector=HomogeneousVector.from_array(x),
    )


def _best_t(vectors, what):
    """Candidate with the largest ``|t|``; complain if all are degenerate."""
    if not vectors:
        raise DecompositionError(f"no candidate vector for {what}")
    x = max(vectors, key=lambda v: abs(v[0]))
    if abs(x[0]) <= DEHOMOGENIZE_TOL:
        raise DegenerateT(f"{what}: every candidate has |t| <= {DEHOMOGENIZE_TOL:g} "
                          "(dual Slater condition is likely violated)")
    return x


def recover(inst, h, pair, report, eps2=None):
    """Globally optimal ``z`` from a purified pair whose gap test failed."""
    eps2 = pair.eps2 if eps2 is None else eps2
    X = pair.Xstar
    M1, M2 = h.M1, h.M2
    rank_x = report.measured["rank_X"]

    if rank_x == 1:
        (x,) = spectral_rank_one(X, eps2).vectors
        return _solution(inst, x, "Rank1Direct")

    if not report.cond_I1:
        # balance against the form whose multiplier is positive (complementarity
        # makes it tight); if neither is positive, keep M1 and ask only x'M1x <= 0
        if pair.y2 <= eps2:
            primary, secondary = M1, M2
            mode = ZERO if pair.y1 > eps2 else NONPOSITIVE
        else:
            primary, secondary = M2, M1
            mode = ZERO
        dec = balanced_decomposition(X, primary, mode, eps2)
        ok = [x for x in dec.vectors if float(x @ secondary @ x) <= eps2]
        return _solution(inst, _best_t(ok, "Case1"), "Case1")

    if rank_x >= 3:
        x = joint_zero_vector(X, M1, M2, eps2)
        return _solution(inst, _best_t([x], "Case2"), "Case2")

    dec = report.decomposition or decompose_against_m1(pair, h)
    x1, x2 = dec.vectors
    m2 = [float(x @ M2 @ x) for x in (x1, x2)]
    if not m2[0] * m2[1] < -eps2 * eps2:
        return _solution(inst, _best_t([x1, x2], "Case3"), "Case3")

    if not report.cond_I2:
        ed = eigendecompose(X + pair.Zstar)
        y = ed.basis[:, -1]
        if ed.eigenvalues[-1] >= eps2:
            raise DecompositionError("X* + Z* is nonsingular; no common null vector")
        V = np.column_stack([x1, x2, y])
        x = joint_zero_vector(V @ V.T, M1, M2, eps2, factor=V)
        return _solution(inst, _best_t([x], "Case4"), "Case4")

    if abs(float(x1 @ M1 @ x2)) <= eps2:
        u, v = rotate_pair(x1, x2, M2)
        return _solution(inst, _best_t([u, v], "Case5"), "Case5")

    raise ValueError("all gap conditions hold; there is nothing to recover")


# ---------------------------------------------------------------- oracle


def _box_arrays(box, n):
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (n, 1))
    if box.shape != (n, 2) or np.any(box[:, 1] <= box[:, 0]):
        raise ValueError(f"box must be {n} increasing intervals")
    return box


def _grid_values(inst, xs, ys):
    X = xs[:, None]
    Y = ys[None, :]

    def q(i):
        Q, b, c = inst.quadratic(i)
        return Q[0, 0] * X * X + 2.0 * Q[0, 1] * X * Y + Q[1, 1] * Y * Y + 2.0 * (b[0] * X + b[1] * Y) + c

    return q(0), q(1), q(2)


def _local_minima(vals, k):
    """Indices of up to ``k`` best grid points that beat all eight neighbours."""
    P = np.pad(vals, 1, constant_values=np.inf)
    c = P[1:-1, 1:-1]
    is_min = np.isfinite(c)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = P[1 + di:P.shape[0] - 1 + di, 1 + dj:P.shape[1] - 1 + dj]
            is_min &= c <= nb
    idx = np.argwhere(is_min)
    order = np.argsort(vals[is_min])[:k]
    return [tuple(i) for i in idx[order]]


def brute_force_oracle(inst, box=(-10.0, 10.0), grid_points=2001, refine_iters=60,
                       slack=1e-9, starts=8, polish=True):
    """Global minimum of a two-variable instance by grid scan plus local refinement.

    Feasibility allows ``slack`` on each constraint. Every grid local minimum
    among the best ``starts`` is refined by coordinate descent (step halves
    after a failed sweep, ``refine_iters`` times) and then, if ``polish``,
    by SLSQP; only feasible improvements are kept.
    """
    if inst.n != 2:
        raise ValueError("the oracle handles n == 2 only")
    box = _box_arrays(box, 2)
    xs = np.linspace(box[0, 0], box[0, 1], grid_points)
    ys = np.linspace(box[1, 0], box[1, 1], grid_points)
    q0, q1, q2 = _grid_values(inst, xs, ys)
    feas = (q1 <= slack) & (q2 <= slack)
    if not feas.any():
        raise NoFeasiblePointInBox(f"no grid point of {box.tolist()} is feasible")
    vals = np.where(feas, q0, np.inf)
    del q0, q1, q2

    def feasible(z):
        return evaluate_q(inst, 1, z) <= slack and evaluate_q(inst, 2, z) <= slack

    def f(z):
        return evaluate_q(inst, 0, z)

    steps = np.array([xs[1] - xs[0], ys[1] - ys[0]])
    best_z, best_v = None, math.inf
    for i, j in _local_minima(vals, starts):
        z = np.array([xs[i], ys[j]])
        v = f(z)
        h = steps.copy()
        for _ in range(refine_iters):
            moved = False
            for k in range(2):
                for sgn in (1.0, -1.0):
                    trial = z.copy()
                    trial[k] += sgn * h[k]
                    if feasible(trial):
                        tv = f(trial)
                        if tv < v:
                            z, v, moved = trial, tv, True
            if not moved:
                h *= 0.5
        if polish:
            cons = [{"type": "ineq", "fun": lambda w, i=i: -evaluate_q(inst, i, w)} for i in (1, 2)]
            res = minimize(f, z, method="SLSQP", constraints=cons,
                           options={"ftol": 1e-14, "maxiter": 200})
            if res.success or res.status == 8:
                zp = np.asarray(res.x)
                if feasible(zp) and f(zp) < v:
                    z, v = zp, f(zp)
        if v < best_v:
            best_z, best_v = z, v
    return best_z, float(best_v)


def lagrangian_box(inst, y1, y2, value, pad=1e-6):
    """Box holding every feasible ``z`` with objective at most ``value``.

    For ``y1, y2 >= 0`` with ``H = Q0 + y1 Q1 + y2 Q2`` definite, the
    Lagrangian bounds the objective from below on the feasible set, and its
    sublevel set at ``value`` is an ellipsoid.
    """
    H = inst.Q0 + y1 * inst.Q1 + y2 * inst.Q2
    xi = inst.b0 + y1 * inst.b1 + y2 * inst.b2
    center = -np.linalg.solve(H, xi)
    lmin = y1 * inst.c1 + y2 * inst.c2 + float(xi @ center)
    rad2 = max(value - lmin, 0.0)
    half = np.sqrt(rad2 * np.diag(np.linalg.inv(H))) + pad
    return np.column_stack([center - half, center + half])


def global_oracle(inst, witness, grid_points=801, start_box=(-10.0, 10.0), max_width=1e4):
    """Oracle on a box that provably contains the global minimizer.

    ``witness = (y0, y1, y2)`` is a strictly feasible dual point (from
    :func:`check_dual_slater`). A first scan of ``start_box`` supplies a
    feasible value; the Lagrangian box for that value is then scanned.
    """
    _, y1, y2 = witness
    try:
        z, v = brute_force_oracle(inst, start_box, grid_points)
    except NoFeasiblePointInBox:
        z, v = brute_force_oracle(inst, (-1e3, 1e3), grid_points)
    box = lagrangian_box(inst, y1, y2, v)
    if np.any(box[:, 1] - box[:, 0] > max_width):
        log.warning("certified box %s is very wide; grid may be coarse", box.tolist())
    try:
        z2, v2 = brute_force_oracle(inst, box, grid_points)
    except NoFeasiblePointInBox:
        return z, v
    return (z2, v2) if v2 < v else (z, v)


# ---------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class GapVerdict:
    kind: str
    relaxation_value: float
    report: object
    solution: RecoveredSolution = None
    certificate: object = None
    relaxation: object = field(default=None, repr=False)
    pair: object = field(default=None, repr=False)
    slater: tuple = field(default=(), repr=False)

    @property
    def no_gap(self):
        return self.kind == "NoGap"

    @property
    def reports(self):
        """Property I and Property I+ reports; one decomposition serves both."""
        return {"property_I": self.report.property_I, "property_I_plus": self.report.property_I_plus}


def run_gap_test(inst, cfg=None, eps2=EPS2, check_assumptions=True):
    """Slater checks, relaxation solve, purification, gap test, then recovery."""
    cfg = cfg or SolverConfig()
    h = homogenize(inst)
    slater = ()
    if check_assumptions:
        ps = check_primal_slater(h, cfg)
        if not ps:
            raise AssumptionViolated("primal", ps.diagnostics)
        ds = check_dual_slater(h, cfg)
        if not ds:
            raise AssumptionViolated("dual", ds.diagnostics)
        slater = (ps, ds)
    sol = solve(build_relaxation(h), cfg)
    pair = purify(sol, eps2, cfg.eps1)
    report = evaluate_property_I_plus(pair, h)
    log.info("relaxation value %.10g, flags %s", sol.primal_objective, report.recompute_flags())
    if report.property_I_plus:
        cert = uniqueness_certificate(report, h)
        return GapVerdict("Gap", sol.primal_objective, report, None, cert, sol, pair, slater)
    rec = recover(inst, h, pair, report, eps2)
    return GapVerdict("NoGap", sol.primal_objective, report, rec, None, sol, pair, slater)
