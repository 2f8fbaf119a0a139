"""Small dense primal-dual interior-point solver for the semidefinite relaxation.

The relaxation of the homogenized problem is::

    minimize    M0 . X
    subject to  M1 . X <= 0,  M2 . X <= 0,  I00 . X = 1,  X psd

and its dual::

    maximize    y0
    subject to  Z = M0 - y0 I00 + y1 M1 + y2 M2 psd,  y1, y2 >= 0.

:func:`solve` handles any :class:`ConeProgram` whose constraints are ``<=`` or
``=`` rows on one PSD block. Inequalities get slack variables in the
nonnegative orthant and the iteration is Mehrotra predictor-corrector with
Nesterov-Todd scaling.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.optimize import minimize

from .errors import DualInfeasible, MaxIterations, PrimalInfeasible
from .symmat import is_psd, max_abs, sym

log = logging.getLogger(__name__)

LE = "<="
EQ = "="


@dataclass(frozen=True)
class Constraint:
    coefficient: np.ndarray
    rhs: float
    sense: str = LE


@dataclass(frozen=True)
class ConeProgram:
    cost: np.ndarray
    constraints: tuple

    def __post_init__(self):
        d = self.cost.shape[0]
        for k, con in enumerate(self.constraints):
            if con.coefficient.shape != (d, d):
                raise ValueError(f"constraint {k} has shape {con.coefficient.shape}, expected {(d, d)}")
            if con.sense not in (LE, EQ):
                raise ValueError(f"constraint {k}: unknown sense {con.sense!r}")

    @property
    def psd_dim(self):
        return self.cost.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    eps1: float = 1.49e-8
    max_iterations: int = 200
    step_fraction: float = 0.98

    def __post_init__(self):
        if not self.eps1 > 0:
            raise ValueError("eps1 must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class Residuals:
    primal_infeas: float
    dual_infeas: float
    relative_gap: float


@dataclass(frozen=True)
class PrimalDualSolution:
    """Primal ``X`` and dual ``(Z, y)`` of a :class:`ConeProgram`.

    ``y`` follows the constraint order, signed so that
    ``Z = C - sum_eq y_k A_k + sum_le y_k A_k``; inequality multipliers are
    nonnegative. For programs from :func:`build_relaxation` the properties
    ``y0, y1, y2`` give the multipliers of ``I00``, ``M1`` and ``M2``.
    """

    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    primal_objective: float
    dual_objective: float
    residuals: Residuals
    iterations: int

    @property
    def y1(self):
        return float(self.y[0])

    @property
    def y2(self):
        return float(self.y[1])

    @property
    def y0(self):
        return float(self.y[2])


def build_relaxation(h):
    return ConeProgram(
        cost=h.M0,
        constraints=(
            Constraint(h.M1, 0.0, LE),
            Constraint(h.M2, 0.0, LE),
            Constraint(h.I00, 1.0, EQ),
        ),
    )


def _step_to_boundary(L, dX):
    """Largest alpha with ``L L' + alpha dX`` psd (``inf`` if unbounded)."""
    Linv = np.linalg.inv(L)
    w = np.linalg.eigvalsh(Linv @ dX @ Linv.T)
    lo = w[0]
    return math.inf if lo >= 0 else -1.0 / lo


def _orthant_step(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def _chol(a):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    scale = max(max_abs(a), 1.0)
    for jitter in (1e-15, 1e-14, 1e-13, 1e-12):
        try:
            return np.linalg.cholesky(a + jitter * scale * np.eye(a.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("matrix lost positive definiteness")


class _Session:
    """Mutable iterate state of one solve."""

    def __init__(self, prog, cfg):
        self.cfg = cfg
        self.C = np.asarray(prog.cost, dtype=float)
        self.d = prog.psd_dim
        cons = prog.constraints
        self.m = len(cons)
        self.A = np.array([c.coefficient for c in cons], dtype=float)
        self.b = np.array([c.rhs for c in cons], dtype=float)
        self.le = [k for k, c in enumerate(cons) if c.sense == LE]
        self.k = len(self.le)
        self.B = np.zeros((self.m, self.k))
        for j, row in enumerate(self.le):
            self.B[row, j] = 1.0
        self.Avec = self.A.reshape(self.m, -1)

        start = 1.0 + max_abs(self.C)
        self.X = start * np.eye(self.d)
        self.Z = start * np.eye(self.d)
        self.xl = np.ones(self.k)
        self.zl = np.ones(self.k)
        self.w = np.zeros(self.m)
        self.nu = self.d + self.k

    def Aop(self, X):
        return self.Avec @ X.reshape(-1)

    def Aadj(self, w):
        return np.tensordot(w, self.A, axes=1)

    def residuals(self):
        rp = self.b - self.Aop(self.X) - self.B @ self.xl
        Rd = self.C - self.Aadj(self.w) - self.Z
        rdl = -self.B.T @ self.w - self.zl
        return rp, Rd, rdl

    def objectives(self):
        return float(np.sum(self.C * self.X)), float(self.b @ self.w)

    def mu(self):
        return (float(np.sum(self.X * self.Z)) + float(self.xl @ self.zl)) / self.nu

    def solve(self):
        cfg = self.cfg
        bnorm = 1.0 + max_abs(self.b)
        cnorm = 1.0 + max_abs(self.C)
        best = math.inf
        stall = 0
        for it in range(cfg.max_iterations + 1):
            rp, Rd, rdl = self.residuals()
            pinf = max_abs(rp) / bnorm
            dinf = max(max_abs(Rd), max_abs(rdl)) / cnorm
            pobj, dobj = self.objectives()
            gap = abs(pobj - dobj) / (1.0 + abs(pobj))
            compl = self.mu() * self.nu / (1.0 + abs(pobj) + abs(dobj))
            log.debug("it %3d pobj %+.10e dobj %+.10e pinf %.2e dinf %.2e gap %.2e",
                      it, pobj, dobj, pinf, dinf, gap)
            if pinf <= cfg.eps1 and dinf <= cfg.eps1 and gap <= cfg.eps1 and compl <= cfg.eps1:
                return self._result(it, pinf, dinf, gap)
            if it == cfg.max_iterations:
                break

            if max_abs(self.X) > 1e12:
                raise DualInfeasible("primal iterates diverge; the dual has no strictly feasible point")
            if max_abs(self.Z) > 1e12 or max_abs(self.w) > 1e12:
                raise PrimalInfeasible("dual iterates diverge; the primal has no strictly feasible point")
            worst = max(pinf, dinf, gap)
            if worst < 0.9 * best:
                best = worst
                stall = 0
            else:
                stall += 1
                if stall >= 30:
                    if pinf > cfg.eps1 and pinf >= dinf:
                        raise PrimalInfeasible(f"primal residual stalled at {pinf:.3g}")
                    if dinf > cfg.eps1:
                        raise DualInfeasible(f"dual residual stalled at {dinf:.3g}")
                    raise MaxIterations(f"no progress for 30 iterations (gap {gap:.3g})")
            self._step(rp, Rd, rdl)
        raise MaxIterations(f"not converged after {cfg.max_iterations} iterations")

    def _step(self, rp, Rd, rdl):
        X, Z, xl, zl = self.X, self.Z, self.xl, self.zl
        L = _chol(X)
        Lz = _chol(Z)
        # NT scaling W = G G' with G' Z G = G^{-1} X G^{-T} = diag(lam);
        # L' Z L = (Lz' L)' (Lz' L) = V diag(lam^2) V'
        _, lam, Vt = np.linalg.svd(Lz.T @ L)
        G = L @ Vt.T @ np.diag(lam ** -0.5)
        Ginv = np.diag(lam ** 0.5) @ Vt @ np.linalg.inv(L)
        W = G @ G.T
        D = xl / zl

        WA = np.array([W @ Ak @ W for Ak in self.A])
        H = WA.reshape(self.m, -1) @ self.Avec.T
        H = 0.5 * (H + H.T) + self.B @ np.diag(D) @ self.B.T
        Hc = _chol(H)

        denom = 0.5 * (lam[:, None] + lam[None, :])
        WRdW = W @ Rd @ W

        def raw(rp, Rd, rdl, WRdW, R, Rl):
            Rc = G @ (R / denom) @ G.T
            rhs = rp - self.Aop(Rc - WRdW) - self.B @ (Rl - D * rdl)
            dw = np.linalg.solve(Hc.T, np.linalg.solve(Hc, rhs))
            dZ = Rd - self.Aadj(dw)
            dZ = 0.5 * (dZ + dZ.T)
            dX = Rc - W @ dZ @ W
            dX = 0.5 * (dX + dX.T)
            dzl = rdl - self.B.T @ dw
            dxl = Rl - D * dzl
            return dX, dxl, dw, dZ, dzl

        zero_d, zero_k = np.zeros((self.d, self.d)), np.zeros(self.k)

        def direction(R, Rl):
            dX, dxl, dw, dZ, dzl = raw(rp, Rd, rdl, WRdW, R, Rl)
            # one refinement pass on the primal equations; H is badly
            # conditioned once X is close to rank deficient
            e = rp - self.Aop(dX) - self.B @ dxl
            cX, cxl, cw, cZ, czl = raw(e, zero_d, zero_k, zero_d, zero_d, zero_k)
            return dX + cX, dxl + cxl, dw + cw, dZ + cZ, dzl + czl

        def steps(dX, dxl, dZ, dzl):
            ap = min(_step_to_boundary(L, dX), _orthant_step(xl, dxl))
            ad = min(_step_to_boundary(Lz, dZ), _orthant_step(zl, dzl))
            return ap, ad

        mu = self.mu()
        Lam = np.diag(lam)
        # predictor
        dX, dxl, dw, dZ, dzl = direction(-Lam @ Lam, -xl)
        ap, ad = steps(dX, dxl, dZ, dzl)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (np.sum((X + ap * dX) * (Z + ad * dZ)) + (xl + ap * dxl) @ (zl + ad * dzl)) / self.nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        dXs = Ginv @ dX @ Ginv.T
        dZs = G.T @ dZ @ G
        corr = 0.5 * (dXs @ dZs + dZs @ dXs)
        R = sigma * mu * np.eye(self.d) - Lam @ Lam - corr
        Rl = (sigma * mu - xl * zl - dxl * dzl) / zl
        dX, dxl, dw, dZ, dzl = direction(R, Rl)
        ap, ad = steps(dX, dxl, dZ, dzl)
        tau = self.cfg.step_fraction
        ap = min(1.0, tau * ap)
        ad = min(1.0, tau * ad)

        self.X = X + ap * dX
        self.xl = xl + ap * dxl
        self.w = self.w + ad * dw
        self.Z = Z + ad * dZ
        self.zl = zl + ad * dzl
        self.X = 0.5 * (self.X + self.X.T)
        self.Z = 0.5 * (self.Z + self.Z.T)

    def _result(self, it, pinf, dinf, gap):
        y = self.w.copy()
        y[self.le] = -y[self.le]
        pobj, dobj = self.objectives()
        return PrimalDualSolution(
            X=sym(self.X),
            Z=sym(self.Z),
            y=y,
            primal_objective=pobj,
            dual_objective=dobj,
            residuals=Residuals(pinf, dinf, gap),
            iterations=it,
        )


def solve(prog, cfg=None):
    """Solve ``prog`` to relative accuracy ``cfg.eps1``.

    Raises :class:`MaxIterations` on non-convergence and
    :class:`PrimalInfeasible` / :class:`DualInfeasible` when the iterates
    diverge or the residuals stall for 30 iterations.
    """
    cfg = cfg or SolverConfig()
    return _Session(prog, cfg).solve()


def kkt_report(prog, sol):
    """Absolute KKT residuals of a solution, for verification.

    Keys: ``min_eig_X``, ``min_eig_Z``, ``min_y_le``, ``dual_residual``,
    ``primal_residual``, ``complementarity_XZ``, ``complementarity_le``
    (largest ``|y_k (A_k . X - b_k)|``) and ``scale``.
    """
    C = prog.cost
    Zrec = np.array(C, dtype=float)
    prim = []
    comp = []
    le_y = []
    for k, con in enumerate(prog.constraints):
        val = float(np.sum(con.coefficient * sol.X)) - con.rhs
        if con.sense == EQ:
            Zrec = Zrec - sol.y[k] * con.coefficient
            prim.append(abs(val))
        else:
            Zrec = Zrec + sol.y[k] * con.coefficient
            prim.append(max(val, 0.0))
            comp.append(abs(sol.y[k] * val))
            le_y.append(sol.y[k])
    return {
        "min_eig_X": float(np.linalg.eigvalsh(sol.X)[0]),
        "min_eig_Z": float(np.linalg.eigvalsh(sol.Z)[0]),
        "min_y_le": min(le_y) if le_y else 0.0,
        "dual_residual": max_abs(Zrec - sol.Z),
        "primal_residual": max(prim) if prim else 0.0,
        "complementarity_XZ": abs(float(np.sum(sol.X * sol.Z))),
        "complementarity_le": max(comp) if comp else 0.0,
        "scale": 1.0 + abs(sol.primal_objective) + abs(sol.dual_objective),
        "cost_scale": 1.0 + max_abs(C),
    }


# ---------------------------------------------------------------- Slater checks


@dataclass(frozen=True)
class SlaterCheck:
    holds: bool
    margin: float
    witness: tuple = None
    diagnostics: str = ""
    solution: PrimalDualSolution = field(default=None, repr=False)

    def __bool__(self):
        return self.holds


def check_primal_slater(h, cfg=None):
    """Look for ``X`` positive definite with ``Mi . X < 0`` and ``I00 . X = 1``.

    Solves ``max s`` subject to ``Mi . X <= -s``, ``X >= s I`` and ``tr X = 1``
    (scaling ``X`` to ``X00 = 1`` afterwards is harmless when ``s > 0``).
    Substituting ``X = X' + s I`` leaves a program in ``X'`` alone::

        minimize tr X'  s.t.  (Mi - k_i I) . X' <= -k_i,  X' psd,

    with ``k_i = (tr Mi + 1)/(n+1)`` and ``s = (1 - tr X')/(n+1)``. Both that
    program and its dual are strictly feasible, so the solver is well posed.
    """
    cfg = cfg or SolverConfig()
    d = h.dim
    eye = np.eye(d)
    cons = []
    for M in (h.M1, h.M2):
        kappa = (np.trace(M) + 1.0) / d
        cons.append(Constraint(sym(M - kappa * eye), -kappa, LE))
    prog = ConeProgram(cost=sym(eye), constraints=tuple(cons))
    sol = solve(prog, cfg)
    s = (1.0 - np.trace(sol.X)) / d
    threshold = cfg.eps1 * (1.0 + max(max_abs(h.M1), max_abs(h.M2)))
    holds = bool(s > threshold)
    witness = None
    if holds:
        X = sol.X + s * eye
        witness = (sym(X / X[0, 0]),)
    diag = f"max margin s = {s:.6g} (threshold {threshold:.3g})"
    return SlaterCheck(holds, float(s), witness, diag, sol)


def _simplex_margins(Q, S):
    """``lambda_min(s0 Q0 + s1 Q1 + s2 Q2)`` for each row ``s`` of ``S``."""
    H = np.einsum("kj,jab->kab", S, Q)
    return np.linalg.eigvalsh(H)[:, 0]


def _softmax(p):
    e = np.exp(np.concatenate([[0.0], p]) - max(0.0, float(np.max(p))))
    return e / e.sum()


def check_dual_slater(h, cfg=None):
    """Search for ``y1, y2 >= 0`` with ``Q0 + y1 Q1 + y2 Q2`` positive definite.

    With ``s = (1, y1, y2) / (1 + y1 + y2)`` the search maximizes
    ``lambda_min(s0 Q0 + s1 Q1 + s2 Q2)``, a concave function on the unit
    simplex: a 16-step simplex grid, then Nelder-Mead from the best grid point.
    The maximizer is then pulled toward the barycenter so that ``y1, y2 > 0``;
    by concavity this keeps at least half the margin. When a definite combination exists, any
    ``y0`` below ``y1 c1 + y2 c2 - xi'H^{-1}xi`` completes a strictly feasible
    dual point; the witness uses a unit margin.

    A ``False`` result means no witness was found, not that none exists.
    """
    cfg = cfg or SolverConfig()
    Q = np.array([h.M0[1:, 1:], h.M1[1:, 1:], h.M2[1:, 1:]])
    k = 16
    S = np.array([(k - i - j, i, j) for i in range(k + 1) for j in range(k + 1 - i)], float) / k
    vals = _simplex_margins(Q, S)
    top = int(np.argmax(vals))
    best_s, best = S[top], float(vals[top])

    # every simplex point is within l1 distance 3/k of the grid, and the
    # margin is Lipschitz in s with constant max ||Qj||_2; far below zero
    # the grid alone proves there is no witness
    lip = max(float(np.linalg.norm(Qj, 2)) for Qj in Q)
    threshold = cfg.eps1 * (1.0 + max_abs(Q))
    if best + 3.0 * lip / k < 0.0:
        diag = (f"no combination s0 Q0 + s1 Q1 + s2 Q2 is definite "
                f"(grid bound {best + 3.0 * lip / k:.3g} < 0)")
        return SlaterCheck(False, best, None, diag)

    def neg(p):
        return -float(_simplex_margins(Q, _softmax(p)[None, :])[0])

    s0 = np.clip(best_s, 1e-8, None)
    start = np.log(s0[1:] / s0[0])
    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": 400})
    if -res.fun > best:
        best_s, best = _softmax(res.x), float(-res.fun)

    if best > 0:
        # move toward the barycenter so that s0, y1 and y2 are all positive
        centre = np.full(3, 1.0 / 3.0)
        low = float(_simplex_margins(Q, centre[None, :])[0])
        tau = 0.5 if low >= best else min(0.5, 0.5 * best / (best - low))
        best_s = (1 - tau) * best_s + tau * centre
        best = float(_simplex_margins(Q, best_s[None, :])[0])
    margin = best
    y1, y2 = best_s[1:] / max(best_s[0], 1e-300)
    if not margin > threshold:
        diag = (f"no positive (y1, y2) makes Q0 + y1 Q1 + y2 Q2 definite in the search "
                f"(best normalized min eigenvalue {margin:.3g} at y1={y1:.3g}, y2={y2:.3g})")
        return SlaterCheck(False, float(margin), None, diag)

    H = Q[0] + y1 * Q[1] + y2 * Q[2]
    b0, b1, b2 = h.M0[0, 1:], h.M1[0, 1:], h.M2[0, 1:]
    c1, c2 = h.M1[0, 0], h.M2[0, 0]
    xi = b0 + y1 * b1 + y2 * b2
    y0 = float(y1 * c1 + y2 * c2 - xi @ np.linalg.solve(H, xi) - 1.0)
    S = h.M0 - y0 * h.I00 + y1 * h.M1 + y2 * h.M2
    if not is_psd(S, 0.0) or np.linalg.eigvalsh(S)[0] <= 0:
        # Schur complement is 1, so this only trips on severe ill-conditioning
        return SlaterCheck(False, float(margin), None, "witness failed the definiteness check")
    diag = f"normalized min eigenvalue {margin:.6g} at y1={y1:.6g}, y2={y2:.6g}"
    return SlaterCheck(True, float(margin), (y0, float(y1), float(y2)), diag)
