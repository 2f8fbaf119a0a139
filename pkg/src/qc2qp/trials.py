"""Random feasible nonconvex instances and batch gap-test runs.

Instances come from numpy's PCG64 generator seeded with ``seed``. Each
attempt draws, in order, ``Q0, b0, Q1, b1, c1, Q2, b2, c2`` with entries
i.i.d. uniform on ``[-r, r]``; matrices are drawn full and then symmetrized
as ``(A + A') / 2``. An attempt is kept when at least one ``Qi`` is
indefinite and both Slater checks pass. The stream is consumed in the same
order on every platform, so a seed fixes the whole batch.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging

import numpy as np

from .errors import AssumptionViolated, QC2QPError
from .model import Qc2qpInstance, homogenize
from .recovery import run_gap_test
from .sdp import SolverConfig, check_dual_slater, check_primal_slater

log = logging.getLogger(__name__)


class RejectionBudgetExhausted(QC2QPError):
    def __init__(self, attempts):
        super().__init__(f"no acceptable instance after {attempts} attempts")
        self.attempts = attempts


def _draw(rng, n, r):
    def mat():
        A = rng.uniform(-r, r, size=(n, n))
        return (A + A.T) / 2

    def vec():
        return rng.uniform(-r, r, size=n)

    Q0, b0 = mat(), vec()
    Q1, b1, c1 = mat(), vec(), rng.uniform(-r, r)
    Q2, b2, c2 = mat(), vec(), rng.uniform(-r, r)
    return Qc2qpInstance(Q0, b0, Q1, b1, c1, Q2, b2, c2)


def is_nonconvex(inst):
    for Q in (inst.Q0, inst.Q1, inst.Q2):
        lam = np.linalg.eigvalsh(Q)
        if lam[0] < 0 < lam[-1]:
            return True
    return False


def acceptable(inst, cfg=None):
    if not is_nonconvex(inst):
        return False
    h = homogenize(inst)
    cfg = cfg or SolverConfig()
    # the dual check is cheaper and rejects far more often at larger n
    return bool(check_dual_slater(h, cfg)) and bool(check_primal_slater(h, cfg))


def random_instance(rng, n, r=5.0, cfg=None, max_attempts=1000):
    """Next acceptable instance from ``rng`` and the number of draws it took."""
    for attempt in range(1, max_attempts + 1):
        inst = _draw(rng, n, r)
        if acceptable(inst, cfg):
            return inst, attempt
    raise RejectionBudgetExhausted(max_attempts)


def random_instances(count, n, seed, r=5.0, cfg=None, max_attempts=1000):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, n, r, cfg, max_attempts) for _ in range(count)]


@dataclass(frozen=True)
class TrialLine:
    index: int
    attempts: int
    kind: str
    relaxation_value: float
    detail: str

    def format(self):
        return f"{self.index:5d} {self.attempts:4d} {self.kind:8s} {self.relaxation_value: .10e} {self.detail}"


@dataclass(frozen=True)
class TrialReport:
    total: int
    no_gap_count: int
    gap_count: int
    assumption_violations: int
    error_count: int
    seed: int
    n: int
    lines: tuple

    def format(self):
        head = [
            f"seed {self.seed} n {self.n}",
            f"total {self.total} nogap {self.no_gap_count} gap {self.gap_count} "
            f"assumption {self.assumption_violations} error {self.error_count}",
            "index attempts kind relaxation detail",
        ]
        return "\n".join(head + [ln.format() for ln in self.lines]) + "\n"


def _one(args):
    index, attempts, inst, cfg, eps2 = args
    try:
        v = run_gap_test(inst, cfg, eps2)
    except AssumptionViolated as exc:
        return TrialLine(index, attempts, "Assume", float("nan"), exc.which)
    except QC2QPError as exc:
        return TrialLine(index, attempts, "Error", float("nan"), type(exc).__name__)
    detail = v.solution.case_label if v.no_gap else "PropertyI+"
    return TrialLine(index, attempts, v.kind, v.relaxation_value, detail)


def run_trials(count, n, seed, r=5.0, cfg=None, eps2=1e-5, workers=1, max_attempts=1000):
    """Generate ``count`` instances and run the gap test on each.

    With ``workers > 1`` the tests run in separate processes; lines are
    still reported in generation order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    cfg = cfg or SolverConfig()
    insts = random_instances(count, n, seed, r, cfg, max_attempts)
    jobs = [(i, a, inst, cfg, eps2) for i, (inst, a) in enumerate(insts)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            lines = list(pool.map(_one, jobs))
    else:
        lines = [_one(j) for j in jobs]
    kinds = [ln.kind for ln in lines]
    return TrialReport(
        total=count,
        no_gap_count=kinds.count("NoGap"),
        gap_count=kinds.count("Gap"),
        assumption_violations=kinds.count("Assume"),
        error_count=kinds.count("Error"),
        seed=seed,
        n=n,
        lines=tuple(lines),
    )
