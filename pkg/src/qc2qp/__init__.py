"""Optimality gap test for quadratic programs with two quadratic constraints."""
from .errors import (
    AssumptionViolated,
    DecompositionError,
    DegenerateT,
    InstanceFormatError,
    NoFeasiblePointInBox,
    QC2QPError,
    SolverError,
)
from .gaptest import EPS2, evaluate_property_I, evaluate_property_I_plus, purify
from .instance_io import bundled, emit_instance, parse_instance
from .model import Qc2qpInstance, dehomogenize, evaluate_q, homogenize
from .recovery import GapVerdict, brute_force_oracle, global_oracle, recover, run_gap_test
from .sdp import SolverConfig, build_relaxation, check_dual_slater, check_primal_slater, solve

__version__ = "0.1.0"
