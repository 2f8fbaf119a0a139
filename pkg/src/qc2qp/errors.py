"""Exception hierarchy shared by the solver, decomposition and recovery code."""


class QC2QPError(Exception):
    """Base class for all library errors."""


class EigenConvergenceError(QC2QPError):
    """Jacobi sweeps did not drive the off-diagonal mass to zero."""


class SolverError(QC2QPError):
    """Interior-point solve failed."""


class MaxIterations(SolverError):
    pass


class PrimalInfeasible(SolverError):
    """Dual iterates diverge; the relaxation likely has no strictly feasible point."""


class DualInfeasible(SolverError):
    """Primal iterates diverge; the dual likely has no strictly feasible point."""


class DecompositionError(QC2QPError):
    pass


class DecompositionStall(DecompositionError):
    """No admissible pair is left while some vector still misses its target."""


class NoCommonIsotropicVector(DecompositionError):
    pass


class DegenerateT(QC2QPError):
    """Every candidate recovery vector has a vanishing homogenizing coordinate."""


class AssumptionViolated(QC2QPError):
    def __init__(self, which, diagnostics=""):
        self.which = which
        self.diagnostics = diagnostics
        msg = f"{which} Slater condition not verified"
        if diagnostics:
            msg += f": {diagnostics}"
        super().__init__(msg)


class NoFeasiblePointInBox(QC2QPError):
    pass


class InstanceFormatError(QC2QPError):
    """Instance document does not match the JSON schema."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
