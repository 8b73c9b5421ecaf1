"""
Error hierarchy shared by the numerical modules and the command line
"""


class QDiscrimError(Exception):
    """Base class for every error raised by qdiscrim"""


class NotHermitianError(QDiscrimError, ValueError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"Matrix is not Hermitian (max |a - a^dagger| = {deviation:.3e})")


class NoConvergenceError(QDiscrimError, ArithmeticError):
    def __init__(self, sweeps: int, off_diagonal: float):
        self.sweeps = sweeps
        self.off_diagonal = off_diagonal
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_diagonal:.3e})"
        )


class DimensionMismatchError(QDiscrimError, ValueError):
    pass


class InvalidStateError(QDiscrimError, ValueError):
    pass


class ParameterOutOfRangeError(QDiscrimError, ValueError):
    pass


class ZeroNormBranchError(QDiscrimError, ArithmeticError):
    pass


class InconsistentClosedFormError(QDiscrimError, ArithmeticError):
    def __init__(self, expanded: float, compact: float):
        self.gap = abs(expanded - compact)
        super().__init__(f"Closed forms disagree: {expanded!r} vs {compact!r} (gap {self.gap:.3e})")


class InvalidGridError(QDiscrimError, ValueError):
    pass


class ChannelFileError(QDiscrimError):
    """Raised when a channel JSON file cannot be read or parsed"""


class ChannelValidationError(ChannelFileError):
    def __init__(self, name: str, residual: float):
        self.name = name
        self.residual = residual
        super().__init__(
            f"Channel '{name}' violates completeness: residual {residual:.3e} > 1e-9"
        )
