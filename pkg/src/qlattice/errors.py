"""Exception hierarchy shared by every qlattice module."""


class QLatticeError(Exception):
    """Base class for all library errors."""


class ParameterError(QLatticeError, ValueError):
    pass


class PoleError(QLatticeError, ZeroDivisionError):
    """A product or series hit a vanishing denominator."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StepError(QLatticeError, ZeroDivisionError):
    """A lattice increment vanished where a divided difference needs it."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class DomainError(QLatticeError, ValueError):
    pass


class ConvergenceError(QLatticeError, ArithmeticError):
    pass


class SupportError(QLatticeError, ValueError):
    pass


class DegeneracyError(QLatticeError, ArithmeticError):
    """Interpolation did not produce the expected polynomial."""


class SingularWeightError(QLatticeError, ZeroDivisionError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InconclusiveError(QLatticeError, ArithmeticError):
    pass


class SolverError(QLatticeError, ArithmeticError):
    """Linear solve stayed ill-conditioned after resampling."""


class InconsistencyError(QLatticeError, ArithmeticError):
    """A solved relation failed held-out validation."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(QLatticeError, ValueError):
    pass
