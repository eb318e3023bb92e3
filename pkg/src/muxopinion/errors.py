"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MuxOpinionError(Exception):
    exit_code = 1


class InputError(MuxOpinionError, ValueError):
    """Malformed or out-of-range input (bad file line, negative weight, bad key)."""

    exit_code = 1


class ConditionError(MuxOpinionError):
    """A model condition is violated (imitation sum above 1, row sum of Ebar >= 1)."""

    exit_code = 2


class NumericalError(MuxOpinionError, ArithmeticError):
    """Non-convergence, singular or ill-conditioned systems, divergence."""

    exit_code = 3

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class CapacityError(MuxOpinionError, MemoryError):
    """Requested operation would exceed the configured size cap."""

    exit_code = 4
