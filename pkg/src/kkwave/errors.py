"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes (see :mod:`kkwave.cli`).
"""


class KKWaveError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(KKWaveError, ValueError):
    """Invalid grid, packet, solver or run-config parameters."""

    exit_code = 2


class PreconditionError(ConfigurationError):
    """Inputs violate an operation's documented precondition."""


class InvalidSpecError(ConfigurationError):
    """A potential or force specification is malformed."""


class UnsupportedSpecError(ConfigurationError):
    """The operation is not defined for this kind of potential/force."""


class StepSizeError(ConfigurationError):
    """Time step too large for the position-diagonal phase factor."""


class ConditionsNotMetError(ConfigurationError):
    """The force violates the zero-impulse/zero-displacement conditions."""


class UndefinedMeanError(KKWaveError, ValueError):
    """Expectation value requested for a zero-norm field."""


class ConvergenceError(KKWaveError, RuntimeError):
    """A solver or convergence sweep failed its accuracy target."""

    exit_code = 3


class InsufficientSignalError(KKWaveError, ValueError):
    """A probe series is too weak to fit."""


class SingularDecompositionError(KKWaveError, ValueError):
    """Scattering-state decomposition hit a vanishing denominator."""

    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class DomainGuardError(KKWaveError, RuntimeError):
    """The field reached the grid boundary band or a frame shift wrapped."""

    exit_code = 4


class ResolutionError(DomainGuardError):
    """A rescaled momentum lattice left its resolvable range."""
