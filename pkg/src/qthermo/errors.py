"""Exception hierarchy.

Numerical failures and physics violations are kept apart so the CLI can map
them onto distinct exit codes.
"""


class QThermoError(Exception):
    """Base class for all package errors."""


class ConfigError(QThermoError):
    """Invalid user input (bad parameters, malformed scenarios)."""


class NumericalError(QThermoError):
    """A numerical procedure failed to deliver a trustworthy result."""


class PhysicsViolation(QThermoError):
    """A thermodynamic law audit failed."""


class NonHermitianInput(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class FrequencyOutOfRange(ConfigError):
    pass


class Unsupported(ConfigError):
    pass


class FrequencyMismatch(ConfigError):
    pass


class SchemaError(ConfigError):
    """Scenario validation failure; carries every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class MissingSpectralValue(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class TruncationError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TruncationLeak(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class PositivityLoss(NumericalError):
    pass


class DegenerateKernel(NumericalError):
    pass


class NoKernel(NumericalError):
    pass


class MaxItersExceeded(NumericalError):
    pass


class OptimizationFailed(NumericalError):
    pass


class InsufficientSpan(NumericalError):
    pass


class VanishingGap(NumericalError):
    pass


class SingularReference(NumericalError):
    pass


class GaugeError(PhysicsViolation):
    """Heat current requested from a generator without Davies/Floquet form."""
