"""Exception hierarchy.

Every numerical failure derives from :class:`NipError`; the CLI maps the
subclasses onto exit statuses (see :mod:`nipkit.harness.cli`).
"""


class NipError(Exception):
    """Base class for all errors raised by nipkit."""


class DimensionMismatch(NipError, ValueError):
    pass


class NotHermitian(NipError):
    pass


class NotPositiveDefinite(NipError):
    pass


class IllConditioned(NipError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class GridTooShort(NipError, ValueError):
    pass


class NonUniformGrid(NipError, ValueError):
    pass


class DegenerateSpectrum(NipError):
    pass


class NonDiagonalizable(NipError):
    pass


class NonPositiveKappa(NipError, ValueError):
    pass


class IncompatibleMetric(NipError):
    pass


class SampleError(NipError):
    """Failure tied to one sample of a time grid."""

    def __init__(self, message, index, t):
        super().__init__(f"{message} at t={t:.6g} (sample {index})")
        self.index = index
        self.t = t


class ComplexSpectrumAt(SampleError):
    pass


class DegenerateSpectrumAt(SampleError):
    pass


class MetricSingularAt(SampleError):
    pass


class BlowUp(NipError):
    """Integration left the admissible norm range or produced non-finite values."""


class NotHermitianAnsatz(NipError):
    pass


class InitialBasisInvalid(NipError):
    pass


class ExcessiveDrift(NipError):
    pass


class ReferenceNotOrthonormal(NipError):
    pass


class VanishingOverlap(NipError):
    pass


class ConditionCapExceeded(NipError):
    pass


class InvalidScenario(NipError, ValueError):
    pass
