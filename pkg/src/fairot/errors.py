"""Exception types raised across the package."""


class FairotError(Exception):
    """Base class for package errors."""


class DataValidationError(FairotError, ValueError):
    """Invalid labelled data (non-finite feature, bad attribute value)."""


class UndefinedWeightsError(FairotError, ValueError):
    """Attribute weights requested for an empty dataset."""


class ConfigError(FairotError, ValueError):
    """Invalid configuration parameter."""


class QuenchedError(FairotError, RuntimeError):
    """An observation was offered to a learner that already stopped."""


class NotQuenchedError(FairotError, RuntimeError):
    """A quenched-only quantity was requested from a running learner."""


class NonConvergenceError(FairotError, RuntimeError):
    """Learning did not stop within the allowed number of draws."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InsufficientSupportError(FairotError, ValueError):
    """Too few distinct observations to build a quantized conditional."""


class UnfittedGroupError(FairotError, KeyError):
    """Repair requested for an attribute group the model was not fitted on."""


class EstimationError(FairotError, ValueError):
    """Density or divergence estimation is impossible (e.g. empty sample)."""


class IncompatibleDensityError(FairotError, ValueError):
    """Histogram densities with mismatched bin edges were combined."""


class UndefinedRatioError(FairotError, ZeroDivisionError):
    """Fairness ratio requested when the pre-repair unfairness is zero."""


class OffSampleError(FairotError, ValueError):
    """The quantile baseline was asked to repair a value it was not fitted on."""


class SplitError(FairotError, ValueError):
    """A holdout split would leave an empty stratum."""


class SchemaError(FairotError, ValueError):
    """An input file does not match the expected schema."""
