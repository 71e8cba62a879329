"""Exception types shared across the package."""


class EstimationModelError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(EstimationModelError):
    """A distribution spec or parameter violates its construction invariants."""


class UnreachableInputError(EstimationModelError):
    """The observation y carries no usable posterior weight (log-normalizer underflow)."""


class NonInvertibleError(EstimationModelError):
    """The estimator curve is not certified strictly increasing."""


class OutOfRangeError(EstimationModelError):
    """A query point lies outside the open range of the estimator."""


class SlopeUnderflowError(EstimationModelError):
    """The local slope of the estimator curve is numerically zero."""


class UnsupportedModeError(EstimationModelError):
    """An evaluation mode was requested for a model it does not apply to."""


class DivergentMomentError(EstimationModelError):
    """A required moment of the distribution does not exist."""


class ConfigError(EstimationModelError):
    """An experiment config document failed validation."""
