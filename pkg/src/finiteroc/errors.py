"""Exception types raised across the package.

Validation problems derive from :class:`ValueError`; numerical failures
derive from :class:`ArithmeticError`. The command-line front end maps the
two families onto distinct exit codes.
"""


class FeatureSpaceError(ValueError):
    """Feature count outside the supported range."""


class SpaceMismatchError(ValueError):
    """Two objects were defined over different bin sets."""


class UndefinedMetricError(ValueError):
    """A metric was requested where its defining ratios do not exist."""


class ApproximationInvalidError(ValueError):
    """The normal approximation to a ratio posterior is outside its regime."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested accuracy."""
