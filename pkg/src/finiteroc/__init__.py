"""Neyman-Pearson design and finite-sample reliability on binary feature spaces."""
from .core import *  # noqa: F401,F403
from .core import __all__ as _core
from .datasets import *  # noqa: F401,F403
from .datasets import __all__ as _datasets
from .design import *  # noqa: F401,F403
from .design import __all__ as _design
from .errors import (
    ApproximationInvalidError,
    FeatureSpaceError,
    NumericalError,
    QuadratureError,
    SpaceMismatchError,
    UndefinedMetricError,
)
from .experiments import *  # noqa: F401,F403
from .experiments import __all__ as _experiments
from .merging import *  # noqa: F401,F403
from .merging import __all__ as _merging
from .posterior import *  # noqa: F401,F403
from .posterior import __all__ as _posterior
from .sortconf import *  # noqa: F401,F403
from .sortconf import __all__ as _sortconf
from .subsets import *  # noqa: F401,F403
from .subsets import __all__ as _subsets

__version__ = "0.1.0"

__all__ = [
    *_core, *_datasets, *_design, *_experiments, *_merging, *_posterior, *_sortconf, *_subsets,
    "ApproximationInvalidError", "FeatureSpaceError", "NumericalError", "QuadratureError",
    "SpaceMismatchError", "UndefinedMetricError",
]
