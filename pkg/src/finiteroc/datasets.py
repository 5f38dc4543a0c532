"""Reference data: the two-feature worked example and its 40-sample counts."""
from __future__ import annotations

from .core import DistributionPair, HistogramPair, make_feature_space

__all__ = ["worked_example", "worked_example_counts", "WORKED_EXAMPLE_AUC"]

# class-conditional bin probabilities of the two-feature example, bins 0..3
_H0 = ("0.15", "0.25", "0.40", "0.20")
_H1 = ("0.30", "0.35", "0.20", "0.15")

# 40 samples per class drawn from the example; bins 1 and 3 come out swapped
_K0 = (6, 13, 12, 9)
_K1 = (18, 10, 5, 7)

WORKED_EXAMPLE_AUC = 0.64625


def worked_example() -> DistributionPair:
    """Exact (Fraction-valued) two-feature distribution pair."""
    return DistributionPair.from_decimal_strings(_H0, _H1, make_feature_space(2))


def worked_example_counts() -> HistogramPair:
    return HistogramPair.from_counts(list(_K0), list(_K1), make_feature_space(2))
