from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from finiteroc import make_feature_space, worked_example, worked_example_counts

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def example():
    return worked_example()


@pytest.fixture
def counts40():
    return worked_example_counts()


def random_exact_pair(rng, l, distinct=True, positive=True):
    """Random Fraction-valued pair on ``l`` features with integer weights."""
    from finiteroc import DistributionPair

    L = 1 << l
    while True:
        low = 1 if positive else 0
        w0 = rng.integers(low, 50, size=L)
        w1 = rng.integers(low, 50, size=L)
        if w0.sum() == 0 or w1.sum() == 0:
            continue
        t0 = [Fraction(int(v), int(w0.sum())) for v in w0]
        t1 = [Fraction(int(v), int(w1.sum())) for v in w1]
        if distinct and positive:
            ratios = [a / b for a, b in zip(t1, t0)]
            if len(set(ratios)) != L:
                continue
        return DistributionPair(make_feature_space(l), t0, t1)


def frac(*vals):
    return [Fraction(v) for v in vals]


def F(s):
    return Fraction(s)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
