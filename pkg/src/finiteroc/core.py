"""Feature spaces, class-conditional distributions, counts and classifiers.

Bins are indexed by the integer value of the feature bit string read
most-significant-first: for two features, ``(x0, x1) = (1, 0)`` is bin 2.

Probability vectors may hold floats or :class:`fractions.Fraction` values.
Fractions are kept as ``object`` arrays so that every downstream sum is exact
rational arithmetic; floats are stored as ``float64``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import FeatureSpaceError, SpaceMismatchError

__all__ = [
    "DEFAULT_MAX_FEATURES",
    "PROBABILITY_ATOL",
    "FeatureSpace",
    "MergedSpace",
    "DistributionPair",
    "HistogramPair",
    "Classifier",
    "OperatingPoint",
    "make_feature_space",
    "operating_point",
    "estimate_operating_point",
    "sample_counts",
    "total_mass",
]

DEFAULT_MAX_FEATURES = 24
PROBABILITY_ATOL = 1e-12

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


@dataclass(frozen=True)
class FeatureSpace:
    """The ``2**l`` bin alphabet spanned by ``l`` binary features."""

    l: int
    max_l: int = field(default=DEFAULT_MAX_FEATURES, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.l, bool) or not isinstance(self.l, (int, np.integer)):
            raise FeatureSpaceError(f"feature count must be an integer, got {self.l!r}")
        if not 1 <= self.l <= self.max_l:
            raise FeatureSpaceError(
                f"feature count l={self.l} outside [1, {self.max_l}]"
            )
        object.__setattr__(self, "l", int(self.l))

    @property
    def L(self) -> int:
        return 1 << self.l

    def bits(self, j: int) -> tuple[int, ...]:
        """Bit string of bin ``j``, most significant bit first."""
        if not 0 <= j < self.L:
            raise IndexError(f"bin {j} outside [0, {self.L})")
        return tuple((j >> (self.l - 1 - i)) & 1 for i in range(self.l))

    def index(self, bits: Sequence[int]) -> int:
        """Inverse of :meth:`bits`."""
        if len(bits) != self.l:
            raise ValueError(f"expected {self.l} bits, got {len(bits)}")
        j = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"feature values must be 0/1, got {b!r}")
            j = (j << 1) | int(b)
        return j


@dataclass(frozen=True)
class MergedSpace:
    """A reduced bin set obtained by merging bins of ``parent``."""

    L: int
    parent: FeatureSpace

    def __post_init__(self):
        if not 1 <= self.L <= self.parent.L:
            raise ValueError(f"merged bin count {self.L} outside [1, {self.parent.L}]")


Space = Union[FeatureSpace, MergedSpace]


def make_feature_space(l: int, cap: int | None = None) -> FeatureSpace:
    """Build the feature space for ``l`` binary features.

    ``cap`` overrides the default limit of 24 features.
    """
    return FeatureSpace(l, DEFAULT_MAX_FEATURES if cap is None else cap)


def _space_for_length(n_bins: int, space: Space | None) -> Space:
    if space is not None:
        if space.L != n_bins:
            raise SpaceMismatchError(f"{n_bins} values given for a space of {space.L} bins")
        return space
    l = n_bins.bit_length() - 1
    if n_bins < 2 or (1 << l) != n_bins:
        raise FeatureSpaceError(f"bin count {n_bins} is not a power of two >= 2")
    return make_feature_space(l)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _probability_array(values) -> np.ndarray:
    values = list(values)
    if any(isinstance(v, Fraction) for v in values):
        return np.array([Fraction(v) for v in values], dtype=object)
    return np.asarray(values, dtype=float)


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def total_mass(a: np.ndarray, mask: np.ndarray | None = None):
    """Sum of ``a`` over ``mask``: exact for fractions, ``math.fsum`` for floats."""
    sel = a if mask is None else a[mask]
    if is_exact(a):
        return sum(sel, Fraction(0))
    return math.fsum(sel.tolist())


def _check_probabilities(theta: np.ndarray, name: str):
    if is_exact(theta):
        if any(v < 0 or v > 1 for v in theta):
            raise ValueError(f"{name}: probabilities must lie in [0, 1]")
        if sum(theta, Fraction(0)) != 1:
            raise ValueError(f"{name}: probabilities must sum to 1 exactly")
        return
    if not np.all(np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > 1):
        raise ValueError(f"{name}: probabilities must lie in [0, 1]")
    s = math.fsum(theta.tolist())
    if abs(s - 1.0) > PROBABILITY_ATOL:
        raise ValueError(f"{name}: probabilities sum to {s!r}, not 1")


@dataclass(frozen=True, eq=False)
class DistributionPair:
    """True class-conditional bin probabilities for H0 and H1."""

    space: Space
    theta_h0: np.ndarray
    theta_h1: np.ndarray

    def __post_init__(self):
        t0 = _probability_array(self.theta_h0)
        t1 = _probability_array(self.theta_h1)
        if is_exact(t0) != is_exact(t1):
            # Promote the float side so both are exact.
            t0 = np.array([Fraction(v) for v in t0], dtype=object)
            t1 = np.array([Fraction(v) for v in t1], dtype=object)
        for t, name in ((t0, "theta_h0"), (t1, "theta_h1")):
            if t.shape != (self.space.L,):
                raise SpaceMismatchError(f"{name} has shape {t.shape}, expected ({self.space.L},)")
            _check_probabilities(t, name)
        object.__setattr__(self, "theta_h0", _readonly(t0))
        object.__setattr__(self, "theta_h1", _readonly(t1))

    @classmethod
    def from_arrays(cls, h0, h1, space: Space | None = None, renormalize: bool = False):
        """Build from two probability vectors, inferring ``l`` from their length.

        Inputs that do not sum to one are rejected unless ``renormalize`` is set.
        """
        t0 = _probability_array(h0)
        t1 = _probability_array(h1)
        if renormalize:
            t0 = t0 / total_mass(t0)
            t1 = t1 / total_mass(t1)
        return cls(_space_for_length(len(t0), space), t0, t1)

    @classmethod
    def from_decimal_strings(cls, h0: Sequence[str], h1: Sequence[str], space: Space | None = None):
        """Exact distributions from decimal literals such as ``"0.15"``."""
        return cls.from_arrays([Fraction(s) for s in h0], [Fraction(s) for s in h1], space)

    @property
    def exact(self) -> bool:
        return is_exact(self.theta_h0)

    def as_float(self) -> "DistributionPair":
        if not self.exact:
            return self
        return DistributionPair(
            self.space, self.theta_h0.astype(float), self.theta_h1.astype(float)
        )

    def __eq__(self, other):
        if not isinstance(other, DistributionPair):
            return NotImplemented
        return (
            self.space == other.space
            and np.array_equal(self.theta_h0, other.theta_h0)
            and np.array_equal(self.theta_h1, other.theta_h1)
        )

    __hash__ = None


def _count_array(values, name: str) -> np.ndarray:
    raw = np.asarray(values)
    if raw.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if raw.dtype.kind == "f":
        if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
            raise ValueError(f"{name} must hold integers")
    elif raw.dtype.kind not in "iub" and raw.size:
        raise ValueError(f"{name} must hold integers")
    counts = raw.astype(np.int64)
    if np.any(counts < 0):
        raise ValueError(f"{name} must be non-negative")
    return counts


@dataclass(frozen=True, eq=False)
class HistogramPair:
    """Observed per-bin counts for both classes and the class sample sizes."""

    space: Space
    counts_h0: np.ndarray
    n0: int
    counts_h1: np.ndarray
    n1: int

    def __post_init__(self):
        k0 = _count_array(self.counts_h0, "counts_h0")
        k1 = _count_array(self.counts_h1, "counts_h1")
        for k, n, name in ((k0, self.n0, "h0"), (k1, self.n1, "h1")):
            if k.shape != (self.space.L,):
                raise SpaceMismatchError(
                    f"counts_{name} has shape {k.shape}, expected ({self.space.L},)"
                )
            if int(k.sum()) != int(n):
                raise ValueError(f"counts_{name} sum to {int(k.sum())}, not n={n}")
        object.__setattr__(self, "counts_h0", _readonly(k0))
        object.__setattr__(self, "counts_h1", _readonly(k1))
        object.__setattr__(self, "n0", int(self.n0))
        object.__setattr__(self, "n1", int(self.n1))

    @classmethod
    def from_counts(cls, h0, h1, space: Space | None = None) -> "HistogramPair":
        k0 = _count_array(h0, "counts_h0")
        k1 = _count_array(h1, "counts_h1")
        if len(k0) != len(k1):
            raise SpaceMismatchError("class histograms differ in length")
        return cls(_space_for_length(len(k0), space), k0, int(k0.sum()), k1, int(k1.sum()))

    def frequencies(self, exact: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Per-bin relative frequencies ``k/n`` for H0 and H1."""
        if self.n0 == 0 or self.n1 == 0:
            raise ValueError("frequencies undefined for an empty class sample")
        if exact:
            return (
                np.array([Fraction(int(k), self.n0) for k in self.counts_h0], dtype=object),
                np.array([Fraction(int(k), self.n1) for k in self.counts_h1], dtype=object),
            )
        return self.counts_h0 / self.n0, self.counts_h1 / self.n1

    def __eq__(self, other):
        if not isinstance(other, HistogramPair):
            return NotImplemented
        return (
            self.space == other.space
            and self.n0 == other.n0
            and self.n1 == other.n1
            and np.array_equal(self.counts_h0, other.counts_h0)
            and np.array_equal(self.counts_h1, other.counts_h1)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Classifier:
    """A 0/1 label for every bin.

    The classifier's integer index has bit ``x`` equal to the label of bin
    ``x``, so index 1 labels only bin 0 as class 1.
    """

    space: Space
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.shape != (self.space.L,):
            raise SpaceMismatchError(
                f"labels have shape {labels.shape}, expected ({self.space.L},)"
            )
        if labels.dtype != bool:
            if not np.all(np.isin(labels, (0, 1))):
                raise ValueError("labels must be 0/1")
            labels = labels.astype(bool)
        else:
            labels = labels.copy()
        object.__setattr__(self, "labels", _readonly(labels))

    @classmethod
    def from_index(cls, space: Space, j: int) -> "Classifier":
        if not 0 <= j < (1 << space.L):
            raise ValueError(f"classifier index {j} outside [0, 2**{space.L})")
        return cls(space, np.array([(j >> x) & 1 for x in range(space.L)], dtype=bool))

    @property
    def index(self) -> int:
        return sum(1 << x for x in np.flatnonzero(self.labels).tolist())

    @property
    def region_h1(self) -> np.ndarray:
        """Bins labeled 1."""
        return np.flatnonzero(self.labels)

    @property
    def region_h0(self) -> np.ndarray:
        """Bins labeled 0."""
        return np.flatnonzero(~self.labels)

    def complement(self) -> "Classifier":
        return Classifier(self.space, ~self.labels)

    def __eq__(self, other):
        if not isinstance(other, Classifier):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.labels, other.labels)

    __hash__ = None


@dataclass(frozen=True)
class OperatingPoint:
    """False-alarm and detection probabilities of one classifier."""

    pf: float
    pd: float

    def __post_init__(self):
        for name in ("pf", "pd"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v!r} outside [0, 1]")

    def __iter__(self):
        yield self.pf
        yield self.pd


def _check_same_space(a: Space, b: Space):
    if a != b:
        raise SpaceMismatchError(f"{a} and {b} differ")


def operating_point(dist: DistributionPair, g: Classifier) -> OperatingPoint:
    """Exact ``(P_f, P_d)`` of ``g`` under the true distributions."""
    _check_same_space(dist.space, g.space)
    return OperatingPoint(
        total_mass(dist.theta_h0, g.labels), total_mass(dist.theta_h1, g.labels)
    )


def estimate_operating_point(
    counts: HistogramPair, g: Classifier, exact: bool = False
) -> OperatingPoint:
    """Frequency estimate of ``(P_f, P_d)`` from observed counts."""
    _check_same_space(counts.space, g.space)
    if counts.n0 <= 0 or counts.n1 <= 0:
        raise ValueError("operating point estimate needs n0 > 0 and n1 > 0")
    s0 = int(counts.counts_h0[g.labels].sum())
    s1 = int(counts.counts_h1[g.labels].sum())
    if exact:
        return OperatingPoint(Fraction(s0, counts.n0), Fraction(s1, counts.n1))
    return OperatingPoint(s0 / counts.n0, s1 / counts.n1)


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _pvals(theta: np.ndarray) -> np.ndarray:
    p = theta.astype(float)
    # multinomial rejects sums that overshoot 1 by rounding
    return p / p.sum()


def sample_counts(dist: DistributionPair, n0: int, n1: int, seed: SeedLike) -> HistogramPair:
    """Independent multinomial draws of ``n0`` H0 and ``n1`` H1 samples."""
    if n0 < 0 or n1 < 0:
        raise ValueError("sample sizes must be non-negative")
    rng = as_generator(seed)
    k0 = rng.multinomial(int(n0), _pvals(dist.theta_h0))
    k1 = rng.multinomial(int(n1), _pvals(dist.theta_h1))
    return HistogramPair(dist.space, k0, int(n0), k1, int(n1))
