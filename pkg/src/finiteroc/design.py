"""Neyman-Pearson design on a finite alphabet.

Bins are ranked by decreasing likelihood ratio and the ``L + 1`` support
classifiers label the top ``m`` bins as class 1. The resulting operating
points trace the ROC when the ranking comes from the true distributions;
when it comes from counts, the same classifiers evaluated elsewhere give the
naive (NEPC), independent (EPC) and true (TOC) operating curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .core import (
    Classifier,
    DistributionPair,
    HistogramPair,
    OperatingPoint,
    Space,
    is_exact,
)
from .errors import FeatureSpaceError, SpaceMismatchError, UndefinedMetricError

__all__ = [
    "Ranking",
    "RocCurve",
    "likelihood_ratios",
    "rank_bins",
    "support_classifier",
    "np_design",
    "curve_from_ranking",
    "enumerate_aos",
    "upper_hull",
    "roc_vertices",
    "swap_slope_metric",
    "auc",
    "MAX_AOS_FEATURES",
    "HULL_TOL",
]

Source = Union[DistributionPair, HistogramPair]

MAX_AOS_FEATURES = 4
HULL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Ranking:
    """Bins sorted by decreasing likelihood ratio.

    ``order[r]`` is the bin at rank ``r``; ``alpha[x]`` is the rank of bin ``x``.
    """

    order: np.ndarray
    alpha: np.ndarray

    @classmethod
    def from_order(cls, order) -> "Ranking":
        order = np.asarray(order, dtype=np.int64)
        alpha = np.empty_like(order)
        alpha[order] = np.arange(len(order))
        if not np.array_equal(np.sort(order), np.arange(len(order))):
            raise ValueError("order is not a permutation")
        order.setflags(write=False)
        alpha.setflags(write=False)
        return cls(order, alpha)

    def __len__(self):
        return len(self.order)

    def __eq__(self, other):
        if not isinstance(other, Ranking):
            return NotImplemented
        return np.array_equal(self.order, other.order)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points of the support classifiers ``m = 0 .. L``.

    ``points`` has shape ``(L + 1, 2)`` with columns ``(pf, pd)``; it holds
    fractions (``object`` dtype) when computed exactly. ``source`` is
    ``"true"`` when the ranking came from the true distributions and
    ``"estimated"`` otherwise; ``label`` names the curve (ROC, NEPC, EPC, TOC).
    """

    points: np.ndarray
    ranking: Ranking
    source: str
    label: str = ""

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def pf(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def pd(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def exact(self) -> bool:
        return is_exact(self.points)

    def operating_points(self) -> list[OperatingPoint]:
        return [OperatingPoint(pf, pd) for pf, pd in self.points]

    def classifier(self, m: int, space: Space) -> Classifier:
        return support_classifier(self.ranking, m, space)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "label": self.label,
            "points": [
                {"m": m, "pf": float(pf), "pd": float(pd)}
                for m, (pf, pd) in enumerate(self.points)
            ],
            "ranking": self.ranking.alpha.tolist(),
        }


def _ratio_fraction(num, den):
    if den == 0:
        return math.inf if num > 0 else math.nan
    return Fraction(num) / Fraction(den)


def likelihood_ratios(source: Source, exact: bool | None = None) -> np.ndarray:
    """Per-bin ratio of class-1 to class-0 probability (or frequency).

    A positive numerator over zero gives ``inf``; ``0 / 0`` gives ``nan``,
    the neutral marker that :func:`rank_bins` orders as the value 1.
    ``exact`` returns fractions; by default exactness follows the source.
    """
    if isinstance(source, DistributionPair):
        num, den = source.theta_h1, source.theta_h0
        exact = source.exact if exact is None else exact
        if exact and not source.exact:
            num = np.array([Fraction(v) for v in num], dtype=object)
            den = np.array([Fraction(v) for v in den], dtype=object)
    elif isinstance(source, HistogramPair):
        if source.n0 == 0 or source.n1 == 0:
            raise ValueError("likelihood ratios need samples from both classes")
        exact = bool(exact)
        # k1 n0 / (k0 n1); integer products keep equal ratios bit-identical
        num = source.counts_h1 * source.n0
        den = source.counts_h0 * source.n1
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    if exact:
        return np.array([_ratio_fraction(a, b) for a, b in zip(num, den)], dtype=object)
    num = np.asarray(num, float)
    den = np.asarray(den, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = num / den
    return z


def rank_bins(ratios) -> Ranking:
    """Stable descending sort; ties go to the lower bin index, ``nan`` counts as 1."""
    ratios = np.asarray(ratios)
    if ratios.dtype == object:
        keyed = [1 if (isinstance(v, float) and math.isnan(v)) else v for v in ratios]
        order = sorted(range(len(keyed)), key=lambda i: (-keyed[i], i))
        return Ranking.from_order(order)
    z = np.where(np.isnan(ratios), 1.0, ratios.astype(float))
    order = np.lexsort((np.arange(len(z)), -z))
    return Ranking.from_order(order)


def support_classifier(r: Ranking, m: int, space: Space | None = None) -> Classifier:
    """Classifier labeling bin ``x`` as 1 iff ``alpha[x] < m``."""
    L = len(r)
    if not 0 <= m <= L:
        raise ValueError(f"m={m} outside [0, {L}]")
    if space is None:
        from .core import _space_for_length

        space = _space_for_length(L, None)
    return Classifier(space, r.alpha < m)


def _masses(eval_on: Source, exact: bool):
    """Per-bin class-0 and class-1 masses plus normalisers."""
    if isinstance(eval_on, DistributionPair):
        if exact and not eval_on.exact:
            return (
                np.array([Fraction(v) for v in eval_on.theta_h0], dtype=object),
                np.array([Fraction(v) for v in eval_on.theta_h1], dtype=object),
                None,
                None,
            )
        return eval_on.theta_h0, eval_on.theta_h1, None, None
    if isinstance(eval_on, HistogramPair):
        if eval_on.n0 <= 0 or eval_on.n1 <= 0:
            raise ValueError("evaluation counts need n0 > 0 and n1 > 0")
        return eval_on.counts_h0, eval_on.counts_h1, eval_on.n0, eval_on.n1
    raise TypeError(f"unsupported evaluation source {type(eval_on).__name__}")


def _cumulative(mass: np.ndarray, order: np.ndarray, norm, exact: bool) -> np.ndarray:
    sorted_mass = mass[order]
    if norm is not None:
        c = np.concatenate([[0], np.cumsum(sorted_mass)])
        if exact:
            return np.array([Fraction(int(v), norm) for v in c], dtype=object)
        return c / norm
    if is_exact(mass):
        c = np.empty(len(mass) + 1, dtype=object)
        c[0] = Fraction(0)
        c[1:] = np.cumsum(sorted_mass)
        return c
    c = np.concatenate([[0.0], np.cumsum(sorted_mass)])
    c = np.clip(c, 0.0, 1.0)
    # the full region carries unit mass by construction
    c[-1] = 1.0
    return np.maximum.accumulate(c)


def curve_from_ranking(
    ranking: Ranking, eval_on: Source, source: str = "estimated", label: str = "",
    exact: bool = False,
) -> RocCurve:
    """Evaluate the support classifiers of ``ranking`` on ``eval_on``."""
    m0, m1, n0, n1 = _masses(eval_on, exact)
    if len(m0) != len(ranking):
        raise SpaceMismatchError(
            f"ranking over {len(ranking)} bins evaluated on {len(m0)} bins"
        )
    exact = exact or is_exact(m0)
    pf = _cumulative(m0, ranking.order, n0, exact)
    pd = _cumulative(m1, ranking.order, n1, exact)
    if exact:
        points = np.empty((len(pf), 2), dtype=object)
        points[:, 0] = pf
        points[:, 1] = pd
    else:
        points = np.column_stack([pf.astype(float), pd.astype(float)])
    return RocCurve(points, ranking, source, label)


def _curve_label(source: Source, eval_on: Source) -> str:
    if isinstance(source, DistributionPair):
        return "ROC" if isinstance(eval_on, DistributionPair) else "EPC"
    if isinstance(eval_on, DistributionPair):
        return "TOC"
    return "NEPC" if eval_on is source or eval_on == source else "EPC"


def np_design(source: Source, eval_on: Source | None = None, exact: bool = False) -> RocCurve:
    """Rank bins on ``source`` and evaluate the support classifiers on ``eval_on``.

    ``eval_on`` defaults to ``source``. The returned label follows the
    convention: truth/truth is the ROC, counts evaluated on the same counts
    is the NEPC, on independent counts the EPC, and on the truth the TOC.
    With ``exact=True`` (or fraction-valued distributions) all points are
    fractions.
    """
    if eval_on is None:
        eval_on = source
    if source.space != eval_on.space:
        raise SpaceMismatchError(f"design space {source.space} != evaluation space {eval_on.space}")
    ranking = rank_bins(likelihood_ratios(source, exact=True if exact else None))
    kind = "true" if isinstance(source, DistributionPair) else "estimated"
    return curve_from_ranking(ranking, eval_on, kind, _curve_label(source, eval_on), exact)


def _labelings(L: int) -> np.ndarray:
    j = np.arange(1 << L, dtype=np.int64)
    return ((j[:, None] >> np.arange(L)) & 1).astype(bool)


def enumerate_aos(dist: DistributionPair) -> np.ndarray:
    """Operating points of all ``2**L`` labelings.

    Row ``j`` of the ``(2**L, 2)`` result is the classifier whose label of
    bin ``x`` is bit ``x`` of ``j``. Limited to ``l <= 4`` (65536 labelings).
    """
    l = getattr(dist.space, "l", None)
    if l is None or l > MAX_AOS_FEATURES:
        raise FeatureSpaceError(
            f"exhaustive enumeration is limited to l <= {MAX_AOS_FEATURES}"
        )
    labels = _labelings(dist.space.L)
    if dist.exact:
        lab = labels.astype(object)
        pf = lab.dot(dist.theta_h0)
        pd = lab.dot(dist.theta_h1)
        out = np.empty((len(labels), 2), dtype=object)
        out[:, 0] = [Fraction(v) for v in pf]
        out[:, 1] = [Fraction(v) for v in pd]
        return out
    return np.column_stack([labels @ dist.theta_h0, labels @ dist.theta_h1])


def _as_points(points) -> list[tuple]:
    if isinstance(points, RocCurve):
        points = points.points
    if isinstance(points, np.ndarray):
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must have shape (N, 2)")
        return [tuple(p) for p in points.tolist()]
    return [tuple(p) for p in points]


def upper_hull(points: Iterable, tol: float | None = None) -> np.ndarray:
    """Upper-left convex hull of a set of operating points.

    The polyline runs from ``(0, 0)`` to ``(1, 1)`` (both anchors are always
    achievable and are added), ordered by ``pf``, with interior, dominated,
    duplicate and collinear points removed. Fractions are compared exactly;
    floats use a cross-product tolerance of ``1e-12``.
    """
    pts = _as_points(points)
    if not pts:
        raise ValueError("upper_hull needs at least one point")
    exact = all(isinstance(v, (Fraction, int)) for p in pts for v in p)
    if tol is None:
        tol = 0 if exact else HULL_TOL
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    pts = sorted(set(pts) | {(zero, zero), (one, one)})
    hull: list[tuple] = []
    for p in pts:
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            cross = (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox)
            if cross >= -tol:
                hull.pop()
            else:
                break
        hull.append(p)
    out = np.empty((len(hull), 2), dtype=object if exact else float)
    for i, p in enumerate(hull):
        out[i] = p
    return out


def roc_vertices(curve: RocCurve) -> np.ndarray:
    """Vertex subset of a curve's support points (collinear points removed)."""
    return upper_hull(curve.points)


def swap_slope_metric(dist: DistributionPair, a: int, b: int) -> float:
    """Slope change ``dPd / dPf`` caused by exchanging bins ``a`` and ``b``.

    With ``eta_i = theta(a|Hi) / theta(b|Hi)`` the slope change is
    ``theta(a|H1) (1 - eta1) eta0 / (theta(a|H0) (1 - eta0) eta1)``.
    """
    if a == b:
        raise UndefinedMetricError("swap metric needs two distinct bins")
    t0, t1 = dist.theta_h0, dist.theta_h1
    if t1[b] == 0 or t0[b] == 0 or t1[a] == 0 or t0[a] == 0:
        raise UndefinedMetricError(f"bins {a} and {b} need positive mass in both classes")
    eta1 = t1[a] / t1[b]
    eta0 = t0[a] / t0[b]
    if eta0 == 1:
        raise UndefinedMetricError("class-0 probabilities of the bins are equal (eta0 = 1)")
    value = t1[a] * (1 - eta1) * eta0 / (t0[a] * (1 - eta0) * eta1)
    return value if dist.exact else float(value)


def auc(curve) -> float:
    """Trapezoidal area under a curve's polyline (exact for fractions)."""
    pts = _as_points(curve)
    area = 0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area
