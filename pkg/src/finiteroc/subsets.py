"""Comparing feature subsets through their operating curves.

Curves are compared by uniform preferability (one curve lies on or above the
other at every false-alarm rate) and against the convex hull of two curves,
which is what randomising between classifiers built on either subset
achieves. :func:`forward_select` grows a subset greedily: a candidate
feature is admitted only when the curve on the enlarged subset beats that
hull by a statistically significant area margin on held-out data.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DistributionPair, HistogramPair, SeedLike, as_generator, make_feature_space
from .design import (
    RocCurve,
    _as_points,
    auc,
    curve_from_ranking,
    likelihood_ratios,
    rank_bins,
    upper_hull,
)
from .sortconf import SortBound, sort_error_bound

__all__ = [
    "LabeledSamples",
    "SubsetReport",
    "SelectionConfig",
    "SelectionStep",
    "SelectionTrace",
    "curve_value_at",
    "uniformly_preferable",
    "hull_of_union",
    "project_counts",
    "marginalize",
    "sample_features",
    "forward_select",
    "PREFERENCE_TOL",
]

PREFERENCE_TOL = 1e-12


def curve_value_at(curve, pf):
    """Detection rate of a curve's polyline at false-alarm rate ``pf``.

    At a vertical segment the highest point is returned.
    """
    if not 0 <= pf <= 1:
        raise ValueError(f"pf={pf!r} outside [0, 1]")
    pts = _as_points(curve)
    xs = [p[0] for p in pts]
    i = bisect_right(xs, pf) - 1
    if i < 0:
        return pts[0][1]
    if xs[i] == pf or i == len(pts) - 1:
        return pts[i][1]
    (x0, y0), (x1, y1) = pts[i], pts[i + 1]
    return y0 + (y1 - y0) * (pf - x0) / (x1 - x0)


def uniformly_preferable(c1, c2, tol: float = PREFERENCE_TOL) -> bool:
    """True iff ``c1`` lies on or above every vertex of ``c2``."""
    return all(curve_value_at(c1, pf) >= pd - tol for pf, pd in _as_points(c2))


def hull_of_union(c1, c2) -> np.ndarray:
    """Upper hull over the vertices of both curves."""
    return upper_hull(_as_points(c1) + _as_points(c2))


@dataclass(frozen=True, eq=False)
class LabeledSamples:
    """Per-class binary feature vectors, one row per sample."""

    x0: np.ndarray
    x1: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=np.int8)
        x1 = np.asarray(self.x1, dtype=np.int8)
        if x0.ndim != 2 or x1.ndim != 2 or x0.shape[1] != x1.shape[1]:
            raise ValueError("class samples must be 2-D arrays with the same number of features")
        if np.any((x0 != 0) & (x0 != 1)) or np.any((x1 != 0) & (x1 != 1)):
            raise ValueError("feature values must be 0 or 1")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)

    @property
    def n_features(self) -> int:
        return self.x0.shape[1]

    @classmethod
    def from_rows(cls, labels, bits) -> "LabeledSamples":
        labels = np.asarray(labels)
        bits = np.asarray(bits)
        if bits.ndim != 2 or len(labels) != len(bits):
            raise ValueError("need one label per row of feature bits")
        if np.any((labels != 0) & (labels != 1)):
            raise ValueError("class labels must be 0 or 1")
        return cls(bits[labels == 0], bits[labels == 1])

    def project(self, subset: Sequence[int]) -> HistogramPair:
        return project_counts(self.x0, self.x1, subset)


def sample_features(dist: DistributionPair, n0: int, n1: int, seed: SeedLike) -> LabeledSamples:
    """Draw labeled feature vectors from a distribution pair over an l-bit space."""
    rng = as_generator(seed)
    l = dist.space.l
    p0 = np.asarray(dist.theta_h0, float)
    p1 = np.asarray(dist.theta_h1, float)
    j0 = rng.choice(len(p0), size=n0, p=p0 / p0.sum())
    j1 = rng.choice(len(p1), size=n1, p=p1 / p1.sum())
    shifts = np.arange(l - 1, -1, -1)
    return LabeledSamples((j0[:, None] >> shifts) & 1, (j1[:, None] >> shifts) & 1)


@dataclass(frozen=True, eq=False)
class SubsetReport:
    subset: tuple[int, ...]
    curve: RocCurve
    bound: SortBound | None
    auc: float

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "curve": self.curve.to_dict(),
            "bound": None if self.bound is None else self.bound.bound,
            "auc": float(self.auc),
        }


@dataclass
class SelectionConfig:
    """Settings for :func:`forward_select`.

    ``z`` scales the posterior standard deviation of the area gain that a
    candidate must exceed; ``bound_ceiling`` stops the search once the sort
    error bound of the accepted subset passes it.
    """

    z: float = 2.0
    bound_ceiling: float = 0.5
    holdout_fraction: float = 0.5
    posterior_draws: int = 200
    max_features: int | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass
class SelectionStep:
    subset: tuple[int, ...]
    candidates: list[dict]
    accepted: int | None
    bound: float | None
    reason: str

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "candidates": self.candidates,
            "accepted": self.accepted,
            "bound": self.bound,
            "reason": self.reason,
        }


@dataclass
class SelectionTrace:
    initial: tuple[int, ...]
    steps: list[SelectionStep] = field(default_factory=list)
    reports: list[SubsetReport] = field(default_factory=list)

    @property
    def selected(self) -> tuple[int, ...]:
        return self.steps[-1].subset if self.steps else self.initial

    @property
    def stop_reason(self) -> str:
        return self.steps[-1].reason if self.steps else "no_candidates"

    def to_dict(self) -> dict:
        return {
            "initial": list(self.initial),
            "selected": list(self.selected),
            "stop_reason": self.stop_reason,
            "steps": [s.to_dict() for s in self.steps],
            "reports": [r.to_dict() for r in self.reports],
        }


def _bin_index(samples: np.ndarray, subset: Sequence[int]) -> np.ndarray:
    idx = np.zeros(len(samples), dtype=np.int64)
    for f in subset:
        idx = (idx << 1) | samples[:, f].astype(np.int64)
    return idx


def project_counts(x0: np.ndarray, x1: np.ndarray, subset: Sequence[int]) -> HistogramPair:
    """Histogram of per-class binary samples restricted to ``subset``.

    Bits are read in ``subset`` order, most significant first.
    """
    subset = list(subset)
    space = make_feature_space(len(subset))
    k0 = np.bincount(_bin_index(x0, subset), minlength=space.L)
    k1 = np.bincount(_bin_index(x1, subset), minlength=space.L)
    return HistogramPair(space, k0, len(x0), k1, len(x1))


def marginalize(theta: np.ndarray, l: int, keep: Sequence[int]) -> np.ndarray:
    """Sum a bin-probability array over every feature not in ``keep``.

    ``theta`` may carry leading batch axes; the last axis holds ``2**l`` bins.
    Features are numbered most significant first; the result reads the kept
    features in ``keep`` order.
    """
    batch = theta.shape[:-1]
    t = theta.reshape(batch + (2,) * l)
    off = len(batch)
    drop = tuple(off + f for f in range(l) if f not in keep)
    t = t.sum(axis=drop) if drop else t
    remaining = [f for f in range(l) if f in keep]
    perm = list(range(off)) + [off + remaining.index(f) for f in keep]
    t = np.transpose(t, perm)
    return t.reshape(batch + (1 << len(keep),))


def _auc_rows(pf: np.ndarray, pd: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum((pf[:, 1:] - pf[:, :-1]) * (pd[:, 1:] + pd[:, :-1]), axis=1)


def _curves_for_draws(order: np.ndarray, t0: np.ndarray, t1: np.ndarray):
    zero = np.zeros((len(t0), 1))
    pf = np.hstack([zero, np.cumsum(t0[:, order], axis=1)])
    pd = np.hstack([zero, np.cumsum(t1[:, order], axis=1)])
    return pf, pd


def _hull_auc(pf_a, pd_a, pf_b, pd_b) -> float:
    pts = list(zip(pf_a.tolist(), pd_a.tolist())) + list(zip(pf_b.tolist(), pd_b.tolist()))
    return auc(upper_hull(pts))


_DIAGONAL = np.array([[0.0, 0.0], [1.0, 1.0]])


def _design_and_eval(design0, design1, hold0, hold1, subset):
    ranking = rank_bins(likelihood_ratios(project_counts(design0, design1, subset)))
    return ranking.order, curve_from_ranking(ranking, project_counts(hold0, hold1, subset))


def _evaluate_candidate(design0, design1, hold0, hold1, current, f, cfg, rng):
    """Held-out area gain of ``current + [f]`` over the hull of its parts."""
    grown = list(current) + [f]
    l = len(grown)
    held = project_counts(hold0, hold1, grown)
    order_grown, epc_grown = _design_and_eval(design0, design1, hold0, hold1, grown)
    order_single, epc_single = _design_and_eval(design0, design1, hold0, hold1, [f])
    if current:
        order_base, epc_base = _design_and_eval(design0, design1, hold0, hold1, current)
        reference = hull_of_union(epc_base, epc_single)
    else:
        # the hull with the chance diagonal is the candidate's own curve, so
        # an empty subset is compared against chance directly
        order_base = None
        reference = _DIAGONAL
    gain = float(auc(epc_grown) - auc(reference))

    # posterior spread of the gain under the held-out Dirichlet posterior
    draws = cfg.posterior_draws
    t0 = rng.dirichlet(held.counts_h0 + 1.0, size=draws)
    t1 = rng.dirichlet(held.counts_h1 + 1.0, size=draws)
    pf_g, pd_g = _curves_for_draws(order_grown, t0, t1)
    a_grown = _auc_rows(pf_g, pd_g)
    keep_f = [l - 1]
    s0, s1 = marginalize(t0, l, keep_f), marginalize(t1, l, keep_f)
    pf_s, pd_s = _curves_for_draws(order_single, s0, s1)
    if order_base is None:
        a_ref = np.full(draws, 0.5)
    else:
        keep_q = list(range(l - 1))
        b0, b1 = marginalize(t0, l, keep_q), marginalize(t1, l, keep_q)
        pf_b, pd_b = _curves_for_draws(order_base, b0, b1)
        a_ref = np.array([
            _hull_auc(pf_b[i], pd_b[i], pf_s[i], pd_s[i]) for i in range(draws)
        ])
    sd = float(np.std(a_grown - a_ref, ddof=1)) if draws > 1 else 0.0
    return {"feature": int(f), "gain": gain, "sd": sd, "epc_auc": float(auc(epc_grown))}


def forward_select(
    data: LabeledSamples,
    features: Sequence[int] | None = None,
    config: SelectionConfig | None = None,
    initial: Sequence[int] = (),
) -> SelectionTrace:
    """Greedy forward feature selection with a held-out significance test.

    Each class sample is split once into a design part and a
    held-out part. At every step and for each remaining candidate ``f``:
    the subsets ``Q + [f]``, ``Q`` and ``[f]`` are designed on the design
    part and evaluated on the held-out part, and the gain is the area of the
    enlarged curve minus the area of the hull of the other two (against
    chance when ``Q`` is empty). The candidate with the largest gain is
    accepted if its gain exceeds ``z`` posterior standard deviations. After
    each acceptance the sort error bound of the new subset on the design
    part is computed; the search stops once it exceeds ``bound_ceiling``.

    The acceptance test and stopping rule are this module's construction;
    they are configurable through :class:`SelectionConfig`.
    """
    cfg = config or SelectionConfig()
    x0, x1 = data.x0, data.x1
    if x0.shape[1] == 0:
        raise ValueError("samples carry no features to select from")
    n_features = x0.shape[1]
    candidates = list(range(n_features)) if features is None else [int(f) for f in features]
    for f in candidates + list(initial):
        if not 0 <= f < n_features:
            raise ValueError(f"feature {f} outside [0, {n_features})")
    rng = as_generator(cfg.seed)
    split0 = _split(len(x0), cfg.holdout_fraction, rng)
    split1 = _split(len(x1), cfg.holdout_fraction, rng)
    design0, hold0 = x0[split0[0]], x0[split0[1]]
    design1, hold1 = x1[split1[0]], x1[split1[1]]

    current = list(initial)
    trace = SelectionTrace(tuple(current))
    remaining = [f for f in candidates if f not in current]
    limit = cfg.max_features if cfg.max_features is not None else n_features
    while remaining and len(current) < limit:
        evals = [
            _evaluate_candidate(design0, design1, hold0, hold1, current, f, cfg, rng)
            for f in remaining
        ]
        best = max(evals, key=lambda e: (e["gain"], -e["feature"]))
        if not best["gain"] > cfg.z * best["sd"]:
            trace.steps.append(SelectionStep(tuple(current), evals, None, None, "not_significant"))
            return trace
        current.append(best["feature"])
        remaining.remove(best["feature"])
        bound = sort_error_bound(project_counts(design0, design1, current), stop_at_one=True)
        _, curve = _design_and_eval(design0, design1, hold0, hold1, current)
        trace.reports.append(SubsetReport(tuple(current), curve, bound, float(auc(curve))))
        if bound.bound > cfg.bound_ceiling:
            trace.steps.append(
                SelectionStep(tuple(current), evals, best["feature"], bound.bound, "sort_bound")
            )
            return trace
        trace.steps.append(
            SelectionStep(tuple(current), evals, best["feature"], bound.bound, "accepted")
        )
    if trace.steps:
        trace.steps[-1].reason = "exhausted"
    return trace


def _split(n: int, holdout: float, rng: np.random.Generator):
    if not 0 < holdout < 1:
        raise ValueError("holdout_fraction must lie in (0, 1)")
    perm = rng.permutation(n)
    cut = n - max(1, int(round(holdout * n)))
    if cut < 1:
        raise ValueError("too few samples to split into design and held-out parts")
    return np.sort(perm[:cut]), np.sort(perm[cut:])
