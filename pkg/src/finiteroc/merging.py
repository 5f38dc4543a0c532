"""Confidence-driven merging of histogram bins before NP design."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DistributionPair, HistogramPair, MergedSpace, is_exact
from .design import RocCurve, curve_from_ranking, likelihood_ratios, rank_bins
from .errors import SpaceMismatchError
from .posterior import w90_widths

__all__ = [
    "DEFAULT_TAU",
    "MergedHistogram",
    "bin_score",
    "bin_scores",
    "merge_until_confident",
    "design_on_merged",
    "aggregate",
]

DEFAULT_TAU = 1.0


def bin_scores(counts: HistogramPair) -> np.ndarray:
    """Class separation of every bin in units of its posterior 90% widths.

    ``|k1/n1 - k0/n0| / (w90(H1 posterior) + w90(H0 posterior))``.
    """
    if counts.n0 <= 0 or counts.n1 <= 0:
        raise ValueError("bin scores need n0 > 0 and n1 > 0")
    return _scores(counts.counts_h0, counts.counts_h1, counts.n0, counts.n1)


def _scores(k0, k1, n0: int, n1: int) -> np.ndarray:
    k0 = np.asarray(k0, float)
    k1 = np.asarray(k1, float)
    gap = np.abs(k1 / n1 - k0 / n0)
    widths = w90_widths(k1, np.full(k1.shape, n1)) + w90_widths(k0, np.full(k0.shape, n0))
    return gap / widths


def bin_score(counts: HistogramPair, j: int) -> float:
    if not 0 <= j < counts.space.L:
        raise IndexError(f"bin {j} outside [0, {counts.space.L})")
    return float(bin_scores(counts)[j])


@dataclass(frozen=True, eq=False)
class MergedHistogram:
    """Counts over merged bins plus the original-to-merged bin map."""

    merged: HistogramPair
    assignment: np.ndarray
    scores: np.ndarray
    original: HistogramPair
    tau: float

    @property
    def n_merges(self) -> int:
        return self.original.space.L - self.merged.space.L

    def to_dict(self) -> dict:
        return {
            "assignment": self.assignment.tolist(),
            "merged_counts": {
                "h0": self.merged.counts_h0.tolist(),
                "h1": self.merged.counts_h1.tolist(),
                "n0": self.merged.n0,
                "n1": self.merged.n1,
            },
            "scores": [float(s) for s in self.scores],
            "n_merges": self.n_merges,
            "tau": self.tau,
        }


def merge_until_confident(counts: HistogramPair, tau: float = DEFAULT_TAU) -> MergedHistogram:
    """Repeatedly merge the two lowest-scoring bins until every score reaches ``tau``.

    Ties in score go to the lower merged-bin index, where merged bins are
    ordered by the smallest original bin they contain. At least two bins
    always remain.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    L = counts.space.L
    n0, n1 = counts.n0, counts.n1
    k0 = [int(v) for v in counts.counts_h0]
    k1 = [int(v) for v in counts.counts_h1]
    groups = [[j] for j in range(L)]
    scores = list(bin_scores(counts))

    while len(groups) > 2:
        ranked = sorted(range(len(groups)), key=lambda i: (scores[i], i))
        if scores[ranked[0]] >= tau:
            break
        i, j = sorted(ranked[:2])
        k0[i] += k0[j]
        k1[i] += k1[j]
        groups[i].extend(groups[j])
        del k0[j], k1[j], groups[j], scores[j]
        scores[i] = float(_scores([k0[i]], [k1[i]], n0, n1)[0])

    assignment = np.empty(L, dtype=np.int64)
    for idx, g in enumerate(groups):
        assignment[g] = idx
    space = counts.space if len(groups) == L else MergedSpace(len(groups), _parent(counts))
    merged = HistogramPair(space, np.array(k0), n0, np.array(k1), n1)
    return MergedHistogram(merged, assignment, np.array(scores), counts, float(tau))


def _parent(counts: HistogramPair):
    sp = counts.space
    return sp.parent if isinstance(sp, MergedSpace) else sp


def aggregate(source, assignment: np.ndarray, n_bins: int):
    """Map a distribution or histogram through ``assignment`` onto merged bins."""
    space = MergedSpace(n_bins, _parent(source)) if n_bins != source.space.L else source.space
    if isinstance(source, HistogramPair):
        k0 = np.bincount(assignment, weights=source.counts_h0, minlength=n_bins)
        k1 = np.bincount(assignment, weights=source.counts_h1, minlength=n_bins)
        return HistogramPair(space, k0.round().astype(np.int64), source.n0,
                             k1.round().astype(np.int64), source.n1)
    if is_exact(source.theta_h0):
        t0 = [Fraction(0)] * n_bins
        t1 = [Fraction(0)] * n_bins
        for j, g in enumerate(assignment):
            t0[g] += source.theta_h0[j]
            t1[g] += source.theta_h1[j]
        return DistributionPair(space, t0, t1)
    t0 = np.bincount(assignment, weights=source.theta_h0, minlength=n_bins)
    t1 = np.bincount(assignment, weights=source.theta_h1, minlength=n_bins)
    return DistributionPair(space, t0, t1)


def design_on_merged(m: MergedHistogram, eval_on=None) -> RocCurve:
    """NP design on the merged counts, evaluated on data over the original bins.

    The evaluation source is aggregated through the merge map before the
    merged-bin labels are applied. ``eval_on`` defaults to the original
    design counts (giving the merged NEPC).
    """
    if eval_on is None:
        eval_on = m.original
    if eval_on.space != m.original.space:
        raise SpaceMismatchError("evaluation source must live on the original bins")
    ranking = rank_bins(likelihood_ratios(m.merged))
    agg = aggregate(eval_on, m.assignment, m.merged.space.L)
    if isinstance(eval_on, DistributionPair):
        label = "TOC"
    elif eval_on is m.original or eval_on == m.original:
        label = "NEPC"
    else:
        label = "EPC"
    return curve_from_ranking(ranking, agg, "estimated", label)
