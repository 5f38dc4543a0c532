"""Posterior bound on the probability that the estimated ranking is wrong.

Each bin's likelihood ratio is confined to an interval between separating
thresholds placed among the sorted bins. If every ratio stays inside its
interval the ranking is correct, so the union bound over per-bin interval
violations caps the probability of a sort error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HistogramPair, SeedLike
from .design import Ranking, likelihood_ratios, rank_bins
from .posterior import RatioPosterior, ratio_cdf, ratio_median, sample_joint_posterior

__all__ = [
    "SortBound",
    "bin_ratio_posteriors",
    "select_thresholds",
    "sort_error_bound",
    "sort_violation_frequency",
]


@dataclass(frozen=True, eq=False)
class SortBound:
    """Union bound on the sort error.

    ``thresholds`` is ascending with ``thresholds[0] = 0`` and
    ``thresholds[L] = inf``; the bin at ascending position ``i`` (the
    ``i``-th smallest estimated ratio) must fall in
    ``[thresholds[i], thresholds[i + 1]]``. ``per_bin_violation`` is indexed
    by bin; entries left unevaluated after an early stop are nan.
    """

    thresholds: np.ndarray
    per_bin_violation: np.ndarray
    bound: float
    ranking: Ranking

    def to_dict(self) -> dict:
        def enc(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "bound": float(self.bound),
            "per_bin": [enc(v) for v in self.per_bin_violation],
            "thresholds": [enc(v) for v in self.thresholds],
            "ranking": self.ranking.alpha.tolist(),
        }


def bin_ratio_posteriors(counts: HistogramPair, rtol: float = 1e-6) -> list[RatioPosterior]:
    return [
        RatioPosterior.from_counts(int(k1), counts.n1, int(k0), counts.n0, rtol)
        for k1, k0 in zip(counts.counts_h1, counts.counts_h0)
    ]


def _median_or_one(p: RatioPosterior) -> float:
    m = ratio_median(p)
    return m if (math.isfinite(m) and m > 0) else 1.0


def select_thresholds(ratios: list[RatioPosterior], order: Ranking) -> np.ndarray:
    """Separators at the geometric mean of neighbouring posterior medians.

    Walking the bins from smallest to largest estimated ratio, the separator
    between two neighbours is ``sqrt(m_low * m_high)``; a running minimum
    taken from the top keeps the sequence non-decreasing when posterior
    medians disagree with the estimated order. Bins whose median cannot be located use 1.
    """
    L = len(order)
    if len(ratios) != L:
        raise ValueError("one ratio posterior per bin is required")
    ascending = order.order[::-1]
    medians = np.array([_median_or_one(ratios[b]) for b in ascending])
    return _thresholds_from_medians(medians)


def _thresholds_from_medians(medians: np.ndarray) -> np.ndarray:
    L = len(medians)
    gamma = np.empty(L + 1)
    gamma[0] = 0.0
    gamma[L] = math.inf
    if L > 1:
        sep = np.sqrt(medians[:-1] * medians[1:])
        gamma[1:L] = np.minimum.accumulate(sep[::-1])[::-1]
    return gamma


def _violation(p: RatioPosterior, lo: float, hi: float) -> float:
    below = ratio_cdf(p, lo) if lo > 0 else 0.0
    above = 1.0 - ratio_cdf(p, hi) if math.isfinite(hi) else 0.0
    return min(1.0, max(0.0, below + above))


def sort_error_bound(
    counts: HistogramPair, stop_at_one: bool = False, rtol: float = 1e-6
) -> SortBound:
    """Upper bound on the posterior probability of a sort error.

    With ``stop_at_one`` the per-bin terms are accumulated from the highest
    ranked bin down and evaluation stops once their sum reaches 1; the bound
    is then exactly 1 and the remaining terms are reported as nan.
    """
    ranking = rank_bins(likelihood_ratios(counts)) if counts.n0 and counts.n1 else (
        Ranking.from_order(np.arange(counts.space.L))
    )
    posts = bin_ratio_posteriors(counts, rtol)
    L = counts.space.L
    per_bin = np.full(L, np.nan)
    if L == 1:
        per_bin[:] = 0.0
        return SortBound(np.array([0.0, math.inf]), per_bin, 0.0, ranking)

    descending = ranking.order
    if not stop_at_one:
        gamma = select_thresholds(posts, ranking)
        for pos in range(L):
            b = descending[L - 1 - pos]
            per_bin[b] = _violation(posts[b], gamma[pos], gamma[pos + 1])
        total = float(per_bin.sum())
        return SortBound(gamma, per_bin, min(1.0, total), ranking)

    # Lazy pass: medians are solved only for bins that are reached.
    medians: dict[int, float] = {}

    def med(rank: int) -> float:
        if rank not in medians:
            medians[rank] = _median_or_one(posts[descending[rank]])
        return medians[rank]

    # separators in descending rank order; running minimum keeps them ordered
    upper = math.inf
    total = 0.0
    for rank in range(L):
        b = descending[rank]
        lower = math.sqrt(med(rank) * med(rank + 1)) if rank + 1 < L else 0.0
        lower = min(lower, upper)
        per_bin[b] = _violation(posts[b], lower, upper)
        total += per_bin[b]
        upper = lower
        if total >= 1.0:
            break
    known = np.array([medians.get(r, np.nan) for r in range(L)])[::-1]
    gamma = np.full(L + 1, np.nan)
    gamma[0], gamma[L] = 0.0, math.inf
    if np.all(np.isfinite(known)):
        gamma = _thresholds_from_medians(known)
    return SortBound(gamma, per_bin, min(1.0, total), ranking)


def sort_violation_frequency(
    counts: HistogramPair, draws: int, seed: SeedLike, batch: int = 2000
) -> tuple[float, float]:
    """Monte Carlo probability that the true ranking differs from the estimated one.

    Bin probabilities are drawn from the joint Dirichlet posterior of each
    class; a draw is a violation when some pair of bins adjacent in the
    estimated ranking is strictly inverted by the drawn ratios. Returns the
    violation frequency and its standard error.
    """
    from .core import as_generator

    rng = as_generator(seed)
    order = rank_bins(likelihood_ratios(counts)).order
    hits = 0
    done = 0
    while done < draws:
        size = min(batch, draws - done)
        t0, t1 = sample_joint_posterior(counts, rng, size=size)
        z = (t1 / t0)[:, order]
        hits += int(np.any(z[:, :-1] < z[:, 1:], axis=1).sum())
        done += size
    p = hits / draws
    return p, math.sqrt(p * (1 - p) / draws)
