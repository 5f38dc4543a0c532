"""Monte Carlo studies of how finite samples distort NP-designed curves.

A base distribution pair is padded with white features (independent fair
bits under both classes) so the true ROC stays fixed while the number of
bins grows. Each replication draws design counts and independent
evaluation counts, designs on the former and records three curves:

* NEPC: the design evaluated on its own counts,
* EPC: the design evaluated on the independent counts,
* TOC: the design evaluated on the true distribution.

Replication ``rep`` at feature count ``l`` draws from
``np.random.SeedSequence(seed, spawn_key=(l, rep))``: design counts first,
evaluation counts second. Any replication can therefore be re-run alone.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import DEFAULT_MAX_FEATURES, DistributionPair, HistogramPair, is_exact, make_feature_space, sample_counts
from .datasets import worked_example
from .design import RocCurve, auc, curve_from_ranking, likelihood_ratios, rank_bins
from .merging import DEFAULT_TAU, design_on_merged, merge_until_confident
from .sortconf import sort_error_bound
from .subsets import curve_value_at

__all__ = [
    "ExperimentConfig",
    "ReplicationRecord",
    "ExperimentResult",
    "MergeSweepRow",
    "extend_with_white_features",
    "replication_seed",
    "run_replication",
    "run_experiment",
    "merge_sweep",
    "write_outputs",
]

AGGREGATE_FIELDS = [
    "l", "replications",
    "auc_nepc_mean", "auc_nepc_std",
    "auc_epc_mean", "auc_epc_std",
    "auc_toc_mean", "auc_toc_std",
    "sort_bound_mean", "merges_mean",
]
REPLICATION_FIELDS = ["l", "rep", "auc_nepc", "auc_epc", "auc_toc", "sort_bound", "n_merges", "n_bins"]


def extend_with_white_features(base: DistributionPair, l: int) -> DistributionPair:
    """Append ``l - base.l`` white features to a distribution pair.

    The base features occupy the low-order bits of the extended bin index,
    so bin ``j`` carries ``theta_base[j mod 2**base.l] * 2**-(l - base.l)``.
    """
    l0 = base.space.l
    if l < l0:
        raise ValueError(f"cannot shrink a {l0}-feature pair to {l} features")
    if l == l0:
        return base
    space = make_feature_space(l)
    reps = 1 << (l - l0)
    if is_exact(base.theta_h0):
        scale = Fraction(1, reps)
        t0 = [v * scale for v in base.theta_h0] * reps
        t1 = [v * scale for v in base.theta_h1] * reps
        return DistributionPair(space, t0, t1)
    t0 = np.tile(np.asarray(base.theta_h0, float), reps) / reps
    t1 = np.tile(np.asarray(base.theta_h1, float), reps) / reps
    return DistributionPair(space, t0, t1)


@dataclass
class ExperimentConfig:
    """Parameters of a white-feature experiment.

    ``base`` is ``None`` for the two-feature worked example, or a mapping
    ``{"h0": [...], "h1": [...]}`` of bin probabilities (decimal strings
    keep them exact).
    """

    l_values: list[int] = field(default_factory=lambda: [2, 4, 6, 8, 10, 12])
    n0: int = 1024
    n1: int = 1024
    n_eval: int = 2048
    replications: int = 100
    seed: int = 0
    merge: bool = False
    tau: float = DEFAULT_TAU
    sort_bound: bool = True
    pf_grid: int = 101
    workers: int = 1
    base: dict | None = None
    output_dir: str | None = None

    def __post_init__(self):
        self.l_values = [int(v) for v in self.l_values]
        for name in ("n0", "n1", "n_eval", "replications", "pf_grid", "workers"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.l_values:
            raise ValueError("l_values must not be empty")
        base_l = self.base_distribution().space.l
        for l in self.l_values:
            if not base_l <= l <= DEFAULT_MAX_FEATURES:
                raise ValueError(f"l={l} outside [{base_l}, {DEFAULT_MAX_FEATURES}]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def base_distribution(self) -> DistributionPair:
        if self.base is None:
            return worked_example()
        h0, h1 = self.base["h0"], self.base["h1"]
        if all(isinstance(v, str) for v in list(h0) + list(h1)):
            return DistributionPair.from_decimal_strings(h0, h1)
        return DistributionPair.from_arrays(h0, h1)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True, eq=False)
class ReplicationRecord:
    l: int
    rep: int
    seed: int
    nepc: RocCurve
    epc: RocCurve
    toc: RocCurve
    auc_nepc: float
    auc_epc: float
    auc_toc: float
    sort_bound: float | None
    n_merges: int | None

    def row(self) -> dict:
        return {
            "l": self.l,
            "rep": self.rep,
            "auc_nepc": self.auc_nepc,
            "auc_epc": self.auc_epc,
            "auc_toc": self.auc_toc,
            "sort_bound": self.sort_bound,
            "n_merges": self.n_merges,
            "n_bins": len(self.nepc.points) - 1,
        }


def replication_seed(seed: int, l: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(l, rep))


def _draw(cfg: ExperimentConfig, truth: DistributionPair, l: int, rep: int):
    rng = np.random.default_rng(replication_seed(cfg.seed, l, rep))
    design = sample_counts(truth, cfg.n0, cfg.n1, rng)
    evaluation = sample_counts(truth, cfg.n_eval, cfg.n_eval, rng)
    return design, evaluation


def _truth(cfg: ExperimentConfig, l: int) -> DistributionPair:
    return extend_with_white_features(cfg.base_distribution(), l)


def run_replication(
    cfg: ExperimentConfig,
    l: int,
    rep: int,
    design_counts: HistogramPair | None = None,
    eval_counts: HistogramPair | None = None,
    truth: DistributionPair | None = None,
    tau: float | None = None,
) -> ReplicationRecord:
    """One design/evaluate cycle at ``l`` features.

    Counts not supplied are drawn from the replication's own stream. With
    ``tau`` (or ``cfg.merge``) the design counts are merged first and all
    three curves use the merged design.
    """
    truth = _truth(cfg, l) if truth is None else truth
    if design_counts is None or eval_counts is None:
        drawn_design, drawn_eval = _draw(cfg, truth, l, rep)
        design_counts = drawn_design if design_counts is None else design_counts
        eval_counts = drawn_eval if eval_counts is None else eval_counts
    for name, src in (("design", design_counts), ("evaluation", eval_counts)):
        if src.space != truth.space:
            raise ValueError(f"{name} counts do not live on the {l}-feature space")
    truth_f = truth.as_float() if truth.exact else truth
    if tau is None and cfg.merge:
        tau = cfg.tau

    n_merges = None
    if tau is not None:
        merged = merge_until_confident(design_counts, tau)
        n_merges = merged.n_merges
        nepc = design_on_merged(merged, design_counts)
        epc = design_on_merged(merged, eval_counts)
        toc = design_on_merged(merged, truth_f)
    else:
        ranking = rank_bins(likelihood_ratios(design_counts))
        nepc = curve_from_ranking(ranking, design_counts, "estimated", "NEPC")
        epc = curve_from_ranking(ranking, eval_counts, "estimated", "EPC")
        toc = curve_from_ranking(ranking, truth_f, "estimated", "TOC")
    bound = sort_error_bound(design_counts, stop_at_one=True).bound if cfg.sort_bound else None
    return ReplicationRecord(
        l, rep, cfg.seed, nepc, epc, toc,
        float(auc(nepc)), float(auc(epc)), float(auc(toc)),
        None if bound is None else float(bound), n_merges,
    )


def _grid_pd(curve: RocCurve, grid: np.ndarray) -> np.ndarray:
    return np.array([float(curve_value_at(curve, float(p))) for p in grid])


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[ReplicationRecord]
    aggregates: list[dict]
    grid: list[dict]

    def aggregate_for(self, l: int) -> dict:
        for row in self.aggregates:
            if row["l"] == l:
                return row
        raise KeyError(l)

    def manifest(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed_derivation": "numpy SeedSequence(seed, spawn_key=(l, rep)); design counts then evaluation counts",
            "replications": [
                {"l": r.l, "rep": r.rep, "spawn_key": [r.l, r.rep]} for r in self.records
            ],
            "files": ["aggregate.csv", "replications.csv", "curves.csv", "manifest.json"],
        }


def _job(args):
    cfg, l, rep = args
    return run_replication(cfg, l, rep)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (l, rep) replication and aggregate per ``l``.

    Records are ordered by (l, rep) whatever order the workers finish in.
    """
    jobs = [(cfg, l, rep) for l in cfg.l_values for rep in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        records = [_job(j) for j in jobs]
    records.sort(key=lambda r: (r.l, r.rep))

    pf = np.linspace(0.0, 1.0, cfg.pf_grid)
    aggregates, grid = [], []
    for l in cfg.l_values:
        rs = [r for r in records if r.l == l]
        row = {"l": l, "replications": len(rs)}
        for name in ("nepc", "epc", "toc"):
            vals = np.array([getattr(r, "auc_" + name) for r in rs])
            row[f"auc_{name}_mean"] = float(vals.mean())
            row[f"auc_{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        bounds = [r.sort_bound for r in rs if r.sort_bound is not None]
        row["sort_bound_mean"] = float(np.mean(bounds)) if bounds else None
        merges = [r.n_merges for r in rs if r.n_merges is not None]
        row["merges_mean"] = float(np.mean(merges)) if merges else None
        aggregates.append(row)
        pds = {name: np.mean([_grid_pd(getattr(r, name), pf) for r in rs], axis=0)
               for name in ("nepc", "epc", "toc")}
        for i, p in enumerate(pf):
            grid.append({"l": l, "pf": float(p), "pd_nepc": float(pds["nepc"][i]),
                         "pd_epc": float(pds["epc"][i]), "pd_toc": float(pds["toc"][i])})
    return ExperimentResult(cfg, records, aggregates, grid)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def rows_to_csv(rows: Sequence[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in fields])
    return buf.getvalue()


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """Write aggregate, per-replication and grid CSVs plus a JSON manifest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "aggregate": out / "aggregate.csv",
            "replications": out / "replications.csv",
            "curves": out / "curves.csv",
            "manifest": out / "manifest.json",
        }
        paths["aggregate"].write_text(rows_to_csv(result.aggregates, AGGREGATE_FIELDS))
        paths["replications"].write_text(
            rows_to_csv([r.row() for r in result.records], REPLICATION_FIELDS)
        )
        paths["curves"].write_text(
            rows_to_csv(result.grid, ["l", "pf", "pd_nepc", "pd_epc", "pd_toc"])
        )
        paths["manifest"].write_text(json.dumps(result.manifest(), indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"could not write experiment outputs under {out}: {exc}") from exc
    return paths


@dataclass(frozen=True)
class MergeSweepRow:
    tau: float | None
    merges_mean: float
    gap_mean: float
    auc_nepc_mean: float
    auc_epc_mean: float


def merge_sweep(cfg: ExperimentConfig, l: int, taus: Sequence[float]) -> list[MergeSweepRow]:
    """Paired comparison of merging thresholds at one ``l``.

    Every replication's counts are drawn once and reused for the unmerged
    design (first row, ``tau=None``) and for each ``tau``. The gap is
    ``AUC(NEPC) - AUC(EPC)``.
    """
    truth = _truth(cfg, l)
    draws = [_draw(cfg, truth, l, rep) for rep in range(cfg.replications)]
    plain = ExperimentConfig(**{**cfg.to_dict(), "sort_bound": False, "merge": False})
    rows = []
    for tau in [None, *taus]:
        recs = [run_replication(plain, l, rep, d, e, truth=truth, tau=tau)
                for rep, (d, e) in enumerate(draws)]
        nepc = np.array([r.auc_nepc for r in recs])
        epc = np.array([r.auc_epc for r in recs])
        merges = [r.n_merges or 0 for r in recs]
        rows.append(MergeSweepRow(tau, float(np.mean(merges)), float(np.mean(nepc - epc)),
                                  float(nepc.mean()), float(epc.mean())))
    return rows
