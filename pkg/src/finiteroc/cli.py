"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import io as fio
from .core import DistributionPair, HistogramPair
from .design import _as_points, enumerate_aos, np_design
from .experiments import (
    AGGREGATE_FIELDS,
    ExperimentConfig,
    merge_sweep,
    rows_to_csv,
    run_experiment,
    write_outputs,
)
from .merging import DEFAULT_TAU, merge_until_confident
from .posterior import bin_posterior, chebychev_tail, chebychev_tail_universal, percentile_width_w90
from .sortconf import sort_error_bound
from .subsets import SelectionConfig, forward_select, hull_of_union, uniformly_preferable

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _json_default(v):
    if hasattr(v, "tolist"):
        return v.tolist()
    return float(v)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: "" if v is None else v for k, v in r.items()})
    return buf.getvalue()


def _emit(args, payload: dict, rows: list[dict] | None = None) -> None:
    if args.format == "csv":
        if rows is None:
            raise ValueError(f"{args.command} has no CSV form; use --format json")
        text = _table_csv(rows)
    else:
        text = json.dumps(_clean(payload), indent=2, default=_json_default) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _curve_rows(curve_dict: dict) -> list[dict]:
    return [dict(p) for p in curve_dict["points"]]


def _need_input(args):
    if not args.input:
        raise ValueError(f"{args.command} needs --input")
    return args.input


def cmd_design(args):
    source = fio.load_histogram(_need_input(args), kind=args.kind)
    eval_on = fio.load_histogram(args.eval, kind=args.eval_kind) if args.eval else None
    curve = np_design(source, eval_on, exact=args.exact)
    d = curve.to_dict()
    if curve.exact:
        d["points_exact"] = [{"m": m, "pf": str(pf), "pd": str(pd)}
                             for m, (pf, pd) in enumerate(curve.points)]
    _emit(args, d, _curve_rows(d))


def cmd_enumerate(args):
    dist = fio.load_histogram(_need_input(args), kind="probabilities")
    if not isinstance(dist, DistributionPair):
        raise ValueError("enumerate needs a probabilities histogram")
    aos = enumerate_aos(dist)
    d = np_design(dist, exact=dist.exact).to_dict()
    d["aos"] = [{"classifier": j, "pf": float(pf), "pd": float(pd)} for j, (pf, pd) in enumerate(aos)]
    _emit(args, d, d["aos"])


def cmd_posterior(args):
    counts = fio.load_histogram(_need_input(args))
    if not isinstance(counts, HistogramPair):
        raise ValueError("posterior needs a counts histogram")
    rows = []
    for cls, ks, n in ((0, counts.counts_h0, counts.n0), (1, counts.counts_h1, counts.n1)):
        for j, k in enumerate(ks):
            p = bin_posterior(int(k), n)
            rows.append({
                "bin": j, "class": cls, "k": int(k), "n": n,
                "mean": p.mean, "mode": p.mode, "variance": p.variance,
                "w90": percentile_width_w90(p),
                "chebychev": chebychev_tail(int(k), n, args.nu) if n else 1.0,
                "chebychev_universal": chebychev_tail_universal(n, args.nu) if n else 1.0,
                "nu": args.nu,
            })
    _emit(args, {"bins": rows}, rows)


def cmd_sortconf(args):
    counts = fio.load_histogram(_need_input(args))
    if not isinstance(counts, HistogramPair):
        raise ValueError("sortconf needs a counts histogram")
    d = sort_error_bound(counts, stop_at_one=args.stop_at_one).to_dict()
    rows = [{"bin": j, "violation": v} for j, v in enumerate(d["per_bin"])]
    _emit(args, d, rows)


def cmd_merge(args):
    counts = fio.load_histogram(_need_input(args))
    if not isinstance(counts, HistogramPair):
        raise ValueError("merge needs a counts histogram")
    m = merge_until_confident(counts, args.tau)
    rows = [{"bin": j, "merged_bin": int(g)} for j, g in enumerate(m.assignment)]
    _emit(args, m.to_dict(), rows)


def cmd_compare(args):
    paths = _need_input(args)
    if len(paths) != 2:
        raise ValueError("compare needs exactly two curve files")
    c1, c2 = (fio.load_curve(p) for p in paths)
    hull = [{"pf": float(a), "pd": float(b)} for a, b in _as_points(hull_of_union(c1, c2))]
    _emit(args, {
        "preferable_1_over_2": uniformly_preferable(c1, c2),
        "preferable_2_over_1": uniformly_preferable(c2, c1),
        "hull": hull,
    }, hull)


def cmd_select(args):
    data = fio.load_samples(_need_input(args))
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        cfg["seed"] = args.seed
    features = cfg.pop("features", None)
    initial = cfg.pop("initial", ())
    trace = forward_select(data, features, SelectionConfig.from_dict(cfg), initial)
    d = trace.to_dict()
    rows = [{"step": i, "subset": " ".join(map(str, s["subset"])), "accepted": s["accepted"],
             "bound": s["bound"], "reason": s["reason"]} for i, s in enumerate(d["steps"])]
    _emit(args, d, rows)


def cmd_simulate(args):
    cfg_dict = json.loads(Path(args.input).read_text()) if args.input else {}
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.replications is not None:
        cfg_dict["replications"] = args.replications
    if args.workers is not None:
        cfg_dict["workers"] = args.workers
    cfg = ExperimentConfig.from_dict(cfg_dict)
    if args.tau_sweep:
        rows = []
        for l in cfg.l_values:
            for r in merge_sweep(cfg, l, args.tau_sweep):
                rows.append({"l": l, "tau": r.tau, "merges_mean": r.merges_mean,
                             "gap_mean": r.gap_mean, "auc_nepc_mean": r.auc_nepc_mean,
                             "auc_epc_mean": r.auc_epc_mean})
        _emit(args, {"sweep": rows}, rows)
        return
    result = run_experiment(cfg)
    out_dir = args.output_dir or cfg.output_dir
    if out_dir:
        write_outputs(result, out_dir)
    if args.format == "csv":
        text = rows_to_csv(result.aggregates, AGGREGATE_FIELDS)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, {"aggregates": result.aggregates, "manifest": result.manifest()})


def _subcommand(sub, name: str, help: str, input_nargs=None, **input_kw):
    s = sub.add_parser(name, help=help)
    s.add_argument("--input", "-i", nargs=input_nargs, **input_kw)
    s.add_argument("--output", "-o", help="write here instead of stdout")
    s.add_argument("--seed", type=int)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    return s


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finiteroc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = _subcommand(sub, "design", "NP design from a histogram")
    s.add_argument("--kind", choices=("counts", "probabilities"), default="counts")
    s.add_argument("--eval", help="histogram to evaluate the design on")
    s.add_argument("--eval-kind", choices=("counts", "probabilities"), default="counts")
    s.add_argument("--exact", action="store_true", help="rational arithmetic")
    s.set_defaults(func=cmd_design)

    s = _subcommand(sub, "enumerate", "all labelings of a small space")
    s.set_defaults(func=cmd_enumerate)

    s = _subcommand(sub, "posterior", "per-bin beta posterior report")
    s.add_argument("--nu", type=float, default=0.025, help="tail half-width for the Chebychev bound")
    s.set_defaults(func=cmd_posterior)

    s = _subcommand(sub, "sortconf", "sort error bound")
    s.add_argument("--stop-at-one", action="store_true")
    s.set_defaults(func=cmd_sortconf)

    s = _subcommand(sub, "merge", "confidence-driven bin merging")
    s.add_argument("--tau", type=float, default=DEFAULT_TAU)
    s.set_defaults(func=cmd_merge)

    s = _subcommand(sub, "compare", "compare two curve files", 2, metavar=("CURVE1", "CURVE2"))
    s.set_defaults(func=cmd_compare)

    s = _subcommand(sub, "select", "forward feature selection on a sample CSV")
    s.add_argument("--config", help="JSON with selection settings, features, initial")
    s.set_defaults(func=cmd_select)

    s = _subcommand(sub, "simulate", "white-feature Monte Carlo experiment")
    s.add_argument("--output-dir", help="directory for aggregate/replication CSVs and manifest")
    s.add_argument("--replications", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--tau-sweep", type=float, nargs="+", metavar="TAU",
                   help="paired merge sweep instead of the plain experiment")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except OSError as exc:
        print(f"finiteroc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"finiteroc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        print(f"finiteroc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
