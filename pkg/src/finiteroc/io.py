"""JSON and CSV interchange for histograms, distributions, curves and samples.

Histogram JSON::

    {"l": 2, "kind": "counts", "h0": [6, 13, 12, 9], "h1": [18, 10, 5, 7],
     "n0": 40, "n1": 40}

``kind`` is ``"counts"`` or ``"probabilities"``; ``n0``/``n1`` are optional
and checked against the count totals when present. Probabilities given as
decimal literals are read exactly. The CSV form has a header and rows
``bin_index,h0,h1``.
"""
from __future__ import annotations

import csv
import io as _io
import json
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import PROBABILITY_ATOL, DistributionPair, HistogramPair, make_feature_space
from .design import Ranking, RocCurve

__all__ = [
    "parse_histogram",
    "histogram_to_dict",
    "load_histogram",
    "dump_histogram",
    "histogram_to_csv",
    "curve_from_dict",
    "load_curve",
    "load_samples",
]


def _exact_or_float(values) -> list:
    return [Fraction(v) if isinstance(v, (Decimal, str)) else v for v in values]


def _distribution(h0, h1, space) -> DistributionPair:
    t0, t1 = _exact_or_float(h0), _exact_or_float(h1)
    exact_ok = all(sum(t, Fraction(0)) == 1 for t in (t0, t1)
                   if all(isinstance(v, (Fraction, int)) for v in t))
    if exact_ok:
        return DistributionPair(space, t0, t1)
    # sums off by rounding in the source text: fall back to floats
    f0, f1 = np.array(t0, float), np.array(t1, float)
    if max(abs(f0.sum() - 1), abs(f1.sum() - 1)) > PROBABILITY_ATOL * len(f0):
        raise ValueError("probabilities do not sum to 1")
    return DistributionPair(space, f0 / f0.sum(), f1 / f1.sum())


def parse_histogram(obj: dict):
    """Histogram JSON object to a :class:`HistogramPair` or :class:`DistributionPair`."""
    try:
        l = int(obj["l"])
        h0, h1 = list(obj["h0"]), list(obj["h1"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"histogram JSON needs l, h0 and h1: {exc}") from exc
    kind = obj.get("kind", "counts")
    space = make_feature_space(l)
    if kind == "counts":
        counts = HistogramPair.from_counts([_as_int(v) for v in h0], [_as_int(v) for v in h1], space)
        for key, n in (("n0", counts.n0), ("n1", counts.n1)):
            if obj.get(key) is not None and int(obj[key]) != n:
                raise ValueError(f"{key}={obj[key]} disagrees with count total {n}")
        return counts
    if kind == "probabilities":
        return _distribution(h0, h1, space)
    raise ValueError(f"unknown histogram kind {kind!r}")


def _as_int(v) -> int:
    if isinstance(v, (Decimal, float, Fraction)) and v != int(v):
        raise ValueError(f"count {v} is not an integer")
    return int(v)


def histogram_to_dict(source) -> dict:
    if isinstance(source, HistogramPair):
        return {"l": source.space.l, "kind": "counts",
                "h0": source.counts_h0.tolist(), "h1": source.counts_h1.tolist(),
                "n0": source.n0, "n1": source.n1}
    enc = (lambda v: str(v)) if source.exact else float
    return {"l": source.space.l, "kind": "probabilities",
            "h0": [enc(v) for v in source.theta_h0], "h1": [enc(v) for v in source.theta_h1]}


def _read_csv_histogram(text: str, kind: str):
    rows = list(csv.DictReader(_io.StringIO(text)))
    if not rows or not {"bin_index", "h0", "h1"} <= set(rows[0]):
        raise ValueError("histogram CSV needs a bin_index,h0,h1 header and at least one row")
    rows.sort(key=lambda r: int(r["bin_index"]))
    if [int(r["bin_index"]) for r in rows] != list(range(len(rows))):
        raise ValueError("histogram CSV bin indices must be 0..L-1")
    L = len(rows)
    l = L.bit_length() - 1
    if 1 << l != L:
        raise ValueError(f"{L} bins is not a power of two")
    try:
        h0 = [Fraction(r["h0"].strip()) for r in rows]
        h1 = [Fraction(r["h1"].strip()) for r in rows]
    except ValueError as exc:
        raise ValueError(f"histogram CSV holds a non-numeric value: {exc}") from exc
    return parse_histogram({"l": l, "kind": kind, "h0": h0, "h1": h1})


def load_histogram(path, fmt: str | None = None, kind: str = "counts"):
    """Read a histogram from JSON (default) or CSV; a ``.csv`` suffix selects CSV."""
    text = Path(path).read_text()
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "json")
    if fmt == "csv":
        return _read_csv_histogram(text, kind)
    try:
        obj = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return parse_histogram(obj)


def dump_histogram(source, path) -> None:
    Path(path).write_text(json.dumps(histogram_to_dict(source), indent=2) + "\n")


def histogram_to_csv(source) -> str:
    d = histogram_to_dict(source)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_index", "h0", "h1"])
    for j, (a, b) in enumerate(zip(d["h0"], d["h1"])):
        w.writerow([j, a, b])
    return buf.getvalue()


def curve_from_dict(obj: dict) -> RocCurve:
    """Inverse of :meth:`RocCurve.to_dict`; ``ranking`` holds each bin's rank."""
    try:
        pts = sorted(obj["points"], key=lambda p: int(p["m"]))
        points = np.array([[float(p["pf"]), float(p["pd"])] for p in pts])
        alpha = np.asarray(obj.get("ranking", range(len(pts) - 1)), dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed curve JSON: {exc}") from exc
    if len(alpha) != len(points) - 1:
        raise ValueError("curve ranking must have one entry per bin")
    order = np.empty_like(alpha)
    order[alpha] = np.arange(len(alpha))
    return RocCurve(points, Ranking.from_order(order), obj.get("source", "estimated"),
                    obj.get("label", ""))


def load_curve(path) -> RocCurve:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return curve_from_dict(obj)


def load_samples(path):
    """Sample CSV: one row per sample, class label (0/1) then the feature bits.

    A header row is skipped when its first field is not an integer.
    """
    from .subsets import LabeledSamples

    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no samples")
    width = {len(r) for r in rows}
    if len(width) != 1 or width.pop() < 2:
        raise ValueError(f"{path}: rows must all hold a label and the same number of bits")
    try:
        arr = np.array([[int(v) for v in r] for r in rows], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer field: {exc}") from exc
    return LabeledSamples.from_rows(arr[:, 0], arr[:, 1:])
