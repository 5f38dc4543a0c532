"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from finiteroc import (
    ApproximationInvalidError,
    ExperimentConfig,
    HistogramPair,
    RatioPosterior,
    WORKED_EXAMPLE_AUC,
    bin_posterior,
    chebychev_tail,
    chebychev_tail_universal,
    curve_value_at,
    enumerate_aos,
    hull_of_union,
    likelihood_ratios,
    make_feature_space,
    merge_sweep,
    np_design,
    rank_bins,
    ratio_cdf,
    ratio_density,
    ratio_normal_approx,
    roc_vertices,
    run_experiment,
    sort_error_bound,
    sort_violation_frequency,
    uniformly_preferable,
    upper_hull,
    worked_example,
    worked_example_counts,
)
from finiteroc.cli import main as cli_main

from conftest import random_exact_pair
from test_subsets import sub_distribution

SUPPORT = [(Fraction(a), Fraction(b)) for a, b in
           [("0", "0"), ("0.15", "0.30"), ("0.40", "0.65"), ("0.60", "0.80"), ("1", "1")]]


@pytest.fixture
def report(capsys):
    def emit(tag: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{tag} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, f"{tag}: {detail}"

    return emit


def test_ac01_worked_example_exact(report):
    d = worked_example()
    np_design(d, exact=True)
    times = []
    for _ in range(50):
        t = time.perf_counter()
        c = np_design(d, exact=True)
        times.append(time.perf_counter() - t)
    ms = 1e3 * float(np.median(times))
    pts = [tuple(p) for p in c.points]
    ok = pts == SUPPORT and c.ranking.alpha.tolist() == [0, 1, 3, 2] and ms < 1.0
    report("AC1", ok, f"support points exact, alpha={c.ranking.alpha.tolist()}, median runtime {ms:.3f} ms")


def test_ac02_aos_table(report):
    table = [("0.00", "0.00"), ("0.15", "0.30"), ("0.25", "0.35"), ("0.40", "0.65"),
             ("0.40", "0.20"), ("0.55", "0.50"), ("0.65", "0.55"), ("0.80", "0.85"),
             ("0.20", "0.15"), ("0.35", "0.45"), ("0.45", "0.50"), ("0.60", "0.80"),
             ("0.60", "0.35"), ("0.75", "0.65"), ("0.85", "0.70"), ("1.00", "1.00")]
    aos = [tuple(p) for p in enumerate_aos(worked_example())]
    expected = [(Fraction(a), Fraction(b)) for a, b in table]
    matches = sum(a == b for a, b in zip(aos, expected))
    report("AC2", matches == 16 and len(aos) == 16, f"{matches}/16 rows match exactly")


def test_ac03_oracle_equivalence(report):
    rng = np.random.default_rng(3)
    t = time.perf_counter()
    bad = 0
    for l, trials in ((3, 100), (4, 5)):
        for _ in range(trials):
            d = random_exact_pair(rng, l)
            hull = [tuple(p) for p in upper_hull(enumerate_aos(d))]
            bad += hull != [tuple(p) for p in roc_vertices(np_design(d, exact=True))]
    secs = time.perf_counter() - t
    report("AC3", bad == 0 and secs < 120, f"{105 - bad}/105 hulls equal the designed ROC, {secs:.1f} s")


def test_ac04_sort_error_demo(report):
    counts, truth = worked_example_counts(), worked_example()
    alpha = rank_bins(likelihood_ratios(counts)).alpha.tolist()
    toc = np_design(counts, truth, exact=True)
    g2 = tuple(toc.points[2])
    roc_at = curve_value_at(np_design(truth, exact=True), g2[0])
    ok = alpha == [0, 2, 3, 1] and g2 == (Fraction("0.35"), Fraction("0.45")) and g2[1] < roc_at
    report("AC4", ok, f"alpha_hat={alpha}, TOC G^2={tuple(map(float, g2))}, ROC at 0.35={float(roc_at)}")


def test_ac05_posterior_formulas(report):
    worst, mode_bad = 0.0, 0
    for n in (1, 2, 10, 40, 100, 512, 2048):
        for k in sorted({0, 1, n // 3, n // 2, n - 1, n}):
            if not 0 <= k <= n:
                continue
            p = bin_posterior(k, n)
            lo, hi = p.support_bracket
            kw = dict(points=[lo, hi], limit=300, epsabs=1e-14, epsrel=1e-12)
            m = integrate.quad(lambda x: x * p.pdf(x), 0, 1, **kw)[0]
            v = integrate.quad(lambda x: (x - p.mean) ** 2 * p.pdf(x), 0, 1, **kw)[0]
            worst = max(worst, abs(m - p.mean), abs(v - p.variance))
            if 1 <= k <= n - 1:
                # the density's maximiser
                grid = np.linspace(max(lo, 0), min(hi, 1), 20001)
                mode_bad += abs(grid[np.argmax(p.logpdf(grid))] - p.mode) > (hi - lo) / 20000 + 1e-12
    rng = np.random.default_rng(15)
    violations = 0
    boundary = 0
    for _ in range(100):
        n = int(rng.integers(1, 2049))
        k = int(rng.integers(0, n + 1))
        nu = float(rng.uniform(0.001, 0.3))
        p = bin_posterior(k, n)
        tail = p.cdf(p.mean - nu) + 1 - p.cdf(p.mean + nu)
        # the plug-in form vanishes at k in {0, n}; the universal form covers those
        if 1 <= k <= n - 1:
            bound = chebychev_tail(k, n, nu)
        else:
            boundary += 1
            bound = chebychev_tail_universal(n, nu)
        violations += tail > bound + 1e-12
    ok = worst < 1e-8 and mode_bad == 0 and violations == 0
    report("AC5", ok, f"max moment error {worst:.2e}; mode mismatches {mode_bad}; Chebychev violations {violations}/100 "
                      f"({boundary} boundary cases checked with the universal form)")


def test_ac06_localization(report):
    p = bin_posterior(512, 1024)
    mass = p.cdf(p.mean + 0.025) - p.cdf(p.mean - 0.025)
    report("AC6", mass >= 0.88, f"posterior mass within +-0.025 of the mean = {mass:.4f}")


def _tv_against_draws(k1, k0, n, draws=10**6, seed=0):
    rng = np.random.default_rng(seed)
    r = RatioPosterior.from_counts(k1, n, k0, n)
    z = rng.beta(k1 + 1, n - k1 + 1, draws) / rng.beta(k0 + 1, n - k0 + 1, draws)
    edges = np.quantile(z, np.linspace(0.0005, 0.9995, 201))
    emp = np.histogram(z, edges)[0] / draws
    cdf = np.array([ratio_cdf(r, e) for e in edges])
    num = np.diff(cdf)
    tails_emp = np.array([np.mean(z < edges[0]), np.mean(z >= edges[-1])])
    tails_num = np.array([cdf[0], 1 - cdf[-1]])
    # the density must be the derivative of the CDF: central differences at a few edges
    mids = edges[20::40]
    dens = np.array([ratio_density(r, m) for m in mids])
    h = 1e-5 * mids
    fd = np.array([(ratio_cdf(r, m + d) - ratio_cdf(r, m - d)) / (2 * d) for m, d in zip(mids, h)])
    consistent = bool(np.allclose(dens, fd, rtol=1e-5))
    return 0.5 * (np.abs(emp - num).sum() + np.abs(tails_emp - tails_num).sum()), consistent


def test_ac07_ratio_density_oracle(report):
    res = {case: _tv_against_draws(*case) for case in [(18, 6, 40), (500, 500, 1000), (3, 30, 40)]}
    ok = all(tv < 0.02 and cons for tv, cons in res.values())
    report("AC7", ok, "TV distances " + ", ".join(f"{k}: {tv:.4f}" for k, (tv, _) in res.items())
           + f"; density matches CDF derivative in {sum(c for _, c in res.values())}/3 cases")


def test_ac08_normal_approximation(report):
    worst = 0.0
    ks = (200, 350, 500, 650, 800)
    for k1 in ks:
        for k0 in ks:
            r = RatioPosterior.from_counts(k1, 1000, k0, 1000)
            mu = r.numerator.mean / r.denominator.mean
            s = mu * math.sqrt(r.numerator.variance / r.numerator.mean**2
                               + r.denominator.variance / r.denominator.mean**2)
            z = np.linspace(max(0.0, mu - 10 * s), mu + 10 * s, 1201)
            exact = np.array([ratio_density(r, v) for v in z])
            approx = ratio_normal_approx(r, z)
            worst = max(worst, float(np.trapezoid(np.abs(exact - approx), z)))
    gated = 0
    for k1, k0 in ((1, 500), (500, 995), (5, 5)):
        try:
            ratio_normal_approx(RatioPosterior.from_counts(k1, 1000, k0, 1000), 1.0)
        except ApproximationInvalidError:
            gated += 1
    report("AC8", worst < 0.05 and gated == 3, f"max L1 over 25 cases {worst:.4f}; {gated}/3 gate errors raised")


def test_ac09_sort_bound_validity(report):
    rng = np.random.default_rng(9)
    t = time.perf_counter()
    failures, worst_margin = 0, -1.0
    for i in range(50):
        l = int(rng.integers(1, 4))
        n = int(rng.choice([20, 80, 320]))
        L = 1 << l
        w0 = rng.dirichlet(np.ones(L))
        w1 = rng.dirichlet(np.ones(L))
        counts = HistogramPair(make_feature_space(l), rng.multinomial(n, w0), n, rng.multinomial(n, w1), n)
        b = sort_error_bound(counts).bound
        p, se = sort_violation_frequency(counts, 10**4, seed=1000 + i)
        failures += p > b + 3 * se
        worst_margin = max(worst_margin, p - b)
    secs = time.perf_counter() - t
    report("AC9", failures == 0 and secs < 600,
           f"{50 - failures}/50 tables covered; max(freq - bound) = {worst_margin:.4f}; {secs:.1f} s")


def test_ac10_growing_l(report):
    t = time.perf_counter()
    res = run_experiment(ExperimentConfig())
    secs = time.perf_counter() - t
    epc = [r["auc_epc_mean"] for r in res.aggregates]
    nepc = [r["auc_nepc_mean"] for r in res.aggregates]
    toc = [r["auc_toc_mean"] for r in res.aggregates]
    ok = (all(a >= b for a, b in zip(epc, epc[1:])) and abs(epc[-1] - 0.5) <= 0.05
          and all(a <= b for a, b in zip(nepc, nepc[1:])) and nepc[-1] > 0.85
          and max(toc) <= WORKED_EXAMPLE_AUC + 0.01 and secs < 900)
    fmt = lambda xs: "[" + ", ".join(f"{x:.3f}" for x in xs) + "]"
    report("AC10", ok, f"EPC {fmt(epc)} NEPC {fmt(nepc)} TOC {fmt(toc)}; {secs:.0f} s")


TAU_GRID = (0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0)


def test_ac11_merging(report):
    rows = merge_sweep(ExperimentConfig(replications=50, seed=5), 7, TAU_GRID)
    raw = rows[0]
    reduced = [r.tau for r in rows[1:] if r.gap_mean <= 0.5 * raw.gap_mean]
    near_42 = [r.tau for r in rows[1:] if 30 <= r.merges_mean <= 55]
    lines = "; ".join(f"tau={r.tau}: merges {r.merges_mean:.1f}, gap {r.gap_mean:.4f}" for r in rows[1:])
    report("AC11", bool(reduced) and bool(near_42),
           f"raw gap {raw.gap_mean:.4f}; halved at tau {reduced}; 30-55 merges at tau {near_42}. {lines}")


def test_ac12_uniform_preferability(report):
    rng = np.random.default_rng(12)
    failures = 0
    for _ in range(50):
        l = int(rng.integers(2, 4))
        d = random_exact_pair(rng, l, distinct=False)
        feats = list(range(l))
        q1 = sorted(rng.choice(feats, size=int(rng.integers(1, l + 1)), replace=False).tolist())
        q2 = sorted(rng.choice(feats, size=int(rng.integers(1, l + 1)), replace=False).tolist())
        union = sorted(set(q1) | set(q2))
        r1, r2, ru = (np_design(sub_distribution(d, q), exact=True) for q in (q1, q2, union))
        failures += not uniformly_preferable(ru, hull_of_union(r1, r2), tol=0)
    order_fail = 0
    for _ in range(50):
        d = random_exact_pair(rng, 3, distinct=False)
        curves = [np_design(sub_distribution(d, q), exact=True)
                  for q in ([int(rng.integers(3))], sorted(rng.choice(3, 2, replace=False).tolist()), [0, 1, 2])]
        for a in curves:
            order_fail += not uniformly_preferable(a, a, tol=0)
        for a in curves:
            for b in curves:
                for c in curves:
                    if uniformly_preferable(a, b, tol=0) and uniformly_preferable(b, c, tol=0):
                        order_fail += not uniformly_preferable(a, c, tol=0)
    report("AC12", failures == 0 and order_fail == 0,
           f"filter structure held on {50 - failures}/50; reflexivity/transitivity failures {order_fail}")


def test_ac13_determinism(report, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"l_values": [2, 5, 8], "replications": 8, "merge": True, "tau": 0.3}))
    outs = []
    for name in ("a", "b"):
        code = cli_main(["simulate", "--input", str(cfg), "--seed", "21",
                         "--output-dir", str(tmp_path / name), "--output", str(tmp_path / f"{name}.csv"),
                         "--format", "csv"])
        assert code == 0
        outs.append({f: (tmp_path / name / f).read_bytes()
                     for f in ("aggregate.csv", "replications.csv", "curves.csv")})
        outs[-1]["stdout.csv"] = (tmp_path / f"{name}.csv").read_bytes()
    same = [f for f in outs[0] if outs[0][f] == outs[1][f]]
    report("AC13", len(same) == 4, f"{len(same)}/4 CSV outputs byte-identical across seeded reruns")
