import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from finiteroc import DistributionPair, HistogramPair, np_design, sample_features, extend_with_white_features
from finiteroc import io as fio
from finiteroc.cli import main

EXAMPLE_JSON = {"l": 2, "kind": "probabilities", "h0": [0.15, 0.25, 0.40, 0.20], "h1": [0.30, 0.35, 0.20, 0.15]}
COUNTS_JSON = {"l": 2, "kind": "counts", "h0": [6, 13, 12, 9], "h1": [18, 10, 5, 7], "n0": 40, "n1": 40}


@pytest.fixture
def files(tmp_path):
    ex = tmp_path / "example.json"
    ex.write_text(json.dumps(EXAMPLE_JSON))
    cn = tmp_path / "counts.json"
    cn.write_text(json.dumps(COUNTS_JSON))
    return tmp_path, ex, cn


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


class TestFormats:
    def test_decimal_probabilities_read_exactly(self, files):
        _, ex, _ = files
        d = fio.load_histogram(ex)
        assert isinstance(d, DistributionPair) and d.exact
        assert d.theta_h0[0] == Fraction(3, 20)

    def test_counts_and_totals(self, files, tmp_path):
        _, _, cn = files
        c = fio.load_histogram(cn)
        assert isinstance(c, HistogramPair) and c.n0 == 40
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({**COUNTS_JSON, "n0": 41}))
        with pytest.raises(ValueError):
            fio.load_histogram(bad)

    def test_csv_roundtrip(self, files, tmp_path):
        _, _, cn = files
        c = fio.load_histogram(cn)
        p = tmp_path / "c.csv"
        p.write_text(fio.histogram_to_csv(c))
        assert fio.load_histogram(p) == c

    def test_probability_csv(self, tmp_path, example):
        p = tmp_path / "d.csv"
        p.write_text(fio.histogram_to_csv(example))
        assert fio.load_histogram(p, kind="probabilities") == example

    def test_json_roundtrip(self, tmp_path, example, counts40):
        for src in (example, counts40):
            fio.dump_histogram(src, tmp_path / "h.json")
            assert fio.load_histogram(tmp_path / "h.json") == src

    def test_curve_roundtrip(self, counts40):
        c = np_design(counts40)
        back = fio.curve_from_dict(json.loads(json.dumps(c.to_dict())))
        np.testing.assert_array_equal(back.points, c.points)
        assert back.ranking == c.ranking

    def test_samples(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("label,x0,x1\n0,1,0\n1,1,1\n1,0,0\n")
        s = fio.load_samples(p)
        assert s.x0.tolist() == [[1, 0]] and s.x1.tolist() == [[1, 1], [0, 0]]
        p.write_text("0,1,0\n1,1\n")
        with pytest.raises(ValueError):
            fio.load_samples(p)


class TestCli:
    def test_design_exact(self, files, capsys):
        _, ex, _ = files
        code, out = run(["design", "--input", ex, "--kind", "probabilities", "--exact"], capsys)
        d = json.loads(out)
        assert code == 0
        assert [(p["pf"], p["pd"]) for p in d["points"]] == [(0, 0), (0.15, 0.3), (0.4, 0.65), (0.6, 0.8), (1, 1)]
        assert d["points_exact"][2] == {"m": 2, "pf": "2/5", "pd": "13/20"}
        assert set(d) >= {"source", "points", "ranking"}

    def test_design_csv(self, files, capsys):
        _, _, cn = files
        code, out = run(["design", "-i", cn, "--format", "csv"], capsys)
        assert code == 0 and out.splitlines()[0] == "m,pf,pd"

    def test_enumerate(self, files, capsys):
        _, ex, _ = files
        code, out = run(["enumerate", "-i", ex], capsys)
        d = json.loads(out)
        assert len(d["aos"]) == 16 and d["aos"][5]["pf"] == pytest.approx(0.55)

    def test_posterior(self, files, capsys):
        _, _, cn = files
        code, out = run(["posterior", "-i", cn, "--nu", "0.1"], capsys)
        rows = json.loads(out)["bins"]
        r = [x for x in rows if x["class"] == 1 and x["bin"] == 0][0]
        assert r["mean"] == pytest.approx(19 / 42) and r["chebychev"] == pytest.approx(0.61875)
        assert {"mean", "mode", "variance", "w90", "chebychev"} <= set(r)

    def test_sortconf_and_merge(self, files, capsys):
        _, _, cn = files
        code, out = run(["sortconf", "-i", cn], capsys)
        assert code == 0 and json.loads(out)["bound"] == 1.0
        code, out = run(["merge", "-i", cn, "--tau", "1.0"], capsys)
        d = json.loads(out)
        assert code == 0 and d["n_merges"] == 2 and d["tau"] == 1.0

    def test_compare(self, files, capsys):
        tmp, ex, cn = files
        run(["design", "-i", ex, "--kind", "probabilities", "-o", tmp / "roc.json"], capsys)
        run(["design", "-i", cn, "--eval", ex, "--eval-kind", "probabilities", "-o", tmp / "toc.json"], capsys)
        code, out = run(["compare", "-i", tmp / "roc.json", tmp / "toc.json"], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["preferable_1_over_2"] and not d["preferable_2_over_1"]

    def test_select(self, tmp_path, capsys, example):
        s = sample_features(extend_with_white_features(example, 3), 600, 600, seed=4)
        rows = [[0, *r] for r in s.x0] + [[1, *r] for r in s.x1]
        path = tmp_path / "s.csv"
        np.savetxt(path, np.array(rows), fmt="%d", delimiter=",")
        code, out = run(["select", "-i", path, "--seed", "3"], capsys)
        d = json.loads(out)
        assert code == 0 and "selected" in d and "steps" in d

    def test_simulate_writes_files(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"l_values": [2, 3], "replications": 2}))
        code, out = run(["simulate", "-i", cfg, "--output-dir", tmp_path / "out", "--format", "csv"], capsys)
        assert code == 0 and out.startswith("l,replications")
        assert (tmp_path / "out" / "manifest.json").exists()

    def test_simulate_sweep(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"l_values": [4], "replications": 2}))
        code, out = run(["simulate", "-i", cfg, "--tau-sweep", "0.5", "1.0"], capsys)
        rows = json.loads(out)["sweep"]
        assert code == 0 and [r["tau"] for r in rows] == [None, 0.5, 1.0]

    def test_exit_codes(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"l": 2}')
        assert main(["merge", "-i", str(bad)]) == 1
        assert main(["merge", "-i", str(tmp_path / "missing.json")]) == 3
        neg = tmp_path / "neg.json"
        neg.write_text(json.dumps({**COUNTS_JSON, "h0": [-1, 14, 12, 9]}))
        assert main(["posterior", "-i", str(neg)]) == 1

    def test_numeric_failure_exit_code(self, files, monkeypatch):
        from finiteroc import cli
        from finiteroc.errors import QuadratureError

        def boom(*a, **k):
            raise QuadratureError("did not converge")

        monkeypatch.setattr(cli, "sort_error_bound", boom)
        assert main(["sortconf", "-i", str(files[2])]) == 2

    def test_module_entry_point(self, files):
        _, _, cn = files
        out = subprocess.run([sys.executable, "-m", "finiteroc", "sortconf", "-i", str(cn)],
                             capture_output=True, text=True, check=True)
        assert json.loads(out.stdout)["bound"] == 1.0
