import json
from fractions import Fraction

import numpy as np
import pytest

from finiteroc import (
    ExperimentConfig,
    WORKED_EXAMPLE_AUC,
    curve_value_at,
    extend_with_white_features,
    np_design,
    replication_seed,
    roc_vertices,
    run_experiment,
    run_replication,
    write_outputs,
)


class TestWhiteFeatures:
    def test_same_size_unchanged(self, example):
        assert extend_with_white_features(example, 2) == example

    def test_normalised(self, example):
        d = extend_with_white_features(example, 5)
        assert d.space.l == 5
        assert sum(d.theta_h0) == 1 and sum(d.theta_h1) == 1

    def test_base_pattern_in_low_bits(self, example):
        d = extend_with_white_features(example, 4)
        assert d.theta_h1[0b1101] == example.theta_h1[0b01] / 4

    def test_roc_unchanged(self, example):
        base = [tuple(p) for p in roc_vertices(np_design(example, exact=True))]
        for l in (3, 5):
            ext = np_design(extend_with_white_features(example, l), exact=True)
            assert [tuple(p) for p in roc_vertices(ext)] == base

    def test_cannot_shrink(self, example):
        with pytest.raises(ValueError):
            extend_with_white_features(example, 1)

    def test_float_base(self, example):
        d = extend_with_white_features(example.as_float(), 4)
        assert d.theta_h0.dtype == float
        assert abs(d.theta_h0.sum() - 1) < 1e-12


class TestConfig:
    def test_defaults_match_reference_sizes(self):
        c = ExperimentConfig()
        assert (c.n0, c.n1, c.n_eval, c.replications) == (1024, 1024, 2048, 100)
        assert c.l_values == [2, 4, 6, 8, 10, 12] and c.pf_grid == 101

    @pytest.mark.parametrize("kw", [{"n0": 0}, {"replications": -1}, {"l_values": [1]},
                                    {"l_values": [30]}, {"tau": 0}, {"l_values": []}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"reps": 3})

    def test_roundtrip(self, tmp_path):
        c = ExperimentConfig(l_values=[2, 3], seed=4, merge=True, tau=0.5)
        c.save(tmp_path / "c.json")
        assert ExperimentConfig.load(tmp_path / "c.json") == c

    def test_custom_base(self):
        c = ExperimentConfig(base={"h0": ["0.5", "0.5"], "h1": ["0.9", "0.1"]}, l_values=[1, 3])
        assert c.base_distribution().theta_h1[0] == Fraction(9, 10)


class TestReplication:
    def test_eval_equal_design(self):
        cfg = ExperimentConfig()
        rec = run_replication(cfg, 4, 0)
        from finiteroc.experiments import _draw, _truth

        design, _ = _draw(cfg, _truth(cfg, 4), 4, 0)
        same = run_replication(cfg, 4, 0, design, design)
        np.testing.assert_array_equal(same.epc.points, same.nepc.points)
        np.testing.assert_array_equal(same.nepc.points, rec.nepc.points)

    def test_injected_counts(self, counts40):
        rec = run_replication(ExperimentConfig(), 2, 0, counts40, counts40)
        nepc = [tuple(p) for p in rec.nepc.points]
        assert (0.375, 0.625) in [tuple(np.round(p, 12)) for p in nepc]
        np.testing.assert_allclose(rec.toc.points[2], [0.35, 0.45], atol=1e-12)

    def test_curves_share_ranking(self):
        rec = run_replication(ExperimentConfig(), 6, 1)
        assert rec.nepc.ranking == rec.epc.ranking == rec.toc.ranking

    def test_toc_below_roc(self, example):
        roc = np_design(example)
        for rep in range(5):
            rec = run_replication(ExperimentConfig(), 6, rep)
            for pf, pd in rec.toc.points:
                assert pd <= curve_value_at(roc, pf) + 1e-12

    def test_deterministic_per_stream(self):
        cfg = ExperimentConfig(seed=7)
        a = run_replication(cfg, 4, 3)
        b = run_replication(cfg, 4, 3)
        assert a.row() == b.row()
        assert run_replication(cfg, 4, 4).row() != a.row()

    def test_seed_stream_derivation(self):
        s = replication_seed(7, 4, 3)
        assert s.entropy == 7 and s.spawn_key == (4, 3)

    def test_merge_records_count(self):
        rec = run_replication(ExperimentConfig(merge=True, tau=0.2), 6, 0)
        assert rec.n_merges > 0
        assert len(rec.nepc.points) == 64 - rec.n_merges + 1


class TestExperiment:
    def test_single_row(self, tmp_path):
        res = run_experiment(ExperimentConfig(l_values=[3], replications=1))
        assert len(res.aggregates) == 1 and len(res.records) == 1
        paths = write_outputs(res, tmp_path)
        assert paths["aggregate"].read_text().count("\n") == 2
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["config"]["replications"] == 1

    def test_subset_rerun_matches(self):
        cfg = ExperimentConfig(l_values=[2, 4], replications=4, seed=11)
        res = run_experiment(cfg)
        alone = run_replication(cfg, 4, 2)
        rec = [r for r in res.records if (r.l, r.rep) == (4, 2)][0]
        assert rec.row() == alone.row()

    def test_workers_do_not_change_output(self, tmp_path):
        cfg = ExperimentConfig(l_values=[2, 5], replications=6, seed=2)
        a = write_outputs(run_experiment(cfg), tmp_path / "a")
        cfg.workers = 3
        b = write_outputs(run_experiment(cfg), tmp_path / "b")
        for key in ("aggregate", "replications", "curves"):
            assert a[key].read_bytes() == b[key].read_bytes()

    def test_unwritable_output(self, tmp_path):
        res = run_experiment(ExperimentConfig(l_values=[2], replications=1))
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            write_outputs(res, blocker / "sub")

    def test_large_sample_convergence(self):
        cfg = ExperimentConfig(l_values=[2], n0=10**5, n1=10**5, n_eval=10**5,
                               replications=20, sort_bound=False)
        row = run_experiment(cfg).aggregate_for(2)
        for name in ("nepc", "epc", "toc"):
            assert abs(row[f"auc_{name}_mean"] - WORKED_EXAMPLE_AUC) < 0.01

    def test_epc_localised(self):
        cfg = ExperimentConfig(l_values=[2], replications=100, sort_bound=False)
        res = run_experiment(cfg)
        pd = np.array([r.epc.pd for r in res.records])
        assert np.all(pd.std(axis=0, ddof=1) < 0.02)
