import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from covmeans import (
    CSV_COLUMNS,
    ConfigError,
    EstimatorSpec,
    ExperimentConfig,
    HaarDiagonal,
    Identity,
    Spiked,
    ValidationError,
    parse_config_text,
    run_experiment,
    run_sweep,
    run_trial,
    spike_experiment,
    sweep_configs,
    write_csv,
)

BASE = dict(
    experiment_id="t",
    p=6,
    n_per_split=12,
    n_splits=2,
    field="real",
    model=Identity(6),
    estimators=(EstimatorSpec("arithmetic"), EstimatorSpec("harmonic")),
    trials=3,
    base_seed=0,
)


def _config(**over):
    kw = dict(BASE)
    kw.update(over)
    if "model" in over and "p" not in over:
        kw["p"] = over["model"].p
    return ExperimentConfig(**kw)


class TestEstimatorSpec:
    def test_bare_kinds(self):
        for kind in ("arithmetic", "harmonic", "rao_blackwell", "fisher_sun"):
            assert EstimatorSpec.parse(kind).kind == kind

    def test_linear_shrinkage_with_intensity(self):
        spec = EstimatorSpec.parse("linear_shrinkage:0.3")
        assert spec.kind == "linear_shrinkage"
        assert spec.lam == 0.3

    def test_rb_regularized_parameters(self):
        spec = EstimatorSpec.parse("rb_regularized:0.9,0.25")
        assert (spec.c, spec.d) == (0.9, 0.25)
        bare = EstimatorSpec.parse("rb_regularized")
        assert (bare.c, bare.d) == (1.0, 0.0)

    def test_parse_errors(self):
        for bad in (
            "mystery",
            "linear_shrinkage",
            "linear_shrinkage:2.0",
            "linear_shrinkage:abc",
            "rb_regularized:1.0,2.0,3.0",
            "arithmetic:0.5",
        ):
            with pytest.raises(ValidationError):
                EstimatorSpec.parse(bad)


class TestExperimentConfig:
    def test_gamma_and_total(self):
        cfg = _config()
        assert cfg.t_total == 24
        assert_allclose(cfg.gamma, 0.25)

    def test_harmonic_needs_invertible_blocks(self):
        with pytest.raises(ValidationError, match="invertible"):
            _config(p=6, n_per_split=4)

    def test_arithmetic_alone_allows_small_blocks(self):
        cfg = _config(
            p=6, n_per_split=4, estimators=(EstimatorSpec("arithmetic"),)
        )
        assert cfg.gamma == 6 / 8

    def test_rao_blackwell_real_two_split_only(self):
        rb = (EstimatorSpec("rao_blackwell"),)
        with pytest.raises(ValidationError, match="real"):
            _config(field="complex", estimators=rb)
        with pytest.raises(ValidationError, match="2 splits"):
            _config(n_splits=3, n_per_split=8, estimators=rb)

    def test_harmonic_needs_two_splits(self):
        with pytest.raises(ValidationError, match="at least 2 splits"):
            _config(n_splits=1)

    def test_model_dimension_must_match(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(**{**BASE, "model": Identity(5)})


class TestRunTrial:
    def test_deterministic(self):
        cfg = _config()
        a = run_trial(cfg, 0)
        b = run_trial(cfg, 0)
        assert a == b

    def test_trials_differ(self):
        cfg = _config()
        a = run_trial(cfg, 0)
        b = run_trial(cfg, 1)
        assert a[0].op_error != b[0].op_error
        assert a[0].seed != b[0].seed

    def test_estimators_share_one_draw(self):
        # the arithmetic mean of a two-split equals the pooled estimate, so
        # op errors must come from the same data whichever estimator asks
        arith = (EstimatorSpec("arithmetic"),)
        split = run_trial(_config(estimators=arith), 0)
        pooled = run_trial(
            _config(n_splits=1, n_per_split=24, estimators=arith), 0
        )
        assert_allclose(split[0].op_error, pooled[0].op_error, rtol=1e-10)

    def test_identity_record_fields(self):
        cfg = _config()
        recs = run_trial(cfg, 2)
        assert [r.estimator for r in recs] == ["arithmetic", "harmonic"]
        for rec in recs:
            assert rec.trial == 2
            assert rec.model == "identity"
            assert rec.model_param is None
            assert rec.overlap_sq is None
            assert rec.pred_lambda1 is None
            assert rec.op_rel_error == rec.op_error  # ||I|| = 1
        assert_allclose(recs[0].pred_op_error, 1.25)
        assert_allclose(recs[1].pred_op_error, math.sqrt(3) / 2)

    def test_spiked_record_fields(self):
        cfg = _config(model=Spiked(6, 1.0), p=6)
        recs = run_trial(cfg, 0)
        for rec in recs:
            assert rec.model == "spiked"
            assert rec.model_param == 1.0
            assert rec.overlap_sq is not None
            assert rec.pred_op_error is None
        byest = {r.estimator: r for r in recs}
        assert_allclose(byest["arithmetic"].pred_lambda1, 2.5)
        assert_allclose(byest["harmonic"].pred_lambda1, 2.0)
        assert_allclose(byest["arithmetic"].pred_overlap_sq, 0.6)
        assert_allclose(byest["harmonic"].pred_overlap_sq, 0.5)

    def test_haar_records_have_no_predictions(self):
        cfg = _config(model=HaarDiagonal(6, 2.0), p=6)
        recs = run_trial(cfg, 0)
        for rec in recs:
            assert rec.model == "haar_diagonal"
            assert rec.model_param == 2.0
            assert rec.pred_op_error is None
            assert rec.overlap_sq is None

    def test_haar_sigma_redrawn_per_trial(self):
        cfg = _config(
            model=HaarDiagonal(6, 4.0), p=6, estimators=(EstimatorSpec("arithmetic"),)
        )
        # two trials with the same data stream would coincide if sigma were
        # fixed; differing op_rel_error denominators show the redraw
        recs = run_experiment(cfg)
        norms = {round(r.op_error / r.op_rel_error, 9) for r in recs}
        assert len(norms) > 1

    def test_all_estimator_kinds_run(self):
        ests = tuple(
            EstimatorSpec.parse(tok)
            for tok in (
                "arithmetic",
                "harmonic",
                "rao_blackwell",
                "rb_regularized:0.9,0.1",
                "fisher_sun",
                "linear_shrinkage:0.4",
            )
        )
        cfg = _config(estimators=ests)
        recs = run_trial(cfg, 0)
        assert [r.estimator for r in recs] == [
            "arithmetic",
            "harmonic",
            "rao_blackwell",
            "rb_regularized",
            "fisher_sun",
            "linear_shrinkage",
        ]
        for rec in recs:
            assert np.isfinite(rec.op_error)
            assert np.isfinite(rec.frob_sq_per_p)
            assert np.isfinite(rec.lambda1)

    def test_rb_tracks_harmonic_loosely(self):
        # on the curved-spectrum grid the conditional-expectation estimator
        # rides just below the harmonic mean at figure scale
        cfg = ExperimentConfig(
            experiment_id="rbgap",
            p=100,
            n_per_split=200,
            n_splits=2,
            field="real",
            model=HaarDiagonal(100, 2.0),
            estimators=(EstimatorSpec("harmonic"), EstimatorSpec("rao_blackwell")),
            trials=10,
            base_seed=0,
        )
        recs = run_experiment(cfg)
        h = np.mean([r.op_rel_error for r in recs if r.estimator == "harmonic"])
        rb = np.mean([r.op_rel_error for r in recs if r.estimator == "rao_blackwell"])
        assert rb <= h
        assert abs(h - rb) < 0.1


class TestWriteCsv:
    def test_header_and_round_trip(self, tmp_path):
        cfg = _config(model=Spiked(6, 1.0), p=6)
        recs = run_experiment(cfg)
        out = write_csv(recs, tmp_path / "out.csv")
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(CSV_COLUMNS)
        assert len(rows) == 1 + len(recs)
        with open(out, newline="") as fh:
            parsed = list(csv.DictReader(fh))
        first = next(r for r in parsed if r["trial"] == "0" and r["estimator"] == "arithmetic")
        orig = next(r for r in recs if r.trial == 0 and r.estimator == "arithmetic")
        assert float(first["op_error"]) == orig.op_error  # shortest round trip
        assert first["pred_op_error"] == ""  # spiked model: no op-norm limit

    def test_missing_values_are_empty_strings(self, tmp_path):
        recs = run_experiment(_config())
        out = write_csv(recs, tmp_path / "out.csv")
        with open(out, newline="") as fh:
            parsed = list(csv.DictReader(fh))
        assert {r["overlap_sq"] for r in parsed} == {""}
        assert {r["model_param"] for r in parsed} == {""}

    def test_byte_reproducible(self, tmp_path):
        recs = run_experiment(_config())
        p1 = write_csv(recs, tmp_path / "a.csv")
        p2 = write_csv(run_experiment(_config()), tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()

    def test_sorted_by_trial_then_estimator(self, tmp_path):
        recs = run_experiment(_config())
        out = write_csv(list(reversed(recs)), tmp_path / "c.csv")
        with open(out, newline="") as fh:
            parsed = list(csv.DictReader(fh))
        keys = [(int(r["trial"]), r["estimator"]) for r in parsed]
        assert keys == sorted(keys)


class TestConfigParsing:
    GOOD = """
# comment line
experiment_id = demo
p = 6
t = 24            # total samples, split evenly
splits = 2
field = real
model = identity
estimators = arithmetic, harmonic
trials = 3
base_seed = 5
"""

    def test_round_trip(self):
        cfg = parse_config_text(self.GOOD)
        assert cfg.experiment_id == "demo"
        assert cfg.p == 6
        assert cfg.n_per_split == 12
        assert cfg.trials == 3
        assert cfg.base_seed == 5
        assert isinstance(cfg.model, Identity)

    def test_n_instead_of_t(self):
        cfg = parse_config_text("p = 4\nn = 8\nestimators = arithmetic")
        assert cfg.n_per_split == 8
        assert cfg.t_total == 16

    def test_defaults(self):
        cfg = parse_config_text("p = 4\nn = 8", default_id="from_file")
        assert cfg.experiment_id == "from_file"
        assert cfg.n_splits == 2
        assert cfg.field == "real"
        assert cfg.trials == 20
        assert [e.kind for e in cfg.estimators] == ["arithmetic", "harmonic"]

    def test_parameterized_estimators(self):
        cfg = parse_config_text(
            "p = 4\nn = 8\nestimators = arithmetic, linear_shrinkage:0.2, rb_regularized:0.9,0.1"
        )
        kinds = [e.kind for e in cfg.estimators]
        assert kinds == ["arithmetic", "linear_shrinkage", "rb_regularized"]
        assert cfg.estimators[2].d == 0.1

    def test_spiked_model_keys(self):
        cfg = parse_config_text("p = 4\nn = 8\nmodel = spiked\ntheta = 1.5")
        assert isinstance(cfg.model, Spiked)
        assert cfg.model.theta == 1.5

    def test_haar_model_keys(self):
        cfg = parse_config_text("p = 4\nn = 8\nmodel = haar_diagonal\nb = 3.0")
        assert isinstance(cfg.model, HaarDiagonal)
        assert cfg.model.b == 3.0

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match=r"cfg:3: unknown key 'frobnicate'"):
            parse_config_text("p = 4\nn = 8\nfrobnicate = 1", source="cfg")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("p = 4\np = 5\nn = 8")

    def test_missing_p(self):
        with pytest.raises(ConfigError, match="missing required key 'p'"):
            parse_config_text("n = 8")

    def test_n_and_t_mutually_exclusive(self):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config_text("p = 4\nn = 8\nt = 16")
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config_text("p = 4")

    def test_t_divisibility(self):
        with pytest.raises(ConfigError, match="not divisible"):
            parse_config_text("p = 4\nt = 25\nsplits = 2")

    def test_bad_integer_reports_line_and_key(self):
        with pytest.raises(ConfigError, match=r"cfg:1: key 'p'"):
            parse_config_text("p = four\nn = 8", source="cfg")

    def test_model_parameter_mismatches(self):
        with pytest.raises(ConfigError, match="identity model takes no"):
            parse_config_text("p = 4\nn = 8\ntheta = 1.0")
        with pytest.raises(ConfigError, match="requires 'theta'"):
            parse_config_text("p = 4\nn = 8\nmodel = spiked")
        with pytest.raises(ConfigError, match="requires 'b'"):
            parse_config_text("p = 4\nn = 8\nmodel = haar_diagonal")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="expected 'key = value'"):
            parse_config_text("p: 4")

    def test_semantic_errors_become_config_errors(self):
        # n < p with a harmonic estimator: caught at construction, reported
        # as a config failure so the CLI exits 2
        with pytest.raises(ConfigError, match="invertible"):
            parse_config_text("p = 8\nn = 4\nestimators = harmonic, arithmetic")


class TestSweepConfigs:
    def test_figure_one_grid(self):
        configs = sweep_configs(1)
        assert len(configs) == 8  # p in {50,100} x b in {1,2,4,8}
        ids = [c.experiment_id for c in configs]
        assert "fig1_p50_b1" in ids and "fig1_p100_b8" in ids
        for c in configs:
            assert c.n_per_split == 2 * c.p
            assert [e.kind for e in c.estimators] == [
                "arithmetic",
                "fisher_sun",
                "harmonic",
            ]
            assert c.trials == 20

    def test_figure_two_dimension_grid(self):
        configs = sweep_configs(2)
        assert sorted({c.p for c in configs}) == [25, 50, 100, 200]
        assert len(configs) == 16

    def test_figure_three_budget_grid(self):
        configs = sweep_configs(3)
        assert len(configs) == 2 * 2 * 5
        for c in configs:
            q = c.t_total / (2 * c.p)
            assert c.t_total % 2 == 0
            assert q >= 1.05
            assert [e.kind for e in c.estimators] == ["arithmetic", "harmonic"]

    def test_figure_four_adds_rao_blackwell(self):
        configs = sweep_configs(4)
        for c in configs:
            assert "rao_blackwell" in [e.kind for e in c.estimators]

    def test_scale_halves_grid(self):
        configs = sweep_configs(1, scale=0.5)
        assert sorted({c.p for c in configs}) == [25, 50]
        assert {c.trials for c in configs} == {10}

    def test_seed_changes_base_seeds(self):
        a = sweep_configs(1, seed=0)
        b = sweep_configs(1, seed=1)
        assert [c.base_seed for c in a] != [c.base_seed for c in b]

    def test_bad_figure(self):
        with pytest.raises(ValidationError):
            sweep_configs(5)

    def test_tiny_sweep_runs(self):
        recs = run_sweep(1, scale=0.04, seed=0)
        # p floors at 2, trials floor at 1: 8 experiments x 1 trial x 3 estimators
        assert len(recs) == 24


class TestSpikeExperiment:
    def test_records_and_predictions(self):
        recs = spike_experiment(8, 0.25, [1.0], 2, "complex", seed=0)
        assert len(recs) == 4
        byest = {r.estimator: r for r in recs if r.trial == 0}
        assert_allclose(byest["harmonic"].pred_overlap_sq, 0.5)
        assert byest["arithmetic"].overlap_sq is not None

    def test_multiple_thetas_get_distinct_ids(self):
        recs = spike_experiment(8, 0.25, [0.5, 1.0], 1, "real", seed=0)
        assert {r.experiment_id for r in recs} == {"spike_theta0.5", "spike_theta1"}

    def test_gamma_must_divide_p_evenly(self):
        with pytest.raises(ValidationError, match="even integer"):
            spike_experiment(10, 0.3, [1.0], 1, "real", seed=0)

    def test_gamma_range(self):
        with pytest.raises(ValidationError, match="gamma"):
            spike_experiment(8, 0.6, [1.0], 1, "real", seed=0)
