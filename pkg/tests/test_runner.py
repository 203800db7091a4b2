import json

import numpy as np
import pytest

from inertiabench.augmentation import AugmentationSpec
from inertiabench.data import DatasetDescriptor
from inertiabench.errors import ConfigError, StageError
from inertiabench.losses import LossSpec
from inertiabench.model import ModelConfig, TrainConfig
from inertiabench.preprocessing import DenoiseStep, DetrendStep, NormalizeStep, PreprocSpec
from inertiabench.runner import (
    DatasetSpec,
    ExperimentConfig,
    SuiteConfig,
    SyntheticSegment,
    TechniqueSpec,
    emit_outputs,
    load_suite_config,
    parse_suite_config,
    prepare_run,
    report_to_json,
    run_experiment,
    run_suite,
)

TINY_MODEL = ModelConfig(conv_filters=4, kernel_size=3, pool_depth=2,
                         lstm_hidden=4, fc_width=8)
TINY_TRAIN = TrainConfig(epochs=1, batch_size=16)


def tiny_dataset(noise=0.05):
    desc = DatasetDescriptor("tiny", 40.0, 40, 20, "distance_xy")
    segments = (
        SyntheticSegment("circle", duration=6.0, rate=40.0, noise_acc=noise,
                         noise_gyro=noise / 100, seed=1),
        SyntheticSegment("line", duration=6.0, rate=40.0, noise_acc=noise,
                         noise_gyro=noise / 100, seed=2),
    )
    return DatasetSpec(descriptor=desc, synthetic=segments)


def tiny_experiment(technique=TechniqueSpec("baseline")):
    return ExperimentConfig(dataset=tiny_dataset(), model=TINY_MODEL,
                            train=TINY_TRAIN, technique=technique)


class TestRunExperiment:
    def test_baseline_reproducible(self):
        exp = tiny_experiment()
        a = run_experiment(exp, 7)
        b = run_experiment(exp, 7)
        assert np.isfinite(a)
        assert a == b

    def test_rotation_doubles_training_set_only(self):
        base_train, base_test, _ = prepare_run(tiny_experiment(), 3)
        aug = TechniqueSpec("augment",
                            augment=AugmentationSpec("rotation", rotation_axes=("T1",)))
        aug_train, aug_test, _ = prepare_run(tiny_experiment(aug), 3)
        assert len(aug_train) == 2 * len(base_train)
        np.testing.assert_array_equal(aug_test.windows, base_test.windows)
        np.testing.assert_array_equal(aug_test.labels, base_test.labels)

    def test_degenerate_channel_tagged_preprocess(self):
        # noiseless line data has constant channels
        desc = DatasetDescriptor("flat", 40.0, 40, 20, "distance_xy")
        ds = DatasetSpec(descriptor=desc,
                         synthetic=(SyntheticSegment("line", duration=4.0, rate=40.0),))
        tech = TechniqueSpec("preprocess",
                             preprocess=PreprocSpec((NormalizeStep("zscore"),)))
        exp = ExperimentConfig(dataset=ds, model=TINY_MODEL, train=TINY_TRAIN,
                               technique=tech)
        with pytest.raises(StageError) as exc:
            run_experiment(exp, 0)
        assert exc.value.stage == "preprocess"

    def test_head_technique_switches_architecture(self):
        _, _, cfg = prepare_run(tiny_experiment(TechniqueSpec("head2")), 0)
        assert cfg.head_mode == "head2"

    def test_paired_seeds_share_initialization(self):
        from inertiabench.model import build_model
        from inertiabench.runner import model_init_rng

        cfg_a = prepare_run(tiny_experiment(), 5)[2]
        cfg_b = prepare_run(
            tiny_experiment(TechniqueSpec("loss", loss=LossSpec("huber"))), 5)[2]
        assert cfg_a == cfg_b
        pa = build_model(cfg_a, model_init_rng(5)).parameters()
        pb = build_model(cfg_b, model_init_rng(5)).parameters()
        for k in pa:
            np.testing.assert_array_equal(pa[k], pb[k])


@pytest.fixture(scope="module")
def suite():
    techniques = (
        TechniqueSpec("baseline"),
        TechniqueSpec("loss", loss=LossSpec("huber")),
    )
    return SuiteConfig(dataset=tiny_dataset(), techniques=techniques,
                       model=TINY_MODEL, train=TINY_TRAIN,
                       repetitions=2, base_seed=11)


@pytest.fixture(scope="module")
def reports(suite):
    return run_suite(suite)


class TestRunSuite:
    def test_bookkeeping(self, reports):
        assert len(reports) == 2
        assert all(len(r.rmse_runs) == 2 for r in reports)
        assert reports[0].name == "baseline"
        assert reports[0].improvement_pct == pytest.approx(0.0)

    def test_mean_std_consistent_with_runs(self, reports):
        for r in reports:
            assert r.mean == pytest.approx(float(np.mean(r.rmse_runs)))
            assert r.std == pytest.approx(float(np.std(r.rmse_runs)))

    def test_duplicate_technique_identical_rows(self, suite):
        dup = SuiteConfig(dataset=suite.dataset,
                          techniques=(TechniqueSpec("baseline"),
                                      TechniqueSpec("baseline", label="baseline2")),
                          model=TINY_MODEL, train=TINY_TRAIN,
                          repetitions=2, base_seed=11)
        reports = run_suite(dup)
        assert reports[0].rmse_runs == reports[1].rmse_runs

    def test_baseline_required(self):
        with pytest.raises(ConfigError):
            SuiteConfig(dataset=tiny_dataset(),
                        techniques=(TechniqueSpec("head2"),))

    def test_json_deterministic(self, suite, reports):
        again = run_suite(suite)
        assert report_to_json(reports, suite) == report_to_json(again, suite)


class TestEmitOutputs:
    def make_reports(self):
        suite = SuiteConfig(dataset=tiny_dataset(),
                            techniques=(TechniqueSpec("baseline"),
                                        TechniqueSpec("head2")),
                            model=TINY_MODEL, train=TINY_TRAIN,
                            repetitions=1, base_seed=3)
        return run_suite(suite), suite

    def test_json_round_trips(self, tmp_path):
        reports, suite = self.make_reports()
        paths = emit_outputs(reports, suite, tmp_path)
        with open(paths["json"]) as fh:
            doc = json.load(fh)
        assert doc["suite"] == {"base_seed": 3, "repetitions": 1}
        assert [t["name"] for t in doc["techniques"]] == ["baseline", "head2"]
        for t in doc["techniques"]:
            assert set(t) == {"name", "spec", "rmse_runs", "mean", "std",
                              "improvement_pct", "failed_runs"}

    def test_csv_row_count(self, tmp_path):
        reports, suite = self.make_reports()
        paths = emit_outputs(reports, suite, tmp_path)
        lines = open(paths["csv"]).read().strip().split("\n")
        assert len(lines) == len(reports) + 1

    def test_svg_signed_bars(self):
        from inertiabench.runner import BenchReport, render_improvement_svg

        reports = [
            BenchReport("up", {}, [1.0], [0], 0, 1.0, 0.0, 7.0, 0.0),
            BenchReport("down", {}, [1.0], [0], 0, 1.0, 0.0, -5.0, 0.0),
        ]
        svg = render_improvement_svg(reports)
        assert "+7.0%" in svg
        assert "-5.0%" in svg
        assert svg.count("<rect") == 2


CONFIG_DOC = {
    "dataset": {
        "descriptor": {"name": "tiny", "sampling_rate": 40.0, "window_size": 40,
                       "stride": 20, "target_kind": "distance_xy"},
        "synthetic": [{"kind": "circle", "duration": 6.0, "rate": 40.0,
                       "noise_acc": 0.05, "noise_gyro": 0.0005, "seed": 1}],
    },
    "model": {"conv_filters": 4, "kernel_size": 3, "pool_depth": 2,
              "lstm_hidden": 4, "fc_width": 8},
    "train": {"epochs": 1, "batch_size": 16},
    "suite": {"repetitions": 2, "base_seed": 9},
    "techniques": [
        {"kind": "baseline"},
        {"kind": "loss", "loss": "huber", "delta": 2.0},
        {"kind": "augment", "augment": {"kind": "rotation", "axes": ["T1", "T3"]}},
        {"kind": "augment", "augment": {"kind": "bias", "copies": 3}},
        {"kind": "augment", "augment": {"kind": "noise",
                                        "schedule": [[0.1, 0.001]]}},
        {"kind": "preprocess", "steps": [{"op": "denoise", "window": 5},
                                         {"op": "detrend"}]},
    ],
}


class TestConfigParsing:
    def test_full_document(self):
        suite = parse_suite_config(json.loads(json.dumps(CONFIG_DOC)))
        assert suite.repetitions == 2
        assert suite.techniques[1].loss == LossSpec("huber", 2.0)
        assert suite.techniques[2].augment.rotation_axes == ("T1", "T3")
        assert suite.techniques[3].augment.bias_copies == 3
        assert suite.techniques[4].augment.noise_schedule == ((0.1, 0.001),)
        steps = suite.techniques[5].preprocess.steps
        assert isinstance(steps[0], DenoiseStep) and steps[0].window == 5
        assert isinstance(steps[1], DetrendStep)

    def test_unknown_top_level_key(self):
        doc = dict(CONFIG_DOC, extra=1)
        with pytest.raises(ConfigError):
            parse_suite_config(doc)

    def test_unknown_nested_key(self):
        doc = json.loads(json.dumps(CONFIG_DOC))
        doc["train"]["momentum"] = 0.9
        with pytest.raises(ConfigError):
            parse_suite_config(doc)

    def test_unknown_technique_kind(self):
        doc = json.loads(json.dumps(CONFIG_DOC))
        doc["techniques"].append({"kind": "distill"})
        with pytest.raises(ConfigError):
            parse_suite_config(doc)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(CONFIG_DOC))
        suite = load_suite_config(path)
        assert len(suite.techniques) == 6

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_suite_config(path)

    def test_technique_names(self):
        suite = parse_suite_config(json.loads(json.dumps(CONFIG_DOC)))
        assert [t.name for t in suite.techniques] == [
            "baseline", "loss-huber", "augment-rotation-T1+T3",
            "augment-bias-x3", "augment-noise-x1", "preprocess-denoise5+detrend",
        ]
