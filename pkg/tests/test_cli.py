import json

import pytest

from inertiabench.cli import main

TINY_CONFIG = {
    "dataset": {
        "descriptor": {"name": "tiny", "sampling_rate": 40.0, "window_size": 40,
                       "stride": 20, "target_kind": "distance_xy"},
        "synthetic": [{"kind": "circle", "duration": 6.0, "rate": 40.0,
                       "noise_acc": 0.05, "noise_gyro": 0.0005, "seed": 1}],
    },
    "model": {"conv_filters": 4, "kernel_size": 3, "pool_depth": 2,
              "lstm_hidden": 4, "fc_width": 8},
    "train": {"epochs": 1, "batch_size": 16},
    "suite": {"repetitions": 1, "base_seed": 5},
    "techniques": [{"kind": "baseline"}, {"kind": "head2"}],
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(TINY_CONFIG))
    return path


class TestSynth:
    def test_writes_three_csvs(self, tmp_path, capsys):
        out = tmp_path / "data"
        code = main(["synth", "--kind", "circle", "--duration", "2.0",
                     "--rate", "40", "--out-dir", str(out)])
        assert code == 0
        for name in ("imu.csv", "gt_pos.csv", "gt_heading.csv"):
            assert (out / name).exists()
        assert "80 samples" in capsys.readouterr().out

    def test_synth_round_trips_through_bench(self, tmp_path, config_path):
        # recorded-file datasets go through the same pipeline
        data = tmp_path / "data"
        main(["synth", "--kind", "circle", "--duration", "6.0", "--rate", "40",
              "--noise-acc", "0.05", "--noise-gyro", "0.0005",
              "--out-dir", str(data)])
        doc = json.loads(config_path.read_text())
        doc["dataset"] = {
            "descriptor": doc["dataset"]["descriptor"],
            "imu_csv": str(data / "imu.csv"),
            "gt_pos_csv": str(data / "gt_pos.csv"),
        }
        csv_config = tmp_path / "csv_suite.json"
        csv_config.write_text(json.dumps(doc))
        code = main(["bench", "--config", str(csv_config),
                     "--out-dir", str(tmp_path / "out")])
        assert code == 0


class TestBench:
    def test_exit_zero_and_outputs(self, tmp_path, config_path, capsys):
        out = tmp_path / "results"
        code = main(["bench", "--config", str(config_path),
                     "--out-dir", str(out)])
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        assert [t["name"] for t in doc["techniques"]] == ["baseline", "head2"]
        assert (out / "report.csv").exists()
        assert (out / "improvement.svg").exists()
        stdout = capsys.readouterr().out
        assert "baseline" in stdout and "head2" in stdout

    def test_formats_filter(self, tmp_path, config_path):
        out = tmp_path / "results"
        main(["bench", "--config", str(config_path), "--out-dir", str(out),
              "--formats", "json"])
        assert (out / "report.json").exists()
        assert not (out / "report.csv").exists()

    def test_failed_technique_exits_two(self, tmp_path):
        # a noiseless straight line has constant channels, so z-score
        # normalization degenerates and every run of that technique fails
        doc = json.loads(json.dumps(TINY_CONFIG))
        doc["dataset"]["synthetic"] = [{"kind": "line", "duration": 6.0,
                                        "rate": 40.0}]
        doc["techniques"].append(
            {"kind": "preprocess",
             "steps": [{"op": "normalize", "method": "zscore"}]})
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(doc))
        with pytest.warns(UserWarning):
            code = main(["bench", "--config", str(path),
                         "--out-dir", str(tmp_path / "out")])
        assert code == 2


class TestTrainEval:
    def test_train_then_eval(self, tmp_path, config_path, capsys):
        ckpt = tmp_path / "model.npz"
        code = main(["train", "--config", str(config_path),
                     "--technique", "head2", "--seed", "3", "--out", str(ckpt)])
        assert code == 0
        assert ckpt.exists()
        code = main(["eval", "--config", str(config_path),
                     "--technique", "head2", "--seed", "3",
                     "--checkpoint", str(ckpt)])
        assert code == 0
        assert "test RMSE" in capsys.readouterr().out

    def test_unknown_technique_exits_one(self, tmp_path, config_path):
        code = main(["train", "--config", str(config_path),
                     "--technique", "loss-huber",
                     "--out", str(tmp_path / "m.npz")])
        assert code == 1


class TestReport:
    def test_rerender_from_json(self, tmp_path, config_path):
        out = tmp_path / "results"
        main(["bench", "--config", str(config_path), "--out-dir", str(out),
              "--formats", "json,csv"])
        redo = tmp_path / "rerender"
        code = main(["report", "--report", str(out / "report.json"),
                     "--out-dir", str(redo)])
        assert code == 0
        assert (redo / "report.csv").read_text() == \
            (out / "report.csv").read_text()
        assert (redo / "improvement.svg").exists()
