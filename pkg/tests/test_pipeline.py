import json

import numpy as np
import pytest

from attnclust.config import ConfigError, ExperimentConfig, load_config, parse_assignments
from attnclust.dataio import load_labels, save_features, save_labels
from attnclust.pipeline import ExperimentReport, emit_report, run_experiment
from attnclust.synth import make_blobs


@pytest.fixture
def blob_dataset(tmp_path):
    features, labels = make_blobs(150, dim=2, k=3, separation=10.0, seed=21)
    fpath = tmp_path / "features.dtcf"
    lpath = tmp_path / "labels.txt"
    save_features(fpath, features)
    save_labels(lpath, labels)
    return fpath, lpath


def base_config(fpath, lpath, out_dir, **kwargs):
    cfg = ExperimentConfig(
        features=str(fpath),
        labels=str(lpath),
        clusters=3,
        epochs=30,
        ramp_length=10,
        seed=0,
        out_dir=str(out_dir),
    )
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return cfg


class TestRunExperiment:
    def test_blobs_reach_perfect_accuracy(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        report = run_experiment(base_config(fpath, lpath, tmp_path / "out"))
        assert report.metrics["acc"] == 1.0
        assert report.metrics["nmi"] == 1.0
        assert report.metrics["ari"] == 1.0
        assert (tmp_path / "out" / "assignments.txt").exists()
        assert (tmp_path / "out" / "report.txt").exists()

    def test_reruns_are_byte_identical(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        out = tmp_path / "out"
        cfg = base_config(fpath, lpath, out, report_format="json")
        run_experiment(cfg)
        first = ((out / "report.json").read_bytes(), (out / "assignments.txt").read_bytes())
        run_experiment(cfg)
        second = ((out / "report.json").read_bytes(), (out / "assignments.txt").read_bytes())
        assert first == second

    def test_pi_without_transform_fails_before_output(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        out = tmp_path / "never"
        cfg = base_config(fpath, lpath, out, variant="pi")
        with pytest.raises(ConfigError, match="pi variant"):
            run_experiment(cfg)
        assert not out.exists()

    def test_missing_features_fails_before_output(self, tmp_path):
        out = tmp_path / "never"
        cfg = ExperimentConfig(
            features=str(tmp_path / "nope.dtcf"), clusters=3, out_dir=str(out)
        )
        with pytest.raises(ConfigError, match="not found"):
            run_experiment(cfg)
        assert not out.exists()

    def test_pi_with_jitter_runs(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        cfg = base_config(fpath, lpath, tmp_path / "out", variant="pi", jitter_sigma=0.05)
        report = run_experiment(cfg)
        assert len(report.loss_history) == 30

    def test_assignments_parse_back(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        out = tmp_path / "out"
        run_experiment(base_config(fpath, lpath, out))
        assignments = load_labels(out / "assignments.txt")
        assert len(assignments) == 150

    def test_no_labels_omits_metrics(self, blob_dataset, tmp_path):
        fpath, _ = blob_dataset
        cfg = base_config(fpath, "", tmp_path / "out")
        report = run_experiment(cfg)
        assert report.metrics is None
        assert "metrics unavailable" in (tmp_path / "out" / "report.txt").read_text()


class TestReports:
    def test_text_mirrors_three_row_table(self, tmp_path):
        report = ExperimentReport(
            config={"variant": "baseline"},
            n_samples=10,
            n_features=4,
            embed_dim=2,
            metrics={"acc": 0.7811, "nmi": 0.7481, "ari": 0.6668},
            loss_history=[],
        )
        path = emit_report(report, "text", tmp_path)
        text = path.read_text()
        assert "Accuracy 0.7811" in text
        assert "NMI 0.7481" in text
        assert "ARI 0.6668" in text

    def test_json_round_trip(self, tmp_path):
        report = ExperimentReport(
            config={"variant": "tep"},
            n_samples=5,
            n_features=3,
            embed_dim=2,
            metrics=None,
            loss_history=[{"l1": 0.5, "l2": 0.0, "total": 0.5, "omega": 0.0}],
        )
        path = emit_report(report, "json", tmp_path)
        assert ExperimentReport.from_json(path.read_text()) == report

    def test_empty_history_is_valid(self, blob_dataset, tmp_path):
        fpath, lpath = blob_dataset
        cfg = base_config(fpath, lpath, tmp_path / "out", epochs=0, report_format="json")
        report = run_experiment(cfg)
        assert report.loss_history == []
        parsed = json.loads((tmp_path / "out" / "report.json").read_text())
        assert parsed["loss_history"] == []

    def test_unknown_format_rejected(self, tmp_path):
        report = ExperimentReport(
            config={}, n_samples=1, n_features=1, embed_dim=1, metrics=None, loss_history=[]
        )
        with pytest.raises(ConfigError, match="text|json"):
            emit_report(report, "xml", tmp_path)


class TestConfigParsing:
    def test_file_plus_overrides_cli_wins(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("features=a.dtcf\nclusters=4\nepochs=10\n# comment\nout_dir=out\n")
        cfg = load_config(f, overrides=["epochs=20", "seed=7"])
        assert cfg.clusters == 4
        assert cfg.epochs == 20
        assert cfg.seed == 7

    def test_unknown_key_rejected(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("featuresss=a\n")
        with pytest.raises(ConfigError, match="unknown config key"):
            load_config(f)

    def test_bad_value_type(self):
        with pytest.raises(ConfigError, match="expected int"):
            parse_assignments(["epochs=soon"])

    def test_bool_coercion(self):
        assert parse_assignments(["include_timings=true"]) == {"include_timings": True}
        with pytest.raises(ConfigError, match="boolean"):
            parse_assignments(["include_timings=maybe"])

    def test_validation_catches_bad_variant(self, tmp_path):
        cfg = ExperimentConfig(features="x", clusters=3, out_dir="o", variant="zz")
        with pytest.raises(ConfigError, match="variant"):
            cfg.validate()

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError, match="config file not found"):
            load_config(tmp_path / "nope.cfg")
