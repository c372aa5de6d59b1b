"""End-to-end command line behavior, run in process."""

import contextlib
import io
import json

import numpy as np
import pytest

from fldeval import FeatureMatrix, Role, sample_moons, write_features
from fldeval.cli import REPORT_SCHEMA, main
from fldeval.synthetic import EXPERIMENT_KDE_USHAPE


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("features")
    train_pts, _ = sample_moons(200, 0.1, 1)
    test_pts, _ = sample_moons(100, 0.1, 2)
    gen_pts, _ = sample_moons(100, 0.1, 3)
    paths = {
        "train": root / "train.fvec",
        "test": root / "test.fvec",
        "gen": root / "gen.fvec",
        "copies": root / "copies.fvec",
        "gen_ids": root / "gen_ids.csv",
        "wide": root / "wide.fvec",
    }
    write_features(FeatureMatrix(train_pts), paths["train"])
    write_features(FeatureMatrix(test_pts), paths["test"])
    write_features(FeatureMatrix(gen_pts), paths["gen"])
    write_features(FeatureMatrix(train_pts[:100]), paths["copies"])

    # one exact train copy ahead of i.i.d. rows, with string ids
    with_copy = np.vstack([train_pts[:1].astype(np.float32).astype(np.float64),
                           gen_pts[1:]])
    ids = tuple(f"sample_{i:03d}" for i in range(100))
    write_features(FeatureMatrix(with_copy, ids=ids), paths["gen_ids"])

    write_features(FeatureMatrix(np.random.default_rng(4).normal(size=(50, 3))),
                   paths["wide"])
    return {k: str(v) for k, v in paths.items()}


def fld_args(data, *extra):
    return ["fld", "--train", data["train"], "--test", data["test"],
            "--gen", data["gen"], *extra]


class TestFldCommand:
    def test_report_shape_and_determinism(self, data):
        code, out, err = run(fld_args(data))
        again = run(fld_args(data))
        assert code == 0
        assert out == again[1]
        doc = json.loads(out)
        assert doc["schema"] == REPORT_SCHEMA
        assert doc["command"] == "fld"
        assert set(doc["fld"]) == {"fld_test", "fld_train", "gen_gap",
                                   "raw_nll_test", "overfitting", "constant"}
        assert doc["baselines"] is None
        assert doc["timings"] is None
        assert len(doc["inputs"]["train"]["sha256"]) == 64
        assert "warning" in err

    def test_out_keeps_stdout_clean(self, data, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run(fld_args(data, "--out", str(target)))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["command"] == "fld"

    def test_small_inputs_warn_on_stderr(self, data):
        _, _, err = run(fld_args(data))
        assert "100 generated rows" in err
        assert "100 test rows" in err

    def test_calibrated_run_is_deterministic(self, data):
        first = run(fld_args(data, "--calibrate", "--seed", "7"))
        second = run(fld_args(data, "--calibrate", "--seed", "7"))
        assert first[0] == 0
        assert first[1] == second[1]
        doc = json.loads(first[1])
        assert doc["fld"]["constant"]["method"] == "train-split"
        assert doc["config"]["seed"] == 7

    def test_explicit_constant_shifts_the_score(self, data):
        plain = json.loads(run(fld_args(data))[1])
        shifted = json.loads(run(fld_args(data, "--constant", "5.0"))[1])
        assert shifted["fld"]["constant"]["c_value"] == 5.0
        assert shifted["fld"]["fld_test"] == plain["fld"]["fld_test"] - 5.0

    def test_calibrate_and_constant_conflict(self, data):
        code, _, _ = run(fld_args(data, "--calibrate", "--constant", "1.0"))
        assert code == 2

    def test_timings_are_opt_in(self, data):
        doc = json.loads(run(fld_args(data, "--timings"))[1])
        assert set(doc["timings"]) == {"load", "calibrate", "fit_and_score"}
        assert all(t >= 0.0 for t in doc["timings"].values())


class TestErrorPaths:
    def test_missing_file_is_a_data_error(self, data, tmp_path):
        code, out, err = run(["fld", "--train", str(tmp_path / "absent.fvec"),
                              "--test", data["test"], "--gen", data["gen"]])
        assert code == 3
        assert out == ""
        assert "error:" in err

    def test_corrupt_file_reports_offset(self, data, tmp_path):
        bad = tmp_path / "bad.fvec"
        bad.write_bytes(b"NOPE" + bytes(20))
        code, _, err = run(["fld", "--train", str(bad),
                            "--test", data["test"], "--gen", data["gen"]])
        assert code == 3
        assert "bad magic" in err
        assert "offset 0" in err

    def test_dimension_mismatch(self, data):
        code, _, err = run(["fld", "--train", data["train"],
                            "--test", data["test"], "--gen", data["wide"]])
        assert code == 3
        assert "dimension" in err

    def test_bad_learning_rate_is_a_config_error(self, data):
        code, _, _ = run(fld_args(data, "--lr", "0"))
        assert code == 2

    def test_divergence_is_a_numerical_error(self, data):
        code, out, err = run(["fld", "--train", data["train"], "--test", data["test"],
                              "--gen", data["copies"], "--lr", "200"])
        assert code == 4
        assert out == ""
        assert "diverged" in err

    def test_unknown_subcommand(self):
        code, _, _ = run(["frobnicate"])
        assert code == 2


class TestBaselinesCommand:
    def test_report_fields(self, data):
        code, out, _ = run(["baselines", "--train", data["train"],
                            "--test", data["test"], "--gen", data["gen"]])
        assert code == 0
        doc = json.loads(out)
        assert doc["command"] == "baselines"
        assert doc["fld"] is None
        assert set(doc["baselines"]) == {"fid_train", "fid_test", "fid_gap",
                                         "precision", "recall", "c_t",
                                         "auth_pct", "knn_k"}
        assert doc["baselines"]["knn_k"] == 3

    def test_deterministic_bytes(self, data):
        argv = ["baselines", "--train", data["train"], "--test", data["test"],
                "--gen", data["gen"], "--k", "5"]
        assert run(argv)[1] == run(argv)[1]


class TestRankCommand:
    def test_memorization_csv_shape(self, data):
        code, out, _ = run(["rank", "--kind", "memorization",
                            "--train", data["train"], "--gen", data["gen"]])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "id,log_score,rank"
        assert len(lines) == 101
        ranks = [int(line.split(",")[2]) for line in lines[1:]]
        assert ranks == list(range(1, 101))
        scores = [float(line.split(",")[1]) for line in lines[1:]]
        assert scores == sorted(scores, reverse=True)

    def test_ids_survive_and_the_copy_ranks_first(self, data):
        code, out, _ = run(["rank", "--kind", "memorization",
                            "--train", data["train"], "--gen", data["gen_ids"]])
        assert code == 0
        first = out.strip().splitlines()[1]
        assert first.startswith("sample_000,")
        assert first.endswith(",1")

    def test_top_truncates(self, data):
        code, out, _ = run(["rank", "--kind", "memorization", "--top", "5",
                            "--train", data["train"], "--gen", data["gen"]])
        assert code == 0
        assert len(out.strip().splitlines()) == 6

    def test_fidelity_needs_test(self, data):
        code, _, err = run(["rank", "--kind", "fidelity",
                            "--train", data["train"], "--gen", data["gen"]])
        assert code == 2
        assert "--test" in err

    def test_fidelity_runs(self, data):
        code, out, _ = run(["rank", "--kind", "fidelity", "--test", data["test"],
                            "--train", data["train"], "--gen", data["gen"]])
        assert code == 0
        assert len(out.strip().splitlines()) == 101

    def test_bad_top_rejected(self, data):
        code, _, _ = run(["rank", "--kind", "memorization", "--top", "0",
                          "--train", data["train"], "--gen", data["gen"]])
        assert code == 2

    def test_out_writes_the_csv(self, data, tmp_path):
        target = tmp_path / "rank.csv"
        code, out, _ = run(["rank", "--kind", "memorization", "--out", str(target),
                            "--train", data["train"], "--gen", data["gen"]])
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("id,log_score,rank\n")


class TestSynthCommand:
    ARGS = ["synth", "--experiment", EXPERIMENT_KDE_USHAPE,
            "--n-total", "300", "--n-train", "200", "--n-test", "100",
            "--m", "100", "--grid", "0.001,1.0", "--seed", "5"]

    def test_csv_table(self, data):
        code, out, _ = run(self.ARGS)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("bandwidth,fld_test,")
        assert len(lines) == 3
        assert float(lines[1].split(",")[0]) == 0.001

    def test_deterministic_bytes(self):
        assert run(self.ARGS)[1] == run(self.ARGS)[1]

    def test_bad_grid_value(self):
        code, _, err = run(["synth", "--experiment", EXPERIMENT_KDE_USHAPE,
                            "--grid", "0.1,apple"])
        assert code == 2
        assert "grid" in err

    def test_bad_split_sizes(self):
        code, _, _ = run(["synth", "--experiment", EXPERIMENT_KDE_USHAPE,
                          "--n-total", "100", "--n-train", "200", "--n-test", "100"])
        assert code == 2


class TestCalibrateCommand:
    def test_prints_a_parseable_constant(self, data):
        argv = ["calibrate", "--train", data["train"], "--test", data["test"],
                "--seed", "7"]
        code, out, _ = run(argv)
        assert code == 0
        value = float(out)
        assert np.isfinite(value)
        assert run(argv)[1] == out
