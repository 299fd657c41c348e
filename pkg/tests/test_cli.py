"""Command-line interface: subcommands, outputs, and exit codes."""

import json
import math

import numpy as np
import pytest

from droughtcast import bundled_dataset_path
from droughtcast.cli import main

FIXTURE = bundled_dataset_path()


def run(argv):
    return main(argv)


def load(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


@pytest.fixture()
def small_raw(tmp_path):
    """A single-station raw-climate file large enough to standardize."""
    rng = np.random.default_rng(600)
    lines = ["station,period,precip_mm,tmean_c"]
    year, month = 1970, 1
    for _ in range(30 * 12):
        precip = float(rng.gamma(3.0, 25.0))
        lines.append(f"gauge,{year:04d}-{month:02d},{precip:.1f},10.0")
        month += 1
        if month > 12:
            month, year = 1, year + 1
    path = tmp_path / "raw.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture()
def classes_file(tmp_path):
    rng = np.random.default_rng(601)
    labels = ["ED", "SD", "MD", "NN", "MW", "SW", "EW"]
    weights = [0.02, 0.05, 0.10, 0.62, 0.11, 0.06, 0.04]
    lines = ["station,period,class"]
    year, month = 1980, 1
    for _ in range(40 * 12):
        label = rng.choice(labels, p=weights)
        lines.append(f"gauge,{year:04d}-{month:02d},{label}")
        month += 1
        if month > 12:
            month, year = 1, year + 1
    path = tmp_path / "classes.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestStandardize:
    def test_writes_index_json_and_csv(self, small_raw, tmp_path):
        out = tmp_path / "out.json"
        idx = tmp_path / "index.csv"
        code = run(
            ["standardize", small_raw, "-o", str(out), "--index-csv", str(idx)]
        )
        assert code == 0
        doc = load(out)
        assert doc["command"] == "standardize"
        (station,) = doc["stations"]
        assert station["station"] == "gauge"
        assert len(station["groups"]) == 12  # month grouping default
        for group in station["groups"]:
            assert group["selected"]["family"] in ("normal", "gamma", "log-normal")
            assert group["candidates"]
        values = [row["value"] for row in station["index"] if row["value"] is not None]
        assert abs(sum(values) / len(values)) < 0.1
        csv_lines = idx.read_text().strip().split("\n")
        assert csv_lines[0] == "station,period,index"
        assert len(csv_lines) == 1 + len(values)

    def test_rejects_non_raw_input(self, classes_file):
        assert run(["standardize", classes_file]) == 2

    def test_pooled_grouping(self, small_raw, tmp_path):
        out = tmp_path / "out.json"
        assert run(["standardize", small_raw, "--grouping", "pooled", "-o", str(out)]) == 0
        (station,) = load(out)["stations"]
        assert [g["group"] for g in station["groups"]] == ["pooled"]


class TestClassify:
    def test_classify_raw_end_to_end(self, small_raw, tmp_path):
        out = tmp_path / "out.json"
        csv_path = tmp_path / "classes.csv"
        code = run(["classify", small_raw, "-o", str(out), "--classes-csv", str(csv_path)])
        assert code == 0
        doc = load(out)
        (station,) = doc["stations"]
        counts = station["class_counts"]
        assert sum(counts.values()) == 360
        assert counts["NN"] > 200  # |index| < 1 covers ~68% of months
        header = csv_path.read_text().split("\n")[0]
        assert header == "station,period,class"

    def test_classify_accepts_precomputed_index(self, tmp_path):
        path = tmp_path / "idx.csv"
        path.write_text(
            "station,period,index\ns,2000-01,-2.5\ns,2000-02,0.0\ns,2000-03,1.7\n",
            encoding="utf-8",
        )
        out = tmp_path / "out.json"
        assert run(["classify", str(path), "-o", str(out)]) == 0
        (station,) = load(out)["stations"]
        labels = [row["value"] for row in station["classes"]]
        assert labels == ["ED", "NN", "SW"]

    def test_cuts_override_changes_classification(self, tmp_path):
        path = tmp_path / "idx.csv"
        path.write_text(
            "station,period,index\ns,2000-01,0.8\n", encoding="utf-8"
        )
        out = tmp_path / "out.json"
        assert run(["classify", str(path), "-o", str(out)]) == 0
        assert load(out)["stations"][0]["classes"][0]["value"] == "NN"
        assert (
            run(["classify", str(path), "--cuts", "-2,-1.5,-1,0.5,1.5,2", "-o", str(out)])
            == 0
        )
        assert load(out)["stations"][0]["classes"][0]["value"] == "MW"

    def test_bad_cuts_is_usage_error(self, tmp_path):
        path = tmp_path / "idx.csv"
        path.write_text("station,period,index\ns,2000-01,0.8\n", encoding="utf-8")
        assert run(["classify", str(path), "--cuts", "1,2"]) == 1
        assert run(["classify", str(path), "--cuts", "a,b,c,d,e,f"]) == 1
        assert run(["classify", str(path), "--cuts", "2,-1.5,-1,1,1.5,2"]) == 1


class TestFitPredictSteady:
    def test_fit_reports_weights_and_transitions(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["fit", classes_file, "-o", str(out), "--max-lag", "4"]) == 0
        (station,) = load(out)["stations"]
        assert station["max_lag_used"] == 4
        weights = [rec["weight"] for rec in station["weights"]["lags"]]
        assert math.isclose(sum(weights), 1.0, abs_tol=1e-9)
        lags = station["transitions"]["lags"]
        assert [entry["lag"] for entry in lags] == [1, 2, 3, 4]
        for entry in lags:
            for row, supported in zip(entry["matrix"], entry["row_support"]):
                if supported:
                    assert math.isclose(sum(row), 1.0, abs_tol=1e-9)

    def test_predict_horizon_targets_follow_the_series(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        csv_path = tmp_path / "fc.csv"
        code = run(
            [
                "predict", classes_file, "-o", str(out),
                "--horizon", "3", "--forecast-csv", str(csv_path),
            ]
        )
        assert code == 0
        (station,) = load(out)["stations"]
        targets = [f["target"] for f in station["forecasts"]]
        assert targets == ["2020-01", "2020-02", "2020-03"]  # data ends 2019-12
        for f in station["forecasts"]:
            assert math.isclose(sum(f["probabilities"].values()), 1.0, abs_tol=1e-9)
        lines = csv_path.read_text().strip().split("\n")
        assert len(lines) == 4  # header + 3 steps
        assert lines[0].startswith("station,step,predicted_class,ED,")

    def test_propagate_flag_runs(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["predict", classes_file, "--horizon", "2", "--propagate", "-o", str(out)]) == 0
        (station,) = load(out)["stations"]
        assert station["forecasts"][1]["used_lags"] == [1]

    def test_steady_emits_stationary_and_lag(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["steady", classes_file, "-o", str(out)]) == 0
        (station,) = load(out)["stations"]
        pi = station["stationary"]["probabilities"]
        assert math.isclose(sum(pi.values()), 1.0, abs_tol=1e-9)
        assert station["stationary"]["residual"] < 1e-8
        assert 1 <= station["steady_state_lag"] <= 7

    def test_max_lag_auto_allowed_outside_backtest(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["fit", classes_file, "--max-lag", "auto", "-o", str(out)]) == 0
        (station,) = load(out)["stations"]
        assert 1 <= station["max_lag_used"] <= 12

    def test_bad_max_lag_is_usage_error(self, classes_file):
        assert run(["fit", classes_file, "--max-lag", "0"]) == 1
        assert run(["fit", classes_file, "--max-lag", "deep"]) == 1


class TestBacktestCommand:
    def test_backtest_json_structure(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        conf = tmp_path / "confusion.csv"
        code = run(
            [
                "backtest", classes_file, "-o", str(out),
                "--holdout", "24", "--max-lag", "3", "--confusion-csv", str(conf),
            ]
        )
        assert code == 0
        (station,) = load(out)["stations"]
        assert station["requested_folds"] == 24
        assert station["evaluated_folds"] + len(station["skipped"]) == 24
        assert set(station["hit_rates"]) == {"wmc", "markov-lag1", "climatology"}
        matrix = station["confusion"]["matrix"]
        assert sum(sum(row) for row in matrix) == station["scores"]["wmc"]["evaluated"]
        lines = conf.read_text().strip().split("\n")
        assert lines[0] == "station,observed,predicted,count"
        assert len(lines) == 1 + 49  # 7x7 grid flattened

    def test_backtest_rejects_auto_max_lag(self, classes_file):
        assert run(["backtest", classes_file, "--max-lag", "auto"]) == 1

    def test_no_refit_mode_runs(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["backtest", classes_file, "--no-refit", "-o", str(out)]) == 0
        assert load(out)["stations"][0]["refit"] is False


class TestReportCommand:
    def test_full_report_on_bundled_fixture(self, tmp_path):
        out = tmp_path / "report.json"
        summary = tmp_path / "summary.txt"
        code = run(
            [
                "report", FIXTURE, "-o", str(out),
                "--summary", str(summary), "--holdout", "6",
            ]
        )
        assert code == 0
        doc = load(out)
        assert doc["command"] == "report"
        assert len(doc["stations"]) == 4
        for station in doc["stations"]:
            assert station["models"], "raw input must carry fitted models"
            assert station["backtest"]["requested_folds"] == 6
            assert station["steady_comparison"]["max_abs_difference"] >= 0.0
        text = summary.read_text()
        for name in ("alder", "basalt", "cirrus", "dune"):
            assert f"== station {name} ==" in text

    def test_holdout_zero_disables_backtest(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        summary = tmp_path / "summary.txt"
        code = run(
            ["report", classes_file, "-o", str(out), "--summary", str(summary), "--holdout", "0"]
        )
        assert code == 0
        (station,) = load(out)["stations"]
        assert station["backtest"] is None

    def test_auto_lag_with_backtest_rejected(self, classes_file):
        assert run(["report", classes_file, "--max-lag", "auto"]) == 1
        assert (
            run(["report", classes_file, "--max-lag", "auto", "--holdout", "0"]) == 0
        )


class TestExitCodes:
    def test_usage_errors_return_one(self):
        assert run(["predict", FIXTURE, "--horizon", "0"]) == 1
        assert run(["no-such-command"]) == 1
        assert run(["backtest", FIXTURE, "--holdout", "0"]) == 1

    def test_data_errors_return_two(self, tmp_path):
        assert run(["predict", str(tmp_path / "missing.csv")]) == 2
        bad = tmp_path / "bad.csv"
        bad.write_text("station,period,index\ns,月,0.5\n", encoding="utf-8")
        assert run(["classify", str(bad)]) == 2

    def test_numerical_errors_return_three(self, tmp_path):
        # two class blocks that never communicate: no unique stationary
        lines = ["station,period,class"]
        year, month = 2000, 1
        pattern = (["NN"] * 10 + [""] + ["MD"] * 10 + [""]) * 3
        for label in pattern:
            lines.append(f"s,{year:04d}-{month:02d},{label}")
            month += 1
            if month > 12:
                month, year = 1, year + 1
        path = tmp_path / "split.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert run(["steady", str(path), "--max-lag", "1"]) == 3

    def test_success_returns_zero(self, classes_file, tmp_path):
        assert run(["fit", classes_file, "-o", str(tmp_path / "x.json")]) == 0


class TestDeterminism:
    def test_repeat_invocations_are_byte_identical(self, classes_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["predict", classes_file, "--horizon", "2", "-o"]
        assert run(argv + [str(a)]) == 0
        assert run(argv + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_equals_file_output(self, classes_file, tmp_path, capfd):
        out = tmp_path / "out.json"
        assert run(["fit", classes_file, "-o", str(out)]) == 0
        assert run(["fit", classes_file]) == 0
        captured = capfd.readouterr().out
        assert captured == out.read_text()


class TestKindAliases:
    def test_classes_alias(self, classes_file, tmp_path):
        out = tmp_path / "out.json"
        assert run(["fit", classes_file, "--kind", "classes", "-o", str(out)]) == 0

    def test_wrong_alias_fails_with_data_error(self, classes_file):
        assert run(["fit", classes_file, "--kind", "index"]) == 2

    def test_verbose_env_smoke(self, classes_file, tmp_path, monkeypatch):
        monkeypatch.setenv("DROUGHTCAST_VERBOSE", "1")
        assert run(["fit", classes_file, "-o", str(tmp_path / "x.json")]) == 0
