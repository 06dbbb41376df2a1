import json

import numpy as np
import pandas as pd
import pytest

from phmm import __version__
from phmm.args import parse
from phmm.definitions import DEFAULT_PARAMS
from phmm.io import read_csv, read_dataset
from phmm.main import select_action


def phmm(*argv) -> int:
    with pytest.raises(SystemExit) as exit_info:
        select_action([str(a) for a in argv])
    return exit_info.value.code


@pytest.fixture
def simulated(tmp_path):
    out = tmp_path / "sim"
    assert phmm("simulate", "--n", 12, "--T", 8, "--p", 0.3, "--seed", 4, "--out", out) == 0
    return out


@pytest.fixture
def fitted(tmp_path, simulated):
    out = tmp_path / "fit"
    code = phmm(
        "fit",
        "--data", simulated / "data.csv",
        "--truth", simulated / "truth.json",
        "--iters", 30,
        "--burn-in", 15,
        "--seed", 2,
        "--out", out,
    )
    assert code == 0
    return out


class TestSimulate:
    def test_writes_dataset_and_truth(self, simulated):
        dataset = read_dataset(simulated / "data.csv")
        assert dataset.n == 12
        assert (dataset.K, dataset.M) == (3, 3)
        truth = json.loads((simulated / "truth.json").read_text())
        assert len(truth["latents"]) == 12
        assert truth["seed"] == 4

    def test_rerun_is_byte_identical(self, simulated):
        before = (simulated / "data.csv").read_bytes()
        assert phmm("simulate", "--n", 12, "--T", 8, "--p", 0.3, "--seed", 4, "--out", simulated, "--overwrite") == 0
        assert (simulated / "data.csv").read_bytes() == before

    def test_existing_outputs_are_kept(self, simulated):
        before = (simulated / "data.csv").read_bytes()
        assert phmm("simulate", "--n", 3, "--out", simulated) == 1
        assert (simulated / "data.csv").read_bytes() == before

    def test_json_format(self, tmp_path):
        assert phmm("simulate", "--n", 3, "--T", 4, "--format", "json", "--out", tmp_path) == 0
        assert read_dataset(tmp_path / "data.json").n == 3

    def test_blockwise(self, tmp_path):
        assert phmm("simulate", "--n", 5, "--T", 10, "--p", 0.3, "--missing", "block", "--out", tmp_path) == 0
        dataset = read_dataset(tmp_path / "data.csv")
        assert all(seq.n_missing == 3 for seq in dataset)


class TestFit:
    def test_trace_and_report(self, fitted):
        frame, meta = read_csv(fitted / "trace.csv")
        assert len(frame) == 15
        assert meta["sampler"] == "collapsed"
        report = json.loads((fitted / "report.json").read_text())["report"]
        assert 0.0 <= report["latent_accuracy"] <= 1.0
        assert (fitted / "report.csv").exists()

    def test_thinning_keeps_one_draw(self, tmp_path, simulated):
        out = tmp_path / "thin"
        argv = ["fit", "--data", simulated / "data.csv", "--iters", 10, "--burn-in", 5, "--thin", 5, "--out", out]
        assert phmm(*argv) == 0
        frame, _ = read_csv(out / "trace.csv")
        assert frame["iter"].tolist() == [9]

    @pytest.mark.parametrize("sampler", ["partial", "vanilla"])
    def test_baseline_samplers(self, tmp_path, simulated, sampler):
        argv = ["fit", "--sampler", sampler, "--data", simulated / "data.csv", "--iters", 12, "--burn-in", 2]
        assert phmm(*argv, "--out", tmp_path) == 0
        assert json.loads((tmp_path / "trace.json").read_text())["sampler"] == sampler

    def test_em(self, tmp_path, simulated):
        argv = ["fit", "--sampler", "em", "--data", simulated / "data.csv", "--truth", simulated / "truth.json"]
        assert phmm(*argv, "--out", tmp_path) == 0
        params = json.loads((tmp_path / "params.json").read_text())
        assert np.allclose(np.sum(params["A"], axis=1), 1.0)
        frame, _ = read_csv(tmp_path / "loglik.csv")
        assert np.all(np.diff(frame["loglik"]) >= -1e-10)

    def test_cross_validation(self, tmp_path, simulated):
        argv = ["fit", "--sampler", "em", "--data", simulated / "data.csv", "--cv-mask", 0.2, "--cv-draws", 10]
        assert phmm(*argv, "--out", tmp_path) == 0
        report = pd.read_csv(tmp_path / "report.csv", comment="#")
        assert 0.0 <= report["cv_prediction_accuracy"].item() <= 1.0

    def test_config_file(self, tmp_path, simulated):
        config = tmp_path / "fit.yaml"
        config.write_text(f"data: {simulated / 'data.csv'}\niters: 12\nburn-in: 2\n")
        assert phmm("fit", "--config", config, "--out", tmp_path / "out") == 0
        frame, _ = read_csv(tmp_path / "out" / "trace.csv")
        assert len(frame) == 10


class TestPredict:
    def test_impute(self, tmp_path, simulated, fitted):
        argv = ["predict", "--mode", "impute", "--trace", fitted / "trace.json", "--data", simulated / "data.csv"]
        assert phmm(*argv, "--truth", simulated / "truth.json", "--draws", 25, "--out", tmp_path) == 0
        result = json.loads((tmp_path / "impute.json").read_text())
        for entry in result["imputations"]:
            if entry["positions"]:
                assert np.all(np.sum(entry["histogram"], axis=1) == 25)
        assert 0.0 <= result["imputation_accuracy"] <= 1.0

    def test_forecast(self, tmp_path, simulated, fitted):
        argv = ["predict", "--mode", "forecast", "--trace", fitted / "trace.csv", "--data", simulated / "data.csv"]
        assert phmm(*argv, "--W", 5, "--draws", 4, "--out", tmp_path) == 0
        result = json.loads((tmp_path / "forecast.json").read_text())
        assert len(result["forecasts"]) == 12
        assert np.asarray(result["forecasts"][0]).shape == (4, 13)

    def test_decode(self, tmp_path, simulated, fitted):
        argv = ["predict", "--mode", "decode", "--trace", fitted / "trace.csv", "--data", simulated / "data.csv"]
        assert phmm(*argv, "--draws", 3, "--full-path", "--out", tmp_path) == 0
        result = json.loads((tmp_path / "decode.json").read_text())
        assert np.asarray(result["decoded"][0]["states"]).shape == (3, 8)


class TestReport:
    def test_report_with_truth(self, tmp_path, simulated, fitted):
        argv = ["report", "--trace", fitted / "trace.json", "--data", simulated / "data.csv"]
        assert phmm(*argv, "--truth", simulated / "truth.json", "--out", tmp_path) == 0
        summary, _ = read_csv(tmp_path / "summary.csv")
        assert list(summary.columns) == ["parameter", "mean", "std"]

    def test_report_to_console_only(self, fitted, capsys):
        assert phmm("report", "--trace", fitted / "trace.csv") == 0
        assert "pi_0" in capsys.readouterr().out


class TestBenchmark:
    def test_small_grid(self, tmp_path):
        argv = ["benchmark", "--n", 10, "--T", 6, "--grid", 0.0, 0.5, "--samplers", "collapsed", "em"]
        assert phmm(*argv, "--iters", 20, "--burn-in", 10, "--out", tmp_path) == 0
        table, _ = read_csv(tmp_path / "benchmark.csv")
        assert len(table) == 4
        assert set(table["sampler"]) == {"collapsed", "em"}
        assert table.loc[table.sampler == "em", "ms_forward_per_iter"].isna().all()


class TestUsage:
    def test_unknown_sampler(self, tmp_path):
        assert phmm("fit", "--sampler", "nuts", "--data", "x.csv", "--out", tmp_path) == 2

    def test_missing_trace(self):
        assert phmm("report") == 2

    def test_burn_in_must_be_smaller(self, tmp_path):
        assert phmm("fit", "--data", "x.csv", "--iters", 5, "--burn-in", 5, "--out", tmp_path) == 2

    def test_missing_dataset_file(self, tmp_path):
        assert phmm("fit", "--data", tmp_path / "absent.csv", "--K", 3, "--out", tmp_path / "out") == 1

    def test_version(self, capsys):
        assert phmm("--version") == 0
        assert capsys.readouterr().out.strip() == __version__


class TestParse:
    def test_missing_probability_flag_is_not_an_abbreviation(self):
        args = parse(["simulate", "--n", "5", "--T", "4", "--p", "0.3", "--out", "x"])
        assert args.p == 0.3
        assert args.profile is None

    def test_abbreviations_are_rejected(self):
        with pytest.raises(SystemExit) as exit_info:
            parse(["fit", "--data", "x.csv", "--it", "5", "--out", "x"])
        assert exit_info.value.code == 2

    @pytest.mark.parametrize(
        "flags", [["--paper-default"], ["--params", "paper-default"], ["--default-params"], ["--params", "default"]]
    )
    def test_default_parameter_aliases(self, flags):
        args = parse(["simulate", *flags, "--out", "x"])
        assert args.params == DEFAULT_PARAMS

    def test_simulate_with_aliased_parameters(self, tmp_path):
        argv = ["simulate", "--paper-default", "--n", 6, "--T", 5, "--missing", "random", "--p", 0.3]
        assert phmm(*argv, "--out", tmp_path) == 0
        assert read_dataset(tmp_path / "data.csv").n == 6
