import dataclasses
import os

import pandas as pd
import pytest

import experiment_config
from cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFICATION_FAILED, main
from experiment_config import load_config
from errors import ConfigError
from function_catalog import LipschitzCertificate, get_function

MOMENT_HEADER = "n,a,alpha,beta,x,order,kind,closed_form,oracle,abs_diff,rel_diff,verdict"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for var in ("BKS_TAIL_EPS", "BKS_K_MAX", "BKS_OUT_DIR", "BKS_N_JOBS"):
        monkeypatch.delenv(var, raising=False)


def run(tmp_path, *args):
    return main(list(args) + ["--out-dir", str(tmp_path / "out")])


def test_eval_constant(tmp_path):
    assert run(tmp_path, "eval", "--function", "const1", "--n-list", "5,10", "--a", "1", "--alpha", "1",
               "--beta", "2") == EXIT_OK
    df = pd.read_csv(tmp_path / "out" / "eval.csv")
    assert list(df.columns) == ["x", "n", "a", "alpha", "beta", "value"]
    assert len(df) == 2 * 101
    assert (df["value"] - 1.0).abs().max() <= 1e-10


def test_eval_first_moment(tmp_path):
    assert run(tmp_path, "eval", "--function", "t", "--n-list", "10", "--x-start", "1", "--x-stop", "1") == EXIT_OK
    df = pd.read_csv(tmp_path / "out" / "eval.csv")
    assert df["value"].iloc[0] == pytest.approx(1.05, rel=1e-9)


def test_empty_grid(tmp_path):
    assert run(tmp_path, "eval", "--x-start", "2", "--x-stop", "1") == EXIT_CONFIG
    assert not (tmp_path / "out").exists()


def test_unknown_function(tmp_path):
    assert run(tmp_path, "eval", "--function", "gamma") == EXIT_CONFIG


def test_unordered_stancu_needs_flag(tmp_path):
    assert run(tmp_path, "eval", "--alpha", "3", "--beta", "1") == EXIT_CONFIG
    assert run(tmp_path, "eval", "--alpha", "3", "--beta", "1", "--allow-unordered-stancu",
               "--format", "report") == EXIT_OK


def test_verify_moments_classical(tmp_path):
    assert run(tmp_path, "verify-moments", "--n-list", "10", "--x-stop", "2", "--x-step", "0.5") == EXIT_OK
    for form in ("literal", "reconstructed"):
        path = tmp_path / "out" / f"moments_{form}.csv"
        assert path.read_text().splitlines()[0] == MOMENT_HEADER
    reconstructed = pd.read_csv(tmp_path / "out" / "moments_reconstructed.csv")
    assert (reconstructed["verdict"] == "match").all()


def test_verify_moments_generalized_report(tmp_path):
    assert run(tmp_path, "verify-moments", "--n-list", "20", "--a", "1", "--alpha", "1", "--beta", "2",
               "--x-stop", "1") == EXIT_OK
    report = (tmp_path / "out" / "moments_report.txt").read_text()
    assert "Constant term" in report
    assert "supported: integrated" in report
    assert "sqrt is only Holder-1/2" in report
    literal = pd.read_csv(tmp_path / "out" / "moments_literal.csv")
    assert (literal["verdict"] == "mismatch").any()


def test_verify_moments_large_n_far_from_origin(tmp_path):
    assert run(tmp_path, "verify-moments", "--n-list", "1000", "--a", "2", "--alpha", "1", "--beta", "3",
               "--x-start", "10", "--x-stop", "10") == EXIT_OK
    reconstructed = pd.read_csv(tmp_path / "out" / "moments_reconstructed.csv")
    assert (reconstructed["verdict"] == "match").all()


def test_check_bounds_rejects_non_smooth_function(tmp_path):
    assert run(tmp_path, "check-bounds", "--theorem", "T3.1", "--function", "sqrt") == EXIT_CONFIG


def test_check_bounds_lipschitz(tmp_path):
    assert run(tmp_path, "check-bounds", "--theorem", "T3.2", "--function", "sqrt", "--n-list", "10,100",
               "--x-start", "0.5", "--x-stop", "1.5", "--x-step", "0.5") == EXIT_OK
    df = pd.read_csv(tmp_path / "out" / "bounds.csv")
    assert len(df) == 2 * 3
    assert df["holds"].all()
    report = (tmp_path / "out" / "bounds_report.txt").read_text()
    assert "n-stability: max/min of per-n constants" in report


def test_check_bounds_lipschitz_at_origin(tmp_path):
    assert run(tmp_path, "check-bounds", "--theorem", "T3.2", "--function", "sqrt") == EXIT_CONFIG


def test_converge_csv(tmp_path):
    assert run(tmp_path, "converge", "--n-list", "10,100,1000", "--format", "csv") == EXIT_OK
    df = pd.read_csv(tmp_path / "out" / "converge.csv")
    assert list(df.columns) == ["a", "alpha", "beta", "order", "n", "norm", "slope"]
    assert (df.loc[df["order"] == 0, "slope"] == "exact-zero").all()


def test_output_is_deterministic(tmp_path):
    args = ["verify-moments", "--n-list", "5", "--a", "1", "--alpha", "1", "--beta", "2", "--x-stop", "1", "--format",
            "csv"]
    assert main(args + ["--out-dir", str(tmp_path / "one")]) == EXIT_OK
    assert main(args + ["--out-dir", str(tmp_path / "two")]) == EXIT_OK
    for name in ("moments_literal.csv", "moments_reconstructed.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_tail_failure_exit_code(tmp_path):
    assert run(tmp_path, "eval", "--function", "sin", "--n-list", "100", "--x-start", "10", "--x-stop", "10",
               "--k-max", "5") == EXIT_NUMERICAL
    assert not (tmp_path / "out" / "eval.csv").exists()


def test_false_certificate_is_verification_failure(tmp_path, monkeypatch):
    fake = dataclasses.replace(get_function("sqrt"), lipschitz=LipschitzCertificate(M=0.1, exponent=1.0))
    monkeypatch.setattr(experiment_config, "get_function", lambda name: fake)
    assert run(tmp_path, "check-bounds", "--theorem", "T3.2", "--x-start", "0.5") == EXIT_VERIFICATION_FAILED


def test_no_temporary_files_left(tmp_path):
    assert run(tmp_path, "eval", "--function", "exp_neg") == EXIT_OK
    assert sorted(os.listdir(tmp_path / "out")) == ["eval.csv"]


class TestConfigLayers:
    def test_file_then_flags(self, tmp_path):
        cfg = tmp_path / "run.env"
        cfg.write_text("n_list=5,6\nfunction=sin\nx_stop=3\nx_step=0.5\n")
        config = load_config("eval", {"function": "exp_neg"}, str(cfg))
        assert config.n_list == (5, 6)
        assert config.function == "exp_neg"
        assert list(config.x_grid) == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]

    def test_default_grid(self):
        grid = load_config("eval").x_grid
        assert len(grid) == 101
        assert grid[0] == 0.0 and grid[-1] == pytest.approx(10.0)

    def test_environment_default(self, monkeypatch):
        monkeypatch.setenv("BKS_TAIL_EPS", "1e-10")
        assert load_config("eval").policy().tail_epsilon == 1e-10

    def test_bad_environment_value(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BKS_TAIL_EPS", "tiny")
        assert run(tmp_path, "eval") == EXIT_CONFIG

    def test_unknown_key_in_file(self, tmp_path):
        cfg = tmp_path / "run.env"
        cfg.write_text("colour=blue\n")
        with pytest.raises(ConfigError):
            load_config("eval", None, str(cfg))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config("eval", None, str(tmp_path / "missing.env"))
