import os

import pytest
from click.testing import CliRunner

from StableTheta.cli.commands import EXIT_FAILURE, EXIT_OK, EXIT_VERIFICATION, cli
from StableTheta.lattice.enumeration import shell_cache
from StableTheta.main import main


@pytest.fixture
def run(quiet_config):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, ["--config", quiet_config, *args])

    return invoke


def test_theta_table(run):
    result = run("theta", "--form", "E8", "--genus", "1", "--trace-bound", "6")
    assert result.exit_code == EXIT_OK, result.output
    lines = result.output.splitlines()
    assert lines[0] == "E8 genus=1 weight=4 trace_bound=6"
    assert [line.split()[-1] for line in lines[2:]] == ["1", "240", "2160", "6720"]


def test_theta_genus_zero(run):
    result = run("theta", "--genus", "0")
    assert result.exit_code == EXIT_OK
    assert result.output.splitlines()[-1].split() == ["0", "()", "1"]


def test_theta_output_is_deterministic(run, tmp_path):
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run("theta", "--genus", "2", "--trace-bound", "4", "--out", str(first)).exit_code == EXIT_OK
    assert run("theta", "--genus", "2", "--trace-bound", "4", "--out", str(second)).exit_code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().startswith("expansion genus=2 weight=4/1 trace_bound=4 form=E8\n")


def test_theta_rejects_odd_bound(run):
    result = run("theta", "--trace-bound", "5")
    assert result.exit_code == EXIT_FAILURE
    assert "trace bound must be even" in result.output


def test_theta_budget_exhaustion_writes_nothing(run, tmp_path):
    shell_cache.clear()
    out = tmp_path / "theta.txt"
    result = run("theta", "--genus", "1", "--trace-bound", "6", "--budget", "5", "--out", str(out))
    assert result.exit_code == EXIT_FAILURE
    assert "node budget exhausted" in result.output
    assert not out.exists()


def test_theta_uses_cache(run, tmp_path):
    cache_dir = tmp_path / "cache"
    assert run("theta", "--genus", "1", "--trace-bound", "4", "--cache", str(cache_dir)).exit_code == EXIT_OK
    assert len(os.listdir(cache_dir)) == 1
    again = run("theta", "--genus", "1", "--trace-bound", "4", "--cache", str(cache_dir))
    assert again.exit_code == EXIT_OK
    assert "2160" in again.output


def test_igusa_genus_zero(run):
    result = run("igusa", "--genus", "0")
    assert result.exit_code == EXIT_OK
    assert "zero" in result.output


def test_igusa_low_genus(run):
    result = run("igusa", "--genus", "2", "--trace-bound", "2")
    assert result.exit_code == EXIT_OK
    assert "identically zero" in result.output
    assert "singular coefficients all zero" in result.output


@pytest.mark.slow
def test_igusa_genus_four(run):
    result = run("igusa", "--genus", "4", "--trace-bound", "8")
    assert result.exit_code == EXIT_OK, result.output
    assert "nonzero; witness T = " in result.output
    assert "singular coefficients all zero" in result.output


def test_stable_check(run):
    result = run("stable-check", "--genus", "2", "--trace-bound", "4")
    assert result.exit_code == EXIT_OK, result.output
    assert "coherent" in result.output
    assert result.output.splitlines()[-1] == "stable"


def test_stable_check_genus_zero_is_vacuous(run):
    result = run("stable-check", "--genus", "0", "--trace-bound", "4")
    assert result.exit_code == EXIT_OK
    assert result.output.splitlines()[-1] == "stable"


def test_stable_check_localizes_fault(run):
    result = run("stable-check", "--genus", "2", "--trace-bound", "4", "--inject-fault")
    assert result.exit_code == EXIT_VERIFICATION
    assert "injected fault: genus 2" in result.output
    assert "FAILED" in result.output
    assert "not stable: 1 failures" in result.output


def test_stable_check_from_cache(run, tmp_path):
    cache_dir = str(tmp_path / "cache")
    missing = run("stable-check", "--genus", "1", "--trace-bound", "4", "--cache", cache_dir, "--from-cache")
    assert missing.exit_code == EXIT_FAILURE
    assert run("stable-check", "--genus", "1", "--trace-bound", "4", "--cache", cache_dir).exit_code == EXIT_OK
    cached = run("stable-check", "--genus", "1", "--trace-bound", "4", "--cache", cache_dir, "--from-cache")
    assert cached.exit_code == EXIT_OK, cached.output


def test_operators_weight_zero(run):
    result = run("operators", "--weight-zero", "--genus", "2", "--trace-bound", "2", "--samples", "5")
    assert result.exit_code == EXIT_OK, result.output
    assert "cocycle" in result.output
    assert "FAILED" not in result.output


def test_operators_single_point_schedule_warns(run):
    result = run("operators", "--weight-zero", "--genus", "2", "--trace-bound", "2", "--samples", "2",
                 "--t-schedule", "100")
    assert result.exit_code == EXIT_OK
    assert "warning: convergence report: schedule has a single point" in result.output


def test_operators_rejects_bad_schedule(run):
    assert run("operators", "--weight-zero", "--t-schedule", "100,10").exit_code == EXIT_FAILURE
    assert run("operators", "--weight-zero", "--t-schedule", "a,b").exit_code == EXIT_FAILURE


def test_grenier_decompose(run):
    result = run("grenier", "decompose", "--matrix", "2,1,1,1")
    assert result.exit_code == EXIT_OK
    assert "v = 0.5" in result.output
    assert "renormalized" not in result.output


def test_grenier_renormalizes(run):
    result = run("grenier", "decompose", "--matrix", "2,0,0,2")
    assert result.exit_code == EXIT_OK
    assert "renormalized" in result.output


def test_grenier_recompose(run):
    result = run("grenier", "recompose", "--v", "0.5", "--x", "0.5", "--w", "1")
    assert result.exit_code == EXIT_OK
    assert "Y = [[2, 1]; [1, 1]]" in result.output


def test_grenier_limit(run):
    result = run("grenier", "limit", "--s", "1,2", "--w", "2,1,1,1")
    assert result.exit_code == EXIT_OK, result.output
    assert "shifted power function = 0.25+0i" in result.output


def test_grenier_malformed_matrix(run):
    result = run("grenier", "decompose", "--matrix", "1,2,3")
    assert result.exit_code == EXIT_FAILURE
    assert "error:" in result.output


def test_main_maps_usage_errors(quiet_config):
    assert main(["--config", quiet_config, "theta", "--no-such-flag"]) == EXIT_FAILURE
    assert main(["--config", quiet_config, "grenier", "decompose", "--matrix", "2,1,1,1"]) == EXIT_OK
