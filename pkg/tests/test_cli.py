import json
import logging

import numpy as np
import pytest

import src.suite_manager
from src.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED, BoostDiffCLI, main
from src.export import read_table


def test_dispersion_table(workdir):
    assert main(["dispersion", "--v", "0.5", "--kmax", "8", "--n", "16", "--out", "disp.csv"]) == EXIT_OK
    table = read_table(workdir / "disp.csv")
    assert table.metadata["lambda"] == 4.0
    assert list(table.columns) == ["k", "re_omega_minus", "im_omega_minus", "re_omega_plus", "im_omega_plus", "admissible"]
    k = table.columns["k"]
    assert np.array_equal(table.columns["admissible"] == 1.0, np.abs(k) < 4.0)


def test_alias_runs_the_same_command(workdir):
    assert main(["disp", "--v", "0.5", "--n", "5"]) == EXIT_OK
    assert (workdir / "output" / "dispersion.csv").exists()


def test_unknown_command_suggests(workdir, caplog):
    with caplog.at_level(logging.INFO):
        assert main(["kernal", "--v", "0.5"]) == EXIT_USAGE
    assert "kernel" in caplog.text


def test_missing_speed_names_the_field(workdir, caplog):
    with caplog.at_level(logging.INFO):
        assert main(["kernel"]) == EXIT_USAGE
    assert "Missing required fields: v" in caplog.text


def test_speed_out_of_range(workdir, caplog):
    with caplog.at_level(logging.INFO):
        assert main(["kernel", "--v", "1.5"]) == EXIT_USAGE
    assert "v:" in caplog.text


def test_bad_flag_is_a_usage_error(workdir):
    assert main(["kernel", "--v", "0.5", "--frame", "lab"]) == EXIT_USAGE


def test_kernel_with_oracle(workdir):
    argv = ["kernel", "--v", "0.5", "--t", "0", "--t", "0.25", "--nx", "21", "--oracle", "--tol", "1e-8", "--out", "k.csv"]
    assert main(argv) == EXIT_OK
    table = read_table(workdir / "k.csv")
    assert table.rows == 42
    assert table.metadata["times"] == [0.0, 0.25]
    assert np.max(np.abs(table.columns["value"] - table.columns["oracle"])) <= 1e-8
    at_zero = table.columns["time"] == 0.0
    assert np.allclose(table.columns["value"][at_zero], np.sinc(4.0 * table.columns["x"][at_zero] / np.pi), atol=1e-9)


def test_kernel_rest_frame_json(workdir):
    assert main(["kernel", "--v", "0.5", "--frame", "rest", "--t", "0.3", "--nx", "11", "--format", "json"]) == EXIT_OK
    payload = json.loads((workdir / "output" / "kernel_rest.json").read_text())
    assert payload["metadata"]["frame"] == "rest"
    assert len(payload["columns"]["value"]) == 11


def test_oracle_tolerance_failure(workdir):
    argv = ["kernel", "--v", "0.5", "--t", "0.25", "--nx", "11", "--oracle", "--tol", "1e-30"]
    assert main(argv) == EXIT_VERIFICATION_FAILED


def test_kernel_overflow_names_the_time(workdir, caplog):
    with caplog.at_level(logging.INFO):
        assert main(["kernel", "--v", "0.5", "--t", "1000", "--nx", "5"]) == EXIT_USAGE
    assert "t = 1000" in caplog.text


def test_green_tables(workdir, caplog):
    with caplog.at_level(logging.INFO):
        assert main(["green", "--v", "0.5", "--t", "0", "--t", "1", "--nx", "11", "--n", "9", "--out", "g.csv"]) == EXIT_OK
    assert "Skipping" in caplog.text
    spatial = read_table(workdir / "g.csv")
    assert np.allclose(spatial.columns["green"], spatial.columns["rest_heat_kernel"], rtol=1e-10, atol=1e-14)
    fourier = read_table(workdir / "g_fourier.csv")
    assert fourier.rows == 9
    assert fourier.columns["re_g"][4] == pytest.approx(1.0 / np.sqrt(4.0 / 3.0))


def test_sample_then_evolve(workdir):
    assert main(["sample", "--v", "0.5", "--function", "gaussian", "--window", "12", "--out", "g.profile"]) == EXIT_OK
    assert (workdir / "g.profile").read_text().startswith("lambda=4.0 v=0.5")
    argv = ["evolve", "--v", "0.5", "--profile", "g.profile", "--t", "0", "--t", "-0.25", "--nx", "21", "--oracle", "--out", "e.csv"]
    assert main(argv) == EXIT_OK
    table = read_table(workdir / "e.csv")
    assert table.rows == 42
    assert np.max(np.abs(table.columns["value"] - table.columns["oracle"])) <= 1e-8


def test_sample_random_is_seeded(workdir):
    for name in ("a.profile", "b.profile"):
        assert main(["sample", "--v", "0.5", "--function", "random", "--seed", "7", "--window", "10", "--out", name]) == EXIT_OK
    assert (workdir / "a.profile").read_bytes() == (workdir / "b.profile").read_bytes()
    assert main(["sample", "--v", "0.5", "--function", "random", "--seed", "8", "--window", "10", "--out", "c.profile"]) == EXIT_OK
    assert (workdir / "c.profile").read_bytes() != (workdir / "a.profile").read_bytes()


def test_evolve_reports_bad_profile_line(workdir, caplog):
    (workdir / "bad.profile").write_text("lambda=4.0 v=0.5\n0\t1.0\n1 oops\n")
    with caplog.at_level(logging.INFO):
        assert main(["evolve", "--v", "0.5", "--profile", "bad.profile"]) == EXIT_USAGE
    assert "line 3" in caplog.text


def test_evolve_rejects_profile_for_other_speed(workdir):
    assert main(["sample", "--v", "0.25", "--window", "4", "--out", "p.profile"]) == EXIT_OK
    assert main(["evolve", "--v", "0.5", "--profile", "p.profile"]) == EXIT_USAGE


def test_evolve_missing_profile_file(workdir):
    assert main(["evolve", "--v", "0.5", "--profile", "nowhere.profile"]) == EXIT_USAGE


def test_cutoff_curve(workdir):
    assert main(["cutoff", "--v", "0.5", "--vmin", "0.25", "--vmax", "0.75", "--nk", "3", "--out", "c.csv"]) == EXIT_OK
    table = read_table(workdir / "c.csv")
    assert table.columns["lambda"][1] == pytest.approx(4.0, abs=1e-12)
    assert table.columns["lambda"][0] == pytest.approx(2.0 * np.sqrt(3.0), abs=1e-12)
    assert np.allclose(table.columns["lambda_numeric"], table.columns["lambda"], rtol=1e-10)


def test_cattaneo_run(workdir):
    assert main(["cattaneo", "--steps", "20", "--out", "two_stream.csv"]) == EXIT_OK
    table = read_table(workdir / "two_stream.csv")
    assert table.metadata["time"] == pytest.approx(1.0)
    assert list(table.columns) == ["x", "n_plus", "n_minus"]


def test_verify_writes_report(workdir, monkeypatch):
    monkeypatch.setattr(src.suite_manager, "SUITE_NAMES", ["boost"])
    assert main(["verify", "--v", "0.25", "0.5", "--out", "report.json"]) == EXIT_OK
    payload = json.loads((workdir / "report.json").read_text())
    assert payload["passed"] is True
    assert payload["header"]["speeds"] == [0.25, 0.5]


def test_verify_defaults_to_three_speeds(workdir, monkeypatch):
    monkeypatch.setattr(src.suite_manager, "SUITE_NAMES", ["boost"])
    assert main(["verify"]) == EXIT_OK
    payload = json.loads((workdir / "output" / "verify.json").read_text())
    assert payload["header"]["speeds"] == [0.25, 0.5, 0.75]


def test_full_default_verify(workdir):
    assert main(["verify"]) == EXIT_OK
    payload = json.loads((workdir / "output" / "verify.json").read_text())
    assert payload["passed"] is True
    assert set(payload["header"]["suites"]) == set(src.suite_manager.SUITE_NAMES)
    assert {r["suite"] for r in payload["results"]} == set(src.suite_manager.SUITE_NAMES)


def test_verify_near_light_speed(workdir):
    assert main(["verify", "--v", "0.999", "--out", "luminal.json"]) == EXIT_OK
    payload = json.loads((workdir / "luminal.json").read_text())
    assert payload["header"]["tolerance_scales"] == {"0.999": 100.0}
    checks = {(r["suite"], r["check"]) for r in payload["results"]}
    assert ("kernel", "oracle-agreement") in checks
    assert ("oracle", "contour-vs-band") in checks


def test_verify_fails_with_poisoned_branch(workdir, monkeypatch):
    monkeypatch.setattr(src.suite_manager, "SUITE_NAMES", ["oracle"])
    assert main(["verify", "--v", "0.5", "--poison-branch"]) == EXIT_VERIFICATION_FAILED
    payload = json.loads((workdir / "output" / "verify.json").read_text())
    failed = [r["check"] for r in payload["results"] if not r["passed"]]
    assert "realness" in failed


def test_verify_rejects_small_tolerance_scale(workdir):
    assert main(["verify", "--v", "0.5", "--tol", "1e-6"]) == EXIT_USAGE


def test_config_file_with_override(workdir):
    runs = workdir / "runs"
    runs.mkdir()
    (runs / "disp.json").write_text(json.dumps({"command": "dispersion", "v": 0.25, "n": 5, "out": "from_file.csv"}))
    assert main(["dispersion", "--config", "runs/disp.json", "--v", "0.5"]) == EXIT_OK
    assert read_table(workdir / "from_file.csv").metadata["v"] == 0.5


def test_config_file_errors(workdir):
    (workdir / "broken.json").write_text("{")
    assert main(["dispersion", "--config", "broken.json"]) == EXIT_USAGE


def test_help_exits_cleanly(workdir):
    assert BoostDiffCLI().run(["--help"]) == EXIT_OK
