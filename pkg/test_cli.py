#!/usr/bin/env python3
"""
Tests for the weakbell command line: exit codes, report formats and reproducibility
"""

import csv
import io
import json
import sys
from pathlib import Path

import pytest

# Add the weakbell package to the path
sys.path.insert(0, str(Path(__file__).parent))

from weakbell import __version__
from weakbell.cli import EXIT_INVALID, EXIT_OK, EXIT_OUTPUT, build_parser, main, to_config
from weakbell.closedform import bs_exact, n_required, var_bs
from weakbell.config import reset_settings
from weakbell.models import CommandName, NoiseKind, RunConfig
from weakbell.tripwires import RunConfigTripwires, parse_angles, parse_grid


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    monkeypatch.delenv("WEAKBELL_WORKERS", raising=False)
    monkeypatch.delenv("WEAKBELL_Z_REJECT", raising=False)
    reset_settings()
    yield
    reset_settings()


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parser_maps_models():
    args = build_parser().parse_args(["lhv", "--model", "additive", "--sigma", "2", "--ensemble", "10"])
    config = to_config(args)
    assert config.command is CommandName.LHV
    assert config.model is NoiseKind.INDEPENDENT
    assert config.seed == 0


def test_unknown_choice_exits_through_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["lhv", "--model", "quantum"])
    assert excinfo.value.code == 2


@pytest.mark.parametrize("argv", [
    ["chsh", "--sigma", "2"],
    ["chsh", "--sigma", "-1", "--ensemble", "100"],
    ["chsh", "--sigma", "nan", "--ensemble", "100"],
    ["chsh", "--sigma", "2", "--ensemble", "0"],
    ["chsh", "--sigma", "2", "--ensemble", "100", "--seed", "-3"],
    ["chsh", "--sigma", "2", "--ensemble", "100", "--certify", "--n-prior", "1"],
    ["chsh", "--ensemble", "100", "--setting", "regular", "--n-prior", "2"],
    ["curve", "--figure", "4"],
    ["curve", "--figure", "3", "--grid", "1.5,2"],
    ["curve", "--figure", "2", "--grid", "1:x:3"],
    ["lhv", "--model", "malicious", "--ensemble", "100"],
    ["lg", "--angles", "0,45", "--sigma", "10", "--ensemble", "100"],
    ["theorem1", "--sigma", "10", "--trials", "0"],
    ["theorem1"],
])
def test_invalid_arguments_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_INVALID
    assert out == ""
    assert "🚨" in err


def test_tripwires_collect_every_error():
    config = RunConfig(command=CommandName.CHSH, sigma=-1.0, ensemble=0, seed=-1)
    results = RunConfigTripwires().validate(config)
    assert not results.is_valid
    codes = [error.field_path[0] for error in results.validation_errors]
    assert codes == ["sigma", "ensemble", "seed"]
    assert "required_fields" in results.validation_passed
    assert results.to_dict()["is_valid"] is False


def test_parse_grid_and_angles():
    assert parse_grid("1:3:3") == [1.0, 2.0, 3.0]
    assert parse_grid("0.5,2") == [0.5, 2.0]
    assert parse_grid("") == []
    assert parse_grid("10:30:3", integer=True) == [10.0, 20.0, 30.0]
    assert parse_angles("0, 90, 180") == pytest.approx([0.0, 1.5707963267948966, 3.141592653589793])


def test_curve_over_sigma_csv(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    code, stdout, _ = run(capsys, "curve", "--figure", "2", "--grid", "1,2", "--format", "csv", "--out", str(out))
    assert code == EXIT_OK
    assert stdout == ""
    lines = out.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "sigma,bs,var_bs,n3"
    assert lines[1].startswith("1.0,") and lines[1].endswith(",")
    assert lines[2].startswith("2.0,")
    assert lines[3] == ""
    assert b"\r\n" not in out.read_bytes()


def test_curve_csv_round_trips_closed_form_values(capsys):
    code, out, _ = run(capsys, "curve", "--figure", "2", "--grid", "0.7,1.5,1.78,2,8", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    for row in rows:
        sigma = float(row["sigma"])
        assert float(row["bs"]) == bs_exact(sigma)
        assert float(row["var_bs"]) == var_bs(sigma)
        expected = n_required(sigma)
        assert row["n3"] == ("" if expected is None else str(expected))
    assert rows[0]["n3"] == ""


def test_curve_empty_grid_writes_header_only(capsys):
    code, out, _ = run(capsys, "curve", "--figure", "2", "--grid", "", "--format", "csv")
    assert code == EXIT_OK
    assert out == "sigma,bs,var_bs,n3\n"


def test_curve_over_n(capsys):
    code, out, _ = run(capsys, "curve", "--figure", "3", "--grid", "10,20", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "n,sigma_min,sigma3,n3,bs_at_sigma3"
    assert [line.split(",")[0] for line in lines[1:]] == ["10", "20"]


def test_curve_text_reports_planner_optimum(capsys):
    code, out, _ = run(capsys, "curve", "--figure", "2", "--grid", "1.78")
    assert code == EXIT_OK
    assert out.startswith("weakbell curve\n")
    assert "✅ smallest ensemble N = " in out
    assert "needs N = 105" in out


def test_chsh_json_meta(capsys):
    code, out, _ = run(capsys, "chsh", "--sigma", "2", "--ensemble", "2000", "--seed", "9", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["meta"]["command"] == "chsh"
    assert payload["meta"]["seed"] == 9
    assert payload["meta"]["version"] == __version__
    assert len(payload["meta"]["config_hash"]) == 64
    assert [row["pair"] for row in payload["rows"]] == ["11", "12", "21", "22"]
    assert all(row["kind"] == "weak" for row in payload["rows"])


def test_config_hash_tracks_parameters_not_output():
    base = RunConfig(command=CommandName.CHSH, sigma=2.0, ensemble=100)
    assert base.config_hash() == RunConfig(command=CommandName.CHSH, sigma=2.0, ensemble=100,
                                           out="x.csv").config_hash()
    assert base.config_hash() != RunConfig(command=CommandName.CHSH, sigma=2.0, ensemble=100,
                                           seed=1).config_hash()


def test_output_is_byte_identical_across_worker_counts(capsys, monkeypatch):
    argv = ["chsh", "--sigma", "1.5", "--ensemble", "10000", "--seed", "4", "--certify", "--format", "csv"]
    monkeypatch.setenv("WEAKBELL_WORKERS", "1")
    reset_settings()
    code_serial, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("WEAKBELL_WORKERS", "4")
    reset_settings()
    code_parallel, parallel, _ = run(capsys, *argv)
    assert code_serial == code_parallel == EXIT_OK
    assert serial == parallel
    assert serial.count("\n") == 9


def test_chsh_regular_setting(capsys):
    code, out, _ = run(capsys, "chsh", "--setting", "regular", "--ensemble", "20000", "--seed", "1")
    assert code == EXIT_OK
    assert "regular CHSH, strong" in out
    assert "planned N for 3 standard errors: 105" in out


def test_lhv_malicious_certificate_alert(capsys):
    code, out, _ = run(capsys, "lhv", "--model", "malicious", "--c", "1", "--ensemble", "20000", "--certify")
    assert code == EXIT_OK
    assert "🚨 interference detected" in out
    assert "✅ violation of CHSH" in out


def test_lhv_additive(capsys):
    code, out, _ = run(capsys, "lhv", "--model", "additive", "--sigma", "1", "--ensemble", "5000",
                       "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out)["rows"]
    assert len(rows) == 4
    assert all(abs(row["exact"]) <= 1 for row in rows)


def test_lg_report(capsys):
    code, out, _ = run(capsys, "lg", "--angles", "0,45,90,135", "--sigma", "10", "--ensemble", "2000",
                       "--format", "csv")
    assert code == EXIT_OK
    quantities = [line.split(",")[0] for line in out.strip().split("\n")[1:]]
    assert quantities == ["C12", "C23", "C34", "C14", "K3", "K4"]


def test_theorem1_report(capsys):
    code, out, _ = run(capsys, "theorem1", "--sigma", "10", "--trials", "2", "--ensemble", "20000")
    assert code == EXIT_OK
    assert "2/2 trials within" in out


def test_unwritable_output_exits_4(tmp_path, capsys):
    target = tmp_path / "missing" / "table.csv"
    code, out, err = run(capsys, "curve", "--figure", "2", "--grid", "2", "--out", str(target))
    assert code == EXIT_OUTPUT
    assert "cannot write report" in err
    assert not target.exists()
