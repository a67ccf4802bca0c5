import json

import numpy as np
import pytest

from phasetrace.cli import (
    CliError, ExperimentConfig, build_amplitude, load_config, main,
    run_predict, run_spectrum, run_sweep, run_verify,
)

BASE = {
    "domain": {"kind": "disc"},
    "window": {"kind": "gaussian"},
    "symbol": {"kind": "constant", "value": 1.0},
    "mode": {"kind": "counting", "delta": 0.5},
    "r_list": [2.0, 3.0, 4.0, 5.0],
    "seed": 0,
}


def _cfg(tmp_path, **over):
    raw = {**BASE, **over}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


# ------------------------------------------------------------- validation

def test_missing_field_names_the_field():
    with pytest.raises(CliError, match="domain"):
        ExperimentConfig({"window": {"kind": "gaussian"},
                          "mode": {"kind": "counting", "delta": 0.5},
                          "r_list": [1.0]})


def test_trace_mode_rejects_nonvanishing_constant_term(tmp_path):
    path = _cfg(tmp_path, mode={"kind": "trace", "coeffs": [0.1, 1.0]})
    with pytest.raises(CliError, match="vanish at 0"):
        load_config(path)


def test_r_list_must_increase(tmp_path):
    path = _cfg(tmp_path, r_list=[4.0, 3.0])
    with pytest.raises(CliError, match="strictly increasing"):
        load_config(path)


def test_delta_range_checked(tmp_path):
    path = _cfg(tmp_path, mode={"kind": "counting", "delta": 1.5})
    with pytest.raises(CliError, match="delta"):
        load_config(path)


def test_unknown_domain_kind():
    with pytest.raises(CliError, match="unknown kind"):
        ExperimentConfig({**BASE, "domain": {"kind": "square"}})


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"domain": }')
    with pytest.raises(CliError, match="line"):
        load_config(str(path))


def test_amplitude_expressions_compose():
    spec = {"kind": "sum", "terms": [
        {"kind": "constant", "value": 2.0},
        {"kind": "product", "terms": [
            {"kind": "constant", "value": 3.0},
            {"kind": "gaussian_bump", "amplitude": 1.0, "width": 1.0},
        ]},
    ]}
    fn = build_amplitude(spec)
    assert fn(0.0, 0.0) == pytest.approx(5.0)
    assert fn(100.0, 0.0) == pytest.approx(2.0)


# ------------------------------------------------------------ subcommands

def test_predict_outputs_and_determinism(tmp_path):
    path = _cfg(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    run_predict(load_config(path), str(out1))
    run_predict(load_config(path), str(out2))
    assert (out1 / "predict.csv").read_bytes() == (out2 / "predict.csv").read_bytes()
    assert (out1 / "predict.json").read_bytes() == (out2 / "predict.json").read_bytes()
    rep = json.loads((out1 / "predict.json").read_text())
    assert rep["A0"] == pytest.approx(0.5, abs=1e-4)
    assert rep["A1"] == pytest.approx(0.0, abs=1e-9)


def test_csv_floats_are_full_precision(tmp_path):
    path = _cfg(tmp_path)
    out = tmp_path / "o"
    rep = run_predict(load_config(path), str(out))
    lines = (out / "predict.csv").read_text().strip().splitlines()
    assert lines[0] == "r,prediction,a1_tail_bound"
    read_back = float(lines[1].split(",")[1])
    assert read_back == rep["predictions"]["2"]     # %.17g round-trips


def test_sweep_rows_and_fit(tmp_path):
    path = _cfg(tmp_path)
    out = tmp_path / "o"
    rep = run_sweep(load_config(path), str(out))
    assert len(rep["rows"]) == 4 and not rep["failures"]
    for row in rep["rows"]:
        assert row["identity_defect"] < 1e-10
        assert row["basis_tail_bound"] < 1e-10
        assert row["residual_over_r"] == pytest.approx(
            row["residual"] / row["r"])
    assert rep["fit"]["fitted_c2"] == pytest.approx(0.5, abs=0.05)
    header = (out / "sweep.csv").read_text().splitlines()[0]
    assert header == ("r,measured,predicted,residual,residual_over_r,"
                      "identity_defect,basis_tail_bound,edge_mass")


def test_sweep_records_failures(tmp_path):
    # pad below the weight's decay radius: every symbol grid is too small
    path = _cfg(tmp_path, grid={"pad": 5.0})
    rep = run_sweep(load_config(path), str(tmp_path / "o"))
    assert rep["rows"] == []
    assert len(rep["failures"]) == 4
    assert all("GridTooSmall" in f["error"] for f in rep["failures"])
    assert rep["fit"] is None and "fit_refused" in rep


def test_sweep_fit_refused_below_four_points(tmp_path):
    path = _cfg(tmp_path, r_list=[2.0, 3.0, 4.0])
    rep = run_sweep(load_config(path), str(tmp_path / "o"))
    assert rep["fit"] is None
    assert "3 successful" in rep["fit_refused"]


def test_spectrum_single_r_only(tmp_path):
    path = _cfg(tmp_path)
    with pytest.raises(CliError, match="exactly one r"):
        run_spectrum(load_config(path), str(tmp_path / "o"))


def test_spectrum_output(tmp_path):
    path = _cfg(tmp_path, r_list=[2.0])
    out = tmp_path / "o"
    meta = run_spectrum(load_config(path), str(out))
    lines = (out / "spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "index,eigenvalue,identity_defect,basis_tail_bound"
    assert len(lines) - 1 == meta["count"] == meta["K"]
    first = float(lines[1].split(",")[1])
    assert first == meta["max_eigenvalue"]
    assert 0.0 < first <= 1.0 + 1e-8


def test_verify_suite_runs_and_reports(tmp_path):
    ok, checks = run_verify("geometry", str(tmp_path))
    assert ok and all(c["passed"] for c in checks)
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["passed"] is True
    assert {c["suite"] for c in rep["checks"]} == {"geometry"}
    assert all({"name", "measured", "bound", "passed"} <= set(c)
               for c in rep["checks"])


def test_verify_unknown_suite():
    with pytest.raises(CliError, match="unknown suite"):
        run_verify("nonsense")


# -------------------------------------------------------------- exit codes

def test_main_exit_zero_on_predict(tmp_path, capsys):
    path = _cfg(tmp_path)
    assert main(["predict", "--config", path,
                 "--out", str(tmp_path / "o")]) == 0


def test_main_exit_one_on_validation_error(tmp_path, capsys):
    path = _cfg(tmp_path, r_list=[4.0, 4.0])
    assert main(["predict", "--config", path,
                 "--out", str(tmp_path / "o")]) == 1


def test_main_exit_one_on_missing_config(tmp_path, capsys):
    assert main(["predict", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "o")]) == 1


def test_main_exit_one_on_bad_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_main_exit_two_when_every_r_fails(tmp_path, capsys):
    path = _cfg(tmp_path, grid={"pad": 5.0})
    assert main(["sweep", "--config", path,
                 "--out", str(tmp_path / "o")]) == 2
