import csv
import io
import json
import math
from importlib import resources

import jsonschema
import pytest

from casimir1d import cli

SCHEMA = json.loads(resources.files("casimir1d").joinpath("result_schema.json").read_text())


def run(argv, capsys, env=None):
    code = cli.run(argv, env=env or {})
    out, err = capsys.readouterr()
    return code, out, err


def record(argv, capsys, env=None):
    code, out, err = run(argv, capsys, env)
    assert code == 0, err
    rec = json.loads(out)
    jsonschema.validate(rec, SCHEMA)
    return rec


LINE = ["line", "--g", "1", "--omega", "1", "--gamma", "0.1", "--b", "1", "--temp", "1"]


def test_line_record(capsys):
    rec = record(LINE, capsys)
    res = rec["result"]
    for k in ("F", "F0", "dTF", "E", "S"):
        assert math.isfinite(res[k])
    assert res["F"] == pytest.approx(res["F0"] + res["dTF"])
    assert len(rec["diagnostics"]["xi_star"]) >= 1
    assert rec["config"]["command"] == "line"


def test_output_is_deterministic(capsys):
    a = record(LINE, capsys)
    b = record(LINE, capsys)
    a["diagnostics"].pop("timing_ms")
    b["diagnostics"].pop("timing_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_compare_line(capsys):
    rec = record(["compare", "--g", "1", "--omega", "1", "--gamma", "0.3", "--b", "1", "--temp", "1"], capsys)
    assert rec["result"]["rel_diff"] < 1e-6


@pytest.mark.parametrize(
    "argv",
    [
        ["single", "--omega", "1", "--gamma", "0.2"],
        ["matsubara", "--b", "1.5"],
        ["matsubara", "--system", "box", "--L", "2", "--g", "0.5", "--gamma", "0.3"],
        ["spectrum", "--L", "4", "--gamma", "0"],
        ["simulate", "--gamma", "0.2", "--modes", "400", "--t-end", "40"],
    ],
    ids=["single", "matsubara_line", "matsubara_box", "spectrum", "simulate"],
)
def test_commands_validate(argv, capsys):
    rec = record(argv, capsys)
    assert rec["version"] == cli.__version__


def test_degenerate_point_exit_3(capsys):
    code, out, err = run(["line", "--g", "1", "--omega", "1", "--b", "2", "--temp", "1"], capsys)
    assert code == 3 and out == ""
    assert "2 Omega^2/g" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["box", "--b", "2", "--L", "1"],
        ["line", "--gamma", "-1"],
        ["line", "--unknown", "3"],
        ["box", "--gamma", "0.1"],
        ["sweep", "--axis", "colour", "--start", "0", "--stop", "1"],
    ],
)
def test_parameter_errors_exit_2(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_box_outside_validity_exit_3(capsys):
    code, _, err = run(["matsubara", "--system", "box", "--L", "6", "--g", "0.5"], capsys)
    assert code == 3 and "L_*" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this study\nomega = 0.5\ngamma = 0.3\nb = 1.5\n")
    rec = record(["line", "--config", str(cfg), "--gamma", "0.2"], capsys)
    assert rec["config"]["omega"] == 0.5
    assert rec["config"]["gamma"] == 0.2
    rec = record(["line"], capsys, env={"CASIMIR1D_CONFIG": str(cfg)})
    assert rec["config"]["b"] == 1.5 and rec["config"]["gamma"] == 0.3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(["line", "--config", str(bad)], capsys)[0] == 2


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(LINE + ["--out", str(path)], capsys)
    assert code == 0 and out == ""
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)


def test_sweep_columns_and_dirichlet_limit(capsys):
    code, out, _ = run(
        ["sweep", "--axis", "b", "--start", "0.5", "--stop", "5", "--count", "4", "--g", "1e6", "--temp", "0", "--gamma", "0"],
        capsys,
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["b", "F", "F0", "dTF", "E", "S", "err_estimate", "xi_star", "runtime_ms"]
    Fb = [float(r[0]) * float(r[1]) for r in rows[1:]]
    # the strong-coupling plateau is the Dirichlet interval energy
    for v in Fb:
        assert v == pytest.approx(-math.pi / 24, rel=1e-2)


def test_sweep_failures_become_nan(capsys):
    # b = 2 is the degenerate point for Omega = g = 1
    code, out, err = run(["sweep", "--axis", "b", "--start", "1", "--stop", "3", "--count", "3"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert math.isnan(float(rows[2][1]))
    assert "warning" in err
    assert code == 3  # one of three points failed, above the 10 % allowance
    code, _, _ = run(["sweep", "--axis", "b", "--start", "1", "--stop", "3", "--count", "21"], capsys)
    assert code == 0


def test_sweep_low_temperature_coefficient(capsys):
    from casimir1d.asymptotics import lowT_line
    from casimir1d.params import Geometry, OscillatorParams

    code, out, _ = run(
        ["sweep", "--axis", "temp", "--start", "1e-3", "--stop", "1e-2", "--count", "3", "--spacing", "log",
         "--method", "realfreq", "--gamma", "0.1"],
        capsys,
    )
    assert code == 0
    c = lowT_line(OscillatorParams(1.0, 0.1, 1.0), Geometry(1.0)).c_F
    for r in list(csv.reader(io.StringIO(out)))[1:]:
        T, dTF = float(r[0]), float(r[3])
        assert -dTF / T**2 == pytest.approx(c, rel=1e-2)


def test_sweep_gamma_reaches_plasma_value(capsys):
    code, out, _ = run(["sweep", "--axis", "gamma", "--start", "1e-4", "--stop", "1", "--count", "5", "--spacing", "log"], capsys)
    assert code == 0
    F = [float(r[1]) for r in list(csv.reader(io.StringIO(out)))[1:]]
    code, out0, _ = run(["matsubara", "--gamma", "0"], capsys)
    F0 = json.loads(out0)["result"]["F"]
    assert abs(F[0] - F0) < 1e-3 * abs(F0)
    assert all(abs(a - b) < 0.5 for a, b in zip(F[:-1], F[1:]))


def test_sweep_cells_are_plain_numbers(capsys):
    code, out, _ = run(["sweep", "--axis", "temp", "--start", "0.5", "--stop", "1", "--count", "2"], capsys)
    assert code == 0
    for r in list(csv.reader(io.StringIO(out)))[1:]:
        for cell in r[:7] + r[8:]:
            float(cell)
