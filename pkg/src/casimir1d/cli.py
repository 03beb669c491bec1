"""Command-line front end.

Every command prints one JSON object ``{config, result, diagnostics, version}``
except ``sweep``, which writes CSV.  Flags override values from a flat
``key = value`` config file (``--config`` or $CASIMIR1D_CONFIG), which
override the defaults.  Exit codes: 0 success, 2 bad parameters, 3 numerical
failure (tolerance not met, degenerate point, outside a validity range).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__
from .errors import BranchError, DegeneracyError, DomainError, ResonanceError, ToleranceError
from .params import Geometry, OscillatorParams, ThermalParams

COMMANDS = ("single", "box", "line", "matsubara", "spectrum", "compare", "sweep", "simulate")

DEFAULTS = {
    "mass": 1.0,
    "omega": 1.0,
    "gamma": 0.1,
    "g": 1.0,
    "e2": None,
    "b": 1.0,
    "L": None,
    "temp": 1.0,
    "hbar": 1.0,
    "tol": 1e-10,
    "l_max": None,
    "omega_max": None,
    "seed": 0,
    "system": "line",
    "method": None,
    "reference": False,
    "bound_term": "general",
    "axis": None,
    "start": None,
    "stop": None,
    "count": 11,
    "spacing": "linear",
    "format": None,
    "out": None,
    "jobs": 1,
    "modes": 1024,
    "t_end": 100.0,
    "dt": None,
    "samples": 1001,
    "order": 4,
    "members": 64,
    "sim": "decay",
    "csv": None,
}

_NUMERIC_FAILURES = (ToleranceError, DegeneracyError, DomainError, ResonanceError, BranchError)
_SWEEPABLE = ("mass", "omega", "gamma", "g", "b", "L", "temp", "hbar")
SWEEP_COLUMNS = ("value", "F", "F0", "dTF", "E", "S", "err_estimate", "xi_star", "runtime_ms")


class ParameterError(ValueError):
    pass


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {s!r}")


_TYPES = {
    "seed": int, "count": int, "jobs": int, "modes": int, "samples": int, "order": int,
    "members": int, "l_max": int, "reference": _bool,
    "system": str, "method": str, "bound_term": str, "axis": str, "spacing": str,
    "format": str, "out": str, "sim": str, "csv": str,
}


def _convert(key, value):
    if value is None:
        return None
    try:
        return _TYPES.get(key, float)(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad value for {key}: {value!r}") from exc


def read_config(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment, keys may use '-' or '_'."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in DEFAULTS:
                raise ParameterError(f"{path}:{n}: unknown key {k!r}")
            out[k] = _convert(k, v)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="casimir1d", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    for k in ("mass", "omega", "gamma", "g", "b", "L", "hbar", "tol"):
        g.add_argument(f"--{k}", type=float, default=None)
    g.add_argument("--temp", "--T", dest="temp", type=float, default=None)
    g.add_argument("--l-max", dest="l_max", type=int, default=None)
    g.add_argument("--omega-max", dest="omega_max", type=float, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--config", default=None, help="key = value file (default $CASIMIR1D_CONFIG)")
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    helps = {
        "single": "one damped oscillator, real-frequency quadrature",
        "box": "two oscillators in a Dirichlet box, real-frequency quadrature",
        "line": "two oscillators on the line, real-frequency quadrature",
        "matsubara": "line or box free energy from the Matsubara sum",
        "spectrum": "undamped box eigenfrequencies and mode-sum energy",
        "compare": "real-frequency against Matsubara free energy",
        "sweep": "CSV of energies along one parameter axis",
        "simulate": "classical heat-bath simulation",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name in ("box", "compare", "sweep"):
            p.add_argument("--reference", type=_bool, default=None)
        if name in ("matsubara", "compare", "sweep"):
            p.add_argument("--system", choices=("line", "box", "single"), default=None)
            p.add_argument("--bound-term", dest="bound_term", default=None)
        if name == "sweep":
            p.add_argument("--axis", default=None)
            p.add_argument("--start", type=float, default=None)
            p.add_argument("--stop", type=float, default=None)
            p.add_argument("--count", type=int, default=None)
            p.add_argument("--spacing", choices=("linear", "log"), default=None)
            p.add_argument("--method", choices=("realfreq", "matsubara"), default=None)
            p.add_argument("--jobs", type=int, default=None)
        if name == "simulate":
            p.add_argument("--e2", type=float, default=None)
            p.add_argument("--modes", type=int, default=None)
            p.add_argument("--t-end", dest="t_end", type=float, default=None)
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--samples", type=int, default=None)
            p.add_argument("--order", type=int, choices=(2, 4), default=None)
            p.add_argument("--members", type=int, default=None)
            p.add_argument("--sim", choices=("decay", "equilibrium"), default=None)
            p.add_argument("--csv", default=None, help="trajectory CSV path (decay runs)")
    return ap


def resolve(args: argparse.Namespace, env=None) -> dict:
    """Merge flags > config file > defaults."""
    env = os.environ if env is None else env
    cfg = dict(DEFAULTS)
    path = args.config or env.get("CASIMIR1D_CONFIG")
    if path:
        cfg.update(read_config(path))
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    return cfg


def _params(cfg) -> OscillatorParams:
    g = cfg["g"]
    if cfg.get("e2") is not None:
        g = cfg["e2"] / cfg["mass"]
    return OscillatorParams(omega=cfg["omega"], gamma=cfg["gamma"], g=g, mass=cfg["mass"])


def _geom(cfg, box=None) -> Geometry:
    L = cfg["L"] if box is not False else None
    if box and L is None:
        raise ParameterError("box commands need --L")
    return Geometry(b=cfg["b"], L=L)


def _thermal(cfg) -> ThermalParams:
    return ThermalParams(T=cfg["temp"], hbar=cfg["hbar"])


def _jsonable(x):
    if is_dataclass(x) and not isinstance(x, type):
        return _jsonable(asdict(x))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _report_result(rep):
    d = rep.to_dict()
    diag = d.pop("diagnostics")
    # wall-clock numbers live only in the top-level timing field
    diag.pop("runtime_ms", None)
    for k in ("n_eval", "n_subdiv", "tail_bound"):
        diag[k] = d.pop(k)
    diag.setdefault("xi_star", [])
    return d, diag


def _realfreq(system, cfg, reference=None):
    from .phases import PhaseFunction
    from .thermo import free_energy_real_freq

    p = _params(cfg)
    geom = None if system == "single" else _geom(cfg, box=(system == "box"))
    ref = cfg["reference"] if reference is None else reference
    ph = PhaseFunction(system, p, geom, reference=bool(ref) and system == "box")
    rep = free_energy_real_freq(ph, _thermal(cfg), epsrel=cfg["tol"], omega_cut=cfg["omega_max"])
    res, diag = _report_result(rep)
    if system == "line":
        from .matsubara import find_bound_states

        diag["xi_star"] = list(find_bound_states(p, geom).roots)
    return res, diag


def _matsubara(system, cfg):
    from .matsubara import critical_box_size, free_energy_matsubara_box, free_energy_matsubara_line

    p = _params(cfg)
    if system == "box":
        geom = _geom(cfg, box=True)
        rep = free_energy_matsubara_box(p, geom, _thermal(cfg))
        res, diag = _report_result(rep)
        diag["L_star"] = critical_box_size(p, geom).L_star if p.g > 0 else None
        return res, diag
    if system != "line":
        raise ParameterError("Matsubara sums are implemented for line and box")
    rep = free_energy_matsubara_line(p, _geom(cfg, box=False), _thermal(cfg), bound_term=cfg["bound_term"])
    return _report_result(rep)


def _check_line_point(cfg):
    from .matsubara import line_zero_parameter_checked

    p = _params(cfg)
    if p.g > 0:
        line_zero_parameter_checked(p, _geom(cfg, box=False))


def cmd_single(cfg):
    return _realfreq("single", cfg)


def cmd_box(cfg):
    return _realfreq("box", cfg)


def cmd_line(cfg):
    _check_line_point(cfg)
    return _realfreq("line", cfg)


def cmd_matsubara(cfg):
    return _matsubara(cfg["system"], cfg)


def cmd_compare(cfg):
    system = "box" if cfg["L"] is not None and cfg["system"] == "line" else cfg["system"]
    if system == "line":
        _check_line_point(cfg)
    rf, drf = _realfreq(system, cfg, reference=True if system == "box" else None)
    ms, dms = _matsubara(system, cfg)
    rel = abs(rf["F"] - ms["F"]) / max(abs(ms["F"]), 1e-300)
    res = {
        "system": system,
        "F_realfreq": rf["F"],
        "F_matsubara": ms["F"],
        "rel_diff": rel,
        "E_realfreq": rf["E"],
        "E_matsubara": ms["E"],
        "S_realfreq": rf["S"],
        "S_matsubara": ms["S"],
    }
    return res, {"realfreq": drf, "matsubara": dms, "xi_star": dms.get("xi_star", [])}


def cmd_spectrum(cfg):
    from .spectra import find_modes, mode_sum_energy

    p = _params(cfg)
    geom = _geom(cfg, box=True)
    th = _thermal(cfg)
    w_max = cfg["omega_max"]
    if w_max is None:
        w_max = max(40 * th.T / th.hbar, 20 * np.pi / geom.L, 4 * p.omega)
    spec = find_modes(p, geom, w_max)
    E, d = mode_sum_energy(spec, th)
    res = {
        "omegas": spec.omegas,
        "sectors": spec.sectors,
        "count": spec.count,
        "dTE_mode_sum": E,
    }
    diag = dict(d, w_max=w_max, max_residual=float(spec.residuals.max()) if spec.count else 0.0, xi_star=[])
    return res, diag


def cmd_simulate(cfg):
    from .bathsim import BathDiscretization, equilibrium_ensemble, fit_free_decay, relaxed_state, simulate

    p = _params(cfg)
    if cfg["sim"] == "equilibrium":
        r = equilibrium_ensemble(
            p, cfg["temp"], members=cfg["members"], n_modes=cfg["modes"], t_end=cfg["t_end"],
            seed=cfg["seed"], order=cfg["order"], jobs=cfg["jobs"],
        )
        return {"H_osc_mean": r.mean, "H_osc_stderr": r.stderr, "kinetic_mean": float(np.mean(r.kinetic)),
                "T": r.T}, {"members": r.H_osc.size, **r.meta, "xi_star": []}
    bath = BathDiscretization.build(p, cfg["modes"], cfg["t_end"])
    tr = simulate(bath, p, relaxed_state(bath), cfg["t_end"], dt=cfg["dt"], n_samples=cfg["samples"], order=cfg["order"])
    if cfg["csv"]:
        tr.to_csv(cfg["csv"])
    rate, freq = fit_free_decay(tr, p)
    res = {"decay_rate": rate, "frequency": freq, "energy_drift": tr.energy_drift()}
    diag = dict(tr.meta, expected_rate=0.5 * p.gamma, xi_star=[])
    if p.omega > 0.5 * p.gamma:
        diag["expected_frequency"] = math.sqrt(p.omega**2 - 0.25 * p.gamma**2)
    return res, diag


def _axis_values(cfg):
    if cfg["axis"] not in _SWEEPABLE:
        raise ParameterError(f"sweep axis must be one of {_SWEEPABLE}")
    if cfg["start"] is None or cfg["stop"] is None:
        raise ParameterError("sweep needs --start and --stop")
    n = cfg["count"]
    if n < 1:
        raise ParameterError("sweep needs --count >= 1")
    if cfg["spacing"] == "log":
        if cfg["start"] <= 0 or cfg["stop"] <= 0:
            raise ParameterError("log spacing needs positive end points")
        return np.geomspace(cfg["start"], cfg["stop"], n)
    return np.linspace(cfg["start"], cfg["stop"], n)


def _sweep_point(cfg, value):
    c = dict(cfg)
    c[cfg["axis"]] = float(value)
    t0 = time.perf_counter()
    try:
        system = c["system"]
        method = c["method"] or ("realfreq" if system == "single" else "matsubara")
        if method == "matsubara":
            res, diag = _matsubara(system, c)
        else:
            if system == "line":
                _check_line_point(c)
            res, diag = _realfreq(system, c)
        row = [float(value)] + [float(res[k]) for k in ("F", "F0", "dTF", "E", "S", "err_estimate")]
        row.append(";".join(repr(float(x)) for x in diag.get("xi_star", [])))
        err = None
    except (*_NUMERIC_FAILURES, ValueError) as exc:
        row = [float(value)] + [math.nan] * 6 + [""]
        err = f"{cfg['axis']}={value}: {type(exc).__name__}: {exc}"
    row.append(1e3 * (time.perf_counter() - t0))
    return row, err


def cmd_sweep(cfg, stream):
    values = _axis_values(cfg)
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(cfg["jobs"]) as ex:
            rows = list(ex.map(_sweep_point, [cfg] * len(values), values))
    else:
        rows = [_sweep_point(cfg, v) for v in values]
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([cfg["axis"], *SWEEP_COLUMNS[1:]])
    failed = 0
    for row, err in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
        if err:
            failed += 1
            print(f"warning: {err}", file=sys.stderr)
    return failed, len(rows)


_DISPATCH = {
    "single": cmd_single,
    "box": cmd_box,
    "line": cmd_line,
    "matsubara": cmd_matsubara,
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
}


def _config_echo(cfg):
    return {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None}


def _emit(text, cfg):
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None, env=None) -> int:
    """Parse ``argv``, run the command and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = resolve(args, env)
        if cfg["command"] == "sweep":
            buf = io.StringIO()
            failed, total = cmd_sweep(cfg, buf)
            _emit(buf.getvalue(), cfg)
            return 0 if failed <= 0.1 * total else 3
        t0 = time.perf_counter()
        res, diag = _DISPATCH[cfg["command"]](cfg)
        diag = dict(diag, timing_ms=1e3 * (time.perf_counter() - t0))
        record = {"config": _config_echo(cfg), "result": res, "diagnostics": diag, "version": __version__}
        _emit(json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n", cfg)
        return 0
    except _NUMERIC_FAILURES as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, ValueError, OSError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
