"""Command-line front end.

Parameters come from built-in defaults, then an optional JSON config file
(``--config``), then command-line flags; later sources win.  Results are
written to ``--output-dir`` (default: ``$FWNVOLTERRA_OUTPUT_DIR`` or the current
directory) together with ``manifest.json``.  Exit status is 0 on success, 1 on
invalid input and 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .acceptance import CRITERIA, canonical_json, run_suite
from .errors import EmbeddingError, NumericalFailure
from .kernels import KernelSpec, rho
from .resolvent import fundamental_solution, resolvent_cq, solve_scalar_resolvent
from .spectral import (FractionalDynamics, KernelDynamics, SpectralModel, sigma_conditions,
                       simulate_solution, structure_function_space, structure_function_time,
                       regularity_conditions, theorem42_example_conditions, variance_spectral)

OUTPUT_ENV = "FWNVOLTERRA_OUTPUT_DIR"

DEFAULTS = {
    "kernel": "tempered", "alpha": 0.5, "eta": 1.0, "amplitude": 1.0, "mu": 1.0,
    "beta": 1.0, "H": 0.75, "theta": 0.0, "model": "example", "m": 1, "l": 2.0, "N": 50,
    "step": 0.01, "horizon": 2.0, "t": None, "replicates": 200, "seed": 42, "workers": 1,
    "method": "product", "dynamics": "kernel", "suite": "all", "output_dir": None,
}

# nested config sections -> flat parameter names
_SECTIONS = {
    "model": {"family": "model", "m": "m", "l": "l", "N": "N"},
    "grid": {"step": "step", "horizon": "horizon"},
    "mc": {"replicates": "replicates", "seed": "seed", "workers": "workers"},
    "outputs": {"directory": "output_dir"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _flatten_config(cfg: dict) -> dict:
    flat = {}
    for key, value in cfg.items():
        if key in _SECTIONS and isinstance(value, dict):
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"{key}.{sub}", "unknown field")
                flat[_SECTIONS[key][sub]] = v
        elif key == "dynamics" and isinstance(value, dict):
            if "kernel" in value:
                flat["dynamics"] = "kernel"
                k = value["kernel"]
                flat["kernel"] = k["family"]
                for f in ("alpha", "eta", "amplitude"):
                    if f in k:
                        flat[f] = k[f]
            else:
                flat["dynamics"] = "fractional"
                flat["alpha"] = value.get("alpha", DEFAULTS["alpha"])
                flat["beta"] = value.get("beta", DEFAULTS["beta"])
        elif key in DEFAULTS:
            flat[key] = value
        else:
            raise ConfigError(key, "unknown field")
    return flat


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError("config", str(exc)) from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return _flatten_config(cfg)


def resolve_params(args: argparse.Namespace) -> dict:
    params = dict(DEFAULTS)
    params.update(load_config(args.config))
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            params[key] = value
    if params["output_dir"] is None:
        params["output_dir"] = os.environ.get(OUTPUT_ENV, ".")
    validate(params)
    return params


def validate(p: dict) -> None:
    def need(cond, field, msg):
        if not cond:
            raise ConfigError(field, msg)

    for f in ("alpha", "eta", "mu", "beta", "H", "theta", "l", "step", "horizon", "amplitude"):
        try:
            p[f] = float(p[f])
        except (TypeError, ValueError):
            raise ConfigError(f, f"expected a number, got {p[f]!r}") from None
        need(math.isfinite(p[f]), f, "must be finite")
    for f in ("m", "N", "replicates", "seed", "workers"):
        v = p[f]
        need(isinstance(v, (int, np.integer)) or (isinstance(v, float) and v.is_integer()),
             f, f"expected an integer, got {v!r}")
        p[f] = int(v)
    need(0 < p["H"] < 1, "H", "must lie in (0, 1)")
    need(0 < p["alpha"] <= 2, "alpha", "must lie in (0, 2]")
    need(p["step"] > 0, "step", "must be positive")
    need(p["horizon"] > 0, "horizon", "must be positive")
    need(p["l"] > 1, "l", "must exceed 1")
    need(p["m"] >= 1, "m", "must be at least 1")
    need(p["N"] >= 1, "N", "must be at least 1")
    need(p["replicates"] >= 2, "replicates", "must be at least 2")
    need(p["workers"] >= 1, "workers", "must be at least 1")
    need(p["seed"] >= 0, "seed", "must be nonnegative")
    need(p["mu"] >= 0, "mu", "must be nonnegative")
    need(p["eta"] >= 0, "eta", "must be nonnegative")
    need(p["beta"] > 0, "beta", "must be positive")
    need(0 <= p["theta"] <= 1, "theta", "must lie in [0, 1]")
    need(p["model"] in ("example",), "model", "only the 'example' family is available from the CLI")
    need(p["dynamics"] in ("kernel", "fractional"), "dynamics", "must be 'kernel' or 'fractional'")
    need(p["method"] in ("product", "cq"), "method", "must be 'product' or 'cq'")


def _kernel(p: dict) -> KernelSpec:
    try:
        return KernelSpec(p["kernel"], p["alpha"], p["eta"], p["amplitude"])
    except ValueError as exc:
        raise ConfigError("kernel", str(exc)) from None


def _model(p: dict) -> SpectralModel:
    return SpectralModel.example(p["m"], p["l"], p["N"])


def _dynamics(p: dict):
    if p["dynamics"] == "kernel":
        return KernelDynamics(_kernel(p))
    if not p["alpha"] < 2:
        raise ConfigError("alpha", "fractional dynamics need alpha < 2")
    return FractionalDynamics(p["alpha"], p["beta"])


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(obj))


def _write_manifest(out: Path, command: str, params: dict, files: list[str]) -> None:
    manifest = {
        "command": command,
        "config": {k: v for k, v in params.items() if k != "output_dir"},
        "seed": params["seed"],
        "outputs": sorted(files),
        "versions": {"fwnvolterra": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    _write_json(out / "manifest.json", manifest)


def _check_finite(values, what: str) -> None:
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise NumericalFailure(f"non-finite values in {what}")


# ---------------------------------------------------------------------------
# subcommands; each returns (files written, one-line summary)
# ---------------------------------------------------------------------------

def cmd_resolvent(p: dict, out: Path):
    k = _kernel(p)
    if p["method"] == "cq":
        sol = resolvent_cq(k, p["mu"], p["step"], p["horizon"])
    else:
        sol = solve_scalar_resolvent(k, p["mu"], p["step"], p["horizon"])
    _check_finite(sol.values, "resolvent")
    _write_csv(out / "resolvent.csv", ["t", "value"], zip(sol.times, sol.values))
    return ["resolvent.csv"], f"resolvent: {sol.times.size} nodes, s(T) = {_fmt(sol.values[-1])}"


def cmd_fundamental(p: dict, out: Path):
    if not p["alpha"] < 2:
        raise ConfigError("alpha", "use alpha < 2 for the fundamental subcommand")
    fs = fundamental_solution(p["alpha"], p["beta"], p["mu"], p["step"], p["horizon"])
    _check_finite(fs.values, "fundamental solution")
    _write_csv(out / "fundamental.csv", ["t", "value", "volterra"],
               zip(fs.times, fs.values, fs.volterra_values))
    return ["fundamental.csv"], f"fundamental: discrepancy {_fmt(fs.discrepancy)}"


def cmd_rho(p: dict, out: Path):
    rep = rho(_kernel(p))
    _write_json(out / "rho.json", rep.to_dict())
    return ["rho.json"], _fmt(rep.rho)


def _times(p: dict) -> list[float]:
    if p["t"] is None:
        return [p["horizon"]]
    return [float(x) for x in (p["t"] if isinstance(p["t"], list) else [p["t"]])]


def cmd_variance(p: dict, out: Path):
    model, dyn = _model(p), _dynamics(p)
    rows = [variance_spectral(model, dyn, t, p["H"], p["step"]) for t in _times(p)]
    _check_finite([r["variance"] for r in rows], "variance")
    _write_json(out / "variance.json", {"rows": rows})
    return ["variance.json"], "variance: " + " ".join(_fmt(r["variance"]) for r in rows)


def _simulate(p: dict):
    return simulate_solution(_model(p), _dynamics(p), p["H"], p["horizon"], p["step"], p["N"],
                             p["replicates"], p["seed"], workers=p["workers"])


def cmd_simulate(p: dict, out: Path):
    ens = _simulate(p)
    rows = []
    for j, t in enumerate(ens.times):
        e = ens.energy(j)
        rows.append((float(t), float(e.mean()), float(e.std(ddof=1) / math.sqrt(e.size))))
    _check_finite([r[1] for r in rows], "ensemble")
    _write_csv(out / "energy.csv", ["t", "mean", "stderr"], rows)
    _write_json(out / "ensemble.json", ens.metadata())
    return ["energy.csv", "ensemble.json"], f"simulate: E|u(T)|^2 = {_fmt(rows[-1][1])}"


def cmd_holder(p: dict, out: Path):
    ens = _simulate(p)
    st = structure_function_time(ens, deterministic=True)
    pairs = [(x, x + d) for d in np.geomspace(0.03, 0.3, 6) for x in np.linspace(0.5, 2.3, 8)]
    ss = structure_function_space(ens, pairs)
    _write_csv(out / "structure_time.csv", ["lag", "value", "stderr"],
               ((r["lag"], r["value"], r["stderr"]) for r in st["rows"]))
    seps = sorted({r["separation"] for r in ss["rows"]})
    space_rows = []
    for s in seps:
        sel = [r for r in ss["rows"] if r["separation"] == s]
        space_rows.append((s, float(np.mean([r["value"] for r in sel])),
                           float(math.sqrt(sum(r["stderr"] ** 2 for r in sel)) / len(sel))))
    _write_csv(out / "structure_space.csv", ["lag", "value", "stderr"], space_rows)
    report = {"time_slope": st["slope"], "space_slope": ss["slope"]}
    if p["dynamics"] == "kernel":
        report["conditions"] = regularity_conditions(_model(p), _dynamics(p).rho(), p["H"], p["theta"])
    _write_json(out / "holder.json", report)
    return (["structure_time.csv", "structure_space.csv", "holder.json"],
            f"holder: time slope {_fmt(st['slope'])}, space slope {_fmt(ss['slope'])}")


def cmd_conditions(p: dict, out: Path):
    if not p["alpha"] < 2:
        raise ConfigError("alpha", "the conditions subcommand needs alpha < 2")
    res = theorem42_example_conditions(p["l"], p["m"], p["alpha"], p["beta"], p["H"], p["theta"])
    res["sigma"] = sigma_conditions(_model(p), p["alpha"], p["beta"], p["H"], p["theta"])
    _write_json(out / "conditions.json", res)
    flags = {k: res[k] for k in ("existence", "time_holder", "space_holder")}
    return ["conditions.json"], json.dumps(flags, sort_keys=True)


def _suite_ids(spec) -> list[int]:
    if spec in (None, "all"):
        return sorted(CRITERIA)
    try:
        ids = sorted({int(x) for x in str(spec).split(",")})
    except ValueError:
        raise ConfigError("suite", "expected 'all' or comma-separated criterion numbers") from None
    bad = [i for i in ids if i not in CRITERIA]
    if bad:
        raise ConfigError("suite", f"unknown criteria {bad}")
    return ids


def cmd_verify(p: dict, out: Path):
    def show(rec):
        print(f"[{'PASS' if rec['passed'] else 'FAIL'}] {rec['id']:2d} {rec['name']}", flush=True)

    report = run_suite(_suite_ids(p["suite"]), seed=p["seed"], workers=p["workers"], progress=show)
    _write_json(out / "report.json", report)
    n_pass = sum(r["passed"] for r in report["criteria"])
    summary = f"verify: {n_pass}/{len(report['criteria'])} criteria passed"
    return ["report.json"], summary, (0 if report["passed"] else 1)


COMMANDS = {
    "resolvent": (cmd_resolvent, "scalar resolvent of a kernel (CSV t,value)"),
    "fundamental": (cmd_fundamental, "fundamental solution of the fractional problem"),
    "rho": (cmd_rho, "parabolicity index of a kernel"),
    "variance": (cmd_variance, "deterministic variance of the truncated solution"),
    "simulate": (cmd_simulate, "Monte Carlo ensemble of the truncated solution"),
    "holder": (cmd_holder, "temporal and spatial structure functions"),
    "conditions": (cmd_conditions, "series conditions of the power-law example"),
    "verify": (cmd_verify, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fwnvolterra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--output-dir", dest="output_dir")
        sp.add_argument("--kernel", help="exponential, tempered or riemann-liouville")
        sp.add_argument("--dynamics", choices=["kernel", "fractional"])
        sp.add_argument("--method", choices=["product", "cq"])
        sp.add_argument("--model", choices=["example"])
        sp.add_argument("--suite", help="'all' or comma-separated criterion numbers")
        for flag in ("alpha", "eta", "amplitude", "mu", "beta", "H", "theta", "l", "step", "horizon"):
            sp.add_argument(f"--{flag}", type=float)
        sp.add_argument("--t", type=float, nargs="+")
        for flag in ("m", "N", "seed", "workers"):
            sp.add_argument(f"--{flag}", type=int)
        sp.add_argument("--replicates", "--M", dest="replicates", type=int)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        params = resolve_params(args)
        out = Path(params["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command][0](params, out)
        files, summary = result[0], result[1]
        code = result[2] if len(result) > 2 else 0
        _write_manifest(out, args.command, params, files)
        print(summary)
        return code
    except (NumericalFailure, FloatingPointError, EmbeddingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
