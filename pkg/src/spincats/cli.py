"""Command-line front end.

Each subcommand reads a strict JSON parameter object (``--config``) plus
``--param key=value`` overrides, runs one analysis and writes its tables into
``--out`` together with ``manifest.json``.  The manifest echoes the resolved
configuration, so ``spincats rerun manifest.json`` reproduces the artifacts
byte for byte.

Exit codes: 0 success, 1 invalid parameters or unwritable output, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .ensemble import (
    EnsembleConfig,
    StiffnessError,
    assign_fits,
    build_liouvillian,
    evolve,
    fidelity_fits,
    kitten_fidelity,
    timescale_check,
)
from .metrology import (
    alpha_r,
    contributing_terms,
    m_crit,
    m_crit_ceiling,
    p_cat,
    p_crit,
    p_crit_limit,
    p_crit_piecewise,
    qfi_scan,
)
from .rates import RateParams, rates
from .secret import critical_ratio_scan, p_crit_ghz, p_crit_kitten
from .spin import Axis, KittenSpec, Spin, StateVector, dicke_state, kitten_state
from .trajectory import (
    NumericError,
    TrajectoryConfig,
    cycle_probabilities,
    run_histogram,
    run_trajectories,
    trajectory_seeds,
)
from .wigner import fringe_count, wigner_function

__all__ = ["ConfigError", "RunConfig", "Table", "run", "main", "COMMANDS", "EXIT_OK", "EXIT_PARAMS", "EXIT_NUMERIC"]

EXIT_OK, EXIT_PARAMS, EXIT_NUMERIC = 0, 1, 2
FORMATS = ("csv", "json")
MANIFEST = "manifest.json"


class ConfigError(ValueError):
    """Malformed or unknown configuration entries."""


@dataclass(frozen=True)
class Table:
    """Flat table; cells are ints, floats, strings, bools or ``None``."""

    columns: tuple[str, ...]
    rows: list[tuple]


@dataclass
class Outcome:
    tables: dict[str, Table] = field(default_factory=dict)
    records: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    """One command invocation.

    ``output_path`` is where artifacts go; it is not echoed into the manifest
    because it does not influence their content.
    """

    command: str
    params: dict
    master_seed: int = 0
    format: str = "csv"
    output_path: Path | str = "."

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "master_seed": self.master_seed, "format": self.format}


# -- parameter handling ------------------------------------------------------------


def _check_type(key: str, value, default):
    if default is None or isinstance(default, (dict, list)):
        return value
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"parameter {key!r} expects {type(default).__name__}, got {value!r}")
    return value


def resolve_params(command: str, given: dict) -> dict:
    """Merge ``given`` into the command defaults, rejecting unknown keys."""
    defaults = COMMANDS[command].defaults
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {command}: {', '.join(unknown)}")
    out = dict(defaults)
    for key, value in given.items():
        out[key] = _check_type(key, value, defaults[key])
    return out


_STATE_KEYS = {
    "dicke": {"kind", "m", "axis"},
    "coherent": {"kind", "axis"},
    "kitten": {"kind", "m", "parity"},
    "uniform": {"kind"},
}


def build_state(spin: Spin, spec: dict) -> StateVector:
    """State from ``{"kind": "dicke" | "coherent" | "kitten" | "uniform", ...}``."""
    if not isinstance(spec, dict) or spec.get("kind") not in _STATE_KEYS:
        raise ConfigError(f"state needs a kind among {sorted(_STATE_KEYS)}, got {spec!r}")
    kind = spec["kind"]
    extra = set(spec) - _STATE_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown state key(s) for {kind}: {', '.join(sorted(extra))}")
    if kind == "dicke":
        return dicke_state(spin, spec.get("m", 0), spec.get("axis", "x"))
    if kind == "coherent":
        return dicke_state(spin, spin.S, spec.get("axis", "x"))
    if kind == "kitten":
        return kitten_state(KittenSpec(spin, spec["m"], spec.get("parity", "plus")))
    return StateVector(spin, Axis.Y, np.ones(spin.dim) / math.sqrt(spin.dim))


def _spin(value) -> Spin:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"spin must be a number, got {value!r}")
    return Spin.of(value)


def _trajectory_config(p: dict, seed: int) -> TrajectoryConfig:
    spin = _spin(p["spin"])
    return TrajectoryConfig(
        spin=spin,
        upsilon=p["upsilon"],
        t_max=p["t_max"],
        seed=seed,
        jump_sampler=p["sampler"],
        dt=p["dt"],
        settle_epsilon=p["settle_epsilon"],
        initial_state=build_state(spin, p["initial"]),
    )


# -- commands ----------------------------------------------------------------------

_TRAJECTORY_DEFAULTS = {
    "spin": 10,
    "upsilon": 1.0,
    "t_max": 20.0,
    "sampler": "exact",
    "dt": None,
    "settle_epsilon": 1e-6,
    "initial": {"kind": "dicke", "m": 0, "axis": "x"},
}


def _cmd_trajectory(p: dict, seed: int, workers: int | None) -> Outcome:
    config = _trajectory_config(p, seed)
    n = p["n_trajectories"]
    if n < 1:
        raise ConfigError("n_trajectories must be at least 1")
    seeds = trajectory_seeds(seed, n)
    results = run_trajectories(config, seeds)
    summary_rows, jump_rows, records = [], [], []
    for i, (s, r) in enumerate(zip(seeds, results)):
        parity = None if r.settled_parity is None else r.settled_parity.value
        summary_rows.append((i, s, r.n_jumps, r.settled_m, parity, r.settle_time, r.t_end))
        jump_rows.extend((i, k, float(t)) for k, t in enumerate(r.jump_times))
        records.append(
            {
                "index": i,
                "seed": s,
                "jump_times": [float(t) for t in r.jump_times],
                "settled_m": r.settled_m,
                "settled_parity": parity,
                "settle_time": r.settle_time,
                "t_end": r.t_end,
            }
        )
    out = Outcome(summary={"n_trajectories": n, "settled": sum(r.settled_m is not None for r in results)})
    out.tables["trajectories"] = Table(
        ("index", "seed", "n_jumps", "settled_m", "settled_parity", "settle_time", "t_end"), summary_rows
    )
    out.tables["jumps"] = Table(("index", "jump", "time"), jump_rows)
    out.records["trajectories"] = records
    return out


def _cmd_histogram(p: dict, seed: int, workers: int | None) -> Outcome:
    config = _trajectory_config(p, seed)
    hist = run_histogram(config, p["n_trajectories"], worker_count=workers, master_seed=seed)
    predicted = cycle_probabilities(config.spin) if _is_default_initial(p["initial"]) else {}
    freqs = hist.frequencies()
    rows = [(m, hist.counts[m], freqs[m], predicted.get(m)) for m in sorted(hist.counts)]
    out = Outcome(summary={"n_trajectories": hist.n_trajectories, "unsettled": hist.unsettled})
    out.tables["histogram"] = Table(("m", "count", "frequency", "predicted"), rows)
    return out


def _is_default_initial(spec: dict) -> bool:
    return spec.get("kind") == "dicke" and spec.get("m", 0) == 0 and spec.get("axis", "x") == "x"


def _cmd_qfi(p: dict, seed: int, workers: int | None) -> Outcome:
    spin = _spin(p["spin"])
    rows = []
    for m in range(spin.int_s + 1):
        scan = qfi_scan(kitten_state(KittenSpec(spin, m, p["parity"])), p["grid_resolution"])
        axes = scan.axis_values()
        direction, value = scan.optimum
        rows.append((m, axes["x"], axes["y"], axes["z"], value, direction.theta, direction.phi, scan.spectral[1]))
    out = Outcome(summary={"spin": spin.S, "initial_qfi": 2 * spin.S * (spin.S + 1)})
    out.tables["qfi"] = Table(("m", "qfi_x", "qfi_y", "qfi_z", "qfi_opt", "theta_opt", "phi_opt", "qfi_spectral"), rows)
    return out


def _cmd_pcrit(p: dict, seed: int, workers: int | None) -> Outcome:
    if not 1 <= p["s_min"] <= p["s_max"]:
        raise ConfigError("need 1 <= s_min <= s_max")
    rows = []
    for S in range(p["s_min"], p["s_max"] + 1):
        spin = Spin.of(S)
        r = contributing_terms(spin)
        exact, stirling = p_cat(spin)
        rows.append(
            (
                S,
                m_crit(spin),
                m_crit_ceiling(spin),
                r,
                p_crit(spin),
                p_crit_piecewise(spin, "exact"),
                p_crit_piecewise(spin, "linear"),
                exact,
                stirling,
                alpha_r(spin, r)[0],
            )
        )
    fs = np.linspace(0.0, 4.0, p["f_points"])
    out = Outcome()
    out.tables["pcrit"] = Table(
        (
            "S",
            "m_crit",
            "m_crit_ceiling",
            "terms",
            "p_crit",
            "p_crit_piecewise",
            "p_crit_piecewise_linear",
            "p_cat",
            "p_cat_stirling",
            "alpha_r",
        ),
        rows,
    )
    out.tables["pcrit_limit"] = Table(("f", "p_crit_limit"), [(float(f), p_crit_limit(float(f))) for f in fs])
    return out


def _cmd_secret(p: dict, seed: int, workers: int | None) -> Outcome:
    spins = range(1, p["s_max"] + 1)
    thresholds = []
    for S in spins:
        ghz = p_crit_ghz(S)
        thresholds.extend((S, m, p_crit_kitten(S, m), ghz) for m in range(S + 1))
    crossings = [
        (row.S, row.m, row.ratio, row.ratio_per_qubit, row.ratio_continuous) for row in critical_ratio_scan(spins)
    ]
    out = Outcome(summary={"ratio_at_s_max": crossings[-1][2], "ratio_continuous_at_s_max": crossings[-1][4]})
    out.tables["thresholds"] = Table(("S", "m", "p_crit_kitten", "p_crit_ghz"), thresholds)
    out.tables["crossing"] = Table(("S", "m", "ratio", "ratio_per_qubit", "ratio_continuous"), crossings)
    return out


def _cmd_ensemble(p: dict, seed: int, workers: int | None) -> Outcome:
    n, upsilon, gamma = p["n_particles"], p["upsilon"], p["gamma_eff"]
    if p["t_max"] is not None:
        t_max = p["t_max"]
    else:
        t_max = 5 / (gamma * n) if gamma > 0 else 10 / upsilon
    times = np.linspace(0.0, t_max, p["t_points"])
    spin = Spin(n)
    initial = build_state(spin, p["initial"])
    config = EnsembleConfig(n, upsilon, gamma, times, initial=initial)
    snaps = evolve(config.initial_state(), build_liouvillian(config), config.t_grid)
    ms = p["m_values"] if p["m_values"] is not None else list(range(1, spin.int_s + 1))
    rows, assignments = [], {}
    for m in ms:
        fits = fidelity_fits(spin, m, upsilon, gamma, n, times)
        curves = {
            parity: np.array([kitten_fidelity(s, KittenSpec(spin, m, parity)) for s in snaps])
            for parity in ("plus", "minus")
        }
        for parity, curve in curves.items():
            rows.extend(
                (float(t), m, parity, float(f), float(g), float(d))
                for t, f, g, d in zip(times, curve, fits.growth, fits.decay)
            )
        a = assign_fits(m, curves["plus"], curves["minus"], fits)
        assignments[str(m)] = {"growth": a.growth, "decay": a.decay, "max_deviation": a.max_deviation}
    check = timescale_check(config)
    out = Outcome(summary={"fit_assignment": assignments, "timescale_ok": check.ok, "timescale_margin": check.margin})
    out.tables["fidelity"] = Table(("t", "m", "parity", "fidelity", "fit_value_growth", "fit_value_decay"), rows)
    return out


_SECONDS_PER_INVERSE = {"GHz": 1e-9, "MHz": 1e-6, "kHz": 1e-3, "Hz": 1.0}


def _cmd_rates(p: dict, seed: int, workers: int | None) -> Outcome:
    n_particles = p.pop("n_particles")
    unit = p.pop("frequency_unit")
    if unit not in _SECONDS_PER_INVERSE:
        raise ConfigError(f"frequency_unit must be one of {sorted(_SECONDS_PER_INVERSE)}")
    r = rates(RateParams(**p), n_particles)
    row = (r.upsilon, r.gamma_eff, r.cooperativity, r.n_bar_effective, r.ratio, r.settle_time)
    out = Outcome(
        summary={
            "settle_time": r.settle_time,
            "settle_time_us": r.settle_time * _SECONDS_PER_INVERSE[unit] * 1e6,
            "ratio": r.ratio,
            "cooperativity": r.cooperativity,
        }
    )
    out.tables["rates"] = Table(("upsilon", "gamma_eff", "cooperativity", "n_bar_effective", "ratio", "settle_time"), [row])
    return out


def _cmd_wigner(p: dict, seed: int, workers: int | None) -> Outcome:
    spin = _spin(p["spin"])
    state = build_state(spin, p["state"])
    grid = wigner_function(state, p["theta_points"], p["phi_points"])
    out = Outcome(
        summary={"normalization": grid.normalization(), "fringe_count": fringe_count(state), "argmax": grid.argmax()}
    )
    out.tables["wigner"] = Table(("theta", "phi", "w"), list(grid.rows()))
    return out


@dataclass(frozen=True)
class Command:
    defaults: dict
    run: Callable[[dict, int, int | None], Outcome]
    help: str


COMMANDS: dict[str, Command] = {
    "trajectory": Command({**_TRAJECTORY_DEFAULTS, "n_trajectories": 1}, _cmd_trajectory, "single trajectories"),
    "histogram": Command({**_TRAJECTORY_DEFAULTS, "n_trajectories": 5000}, _cmd_histogram, "settled-cycle histogram"),
    "qfi": Command({"spin": 30, "parity": "plus", "grid_resolution": 16}, _cmd_qfi, "QFI of every Kitten state"),
    "pcrit": Command({"s_min": 10, "s_max": 200, "f_points": 101}, _cmd_pcrit, "probability of beating the initial QFI"),
    "secret": Command({"s_max": 40}, _cmd_secret, "white-noise thresholds"),
    "ensemble": Command(
        {
            "n_particles": 10,
            "upsilon": 1.0,
            "gamma_eff": 0.001,
            "t_max": None,
            "t_points": 201,
            "m_values": None,
            "initial": {"kind": "dicke", "m": 0, "axis": "x"},
        },
        _cmd_ensemble,
        "Kitten fidelities under collective and local noise",
    ),
    "rates": Command(
        {
            "g": 0.25,
            "omega_rabi": 4.0,
            "delta": 25.0,
            "gamma": 0.006,
            "kappa": 0.05,
            "n_bar": 0.0,
            "kappa_in": None,
            "kappa_out": None,
            "n_th": None,
            "n_particles": 1,
            "frequency_unit": "GHz",
        },
        _cmd_rates,
        "collective and single-particle rates",
    ),
    "wigner": Command(
        {"spin": 10.0, "state": {"kind": "kitten", "m": 9, "parity": "plus"}, "theta_points": 32, "phi_points": 64},
        _cmd_wigner,
        "Wigner function grid",
    ),
}


# -- serialization -----------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17e")
    return str(value)


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def table_to_json(table: Table) -> str:
    return _dump_json([dict(zip(table.columns, row)) for row in table.rows])


def _render(outcome: Outcome, fmt: str) -> dict[str, str]:
    files = {}
    if fmt == "csv":
        for name, table in outcome.tables.items():
            files[f"{name}.csv"] = table_to_csv(table)
    else:
        for name, table in outcome.tables.items():
            files[f"{name}.json"] = table_to_json(table)
    for name, record in outcome.records.items():
        files[f"{name}.json"] = _dump_json(record)
    return files


# -- running -----------------------------------------------------------------------


def run(config: RunConfig, out_dir: Path | str | None = None, workers: int | None = None) -> dict:
    """Execute ``config`` and write artifacts plus manifest into ``out_dir`` (default ``config.output_path``).

    Files are staged in a temporary directory and moved into place only after
    everything succeeded, so a failure leaves no partial outputs.  Returns the
    manifest.
    """
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    if config.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    seed = config.master_seed
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("master_seed must be an integer in [0, 2^64)")
    params = resolve_params(config.command, config.params)
    resolved = RunConfig(config.command, params, seed, config.format)
    outcome = COMMANDS[config.command].run(dict(params), seed, workers)
    files = _render(outcome, config.format)
    manifest = {
        "config": resolved.to_json(),
        "version": __version__,
        "artifacts": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())},
        "summary": outcome.summary,
    }
    files[MANIFEST] = _dump_json(manifest)

    out_dir = Path(config.output_path if out_dir is None else out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        for name, text in files.items():
            (staging / name).write_text(text)
        for name in files:
            (staging / name).replace(out_dir / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return json.loads(files[MANIFEST])


def _parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"--param expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spincats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cmd in COMMANDS.items():
        p = sub.add_parser(name, help=cmd.help)
        p.add_argument("--config", help="JSON file with parameters")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="override one parameter")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: SPINCATS_WORKERS or 1)")
    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _config_from_args(args) -> RunConfig:
    if args.command == "rerun":
        manifest = _load_json(args.manifest)
        try:
            cfg = manifest["config"]
            return RunConfig(cfg["command"], dict(cfg["params"]), cfg["master_seed"], cfg["format"], args.out)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"manifest lacks a complete config: {exc}") from exc
    params = {}
    if args.config:
        params = _load_json(args.config)
        if not isinstance(params, dict):
            raise ConfigError("--config must hold a JSON object")
    for text in args.param:
        key, value = _parse_override(text)
        params[key] = value
    return RunConfig(args.command, params, args.seed, args.format, args.out)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        manifest = run(config, workers=args.workers)
    except (NumericError, StiffnessError, ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"spincats: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"spincats: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"spincats: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    print(_dump_json(manifest["summary"]), end="")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
