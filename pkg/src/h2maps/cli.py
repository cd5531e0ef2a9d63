"""Command-line front end: ``h2maps <verb> [--config FILE] [overrides]``.

Every run writes ``manifest.json`` (effective configuration, version, grid)
and ``report.json`` into ``--out``.  Exit codes: 0 pass, 1 quantitative
failure, 2 validation error, 3 numerical abort.
"""

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, experiments
from .errors import (
    AdmissibilityError,
    BlowupTimeError,
    ConeExitError,
    ConfigError,
    InvariantError,
    ProjectionError,
)
from .exact import BlowupParams

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_ABORT = 0, 1, 2, 3

_PARAMS = {"a": 1.0, "b": -4.0, "alpha": 1.0}

DEFAULTS = {
    "verify-explicit": {
        **_PARAMS, "h": 0.1, "levels": 3, "half_width": 2.0, "t": 0.0, "dt": 1e-5,
        "rel_limit": 1e-2, "amplitude_limit_tol": 0.05,
    },
    "gauge-roundtrip": {
        **_PARAMS, "h": 0.1, "levels": 3, "half_width": 2.0, "t": 0.0, "dt": 1e-3,
        "gamma": "match", "inject": 0.0, "g0_rapidity": 0.0, "g0_phase": 0.0,
    },
    "evolve": {
        "n": 64, "h": 0.05, "dt": 1e-4, "steps": 1000, "initial": "bump",
        "amplitude": 0.3, "radius": 0.6, "sheet": 1, "noise": 0.0, "seed": 0,
        "sample_every": 100, "max_violation": 1e-8, "max_drift": 1e-4,
    },
    "blowup-scan": {
        **_PARAMS, "times": [0.0, 0.1, 0.2], "half_width": 1.0, "h": 0.025, "tol": 0.05,
    },
    "radial": {
        **_PARAMS, "kind": "explicit", "h_rho": 0.01, "R": 3.0, "dt": None, "t_end": 0.1,
        "amplitude": 0.01, "sample_every": None, "tail_power": 2.0,
        "blowup_threshold": 1e6, "max_mass_drift": 1e-6,
    },
}


def _merge_config(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}")
        cfg.update(loaded)

    if args.h is not None:
        cfg["h_rho" if command == "radial" else "h"] = args.h
    if args.dt is not None:
        cfg["dt"] = args.dt
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.grid is not None:
        n = args.grid
        if n < 5:
            raise ConfigError("--grid needs at least 5 nodes")
        if command == "evolve":
            cfg["n"] = n
        elif command == "radial":
            cfg["R"] = n * cfg["h_rho"]
        else:
            if n % 2 == 0:
                raise ConfigError("--grid must be odd so the origin is a node")
            cfg["half_width"] = (n - 1) / 2 * cfg["h"]
    if args.flip:
        if command != "evolve":
            raise ConfigError("--flip applies to evolve only")
        cfg["sheet"] = -cfg["sheet"]
    return cfg


def _validate(command, cfg):
    """Checks that must pass before any computation starts."""
    for key in ("h", "h_rho", "half_width", "R", "t_end", "tol"):
        if key in cfg and not (isinstance(cfg[key], (int, float)) and cfg[key] > 0):
            raise ConfigError(f"{key} must be a positive number, got {cfg[key]!r}")
    if cfg.get("dt") is not None and not cfg["dt"] > 0:
        raise ConfigError("dt must be positive")
    if "a" in cfg:
        strict = command in ("gauge-roundtrip", "blowup-scan") or (
            command == "radial" and cfg["kind"] == "explicit"
        )
        params = BlowupParams(cfg["a"], cfg["b"], cfg["alpha"], strict=strict)
    if command in ("verify-explicit", "gauge-roundtrip") and int(cfg["levels"]) < 2:
        raise ConfigError("levels must be at least 2")
    if command == "blowup-scan":
        if not cfg["times"]:
            raise ConfigError("times must be a non-empty list")
        late = [t for t in cfg["times"] if t >= params.blowup_time]
        if late:
            raise BlowupTimeError(f"sample times {late} are not before {params.blowup_time}")
    if command == "evolve":
        if cfg["initial"] not in ("bump", "constant"):
            raise ConfigError("initial must be 'bump' or 'constant'")
        if cfg["sheet"] not in (1, -1):
            raise ConfigError("sheet must be +1 or -1")
        limit = 0.1 * cfg["h"] ** 2
        if cfg["dt"] > limit:
            raise ConfigError(f"dt={cfg['dt']:g} violates the stability guard dt <= {limit:g}")
    if command == "radial" and cfg["kind"] not in ("explicit", "gaussian", "zero"):
        raise ConfigError("kind must be 'explicit', 'gaussian' or 'zero'")


def _ladder(cfg):
    return [cfg["h"] / 2**k for k in range(int(cfg["levels"]))]


def _write_table(path, rows):
    if not rows:
        return
    keys = list(rows[0])
    lines = [",".join(keys)] + [",".join(repr(float(r[k])) for k in keys) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_verify_explicit(cfg, out):
    ladder = experiments.explicit_residual_ladder(
        cfg["a"], cfg["b"], cfg["alpha"], hs=_ladder(cfg), half_width=cfg["half_width"],
        t=cfg["t"], dt=cfg["dt"], rel_limit=cfg["rel_limit"],
    )
    report = {"ladder": ladder, "passed": ladder["passed"]}
    if not ladder["params"]["is_solution"]:
        report["amplitude_limit"] = experiments.amplitude_limit_check(
            cfg["a"], cfg["b"], cfg["alpha"], h=ladder["hs"][-1],
            half_width=cfg["half_width"], t=cfg["t"], dt=cfg["dt"],
            rel_tol=cfg["amplitude_limit_tol"],
        )
    rows = [{"h": h, **{k: v["errors"][i] for k, v in ladder["equations"].items()}}
            for i, h in enumerate(ladder["hs"])]
    _write_table(out / "residual_ladder.csv", rows)
    return report


def cmd_gauge_roundtrip(cfg, out):
    G0 = None
    if cfg["g0_rapidity"] or cfg["g0_phase"]:
        c, s = np.cosh(cfg["g0_rapidity"]), np.sinh(cfg["g0_rapidity"])
        e = np.exp(1j * cfg["g0_phase"])
        G0 = np.array([[c * e, s], [s, c * np.conj(e)]])
    report = experiments.gauge_roundtrip(
        cfg["a"], cfg["b"], cfg["alpha"], hs=_ladder(cfg), half_width=cfg["half_width"],
        t=cfg["t"], dt=cfg["dt"], G0=G0, gamma=cfg["gamma"], inject=cfg["inject"],
    )
    if "levels" in report:
        rows = [{"h": lv["h"], "su11_violation": lv["su11_violation"],
                 "hyperboloid_violation": lv["hyperboloid_violation"],
                 "spin_residual": lv["spin_residual"],
                 **{f"recovery_{k}": v for k, v in lv["recovery"].items()}}
                for lv in report["levels"]]
        _write_table(out / "roundtrip_ladder.csv", rows)
    return report


def cmd_evolve(cfg, out):
    from . import grid as gc, spin

    g = gc.Grid2D.periodic(int(cfg["n"]), cfg["h"])
    sheet = int(cfg["sheet"])
    if cfg["initial"] == "constant":
        S0 = spin.SpinField.constant(g, (0.0, 0.0, float(sheet)))
    else:
        S0 = spin.bump_initial_data(g, cfg["amplitude"], cfg["radius"], sheet=sheet)
    if cfg["noise"]:
        rng = np.random.default_rng(cfg["seed"])
        w = S0.values[..., :2] + cfg["noise"] * rng.standard_normal(g.shape + (2,))
        s3 = sheet * np.sqrt(1.0 + (w**2).sum(axis=-1))
        S0 = spin.SpinField(g, np.concatenate([w, s3[..., None]], axis=-1))
    ecfg = spin.EvolveConfig(dt=cfg["dt"], steps=int(cfg["steps"]), sign=sheet)
    final, diag, _ = spin.evolve(S0, ecfg, sample_every=cfg["sample_every"], out_dir=out)
    report = {
        "grid": g.metadata(),
        "final_violation": final.max_violation(),
        "max_pre_retraction_violation": max(diag.max_constraint_violation),
        "energy": [diag.energy[0], diag.energy[-1]],
        "energy_drift": diag.energy_drift,
        "sup_gradient": [diag.sup_gradient[0], diag.sup_gradient[-1]],
        "max_change": float(np.abs(final.values - S0.values).max()),
    }
    report["checks"] = {
        "violation": report["final_violation"] <= cfg["max_violation"],
        "energy": report["energy_drift"] <= cfg["max_drift"],
    }
    report["passed"] = all(report["checks"].values())
    return report


def cmd_blowup_scan(cfg, out):
    report = experiments.blowup_scan(
        cfg["a"], cfg["b"], cfg["alpha"], times=cfg["times"],
        half_width=cfg["half_width"], h=cfg["h"], tol=cfg["tol"],
    )
    _write_table(out / "blowup_scan.csv", report["rows"])
    return report


def cmd_radial(cfg, out):
    report, traj = experiments.radial_run(
        kind=cfg["kind"], a=cfg["a"], b=cfg["b"], alpha=cfg["alpha"], h_rho=cfg["h_rho"],
        R=cfg["R"], dt=cfg["dt"], t_end=cfg["t_end"], amplitude=cfg["amplitude"],
        sample_every=cfg["sample_every"], tail_power=cfg["tail_power"],
        blowup_threshold=cfg["blowup_threshold"], max_mass_drift=cfg["max_mass_drift"],
    )
    traj.write_csv(out / "radial_trajectory.csv")
    (out / "radial_trajectory.json").write_text(json.dumps(
        {**traj.grid.metadata(), "status": traj.status, "times": traj.times}, indent=2))
    return report


COMMANDS = {
    "verify-explicit": cmd_verify_explicit,
    "gauge-roundtrip": cmd_gauge_roundtrip,
    "evolve": cmd_evolve,
    "blowup-scan": cmd_blowup_scan,
    "radial": cmd_radial,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="h2maps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"h2maps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with parameter overrides")
        p.add_argument("--out", default=f"runs/{name}", help="output directory")
        p.add_argument("--grid", type=int, help="nodes per axis")
        p.add_argument("--h", type=float, help="grid spacing (coarsest level for ladders)")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--seed", type=int, help="seed for randomized initial data")
        p.add_argument("--flip", action="store_true", help="evolve on the s3 < 0 sheet")
    return parser


def _dump(path, obj):
    path.write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    command = args.command
    try:
        cfg = _merge_config(command, args)
        _validate(command, cfg)
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        failure = {"status": "validation_error", "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(failure), file=sys.stderr)
        out.mkdir(parents=True, exist_ok=True)
        _dump(out / "report.json", {"command": command, **failure, "passed": False})
        return EXIT_INVALID

    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "manifest.json", {
        "command": command, "version": __version__, "config": cfg,
        "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
    })
    try:
        report = COMMANDS[command](cfg, out)
    except (ConeExitError, ProjectionError, AdmissibilityError, InvariantError,
            FloatingPointError) as exc:
        failure = {"status": "numerical_abort", "error": type(exc).__name__, "message": str(exc)}
        for attr in ("node", "step"):
            if getattr(exc, attr, None) is not None:
                failure[attr] = getattr(exc, attr)
        print(json.dumps(failure, default=_json_default), file=sys.stderr)
        _dump(out / "report.json", {"command": command, **failure, "passed": False})
        return EXIT_ABORT
    except (ConfigError, ValueError) as exc:
        failure = {"status": "validation_error", "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(failure), file=sys.stderr)
        _dump(out / "report.json", {"command": command, **failure, "passed": False})
        return EXIT_INVALID

    report = {"command": command, "status": "pass" if report["passed"] else "fail", **report}
    _dump(out / "report.json", report)
    print(f"{command}: {report['status']} (report: {out / 'report.json'})")
    return EXIT_PASS if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
