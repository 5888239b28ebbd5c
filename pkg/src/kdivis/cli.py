"""Command-line driver.

Subcommands: ``classify``, ``blp``, ``rhp``, ``sweep``, ``figure``. Runs are
described by a JSON config (schema-validated, unknown keys rejected), by a
named preset, or by flags; flags override file values. Exit codes: 0 on
success, 1 on config errors, 2 on model/run errors or an exceeded cell
budget. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import config, divisibility, figures, measures, models, sweep
from .errors import KdivisError

__all__ = ["main", "PRESETS", "CONFIG_SCHEMA", "load_run_config", "RunConfigError"]


class RunConfigError(Exception):
    """Invalid or unparsable run configuration (exit code 1)."""


_AXIS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "min": {"type": "number"},
        "max": {"type": "number"},
        "n": {"type": "integer", "minimum": 2},
    },
    "required": ["name", "min", "max", "n"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": list(models.MODEL_FAMILIES)},
                "g1": {"type": ["string", "number"]},
                "g2": {"type": ["string", "number"]},
                "g3": {"type": ["string", "number"]},
                "gamma0": {"type": "number"},
                "lambda": {"type": "number"},
                "J": {"type": "number"},
                "gamma": {"type": "number"},
                "a": {"type": "number"},
                "x": {"type": "number"},
            },
            "required": ["family"],
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"x": _AXIS, "y": _AXIS},
            "required": ["x", "y"],
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 2},
                "epsilon": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "pairs": {"type": "integer", "minimum": 1},
                "detection": {"type": "number", "exclusiveMinimum": 0},
                "jobs": {"type": "integer", "minimum": 1},
                "measures": {"type": "boolean"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "dir": {"type": "string"},
                "format": {"enum": ["csv", "svg", "both"]},
            },
        },
    },
}

#: parameters each family accepts in the "model" block
_FAMILY_PARAMS = {
    "pauli": {"g1", "g2", "g3"},
    "ad": {"gamma0", "lambda"},
    "cnot": {"J", "gamma", "a"},
    "superradiance": {"gamma0", "x", "a"},
}

PRESETS = {
    "pauli": {
        "model": {"family": "pauli", "g1": "const:1", "g2": "const:1", "g3": "const:1"},
        "run": {"horizon": 10.0},
    },
    "hall": {
        "model": {"family": "pauli", "g1": "const:1", "g2": "const:1", "g3": "tanh-neg"},
        "run": {"horizon": 10.0},
    },
    "sine": {
        "model": {"family": "pauli", "g1": "const:1", "g2": "sin", "g3": "sin-neg"},
        "run": {"horizon": 4.0 * math.pi},
    },
    "ad": {
        "model": {"family": "ad", "gamma0": 1.0, "lambda": 1.0},
        "run": {"horizon": 30.0},
    },
    "cnot": {
        "model": {"family": "cnot", "J": 1.0, "gamma": 0.1, "a": 0.5},
        "run": {"horizon": 10.0},
    },
    "superradiance": {
        "model": {"family": "superradiance", "gamma0": 1.0, "x": math.pi / 2, "a": 0.5},
        "run": {"horizon": 10.0},
    },
}


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise RunConfigError(f"config field {where}: {exc.message}") from exc
    model = cfg.get("model")
    if model is not None:
        allowed = _FAMILY_PARAMS[model["family"]]
        extra = set(model) - {"family"} - allowed
        if extra:
            raise RunConfigError(
                f"model family {model['family']!r} does not accept "
                f"parameter(s) {sorted(extra)}")


def load_run_config(
    preset: str | None = None,
    config_path=None,
    overrides: dict | None = None,
) -> dict:
    """Assemble a validated config from preset, file and flag layers."""
    cfg: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise RunConfigError(f"unknown preset {preset!r}")
        cfg = copy.deepcopy(PRESETS[preset])
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise RunConfigError(f"cannot read config {config_path}: {exc}") from exc
        try:
            file_cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RunConfigError(
                f"config {config_path}: line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
        if not isinstance(file_cfg, dict):
            raise RunConfigError(f"config {config_path}: top level must be an object")
        cfg = _merge(cfg, file_cfg)
    if overrides:
        cfg = _merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def _flag_overrides(args) -> dict:
    out: dict = {}
    model = {}
    for flag, key in (("g1", "g1"), ("g2", "g2"), ("g3", "g3"),
                      ("gamma0", "gamma0"), ("lam", "lambda"), ("J", "J"),
                      ("gamma", "gamma"), ("a", "a"), ("x", "x")):
        val = getattr(args, flag, None)
        if val is not None:
            model[key] = val
    if model:
        out["model"] = model
    run = {}
    for flag, key in (("horizon", "horizon"), ("steps", "steps"),
                      ("epsilon", "epsilon"), ("tol", "tolerance"),
                      ("pairs", "pairs"), ("detection", "detection"),
                      ("jobs", "jobs")):
        val = getattr(args, flag, None)
        if val is not None:
            run[key] = val
    if getattr(args, "measures", False):
        run["measures"] = True
    if run:
        out["run"] = run
    output = {}
    if getattr(args, "out", None) is not None:
        output["path"] = str(args.out)
    if getattr(args, "format", None) is not None:
        output["format"] = args.format
    if output:
        out["output"] = output
    return out


def _build_model(cfg: dict):
    model_cfg = cfg.get("model")
    if model_cfg is None:
        raise RunConfigError("a model block (or preset) is required")
    params = {k: v for k, v in model_cfg.items() if k != "family"}
    missing = _FAMILY_PARAMS[model_cfg["family"]] - set(params)
    if missing:
        raise RunConfigError(
            f"model family {model_cfg['family']!r} is missing "
            f"parameter(s) {sorted(missing)}")
    return models.model_from_params(model_cfg["family"], params)


def _run_block(cfg: dict) -> dict:
    run = dict(cfg.get("run", {}))
    if "horizon" not in run:
        raise RunConfigError("run.horizon is required (or pass --horizon)")
    run.setdefault("steps", 500)
    run.setdefault("epsilon", None)
    run.setdefault("tolerance", None)
    run.setdefault("pairs", 64)
    run.setdefault("detection", None)
    run.setdefault("jobs", None)
    run.setdefault("measures", False)
    return run


def _grid_spec(cfg: dict) -> sweep.GridSpec:
    model_cfg = cfg.get("model")
    sweep_cfg = cfg.get("sweep")
    if model_cfg is None or sweep_cfg is None:
        raise RunConfigError("sweep runs need both a model block and a sweep block")
    run = _run_block(cfg)
    x = sweep.ParamRange(sweep_cfg["x"]["name"], sweep_cfg["x"]["min"],
                         sweep_cfg["x"]["max"], sweep_cfg["x"]["n"])
    y = sweep.ParamRange(sweep_cfg["y"]["name"], sweep_cfg["y"]["min"],
                         sweep_cfg["y"]["max"], sweep_cfg["y"]["n"])
    fixed = {k: v for k, v in model_cfg.items()
             if k != "family" and k not in (x.name, y.name)}
    missing = _FAMILY_PARAMS[model_cfg["family"]] - {x.name, y.name} - set(fixed)
    if missing:
        raise RunConfigError(f"sweep is missing fixed parameter(s) {sorted(missing)}")
    try:
        return sweep.GridSpec(
            family=model_cfg["family"], x=x, y=y, fixed=fixed,
            horizon=run["horizon"], n_steps=run["steps"], epsilon=run["epsilon"],
            tol=run["tolerance"], detection=run["detection"], n_pairs=run["pairs"])
    except ValueError as exc:
        raise RunConfigError(str(exc)) from exc


def _series_csv(times, values) -> str:
    lines = ["t,value"]
    for t, v in zip(times, values):
        sval = "" if (v is None or (isinstance(v, float) and math.isnan(v))) else f"{v:.9g}"
        lines.append(f"{t:.9g},{sval}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_classify(args) -> int:
    cfg = load_run_config(args.preset, args.config, _flag_overrides(args))
    model = _build_model(cfg)
    run = _run_block(cfg)
    verdict = divisibility.classify(
        model, run["horizon"], run["steps"], run["epsilon"], run["tolerance"])
    print(f"class: {verdict.pd_class}")
    print(f"worst CP violation: {verdict.worst_cp_violation:.6e}")
    print(f"worst P violation: {verdict.worst_p_violation:.6e}")
    if verdict.singular_times:
        shown = ", ".join(f"{t:.6g}" for t in verdict.singular_times[:8])
        more = len(verdict.singular_times) - 8
        print(f"singular times: {shown}" + (f" (+{more} more)" if more > 0 else ""))
    else:
        print("singular times: none")
    return 0


def _cmd_blp(args) -> int:
    cfg = load_run_config(args.preset, args.config, _flag_overrides(args))
    model = _build_model(cfg)
    run = _run_block(cfg)
    result = measures.blp_measure(model, run["horizon"], run["steps"], run["pairs"])
    threshold = run["detection"] if run["detection"] is not None else config.DEFAULT.detection
    print(f"BLP measure: {result.measure:.6e}")
    print(f"detected: {'yes' if result.measure > threshold else 'no'} "
          f"(threshold {threshold:g})")
    print(f"argmax pair direction: [{result.argmax_pair[0]:.6f}, "
          f"{result.argmax_pair[1]:.6f}, {result.argmax_pair[2]:.6f}]")
    if args.out:
        best = result.sigma_series[:, np.argmax(result.directions @ result.argmax_pair)]
        path = figures.atomic_write_text(args.out, _series_csv(result.times[:-1], best))
        print(f"wrote {path}")
    return 0


def _cmd_rhp(args) -> int:
    cfg = load_run_config(args.preset, args.config, _flag_overrides(args))
    model = _build_model(cfg)
    run = _run_block(cfg)
    result = measures.rhp_measure(model, run["horizon"], run["steps"], run["epsilon"])
    threshold = run["detection"] if run["detection"] is not None else config.DEFAULT.detection
    print(f"RHP measure: {result.measure:.6e}")
    print(f"detected: {'yes' if result.measure > threshold else 'no'} "
          f"(threshold {threshold:g})")
    if result.singular_times:
        print(f"singular steps skipped: {len(result.singular_times)}")
    if args.out:
        path = figures.atomic_write_text(
            args.out, _series_csv(result.times, result.g_series.tolist()))
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_run_config(args.preset, args.config, _flag_overrides(args))
    spec = _grid_spec(cfg)
    run = _run_block(cfg)
    grid = sweep.run_sweep(spec, compute_measures=run["measures"], jobs=run["jobs"])
    output = cfg.get("output", {})
    stem = Path(output.get("path", "sweep"))
    fmt = output.get("format", "both")
    written = []
    if fmt in ("csv", "both"):
        written.append(figures.atomic_write_text(
            stem.with_suffix(".csv"), sweep.encode_csv(grid)))
    if fmt in ("svg", "both"):
        written.append(figures.atomic_write_text(
            stem.with_suffix(".svg"), sweep.encode_svg(grid)))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_figure(args) -> int:
    cfg = load_run_config(None, args.config, _flag_overrides(args))
    run = dict(cfg.get("run", {}))
    fmt = args.format or cfg.get("output", {}).get("format", "both")
    out_dir = args.out_dir or cfg.get("output", {}).get("dir", ".")
    written = figures.generate_figure(
        args.name, out_dir, fmt=fmt,
        jobs=run.get("jobs"), max_cells=args.max_cells)
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON run config")
    parser.add_argument("--out", metavar="PATH", help="output path")
    parser.add_argument("--format", choices=("csv", "svg", "both"))
    parser.add_argument("--horizon", type=float, metavar="F")
    parser.add_argument("--steps", type=int, metavar="N")
    parser.add_argument("--epsilon", type=float, metavar="F")
    parser.add_argument("--tol", type=float, metavar="F",
                        help="absolute per-step witness tolerance")
    parser.add_argument("--jobs", type=int, metavar="N",
                        help="worker processes (default: KDIVIS_JOBS or CPU count)")


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("preset", nargs="?", choices=sorted(PRESETS),
                        help="model preset to start from")
    parser.add_argument("--g1", metavar="RATE")
    parser.add_argument("--g2", metavar="RATE")
    parser.add_argument("--g3", metavar="RATE",
                        help="rate preset: const:c, a number, tanh-neg, sin, sin-neg")
    parser.add_argument("--gamma0", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--J", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--a", type=float)
    parser.add_argument("--x", type=float)
    parser.add_argument("--pairs", type=int, metavar="N")
    parser.add_argument("--detection", type=float, metavar="F")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdivis",
        description="Divisibility classification, non-Markovianity measures "
                    "and phase diagrams for qubit dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify one model into PD0/PD1/PD2")
    _add_model_args(p)
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("blp", help="trace-distance (BLP) measure of one model")
    _add_model_args(p)
    _add_common(p)
    p.set_defaults(func=_cmd_blp)

    p = sub.add_parser("rhp", help="divisibility (RHP) measure of one model")
    _add_model_args(p)
    _add_common(p)
    p.set_defaults(func=_cmd_rhp)

    p = sub.add_parser("sweep", help="run a 2-parameter phase-diagram sweep")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--measures", action="store_true",
                   help="also compute BLP/RHP per cell")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="regenerate a preset figure")
    p.add_argument("name", choices=figures.FIGURES)
    p.add_argument("--out-dir", metavar="DIR", default=".")
    p.add_argument("--max-cells", type=int, metavar="N", default=500000)
    _add_common(p)
    p.set_defaults(func=_cmd_figure)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RunConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except figures.CellBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KdivisError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
