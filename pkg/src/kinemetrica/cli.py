"""Command-line experiment runner.

    kinemetrica run --config exp.json [--seed S] [--samples N] [--workers W] [--out PATH] [--format csv|jsonl]
    kinemetrica verify [SUITE|all] [--tol-sigma 4] [--seed 7] [--scale 1]
    kinemetrica list-shapes
    kinemetrica list-processes

Exit codes: 0 success, 2 configuration error, 3 regime violation,
4 statistical failure in ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Any

import jsonschema

from . import estimators as est
from . import suites
from .bodies import from_descriptor as body_from_descriptor
from .curves import CurveProcess
from .errors import CapabilityError, ConfigurationError, DegenerateEstimate, RegimeViolation, UsageError

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_STAT = 0, 2, 3, 4

COLUMNS = ("experiment_id", "estimate", "std_error", "theory", "z_score", "n_samples", "n_accepted", "wall_time_s",
           "seed")

ESTIMATORS = ("mean_length", "small_loop", "inclusion_3d", "infinite", "ocd", "invariance")

_POS = {"type": "number", "exclusiveMinimum": 0}
_DIM = {"type": "integer", "minimum": 2}


def _variant(tag_key: str, tag: str, required: list[str], props: dict[str, Any]) -> dict[str, Any]:
    allowed = {tag_key: {"const": tag}, **props}
    return {
        "if": {"properties": {tag_key: {"const": tag}}, "required": [tag_key]},
        "then": {"required": [tag_key, *required], "properties": allowed, "additionalProperties": False},
    }


SHAPE_FIELDS = {
    "ball": (["radius"], {"radius": _POS, "dimension": _DIM}),
    "box": (["edges"], {"edges": {"type": "array", "items": _POS, "minItems": 2}, "angle": {"type": "number"}}),
    "annulus": (["r_in", "r_out"], {"r_in": _POS, "r_out": _POS}),
    "shell": (["r_in", "r_out"], {"r_in": _POS, "r_out": _POS}),
    "polygon": (["vertices"], {"vertices": {"type": "array", "minItems": 3,
                                            "items": {"type": "array", "items": {"type": "number"},
                                                      "minItems": 2, "maxItems": 2}}}),
}

LAW_FIELDS = {
    "constant": (["value"], {"value": _POS}),
    "exponential": (["mean"], {"mean": _POS}),
    "gamma": (["shape", "scale"], {"shape": _POS, "scale": _POS}),
    "pareto": (["x_min", "alpha"], {"x_min": _POS, "alpha": _POS}),
}

LAW_SCHEMA = {
    "type": "object",
    "required": ["law"],
    "properties": {"law": {"enum": list(LAW_FIELDS)}},
    "allOf": [_variant("law", k, *v) for k, v in LAW_FIELDS.items()],
}

PROCESS_FIELDS = {
    "segment": (["length"], {"length": {"oneOf": [_POS, LAW_SCHEMA]}, "dimension": _DIM}),
    "pearson": (["length", "step"], {"length": {"oneOf": [_POS, LAW_SCHEMA]}, "step": LAW_SCHEMA,
                                     "dimension": _DIM}),
    "tree": (["step", "branches"], {"step": LAW_SCHEMA, "branches": {"type": "integer", "minimum": 1},
                                    "dimension": _DIM}),
    "circle": (["radius"], {"radius": _POS, "dimension": _DIM}),
    "line": ([], {"dimension": _DIM}),
}

BODY_SCHEMA = {
    "type": "object",
    "required": ["shape"],
    "properties": {"shape": {"enum": list(SHAPE_FIELDS)}},
    "allOf": [_variant("shape", k, *v) for k, v in SHAPE_FIELDS.items()],
}

PROCESS_SCHEMA = {
    "type": "object",
    "required": ["curve"],
    "properties": {"curve": {"enum": list(PROCESS_FIELDS)}},
    "allOf": [_variant("curve", k, *v) for k, v in PROCESS_FIELDS.items()],
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment_id", "body", "estimator"],
    "properties": {
        "experiment_id": {"type": "string", "minLength": 1},
        "estimator": {"enum": list(ESTIMATORS)},
        "body": BODY_SCHEMA,
        "process": PROCESS_SCHEMA,
        "inner_body": BODY_SCHEMA,
        "mean_length": _POS,
        "n_samples": {"type": "integer", "minimum": 1000},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "truncation_factor": _POS,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "jsonl"]}},
        },
    },
}

NEEDS_PROCESS = {"mean_length", "small_loop"}


class ConfigError(Exception):
    """Carries a list of JSON-able diagnostics."""

    def __init__(self, diagnostics: list[dict[str, Any]]):
        super().__init__("; ".join(d.get("message", "") for d in diagnostics))
        self.diagnostics = diagnostics


def load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([{"error": "io", "path": path, "message": str(exc)}]) from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([{"error": "json", "line": exc.lineno, "column": exc.colno, "message": exc.msg}]) from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: Any) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    diags = [
        {"error": "schema", "field": "/".join(str(p) for p in e.absolute_path) or "<root>", "message": e.message}
        for e in errors
    ]
    if not diags and cfg["estimator"] in NEEDS_PROCESS and "process" not in cfg:
        diags.append({"error": "schema", "field": "process",
                      "message": f"estimator {cfg['estimator']!r} needs a process"})
    if not diags and cfg["estimator"] == "inclusion_3d" and "inner_body" not in cfg:
        diags.append({"error": "schema", "field": "inner_body", "message": "inclusion_3d needs an inner_body"})
    if diags:
        raise ConfigError(diags)


def run_experiment(cfg: dict[str, Any], seed: int, n_samples: int, workers: int | None) -> list[est.EstimatorResult]:
    body = body_from_descriptor(cfg["body"])
    process = CurveProcess.from_descriptor(cfg["process"]) if "process" in cfg else None
    kind = cfg["estimator"]
    if kind == "mean_length":
        return [est.estimate_mean_traversed_length(seed, body, process, n_samples, workers=workers)]
    if kind == "small_loop":
        return list(est.estimate_small_loop_quantities(seed, body, process, n_samples, workers=workers).values())
    if kind == "inclusion_3d":
        inner = body_from_descriptor(cfg["inner_body"])
        return [est.estimate_inclusion_probability_3d(seed, body, inner, n_samples, workers=workers)]
    if kind == "infinite":
        kappa = cfg.get("truncation_factor", est.DEFAULT_TRUNCATION)
        return [est.estimate_infinite_curve_mean_length(seed, body, process, kappa, n_samples, workers=workers)]
    if kind == "ocd":
        return list(est.estimate_ocd_mean_chord(seed, body, n_samples, workers=workers).values())
    procs = est.invariance_processes(cfg.get("mean_length", 5.0), body.dimension)
    results, _ = est.invariance_suite(seed, body, procs, n_samples, workers=workers)
    return results


def result_rows(experiment_id: str, results: list[est.EstimatorResult], seed: int) -> list[dict[str, Any]]:
    single = len(results) == 1
    rows = []
    for r in results:
        rows.append({
            "experiment_id": experiment_id if single else f"{experiment_id}/{r.name}",
            "estimate": r.estimate,
            "std_error": r.std_error,
            "theory": r.theory.value if r.theory is not None else None,
            "z_score": r.z_score,
            "n_samples": r.n_samples,
            "n_accepted": r.n_accepted,
            "wall_time_s": r.wall_time,
            "seed": seed,
        })
    return rows


def format_rows(rows: list[dict[str, Any]], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "jsonl":
        for row in rows:
            buf.write(json.dumps(row) + "\n")
        return buf.getvalue()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _diag(stream, **fields) -> None:
    print(json.dumps(fields), file=stream)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for d in exc.diagnostics:
            _diag(sys.stderr, **d)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        _diag(sys.stderr, error="schema", field="seed", message="a seed is required (config 'seed' or --seed)")
        return EXIT_CONFIG
    n_samples = args.samples or cfg.get("n_samples", 100_000)
    workers = args.workers or cfg.get("workers")
    output = cfg.get("output", {})
    fmt = args.format or output.get("format", "csv")
    out_path = args.out or output.get("path")
    try:
        results = run_experiment(cfg, seed, n_samples, workers)
    except RegimeViolation as exc:
        _diag(sys.stderr, error="regime", message=str(exc))
        return EXIT_REGIME
    except (UsageError, CapabilityError, ConfigurationError, DegenerateEstimate) as exc:
        _diag(sys.stderr, error="config", message=str(exc))
        return EXIT_CONFIG
    text = format_rows(result_rows(cfg["experiment_id"], results, seed), fmt)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    name = args.suite_flag or args.suite or "all"
    names = suites.SUITES if name == "all" else (name,)
    if any(n not in suites.SUITES for n in names):
        _diag(sys.stderr, error="usage", message=f"unknown suite {name!r}; choose from all, {', '.join(suites.SUITES)}")
        return EXIT_CONFIG
    ok = True
    for n in names:
        lines = suites.run_suite(n, args.seed, args.tol_sigma, args.scale, args.workers)
        for line in lines:
            print(line.format())
            ok &= line.passed
        if n == "invariance":
            print(suites.z_matrix_text(lines))
    return EXIT_OK if ok else EXIT_STAT


SHAPE_HELP = {
    "ball": "disk/ball of any dimension",
    "box": "axis-aligned box; 2D boxes accept a rotation 'angle' (radians)",
    "annulus": "2D ring, non-convex, two boundary circles",
    "shell": "3D spherical shell",
    "polygon": "simple 2D polygon, vertices in order",
}

PROCESS_HELP = {
    "segment": "straight segment of fixed or random length",
    "pearson": "isotropic walk with i.i.d. step lengths, total length fixed or random",
    "tree": "ramified tree: branches attached uniformly by arc length",
    "circle": "circle loop of given radius",
    "line": "isotropic straight line",
}


def _field_text(required, props) -> str:
    parts = [f"{k}" if k in required else f"[{k}]" for k in props]
    return ", ".join(parts) if parts else "-"


def cmd_list_shapes(args) -> int:
    for shape, (req, props) in SHAPE_FIELDS.items():
        print(f"{shape:<9} {_field_text(req, props):<28} {SHAPE_HELP[shape]}")
    return EXIT_OK


def cmd_list_processes(args) -> int:
    for kind, (req, props) in PROCESS_FIELDS.items():
        print(f"{kind:<9} {_field_text(req, props):<28} {PROCESS_HELP[kind]}")
    print("step laws: " + "; ".join(f"{k}({', '.join(v[0])})" for k, v in LAW_FIELDS.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinemetrica", description="Kinematic Monte Carlo for mean chord laws.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "jsonl"))
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run a verification batch against closed forms")
    ver.add_argument("suite", nargs="?", help="|".join(("all",) + suites.SUITES))
    ver.add_argument("--suite", dest="suite_flag")
    ver.add_argument("--tol-sigma", type=float, default=4.0)
    ver.add_argument("--seed", type=int, default=7)
    ver.add_argument("--scale", type=float, default=1.0, help="multiplier on sample counts")
    ver.add_argument("--workers", type=int)
    ver.set_defaults(func=cmd_verify)

    sub.add_parser("list-shapes", help="supported body descriptors").set_defaults(func=cmd_list_shapes)
    sub.add_parser("list-processes", help="supported curve processes").set_defaults(func=cmd_list_processes)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
