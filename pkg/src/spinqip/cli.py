"""Command line entry point: ``spinqip run | validate | list-experiments``.

Exit codes: 0 success, 2 config error, 3 numeric failure.  Errors are also
printed to stderr as one JSON object (``{"error": kind, "message": ..., "diagnostics": [...]}``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from pydantic import ValidationError

from .io import dumps
from .schemas import PARAMETER_MODELS, RunConfig, SpinSystemFile, physics_diagnostics

OUTPUT_ENV = "SPINQIP_OUTPUT_DIR"
DEFAULT_OUTPUT_ROOT = "spinqip-runs"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _field_errors(exc: ValidationError, prefix: str = "") -> list[str]:
    out = []
    for e in exc.errors():
        loc = ".".join(str(p) for p in e["loc"])
        out.append(f"{prefix}{loc}: {e['msg']}" if loc else f"{prefix}{e['msg']}")
    return out


def diagnose(data) -> list[str]:
    """Schema and physics diagnostics for a run config or spin-system file (empty when fine)."""
    if not isinstance(data, dict):
        return ["config must be a JSON object"]
    if "spins" in data and "experiment" not in data:
        try:
            SpinSystemFile.model_validate(data)
        except ValidationError as exc:
            return _field_errors(exc)
        return []
    # top level and parameter block separately, so block errors carry a "parameters." prefix
    errs = []
    try:
        RunConfig.model_validate({**data, "parameters": {}})
    except ValidationError as exc:
        errs += _field_errors(exc)
    exp, block = data.get("experiment"), data.get("parameters", {})
    if exp in PARAMETER_MODELS and isinstance(block, dict):
        try:
            PARAMETER_MODELS[exp].model_validate(block)
        except ValidationError as exc:
            errs += _field_errors(exc, "parameters.")
    if errs:
        return errs
    cfg = RunConfig.model_validate(data)
    return physics_diagnostics(cfg)


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _error(kind: str, message: str, diagnostics=()) -> None:
    print(json.dumps({"error": kind, "message": message, "diagnostics": list(diagnostics)}),
          file=sys.stderr)


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ValueError(f"override {text!r} is not KEY=VALUE")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(value, (dict, list)):
        raise ValueError(f"override {key!r} must be a scalar")
    return key, value


def _output_dir(args, cfg: RunConfig) -> Path:
    if args.output_dir:
        return Path(args.output_dir)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT_ROOT
    return Path(root) / f"{cfg.experiment}-seed{cfg.seed}"


def cmd_run(args) -> int:
    from .runner import ConfigError, NumericFailure, describe_result, run

    try:
        data = _load(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        _error("config", f"cannot read {args.config}: {exc}")
        return EXIT_CONFIG
    try:
        if isinstance(data, dict):
            data = dict(data)
            data["parameters"] = dict(data.get("parameters") or {})
            for item in args.set or []:
                key, value = _parse_override(item)
                data["parameters"][key] = value
            if args.seed is not None:
                data["seed"] = args.seed
    except ValueError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    problems = diagnose(data)
    if problems or "spins" in data:
        _error("config", "invalid run config", problems or ["not a run config"])
        return EXIT_CONFIG
    cfg = RunConfig.model_validate(data)
    out = _output_dir(args, cfg)
    try:
        manifest = run(cfg, out)
    except ConfigError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    except NumericFailure as exc:
        _error("numeric", str(exc), [f"partial outputs flagged in {out / 'manifest.json'}"])
        return EXIT_NUMERIC
    print(f"wrote {len(manifest['outputs'])} files to {out}")
    print(describe_result(manifest))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        data = _load(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        _error("unreadable", f"cannot read {args.config}: {exc}")
        return EXIT_CONFIG
    problems = diagnose(data)
    for p in problems:
        print(p)
    if problems:
        return EXIT_CONFIG
    print("ok")
    return EXIT_OK


def cmd_list(args) -> int:
    from .runner import EXPERIMENTS

    if args.schema:
        schema = {"RunConfig": RunConfig.model_json_schema(),
                  "parameters": {k: m.model_json_schema() for k, m in PARAMETER_MODELS.items()}}
        print(dumps(schema))
        return EXIT_OK
    width = max(len(k) for k in EXPERIMENTS)
    for name, (_, blurb) in EXPERIMENTS.items():
        print(f"{name:<{width}}  {blurb}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinqip", description="Spin-based quantum information experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--output-dir", help=f"output directory (default: config, then ${OUTPUT_ENV})")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scalar field of the parameter block")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a run config or spin-system file without running")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    ls = sub.add_parser("list-experiments", help="list experiments")
    ls.add_argument("--schema", action="store_true", help="print the JSON schema of every parameter block")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
