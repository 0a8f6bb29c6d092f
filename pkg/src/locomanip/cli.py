"""Command-line entry point: ``locomanip run|validate|sweep``.

Exit codes: 0 ok, 1 config error, 2 solver failure, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .dynamics import InjectionMode
from .scenario import (BUILTIN_NAMES, ConfigError, ScenarioConfig, apply_overrides, builtin,
                       parse_config, run)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_DIVERGED = 0, 1, 2, 3
_STATUS_EXIT = {"ok": EXIT_OK, "solver_failure": EXIT_SOLVER, "diverged": EXIT_DIVERGED,
                "sim_error": EXIT_DIVERGED}


def load_config(args) -> ScenarioConfig:
    if args.config and args.scenario:
        raise ConfigError("scenario", "give either --config or a scenario name, not both")
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
    else:
        cfg = builtin(args.scenario or "push5")
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(item, "overrides are key=value")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if getattr(args, "baseline", False):
        overrides["baseline"] = "true"
    if getattr(args, "injection", None):
        overrides["mpc.injection"] = args.injection
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    cfg.validate()
    return cfg


def write_outputs(result, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{result.config.name}.csv").write_text(result.csv())
    (out / f"{result.config.name}.summary.json").write_text(result.summary.line() + "\n")


def cmd_run(args) -> int:
    cfg = load_config(args)
    result = run(cfg)
    if args.out:
        write_outputs(result, Path(args.out))
    print(result.summary.line())
    if result.error is not None:
        print(f"error: {result.summary.message}", file=sys.stderr)
    return _STATUS_EXIT.get(result.summary.status, EXIT_DIVERGED)


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"invalid: {exc}")
        return EXIT_CONFIG
    for k, v in cfg.resolved().items():
        print(f"{k} = {v}")
    print("valid")
    return EXIT_OK


def parse_grid(items) -> list:
    """``key=v1,v2`` items to a list of override dicts (cartesian product)."""
    if not items:
        raise ConfigError("grid", "sweep needs at least one --grid key=v1,v2,...")
    keys, values = [], []
    for item in items:
        if "=" not in item:
            raise ConfigError(item, "grid entries are key=v1,v2,...")
        k, v = item.split("=", 1)
        vals = [x.strip() for x in v.split("|" if "|" in v else ",") if x.strip()]
        if not vals:
            raise ConfigError(k, "empty value list")
        keys.append(k.strip())
        values.append(vals)
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _sweep_one(payload):
    cfg, overrides = payload
    try:
        point = apply_overrides(cfg, overrides)
        s = run(point).summary.as_dict()
    except (ConfigError, ValueError, RuntimeError) as exc:
        s = {"status": "error", "message": str(exc)}
    return {**overrides, **s}


def sweep(cfg: ScenarioConfig, grid: list, workers: int = 1) -> list:
    """One summary dict per grid point; failures are recorded, not raised."""
    payloads = [(cfg, g) for g in grid]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, payloads))
    return [_sweep_one(p) for p in payloads]


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    grid = parse_grid(args.grid)
    rows = sweep(cfg, grid, args.workers)
    text = "\n".join(json.dumps(r, sort_keys=True) for r in rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.name}.sweep.jsonl").write_text(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locomanip", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", nargs="?", help=f"built-in scenario: {', '.join(BUILTIN_NAMES)}")
        p.add_argument("--config", help="config file (key = value lines)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--baseline", action="store_true", help="disable the adaptive force (F_b = 0)")
        p.add_argument("--injection", choices=[m.value for m in InjectionMode],
                       help="how F_b enters the MPC model")

    p = sub.add_parser("run", help="simulate one scenario")
    common(p)
    p.add_argument("--out", help="directory for the CSV trace and summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config and print resolved values")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run a parameter grid")
    common(p)
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2", help="grid axis; repeat for more")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for the sweep table")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
