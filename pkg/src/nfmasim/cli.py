"""Command-line front end: single runs, sweeps, validation, replay.

Exit codes are a stable contract: 0 success, 1 optimization failure or
infeasible instance (or a failed validation/replay), 2 input error. Every
command is deterministic given its seed; ``replay`` re-executes a stored
run and verifies the regenerated CSV files byte for byte.
"""

import argparse
import json
import os
import sys

from .harness import (RESULT_HEADER, SCHEMES, SWEEP_AXES, TRACE_HEADER,
                      Scenario, ScenarioError, drop_scenario,
                      parse_scenario_file, result_row, run_scheme, sweep,
                      trace_rows, write_csv_atomic)
from .optimizer import SwarmConfig
from .validation import SUITE_NAMES, run_suite

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2

OUT_DIR_ENV = "NFMASIM_OUT"


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, "nfmasim_out")


def _add_swarm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--particles", type=int, default=20,
                        help="initial particle count (default 20)")
    parser.add_argument("--iterations", type=int, default=30,
                        help="outer iterations (default 30)")
    parser.add_argument("--beta", type=float, default=0.02,
                        help="linear pruning ratio in (0, 1] (default 0.02)")
    parser.add_argument("--c1", type=float, default=1.4)
    parser.add_argument("--c2", type=float, default=1.4)
    parser.add_argument("--omega-min", type=float, default=0.4)
    parser.add_argument("--omega-max", type=float, default=0.9)
    parser.add_argument("--tau", type=float, default=100.0,
                        help="penalty per spacing-violating antenna")


def _swarm_config(args, workers: int = 1) -> SwarmConfig:
    return SwarmConfig(n_particles=args.particles,
                       n_iterations=args.iterations,
                       prune_ratio=args.beta, c1=args.c1, c2=args.c2,
                       omega_min=args.omega_min, omega_max=args.omega_max,
                       penalty_factor=args.tau, workers=workers)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfmasim",
        description="Near-field movable-antenna downlink power-minimization "
                    "simulator")
    parser.add_argument("--threads", type=int,
                        default=os.cpu_count() or 1,
                        help="worker cap (default: available parallelism)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scheme on one scenario")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--scheme", required=True, choices=SCHEMES)
    p_run.add_argument("--seed", type=int, default=0,
                       help="drop/run seed index")
    p_run.add_argument("--out", default=None)
    _add_swarm_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="axis sweep over schemes/seeds")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")
    p_sweep.add_argument("--schemes", default="proposed,ma_bs,fpa",
                         help="comma-separated scheme names")
    p_sweep.add_argument("--seeds", type=int, default=20,
                         help="number of seed indices (0..N-1)")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--no-resume", action="store_true",
                         help="recompute cells even when cell files exist")
    _add_swarm_flags(p_sweep)

    p_val = sub.add_parser("validate", help="run oracle/invariant suites")
    p_val.add_argument("--suite", required=True, choices=SUITE_NAMES)
    p_val.add_argument("--seed", type=int, default=0)

    p_replay = sub.add_parser(
        "replay", help="re-run a stored output directory and verify bytes")
    p_replay.add_argument("--dir", required=True,
                          help="directory holding manifest.json")
    p_replay.add_argument("--out", required=True,
                          help="directory the replay writes into")
    return parser


def _status(**kwargs) -> None:
    print("status=" + kwargs.pop("status"),
          *(f"{k}={v}" for k, v in kwargs.items()))


def _write_manifest(out_dir: str, manifest: dict) -> None:
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _cmd_run(args, out_dir: str) -> int:
    scenario = parse_scenario_file(args.scenario)
    config = _swarm_config(args, workers=max(1, args.threads))
    placement = drop_scenario(scenario, args.seed)
    result = run_scheme(args.scheme, scenario, config, args.seed,
                        placement=placement)

    os.makedirs(out_dir, exist_ok=True)
    trace_name = ""
    if result.trace:
        trace_name = f"trace_{args.scheme}_{args.seed}.csv"
        write_csv_atomic(os.path.join(out_dir, trace_name), TRACE_HEADER,
                         trace_rows(result))
    row = result_row(result, trace_file=trace_name)
    write_csv_atomic(os.path.join(out_dir, "result.csv"), RESULT_HEADER,
                     [row])
    with open(os.path.join(out_dir, "drop.json"), "w",
              encoding="utf-8") as fh:
        json.dump(placement.to_dict(), fh, sort_keys=True)
        fh.write("\n")

    outputs = ["result.csv", "drop.json"]
    if trace_name:
        outputs.append(trace_name)
    _write_manifest(out_dir, {
        "kind": "run",
        "scenario": scenario.to_dict(),
        "scheme": args.scheme,
        "seed": args.seed,
        "swarm": {
            "n_particles": config.n_particles,
            "n_iterations": config.n_iterations,
            "prune_ratio": config.prune_ratio,
            "c1": config.c1, "c2": config.c2,
            "omega_min": config.omega_min, "omega_max": config.omega_max,
            "penalty_factor": config.penalty_factor,
        },
        "outputs": outputs,
    })

    if not result.feasible:
        reason = (result.run.diagnostics if result.run is not None
                  else "inner beamforming problem not solved to optimality")
        _status(status="failed", scheme=args.scheme, seed=args.seed,
                reason=reason.replace(" ", "_"))
        return EXIT_FAILURE
    _status(status="ok", scheme=args.scheme, seed=args.seed,
            power_dbm=f"{result.power_dbm:.6f}", evals=result.evaluations,
            out=out_dir)
    return EXIT_OK


def _cmd_sweep(args, out_dir: str) -> int:
    scenario = parse_scenario_file(args.scenario)
    config = _swarm_config(args, workers=1)
    values = [float(v) for v in args.values.split(",") if v != ""]
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if not values:
        raise ScenarioError("no sweep values given")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ScenarioError(f"unknown scheme {scheme!r}")

    os.makedirs(out_dir, exist_ok=True)
    rows = sweep(scenario, args.axis, values, schemes, args.seeds, config,
                 out_dir=out_dir, resume=not args.no_resume,
                 workers=max(1, args.threads),
                 progress=lambda msg: print(msg, file=sys.stderr))
    write_csv_atomic(os.path.join(out_dir, "sweep.csv"), RESULT_HEADER, rows)
    _write_manifest(out_dir, {
        "kind": "sweep",
        "scenario": scenario.to_dict(),
        "axis": args.axis,
        "values": values,
        "schemes": schemes,
        "n_seeds": args.seeds,
        "swarm": {
            "n_particles": config.n_particles,
            "n_iterations": config.n_iterations,
            "prune_ratio": config.prune_ratio,
            "c1": config.c1, "c2": config.c2,
            "omega_min": config.omega_min, "omega_max": config.omega_max,
            "penalty_factor": config.penalty_factor,
        },
        "outputs": ["sweep.csv"],
    })
    _status(status="ok", cells=len(rows), out=out_dir)
    return EXIT_OK


def _cmd_validate(args) -> int:
    checks = run_suite(args.suite, seed=args.seed)
    failed = [c for c in checks if not c.passed]
    for check in checks:
        verdict = "PASS" if check.passed else "FAIL"
        print(f"[{verdict}] {check.name}: {check.detail}")
    if failed:
        _status(status="failed", suite=args.suite,
                failed=",".join(c.name for c in failed))
        return EXIT_FAILURE
    _status(status="ok", suite=args.suite, checks=len(checks))
    return EXIT_OK


def _cmd_replay(args) -> int:
    manifest_path = os.path.join(args.dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise ScenarioError(f"no manifest.json under {args.dir!r}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)

    scenario = Scenario.from_dict(manifest["scenario"])
    swarm = manifest["swarm"]
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)

    if manifest["kind"] == "run":
        config = SwarmConfig(**swarm)
        placement = drop_scenario(scenario, manifest["seed"])
        result = run_scheme(manifest["scheme"], scenario, config,
                            manifest["seed"], placement=placement)
        trace_name = ""
        if result.trace:
            trace_name = f"trace_{manifest['scheme']}_{manifest['seed']}.csv"
            write_csv_atomic(os.path.join(out_dir, trace_name),
                             TRACE_HEADER, trace_rows(result))
        write_csv_atomic(os.path.join(out_dir, "result.csv"), RESULT_HEADER,
                         [result_row(result, trace_file=trace_name)])
        with open(os.path.join(out_dir, "drop.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(placement.to_dict(), fh, sort_keys=True)
            fh.write("\n")
    elif manifest["kind"] == "sweep":
        config = SwarmConfig(**swarm)
        rows = sweep(scenario, manifest["axis"], manifest["values"],
                     manifest["schemes"], manifest["n_seeds"], config,
                     out_dir=out_dir, resume=False,
                     workers=max(1, args.threads))
        write_csv_atomic(os.path.join(out_dir, "sweep.csv"), RESULT_HEADER,
                         rows)
    else:
        raise ScenarioError(f"unknown manifest kind {manifest['kind']!r}")

    mismatched = []
    for name in manifest["outputs"]:
        original = os.path.join(args.dir, name)
        regenerated = os.path.join(out_dir, name)
        with open(original, "rb") as fh:
            a = fh.read()
        with open(regenerated, "rb") as fh:
            b = fh.read()
        if a != b:
            mismatched.append(name)
    if mismatched:
        _status(status="failed", mismatched=",".join(mismatched))
        return EXIT_FAILURE
    _status(status="ok", verified=len(manifest["outputs"]), out=out_dir)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, args.out or _default_out())
        if args.command == "sweep":
            return _cmd_sweep(args, args.out or _default_out())
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "replay":
            return _cmd_replay(args)
        parser.error(f"unknown command {args.command!r}")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _status(status="input_error", detail=str(exc).replace(" ", "_"))
        return EXIT_INPUT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _status(status="input_error", detail=str(exc).replace(" ", "_"))
        return EXIT_INPUT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
