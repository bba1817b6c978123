"""Command line entry point: run, verify, inspect, sweep-info."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import _kernels
from .experiment import ExperimentConfig, run_experiment, sweep_points
from .problems import BENCHMARKS, ProblemInstance
from .verify import run_checks

log = logging.getLogger("qudit_qaoa")


def _load_config(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    if getattr(args, "benchmark", None):
        data["benchmark"] = args.benchmark
    if args.seed is not None:
        data["master_seed"] = args.seed
    if getattr(args, "out", None):
        data["output_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    if getattr(args, "no_timing", False):
        data["timing"] = False
    config = ExperimentConfig.from_dict(data)
    return config.full_scale() if args.full_scale else config


def cmd_run(args) -> int:
    config = _load_config(args)
    out = run_experiment(config, progress=True)
    print(f"results written to {out}")
    return 0


def cmd_sweep_info(args) -> int:
    config = _load_config(args)
    points = sweep_points(config)
    n_rows = len(points) * config.n_instances * config.n_runs
    print(json.dumps(asdict(config), indent=1, sort_keys=True))
    print(f"{len(points)} sweep points x {config.n_instances} instances x {config.n_runs} runs = {n_rows} rows")
    return 0


def cmd_verify(args) -> int:
    print(f"kernel backend: {_kernels.backend_name()}")
    results = run_checks()
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_inspect(args) -> int:
    inst = ProblemInstance.from_json(Path(args.instance).read_text())
    ext, ham = inst.slack()
    info = {
        "benchmark": inst.benchmark,
        "register_dims": list(inst.register.dims),
        "n_feasible": inst.n_feasible,
        "dimension": inst.register.total_dim,
        "e0": inst.e0,
        "optimal_set": [int(i) for i in inst.optimal_set],
        "slack_dims": list(ext.slack_dims),
        "slack_dimension": ext.extended_register.total_dim,
        "constraints": [c.name for c in inst.constraints],
    }
    print(json.dumps(info, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qudit-qaoa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p):
        p.add_argument("config", nargs="?", help="experiment config JSON (fields of ExperimentConfig)")
        p.add_argument("--benchmark", choices=BENCHMARKS)
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--full-scale", action="store_true", help="full instance and run counts")

    run = sub.add_parser("run", help="run or resume an experiment")
    experiment_args(run)
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, help="worker processes (default: $QUDIT_QAOA_WORKERS or 1)")
    run.add_argument("--no-timing", action="store_true", help="leave wall_time empty for byte-identical reruns")
    run.set_defaults(func=cmd_run)

    info = sub.add_parser("sweep-info", help="print the resolved config and row count")
    experiment_args(info)
    info.set_defaults(func=cmd_sweep_info)

    ver = sub.add_parser("verify", help="run the oracle self checks")
    ver.set_defaults(func=cmd_verify)

    ins = sub.add_parser("inspect", help="summarize a serialized instance")
    ins.add_argument("instance", help="instance JSON as written by ProblemInstance.to_json")
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, PermissionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
