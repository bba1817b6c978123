"""Experiment fan-out: instances x sweep points x runs, CSV rows, JSON summaries.

Seeds are derived with ``numpy.random.SeedSequence``: instance ``i`` uses
spawn key (0, i) and run ``j`` of instance ``i`` uses (1, i, j), both under
the master seed. Every sweep point reuses the same instance and run seeds,
so modes are compared on identical problems and identical initial draws.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterator

import numpy as np

from .metrics import aggregate, approximation_ratio, run_succeeded
from .optimizer import OptimizerConfig
from .problems import (
    BENCHMARKS,
    CONSTRAINT_ONLY,
    EV_CHARGING,
    RANDOM_SPIN,
    gen_constraint_only,
    gen_ev_problem,
    gen_random_spin,
)
from .qaoa import CIRCUIT, COST_FIRST, DIRECT, SLACK, QaoaConfig, build_setup, run_single

log = logging.getLogger(__name__)

WORKERS_ENV = "QUDIT_QAOA_WORKERS"
PENALTY_MODES = ("a0", "a1", "a2", "slack")

COLUMNS = (
    "benchmark", "instance_id", "run_id", "mode", "a", "p", "m0",
    "success", "success_full_state", "R", "W", "baseline",
    "E_final", "E_floor", "E0", "n_evaluations", "termination_reason", "seed", "wall_time",
)
KEY_COLUMNS = ("benchmark", "instance_id", "run_id", "mode", "a", "p", "m0")

FULL_SCALE = {RANDOM_SPIN: (20, 50), CONSTRAINT_ONLY: (1, 50), EV_CHARGING: (20, 50)}


@dataclass
class ExperimentConfig:
    benchmark: str = RANDOM_SPIN
    N: int = 9
    n_ev: int = 2
    T: int = 4
    e_required: list = field(default_factory=lambda: [2, 2])
    e_max: int = 1
    m0_values: list | None = None  # None: the full grid -N/2 .. N/2
    penalty_modes: list = field(default_factory=lambda: list(PENALTY_MODES))
    layers: list = field(default_factory=lambda: [1])
    lam: float = 4.0
    n_instances: int = 5
    n_runs: int = 20
    shots: int = 64
    master_seed: int = 0
    circuit: bool = False  # realize direct penalties with the ancilla circuit
    layer_order: str = COST_FIRST
    xtol: float = 1e-4
    ftol: float = 1e-4
    timing: bool = True
    output_dir: str = "results"
    workers: int | None = None

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"benchmark must be one of {BENCHMARKS}, got {self.benchmark!r}")
        for name in ("N", "n_ev", "T", "n_instances", "n_runs", "shots"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.layers or any(int(p) < 1 for p in self.layers):
            raise ValueError("layers must be a nonempty list of integers >= 1")
        bad = [m for m in self.penalty_modes if m not in PENALTY_MODES]
        if bad or not self.penalty_modes:
            raise ValueError(f"penalty_modes must be drawn from {PENALTY_MODES}, got {self.penalty_modes}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.benchmark == CONSTRAINT_ONLY and self.n_instances != 1:
            log.info("constraint_only instances are identical; using n_instances=1")
            self.n_instances = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def full_scale(self) -> "ExperimentConfig":
        n_inst, n_runs = FULL_SCALE[self.benchmark]
        return replace(self, n_instances=n_inst, n_runs=n_runs)

    def m0_grid(self) -> list:
        if self.benchmark == EV_CHARGING:
            return [None]
        if self.m0_values is not None:
            return [float(m) for m in self.m0_values]
        return [k - self.N / 2 for k in range(self.N + 1)]


@dataclass(frozen=True)
class SweepPoint:
    m0: float | None
    penalty: str
    p: int

    def qaoa_mode(self, circuit: bool) -> str:
        if self.penalty == "slack":
            return SLACK
        return CIRCUIT if circuit else DIRECT

    @property
    def exponent(self) -> int | None:
        return None if self.penalty == "slack" else int(self.penalty[1])


def sweep_points(config: ExperimentConfig) -> list[SweepPoint]:
    return [SweepPoint(m0, pen, int(p)) for m0 in config.m0_grid() for pen in config.penalty_modes for p in config.layers]


def instance_seed(master_seed: int, instance_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(0, instance_id))


def run_seed(master_seed: int, instance_id: int, run_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(1, instance_id, run_id))


def make_instance(config: ExperimentConfig, m0, instance_id: int, a: int = 1):
    rng = np.random.default_rng(instance_seed(config.master_seed, instance_id))
    if config.benchmark == RANDOM_SPIN:
        inst = gen_random_spin(config.N, m0, a, config.lam, rng)
    elif config.benchmark == CONSTRAINT_ONLY:
        inst = gen_constraint_only(config.N, m0, a, config.lam)
    else:
        inst = gen_ev_problem(config.n_ev, config.T, tuple(config.e_required), config.e_max, a, config.lam, rng)
    inst.seed = int(config.master_seed)
    return inst


def _config_key(config: ExperimentConfig) -> str:
    return json.dumps(asdict(config), sort_keys=True)


@lru_cache(maxsize=64)
def _cached_setup(config_key: str, m0, instance_id: int, mode: str, a: int):
    config = ExperimentConfig.from_dict(json.loads(config_key))
    inst = make_instance(config, m0, instance_id, a)
    return inst, build_setup(inst, mode, a)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def run_task(task) -> dict:
    """Execute one run; returns a row dict (all values already formatted)."""
    config_key, point, instance_id, run_id = task
    config = ExperimentConfig.from_dict(json.loads(config_key))
    mode = point.qaoa_mode(config.circuit)
    a = point.exponent if point.exponent is not None else 2
    inst, setup = _cached_setup(config_key, point.m0, instance_id, mode, a)
    qcfg = QaoaConfig(
        p=point.p, constraint_mode=mode, exponent=a, shots=config.shots, layer_order=config.layer_order,
        optimizer=OptimizerConfig(xtol=config.xtol, ftol=config.ftol),
    )
    seed = run_seed(config.master_seed, instance_id, run_id)
    t0 = time.perf_counter()
    rec = run_single(inst, qcfg, seed, setup=setup)
    wall = time.perf_counter() - t0
    row = {
        "benchmark": config.benchmark,
        "instance_id": instance_id,
        "run_id": run_id,
        "mode": mode,
        "a": point.exponent,
        "p": point.p,
        "m0": point.m0,
        # slack and ancilla digits are stripped: the answer read out is x alone
        "success": run_succeeded(rec.problem_samples, inst.optimal_set),
        "success_full_state": run_succeeded(rec.samples, setup.optimal_full),
        "R": approximation_ratio(rec, inst.e0),
        "W": rec.feasible_weight,
        "baseline": setup.baseline,
        "E_final": rec.energy,
        "E_floor": rec.energy_floor,
        "E0": inst.e0,
        "n_evaluations": rec.n_evaluations,
        "termination_reason": rec.termination_reason,
        "seed": rec.seed,
        "wall_time": wall if config.timing else None,
    }
    return {k: _fmt(row[k]) for k in COLUMNS}


def row_key(row: dict) -> tuple:
    return tuple(row[k] for k in KEY_COLUMNS)


def plan_tasks(config: ExperimentConfig) -> Iterator[tuple]:
    key = _config_key(config)
    for point in sweep_points(config):
        for i in range(config.n_instances):
            for j in range(config.n_runs):
                yield key, point, i, j


def planned_rows(config: ExperimentConfig) -> list[dict]:
    rows = []
    for _, point, i, j in plan_tasks(config):
        mode = point.qaoa_mode(config.circuit)
        rows.append({"benchmark": config.benchmark, "instance_id": str(i), "run_id": str(j), "mode": mode,
                     "a": _fmt(point.exponent), "p": str(point.p), "m0": _fmt(point.m0)})
    return rows


def read_rows(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _task_key(config, task) -> tuple:
    _, point, i, j = task
    return (config.benchmark, str(i), str(j), point.qaoa_mode(config.circuit), _fmt(point.exponent),
            str(point.p), _fmt(point.m0))


def _worker_count(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _write_instances(config: ExperimentConfig, out: Path) -> None:
    records = []
    for m0 in config.m0_grid():
        for i in range(config.n_instances):
            inst = make_instance(config, m0, i)
            records.append({"instance_id": i, "m0": m0, **inst.to_dict()})
    (out / "instances.json").write_text(json.dumps(records, indent=1) + "\n")


def summarize(rows: list[dict]) -> list[dict]:
    """Per sweep point: r over instances, R and W over runs, each as median/q20/q80."""
    groups: dict = {}
    for row in rows:
        key = (row["benchmark"], row["mode"], row["a"], row["p"], row["m0"])
        groups.setdefault(key, []).append(row)
    out = []
    for (bench, mode, a, p, m0), grp in sorted(groups.items(), key=lambda kv: _sort_key(kv[0])):
        by_inst: dict = {}
        for row in grp:
            by_inst.setdefault(row["instance_id"], []).append(row)
        r_inst = [np.mean([int(x["success"]) for x in rs]) for _, rs in sorted(by_inst.items(), key=lambda kv: int(kv[0]))]
        r_full = [np.mean([int(x["success_full_state"]) for x in rs]) for _, rs in sorted(by_inst.items(), key=lambda kv: int(kv[0]))]
        R_vals = [float(x["R"]) for x in grp if x["R"] != ""]
        W_vals = [float(x["W"]) for x in grp]
        out.append({
            "benchmark": bench,
            "mode": mode,
            "a": int(a) if a != "" else None,
            "p": int(p),
            "m0": float(m0) if m0 != "" else None,
            "n_instances": len(by_inst),
            "n_runs": len(grp),
            "baseline": float(grp[0]["baseline"]),
            "r": aggregate(r_inst).as_dict(),
            "r_full_state": aggregate(r_full).as_dict(),
            "R": aggregate(R_vals).as_dict() if R_vals else None,
            "W": aggregate(W_vals).as_dict(),
            "variational_bound_ok": all(float(x["E_final"]) >= float(x["E_floor"]) - 1e-9 for x in grp),
        })
    return out


def _sort_key(key):
    bench, mode, a, p, m0 = key
    return (bench, float(m0) if m0 != "" else 0.0, mode, a, int(p))


def run_experiment(config: ExperimentConfig, progress: bool = False) -> Path:
    """Run (or resume) every planned run and write results.csv, summary.json, instances.json."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    results = out / "results.csv"
    done = {row_key(r) for r in read_rows(results)}
    tasks = [t for t in plan_tasks(config) if _task_key(config, t) not in done]
    log.info("%d runs planned, %d already present", len(tasks) + len(done), len(done))

    (out / "config.json").write_text(json.dumps(asdict(config), indent=1, sort_keys=True) + "\n")
    _write_instances(config, out)

    new_file = not results.exists() or results.stat().st_size == 0
    workers = _worker_count(config)
    with results.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        if new_file:
            writer.writeheader()
        if workers > 1 and tasks:
            import multiprocessing as mp

            with mp.get_context("spawn").Pool(workers) as pool:
                for k, row in enumerate(pool.imap(run_task, tasks, chunksize=4)):
                    writer.writerow(row)
                    fh.flush()
                    if progress and k % 100 == 0:
                        log.info("%d/%d runs", k + 1, len(tasks))
        else:
            for k, task in enumerate(tasks):
                writer.writerow(run_task(task))
                fh.flush()
                if progress and k % 100 == 0:
                    log.info("%d/%d runs", k + 1, len(tasks))

    rows = read_rows(results)
    (out / "summary.json").write_text(json.dumps(summarize(rows), indent=1) + "\n")
    return out
