import csv
import json

import numpy as np
import pytest

from qudit_qaoa.experiment import (
    COLUMNS,
    ExperimentConfig,
    instance_seed,
    make_instance,
    planned_rows,
    read_rows,
    run_experiment,
    run_seed,
    summarize,
    sweep_points,
)
from qudit_qaoa.problems import ProblemInstance

SMALL = dict(benchmark="random_spin", N=4, m0_values=[-1.0, 1.0], penalty_modes=["a1", "slack"], layers=[1],
             n_instances=2, n_runs=3, shots=16, timing=False)


def small(tmp_path, **kw):
    return ExperimentConfig.from_dict({**SMALL, "output_dir": str(tmp_path), **kw})


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(benchmark="maxcut")
    with pytest.raises(ValueError):
        ExperimentConfig(n_runs=0)
    with pytest.raises(ValueError):
        ExperimentConfig(layers=[])
    with pytest.raises(ValueError):
        ExperimentConfig(penalty_modes=["a3"])
    with pytest.raises(ValueError):
        ExperimentConfig(lam=0)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})
    assert ExperimentConfig(benchmark="constraint_only", n_instances=7).n_instances == 1


def test_default_grid_and_full_scale():
    cfg = ExperimentConfig()
    assert cfg.m0_grid() == [k - 4.5 for k in range(10)]
    big = cfg.full_scale()
    assert (big.n_instances, big.n_runs) == (20, 50)
    assert len(sweep_points(big)) * big.n_instances * big.n_runs == 40000
    assert ExperimentConfig(benchmark="ev_charging").m0_grid() == [None]


def test_seeds_are_distinct_and_stable():
    states = {tuple(run_seed(0, i, j).generate_state(2)) for i in range(3) for j in range(5)}
    assert len(states) == 15
    assert np.array_equal(instance_seed(1, 2).generate_state(4), instance_seed(1, 2).generate_state(4))
    assert not np.array_equal(instance_seed(1, 2).generate_state(4), instance_seed(2, 2).generate_state(4))


def test_same_instance_across_sweep_points(tmp_path):
    cfg = small(tmp_path)
    a = make_instance(cfg, -1.0, 1)
    b = make_instance(cfg, 1.0, 1)
    assert np.array_equal(a.params["J"], b.params["J"])
    assert not np.array_equal(a.params["J"], make_instance(cfg, -1.0, 0).params["J"])


def test_run_writes_rows_summary_and_instances(tmp_path):
    cfg = small(tmp_path)
    out = run_experiment(cfg)
    rows = read_rows(out / "results.csv")
    assert len(rows) == 2 * 2 * 2 * 3
    with open(out / "results.csv") as fh:
        assert next(csv.reader(fh)) == list(COLUMNS)
    assert [r[k] for r in rows for k in ("instance_id", "run_id")] == [
        r[k] for r in planned_rows(cfg) for k in ("instance_id", "run_id")
    ]
    for r in rows:
        assert float(r["E_final"]) >= float(r["E_floor"]) - 1e-9
        assert r["wall_time"] == ""
        assert 0 <= float(r["W"]) <= 1
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary) == 4
    assert all(s["n_runs"] == 6 and s["n_instances"] == 2 for s in summary)
    assert summary == summarize(rows)
    inst = json.loads((out / "instances.json").read_text())
    assert len(inst) == 4
    back = ProblemInstance.from_dict(inst[0])
    assert back.e0 == pytest.approx(make_instance(cfg, -1.0, 0).e0)


def test_rerun_is_byte_identical(tmp_path):
    a = run_experiment(small(tmp_path / "a"))
    b = run_experiment(small(tmp_path / "b"))
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


def test_resume_completes_partial_file(tmp_path):
    full = run_experiment(small(tmp_path / "full"))
    part = tmp_path / "part"
    part.mkdir()
    lines = (full / "results.csv").read_text().splitlines(keepends=True)
    (part / "results.csv").write_text("".join(lines[:7]))
    run_experiment(small(part))
    assert (part / "results.csv").read_text() == "".join(lines)


def test_parallel_workers_match_serial(tmp_path):
    a = run_experiment(small(tmp_path / "serial", workers=1))
    b = run_experiment(small(tmp_path / "pool", workers=2))
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_circuit_flag_matches_direct_statistics(tmp_path):
    d = read_rows(run_experiment(small(tmp_path / "d", penalty_modes=["a1"], n_runs=2)) / "results.csv")
    c = read_rows(run_experiment(small(tmp_path / "c", penalty_modes=["a1"], n_runs=2, circuit=True)) / "results.csv")
    assert {r["mode"] for r in c} == {"circuit_penalty"}
    for x, y in zip(d, c):
        assert float(x["E_final"]) == pytest.approx(float(y["E_final"]), abs=1e-6)


def test_ev_and_constraint_only_benchmarks(tmp_path):
    ev = run_experiment(small(tmp_path / "ev", benchmark="ev_charging", n_ev=2, T=2, e_required=[1, 1],
                              penalty_modes=["a1"], n_instances=1, n_runs=2))
    rows = read_rows(ev / "results.csv")
    assert len(rows) == 2 and rows[0]["m0"] == ""
    co = run_experiment(small(tmp_path / "co", benchmark="constraint_only", penalty_modes=["a1"], n_runs=2))
    rows = read_rows(co / "results.csv")
    # E0 = 0: the approximation ratio is undefined
    assert {r["R"] for r in rows} == {""}
    assert json.loads((co / "summary.json").read_text())[0]["R"] is None
