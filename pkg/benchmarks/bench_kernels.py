"""Time the numba and numpy kernel backends side by side.

    python benchmarks/bench_kernels.py [--sizes 9 12 15] [--repeat 200]

Per register size: each kernel alone, then one full QAOA energy evaluation
(p=3, slack mode on the constraint-only benchmark) which also pays the
Python-level overhead shared by both backends.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from qudit_qaoa import _kernels
from qudit_qaoa.problems import gen_constraint_only
from qudit_qaoa.qaoa import SLACK, VariationalParams, build_setup, energy


def bench_kernels(n_qubits: int, repeat: int, rng) -> dict:
    n = 2**n_qubits
    amps0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    diag = rng.normal(size=n)
    mask = rng.random(n) < 0.5
    src = rng.permutation(n)
    mat = np.ascontiguousarray(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    mid = n_qubits // 2
    outer, inner = 2**mid, 2 ** (n_qubits - mid - 1)
    rows = {}
    for name in _kernels.BACKENDS:
        k = _kernels.get(name)
        amps = amps0.copy()
        k.apply_site_matrix(amps, outer, 2, inner, mat)  # compile outside the timer
        cases = {
            "site_matrix": lambda: k.apply_site_matrix(amps, outer, 2, inner, mat),
            "phase": lambda: k.apply_phase(amps, diag, 0.1),
            "expectation": lambda: k.expectation(amps, diag),
            "gather": lambda: k.gather(amps, src),
            "masked_weight": lambda: k.masked_weight(amps, mask),
        }
        for case, fn in cases.items():
            fn()
            rows.setdefault(case, {})[name] = min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat
    return rows


def bench_ansatz(n_qubits: int, repeat: int, rng) -> dict:
    inst = gen_constraint_only(n_qubits, 0.5 if n_qubits % 2 else 0.0)
    setup = build_setup(inst, SLACK)
    p = 3
    vec = rng.uniform(0, 2 * np.pi, setup.n_params(p))
    params = VariationalParams.from_vector(vec, p, setup.has_gamma)
    out = {}
    before = _kernels.backend_name()
    try:
        for name in _kernels.BACKENDS:
            _kernels.set_backend(name)
            fn = lambda: energy(setup.state(params), setup.hamiltonian)  # noqa: E731
            fn()
            out[name] = min(timeit.repeat(fn, number=max(1, repeat // 10), repeat=3)) / max(1, repeat // 10)
    finally:
        _kernels.set_backend(before)
    return {f"energy_eval (dim {setup.register.total_dim})": out}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[9, 12, 15], help="qubit counts")
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    names = list(_kernels.BACKENDS)
    print(f"{'N':>3} {'case':<28}" + "".join(f"{n + ' [us]':>14}" for n in names) + (f"{'speedup':>10}" if len(names) > 1 else ""))
    for n in args.sizes:
        rows = bench_kernels(n, args.repeat, rng)
        rows.update(bench_ansatz(n, args.repeat, rng))
        for case, times in rows.items():
            line = f"{n:>3} {case:<28}" + "".join(f"{times[k] * 1e6:>14.1f}" for k in names)
            if len(names) > 1:
                line += f"{times['numpy'] / times['numba']:>9.2f}x"
            print(line)


if __name__ == "__main__":
    main()
