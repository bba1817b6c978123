"""Cross-module self checks: each compares the simulator to an independent oracle."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _kernels
from .ancilla import HammingPhasePlan, apply_hamming_phase, gate_count
from .hamiltonians import feasible_mask
from .metrics import feasible_weight
from .optimizer import OptimizerConfig, minimize_powell
from .problems import gen_constraint_only, gen_ev_problem, gen_random_spin
from .qaoa import DIRECT, SLACK, build_setup
from .register import MixedRegister, StateVector, apply_diagonal_phase


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _random_state(register, rng) -> StateVector:
    v = rng.normal(size=register.total_dim) + 1j * rng.normal(size=register.total_dim)
    return StateVector(register, v / np.linalg.norm(v))


def random_plan_case(rng, max_qubits: int = 6):
    """Random qubit count, negated subset, g table, extra idle qudit, ancilla slot and input state."""
    n = int(rng.integers(1, max_qubits + 1))
    d_a = n + 1 + int(rng.integers(0, 2))
    dims = [2] * n + [int(rng.integers(2, 4))]
    anc = int(rng.integers(0, len(dims) + 1))
    dims.insert(anc, d_a)
    register = MixedRegister(tuple(dims))
    qubits = [s for s in range(register.n_sites) if s != anc and dims[s] == 2][:n]
    flags = rng.random(n) < 0.5
    plan = HammingPhasePlan(
        tuple(q for q, f in zip(qubits, flags) if not f),
        tuple(q for q, f in zip(qubits, flags) if f),
        anc, d_a, rng.normal(size=n + 1) * 3,
    )
    return register, plan, _random_state(register, rng)


def hamming_phase_oracle(register, plan) -> np.ndarray:
    """Diagonal the circuit should imprint: g[m*] when the ancilla digit is 0."""
    digits = register.digit_table
    m = np.zeros(register.total_dim, dtype=np.int64)
    for s in plan.qubit_sites:
        m += digits[:, s]
    for s in plan.negated_sites:
        m += 1 - digits[:, s]
    return plan.g_table[m]


def check_circuit(n_cases: int = 100, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, counts_ok = 0.0, True
    for _ in range(n_cases):
        register, plan, psi = random_plan_case(rng)
        # compare on the ancilla-0 subspace, where the construction is defined
        at_zero = register.digit_table[:, plan.ancilla_site] == 0
        psi.amplitudes[~at_zero] = 0
        psi.amplitudes /= np.linalg.norm(psi.amplitudes)
        ref = psi.copy()
        apply_diagonal_phase(ref, hamming_phase_oracle(register, plan), 1.0)
        out = apply_hamming_phase(psi.copy(), plan)
        worst = max(worst, float(np.max(np.abs(out.amplitudes - ref.amplitudes))))
        counts_ok &= gate_count(plan).sum_gates == 2 * plan.n_summed
    ok = worst < 1e-10 and counts_ok
    return CheckResult("circuit vs diagonal", ok, f"max deviation {worst:.2e}, SUM count = 2N: {counts_ok}")


def check_magnetization_counts(n: int = 9) -> CheckResult:
    bad = []
    for k in range(n + 1):
        m0 = k - n / 2
        inst = gen_constraint_only(n, m0)
        # S_tot <= m0  <=>  at least n - k down spins
        expected = sum(comb(n, j) for j in range(n - k, n + 1))
        if inst.n_feasible != expected:
            bad.append((m0, inst.n_feasible, expected))
    return CheckResult(f"feasible counts N={n}", not bad, "binomial sums agree" if not bad else f"mismatch {bad}")


def _ev_oracle_count(n_ev, T, e_required, e_max) -> int:
    count = 0
    rows = list(itertools.product((0, 1), repeat=T))
    for sched in itertools.product(rows, repeat=n_ev):
        if all(sum(row) >= e for row, e in zip(sched, e_required)) and all(
            sum(row[t] for row in sched) <= e_max for t in range(T)
        ):
            count += 1
    return count


def check_ev(n_ev: int = 2, T: int = 4, e_required=(2, 2), e_max: int = 1) -> CheckResult:
    inst = gen_ev_problem(n_ev, T, e_required, e_max, rng=0)
    oracle = _ev_oracle_count(n_ev, T, e_required, e_max)
    ext, _ = inst.slack()
    dim = ext.extended_register.total_dim
    expect_dim = 2 ** (n_ev * T) * int(np.prod(ext.slack_dims))
    ok = inst.n_feasible == oracle and dim == expect_dim
    return CheckResult(
        "EV feasibility",
        ok,
        f"{inst.n_feasible} feasible of {inst.register.total_dim} (enumeration: {oracle}); "
        f"slack dims {list(ext.slack_dims)}, extended dim {dim}",
    )


def check_slack_completeness(n: int = 5) -> CheckResult:
    """Every feasible x has exactly one zero-penalty slack value, unfeasible x none."""
    bad = []
    for k in range(n + 1):
        inst = gen_constraint_only(n, k - n / 2)
        ext, ham = inst.slack()
        zero = np.isclose(ham.values, 0.0, atol=1e-12).reshape(-1, ext.slack_total)
        if not np.array_equal(zero.sum(axis=1), inst.mask.astype(int)):
            bad.append(k - n / 2)
        mask = feasible_mask(inst.register, inst.constraints, ext)
        if not np.array_equal(mask, zero.ravel()):
            bad.append(k - n / 2)
    return CheckResult("slack completeness", not bad, "one zero-penalty slack per feasible state" if not bad else f"m0 {bad}")


def check_ground_energy(n: int = 6, trials: int = 5, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m0 = float(rng.integers(0, n + 1)) - n / 2
        inst = gen_random_spin(n, m0, rng=rng)
        J, h = inst.params["J"], inst.params["h"]
        best = np.inf
        for spins in itertools.product((1, -1), repeat=n):
            s = np.array(spins)
            if s.sum() / 2 <= m0 + 1e-12:
                best = min(best, float(h @ s + s @ J @ s))
        worst = max(worst, abs(best - inst.e0))
    return CheckResult("brute-force E0", worst < 1e-9, f"max |E0 - enumeration| {worst:.1e}")


def check_baseline(seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    problems = [gen_random_spin(5, m0, rng=rng) for m0 in (-1.5, 0.5)] + [gen_ev_problem(2, 3, (1, 1), 1, rng=rng)]
    for inst in problems:
        for mode in (DIRECT, SLACK):
            setup = build_setup(inst, mode)
            expected = setup.mask.sum() / setup.register.total_dim
            worst = max(worst, abs(feasible_weight(setup.initial, setup.mask) - expected))
    return CheckResult("uniform-state baseline", worst < 1e-12, f"max deviation {worst:.1e}")


def check_powell() -> CheckResult:
    def rosen(x):
        return 100.0 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2

    res = minimize_powell(rosen, [-1.2, 1.0], OptimizerConfig(xtol=1e-8, ftol=1e-12, max_evaluations=2000))
    ok = res.f_best < 1e-6
    return CheckResult("Powell on Rosenbrock", ok, f"f={res.f_best:.2e} after {res.n_evaluations} evaluations")


def check_backends(seed: int = 4) -> CheckResult:
    if len(_kernels.BACKENDS) < 2:
        return CheckResult("kernel backends", True, "numba unavailable; numpy only")
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=96) + 1j * rng.normal(size=96)
    diag = rng.normal(size=96)
    mat = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    mask = rng.random(96) < 0.4
    src = rng.permutation(96)
    a, b = _kernels.get("numpy"), _kernels.get("numba")
    x, y = amps.copy(), amps.copy()
    a.apply_site_matrix(x, 4, 3, 8, mat)
    b.apply_site_matrix(y, 4, 3, 8, mat)
    a.apply_phase(x, diag, 0.7)
    b.apply_phase(y, diag, 0.7)
    ex, ey = a.expectation(x, diag), b.expectation(y, diag)
    wx, wy = a.masked_weight(x, mask), b.masked_weight(y, mask)
    a.gather(x, src)
    b.gather(y, src)
    dev = max(float(np.max(np.abs(x - y))), abs(ex - ey), abs(wx - wy))
    return CheckResult("kernel backends", dev < 1e-10, f"numba vs numpy max deviation {dev:.1e}")


CHECKS = (
    check_circuit,
    check_magnetization_counts,
    check_ev,
    check_slack_completeness,
    check_ground_energy,
    check_baseline,
    check_powell,
    check_backends,
)


def run_checks(checks=CHECKS) -> list[CheckResult]:
    results = []
    for fn in checks:
        t0 = time.perf_counter()
        try:
            res = fn()
        except Exception as exc:  # a crashing check is a failing check
            res = CheckResult(fn.__name__, False, f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
