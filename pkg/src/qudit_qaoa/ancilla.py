"""Hamming-weight phases through one ancilla qudit and SUM gates.

The circuit for a phase g(m*) that depends only on

    m*(x) = sum_{i in summed} x_i + sum_{i in negated} (1 - x_i)

is: sigma_x on every negated qubit, one SUM gate from every listed qubit
onto the ancilla (which then holds m*), the single-qudit phase
diag(exp(i g(y))) on the ancilla, the inverse SUM gates and the sigma_x
layer again. The ancilla starts and ends in level 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .hamiltonians import ConstraintSpec, penalty_value
from .register import MixedRegister, StateVector


@dataclass(frozen=True, eq=False)
class HammingPhasePlan:
    qubit_sites: tuple[int, ...]
    negated_sites: tuple[int, ...]
    ancilla_site: int
    ancilla_dim: int
    g_table: np.ndarray

    def __post_init__(self):
        qs = tuple(int(s) for s in self.qubit_sites)
        ns = tuple(int(s) for s in self.negated_sites)
        if set(qs) & set(ns):
            raise ValueError("summed and negated qubit sets must be disjoint")
        if self.ancilla_site in qs or self.ancilla_site in ns:
            raise ValueError("the ancilla cannot also be a summed qubit")
        n = len(qs) + len(ns)
        if self.ancilla_dim < n + 1:
            raise ValueError(
                f"ancilla dimension {self.ancilla_dim} would wrap: {n} summed qubits need at least {n + 1} levels"
            )
        g = np.array(self.g_table, dtype=np.float64)
        if g.shape != (n + 1,):
            raise ValueError(f"g_table needs {n + 1} entries (one per Hamming weight)")
        g.setflags(write=False)
        object.__setattr__(self, "qubit_sites", qs)
        object.__setattr__(self, "negated_sites", ns)
        object.__setattr__(self, "g_table", g)

    @property
    def n_summed(self) -> int:
        return len(self.qubit_sites) + len(self.negated_sites)

    @property
    def infeasible_set(self) -> tuple[int, ...]:
        return tuple(int(m) for m in np.flatnonzero(self.g_table != 0))

    @property
    def n_infeasible(self) -> int:
        return len(self.infeasible_set)

    def check_register(self, register: MixedRegister) -> None:
        if register.dims[self.ancilla_site] != self.ancilla_dim:
            raise ValueError("register's ancilla dimension does not match the plan")
        for s in self.qubit_sites + self.negated_sites:
            if register.dims[s] != 2:
                raise ValueError(f"summed site {s} is not a qubit")


@dataclass(frozen=True)
class GateCount:
    sum_gates: int
    phase_shifts: int
    single_qubit_rotations: int
    # 2 * (number of infeasible Hamming weights), the count quoted alongside the penalty construction
    sum_gates_infeasible_values: int


def plan_for_constraint(constraint: ConstraintSpec, ancilla_site: int, ancilla_dim: int, angle: float) -> HammingPhasePlan:
    """Plan imprinting exp(i * angle * lam * g(P(m*))) for one Hamming-form constraint."""
    if not constraint.is_hamming:
        raise ValueError("the ancilla construction needs a Hamming-weight constraint")
    g = angle * constraint.lam * penalty_value(constraint.weight_values, constraint.exponent)
    return HammingPhasePlan(constraint.summed_sites, constraint.negated, ancilla_site, ancilla_dim, g)


@lru_cache(maxsize=256)
def _sum_source(register: MixedRegister, control: int, ancilla: int, inverse: bool) -> np.ndarray:
    # new[x, y] = old[x, y - x]  (forward); new[x, y] = old[x, y + x]  (inverse)
    digits = register.digit_table
    x = digits[:, control]
    y = digits[:, ancilla]
    d = register.dims[ancilla]
    y_src = (y + x) % d if inverse else (y - x) % d
    src = np.arange(register.total_dim, dtype=np.int64) + (y_src - y) * register.strides[ancilla]
    src.setflags(write=False)
    return src


@lru_cache(maxsize=256)
def _flip_source(register: MixedRegister, site: int) -> np.ndarray:
    bit = register.digit_table[:, site]
    src = np.arange(register.total_dim, dtype=np.int64) + (1 - 2 * bit) * register.strides[site]
    src.setflags(write=False)
    return src


def sum_gate(state: StateVector, control_site: int, ancilla_site: int, inverse: bool = False) -> StateVector:
    """|x>|y> -> |x>|y + x mod d> (or y - x with ``inverse``)."""
    reg = state.register
    if reg.dims[control_site] != 2:
        raise ValueError(f"SUM control site {control_site} must be a qubit")
    if control_site == ancilla_site:
        raise ValueError("control and target must differ")
    _kernels.gather(state.amplitudes, _sum_source(reg, control_site, ancilla_site, bool(inverse)))
    return state


def flip_qubit(state: StateVector, site: int) -> StateVector:
    """sigma_x on one qubit, as an exact basis permutation."""
    if state.register.dims[site] != 2:
        raise ValueError(f"site {site} is not a qubit")
    _kernels.gather(state.amplitudes, _flip_source(state.register, site))
    return state


def ancilla_phase(state: StateVector, plan: HammingPhasePlan) -> StateVector:
    phases = np.zeros(plan.ancilla_dim)
    phases[: plan.n_summed + 1] = plan.g_table
    outer, d, inner = state.register.split(plan.ancilla_site)
    mat = np.diag(np.exp(1j * phases)).astype(np.complex128)
    _kernels.apply_site_matrix(state.amplitudes, outer, d, inner, mat)
    return state


def apply_hamming_phase(state: StateVector, plan: HammingPhasePlan) -> StateVector:
    """Multiply each |x> (ancilla in level 0) by exp(i g(m*(x)))."""
    plan.check_register(state.register)
    if plan.n_summed == 0:
        # constant g: a global phase, no gates
        state.amplitudes *= np.exp(1j * plan.g_table[0])
        return state
    controls = plan.negated_sites + plan.qubit_sites
    for s in plan.negated_sites:
        flip_qubit(state, s)
    for s in controls:
        sum_gate(state, s, plan.ancilla_site)
    ancilla_phase(state, plan)
    for s in reversed(controls):
        sum_gate(state, s, plan.ancilla_site, inverse=True)
    for s in plan.negated_sites:
        flip_qubit(state, s)
    return state


def gate_count(plan: HammingPhasePlan) -> GateCount:
    n = plan.n_summed
    if n == 0:
        return GateCount(0, 0, 0, 0)
    return GateCount(
        sum_gates=2 * n,
        phase_shifts=1,
        single_qubit_rotations=2 * len(plan.negated_sites),
        sum_gates_infeasible_values=2 * plan.n_infeasible,
    )
