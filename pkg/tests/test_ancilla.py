import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_qaoa.ancilla import (
    HammingPhasePlan,
    apply_hamming_phase,
    flip_qubit,
    gate_count,
    plan_for_constraint,
    sum_gate,
)
from qudit_qaoa.hamiltonians import ConstraintSpec, penalty_value
from qudit_qaoa.register import MixedRegister, StateVector, apply_diagonal_phase, basis_state, encode_digits, uniform_state
from qudit_qaoa.verify import hamming_phase_oracle, random_plan_case


def _on_ancilla_zero(register, plan, psi):
    keep = register.digit_table[:, plan.ancilla_site] == 0
    psi.amplitudes[~keep] = 0
    psi.amplitudes /= np.linalg.norm(psi.amplitudes)
    return psi


@given(st.integers(0, 100_000))
def test_circuit_equals_diagonal(seed):
    register, plan, psi = random_plan_case(np.random.default_rng(seed))
    psi = _on_ancilla_zero(register, plan, psi)
    ref = apply_diagonal_phase(psi.copy(), hamming_phase_oracle(register, plan), 1.0)
    out = apply_hamming_phase(psi.copy(), plan)
    assert np.max(np.abs(out.amplitudes - ref.amplitudes)) < 1e-10
    assert gate_count(plan).sum_gates == 2 * plan.n_summed


def test_three_qubit_linear_phase():
    reg = MixedRegister((2, 2, 2, 4))
    plan = HammingPhasePlan((0, 1, 2), (), 3, 4, [0, 1, 2, 3])
    psi = uniform_state(reg, active_sites=[0, 1, 2])
    out = apply_hamming_phase(psi.copy(), plan)
    for bits in np.ndindex(2, 2, 2):
        k = encode_digits(reg, bits + (0,))
        assert np.isclose(out.amplitudes[k], np.exp(1j * sum(bits)) / np.sqrt(8))


def test_ancilla_returns_to_zero(rng):
    register, plan, psi = random_plan_case(rng)
    psi = _on_ancilla_zero(register, plan, psi)
    out = apply_hamming_phase(psi, plan)
    off = register.digit_table[:, plan.ancilla_site] != 0
    assert np.abs(out.amplitudes[off]).max() == 0


def test_plans_compose_additively(rng):
    reg = MixedRegister((2, 2, 2, 2, 5))
    p1 = HammingPhasePlan((0, 1), (2,), 4, 5, rng.normal(size=4))
    p2 = HammingPhasePlan((1, 3), (0, 2), 4, 5, rng.normal(size=5))
    psi = uniform_state(reg, active_sites=range(4))
    both = apply_hamming_phase(apply_hamming_phase(psi.copy(), p1), p2)
    diag = hamming_phase_oracle(reg, p1) + hamming_phase_oracle(reg, p2)
    assert np.allclose(both.amplitudes, apply_diagonal_phase(psi.copy(), diag, 1.0).amplitudes, atol=1e-12)


def test_sum_gate_action_and_inverse():
    reg = MixedRegister((2, 3))
    for x in range(2):
        for y in range(3):
            out = sum_gate(basis_state(reg, encode_digits(reg, (x, y))), 0, 1)
            assert out.probabilities()[encode_digits(reg, (x, (y + x) % 3))] == 1
    psi = StateVector(reg, np.arange(6) + 1j)
    back = sum_gate(sum_gate(psi.copy(), 0, 1), 0, 1, inverse=True)
    assert np.array_equal(back.amplitudes, psi.amplitudes)
    with pytest.raises(ValueError):
        sum_gate(psi, 1, 0)
    with pytest.raises(ValueError):
        flip_qubit(psi, 1)


def test_empty_plan_is_global_phase():
    reg = MixedRegister((2, 2))
    plan = HammingPhasePlan((), (), 1, 2, [0.4])
    assert gate_count(plan).sum_gates == 0
    out = apply_hamming_phase(uniform_state(reg, [0]), plan)
    assert np.allclose(out.amplitudes, np.exp(0.4j) * uniform_state(reg, [0]).amplitudes)


def test_plan_validation():
    with pytest.raises(ValueError):
        HammingPhasePlan((0, 1), (1,), 3, 4, np.zeros(4))
    with pytest.raises(ValueError):
        HammingPhasePlan((0, 1), (), 1, 3, np.zeros(3))
    with pytest.raises(ValueError):
        HammingPhasePlan((0, 1, 2), (), 3, 3, np.zeros(4))
    with pytest.raises(ValueError):
        HammingPhasePlan((0, 1), (), 2, 3, np.zeros(4))
    plan = HammingPhasePlan((0,), (), 1, 3, np.zeros(2))
    with pytest.raises(ValueError):
        plan.check_register(MixedRegister((2, 4)))
    with pytest.raises(ValueError):
        plan.check_register(MixedRegister((3, 3)))


def test_plan_for_constraint_and_counts():
    con = ConstraintSpec((0, 1, 2, 3), lam=4, exponent=2, weight_values=np.arange(5) - 2, negated=(1, 3))
    plan = plan_for_constraint(con, 4, 5, 0.3)
    assert plan.qubit_sites == (0, 2) and plan.negated_sites == (1, 3)
    assert np.allclose(plan.g_table, 0.3 * 4 * penalty_value(np.arange(5) - 2, 2))
    assert plan.infeasible_set == (3, 4)
    c = gate_count(plan)
    assert (c.sum_gates, c.phase_shifts, c.single_qubit_rotations, c.sum_gates_infeasible_values) == (8, 1, 4, 4)
    with pytest.raises(ValueError):
        plan_for_constraint(ConstraintSpec((0,), config_values=[0, 1]), 1, 2, 1.0)
