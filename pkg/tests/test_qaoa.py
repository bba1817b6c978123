import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_qaoa.metrics import success_rate
from qudit_qaoa.problems import gen_constraint_only, gen_ev_problem, gen_random_spin, random_spin_from_couplings
from qudit_qaoa.qaoa import (
    CIRCUIT,
    DIRECT,
    MIXER_FIRST,
    SLACK,
    QaoaConfig,
    VariationalParams,
    build_setup,
    energy,
    run_single,
)


def params_from(rng, p, has_gamma):
    return VariationalParams.from_vector(rng.uniform(0, 2 * np.pi, VariationalParams.count(p, has_gamma)), p, has_gamma)


def test_params_round_trip(rng):
    vec = rng.normal(size=9)
    par = VariationalParams.from_vector(vec, 3, True)
    assert np.array_equal(par.alphas, vec[0::3]) and np.array_equal(par.gammas, vec[2::3])
    assert np.array_equal(par.to_vector(), vec)
    assert np.array_equal(VariationalParams.from_vector(vec[:4], 2, False).to_vector(), vec[:4])
    with pytest.raises(ValueError):
        VariationalParams.from_vector(vec, 2, False)


def test_config_validation():
    with pytest.raises(ValueError):
        QaoaConfig(p=0)
    with pytest.raises(ValueError):
        QaoaConfig(constraint_mode="x")
    with pytest.raises(ValueError):
        QaoaConfig(layer_order="x")


def test_zero_mixer_keeps_probabilities():
    setup = build_setup(gen_random_spin(4, 0.0, rng=1), DIRECT, 1)
    st_ = setup.state(VariationalParams(np.array([1.3]), np.array([0.0])))
    assert np.allclose(st_.probabilities(), 1 / 16)


def test_energy_of_uniform_state_is_mean():
    setup = build_setup(gen_random_spin(4, 0.0, rng=1), DIRECT, 2)
    assert energy(setup.initial, setup.hamiltonian) == pytest.approx(setup.hamiltonian.values.mean())


@given(st.integers(0, 10_000), st.integers(1, 3), st.sampled_from([0, 1, 2]))
def test_circuit_mode_reproduces_direct_mode(seed, p, a):
    rng = np.random.default_rng(seed)
    inst = gen_random_spin(4, float(rng.integers(-2, 3)), rng=rng)
    direct = build_setup(inst, DIRECT, a)
    circ = build_setup(inst, CIRCUIT, a)
    par = params_from(rng, p, False)
    psi_d = direct.state(par)
    psi_c = circ.state(par)
    d_a = circ.problem_factor
    amps = psi_c.amplitudes.reshape(-1, d_a)
    assert np.allclose(amps[:, 0], psi_d.amplitudes, atol=1e-10)
    assert np.abs(amps[:, 1:]).max() < 1e-12
    assert energy(psi_c, circ.hamiltonian) == pytest.approx(energy(psi_d, direct.hamiltonian), abs=1e-9)


def test_circuit_mode_on_ev_with_negated_constraints(rng):
    inst = gen_ev_problem(2, 3, (1, 2), 1, a=1, rng=2)
    direct, circ = build_setup(inst, DIRECT, 2), build_setup(inst, CIRCUIT, 2)
    par = params_from(rng, 2, False)
    amps = circ.state(par).amplitudes.reshape(-1, circ.problem_factor)
    assert np.allclose(amps[:, 0], direct.state(par).amplitudes, atol=1e-10)


def test_setup_shapes():
    inst = gen_random_spin(5, 0.5, rng=3)
    s = build_setup(inst, SLACK)
    assert s.register.dims == (2,) * 5 + (4,)
    assert s.has_gamma and s.n_params(2) == 6
    assert s.baseline == pytest.approx(inst.n_feasible / (32 * 4))
    assert set(s.problem_index(s.optimal_full)) == set(inst.optimal_set)
    c = build_setup(inst, CIRCUIT, 1)
    assert c.register.dims == (2,) * 5 + (6,) and not c.has_gamma
    assert c.baseline == pytest.approx(inst.n_feasible / 32)
    with pytest.raises(ValueError):
        build_setup(inst, "nope")


def test_qubit_slack_adds_no_squeezing_parameter():
    inst = gen_random_spin(3, -0.5, rng=3)
    s = build_setup(inst, SLACK)
    assert s.register.dims == (2, 2, 2, 2) and not s.has_gamma


def test_run_is_deterministic_and_bounded():
    inst = gen_random_spin(5, -0.5, rng=4)
    cfg = QaoaConfig(p=2, constraint_mode=SLACK)
    r1, r2 = run_single(inst, cfg, 99), run_single(inst, cfg, 99)
    assert np.array_equal(r1.params, r2.params) and np.array_equal(r1.samples, r2.samples)
    assert r1.energy >= r1.energy_floor - 1e-9
    assert len(r1.samples) == 64 and 0 <= r1.feasible_weight <= 1
    assert np.array_equal(r1.problem_samples, r1.samples // 3)  # slack d = N/2 + 1 + m0


def test_seed_sequence_is_accepted():
    inst = gen_constraint_only(3, 0.5)
    rec = run_single(inst, QaoaConfig(), np.random.SeedSequence(5, spawn_key=(1, 0, 0)))
    again = run_single(inst, QaoaConfig(), np.random.SeedSequence(5, spawn_key=(1, 0, 0)))
    assert rec.seed == again.seed and np.array_equal(rec.samples, again.samples)


def test_small_unconstrained_ising_finds_ground_state():
    J = np.array([[0.0, 0.8], [0.8, 0.0]])
    inst = random_spin_from_couplings(J, np.array([0.3, -0.5]), m0=1.0)
    assert len(inst.optimal_set) == 1
    runs = [run_single(inst, QaoaConfig(p=3), s) for s in range(50)]
    assert success_rate(runs, inst.optimal_set) > 0
    assert max(r.feasible_weight for r in runs) == pytest.approx(1.0)


def test_mixer_first_single_layer_is_trivial_on_qubits():
    # the uniform state is an eigenstate of the qubit mixer, so a leading
    # mixer only adds a global phase and p=1 cannot move any weight
    inst = gen_random_spin(4, -1.0, rng=5)
    setup = build_setup(inst, DIRECT, 1)
    rng = np.random.default_rng(0)
    for _ in range(5):
        par = params_from(rng, 1, False)
        probs = setup.state(par, MIXER_FIRST).probabilities()
        assert np.allclose(probs, 1 / 16)
    assert not np.allclose(setup.state(par).probabilities(), 1 / 16)


@pytest.mark.parametrize("make", [lambda: gen_random_spin(9, -0.5, rng=3), lambda: gen_ev_problem(rng=2)])
def test_full_runs_agree_between_direct_and_circuit(make):
    inst = make()
    for a in (0, 1, 2):
        d = run_single(inst, QaoaConfig(constraint_mode=DIRECT, exponent=a), 5)
        c = run_single(inst, QaoaConfig(constraint_mode=CIRCUIT, exponent=a), 5)
        # rounding-level differences may shift a line search by one evaluation
        assert abs(d.energy - c.energy) < 1e-6
        assert abs(d.feasible_weight - c.feasible_weight) < 1e-4
        assert np.array_equal(d.problem_samples, c.problem_samples)
        assert np.allclose(d.sample_energies, c.sample_energies)
