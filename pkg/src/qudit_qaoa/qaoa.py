"""Variational circuit assembly, energy objective and the single-run loop."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .ancilla import apply_hamming_phase, plan_for_constraint
from .hamiltonians import DiagonalHamiltonian, SlackExtension, feasible_mask
from .operators import MixerSpec, apply_mixer_layer
from .optimizer import OptimizerConfig, minimize_powell
from .problems import ProblemInstance
from .register import StateVector, apply_diagonal_phase, sample, uniform_state

DIRECT = "direct_penalty"
SLACK = "slack"
CIRCUIT = "circuit_penalty"
MODES = (DIRECT, SLACK, CIRCUIT)

COST_FIRST = "cost_first"
MIXER_FIRST = "mixer_first"

VARIATIONAL_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class QaoaConfig:
    p: int = 1
    constraint_mode: str = DIRECT
    exponent: int = 1
    shots: int = 64
    init_range: tuple = (0.0, 2 * np.pi)
    layer_order: str = COST_FIRST
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.p < 1 or self.shots < 1:
            raise ValueError("layers and shots must be >= 1")
        if self.constraint_mode not in MODES:
            raise ValueError(f"constraint_mode must be one of {MODES}")
        if self.layer_order not in (COST_FIRST, MIXER_FIRST):
            raise ValueError(f"layer_order must be {COST_FIRST!r} or {MIXER_FIRST!r}")


@dataclass
class VariationalParams:
    alphas: np.ndarray
    betas: np.ndarray
    gammas: np.ndarray | None = None

    @property
    def p(self) -> int:
        return len(self.alphas)

    @staticmethod
    def count(p: int, has_gamma: bool) -> int:
        return (3 if has_gamma else 2) * p

    @classmethod
    def from_vector(cls, vec, p: int, has_gamma: bool) -> "VariationalParams":
        vec = np.asarray(vec, dtype=float)
        if vec.size != cls.count(p, has_gamma):
            raise ValueError(f"expected {cls.count(p, has_gamma)} parameters, got {vec.size}")
        if has_gamma:
            return cls(vec[0::3], vec[1::3], vec[2::3])
        return cls(vec[0::2], vec[1::2], None)

    def to_vector(self) -> np.ndarray:
        cols = [self.alphas, self.betas] + ([self.gammas] if self.gammas is not None else [])
        return np.column_stack(cols).ravel()


class CircuitPenalty:
    """Cost phase realized as exp(i a H_C) followed by one ancilla circuit per constraint."""

    def __init__(self, cost_values, constraints, ancilla_site: int, ancilla_dim: int):
        self.cost_values = np.ascontiguousarray(cost_values, dtype=np.float64)
        self.constraints = tuple(constraints)
        self.ancilla_site = ancilla_site
        self.ancilla_dim = ancilla_dim

    def plans(self, alpha: float):
        return [plan_for_constraint(c, self.ancilla_site, self.ancilla_dim, alpha) for c in self.constraints]

    def apply(self, state: StateVector, alpha: float) -> StateVector:
        apply_diagonal_phase(state, self.cost_values, alpha)
        for plan in self.plans(alpha):
            apply_hamming_phase(state, plan)
        return state


def apply_ansatz(state0: StateVector, params: VariationalParams, cost: DiagonalHamiltonian, mixer: MixerSpec,
                 circuit: CircuitPenalty | None = None, layer_order: str = COST_FIRST) -> StateVector:
    """Return U(params)|state0>; ``state0`` is left untouched.

    Each layer applies the cost phase exp(i alpha H) and the mixer
    exp(i[beta X + gamma Lz^2]) in ``layer_order``. With ``circuit`` the cost
    phase goes through the ancilla construction instead of the diagonal.
    """
    if cost.register != state0.register:
        raise ValueError("cost Hamiltonian and state live on different registers")
    state = state0.copy()
    gammas = params.gammas if params.gammas is not None else np.zeros(params.p)
    values = np.ascontiguousarray(cost.values)
    levels = cost.levels if circuit is None else None
    for alpha, beta, gamma in zip(params.alphas, params.betas, gammas):
        if layer_order == MIXER_FIRST:
            apply_mixer_layer(state, mixer, beta, gamma)
        if levels is not None:
            uniq, inv = levels
            state.amplitudes *= np.exp(1j * alpha * uniq)[inv]
        elif circuit is None:
            _kernels.apply_phase(state.amplitudes, values, alpha)
        else:
            circuit.apply(state, alpha)
        if layer_order == COST_FIRST:
            apply_mixer_layer(state, mixer, beta, gamma)
    return state


def energy(state: StateVector, cost: DiagonalHamiltonian) -> float:
    return _kernels.expectation(state.amplitudes, np.ascontiguousarray(cost.values))


@dataclass(eq=False)
class QaoaSetup:
    """Everything a run needs for one problem in one constraint mode.

    ``hamiltonian`` is the operator whose expectation is minimized (H_C plus
    direct penalties, or the slack Hamiltonian); ``cost_values`` is H_C
    alone on the same register. ``problem_factor`` strips trailing slack or
    ancilla digits: problem index = full index // problem_factor.
    """

    problem: ProblemInstance
    mode: str
    exponent: int
    hamiltonian: DiagonalHamiltonian
    cost_values: np.ndarray
    mask: np.ndarray
    mixer: MixerSpec
    initial: StateVector
    problem_factor: int
    optimal_full: np.ndarray
    circuit: CircuitPenalty | None = None
    slack: SlackExtension | None = None

    @property
    def register(self):
        return self.hamiltonian.register

    @property
    def has_gamma(self) -> bool:
        return self.mixer.uses_gamma

    @property
    def energy_floor(self) -> float:
        return self.hamiltonian.min()

    @property
    def baseline(self) -> float:
        """Feasible weight of the initial state."""
        return _kernels.masked_weight(self.initial.amplitudes, self.mask)

    def n_params(self, p: int) -> int:
        return VariationalParams.count(p, self.has_gamma)

    def problem_index(self, index):
        return np.asarray(index) // self.problem_factor

    def state(self, params: VariationalParams, layer_order: str = COST_FIRST) -> StateVector:
        return apply_ansatz(self.initial, params, self.hamiltonian, self.mixer, self.circuit, layer_order)


def build_setup(problem: ProblemInstance, mode: str = DIRECT, exponent: int = 1) -> QaoaSetup:
    if mode == DIRECT:
        reg = problem.register
        return QaoaSetup(problem, mode, exponent, problem.penalized(exponent), problem.cost.values, problem.mask,
                         MixerSpec.default(reg), uniform_state(reg), 1, problem.optimal_set)
    if mode == SLACK:
        ext, ham = problem.slack()
        reg = ext.extended_register
        mask = feasible_mask(problem.register, problem.constraints, ext)
        factor = ext.slack_total
        optimal = np.flatnonzero(mask & np.isin(np.arange(reg.total_dim) // factor, problem.optimal_set))
        squeezed = [s for s in ext.slack_sites if s is not None]
        return QaoaSetup(problem, mode, exponent, ham, np.repeat(problem.cost.values, factor), mask,
                         MixerSpec.default(reg, squeezed=squeezed), uniform_state(reg), factor, optimal,
                         slack=ext)
    if mode == CIRCUIT:
        cons = problem.with_exponent(exponent)
        d_a = max(2, max(len(c.sites) + 1 for c in cons))
        reg = problem.register.extend([d_a])
        anc = reg.n_sites - 1
        at_zero = reg.digit_table[:, anc] == 0
        ham = DiagonalHamiltonian(reg, np.repeat(problem.penalized(exponent).values, d_a))
        cost_values = np.repeat(problem.cost.values, d_a)
        mask = np.repeat(problem.mask, d_a) & at_zero
        circuit = CircuitPenalty(cost_values, cons, anc, d_a)
        return QaoaSetup(problem, mode, exponent, ham, cost_values, mask,
                         MixerSpec.default(reg, idle=[anc]), uniform_state(reg, range(problem.register.n_sites)),
                         d_a, problem.optimal_set * d_a, circuit=circuit)
    raise ValueError(f"unknown constraint mode {mode!r}")


@dataclass(eq=False)
class RunRecord:
    seed: int | None
    params: np.ndarray
    energy: float
    n_evaluations: int
    termination_reason: str
    converged: bool
    samples: np.ndarray
    problem_samples: np.ndarray
    sample_energies: np.ndarray
    sample_costs: np.ndarray
    feasible_weight: float
    energy_floor: float
    final_state: StateVector | None = None


def _rng_from_seed(seed):
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed), int(seed.generate_state(1)[0])
    return np.random.default_rng(seed), seed


def run_single(problem, config: QaoaConfig, seed=None, setup: QaoaSetup | None = None) -> RunRecord:
    """Random init, Powell minimization of the energy, then N_S shots from the optimum."""
    if setup is None:
        setup = build_setup(problem, config.constraint_mode, config.exponent)
    rng, seed_value = _rng_from_seed(seed)
    p = config.p
    has_gamma = setup.has_gamma
    lo, hi = config.init_range
    x0 = rng.uniform(lo, hi, size=setup.n_params(p))

    ham = setup.hamiltonian

    def objective(vec):
        return energy(setup.state(VariationalParams.from_vector(vec, p, has_gamma), config.layer_order), ham)

    result = minimize_powell(objective, x0, config.optimizer)
    params = VariationalParams.from_vector(result.x_best, p, has_gamma)
    final = setup.state(params, config.layer_order)
    e_final = energy(final, ham)
    floor = setup.energy_floor
    if e_final < floor - VARIATIONAL_BOUND_TOL:
        raise RuntimeError(f"variational bound violated: E={e_final} < min eigenvalue {floor}")

    samples = sample(final, config.shots, rng)
    return RunRecord(
        seed=seed_value,
        params=result.x_best,
        energy=e_final,
        n_evaluations=result.n_evaluations,
        termination_reason=result.termination_reason,
        converged=result.converged,
        samples=samples,
        problem_samples=setup.problem_index(samples),
        sample_energies=ham.values[samples],
        sample_costs=setup.cost_values[samples],
        feasible_weight=_kernels.masked_weight(final.amplitudes, setup.mask),
        energy_floor=floor,
        final_state=final,
    )
