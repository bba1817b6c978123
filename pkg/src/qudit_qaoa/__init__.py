"""Mixed-radix qudit state-vector simulator and QAOA engine for inequality-constrained problems.

Constraints enter either as direct penalties lam * g(P) with g(y) = y^a for y > 0,
imprinted through an ancilla qudit, or through qudit slack variables.
"""
from .ancilla import HammingPhasePlan, apply_hamming_phase, gate_count, plan_for_constraint
from .experiment import ExperimentConfig, run_experiment
from .hamiltonians import (
    ConstraintSpec,
    DiagonalHamiltonian,
    build_ising_diagonal,
    build_penalized_diagonal,
    extend_with_slack,
    feasible_mask,
    magnetization_constraint,
    penalty_value,
)
from .metrics import aggregate, approximation_ratio, baseline, feasible_weight, success_rate
from .operators import MixerSpec, angular_momentum, apply_mixer_layer
from .optimizer import OptimizerConfig, minimize_powell
from .problems import ProblemInstance, gen_constraint_only, gen_ev_problem, gen_random_spin
from .qaoa import CIRCUIT, DIRECT, SLACK, QaoaConfig, VariationalParams, build_setup, run_single
from .register import MixedRegister, StateVector, sample, uniform_state

__version__ = "0.1.0"
