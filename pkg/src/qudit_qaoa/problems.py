"""Benchmark problem generators and their JSON round trip.

Three families: a random Ising model under a total-magnetization bound, the
same bound with no cost at all (pure feasible-state sampling), and a small
EV charging schedule with per-vehicle energy requirements and per-step fuse
limits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hamiltonians import (
    DEFAULT_LAMBDA,
    ConstraintSpec,
    DiagonalHamiltonian,
    build_ising_diagonal,
    build_penalized_diagonal,
    extend_with_slack,
    feasible_mask,
    magnetization_constraint,
)
from .register import MixedRegister

RANDOM_SPIN = "random_spin"
CONSTRAINT_ONLY = "constraint_only"
EV_CHARGING = "ev_charging"
BENCHMARKS = (RANDOM_SPIN, CONSTRAINT_ONLY, EV_CHARGING)

# cost values closer than this to E0 count as degenerate optima
DEGENERACY_TOL = 1e-9


@dataclass(eq=False)
class ProblemInstance:
    benchmark: str
    register: MixedRegister
    cost: DiagonalHamiltonian
    constraints: tuple
    mask: np.ndarray
    e0: float
    optimal_set: np.ndarray
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.optimal_set) == 0:
            raise ValueError("instance has no optimal feasible state")
        if not self.mask[self.optimal_set].all():
            raise ValueError("optimal set contains unfeasible states")

    @property
    def n_feasible(self) -> int:
        return int(self.mask.sum())

    def with_exponent(self, a: int) -> tuple:
        return tuple(c.with_exponent(a) for c in self.constraints)

    def penalized(self, a: int | None = None) -> DiagonalHamiltonian:
        cons = self.constraints if a is None else self.with_exponent(a)
        return build_penalized_diagonal(self.cost, cons)

    def slack(self):
        return extend_with_slack(self.cost, self.constraints)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "seed": self.seed,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "constraints": [constraint_to_dict(c) for c in self.constraints],
            "e0": self.e0,
            "n_feasible": self.n_feasible,
            "optimal_set": [int(i) for i in self.optimal_set],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        p = data["params"]
        a = data["constraints"][0]["exponent"] if data["constraints"] else 1
        lam = data["constraints"][0]["lam"] if data["constraints"] else DEFAULT_LAMBDA
        if data["benchmark"] == RANDOM_SPIN:
            inst = random_spin_from_couplings(np.array(p["J"]), np.array(p["h"]), p["m0"], a, lam)
        elif data["benchmark"] == CONSTRAINT_ONLY:
            inst = gen_constraint_only(p["N"], p["m0"], a, lam)
        elif data["benchmark"] == EV_CHARGING:
            inst = ev_from_prices(np.array(p["prices"]), p["n_ev"], p["e_required"], p["e_max"], a, lam)
        else:
            raise ValueError(f"unknown benchmark {data['benchmark']!r}")
        inst.seed = data.get("seed")
        return inst

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


def constraint_to_dict(c: ConstraintSpec) -> dict:
    out = {"name": c.name, "sites": list(c.sites), "negated": list(c.negated), "lam": c.lam, "exponent": c.exponent}
    if c.is_hamming:
        out["weight_values"] = c.weight_values.tolist()
    else:
        out["config_values"] = c.config_values.tolist()
    return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def _rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng if isinstance(rng, (int, np.integer)) else None


def optimum(cost_values, mask) -> tuple[float, np.ndarray]:
    """Lowest feasible cost and every feasible index within DEGENERACY_TOL of it."""
    if not mask.any():
        raise ValueError("no feasible state")
    e0 = float(cost_values[mask].min())
    tol = DEGENERACY_TOL * max(1.0, abs(e0))
    return e0, np.flatnonzero(mask & (cost_values <= e0 + tol))


def _instance(benchmark, cost, constraints, seed, params):
    register = cost.register
    mask = feasible_mask(register, constraints)
    e0, opt = optimum(cost.values, mask)
    return ProblemInstance(benchmark, register, cost, tuple(constraints), mask, e0, opt, seed, params)


def random_spin_from_couplings(J, h, m0, a=1, lam=DEFAULT_LAMBDA, seed=None) -> ProblemInstance:
    n = len(h)
    register = MixedRegister((2,) * n)
    cost = build_ising_diagonal(J, h, register)
    params = {"N": n, "m0": float(m0), "J": np.asarray(J), "h": np.asarray(h)}
    return _instance(RANDOM_SPIN, cost, [magnetization_constraint(n, m0, a, lam)], seed, params)


def gen_random_spin(n: int, m0: float, a: int = 1, lam: float = DEFAULT_LAMBDA, rng=None) -> ProblemInstance:
    """Ising model with J_ij, h_i ~ N(0, 1) under S_tot <= m0.

    J is symmetric with zero diagonal (upper triangle drawn first, then h).
    """
    if n > 16:
        raise ValueError("exhaustive optimum search is limited to N <= 16")
    gen, seed = _rng(rng)
    J = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    J[iu] = gen.normal(size=len(iu[0]))
    J = J + J.T
    h = gen.normal(size=n)
    return random_spin_from_couplings(J, h, m0, a, lam, seed)


def gen_constraint_only(n: int, m0: float, a: int = 1, lam: float = DEFAULT_LAMBDA) -> ProblemInstance:
    register = MixedRegister((2,) * n)
    cost = DiagonalHamiltonian(register, np.zeros(register.total_dim))
    return _instance(CONSTRAINT_ONLY, cost, [magnetization_constraint(n, m0, a, lam)], None, {"N": n, "m0": float(m0)})


def ev_constraints(n_ev: int, T: int, e_required: Sequence[int], e_max: int, a=1, lam=DEFAULT_LAMBDA):
    """Energy requirement per vehicle and fuse limit per time step.

    Variable x_{n,t} lives on site n*T + t. The requirement
    E_n - sum_t x_{n,t} <= 0 is written with negated bits,
    P = E_n - T + sum_t (1 - x_{n,t}); the fuse limit is P = sum_n x_{n,t} - E_max.
    """
    cons = []
    for n, e in enumerate(e_required):
        sites = tuple(n * T + t for t in range(T))
        cons.append(ConstraintSpec(sites, lam, a, weight_values=e - T + np.arange(T + 1), negated=sites,
                                   name=f"ev{n} energy >= {e}"))
    for t in range(T):
        sites = tuple(n * T + t for n in range(n_ev))
        cons.append(ConstraintSpec(sites, lam, a, weight_values=np.arange(n_ev + 1) - e_max,
                                   name=f"step{t} load <= {e_max}"))
    return cons


def ev_from_prices(prices, n_ev, e_required, e_max, a=1, lam=DEFAULT_LAMBDA, seed=None) -> ProblemInstance:
    prices = np.asarray(prices, dtype=float)
    T = len(prices)
    e_required = [int(e) for e in e_required]
    if len(e_required) != n_ev:
        raise ValueError("one energy requirement per vehicle is needed")
    if any(not 0 <= e <= T for e in e_required) or e_max < 0:
        raise ValueError("energy requirements must lie in [0, T] and e_max must be >= 0")
    register = MixedRegister((2,) * (n_ev * T))
    x = register.digit_table.reshape(-1, n_ev, T)
    cost = DiagonalHamiltonian(register, (x * prices[None, None, :]).sum(axis=(1, 2)))
    cons = ev_constraints(n_ev, T, e_required, e_max, a, lam)
    mask = feasible_mask(register, cons)
    if not mask.any():
        raise ValueError(f"EV instance has no feasible schedule (e_required={e_required}, e_max={e_max}, T={T})")
    params = {"n_ev": n_ev, "T": T, "e_required": e_required, "e_max": e_max, "prices": prices}
    return _instance(EV_CHARGING, cost, cons, seed, params)


def gen_ev_problem(n_ev: int = 2, T: int = 4, e_required=(2, 2), e_max: int = 1, a: int = 1,
                   lam: float = DEFAULT_LAMBDA, rng=None, levels: int = 2) -> ProblemInstance:
    """EV charging with binary charging levels and prices c_t ~ U(0, 1)."""
    if levels != 2:
        raise NotImplementedError("only binary charging levels are implemented")
    if n_ev * T > 16:
        raise ValueError("exhaustive optimum search is limited to n_ev * T <= 16")
    gen, seed = _rng(rng)
    prices = gen.uniform(0.0, 1.0, size=T)
    return ev_from_prices(prices, n_ev, e_required, e_max, a, lam, seed)
