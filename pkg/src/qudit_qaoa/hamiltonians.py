"""Diagonal cost Hamiltonians, inequality penalties and qudit slack extensions.

Conventions
-----------
* Qubit level 0 is spin up: sigma_z = +1 and spin-1/2 value s = +1/2.
* A constraint P(x) <= 0 is satisfied on the boundary P(x) = 0.
* Slack qudit level k carries slack value s = k.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from math import prod
from typing import Sequence

import numpy as np

from .register import MixedRegister

DEFAULT_LAMBDA = 4.0


@dataclass(frozen=True, eq=False)
class DiagonalHamiltonian:
    register: MixedRegister
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.register.total_dim,):
            raise ValueError(f"expected {self.register.total_dim} eigenvalues, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def min(self) -> float:
        return float(self.values.min())

    @cached_property
    def levels(self):
        """(distinct values, index into them) when there are few distinct values, else None.

        Penalty and slack diagonals take a handful of values, so the phase
        exp(i a H) costs one exponential per level plus a gather.
        """
        uniq, inv = np.unique(self.values, return_inverse=True)
        if len(uniq) * 8 > len(self.values):
            return None
        return uniq, inv.astype(np.int64)

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """One inequality P(x) <= 0 on a subset of sites.

    P is given either as a function of the generalized Hamming weight
    ``m* = sum_{i in sites, not negated} x_i + sum_{i in negated} (1 - x_i)``
    (``weight_values[m*]``, qubit sites only) or as a table over all digit
    configurations of ``sites`` (``config_values``, mixed-radix order,
    first listed site most significant).
    """

    sites: tuple[int, ...]
    lam: float = DEFAULT_LAMBDA
    exponent: int = 1
    weight_values: np.ndarray | None = None
    config_values: np.ndarray | None = None
    negated: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        negated = tuple(int(s) for s in self.negated)
        if not sites or len(set(sites)) != len(sites):
            raise ValueError("constraint needs distinct sites")
        if not set(negated) <= set(sites):
            raise ValueError("negated sites must be a subset of the constraint's sites")
        if not self.lam > 0:
            raise ValueError(f"penalty weight must be positive, got {self.lam}")
        if self.exponent not in (0, 1, 2):
            raise ValueError(f"penalty exponent must be 0, 1 or 2, got {self.exponent}")
        if (self.weight_values is None) == (self.config_values is None):
            raise ValueError("give exactly one of weight_values or config_values")
        if self.weight_values is not None:
            table = np.array(self.weight_values, dtype=np.float64)
            if table.shape != (len(sites) + 1,):
                raise ValueError(f"weight_values needs {len(sites) + 1} entries")
            object.__setattr__(self, "weight_values", table)
            table.setflags(write=False)
        else:
            if negated:
                raise ValueError("negated sites only apply to the Hamming-weight form")
            table = np.array(self.config_values, dtype=np.float64).ravel()
            object.__setattr__(self, "config_values", table)
            table.setflags(write=False)
        if not (table <= 0).any():
            raise ValueError(f"constraint {self.name or sites} has no feasible value")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "negated", negated)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def is_hamming(self) -> bool:
        return self.weight_values is not None

    @property
    def summed_sites(self) -> tuple[int, ...]:
        return tuple(s for s in self.sites if s not in self.negated)

    def value_table(self) -> np.ndarray:
        return self.weight_values if self.is_hamming else self.config_values

    def feasible_slack_values(self) -> np.ndarray:
        """Sorted distinct values of -P over the feasible entries of the table."""
        table = self.value_table()
        return np.unique(-table[table <= 0])

    def hamming_weight(self, register: MixedRegister) -> np.ndarray:
        digits = register.digit_table
        for s in self.sites:
            if register.dims[s] != 2:
                raise ValueError(f"Hamming-weight constraint reads site {s} of dimension {register.dims[s]}")
        m = np.zeros(register.total_dim, dtype=np.int64)
        if self.summed_sites:
            m += digits[:, list(self.summed_sites)].sum(axis=1)
        if self.negated:
            m += (1 - digits[:, list(self.negated)]).sum(axis=1)
        return m

    def values_on(self, register: MixedRegister) -> np.ndarray:
        """P(x) for every basis index of ``register``."""
        if max(self.sites) >= register.n_sites:
            raise IndexError(f"constraint reads site {max(self.sites)}, register has {register.n_sites}")
        if self.is_hamming:
            return self.weight_values[self.hamming_weight(register)]
        sub_dims = [register.dims[s] for s in self.sites]
        if self.config_values.shape != (prod(sub_dims),):
            raise ValueError("config_values length does not match the sites' dimensions")
        digits = register.digit_table[:, list(self.sites)]
        idx = np.zeros(register.total_dim, dtype=np.int64)
        for col, d in enumerate(sub_dims):
            idx = idx * d + digits[:, col]
        return self.config_values[idx]

    def with_exponent(self, a: int) -> "ConstraintSpec":
        return replace(self, exponent=a)


@dataclass(frozen=True, eq=False)
class SlackExtension:
    """Problem register extended by one slack qudit per constraint.

    Constraints whose only feasible value is P = 0 get slack dimension 1; no
    site is added for them (``slack_sites`` entry is None).
    """

    original_register: MixedRegister
    slack_dims: tuple[int, ...]
    slack_sites: tuple
    extended_register: MixedRegister

    @property
    def slack_total(self) -> int:
        return prod(self.slack_dims)

    def problem_index(self, index):
        return np.asarray(index) // self.slack_total


def build_ising_diagonal(J, h, register: MixedRegister) -> DiagonalHamiltonian:
    """sum_i h_i s_i + sum_{i,j} J_ij s_i s_j with s = +1 on level 0, -1 on level 1.

    The double sum runs over all ordered pairs.
    """
    J = np.asarray(J, dtype=float)
    h = np.asarray(h, dtype=float)
    n = len(h)
    if register.dims != (2,) * n:
        raise ValueError("Ising diagonal needs an all-qubit register with one site per field")
    if J.shape != (n, n) or not np.allclose(J, J.T, rtol=0, atol=1e-12):
        raise ValueError("J must be a symmetric N x N matrix")
    sigma = 1.0 - 2.0 * register.digit_table
    values = sigma @ h + np.einsum("ki,ij,kj->k", sigma, J, sigma)
    return DiagonalHamiltonian(register, values)


def penalty_value(y, a: int):
    """y**a for y > 0, zero otherwise (0**0 is never reached: y = 0 is feasible)."""
    if a not in (0, 1, 2):
        raise ValueError(f"penalty exponent must be 0, 1 or 2, got {a}")
    y = np.asarray(y, dtype=float)
    out = np.where(y > 0, np.power(np.where(y > 0, y, 1.0), a), 0.0)
    return float(out) if out.ndim == 0 else out


def penalty_diagonal(register: MixedRegister, constraints: Sequence[ConstraintSpec]) -> np.ndarray:
    total = np.zeros(register.total_dim)
    for c in constraints:
        total += c.lam * penalty_value(c.values_on(register), c.exponent)
    return total


def build_penalized_diagonal(h_c: DiagonalHamiltonian, constraints: Sequence[ConstraintSpec]) -> DiagonalHamiltonian:
    return DiagonalHamiltonian(h_c.register, h_c.values + penalty_diagonal(h_c.register, constraints))


def magnetization_constraint(n: int, m0: float, a: int = 1, lam: float = DEFAULT_LAMBDA) -> ConstraintSpec:
    """S_tot - m0 <= 0 with S_tot the sum of spin-1/2 values over all n qubits.

    With m the number of down spins (level 1), S_tot = n/2 - m.
    """
    shift = m0 + n / 2
    if abs(shift - round(shift)) > 1e-9 or not 0 <= round(shift) <= n:
        raise ValueError(f"m0={m0} is not on the grid -n/2, -n/2+1, ..., n/2 for n={n}")
    m = np.arange(n + 1)
    return ConstraintSpec(
        sites=tuple(range(n)),
        lam=lam,
        exponent=a,
        weight_values=n / 2 - m - m0,
        name=f"S_tot <= {m0}",
    )


def slack_dimension(constraint: ConstraintSpec) -> int:
    values = constraint.feasible_slack_values()
    d = len(values)
    if not np.array_equal(values, np.arange(d)):
        raise ValueError(
            f"constraint {constraint.name or constraint.sites}: feasible -P values {values.tolist()} "
            "are not the consecutive integers 0..d-1 required for a qudit slack"
        )
    return d


def extend_with_slack(h_c: DiagonalHamiltonian, constraints: Sequence[ConstraintSpec]):
    """Append one slack qudit per constraint and build H_C + sum_r lam_r (P_r + S_r)^2."""
    register = h_c.register
    slack_dims = tuple(slack_dimension(c) for c in constraints)
    extra = [d for d in slack_dims if d > 1]
    sites, nxt = [], register.n_sites
    for d in slack_dims:
        if d > 1:
            sites.append(nxt)
            nxt += 1
        else:
            sites.append(None)
    extended = register.extend(extra)
    ext = SlackExtension(register, slack_dims, tuple(sites), extended)

    n_slack = ext.slack_total
    values = np.repeat(h_c.values, n_slack)
    digits = extended.digit_table
    for c, site in zip(constraints, ext.slack_sites):
        p = np.repeat(c.values_on(register), n_slack)
        s = digits[:, site] if site is not None else 0
        values = values + c.lam * (p + s) ** 2
    return ext, DiagonalHamiltonian(extended, values)


def feasible_mask(register: MixedRegister, constraints: Sequence[ConstraintSpec], slack: SlackExtension | None = None) -> np.ndarray:
    """Feasibility per basis index; over the slack-extended register when ``slack`` is given."""
    mask = np.ones(register.total_dim, dtype=bool)
    for c in constraints:
        mask &= c.values_on(register) <= 0
    if slack is None:
        return mask
    if slack.original_register != register:
        raise ValueError("slack extension belongs to a different register")
    n_slack = slack.slack_total
    ext_mask = np.repeat(mask, n_slack)
    digits = slack.extended_register.digit_table
    for c, site in zip(constraints, slack.slack_sites):
        p = np.repeat(c.values_on(register), n_slack)
        s = digits[:, site] if site is not None else 0
        ext_mask &= np.abs(p + s) < 1e-9
    return ext_mask
