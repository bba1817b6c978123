"""Mixed-radix registers and dense state vectors.

Sites are ordered most-significant first: for ``dims = (d0, d1, ..., dn)``
the basis index of digits ``(k0, ..., kn)`` is ``k0*d1*...*dn + ... + kn``.
This convention is used everywhere (slack and ancilla sites are appended
after the problem sites, so stripping them is an integer division).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

NORM_GUARD = 1e-6


@dataclass(frozen=True)
class MixedRegister:
    """Ordered local dimensions of a register of qubits and qudits."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("register needs at least one site")
        if any(d < 2 for d in dims):
            raise ValueError(f"every site needs dimension >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @cached_property
    def total_dim(self) -> int:
        return prod(self.dims)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for d in reversed(self.dims):
            out.append(acc)
            acc *= d
        return tuple(reversed(out))

    def split(self, site: int) -> tuple[int, int, int]:
        """(outer, d, inner) block shape seen by a single-site operation."""
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} out of range for {self.n_sites} sites")
        return prod(self.dims[:site]), self.dims[site], prod(self.dims[site + 1:])

    @cached_property
    def digit_table(self) -> np.ndarray:
        """All basis digits, shape (total_dim, n_sites), read-only."""
        idx = np.arange(self.total_dim, dtype=np.int64)
        table = np.empty((self.total_dim, self.n_sites), dtype=np.int64)
        for site, (d, s) in enumerate(zip(self.dims, self.strides)):
            table[:, site] = (idx // s) % d
        table.setflags(write=False)
        return table

    def extend(self, dims: Iterable[int]) -> "MixedRegister":
        return MixedRegister(self.dims + tuple(dims))


def encode_digits(register: MixedRegister, digits: Sequence[int]) -> int:
    if len(digits) != register.n_sites:
        raise ValueError(f"expected {register.n_sites} digits, got {len(digits)}")
    index = 0
    for k, d in zip(digits, register.dims):
        k = int(k)
        if not 0 <= k < d:
            raise ValueError(f"digit {k} out of range for site dimension {d}")
        index = index * d + k
    return index


def decode_index(register: MixedRegister, index: int) -> tuple[int, ...]:
    index = int(index)
    if not 0 <= index < register.total_dim:
        raise ValueError(f"index {index} out of range [0, {register.total_dim})")
    digits = []
    for d in reversed(register.dims):
        index, k = divmod(index, d)
        digits.append(k)
    return tuple(reversed(digits))


class StateVector:
    """Dense amplitudes over a register's basis.

    The gate functions in this package update ``amplitudes`` in place and
    return the same object.
    """

    __slots__ = ("register", "amplitudes")

    def __init__(self, register: MixedRegister, amplitudes):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amps.shape != (register.total_dim,):
            raise ValueError(f"expected {register.total_dim} amplitudes, got shape {amps.shape}")
        self.register = register
        self.amplitudes = amps

    def copy(self) -> "StateVector":
        return StateVector(self.register, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def __repr__(self):
        return f"StateVector(dims={self.register.dims}, norm={self.norm():.12f})"


def uniform_state(register: MixedRegister, active_sites: Iterable[int] | None = None) -> StateVector:
    """Equal superposition over all basis states.

    With ``active_sites`` the superposition spans only those sites and every
    other site is pinned to level 0 (used for the phase ancilla).
    """
    if active_sites is None:
        amps = np.full(register.total_dim, 1.0 / np.sqrt(register.total_dim), dtype=np.complex128)
        return StateVector(register, amps)
    active = set(active_sites)
    digits = register.digit_table
    idle = [s for s in range(register.n_sites) if s not in active]
    support = np.all(digits[:, idle] == 0, axis=1) if idle else np.ones(register.total_dim, bool)
    amps = np.zeros(register.total_dim, dtype=np.complex128)
    amps[support] = 1.0 / np.sqrt(support.sum())
    return StateVector(register, amps)


def basis_state(register: MixedRegister, index: int) -> StateVector:
    amps = np.zeros(register.total_dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(register, amps)


def apply_single_site_unitary(state: StateVector, site: int, matrix, check_unitary: bool = True) -> StateVector:
    outer, d, inner = state.register.split(site)
    mat = np.ascontiguousarray(matrix, dtype=np.complex128)
    if mat.shape != (d, d):
        raise ValueError(f"site {site} has dimension {d}, matrix has shape {mat.shape}")
    if check_unitary and not np.allclose(mat @ mat.conj().T, np.eye(d), rtol=0, atol=1e-10):
        raise ValueError("matrix is not unitary within 1e-10")
    _kernels.apply_site_matrix(state.amplitudes, outer, d, inner, mat)
    return state


def apply_diagonal_phase(state: StateVector, diag, angle: float) -> StateVector:
    """Multiply amplitude k by exp(i * angle * diag[k])."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    if diag.shape != state.amplitudes.shape:
        raise ValueError(f"diagonal has length {diag.shape}, state has {state.amplitudes.shape}")
    _kernels.apply_phase(state.amplitudes, diag, angle)
    return state


def sample(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` basis indices from the Born distribution."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    total = probs.sum()
    if abs(total - 1.0) > NORM_GUARD:
        raise ValueError(f"state is not normalized (sum of probabilities {total})")
    cdf = np.cumsum(probs)
    draws = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, draws, side="right")
    return np.minimum(idx, len(probs) - 1).astype(np.int64)
