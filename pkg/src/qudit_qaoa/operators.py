"""Spin operators, small Hermitian exponentials and the QAOA mixer layer."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels
from .register import MixedRegister, StateVector

QUBIT_X = "qubit_x"
QUDIT_SQUEEZED = "qudit_squeezed"
MIXER_KINDS = (QUBIT_X, QUDIT_SQUEEZED)


@dataclass(frozen=True, eq=False)
class AngularMomentumSet:
    """Spin-l matrices for a d-level site, l = (d-1)/2.

    Basis level k carries Lz eigenvalue l - k, so level 0 is the top of the
    multiplet.
    """

    d: int
    lz: np.ndarray
    lx: np.ndarray

    @property
    def ell(self) -> float:
        return (self.d - 1) / 2

    @property
    def lplus(self) -> np.ndarray:
        # level k-1 sits one unit of Lz above level k
        m = self.lz[1:]
        out = np.zeros((self.d, self.d))
        out[np.arange(self.d - 1), np.arange(1, self.d)] = np.sqrt(self.ell * (self.ell + 1) - m * (m + 1))
        return out

    @property
    def ly(self) -> np.ndarray:
        lp = self.lplus
        return (lp - lp.T) / 2j

    @property
    def lz_matrix(self) -> np.ndarray:
        return np.diag(self.lz)

    @property
    def lz2(self) -> np.ndarray:
        return np.diag(self.lz**2)


@lru_cache(maxsize=None)
def angular_momentum(d: int) -> AngularMomentumSet:
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    ell = (d - 1) / 2
    lz = ell - np.arange(d, dtype=float)
    m = lz[1:]
    off = 0.5 * np.sqrt(ell * (ell + 1) - m * (m + 1))
    lx = np.diag(off, 1) + np.diag(off, -1)
    lz.setflags(write=False)
    lx.setflags(write=False)
    return AngularMomentumSet(d, lz, lx)


def expm_hermitian(h, angle: float) -> np.ndarray:
    """exp(i * angle * h) for a small Hermitian matrix, by eigendecomposition."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > 32:
        raise ValueError("expm_hermitian is meant for local dimensions <= 32")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if not np.allclose(h, h.conj().T, rtol=0, atol=1e-12 * scale):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * angle * w)) @ v.conj().T


def qubit_x_rotation(beta: float) -> np.ndarray:
    """exp(i * beta * sigma_x)."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


@dataclass(frozen=True)
class MixerSpec:
    """Mixer assignment per site: ``qubit_x``, ``qudit_squeezed`` or None (idle)."""

    register: MixedRegister
    kinds: tuple

    def __post_init__(self):
        kinds = tuple(self.kinds)
        if len(kinds) != self.register.n_sites:
            raise ValueError("one mixer kind per register site is required")
        for site, (kind, d) in enumerate(zip(kinds, self.register.dims)):
            if kind is None:
                continue
            if kind not in MIXER_KINDS:
                raise ValueError(f"unknown mixer kind {kind!r}")
            if kind == QUBIT_X and d != 2:
                raise ValueError(f"qubit_x mixer on site {site} of dimension {d}")
        object.__setattr__(self, "kinds", kinds)

    @classmethod
    def default(cls, register: MixedRegister, squeezed=(), idle=()) -> "MixerSpec":
        """sigma_x on qubits, squeezed mixer on qudits and on the ``squeezed`` sites."""
        squeezed, idle = set(squeezed), set(idle)
        kinds = []
        for site, d in enumerate(register.dims):
            if site in idle:
                kinds.append(None)
            elif d == 2 and site not in squeezed:
                kinds.append(QUBIT_X)
            else:
                kinds.append(QUDIT_SQUEEZED)
        return cls(register, tuple(kinds))

    @property
    def active_sites(self) -> tuple[int, ...]:
        return tuple(s for s, k in enumerate(self.kinds) if k is not None)

    @cached_property
    def qubit_inners(self) -> np.ndarray:
        """Inner block sizes of the sigma_x sites, the layout the fused kernel wants."""
        return _qubit_inners(self)

    @property
    def uses_gamma(self) -> bool:
        # Lz^2 on a qubit is a multiple of the identity
        return any(k == QUDIT_SQUEEZED and d > 2 for k, d in zip(self.kinds, self.register.dims))


def site_mixer_unitary(kind: str, d: int, beta: float, gamma: float) -> np.ndarray:
    if kind == QUBIT_X:
        return qubit_x_rotation(beta)
    if d == 2:
        # Lx = sigma_x / 2 and Lz^2 = 1/4: a half-angle rotation times a phase
        return qubit_x_rotation(beta / 2) * np.exp(0.25j * gamma)
    ops = angular_momentum(d)
    # Hermitian by construction, so skip expm_hermitian's check
    w, v = np.linalg.eigh(beta * ops.lx + gamma * ops.lz2)
    return (v * np.exp(1j * w)) @ v.conj().T


def _qubit_inners(mixer: MixerSpec) -> np.ndarray:
    reg = mixer.register
    return np.array([reg.split(s)[2] for s, k in enumerate(mixer.kinds) if k == QUBIT_X], dtype=np.int64)


def apply_mixer_layer(state: StateVector, mixer: MixerSpec, beta: float, gamma: float = 0.0) -> StateVector:
    """Apply exp(i[beta*X + gamma*Lz^2]) site by site.

    Single-site terms on different sites commute, so the product over sites
    is exact. On one site Lx and Lz^2 do not commute and are exponentiated
    together. All sigma_x sites go through one fused kernel call.
    """
    if mixer.register != state.register:
        raise ValueError("mixer and state live on different registers")
    amps = state.amplitudes
    inners = mixer.qubit_inners
    if len(inners):
        _kernels.x_rotations(amps, inners, np.cos(beta), np.sin(beta))
    cache = {}
    for site, kind in enumerate(mixer.kinds):
        if kind != QUDIT_SQUEEZED:
            continue
        outer, d, inner = state.register.split(site)
        if d not in cache:
            cache[d] = np.ascontiguousarray(site_mixer_unitary(kind, d, beta, gamma))
        _kernels.apply_site_matrix(amps, outer, d, inner, cache[d])
    return state
