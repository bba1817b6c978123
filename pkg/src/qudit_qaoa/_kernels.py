"""Inner loops over dense amplitude arrays.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics. The active backend is chosen once at
import from ``QUDIT_QAOA_BACKEND`` (``numba`` or ``numpy``); numba is the
default whenever it imports. ``set_backend`` switches at runtime, which the
tests and ``benchmarks/bench_kernels.py`` use to compare both paths.

All kernels that change amplitudes work in place on a contiguous
``complex128`` array.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "QUDIT_QAOA_BACKEND"


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _np_apply_site_matrix(amps, outer, d, inner, mat):
    view = amps.reshape(outer, d, inner)
    view[...] = np.matmul(mat, view)


def _np_apply_phase(amps, diag, angle):
    amps *= np.exp(1j * angle * diag)


def _np_expectation(amps, diag):
    return float(np.dot(amps.real**2 + amps.imag**2, diag))


def _np_gather(amps, src):
    amps[:] = amps[src]


def _np_x_rotations(amps, inners, c, s):
    mat = np.array([[c, 1j * s], [1j * s, c]])
    n = amps.shape[0]
    for inner in inners:
        _np_apply_site_matrix(amps, n // (2 * inner), 2, int(inner), mat)


def _np_masked_weight(amps, mask):
    probs = amps.real**2 + amps.imag**2
    return float(probs[mask].sum())


_NUMPY = SimpleNamespace(
    name="numpy",
    apply_site_matrix=_np_apply_site_matrix,
    apply_phase=_np_apply_phase,
    expectation=_np_expectation,
    gather=_np_gather,
    masked_weight=_np_masked_weight,
    x_rotations=_np_x_rotations,
)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

def _build_numba():
    njit = numba.njit(cache=True, nogil=True)

    @njit
    def apply_site_matrix(amps, outer, d, inner, mat):
        block = d * inner
        if inner >= 8:
            # long contiguous rows: accumulate row by row
            tmp = np.empty(block, dtype=np.complex128)
            for o in range(outer):
                base = o * block
                tmp[:] = amps[base:base + block]
                for r in range(d):
                    row = base + r * inner
                    m = mat[r, 0]
                    for i in range(inner):
                        amps[row + i] = m * tmp[i]
                    for k in range(1, d):
                        m = mat[r, k]
                        src = k * inner
                        for i in range(inner):
                            amps[row + i] += m * tmp[src + i]
        else:
            buf = np.empty(d, dtype=np.complex128)
            for o in range(outer):
                base = o * block
                for i in range(inner):
                    for k in range(d):
                        buf[k] = amps[base + k * inner + i]
                    for r in range(d):
                        acc = 0j
                        for k in range(d):
                            acc += mat[r, k] * buf[k]
                        amps[base + r * inner + i] = acc

    @njit
    def apply_phase(amps, diag, angle):
        for k in range(amps.shape[0]):
            theta = angle * diag[k]
            amps[k] *= complex(np.cos(theta), np.sin(theta))

    @njit
    def expectation(amps, diag):
        acc = 0.0
        for k in range(amps.shape[0]):
            a = amps[k]
            acc += (a.real * a.real + a.imag * a.imag) * diag[k]
        return acc

    @njit
    def x_rotations(amps, inners, c, s):
        # [[c, is], [is, c]] on every qubit whose inner block size is listed
        n = amps.shape[0]
        for inner in inners:
            for base in range(0, n, 2 * inner):
                for i in range(base, base + inner):
                    a0 = amps[i]
                    a1 = amps[i + inner]
                    amps[i] = c * a0 + 1j * s * a1
                    amps[i + inner] = 1j * s * a0 + c * a1

    @njit
    def masked_weight(amps, mask):
        acc = 0.0
        for k in range(amps.shape[0]):
            if mask[k]:
                a = amps[k]
                acc += a.real * a.real + a.imag * a.imag
        return acc

    return SimpleNamespace(
        name="numba",
        apply_site_matrix=apply_site_matrix,
        apply_phase=apply_phase,
        expectation=expectation,
        # a pure permutation is memory bound; numpy's indexed take beats a jitted loop
        gather=_np_gather,
        masked_weight=masked_weight,
        x_rotations=x_rotations,
    )


BACKENDS = {"numpy": _NUMPY}
if numba is not None:
    BACKENDS["numba"] = _build_numba()

_active = None


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {sorted(BACKENDS)}")
    _active = BACKENDS[name]


def backend_name() -> str:
    return _active.name


def get(name: str | None = None) -> SimpleNamespace:
    """Kernel namespace for ``name`` (the active backend when omitted)."""
    return _active if name is None else BACKENDS[name]


set_backend(os.environ.get(ENV_FLAG, "numba" if "numba" in BACKENDS else "numpy").strip().lower())


def apply_site_matrix(amps, outer, d, inner, mat):
    _active.apply_site_matrix(amps, outer, d, inner, mat)


def apply_phase(amps, diag, angle):
    _active.apply_phase(amps, diag, float(angle))


def expectation(amps, diag) -> float:
    return float(_active.expectation(amps, diag))


def gather(amps, src):
    _active.gather(amps, src)


def masked_weight(amps, mask) -> float:
    return float(_active.masked_weight(amps, mask))


def x_rotations(amps, inners, c, s):
    """exp(i beta sigma_x) with c = cos(beta), s = sin(beta) on each qubit site given by its inner size."""
    _active.x_rotations(amps, inners, float(c), float(s))
