import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_qaoa import _kernels

needs_numba = pytest.mark.skipif("numba" not in _kernels.BACKENDS, reason="numba not installed")


@needs_numba
@given(st.lists(st.integers(2, 4), min_size=1, max_size=4), st.integers(0, 10_000))
def test_backends_agree(dims, seed):
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    site = int(rng.integers(0, len(dims)))
    outer, d, inner = int(np.prod(dims[:site])), dims[site], int(np.prod(dims[site + 1:]))
    amps = rng.normal(size=n) + 1j * rng.normal(size=n)
    diag = rng.normal(size=n)
    mat = np.ascontiguousarray(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    mask = rng.random(n) < 0.5
    src = rng.permutation(n)
    out = {}
    for name in ("numpy", "numba"):
        k = _kernels.get(name)
        x = amps.copy()
        k.apply_site_matrix(x, outer, d, inner, mat)
        k.apply_phase(x, diag, 0.37)
        e = k.expectation(x, diag)
        w = k.masked_weight(x, mask)
        k.gather(x, src)
        out[name] = (x, e, w)
    assert np.allclose(out["numpy"][0], out["numba"][0], atol=1e-12)
    assert out["numpy"][1] == pytest.approx(out["numba"][1], abs=1e-10)
    assert out["numpy"][2] == pytest.approx(out["numba"][2], abs=1e-12)


def test_set_backend_switches_and_validates():
    before = _kernels.backend_name()
    try:
        _kernels.set_backend("numpy")
        assert _kernels.backend_name() == "numpy"
        with pytest.raises(ValueError):
            _kernels.set_backend("fortran")
    finally:
        _kernels.set_backend(before)


def test_env_flag_selects_backend():
    env = dict(os.environ, QUDIT_QAOA_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", "from qudit_qaoa import _kernels; print(_kernels.backend_name())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_run_results_do_not_depend_on_backend():
    from qudit_qaoa.problems import gen_random_spin
    from qudit_qaoa.qaoa import SLACK, QaoaConfig, run_single

    inst = gen_random_spin(4, 0.0, rng=2)
    before = _kernels.backend_name()
    recs = {}
    try:
        for name in _kernels.BACKENDS:
            _kernels.set_backend(name)
            recs[name] = run_single(inst, QaoaConfig(p=1, constraint_mode=SLACK), 7)
    finally:
        _kernels.set_backend(before)
    energies = [r.energy for r in recs.values()]
    assert np.allclose(energies, energies[0], atol=1e-8)
