"""Figures of merit for QAOA runs and their quantile summaries."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .register import MixedRegister, StateVector


@dataclass(frozen=True)
class Quantiles:
    median: float
    q20: float
    q80: float

    def as_dict(self) -> dict:
        return {"median": self.median, "q20": self.q20, "q80": self.q80}


def run_succeeded(samples, optimal_set) -> bool:
    return bool(np.isin(np.asarray(samples), np.asarray(optimal_set)).any())


def success_rate(runs: Sequence, optimal_set, full_state: bool = False) -> float:
    """Fraction of runs whose shots hit an optimal state at least once.

    By default ``optimal_set`` indexes the problem register and only the
    problem digits of each shot count. With ``full_state`` it indexes the
    runs' full register, so slack/ancilla digits must match too.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("no runs")
    attr = "samples" if full_state else "problem_samples"
    hits = [run_succeeded(getattr(r, attr), optimal_set) for r in runs]
    return sum(hits) / len(runs)


def approximation_ratio(run, e0: float) -> float | None:
    """min over shots of (E_s - E0)/|E0| using the penalized energies; None when E0 = 0."""
    if e0 == 0:
        return None
    return float(np.min((np.asarray(run.sample_energies) - e0) / abs(e0)))


def feasible_weight(state: StateVector, mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != state.amplitudes.shape:
        raise ValueError("mask does not match the state's register")
    return _kernels.masked_weight(state.amplitudes, mask)


def baseline(register: MixedRegister, mask) -> float:
    """Fraction of feasible basis states: the feasible weight of the uniform state."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (register.total_dim,):
        raise ValueError("mask does not match the register")
    return int(mask.sum()) / register.total_dim


def aggregate(values: Iterable[float]) -> Quantiles:
    """Median and 20%/80% quantiles, linear interpolation between order statistics."""
    arr = np.asarray([v for v in values], dtype=float)
    if arr.size == 0:
        raise ValueError("cannot aggregate an empty sequence")
    med, q20, q80 = np.quantile(arr, [0.5, 0.2, 0.8], method="linear")
    return Quantiles(float(med), float(q20), float(q80))
