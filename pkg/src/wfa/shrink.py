"""Noise scale, universal threshold and hard thresholding of detail levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dwt import Decomposition
from .errors import InputError

MAD_CONSTANT = 0.6745


def mad_sigma(finest_details) -> float:
    """Robust noise scale: median absolute coefficient over 0.6745."""
    d = np.asarray(finest_details, dtype=float).ravel()
    if d.size == 0:
        raise InputError("MAD of an empty coefficient set")
    return float(np.median(np.abs(d))) / MAD_CONSTANT


def universal_threshold(sigma: float, n: int) -> float:
    if n < 1:
        raise InputError(f"universal threshold needs n >= 1, got {n}")
    if sigma < 0:
        raise InputError(f"sigma must be >= 0, got {sigma}")
    return sigma * math.sqrt(2.0 * math.log(n))


def partition_counts(n: int, l_t: int) -> tuple[int, int]:
    """(thresholded slots, unthresholded slots) when the l_t finest levels are thresholded."""
    if n < 2 or n & (n - 1):
        raise InputError(f"length not a power of two: n={n}")
    J = n.bit_length() - 1
    if not 1 <= l_t <= J:
        raise InputError(f"l_t must lie in [1, {J}], got {l_t}")
    n_t = n >> l_t
    return n - n_t, n_t


@dataclass(frozen=True)
class ThresholdPlan:
    lam: float
    l_t: int
    n: int

    def __post_init__(self):
        if not self.lam >= 0:
            raise InputError(f"threshold must be >= 0, got {self.lam}")
        partition_counts(self.n, self.l_t)

    @property
    def J(self) -> int:
        return self.n.bit_length() - 1

    @property
    def n_t(self) -> int:
        return self.n >> self.l_t

    @property
    def p_slots(self) -> int:
        return self.n - self.n_t

    @property
    def q_slots(self) -> int:
        return self.n_t

    def thresholded_levels(self) -> range:
        return range(self.J - self.l_t, self.J)


@dataclass(frozen=True)
class ShrunkCoefficients:
    kept: np.ndarray
    unthresholded: np.ndarray
    decomposition: Decomposition

    @property
    def survivors(self) -> int:
        return int(self.kept.size)

    def energy(self) -> float:
        return float(np.sum(self.kept ** 2) + np.sum(self.unthresholded ** 2))


def hard_threshold(d: Decomposition, plan: ThresholdPlan) -> ShrunkCoefficients:
    """Kill coefficients with |theta| <= lam in the l_t finest detail levels.

    Coarser detail levels and the scaling block pass through untouched.
    """
    if d.n != plan.n:
        raise InputError(f"plan is for n={plan.n} but decomposition has n={d.n}")
    if d.j0 > plan.J - plan.l_t:
        raise InputError(f"plan thresholds levels below j0={d.j0}")
    if np.ndim(d.scaling) != 1:
        raise InputError("hard_threshold works on a single curve's decomposition")
    levels = set(plan.thresholded_levels())
    details, kept, free = {}, [], []
    for j in d.levels():
        w = np.asarray(d.details[j], dtype=float)
        if j in levels:
            alive = np.abs(w) > plan.lam
            kept.append(w[alive])
            details[j] = np.where(alive, w, 0.0)
        else:
            free.append(w)
            details[j] = w
    free.append(np.asarray(d.scaling, dtype=float))
    shrunk = Decomposition(d.J, d.j0, details, d.scaling, d.wavelet)
    return ShrunkCoefficients(
        kept=np.concatenate(kept) if kept else np.zeros(0),
        unthresholded=np.concatenate(free),
        decomposition=shrunk,
    )
