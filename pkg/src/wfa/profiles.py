"""Functional profile data: loading, group summaries and the variance
normalizer applied to treatment contrasts before the wavelet transform."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .errors import InputError, InvalidNormalizerError

PAD_MODES = ("none", "zero", "reflect")
RHO_POLICIES = ("zero", "empirical")


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def pad_curves(values: np.ndarray, target: int, mode: str) -> np.ndarray:
    """Extend curves along the last axis to ``target`` samples."""
    n = values.shape[-1]
    extra = target - n
    if extra < 0:
        raise InputError("cannot pad to a shorter length")
    if extra == 0:
        return values
    if mode == "zero":
        tail = np.zeros(values.shape[:-1] + (extra,))
    elif mode == "reflect":
        if extra > n:
            raise InputError(f"reflect padding needs {extra} samples but curve has {n}")
        tail = values[..., ::-1][..., :extra]
    else:
        raise InputError(f"unknown pad mode {mode!r}")
    return np.concatenate([values, tail], axis=-1)


@dataclass(frozen=True)
class ProfileSet:
    """Noisy curves grouped by treatment: ``values[i]`` is an r_i x n matrix."""

    values: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()
    padded_from: int | None = None

    def __post_init__(self):
        vals = []
        for v in self.values:
            arr = np.array(v, dtype=float, copy=True)
            if arr.ndim == 1:
                arr = arr[None, :]
            arr.setflags(write=False)
            vals.append(arr)
        if len(vals) < 2:
            raise InputError(f"need at least 2 treatments, got {len(vals)}")
        lengths = {a.shape[1] for a in vals}
        if len(lengths) != 1:
            raise InputError(f"treatments have different curve lengths: {sorted(lengths)}")
        n = lengths.pop()
        if not is_power_of_two(n) or n < 2:
            raise InputError(f"length not a power of two: n={n}")
        for a in vals:
            if a.ndim != 2 or a.shape[0] < 1:
                raise InputError("each treatment needs at least one replicate curve")
            if not np.all(np.isfinite(a)):
                raise InputError("curves must contain only finite values")
        labels = tuple(self.labels) or tuple(str(i + 1) for i in range(len(vals)))
        if len(labels) != len(vals):
            raise InputError("one label per treatment is required")
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "labels", labels)

    @property
    def treatments(self) -> int:
        return len(self.values)

    @property
    def replicate_counts(self) -> tuple[int, ...]:
        return tuple(v.shape[0] for v in self.values)

    @property
    def length(self) -> int:
        return self.values[0].shape[1]


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return list(csv.reader(source))
    raise InputError("source must be a path or a text stream")


def load_profiles(source: str | os.PathLike | TextIO, pad_mode: str = "reflect") -> ProfileSet:
    """Read the ``treatment,replicate,x1..xn`` CSV layout into a ProfileSet.

    Rows are grouped by treatment in order of first appearance.  If the curve
    length is not a power of two it is padded per ``pad_mode``; with
    ``pad_mode="none"`` that is an error.
    """
    if pad_mode not in PAD_MODES:
        raise InputError(f"unknown pad mode {pad_mode!r}")
    rows = [r for r in _read_rows(source) if any(cell.strip() for cell in r)]
    if not rows:
        raise InputError("empty input")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "treatment" or header[1] != "replicate":
        raise InputError("header must start with 'treatment,replicate' followed by sample columns")
    n = len(header) - 2
    groups: dict[str, list[np.ndarray]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != n + 2:
            raise InputError(f"line {lineno}: expected {n + 2} fields, got {len(row)} (ragged row)")
        key = (row[0].strip(), row[1].strip())
        if key in seen:
            raise InputError(f"line {lineno}: duplicate replicate {key[1]!r} for treatment {key[0]!r}")
        seen.add(key)
        try:
            curve = np.array([float(c) for c in row[2:]])
        except ValueError as exc:
            raise InputError(f"line {lineno}: non-numeric cell ({exc})") from None
        if not np.all(np.isfinite(curve)):
            raise InputError(f"line {lineno}: non-finite value")
        groups.setdefault(key[0], []).append(curve)
    if len(groups) < 2:
        raise InputError(f"need at least 2 treatments, got {len(groups)}")
    values = [np.vstack(curves) for curves in groups.values()]
    padded_from = None
    if not is_power_of_two(n) or n < 2:
        if pad_mode == "none":
            raise InputError(f"length not a power of two: n={n}")
        target = max(2, next_power_of_two(n))
        values = [pad_curves(v, target, pad_mode) for v in values]
        padded_from = n
    return ProfileSet(tuple(values), tuple(groups), padded_from)


@dataclass(frozen=True)
class GroupSummary:
    group_means: np.ndarray
    grand_mean: np.ndarray
    residual_variance: float
    cross_covariances: np.ndarray
    rho_policy: str = "zero"


@dataclass(frozen=True)
class VarianceEstimate:
    gamma_hat: np.ndarray
    sigma_sq: float
    rho_policy: str = "zero"


def summarize(ps: ProfileSet, rho_policy: str = "zero") -> GroupSummary:
    """Treatment means, their unweighted grand mean, pooled residual variance
    and the between-treatment covariances."""
    if rho_policy not in RHO_POLICIES:
        raise InputError(f"unknown rho policy {rho_policy!r}")
    means = np.vstack([v.mean(axis=0) for v in ps.values])
    grand = means.mean(axis=0)
    dof = sum(r - 1 for r in ps.replicate_counts) * ps.length
    if dof == 0:
        raise InputError("residual variance needs at least one treatment with 2+ replicates")
    ss = math.fsum(float(np.sum((v - m) ** 2)) for v, m in zip(ps.values, means))
    T = ps.treatments
    if rho_policy == "empirical":
        # covariance of treatment mean curves across time points
        rho = np.cov(means)
    else:
        rho = np.zeros((T, T))
    for arr in (means, grand, rho):
        arr.setflags(write=False)
    return GroupSummary(means, grand, ss / dof, rho, rho_policy)


def gamma_hat(gs: GroupSummary, ps: ProfileSet, i: int) -> float:
    """Variance of the i-th treatment contrast, mean minus grand mean."""
    t = ps.treatments
    r = ps.replicate_counts
    base = gs.residual_variance * ((1.0 / r[i]) * (t - 2) / t + sum(1.0 / rj for rj in r) / t ** 2)
    others = [gs.cross_covariances[i, j] for j in range(t) if j != i]
    g = base - (2.0 / t) * float(np.mean(others))
    if not g > 0:
        raise InvalidNormalizerError(
            f"non-positive variance normalizer {g:.6g} for treatment {ps.labels[i]!r}")
    return g


def estimate_variance(gs: GroupSummary, ps: ProfileSet) -> VarianceEstimate:
    gam = np.array([gamma_hat(gs, ps, i) for i in range(ps.treatments)])
    gam.setflags(write=False)
    return VarianceEstimate(gam, gs.residual_variance, gs.rho_policy)


def standardized_contrast(gs: GroupSummary, ve: VarianceEstimate, i: int) -> np.ndarray:
    g = float(ve.gamma_hat[i])
    if not g > 0:
        raise InvalidNormalizerError(f"non-positive variance normalizer for treatment {i}")
    return (gs.group_means[i] - gs.grand_mean) / math.sqrt(g)


def profiles_from_arrays(values: Sequence[np.ndarray], labels: Sequence[str] = ()) -> ProfileSet:
    return ProfileSet(tuple(values), tuple(labels))
