"""Orthonormal periodic discrete wavelet transform (pyramid algorithm).

Coefficients are kept per level; ``flatten`` lays them out finest detail
first with the scaling block last.  Transforms act on the last axis, so a
stack of curves can be transformed in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

_SQRT3 = math.sqrt(3.0)

# Daubechies scaling filters normalized to sum sqrt(2)
_LOWPASS = {
    "haar": np.array([1.0, 1.0]) / math.sqrt(2.0),
    "d4": np.array([1 + _SQRT3, 3 + _SQRT3, 3 - _SQRT3, 1 - _SQRT3]) / (4.0 * math.sqrt(2.0)),
    # minimum-phase spectral factorization, four vanishing moments
    "d8": np.array([
        0.23037781330889650086, 0.71484657055291564709, 0.63088076792985890788,
        -0.027983769416859854211, -0.18703481171909308408, 0.030841381835560763627,
        0.032883011666885199735, -0.010597401785069032105,
    ]),
}
WAVELETS = tuple(_LOWPASS)


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    h: np.ndarray
    g: np.ndarray

    @property
    def length(self) -> int:
        return self.h.size


def make_filter(name: str) -> WaveletFilter:
    """Low-pass taps and their quadrature mirror, g_k = (-1)^k h_{L-1-k}."""
    try:
        h = _LOWPASS[name].copy()
    except KeyError:
        raise InputError(f"unknown wavelet {name!r}; choose from {', '.join(WAVELETS)}") from None
    L = h.size
    g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
    h.setflags(write=False)
    g.setflags(write=False)
    return WaveletFilter(name, h, g)


def _as_filter(f) -> WaveletFilter:
    return f if isinstance(f, WaveletFilter) else make_filter(f)


@dataclass(frozen=True)
class Decomposition:
    """Detail blocks ``details[j]`` for j0 <= j < J and the scaling block at j0."""

    J: int
    j0: int
    details: dict[int, np.ndarray]
    scaling: np.ndarray
    wavelet: str = "haar"

    def __post_init__(self):
        if not 0 <= self.j0 <= self.J:
            raise InputError(f"j0={self.j0} outside [0, {self.J}]")
        n = 1 << self.J
        if set(self.details) != set(range(self.j0, self.J)):
            raise InputError("detail levels must be exactly j0..J-1")
        for j, w in self.details.items():
            if w.shape[-1] != n >> (self.J - j):
                raise InputError(f"detail block {j} has length {w.shape[-1]}, "
                                 f"expected {n >> (self.J - j)}")
        if self.scaling.shape[-1] != n >> (self.J - self.j0):
            raise InputError("scaling block length inconsistent with j0")

    @property
    def n(self) -> int:
        return 1 << self.J

    def levels(self) -> list[int]:
        """Detail levels from finest to coarsest."""
        return list(range(self.J - 1, self.j0 - 1, -1))


def _log2_length(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise InputError(f"length not a power of two: n={n}")
    return n.bit_length() - 1


def _analysis_indices(N: int, L: int) -> np.ndarray:
    return (2 * np.arange(N // 2)[:, None] + np.arange(L)[None, :]) % N


def dwt_forward(y, f="haar", j0: int = 0) -> Decomposition:
    """Filter and downsample from level J-1 down to j0 with periodic wrap."""
    filt = _as_filter(f)
    y = np.asarray(y, dtype=float)
    J = _log2_length(y.shape[-1])
    if J < 1:
        raise InputError("need at least 2 samples")
    if not 0 <= j0 <= J - 1:
        raise InputError(f"j0={j0} outside [0, {J - 1}]")
    details = {}
    v = y
    for j in range(J - 1, j0 - 1, -1):
        idx = _analysis_indices(v.shape[-1], filt.length)
        block = v[..., idx]
        # elementwise product then sum rather than a BLAS matmul, whose fused
        # multiply-adds leave rounding residue on exactly cancelling inputs
        details[j] = np.sum(block * filt.g, axis=-1)
        v = np.sum(block * filt.h, axis=-1)
    return Decomposition(J, j0, details, v, filt.name)


def dwt_inverse(d: Decomposition, f=None) -> np.ndarray:
    """Invert ``dwt_forward`` level by level from j0 up to J-1."""
    filt = _as_filter(d.wavelet if f is None else f)
    v = np.asarray(d.scaling, dtype=float)
    for j in range(d.j0, d.J):
        w = np.asarray(d.details[j], dtype=float)
        if w.shape != v.shape:
            raise InputError(f"block-length inconsistency at level {j}")
        N = 2 * v.shape[-1]
        out = np.zeros(v.shape[:-1] + (N,))
        k2 = 2 * np.arange(N // 2)
        for m in range(filt.length):
            # for fixed m the targets (2k + m) mod N are distinct
            out[..., (k2 + m) % N] += filt.h[m] * v + filt.g[m] * w
        v = out
    return v


def flatten(d: Decomposition) -> np.ndarray:
    """[W_{J-1}, W_{J-2}, ..., W_{j0}, V_{j0}] along the last axis."""
    blocks = [d.details[j] for j in d.levels()] + [d.scaling]
    return np.concatenate(blocks, axis=-1)


def unflatten(theta, J: int, j0: int, wavelet: str = "haar") -> Decomposition:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != 1 << J:
        raise InputError("coefficient vector length does not match J")
    details, pos = {}, 0
    for j in range(J - 1, j0 - 1, -1):
        size = 1 << j
        details[j] = theta[..., pos:pos + size]
        pos += size
    return Decomposition(J, j0, details, theta[..., pos:], wavelet)
