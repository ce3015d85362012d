"""Counter-based random streams.

Every replication ``i`` of a run seeded with ``seed`` draws from its own
PCG64 stream, keyed by ``(seed, i)`` through NumPy's SeedSequence spawn
keys.  Streams are therefore reproducible regardless of how replications
are scheduled across workers.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

DEFAULT_SEED = 20230611
_U64 = 1 << 64
_TWO53 = float(1 << 53)


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication ``index`` of run ``seed``."""
    if index < 0:
        raise InputError(f"stream index must be >= 0, got {index}")
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def open_uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1): 53-bit grid shifted by half a step."""
    bits = gen.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (bits.astype(float) + 0.5) / _TWO53


def standard_normal(gen: np.random.Generator, size) -> np.ndarray:
    """Standard normals by the Box-Muller transform.

    Each pair of open uniforms yields two variates, so the number of draws
    consumed is fixed by ``size`` -- no rejection loop.
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    count = int(np.prod(shape, dtype=np.int64))
    pairs = (count + 1) // 2
    u1 = open_uniform(gen, pairs)
    u2 = open_uniform(gen, pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:count].reshape(shape)
