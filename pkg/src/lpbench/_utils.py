"""Seeding and input validation helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np

# numba kernels seed their own MT19937 state from a 32-bit value
_KERNEL_SEED_BOUND = 2**32 - 1


def as_rng(seed) -> np.random.Generator:
    """Return a PCG64-backed ``Generator`` for ``seed``.

    ``seed`` may be None, an integer, a ``SeedSequence`` or an existing
    ``Generator`` (returned unchanged so that callers can thread one stream
    through several stages).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None or isinstance(seed, numbers.Integral):
        return np.random.Generator(np.random.PCG64(seed))
    raise TypeError(f"cannot build a random generator from {seed!r}")


def kernel_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, _KERNEL_SEED_BOUND))


def check_pairs(pairs, n: int | None = None, name: str = "pairs") -> np.ndarray:
    """Coerce ``pairs`` to an ``(k, 2)`` int64 array and range-check node ids."""
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (k, 2), got {arr.shape}")
    if n is not None:
        bad = (arr < 0) | (arr >= n)
        if bad.any():
            row = int(np.argmax(bad.any(axis=1)))
            raise IndexError(
                f"{name}[{row}] = {tuple(arr[row])} references a node outside 0..{n - 1}"
            )
    return arr


def canonical_pairs(pairs) -> np.ndarray:
    """Orient every pair as (min, max)."""
    arr = check_pairs(pairs)
    return np.sort(arr, axis=1)


def pair_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    """Encode canonical pairs as ``i * n + j`` int64 keys."""
    p = canonical_pairs(pairs)
    return p[:, 0] * np.int64(n) + p[:, 1]


def keys_to_pairs(keys: np.ndarray, n: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    return np.stack([keys // n, keys % n], axis=1)


def check_fraction(f, name: str = "f", closed_right: bool = False) -> float:
    f = float(f)
    ok = 0.0 < f <= 1.0 if closed_right else 0.0 < f < 1.0
    if not ok:
        bound = "(0, 1]" if closed_right else "(0, 1)"
        raise ValueError(f"{name} must lie in {bound}, got {f}")
    return f
