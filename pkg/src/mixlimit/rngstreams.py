"""Reproducible random number streams.

Every stochastic routine in this package draws from a Philox
counter-based 64-bit generator.  Streams are derived from a master seed
plus a tuple of integer/string labels (experiment name, replication
index, ...): the labels are folded into the second word of the 128-bit
Philox key with a splitmix64 step, so distinct label tuples give
statistically independent streams and the same tuple always reproduces
the same stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    # Standard splitmix64 finalizer; mixes label words into the key.
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fold_label(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    if isinstance(label, str):
        acc = 0
        for b in label.encode("utf-8"):
            acc = _splitmix64(acc ^ b)
        return acc
    raise TypeError(f"stream label must be int or str, got {type(label).__name__}")


def stream_key(seed: int, *labels) -> np.ndarray:
    """128-bit Philox key for (seed, labels...)."""
    word = 0
    for lab in labels:
        word = _splitmix64(word ^ _fold_label(lab))
    return np.array([int(seed) & _MASK64, word], dtype=np.uint64)


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the given (seed, labels...) tuple."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))
