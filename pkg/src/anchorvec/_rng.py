"""Deterministic 64-bit RNG used for corpus streaming.

Pure-Python splitmix64, mirrored bit-for-bit by the compiled kernels in
``_kernels``: both sides must produce identical sequences so that the
reference pair stream and the fast training path see the same subsampling
and window draws.

Streams are seeded per (seed, epoch, sentence, tag).  Two tags keep the
structural draws (subsampling, window sizes) independent from the training
draws (negative samples), so the emitted pair stream does not depend on
how many negatives the trainer consumes, nor on thread count.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_P_SEED = 0xA24BAED4963EE407
_P_EPOCH = 0x9FB21C651E98DF25
_P_SENT = 0xD6E8FEB86659FD93

STRUCT_TAG = 0x53545255  # subsampling + dynamic windows
NEG_TAG = 0x4E454753  # negative sampling

# 1 / 2**53, for mapping the top 53 bits to [0, 1)
_UNIT = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def sentence_state(seed: int, epoch: int, sentence: int, tag: int) -> int:
    """Initial RNG state for one (sentence, stream) pair."""
    z = (seed * _P_SEED) ^ (epoch * _P_EPOCH) ^ (sentence * _P_SENT) ^ tag
    return mix64(z & _MASK64)


def next_u64(state: int) -> tuple[int, int]:
    state = (state + GAMMA) & _MASK64
    return state, mix64(state)


def to_unit(value: int) -> float:
    """Map a 64-bit draw to a float in [0, 1)."""
    return (value >> 11) * _UNIT


def to_below(value: int, n: int) -> int:
    """Map a 64-bit draw to an integer in [0, n). Modulo bias is negligible
    for the vocabulary-sized n used here."""
    return value % n
