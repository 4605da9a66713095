"""Compiled training kernels.

The SGNS inner loop runs here, compiled by numba with the GIL released so
plain Python threads can train hogwild-style on shared matrices (row-level
races are tolerated by the training contract; single-threaded runs are
bit-deterministic).

The RNG is splitmix64, mirroring ``_rng`` bit-for-bit.  Structural draws
(subsampling, dynamic windows) and negative-sampling draws use separate
streams seeded per (seed, epoch, sentence), so the pair structure of an
epoch is independent of sharding, thread count, and negative count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64

_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

_P_SEED = U64(0xA24BAED4963EE407)
_P_EPOCH = U64(0x9FB21C651E98DF25)
_P_SENT = U64(0xD6E8FEB86659FD93)

STRUCT_TAG = U64(0x53545255)
NEG_TAG = U64(0x4E454753)

_UNIT = 1.0 / 9007199254740992.0  # 2**-53

# bounded resampling when a negative draw collides with the positive context;
# after the cap the colliding draw is kept (only reachable for tiny vocabularies)
_MAX_RESAMPLE = 32


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(inline="always")
def _sent_state(seed, epoch, sentence, tag):
    return _mix64(seed * _P_SEED ^ epoch * _P_EPOCH ^ U64(sentence) * _P_SENT ^ tag)


@njit(inline="always")
def _unit(v):
    return (v >> U64(11)) * _UNIT


@njit(inline="always")
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def count_pairs(tokens, offsets, keep_probs, window, seed, epoch, sent_hi):
    """Exact number of (center, context) pairs one epoch pass will emit."""
    wu = U64(window)
    total = np.int64(0)
    for s in range(sent_hi):
        state = _sent_state(seed, U64(epoch), s, STRUCT_TAG)
        n = 0
        for t in range(offsets[s], offsets[s + 1]):
            w = tokens[t]
            state = state + _GAMMA
            if _unit(_mix64(state)) < keep_probs[w]:
                n += 1
        for i in range(n):
            state = state + _GAMMA
            b = np.int64(_mix64(state) % wu) + 1
            lo = i - b
            if lo < 0:
                lo = 0
            hi = i + b + 1
            if hi > n:
                hi = n
            total += hi - lo - 1
    return total


@njit(cache=True)
def collect_pairs(tokens, offsets, keep_probs, window, seed, epoch, sent_hi, out):
    """Fill ``out`` (N, 2) with the emitted pairs; returns the count.

    Test/inspection path proving the kernel's pair structure matches the
    pure-Python stream.  Returns -1 if ``out`` is too small.
    """
    wu = U64(window)
    buf = np.empty(tokens.shape[0] + 1, dtype=np.int32)
    count = np.int64(0)
    for s in range(sent_hi):
        state = _sent_state(seed, U64(epoch), s, STRUCT_TAG)
        n = 0
        for t in range(offsets[s], offsets[s + 1]):
            w = tokens[t]
            state = state + _GAMMA
            if _unit(_mix64(state)) < keep_probs[w]:
                buf[n] = w
                n += 1
        for i in range(n):
            state = state + _GAMMA
            b = np.int64(_mix64(state) % wu) + 1
            lo = i - b
            if lo < 0:
                lo = 0
            hi = i + b + 1
            if hi > n:
                hi = n
            for j in range(lo, hi):
                if j == i:
                    continue
                if count >= out.shape[0]:
                    return np.int64(-1)
                out[count, 0] = buf[i]
                out[count, 1] = buf[j]
                count += 1
    return count


@njit(nogil=True, cache=True)
def train_shard(
    tokens,
    offsets,
    start_sent,
    sent_hi,
    epoch,
    seed,
    inputs,
    outputs,
    tgt_out,
    dict_arr,
    keep_probs,
    noise_prob,
    noise_alias,
    window,
    k,
    lr_start,
    lr_min,
    total_updates,
    counter,
    stop_at,
    max_sent_len,
):
    """Train on sentences [start_sent, sent_hi); pause when the shared update
    counter reaches ``stop_at``.

    Returns the next unprocessed sentence index (== sent_hi when the shard
    is exhausted).  ``dict_arr`` maps source ids to target ids (-1 when
    uncovered); covered context/negative words resolve to frozen rows of
    ``tgt_out``, which this kernel never writes.
    """
    dim = inputs.shape[1]
    vu = U64(noise_prob.shape[0])
    wu = U64(window)
    eu = U64(epoch)
    buf = np.empty(max_sent_len, dtype=np.int32)
    work = np.empty(dim, dtype=inputs.dtype)

    for s in range(start_sent, sent_hi):
        state = _sent_state(seed, eu, s, STRUCT_TAG)
        n = 0
        for t in range(offsets[s], offsets[s + 1]):
            w = tokens[t]
            state = state + _GAMMA
            if _unit(_mix64(state)) < keep_probs[w]:
                buf[n] = w
                n += 1
        if n == 0:
            continue
        ng = _sent_state(seed, eu, s, NEG_TAG)
        base = counter[0]
        local = np.int64(0)
        for i in range(n):
            state = state + _GAMMA
            b = np.int64(_mix64(state) % wu) + 1
            lo = i - b
            if lo < 0:
                lo = 0
            hi = i + b + 1
            if hi > n:
                hi = n
            if hi - lo <= 1:
                continue
            center = buf[i]
            x = inputs[center]
            for j in range(lo, hi):
                if j == i:
                    continue
                ctx = np.int64(buf[j])
                prog = (base + local) / total_updates
                if prog > 1.0:
                    prog = 1.0
                lr = lr_start * (1.0 - prog)
                if lr < lr_min:
                    lr = lr_min
                for d in range(dim):
                    work[d] = 0.0
                for m in range(k + 1):
                    if m == 0:
                        wid = ctx
                        label = 1.0
                    else:
                        wid = ctx
                        for _ in range(_MAX_RESAMPLE):
                            ng = ng + _GAMMA
                            idx = np.int64(_mix64(ng) % vu)
                            ng = ng + _GAMMA
                            if _unit(_mix64(ng)) < noise_prob[idx]:
                                cand = idx
                            else:
                                cand = np.int64(noise_alias[idx])
                            wid = cand
                            if cand != ctx:
                                break
                        label = 0.0
                    ti = dict_arr[wid]
                    dot = 0.0
                    if ti >= 0:
                        c = tgt_out[ti]
                    else:
                        c = outputs[wid]
                    for d in range(dim):
                        dot += x[d] * c[d]
                    g = (label - _sigmoid(dot)) * lr
                    for d in range(dim):
                        work[d] += g * c[d]
                    if ti < 0:  # frozen anchor rows receive no update
                        for d in range(dim):
                            c[d] += g * x[d]
                for d in range(dim):
                    x[d] += work[d]
                local += 1
        counter[0] = counter[0] + local
        if counter[0] >= stop_at:
            return np.int64(s + 1)
    return np.int64(sent_hi)
