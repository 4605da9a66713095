"""Skip-gram negative-sampling trainer with a pluggable context resolver.

One objective covers both monolingual and cross-lingually anchored
training: for a co-occurring pair (center, context),

    L = log sigmoid(x_center . ctx(context))
        + sum over k noise draws n of log sigmoid(-x_center . ctx(n))

where ctx() returns the output vector to use for a word and whether that
vector is frozen.  Gradient ascent updates the center's input vector and
every unfrozen output vector; frozen vectors contribute gradient to the
center but are never written.

The fast path lives in ``_kernels``; ``sgns_loss``/``sgns_step`` here are
the reference implementations the correctness tests exercise at 64-bit.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .corpus import (
    DEFAULT_NOISE_ALPHA,
    DEFAULT_SUBSAMPLE_T,
    CorpusStream,
    NoiseTable,
    build_noise_table,
)
from .embeddings import EmbeddingPair
from .validation import check_at_least, check_positive

logger = logging.getLogger(__name__)

ProgressSink = Callable[[int, int, int, float], None]  # updates, total, epoch, lr


@dataclass
class TrainingConfig:
    """SGNS hyperparameters; defaults follow common word2vec practice."""

    negatives: int = 10
    dim: int = 300
    subsample_t: float = DEFAULT_SUBSAMPLE_T
    epochs: float = 10.0
    window: int = 5
    lr_start: float = 0.025
    lr_min_fraction: float = 1e-4
    noise_alpha: float = DEFAULT_NOISE_ALPHA
    seed: int = 0

    def __post_init__(self):
        check_at_least("negatives", self.negatives, 1)
        check_at_least("dim", self.dim, 1)
        check_at_least("window", self.window, 1)
        check_positive("epochs", self.epochs)
        check_positive("lr_start", self.lr_start)
        check_positive("subsample_t", self.subsample_t)
        check_positive("lr_min_fraction", self.lr_min_fraction)

    @property
    def lr_min(self) -> float:
        return self.lr_start * self.lr_min_fraction


def log_sigmoid(x: float) -> float:
    """Numerically safe log(sigmoid(x)); no overflow for |x| up to ~700."""
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def sgns_loss(center_vec: np.ndarray, ctx_vec: np.ndarray, neg_vecs: Sequence[np.ndarray]) -> float:
    """The (maximized) objective value for one sample."""
    total = log_sigmoid(float(np.dot(center_vec, ctx_vec)))
    for n in neg_vecs:
        total += log_sigmoid(-float(np.dot(center_vec, n)))
    return total


def draw_negatives(
    noise: NoiseTable, ctx_id: int, k: int, rng: np.random.Generator
) -> np.ndarray:
    """k noise draws, resampling any draw equal to the positive context.

    Resampling is capped (the colliding draw is kept after 32 attempts) so a
    single-word vocabulary cannot loop forever.
    """
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        neg = ctx_id
        for _ in range(32):
            neg = int(noise.sample(rng, 1)[0])
            if neg != ctx_id:
                break
        out[i] = neg
    return out


def apply_sgns_step(
    center_id: int,
    ctx_id: int,
    resolver,
    negatives: Sequence[int],
    lr: float,
    pair: EmbeddingPair,
) -> None:
    """One gradient-ascent step with explicit negative ids, in place.

    All gradients are evaluated at the pre-step values (the center
    accumulator is applied last); if a negative id repeats, its later
    occurrence sees the earlier in-step update, as in word2vec.
    """
    x = pair.input.rows[center_id]
    work = np.zeros_like(x)
    for wid, label in [(ctx_id, 1.0)] + [(int(n), 0.0) for n in negatives]:
        c, frozen = resolver.resolve(wid)
        dot = float(np.dot(x.astype(np.float64), c.astype(np.float64)))
        g = (label - _sigmoid(dot)) * lr
        work += (g * c.astype(np.float64)).astype(x.dtype)
        if not frozen:
            c += (g * x.astype(np.float64)).astype(c.dtype)
    x += work


def sgns_step(
    center_id: int,
    ctx_id: int,
    resolver,
    noise: NoiseTable,
    lr: float,
    pair: EmbeddingPair,
    k: int,
    rng: np.random.Generator,
) -> None:
    """One training step: draw k negatives from the noise table and apply
    the gradient update in place."""
    check_positive("lr", lr)
    negatives = draw_negatives(noise, ctx_id, k, rng)
    apply_sgns_step(center_id, ctx_id, resolver, negatives, lr, pair)


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def source_epochs(tgt_sentences: int, src_sentences: int, base_epochs: float = 10.0) -> float:
    """Epoch count giving the source roughly as many updates as the target:
    base_epochs * tgt_sentences / src_sentences."""
    check_positive("tgt_sentences", tgt_sentences)
    check_positive("src_sentences", src_sentences)
    return base_epochs * tgt_sentences / src_sentences


def _epoch_plan(n_sentences: int, epochs: float) -> list[tuple[int, int]]:
    """(epoch index, sentence limit) passes; a fractional final epoch runs
    over the corpus prefix."""
    full = int(math.floor(epochs + 1e-12))
    plan = [(e, n_sentences) for e in range(full)]
    frac = epochs - full
    if frac > 1e-12:
        limit = int(round(frac * n_sentences))
        if limit > 0:
            plan.append((full, limit))
    return plan


def count_scheduled_updates(stream: CorpusStream, config: TrainingConfig, epochs: float | None = None) -> int:
    """Exact total update count the scheduled passes will perform.

    Replays the structural RNG (subsampling + windows) for every pass;
    cheap relative to training and fully deterministic.
    """
    tokens, offsets = stream.encoded()
    keep = stream.keep_probs()
    seed = np.uint64(stream.rng_seed & 0xFFFFFFFFFFFFFFFF)
    total = 0
    for epoch, limit in _epoch_plan(stream.n_sentences, epochs if epochs is not None else config.epochs):
        total += int(
            _kernels.count_pairs(tokens, offsets, keep, config.window, seed, epoch, limit)
        )
    return total


def train(
    stream: CorpusStream,
    pair: EmbeddingPair,
    resolver,
    config: TrainingConfig,
    *,
    epochs: float | None = None,
    threads: int = 1,
    total_updates: int | None = None,
    checkpoints: Sequence[int] = (),
    on_checkpoint: Callable[[int], None] | None = None,
    progress: ProgressSink | None = None,
) -> EmbeddingPair:
    """Run the scheduled passes over the corpus, updating ``pair`` in place.

    The learning rate decays linearly from lr_start to lr_start *
    lr_min_fraction over ``total_updates`` (measured exactly when not
    given).  ``checkpoints`` are global update counts at which training
    pauses (at the next sentence boundary) and ``on_checkpoint`` runs with
    all workers stopped; the pipeline uses this for dictionary
    re-induction.

    With threads == 1 the run is bit-deterministic for a fixed seed.  With
    more threads, workers share the matrices without row locks (lost
    updates are tolerated) and the update counter is approximate.
    """
    check_at_least("threads", threads, 1)
    n_epochs = epochs if epochs is not None else config.epochs
    check_positive("epochs", n_epochs)
    tokens, offsets = stream.encoded()
    keep = stream.keep_probs()
    noise = build_noise_table(stream.vocab, config.noise_alpha)
    seed = np.uint64(stream.rng_seed & 0xFFFFFFFFFFFFFFFF)
    if total_updates is None:
        total_updates = count_scheduled_updates(stream, config, n_epochs)
    if total_updates <= 0:
        raise ValueError("training schedule contains no updates (corpus too small?)")

    dict_arr = resolver.dict_array
    tgt_rows = resolver.target_rows
    if tgt_rows is None:  # monolingual: a dummy row, never indexed
        tgt_rows = np.zeros((1, pair.dim), dtype=pair.input.rows.dtype)

    counter = np.zeros(1, dtype=np.int64)
    pending = sorted(int(c) for c in checkpoints)
    ck = 0
    max_len = max(stream.max_sentence_len, 1)
    plan = _epoch_plan(stream.n_sentences, n_epochs)
    huge = np.int64(2**62)

    def kernel(start: int, hi: int, epoch: int, stop_at) -> int:
        return int(
            _kernels.train_shard(
                tokens,
                offsets,
                start,
                hi,
                epoch,
                seed,
                pair.input.rows,
                pair.output.rows,
                resolver.dict_array if False else dict_holder[0],
                dict_holder[1],
                keep,
                noise.prob,
                noise.alias,
                config.window,
                config.negatives,
                config.lr_start,
                config.lr_min,
                float(total_updates),
                counter,
                stop_at,
                max_len,
            )
        )

    # the resolver may swap its dictionary at checkpoints; re-read both
    # arrays whenever workers are (re)launched
    dict_holder = [tgt_rows, dict_arr]

    def refresh_resolver():
        nonlocal tgt_rows
        dict_arr2 = resolver.dict_array
        tgt2 = resolver.target_rows
        if tgt2 is None:
            tgt2 = tgt_rows
        dict_holder[0] = tgt2
        dict_holder[1] = dict_arr2

    refresh_resolver()

    for epoch, limit in plan:
        bounds = np.linspace(0, limit, threads + 1).astype(np.int64)
        pos = [int(bounds[w]) for w in range(threads)]
        his = [int(bounds[w + 1]) for w in range(threads)]
        while True:
            while ck < len(pending) and counter[0] >= pending[ck]:
                if on_checkpoint is not None:
                    on_checkpoint(int(counter[0]))
                    refresh_resolver()
                ck += 1
            if all(pos[w] >= his[w] for w in range(threads)):
                break
            stop_at = np.int64(pending[ck]) if ck < len(pending) else huge
            if threads == 1:
                pos[0] = kernel(pos[0], his[0], epoch, stop_at)
            else:
                results = [0] * threads
                workers = []
                for w in range(threads):
                    if pos[w] >= his[w]:
                        results[w] = pos[w]
                        continue

                    def run(w=w):
                        results[w] = kernel(pos[w], his[w], epoch, stop_at)

                    th = threading.Thread(target=run)
                    workers.append(th)
                    th.start()
                for th in workers:
                    th.join()
                for w in range(threads):
                    if results[w]:
                        pos[w] = max(pos[w], results[w])
        if progress is not None:
            done = int(counter[0])
            prog = min(1.0, done / total_updates)
            lr = max(config.lr_min, config.lr_start * (1.0 - prog))
            progress(done, total_updates, epoch, lr)
    # fire any checkpoints the final sentences crossed
    while ck < len(pending) and counter[0] >= pending[ck]:
        if on_checkpoint is not None:
            on_checkpoint(int(counter[0]))
        ck += 1
    return pair
