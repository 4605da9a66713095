"""Corpus ingestion: vocabulary construction, frequency subsampling, the
unigram noise distribution, and the deterministic (center, context) pair
stream consumed by the trainer.

Input corpora are UTF-8 text files with one pre-tokenized sentence per
line, tokens separated by spaces.  In-memory corpora (sequences of token
lists) are accepted everywhere a path is, which keeps tests and the
estimator API free of temp files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import _rng
from .validation import check_at_least, check_positive, check_readable_file

CorpusSource = Union[str, Path, Sequence[Sequence[str]]]

DEFAULT_MAX_VOCAB = 200_000
DEFAULT_SUBSAMPLE_T = 1e-5
DEFAULT_NOISE_ALPHA = 0.75


def _iter_sentences(source: CorpusSource) -> Iterator[list[str]]:
    """Yield token lists; every input line counts as one sentence."""
    if isinstance(source, (str, Path)):
        check_readable_file(source)
        with open(source, encoding="utf-8") as fh:
            for line in fh:
                yield line.split()
    else:
        for sent in source:
            yield list(sent)


@dataclass
class Vocabulary:
    """Frequency-ranked word table.

    Ids are dense 0..V-1, ordered by non-increasing raw count with ties
    broken by first occurrence in the corpus.  ``counts`` are raw corpus
    frequencies; ``total_tokens`` sums the counts of *retained* words and
    is the denominator for relative frequencies.
    """

    words: list[str]
    counts: np.ndarray
    total_tokens: int
    total_sentences: int
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.words) != len(self.counts):
            raise ValueError("words and counts length mismatch")
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id_of(self, word: str) -> int:
        return self.index[word]

    def save_tsv(self, path) -> None:
        """Write "word<TAB>count" lines in rank order."""
        with open(path, "w", encoding="utf-8") as fh:
            for w, c in zip(self.words, self.counts):
                fh.write(f"{w}\t{int(c)}\n")

    @classmethod
    def load_tsv(cls, path) -> "Vocabulary":
        words, counts = [], []
        check_readable_file(path)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>count'")
                words.append(parts[0])
                counts.append(int(parts[1]))
        arr = np.asarray(counts, dtype=np.int64)
        return cls(words=words, counts=arr, total_tokens=int(arr.sum()), total_sentences=0)


def build_vocab(source: CorpusSource, max_vocab: int = DEFAULT_MAX_VOCAB) -> Vocabulary:
    """Count all tokens, then keep the ``max_vocab`` most frequent.

    Counts reflect the full corpus; truncation only limits which words are
    retained.  Raises on an empty corpus (zero tokens).
    """
    check_at_least("max_vocab", max_vocab, 1)
    counts: dict[str, int] = {}
    n_sentences = 0
    for tokens in _iter_sentences(source):
        n_sentences += 1
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
    if not counts:
        raise ValueError("corpus contains no tokens")
    # dict preserves first-occurrence order, which breaks count ties
    order = sorted(enumerate(counts.items()), key=lambda t: (-t[1][1], t[0]))
    kept = order[:max_vocab]
    words = [w for _, (w, _) in kept]
    kept_counts = np.array([c for _, (_, c) in kept], dtype=np.int64)
    return Vocabulary(
        words=words,
        counts=kept_counts,
        total_tokens=int(kept_counts.sum()),
        total_sentences=n_sentences,
    )


def subsample_keep_prob(count: int, total_tokens: int, t: float) -> float:
    """Probability of keeping one occurrence of a word with the given count.

    word2vec's discard rule, expressed as a keep probability:
    keep = min(1, sqrt(t/f) + t/f) with f = count/total_tokens.  Words at or
    below relative frequency t are always kept.
    """
    check_positive("t", t)
    if not 0 < count <= total_tokens:
        raise ValueError("need 0 < count <= total_tokens")
    f = count / total_tokens
    return min(1.0, math.sqrt(t / f) + t / f)


@dataclass
class NoiseTable:
    """Alias-method sampler for the noise distribution P(w) ∝ count(w)**alpha."""

    prob: np.ndarray  # acceptance probability per slot, float64
    alias: np.ndarray  # alias word id per slot, int32
    alpha: float

    @property
    def size(self) -> int:
        return len(self.prob)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized draws (test/analysis path; the trainer draws in-kernel)."""
        idx = rng.integers(0, self.size, size=size)
        coin = rng.random(size)
        return np.where(coin < self.prob[idx], idx, self.alias[idx]).astype(np.int64)


def build_noise_table(vocab: Vocabulary, alpha: float = DEFAULT_NOISE_ALPHA) -> NoiseTable:
    """Vose alias construction over count**alpha."""
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    weights = np.asarray(vocab.counts, dtype=np.float64) ** alpha
    p = weights / weights.sum()
    n = len(p)
    prob = np.zeros(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int32)
    scaled = p * n
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] + scaled[s] - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    for i in large:
        prob[i] = 1.0
    for i in small:  # numerical leftovers
        prob[i] = 1.0
    return NoiseTable(prob=prob, alias=alias, alpha=alpha)


@dataclass
class CorpusStream:
    """Repeatable, seeded iterator over encoded sentences with subsampling.

    Encoding drops out-of-vocabulary tokens once; subsampling is redrawn
    per epoch from a per-(seed, epoch, sentence) RNG, so the stream for a
    given epoch does not depend on sharding or thread count.
    """

    source: CorpusSource
    vocab: Vocabulary
    subsample_t: float = DEFAULT_SUBSAMPLE_T
    rng_seed: int = 0

    def __post_init__(self):
        check_positive("subsample_t", self.subsample_t)
        if self.vocab.total_tokens <= 0:
            raise ValueError("vocabulary carries no counts; cannot stream")
        self._tokens: np.ndarray | None = None
        self._offsets: np.ndarray | None = None

    def encoded(self) -> tuple[np.ndarray, np.ndarray]:
        """(flat int32 token ids, int64 sentence offsets), OOV removed."""
        if self._tokens is None:
            ids: list[int] = []
            offsets = [0]
            index = self.vocab.index
            for tokens in _iter_sentences(self.source):
                ids.extend(index[t] for t in tokens if t in index)
                offsets.append(len(ids))
            self._tokens = np.asarray(ids, dtype=np.int32)
            self._offsets = np.asarray(offsets, dtype=np.int64)
        return self._tokens, self._offsets

    @property
    def n_sentences(self) -> int:
        return len(self.encoded()[1]) - 1

    @property
    def max_sentence_len(self) -> int:
        _, offsets = self.encoded()
        return int(np.diff(offsets).max()) if len(offsets) > 1 else 0

    def keep_probs(self) -> np.ndarray:
        """Per-word keep probabilities under the stream's threshold."""
        counts = self.vocab.counts
        total = self.vocab.total_tokens
        return np.array(
            [subsample_keep_prob(int(c), total, self.subsample_t) for c in counts],
            dtype=np.float64,
        )

    def iter_sentences(self, epoch: int = 0, limit: int | None = None) -> Iterator[np.ndarray]:
        """Kept token ids per sentence after subsampling (reference path)."""
        tokens, offsets = self.encoded()
        keep = self.keep_probs()
        n = self.n_sentences if limit is None else min(limit, self.n_sentences)
        for s in range(n):
            state = _rng.sentence_state(self.rng_seed, epoch, s, _rng.STRUCT_TAG)
            kept = []
            for t in range(offsets[s], offsets[s + 1]):
                w = int(tokens[t])
                state, v = _rng.next_u64(state)
                if _rng.to_unit(v) < keep[w]:
                    kept.append(w)
            yield np.asarray(kept, dtype=np.int32)


def stream_pairs(
    stream: CorpusStream, window: int, epoch: int = 0, limit: int | None = None
) -> Iterator[tuple[int, int]]:
    """All (center, context) pairs under a per-center dynamic window.

    The window size b is drawn uniformly from 1..window for each kept
    center token; subsampled and OOV tokens are removed before windowing.
    Fully determined by (corpus, stream seed, epoch, window).
    """
    check_at_least("window", window, 1)
    tokens, offsets = stream.encoded()
    keep = stream.keep_probs()
    n = stream.n_sentences if limit is None else min(limit, stream.n_sentences)
    for s in range(n):
        state = _rng.sentence_state(stream.rng_seed, epoch, s, _rng.STRUCT_TAG)
        kept = []
        for t in range(offsets[s], offsets[s + 1]):
            w = int(tokens[t])
            state, v = _rng.next_u64(state)
            if _rng.to_unit(v) < keep[w]:
                kept.append(w)
        for i, center in enumerate(kept):
            state, v = _rng.next_u64(state)
            b = 1 + _rng.to_below(v, window)
            lo = max(0, i - b)
            hi = min(len(kept), i + b + 1)
            for j in range(lo, hi):
                if j != i:
                    yield center, kept[j]
