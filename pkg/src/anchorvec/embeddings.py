"""Embedding matrices and word2vec-compatible text I/O.

Each language/role combination (source/target x input/output) is one
matrix.  Training mutates raw matrices in place; retrieval always works on
unit-normalized copies, never on the training arrays themselves.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary
from .validation import check_at_least, check_finite, check_readable_file

ROLE_INPUT = "input"
ROLE_OUTPUT = "output"


@dataclass
class EmbeddingMatrix:
    vocab: Vocabulary
    rows: np.ndarray  # (V, dim)
    role: str = ROLE_INPUT
    language_tag: str = ""

    def __post_init__(self):
        self.rows = np.asarray(self.rows)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if len(self.vocab) != self.rows.shape[0]:
            raise ValueError(
                f"row count {self.rows.shape[0]} != vocab size {len(self.vocab)}"
            )
        if self.role not in (ROLE_INPUT, ROLE_OUTPUT):
            raise ValueError(f"unknown role {self.role!r}")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def vector(self, word: str) -> np.ndarray:
        return self.rows[self.vocab.id_of(word)]

    def checksum(self) -> str:
        return hashlib.sha1(np.ascontiguousarray(self.rows).tobytes()).hexdigest()


@dataclass
class EmbeddingPair:
    """Input and output matrices of one SGNS model, sharing vocab and dim."""

    input: EmbeddingMatrix
    output: EmbeddingMatrix

    def __post_init__(self):
        if self.input.vocab is not self.output.vocab and self.input.vocab.words != self.output.vocab.words:
            raise ValueError("input/output matrices must share a vocabulary")
        if self.input.dim != self.output.dim:
            raise ValueError("input/output matrices must share dim")

    @property
    def vocab(self) -> Vocabulary:
        return self.input.vocab

    @property
    def dim(self) -> int:
        return self.input.dim


def init_random(
    vocab: Vocabulary,
    dim: int,
    seed: int,
    dtype=np.float32,
    language_tag: str = "",
) -> EmbeddingPair:
    """Fresh SGNS state: input rows uniform in [-0.5/dim, 0.5/dim], output rows zero."""
    check_at_least("dim", dim, 1)
    rng = np.random.default_rng(seed)
    inp = ((rng.random((len(vocab), dim)) - 0.5) / dim).astype(dtype)
    out = np.zeros((len(vocab), dim), dtype=dtype)
    return EmbeddingPair(
        input=EmbeddingMatrix(vocab, inp, ROLE_INPUT, language_tag),
        output=EmbeddingMatrix(vocab, out, ROLE_OUTPUT, language_tag),
    )


def save_text(matrix: EmbeddingMatrix, path) -> None:
    """word2vec text format: header "V dim", then "word v1 ... vdim" lines.

    Values are printed with 9 significant digits, which round-trips float32
    exactly and keeps the output byte-stable for identical matrices.
    """
    if len(matrix) == 0:
        raise ValueError("refusing to save an empty embedding matrix")
    check_finite("embedding rows", matrix.rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(matrix)} {matrix.dim}\n")
        for word, row in zip(matrix.vocab.words, matrix.rows):
            vals = " ".join(format(float(v), ".9g") for v in row)
            fh.write(f"{word} {vals}\n")


def load_text(
    path,
    dtype=np.float32,
    role: str = ROLE_INPUT,
    language_tag: str = "",
) -> EmbeddingMatrix:
    """Load a word2vec text file.

    The resulting vocabulary has file-order words and zero counts: it
    supports retrieval and evaluation but not corpus streaming.
    """
    check_readable_file(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header, expected 'V dim'")
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ValueError(f"{path}: malformed header, expected 'V dim'") from exc
        words: list[str] = []
        rows = np.empty((n, dim), dtype=np.float64)
        for i in range(n):
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: expected {n} rows, file ended at {i}")
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}: row {i} has {len(parts) - 1} values, expected {dim}"
                )
            words.append(parts[0])
            rows[i] = [float(x) for x in parts[1:]]
        if fh.readline().strip():
            raise ValueError(f"{path}: trailing content after {n} rows")
    check_finite(f"{path} rows", rows)
    counts = np.zeros(n, dtype=np.int64)
    vocab = Vocabulary(words=words, counts=counts, total_tokens=0, total_sentences=0)
    return EmbeddingMatrix(vocab, rows.astype(dtype), role, language_tag)


def save_pair(pair: EmbeddingPair, prefix) -> tuple[str, str]:
    """Write {prefix}.in.vec and {prefix}.out.vec; returns the two paths."""
    pin, pout = f"{prefix}.in.vec", f"{prefix}.out.vec"
    save_text(pair.input, pin)
    save_text(pair.output, pout)
    return pin, pout


def load_pair(prefix, dtype=np.float32, language_tag: str = "") -> EmbeddingPair:
    inp = load_text(f"{prefix}.in.vec", dtype, ROLE_INPUT, language_tag)
    out = load_text(f"{prefix}.out.vec", dtype, ROLE_OUTPUT, language_tag)
    if inp.vocab.words != out.vocab.words:
        raise ValueError(f"{prefix}: input/output files disagree on vocabulary")
    out.vocab = inp.vocab
    return EmbeddingPair(input=inp, output=out)


def unit_normalize_copy(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """L2-normalized copy for cosine/CSLS retrieval; the original is untouched.

    Zero rows cannot be normalized; the error names the offending words.
    """
    norms = np.linalg.norm(matrix.rows.astype(np.float64), axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        names = ", ".join(matrix.vocab.words[i] for i in zero[:5])
        more = "" if zero.size <= 5 else f" (+{zero.size - 5} more)"
        raise ValueError(f"cannot normalize zero rows for: {names}{more}")
    rows = (matrix.rows.astype(np.float64) / norms[:, None]).astype(matrix.rows.dtype)
    return EmbeddingMatrix(matrix.vocab, rows, matrix.role, matrix.language_tag)
