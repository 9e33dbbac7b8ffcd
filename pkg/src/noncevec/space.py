"""Vocabulary, embedding matrices, similarity ranking and persistence.

A :class:`SemanticSpace` pairs a :class:`Vocabulary` with two matrices of
shape ``|V| x d``: the word (input) vectors that consumers care about, and
the context (output) weights that training needs. Row ``i`` of either
matrix always belongs to vocabulary entry ``i``.

On disk a space is three files sharing a prefix path:

* ``path`` -- the word vectors, text or binary layout (see
  :func:`save_space`),
* ``path.vocab`` -- ``token<TAB>count`` lines, needed to resume training,
* ``path.out`` -- the context weights, same layout as ``path``.

Loading a bare vector file produced elsewhere still works: missing
sidecars fall back to count 1 per word and all-zero context weights.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import FormatError

__all__ = [
    "Vocabulary",
    "SemanticSpace",
    "NeighborList",
    "cosine",
    "save_space",
    "load_space",
]

_CHUNK_ROWS = 65536  # rows per block when scoring the whole vocabulary


class Vocabulary:
    """Ordered word -> row-id map with corpus counts.

    Entry order is fixed at construction time (the trainer sorts by
    descending count); new words are appended. ``index`` is a bijection
    onto ``range(len(vocab))`` at all times.
    """

    __slots__ = ("words", "counts", "index", "_total")

    def __init__(self, items: Iterable[tuple[str, int]] = ()):
        self.words: list[str] = []
        self.counts: list[int] = []
        self.index: dict[str, int] = {}
        self._total = 0
        for word, count in items:
            self.add(word, count)

    def add(self, word: str, count: int = 1) -> int:
        """Append ``word`` and return its row id. Duplicate words are an error."""
        if word in self.index:
            raise ValueError(f"duplicate word in vocabulary: {word!r}")
        if count < 0:
            raise ValueError(f"negative count for {word!r}: {count}")
        row = len(self.words)
        self.words.append(word)
        self.counts.append(count)
        self.index[word] = row
        self._total += count
        return row

    def rename(self, old: str, new: str) -> None:
        """Change the key of an entry; row id and count stay put."""
        if old not in self.index:
            raise KeyError(f"word not in vocabulary: {old!r}")
        if new in self.index:
            raise ValueError(f"target label already present: {new!r}")
        row = self.index.pop(old)
        self.words[row] = new
        self.index[new] = row

    @property
    def total_tokens(self) -> int:
        return self._total

    def items(self) -> Iterator[tuple[str, int]]:
        return zip(self.words, self.counts)

    def copy(self) -> "Vocabulary":
        dup = Vocabulary()
        dup.words = list(self.words)
        dup.counts = list(self.counts)
        dup.index = dict(self.index)
        dup._total = self._total
        return dup

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> int:
        return self.index[word]


@dataclass
class NeighborList:
    """Ranked cosine neighbors of a query vector or word."""

    query: object
    items: list[tuple[str, float]] = field(default_factory=list)

    def words(self) -> list[str]:
        return [w for w, _ in self.items]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two vectors; 0.0 if either has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class SemanticSpace:
    """A vocabulary plus its input/output embedding matrices."""

    def __init__(
        self,
        vocab: Vocabulary,
        input_vectors: np.ndarray,
        output_vectors: np.ndarray | None = None,
    ):
        input_vectors = np.ascontiguousarray(input_vectors, dtype=np.float32)
        if input_vectors.ndim != 2 or input_vectors.shape[0] != len(vocab):
            raise ValueError(
                f"input matrix shape {input_vectors.shape} does not match "
                f"vocabulary of {len(vocab)} words"
            )
        if output_vectors is None:
            output_vectors = np.zeros_like(input_vectors)
        output_vectors = np.ascontiguousarray(output_vectors, dtype=np.float32)
        if output_vectors.shape != input_vectors.shape:
            raise ValueError(
                f"output matrix shape {output_vectors.shape} does not match "
                f"input matrix shape {input_vectors.shape}"
            )
        self.vocab = vocab
        self.input_vectors = input_vectors
        self.output_vectors = output_vectors

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def row(self, word: str) -> int:
        try:
            return self.vocab.index[word]
        except KeyError:
            raise KeyError(f"word not in vocabulary: {word!r}") from None

    def vector(self, word: str) -> np.ndarray:
        """The input (word) vector; a view, do not mutate."""
        return self.input_vectors[self.row(word)]

    def copy(self) -> "SemanticSpace":
        return SemanticSpace(
            self.vocab.copy(),
            self.input_vectors.copy(),
            self.output_vectors.copy(),
        )

    def add_word(self, word: str, init: np.ndarray, count: int = 1) -> int:
        """Append a word with the given input vector and a zero output row."""
        init = np.asarray(init, dtype=np.float32)
        if init.shape != (self.dim,):
            raise ValueError(
                f"init vector has shape {init.shape}, expected ({self.dim},)"
            )
        row = self.vocab.add(word, count)
        self.input_vectors = np.vstack([self.input_vectors, init[None, :]])
        self.output_vectors = np.vstack(
            [self.output_vectors, np.zeros((1, self.dim), dtype=np.float32)]
        )
        return row

    def relabel(self, old: str, new: str) -> None:
        """Rename a vocabulary entry; its vectors are untouched."""
        self.vocab.rename(old, new)

    def _cosines(self, query: np.ndarray) -> np.ndarray:
        """Cosine of the query against every row, computed in float64."""
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query has shape {q.shape}, expected ({self.dim},)")
        qn = np.linalg.norm(q)
        sims = np.zeros(len(self.vocab), dtype=np.float64)
        if qn == 0.0:
            return sims
        for start in range(0, len(self.vocab), _CHUNK_ROWS):
            block = self.input_vectors[start : start + _CHUNK_ROWS].astype(np.float64)
            norms = np.linalg.norm(block, axis=1)
            dots = block @ q
            nz = norms > 0.0
            sims[start : start + block.shape[0]][nz] = dots[nz] / (norms[nz] * qn)
        return sims

    def nearest_neighbors(
        self,
        query: np.ndarray | str,
        k: int,
        exclude: Iterable[str] = (),
    ) -> NeighborList:
        """Top-``k`` vocabulary words by cosine to ``query``.

        ``query`` may be a raw vector or an in-vocabulary word; a word
        query is excluded from its own result. Ties are broken by
        ascending row id, so the ordering is deterministic.
        """
        if len(self.vocab) == 0:
            raise ValueError("empty vocabulary")
        excluded = set(exclude)
        if isinstance(query, str):
            excluded.add(query)
            vec = self.vector(query)
        else:
            vec = query
        sims = self._cosines(vec)
        order = np.lexsort((np.arange(len(sims)), -sims))
        out = NeighborList(query=query)
        for row in order:
            if len(out.items) >= max(k, 0):
                break
            word = self.vocab.words[row]
            if word in excluded:
                continue
            out.items.append((word, float(sims[row])))
        return out

    def rank_of(
        self,
        query: np.ndarray,
        target_word: str,
        exclude: Iterable[str] = (),
    ) -> int:
        """1-based rank of ``target_word`` in the descending-cosine ordering.

        The ordering runs over all vocabulary rows not in ``exclude``;
        equal similarities rank by ascending row id.
        """
        excluded = set(exclude)
        if target_word in excluded:
            raise ValueError(f"target {target_word!r} is in the exclude set")
        target_row = self.row(target_word)
        sims = self._cosines(query)
        target_sim = sims[target_row]
        rank = 1
        for row, word in enumerate(self.vocab.words):
            if row == target_row or word in excluded:
                continue
            if sims[row] > target_sim or (sims[row] == target_sim and row < target_row):
                rank += 1
        return rank


# ---------------------------------------------------------------------------
# Persistence


def _vocab_sidecar(path: str) -> str:
    return path + ".vocab"


def _output_sidecar(path: str) -> str:
    return path + ".out"


def save_space(space: SemanticSpace, path: str, fmt: str = "binary") -> None:
    """Write a space to ``path`` (+ ``.vocab`` and ``.out`` sidecars).

    Text layout: a ``"|V| d"`` header line, then one line per word with
    the token and ``d`` space-separated decimals. Binary layout: the same
    header line, then per word the UTF-8 token, a single space, and ``d``
    little-endian 4-byte IEEE-754 floats.
    """
    _write_matrix(path, space.vocab.words, space.input_vectors, fmt)
    _write_matrix(_output_sidecar(path), space.vocab.words, space.output_vectors, fmt)
    with open(_vocab_sidecar(path), "w", encoding="utf-8") as fh:
        for word, count in space.vocab.items():
            fh.write(f"{word}\t{count}\n")


def load_space(path: str, fmt: str = "binary") -> SemanticSpace:
    """Load a space written by :func:`save_space`.

    Plain vector files are accepted too: without the ``.vocab`` sidecar
    every count defaults to 1, and without the ``.out`` sidecar the
    output matrix is zero.
    """
    words, vectors = _read_matrix(path, fmt)
    counts = _read_counts(_vocab_sidecar(path), words)
    out_path = _output_sidecar(path)
    if os.path.exists(out_path):
        out_words, output = _read_matrix(out_path, fmt)
        if out_words != words:
            raise FormatError(f"{out_path}: token order differs from {path}")
        if output.shape != vectors.shape:
            raise FormatError(
                f"{out_path}: matrix shape {output.shape} differs from {vectors.shape}"
            )
    else:
        output = None
    vocab = Vocabulary(zip(words, counts))
    return SemanticSpace(vocab, vectors, output)


def _write_matrix(path: str, words: Sequence[str], matrix: np.ndarray, fmt: str) -> None:
    n, d = matrix.shape
    if fmt == "text":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{n} {d}\n")
            for word, row in zip(words, matrix):
                fh.write(word + " " + " ".join(f"{x:.6f}" for x in row) + "\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(f"{n} {d}\n".encode("utf-8"))
            for word, row in zip(words, matrix):
                fh.write(word.encode("utf-8") + b" ")
                fh.write(row.astype("<f4").tobytes())
    else:
        raise ValueError(f"unknown format: {fmt!r} (expected 'text' or 'binary')")


def _parse_header(line: str, path: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise FormatError(f"{path}: malformed header {line.strip()!r}")
    try:
        n, d = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"{path}: malformed header {line.strip()!r}") from None
    if n < 0 or d <= 0:
        raise FormatError(f"{path}: malformed header {line.strip()!r}")
    return n, d


def _read_matrix(path: str, fmt: str) -> tuple[list[str], np.ndarray]:
    if fmt == "text":
        return _read_text_matrix(path)
    if fmt == "binary":
        return _read_binary_matrix(path)
    raise ValueError(f"unknown format: {fmt!r} (expected 'text' or 'binary')")


def _read_text_matrix(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise FormatError(f"{path}: empty file")
        n, d = _parse_header(header, path)
        words: list[str] = []
        seen: set[str] = set()
        matrix = np.empty((n, d), dtype=np.float32)
        for i in range(n):
            line = fh.readline()
            if not line:
                raise FormatError(
                    f"{path}: truncated after {i} of {n} records"
                )
            parts = line.rstrip("\n").split(" ")
            token = parts[0]
            if len(parts) != d + 1:
                raise FormatError(
                    f"{path}: record {i} ({token!r}) has {len(parts) - 1} "
                    f"components, expected {d}"
                )
            if token in seen:
                raise FormatError(f"{path}: duplicate token {token!r} at record {i}")
            try:
                matrix[i] = np.array(parts[1:], dtype=np.float32)
            except ValueError:
                raise FormatError(
                    f"{path}: record {i} ({token!r}) has a non-numeric component"
                ) from None
            words.append(token)
            seen.add(token)
        if fh.read().strip():
            raise FormatError(f"{path}: trailing data after {n} records")
    return words, matrix


def _read_binary_matrix(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    nl = blob.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing header line")
    n, d = _parse_header(blob[:nl].decode("utf-8", errors="replace"), path)
    rec_bytes = 4 * d
    pos = nl + 1
    words: list[str] = []
    seen: set[str] = set()
    matrix = np.empty((n, d), dtype=np.float32)
    for i in range(n):
        while pos < len(blob) and blob[pos : pos + 1] == b"\n":
            pos += 1  # some writers pad records with newlines
        sep = blob.find(b" ", pos)
        if sep < 0:
            raise FormatError(f"{path}: truncated after {i} of {n} records")
        token = blob[pos:sep].decode("utf-8", errors="replace")
        pos = sep + 1
        if pos + rec_bytes > len(blob):
            raise FormatError(
                f"{path}: truncated in record {i} ({token!r}); "
                f"expected {rec_bytes} vector bytes"
            )
        if token in seen:
            raise FormatError(f"{path}: duplicate token {token!r} at record {i}")
        matrix[i] = np.frombuffer(blob, dtype="<f4", count=d, offset=pos)
        pos += rec_bytes
        words.append(token)
        seen.add(token)
    if blob[pos:].strip(b"\n"):
        raise FormatError(f"{path}: trailing data after {n} records")
    return words, matrix


def _read_counts(path: str, words: list[str]) -> list[int]:
    if not os.path.exists(path):
        return [1] * len(words)
    counts: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'token<TAB>count'")
            try:
                count = int(parts[1])
            except ValueError:
                raise FormatError(
                    f"{path}:{lineno}: non-integer count {parts[1]!r}"
                ) from None
            if parts[0] in counts:
                raise FormatError(f"{path}:{lineno}: duplicate token {parts[0]!r}")
            counts[parts[0]] = count
    missing = [w for w in words if w not in counts]
    if missing:
        raise FormatError(f"{path}: no count for token {missing[0]!r}")
    return [counts[w] for w in words]
