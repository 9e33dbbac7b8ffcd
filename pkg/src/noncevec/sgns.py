"""Skip-gram negative-sampling trainer for the background space.

The corpus contract is plain UTF-8 text, one pre-tokenized sentence per
line, tokens separated by single spaces; tokens are lowercased on read.
Windows never cross sentence boundaries.

:func:`train_background` does the full job: vocabulary pass, seeded
initialization, subsampling, per-position random window resizing, and a
learning rate that decays linearly with corpus progress. The hot loop is
jit-compiled (see ``_kernel``); the pure-Python :func:`sgd_step` is the
reference update used by the few-shot learner and by tests.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from . import _kernel
from .errors import DivergenceError
from .space import SemanticSpace, Vocabulary

__all__ = [
    "TrainConfig",
    "CorpusFile",
    "build_vocab",
    "keep_probability",
    "NoiseTable",
    "draw_negatives",
    "sgd_step",
    "train_background",
    "init_vector",
]

logger = logging.getLogger(__name__)

_CHUNK_TOKENS = 1_000_000  # tokens per kernel call at workers=1 (progress tick)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the background training phase."""

    alpha0: float = 0.025
    alpha_min: float = 0.0001
    window: int = 5
    negatives: int = 5
    subsample_t: float = 1e-3
    epochs: int = 5
    min_count: int = 50
    dim: int = 400
    noise_exponent: float = 0.75
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if not self.alpha0 > self.alpha_min > 0:
            raise ValueError(
                f"need alpha0 > alpha_min > 0, got {self.alpha0}, {self.alpha_min}"
            )
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if not self.subsample_t > 0:
            raise ValueError(f"subsample_t must be > 0, got {self.subsample_t}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


class CorpusFile:
    """Re-iterable corpus reader: one sentence per line, tokens lowercased."""

    def __init__(self, path: str | Path):
        self.path = str(path)

    def __iter__(self) -> Iterator[list[str]]:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                tokens = line.lower().split()
                if tokens:
                    yield tokens


def build_vocab(corpus: Iterable[list[str]], min_count: int) -> Vocabulary:
    """Count the corpus and keep words occurring at least ``min_count`` times.

    Entries are ordered by descending count, ties by first occurrence, so
    the resulting row ids are deterministic.
    """
    counts: Counter[str] = Counter()
    arrival: dict[str, int] = {}
    n_tokens = 0
    for sentence in corpus:
        for token in sentence:
            if token not in arrival:
                arrival[token] = n_tokens
            n_tokens += 1
        counts.update(sentence)
    if n_tokens == 0:
        raise ValueError("empty corpus")
    kept = [w for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda w: (-counts[w], arrival[w]))
    if not kept:
        raise ValueError(f"no word reaches min_count={min_count}")
    return Vocabulary((w, counts[w]) for w in kept)


def keep_probability(count: int, total: int, t: float) -> float:
    """Probability of keeping an occurrence of a word under subsampling.

    With z = count/total this is min(1, (sqrt(z/t) + 1) * t/z): rare words
    (z <= t) are always kept, frequent ones are dropped increasingly often.
    """
    z = count / total
    p = (np.sqrt(z / t) + 1.0) * (t / z)
    return float(min(max(p, 0.0), 1.0))


class NoiseTable:
    """Negative-sampling distribution P(w) proportional to count^exponent."""

    def __init__(self, vocab: Vocabulary, exponent: float = 0.75):
        if len(vocab) < 2:
            raise ValueError("noise table needs a vocabulary of size >= 2")
        weights = np.asarray(vocab.counts, dtype=np.float64) ** exponent
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        self.cdf = cdf

    def __len__(self) -> int:
        return len(self.cdf)

    def draw(self, rng: np.random.Generator, k: int, forbidden: int = -1) -> list[int]:
        """Draw ``k`` ids i.i.d.; draws equal to ``forbidden`` are retried."""
        out: list[int] = []
        while len(out) < k:
            ids = np.searchsorted(self.cdf, rng.random(k - len(out)), side="right")
            out.extend(int(i) for i in ids if i != forbidden)
        return out


def draw_negatives(
    table: NoiseTable, k: int, forbidden: int, rng: np.random.Generator
) -> list[int]:
    """Module-level alias for :meth:`NoiseTable.draw`."""
    return table.draw(rng, k, forbidden)


def sgd_step(
    space: SemanticSpace,
    target: int,
    context: int,
    negatives: list[int],
    alpha: float,
    freeze_context: bool = False,
    freeze_target: bool = False,
) -> float:
    """One negative-sampling update for a (target, context) pair.

    With v the target's input row, u_c the context's output row and u_n
    the output rows of the negatives, the loss is

        L = -log sigma(v . u_c) - sum_n log sigma(-v . u_n)

    and all rows move one gradient step of size ``alpha`` unless their
    freeze flag is set (``freeze_target`` pins v, ``freeze_context`` pins
    every output row). Returns L evaluated before the update.
    """
    v = space.input_vectors[target].astype(np.float64)
    rows = np.asarray([context] + list(negatives), dtype=np.intp)
    U = space.output_vectors[rows].astype(np.float64)
    dots = U @ v
    if not np.all(np.isfinite(dots)):
        raise DivergenceError(
            f"non-finite dot product in update for rows ({target}, {context})"
        )
    # loss: -log sigma(x) == log(1 + exp(-x)), negatives flip the sign
    loss = float(np.logaddexp(0.0, -dots[0]) + np.logaddexp(0.0, dots[1:]).sum())
    labels = np.zeros(len(rows), dtype=np.float64)
    labels[0] = 1.0
    sig = 1.0 / (1.0 + np.exp(-dots))
    g = (labels - sig) * alpha  # signed step per output row
    if not (np.isfinite(loss) and np.all(np.isfinite(g))):
        raise DivergenceError(
            f"non-finite gradient in update for rows ({target}, {context})"
        )
    delta_v = (g @ U).astype(np.float32)
    delta_u = np.outer(g, v).astype(np.float32)
    if not (np.all(np.isfinite(delta_v)) and np.all(np.isfinite(delta_u))):
        raise DivergenceError(
            f"update for rows ({target}, {context}) overflows float32"
        )
    if not freeze_target:
        space.input_vectors[target] += delta_v
    if not freeze_context:
        np.add.at(space.output_vectors, rows, delta_u)
    return loss


def init_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Fresh-word initialization: uniform in [-0.5/dim, 0.5/dim)."""
    return ((rng.random(dim, dtype=np.float64) - 0.5) / dim).astype(np.float32)


def _encode_corpus(
    corpus: Iterable[list[str]], vocab: Vocabulary
) -> tuple[np.ndarray, np.ndarray]:
    """Map the corpus to row ids, dropping OOV tokens and empty sentences."""
    index = vocab.index
    ids: list[int] = []
    offsets: list[int] = [0]
    for sentence in corpus:
        n_before = len(ids)
        for token in sentence:
            row = index.get(token)
            if row is not None:
                ids.append(row)
        if len(ids) > n_before:
            offsets.append(len(ids))
    return (
        np.asarray(ids, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
    )


def train_background(
    corpus: Iterable[list[str]] | str | Path,
    config: TrainConfig,
    progress: Callable[[int, int, float], None] | None = None,
) -> SemanticSpace:
    """Train a semantic space over the corpus with the given configuration.

    ``corpus`` may be a path (read via :class:`CorpusFile`) or any
    re-iterable of token sentences. The encoded corpus is held in memory
    for the epoch passes. ``progress`` is called as ``(tokens_done,
    tokens_total, alpha)`` roughly every couple of million tokens.

    With ``workers > 1`` sentence shards are trained concurrently and row
    updates race (lock-free); run-to-run bit reproducibility is only
    guaranteed at ``workers=1``.
    """
    if isinstance(corpus, (str, Path)):
        corpus = CorpusFile(corpus)
    vocab = build_vocab(corpus, config.min_count)
    token_ids, sent_offsets = _encode_corpus(corpus, vocab)
    total = int(token_ids.shape[0])
    if total == 0:
        raise ValueError("corpus has no in-vocabulary tokens")

    rng = np.random.default_rng(config.seed)
    inputs = ((rng.random((len(vocab), config.dim), dtype=np.float64) - 0.5) / config.dim).astype(
        np.float32
    )
    outputs = np.zeros((len(vocab), config.dim), dtype=np.float32)
    space = SemanticSpace(vocab, inputs, outputs)

    counts = np.asarray(vocab.counts, dtype=np.float64)
    z = counts / vocab.total_tokens
    keep = np.minimum((np.sqrt(z / config.subsample_t) + 1.0) * (config.subsample_t / z), 1.0)
    noise_cdf = NoiseTable(vocab, config.noise_exponent).cdf

    total_train_words = float(config.epochs * total + 1)
    max_len = int(np.max(np.diff(sent_offsets)))

    def run_slice(first: int, last: int, epoch: int) -> None:
        status = _kernel.train_sentences(
            space.input_vectors,
            space.output_vectors,
            token_ids,
            sent_offsets[first : last + 1],
            sent_offsets[first:last],
            keep,
            noise_cdf,
            config.window,
            config.negatives,
            config.alpha0,
            config.alpha_min,
            total_train_words,
            np.uint64(config.seed),
            epoch,
            float(epoch * total),
            first,
            max_len,
        )
        if status >= 0:
            raise DivergenceError(
                f"non-finite value while training sentence {first + status} "
                f"of epoch {epoch}"
            )

    n_sentences = sent_offsets.shape[0] - 1
    for epoch in range(config.epochs):
        if config.workers == 1:
            first = 0
            while first < n_sentences:
                last = int(
                    np.searchsorted(
                        sent_offsets, sent_offsets[first] + _CHUNK_TOKENS, side="left"
                    )
                )
                last = max(first + 1, min(last, n_sentences))
                run_slice(first, last, epoch)
                first = last
                if progress is not None:
                    done = epoch * total + int(sent_offsets[min(first, n_sentences)])
                    alpha = max(
                        config.alpha_min,
                        config.alpha0 * (1.0 - done / total_train_words),
                    )
                    progress(done, config.epochs * total, alpha)
        else:
            bounds = np.linspace(0, n_sentences, config.workers + 1, dtype=np.int64)
            errors: list[BaseException] = []

            def work(first: int, last: int) -> None:
                try:
                    if last > first:
                        run_slice(first, last, epoch)
                except BaseException as exc:  # propagate to the caller
                    errors.append(exc)

            threads = [
                threading.Thread(target=work, args=(int(bounds[i]), int(bounds[i + 1])))
                for i in range(config.workers)
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            if errors:
                raise errors[0]
            if progress is not None:
                done = (epoch + 1) * total
                alpha = max(
                    config.alpha_min, config.alpha0 * (1.0 - done / total_train_words)
                )
                progress(done, config.epochs * total, alpha)
    return space
