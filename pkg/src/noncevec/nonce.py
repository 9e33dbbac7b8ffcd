"""Learning a vector for an unseen word from a handful of sentences.

The learner starts from additive initialization (sum of the known context
words), then runs skip-gram updates in which only the new word's input
row moves, at a learning rate that starts high and decays exponentially
with every trained pair. Risk is further contained by schedules that
tighten per sentence: the context half-window shrinks linearly and the
effective subsampling threshold is divided by a constant factor, so later
(possibly less informative) sentences get more conservative treatment.

Two reference baselines live here as well: the plain additive model with
stopword removal (:func:`sum_baseline`) and a "vanilla" incremental
update that treats the new word like any other under standard background
hyperparameters (``mode="vanilla"`` of :func:`learn_nonce`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .data import SLOT
from .errors import DivergenceError, FormatError, UnevaluableError
from .sgns import NoiseTable, TrainConfig, init_vector, keep_probability, sgd_step
from .space import SemanticSpace

__all__ = [
    "NonceConfig",
    "NonceSession",
    "decayed_alpha",
    "window_schedule",
    "sum_initialize",
    "sum_baseline",
    "learn_nonce",
]


@dataclass(frozen=True)
class NonceConfig:
    """Hyperparameters of the few-shot phase.

    Defaults are the best configuration found by grid search: window of
    15 words, 3 negatives, learning rate 1.0 with exponential decay
    lambda = 1/70, subsampling multiplier 10000, one epoch, per-sentence
    window decrease of 5 down to a floor of 3, per-sentence subsampling
    division by 1.9.
    """

    alpha0: float = 1.0
    lambda_: float = 1.0 / 70.0
    window0: int = 15
    window_decay: int = 5
    window_min: int = 3
    negatives: int = 3
    epochs: int = 1
    subsample_mult0: float = 10000.0
    subsample_factor: float = 1.9
    background_subsample_t: float = 1e-3
    seed: int = 1

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        if self.lambda_ < 0:
            raise ValueError(f"lambda_ must be >= 0, got {self.lambda_}")
        if not self.window0 >= self.window_min >= 1:
            raise ValueError(
                f"need window0 >= window_min >= 1, got {self.window0}, {self.window_min}"
            )
        if self.window_decay < 0:
            raise ValueError(f"window_decay must be >= 0, got {self.window_decay}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.subsample_factor < 1:
            raise ValueError(
                f"subsample_factor must be >= 1, got {self.subsample_factor}"
            )
        if not self.subsample_mult0 > 0:
            raise ValueError(
                f"subsample_mult0 must be > 0, got {self.subsample_mult0}"
            )
        if not self.background_subsample_t > 0:
            raise ValueError(
                f"background_subsample_t must be > 0, got {self.background_subsample_t}"
            )


def decayed_alpha(alpha0: float, lambda_: float, t: int) -> float:
    """Learning rate after ``t`` trained pairs: alpha0 * exp(-lambda * t)."""
    return alpha0 * math.exp(-lambda_ * t)


def window_schedule(window0: int, decay: int, floor: int, sentence_index: int) -> int:
    """Half-window for the given sentence: max(floor, window0 - decay * i)."""
    return max(floor, window0 - decay * sentence_index)


@dataclass
class NonceSession:
    """Mutable state of one few-shot run, including schedule traces.

    ``t`` counts trained pairs, ``sentence_index`` counts consumed
    sentences (continuing across epochs). The ``pair_alphas`` /
    ``sentence_windows`` / ``sentence_thresholds`` lists record the exact
    schedule values used, in order.
    """

    nonce: str
    config: NonceConfig
    t: int = 0
    sentence_index: int = 0
    pair_alphas: list[float] = field(default_factory=list)
    sentence_windows: list[int] = field(default_factory=list)
    sentence_thresholds: list[float] = field(default_factory=list)

    @property
    def alpha(self) -> float:
        return decayed_alpha(self.config.alpha0, self.config.lambda_, self.t)

    @property
    def half_window(self) -> int:
        return window_schedule(
            self.config.window0,
            self.config.window_decay,
            self.config.window_min,
            self.sentence_index,
        )

    @property
    def threshold(self) -> float:
        cfg = self.config
        return (
            cfg.subsample_mult0
            * cfg.background_subsample_t
            / cfg.subsample_factor**self.sentence_index
        )


def _keep_prob_for(space: SemanticSpace, row: int, threshold: float) -> float:
    return keep_probability(
        space.vocab.counts[row], space.vocab.total_tokens, threshold
    )


def sum_initialize(
    space: SemanticSpace,
    sentences: Sequence[Sequence[str]],
    config: NonceConfig,
    rng: np.random.Generator,
    session: NonceSession | None = None,
) -> np.ndarray:
    """Additive initialization over all context sentences.

    Sums the input vectors of known, non-slot tokens that survive a
    subsampling draw at the session's starting threshold. Falls back to
    the unsampled sum if nothing survives, and to a small seeded random
    vector if no token is known at all.
    """
    threshold = (
        session.threshold
        if session is not None
        else config.subsample_mult0 * config.background_subsample_t
    )
    known: list[int] = []
    survivors: list[int] = []
    for sentence in sentences:
        for token in sentence:
            if token == SLOT:
                continue
            row = space.vocab.index.get(token)
            if row is None:
                continue
            known.append(row)
            if rng.random() < _keep_prob_for(space, row, threshold):
                survivors.append(row)
    rows = survivors or known
    if not rows:
        return init_vector(rng, space.dim)
    total = np.zeros(space.dim, dtype=np.float64)
    for row in rows:
        total += space.input_vectors[row]
    return total.astype(np.float32)


def sum_baseline(
    space: SemanticSpace,
    sentences: Sequence[Sequence[str]],
    stopwords: Iterable[str] = (),
) -> np.ndarray:
    """Plain additive model: sum of known, non-stopword context vectors.

    Vectors are not normalised before summing. Raises
    :class:`UnevaluableError` when no token survives the filters.
    """
    stopset = set(stopwords)
    total = np.zeros(space.dim, dtype=np.float64)
    n_used = 0
    for sentence in sentences:
        for token in sentence:
            if token == SLOT or token in stopset:
                continue
            row = space.vocab.index.get(token)
            if row is None:
                continue
            total += space.input_vectors[row]
            n_used += 1
    if n_used == 0:
        raise UnevaluableError("no known non-stopword context to sum")
    return total.astype(np.float32)


def _encode(space: SemanticSpace, sentence: Sequence[str], nonce_row: int) -> list[int]:
    """Sentence tokens to row ids; slots map to the nonce, OOV drops out."""
    ids: list[int] = []
    for token in sentence:
        if token == SLOT:
            ids.append(nonce_row)
        else:
            row = space.vocab.index.get(token)
            if row is not None:
                ids.append(row)
    return ids


def learn_nonce(
    space: SemanticSpace,
    sentences: Sequence[Sequence[str]],
    config: NonceConfig | None = None,
    mode: str = "nonce2vec",
    nonce: str = SLOT,
    session: NonceSession | None = None,
) -> np.ndarray:
    """Learn a vector for ``nonce`` from slotted ``sentences``, in place.

    The word is added to ``space`` and its learned input vector returned.

    ``mode="nonce2vec"``: additive initialization, then selective
    training. Every (nonce, context) pair within the scheduled fixed
    half-window gets one update at the decayed rate; random window
    resizing is suppressed and only the nonce's input row moves, so every
    pre-existing row is bitwise unchanged afterwards.

    ``mode="vanilla"``: the standard incremental-update baseline. The
    word gets a small random vector, but under standard parameters a
    count-1 word never reaches the background minimum count, so the
    update pass trains only the established vocabulary (ordinary rate
    0.025, window 5 with resizing, all touched rows updated) and the
    word's own vector stays at its random initialization.
    """
    if config is None:
        config = NonceConfig()
    if mode not in ("nonce2vec", "vanilla"):
        raise ValueError(f"unknown mode: {mode!r}")
    if not any(SLOT in sentence for sentence in sentences):
        raise FormatError(f"no slot token {SLOT!r} in any sentence")
    rng = np.random.default_rng(config.seed)
    if session is None:
        session = NonceSession(nonce=nonce, config=config)

    if mode == "vanilla":
        return _learn_vanilla(space, sentences, nonce, rng)

    init = sum_initialize(space, sentences, config, rng, session)
    nonce_row = space.add_word(nonce, init, count=1)
    table = NoiseTable(space.vocab)

    for _ in range(config.epochs):
        for sentence in sentences:
            half = session.half_window
            threshold = session.threshold
            session.sentence_windows.append(half)
            session.sentence_thresholds.append(threshold)

            ids = _encode(space, sentence, nonce_row)
            kept = [
                row
                for row in ids
                if row == nonce_row  # the slot itself is never subsampled
                or rng.random() < _keep_prob_for(space, row, threshold)
            ]
            for pos, row in enumerate(kept):
                if row != nonce_row:
                    continue
                lo = max(0, pos - half)
                hi = min(len(kept), pos + half + 1)
                for ctx_pos in range(lo, hi):
                    ctx = kept[ctx_pos]
                    if ctx_pos == pos or ctx == nonce_row:
                        continue
                    negatives = table.draw(rng, config.negatives, forbidden=ctx)
                    alpha = session.alpha
                    session.pair_alphas.append(alpha)
                    sgd_step(
                        space,
                        nonce_row,
                        ctx,
                        negatives,
                        alpha,
                        freeze_context=True,
                    )
                    session.t += 1
            session.sentence_index += 1

    learned = space.input_vectors[nonce_row]
    if not np.all(np.isfinite(learned)):
        raise DivergenceError(f"learned vector for {nonce!r} is not finite")
    return learned.copy()


def _learn_vanilla(
    space: SemanticSpace,
    sentences: Sequence[Sequence[str]],
    nonce: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Standard incremental update at background hyperparameters.

    A count-1 addition stays below the standard minimum count, so it is
    not part of the trainable vocabulary: the pass updates the rows of
    established words as usual (no freezing) while the new word keeps its
    random initialization. Slot tokens drop out of the window sequence
    exactly like any other sub-threshold token.
    """
    bg = TrainConfig()
    nonce_row = space.add_word(nonce, init_vector(rng, space.dim), count=1)
    table = NoiseTable(space.vocab)
    for _ in range(bg.epochs):
        for sentence in sentences:
            # the new word is not in the trainable vocabulary: drop it like
            # any token the background pass does not know
            ids = [row for row in _encode(space, sentence, nonce_row) if row != nonce_row]
            kept = [
                row
                for row in ids
                if rng.random() < _keep_prob_for(space, row, bg.subsample_t)
            ]
            for pos in range(len(kept)):
                b = int(rng.integers(1, bg.window + 1))
                lo = max(0, pos - b)
                hi = min(len(kept), pos + b + 1)
                center = kept[pos]
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    negatives = table.draw(rng, bg.negatives, forbidden=center)
                    sgd_step(space, kept[ctx_pos], center, negatives, bg.alpha0)
    learned = space.input_vectors[nonce_row]
    if not np.all(np.isfinite(learned)):
        raise DivergenceError(f"learned vector for {nonce!r} is not finite")
    return learned.copy()
