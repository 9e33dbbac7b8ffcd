"""Dataset ingestion: definitional nonces, chimera trials, similarity pairs.

All files are UTF-8, tab-separated where noted, with ``#``-prefixed
comment lines and blank lines ignored. Tokens are lowercased on load (the
background space is lowercase); the slot placeholder ``___`` marks where
the unknown word stood.

Loaders never drop a line silently: each input line becomes either a
record or a :class:`LineError` carrying its line number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError

__all__ = [
    "SLOT",
    "DefinitionalInstance",
    "ChimeraTrial",
    "SimilarityPair",
    "LineError",
    "load_definitions",
    "write_definitions",
    "load_chimeras",
    "write_chimeras",
    "load_stopwords",
    "load_pairs",
    "write_pairs",
    "train_test_split",
]

SLOT = "___"

MIN_SENTENCE_TOKENS = 11  # definitional sentences must exceed 10 words


@dataclass(frozen=True)
class DefinitionalInstance:
    """A target word and the slotted sentence that defines it."""

    target: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class ChimeraTrial:
    """A nonce exposure: slotted sentences, probe words, human ratings."""

    trial_id: str
    sentences: tuple[tuple[str, ...], ...]
    probes: tuple[str, ...]
    ratings: tuple[float, ...]


@dataclass(frozen=True)
class SimilarityPair:
    word1: str
    word2: str
    score: float


@dataclass(frozen=True)
class LineError:
    """A rejected input line: where and why."""

    lineno: int
    message: str

    def __str__(self) -> str:
        return f"line {self.lineno}: {self.message}"


def _data_lines(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_definitions(path: str) -> tuple[list[DefinitionalInstance], list[LineError]]:
    """Parse ``target<TAB>slotted sentence`` lines.

    Sentences shorter than 11 tokens or missing the slot are rejected;
    rejections are returned, not raised.
    """
    instances: list[DefinitionalInstance] = []
    errors: list[LineError] = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            errors.append(LineError(lineno, f"expected 2 tab-separated fields, got {len(parts)}"))
            continue
        target = parts[0].strip().lower()
        tokens = tuple(t.lower() if t != SLOT else t for t in parts[1].split())
        if not target:
            errors.append(LineError(lineno, "empty target"))
            continue
        if len(tokens) < MIN_SENTENCE_TOKENS:
            errors.append(
                LineError(lineno, f"sentence has {len(tokens)} tokens, need more than 10")
            )
            continue
        if SLOT not in tokens:
            errors.append(LineError(lineno, f"no slot token {SLOT!r} in sentence"))
            continue
        instances.append(DefinitionalInstance(target, tokens))
    return instances, errors


def write_definitions(instances: list[DefinitionalInstance], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(f"{inst.target}\t{' '.join(inst.tokens)}\n")


def load_chimeras(
    path: str, num_sentences: int
) -> tuple[list[ChimeraTrial], list[LineError]]:
    """Parse chimera trials, requiring exactly ``num_sentences`` sentences.

    Line layout: ``id<TAB>sentences joined by @@<TAB>probes comma-separated
    <TAB>ratings comma-separated``, slots already substituted.
    """
    if num_sentences not in (2, 4, 6):
        raise ValueError(f"num_sentences must be 2, 4 or 6, got {num_sentences}")
    trials: list[ChimeraTrial] = []
    errors: list[LineError] = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 4:
            errors.append(LineError(lineno, f"expected 4 tab-separated fields, got {len(parts)}"))
            continue
        trial_id = parts[0].strip()
        sentences = tuple(
            tuple(t.lower() if t != SLOT else t for t in chunk.split())
            for chunk in parts[1].split("@@")
        )
        probes = tuple(p.strip().lower() for p in parts[2].split(","))
        try:
            ratings = tuple(float(r) for r in parts[3].split(","))
        except ValueError:
            errors.append(LineError(lineno, f"trial {trial_id}: non-numeric rating"))
            continue
        if len(probes) != len(ratings):
            errors.append(
                LineError(
                    lineno,
                    f"trial {trial_id}: {len(probes)} probes vs {len(ratings)} ratings",
                )
            )
            continue
        if len(sentences) != num_sentences:
            errors.append(
                LineError(
                    lineno,
                    f"trial {trial_id}: {len(sentences)} sentences, expected {num_sentences}",
                )
            )
            continue
        missing = [i for i, s in enumerate(sentences) if SLOT not in s]
        if missing:
            errors.append(
                LineError(lineno, f"trial {trial_id}: sentence {missing[0]} has no slot")
            )
            continue
        trials.append(ChimeraTrial(trial_id, sentences, probes, ratings))
    return trials, errors


def write_chimeras(trials: list[ChimeraTrial], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trial in trials:
            sentences = " @@ ".join(" ".join(s) for s in trial.sentences)
            probes = ", ".join(trial.probes)
            ratings = ", ".join(repr(r) for r in trial.ratings)
            fh.write(f"{trial.trial_id}\t{sentences}\t{probes}\t{ratings}\n")


def load_stopwords(path: str) -> set[str]:
    """One token per line; duplicates collapse, comments are skipped."""
    words: set[str] = set()
    for _, line in _data_lines(path):
        words.add(line.strip().lower())
    return words


def load_pairs(path: str) -> list[SimilarityPair]:
    """Parse ``word1 word2 score`` lines; malformed lines are fatal."""
    pairs: list[SimilarityPair] = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(
                f"{path}:{lineno}: expected 'word1 word2 score', got {line!r}"
            )
        try:
            score = float(parts[2])
        except ValueError:
            raise FormatError(
                f"{path}:{lineno}: non-numeric score {parts[2]!r}"
            ) from None
        if not np.isfinite(score):
            raise FormatError(f"{path}:{lineno}: non-finite score {parts[2]!r}")
        pairs.append(SimilarityPair(parts[0].lower(), parts[1].lower(), score))
    return pairs


def write_pairs(pairs: list[SimilarityPair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(f"{pair.word1} {pair.word2} {pair.score!r}\n")


def train_test_split(items: list, n_train: int, seed: int) -> tuple[list, list]:
    """Deterministic seeded shuffle split into (first n_train, rest)."""
    if not 0 <= n_train <= len(items):
        raise ValueError(f"n_train={n_train} out of range for {len(items)} items")
    order = np.random.default_rng(seed).permutation(len(items))
    shuffled = [items[i] for i in order]
    return shuffled[:n_train], shuffled[n_train:]
