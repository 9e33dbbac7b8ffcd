"""Evaluation protocols: definitional gold ranking, chimera correlation, MEN.

Every item is scored on a fresh copy of the background space, so items
cannot contaminate each other and per-item results are independent of
evaluation order (per-item RNG seeds derive from the item id, not the
position). Reports keep per-item detail alongside the aggregate, and the
aggregate is always recomputable from the detail.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .data import ChimeraTrial, DefinitionalInstance, SimilarityPair, SLOT
from .errors import NoncevecError, UnevaluableError
from .nonce import NonceConfig, learn_nonce, sum_baseline
from .space import SemanticSpace, cosine

__all__ = [
    "mrr",
    "spearman",
    "ItemResult",
    "EvalReport",
    "eval_definitional",
    "eval_chimeras",
    "eval_men",
    "grid_search",
    "GridRow",
    "LEARNERS",
]

LEARNERS = ("nonce2vec", "sum", "vanilla")

GOLD_SUFFIX = "_gold"


def mrr(ranks: Sequence[int]) -> float:
    """Mean reciprocal rank of a non-empty list of 1-based ranks."""
    if len(ranks) == 0:
        raise ValueError("mrr of an empty rank list")
    return float(np.mean([1.0 / r for r in ranks]))


def _fractional_ranks(values: Sequence[float]) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their ranks."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman correlation: Pearson over fractional ranks.

    Returns NaN when either list is constant (correlation undefined);
    callers treat that as a skipped item.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least 2 observations")
    ra = _fractional_ranks(a)
    rb = _fractional_ranks(b)
    da = ra - ra.mean()
    db = rb - rb.mean()
    na = math.sqrt(float(da @ da))
    nb = math.sqrt(float(db @ db))
    if na == 0.0 or nb == 0.0:
        return float("nan")
    return float((da @ db) / (na * nb))


@dataclass(frozen=True)
class ItemResult:
    """One evaluated item: its metric value plus auxiliary detail."""

    item_id: str
    value: float  # reciprocal rank, per-trial rho, or system cosine
    detail: float  # gold rank, usable probe count, or human score


@dataclass
class EvalReport:
    """Per-item records plus the aggregate for one evaluation run."""

    kind: str  # "definitional" | "chimeras" | "men"
    learner: str
    items: list[ItemResult] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)

    @property
    def aggregate(self) -> float:
        """MRR, mean per-trial rho, or overall Spearman, by report kind."""
        if not self.items:
            return float("nan")
        if self.kind == "men":
            return spearman(
                [it.value for it in self.items], [it.detail for it in self.items]
            )
        return float(np.mean([it.value for it in self.items]))

    @property
    def median_rank(self) -> int | None:
        """Lower-median gold rank (definitional reports only)."""
        if self.kind != "definitional" or not self.items:
            return None
        ranks = sorted(int(it.detail) for it in self.items)
        return ranks[(len(ranks) - 1) // 2]

    def summary_line(self) -> str:
        if self.kind == "definitional":
            return (
                f"definitional learner={self.learner} n={self.n_items} "
                f"skipped={self.n_skipped} mrr={self.aggregate:.5f} "
                f"median_rank={self.median_rank}"
            )
        if self.kind == "chimeras":
            return (
                f"chimeras learner={self.learner} n={self.n_items} "
                f"skipped={self.n_skipped} mean_rho={self.aggregate:.4f}"
            )
        return (
            f"men n={self.n_items} skipped={self.n_skipped} "
            f"rho={self.aggregate:.4f}"
        )

    def to_tsv(self) -> str:
        header = {
            "definitional": "target\treciprocal_rank\tgold_rank",
            "chimeras": "trial\tspearman_rho\tn_probes",
            "men": "pair\tsystem_cosine\thuman_score",
        }[self.kind]
        lines = [header]
        for it in self.items:
            lines.append(f"{it.item_id}\t{it.value!r}\t{it.detail!r}")
        for item_id, reason in self.skipped:
            lines.append(f"# skipped\t{item_id}\t{reason}")
        return "\n".join(lines) + "\n"


def _item_seed(base_seed: int, item_id: str) -> int:
    """Order-independent per-item seed."""
    digest = hashlib.blake2s(f"{base_seed}:{item_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _learn_on_copy(
    space_copy: SemanticSpace,
    sentences: Sequence[Sequence[str]],
    learner: str,
    config: NonceConfig,
    stopwords: Iterable[str],
    nonce: str,
    item_seed: int,
) -> tuple[np.ndarray, str | None]:
    """Run one learner; returns (vector, inserted word or None)."""
    if learner == "sum":
        return sum_baseline(space_copy, sentences, stopwords), None
    cfg = replace(config, seed=item_seed)
    vec = learn_nonce(space_copy, sentences, cfg, mode=learner, nonce=nonce)
    return vec, nonce


def eval_definitional(
    space: SemanticSpace,
    instances: Sequence[DefinitionalInstance],
    learner: str,
    config: NonceConfig | None = None,
    stopwords: Iterable[str] = (),
    progress: Callable[[int, int], None] | None = None,
) -> EvalReport:
    """Gold-rank evaluation on definitional sentences.

    Per instance, on a fresh copy of the space: the target's trained
    vector is relabeled ``<target>_gold``, the learner builds a vector for
    the slot, and the gold's rank among all remaining neighbors gives the
    reciprocal rank. Targets missing from the vocabulary are skipped.
    """
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner: {learner!r}")
    config = config or NonceConfig()
    report = EvalReport(kind="definitional", learner=learner)
    for i, inst in enumerate(instances):
        if inst.target not in space.vocab:
            report.skipped.append((inst.target, "target not in vocabulary"))
            continue
        gold = inst.target + GOLD_SUFFIX
        if gold in space.vocab:
            report.skipped.append((inst.target, f"label {gold!r} already taken"))
            continue
        copy = space.copy()
        copy.relabel(inst.target, gold)
        try:
            vec, inserted = _learn_on_copy(
                copy,
                [inst.tokens],
                learner,
                config,
                stopwords,
                inst.target,
                _item_seed(config.seed, inst.target),
            )
        except UnevaluableError as exc:
            report.skipped.append((inst.target, str(exc)))
            continue
        exclude = {inserted} if inserted else set()
        rank = copy.rank_of(vec, gold, exclude=exclude)
        report.items.append(ItemResult(inst.target, 1.0 / rank, float(rank)))
        if progress is not None:
            progress(i + 1, len(instances))
    return report


def eval_chimeras(
    space: SemanticSpace,
    trials: Sequence[ChimeraTrial],
    learner: str,
    config: NonceConfig | None = None,
    stopwords: Iterable[str] = (),
) -> EvalReport:
    """Correlation of system and human nonce-probe similarities per trial.

    Probes missing from the vocabulary drop out of their trial; trials
    with fewer than two usable probes, or with an undefined correlation,
    are skipped.
    """
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner: {learner!r}")
    config = config or NonceConfig()
    report = EvalReport(kind="chimeras", learner=learner)
    for trial in trials:
        usable = [
            (p, r) for p, r in zip(trial.probes, trial.ratings) if p in space.vocab
        ]
        if len(usable) < 2:
            report.skipped.append((trial.trial_id, "fewer than 2 usable probes"))
            continue
        if SLOT in space.vocab:
            report.skipped.append((trial.trial_id, f"{SLOT!r} already in vocabulary"))
            continue
        copy = space.copy()
        try:
            vec, _ = _learn_on_copy(
                copy,
                trial.sentences,
                learner,
                config,
                stopwords,
                SLOT,
                _item_seed(config.seed, trial.trial_id),
            )
        except UnevaluableError as exc:
            report.skipped.append((trial.trial_id, str(exc)))
            continue
        sims = [cosine(vec, copy.vector(p)) for p, _ in usable]
        rho = spearman(sims, [r for _, r in usable])
        if math.isnan(rho):
            report.skipped.append((trial.trial_id, "constant similarity list"))
            continue
        report.items.append(ItemResult(trial.trial_id, rho, float(len(usable))))
    return report


def eval_men(space: SemanticSpace, pairs: Sequence[SimilarityPair]) -> EvalReport:
    """Spearman between system cosines and human similarity scores.

    Pairs with an out-of-vocabulary word are dropped and counted; fewer
    than two usable pairs is an error.
    """
    report = EvalReport(kind="men", learner="background")
    for pair in pairs:
        if pair.word1 not in space.vocab or pair.word2 not in space.vocab:
            report.skipped.append((f"{pair.word1}:{pair.word2}", "out of vocabulary"))
            continue
        sim = cosine(space.vector(pair.word1), space.vector(pair.word2))
        report.items.append(ItemResult(f"{pair.word1}:{pair.word2}", sim, pair.score))
    if report.n_items < 2:
        raise NoncevecError(
            f"only {report.n_items} usable pairs; cannot correlate"
        )
    return report


@dataclass(frozen=True)
class GridRow:
    """One grid cell: parameter overrides and the metric they achieved."""

    params: tuple[tuple[str, float], ...]
    metric: float
    n_items: int
    n_skipped: int

    def config(self, base: NonceConfig | None = None) -> NonceConfig:
        return replace(base or NonceConfig(), **dict(self.params))


def grid_search(
    space: SemanticSpace,
    items: Sequence,
    param_grid: dict[str, Sequence],
    learner: str = "nonce2vec",
    task: str = "definitional",
    base_config: NonceConfig | None = None,
    stopwords: Iterable[str] = (),
    progress: Callable[[int, int], None] | None = None,
) -> tuple[NonceConfig, list[GridRow]]:
    """Exhaustive sweep over the Cartesian product of the parameter grid.

    Every cell is evaluated on the given (training) items; the best cell
    by MRR (definitional) or mean rho (chimeras) wins, ties resolved by
    grid order. Returns the winning config and the full results table.
    """
    if task not in ("definitional", "chimeras"):
        raise ValueError(f"unknown task: {task!r}")
    if not param_grid or any(len(v) == 0 for v in param_grid.values()):
        raise ValueError("parameter grid must be non-empty")
    base = base_config or NonceConfig()
    names = list(param_grid)
    unknown = [n for n in names if not hasattr(base, n)]
    if unknown:
        raise ValueError(f"unknown grid parameter: {unknown[0]!r}")
    rows: list[GridRow] = []
    cells = list(itertools.product(*(param_grid[n] for n in names)))
    for i, values in enumerate(cells):
        overrides = dict(zip(names, values))
        cfg = replace(base, **overrides)
        if task == "definitional":
            rep = eval_definitional(space, items, learner, cfg, stopwords)
        else:
            rep = eval_chimeras(space, items, learner, cfg, stopwords)
        metric = rep.aggregate
        rows.append(
            GridRow(tuple(overrides.items()), metric, rep.n_items, rep.n_skipped)
        )
        if progress is not None:
            progress(i + 1, len(cells))
    best = max(rows, key=lambda r: (r.metric if math.isfinite(r.metric) else -2.0))
    return best.config(base), rows
