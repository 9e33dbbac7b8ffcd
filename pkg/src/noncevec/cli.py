"""Command line for the full pipeline.

Subcommands: ``train`` (background space), ``learn`` (one-off vector for a
new word), ``eval-def`` / ``eval-chimera`` / ``eval-men`` (the evaluation
protocols), and ``tune`` (grid search). Flag defaults equal the standard
configuration, so a flagless run reproduces it.

Every run that writes artifacts also writes a JSON manifest recording the
resolved configuration, the input and output paths, and SHA-256 hashes of
everything produced; with a fixed ``--seed`` and ``--workers 1`` reruns
are byte-identical, which the manifest hashes make checkable.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3 bad or
insufficient data, 4 training divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import load_chimeras, load_definitions, load_pairs, load_stopwords
from .errors import DivergenceError, FormatError, NoncevecError, UnevaluableError
from .evaluation import eval_chimeras, eval_definitional, eval_men, grid_search
from .nonce import NonceConfig, learn_nonce, sum_baseline
from .sgns import TrainConfig, train_background
from .space import SemanticSpace, load_space, save_space

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4

SPACE_ENV_VAR = "NONCEVEC_SPACE"

logger = logging.getLogger("noncevec")


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(
    path: Path,
    subcommand: str,
    config: dict,
    inputs: dict[str, str],
    outputs: dict[str, str],
    started: float,
) -> None:
    manifest = {
        "tool": f"noncevec {__version__}",
        "subcommand": subcommand,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "output_sha256": {
            name: _sha256(Path(p)) for name, p in sorted(outputs.items())
        },
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _format_vector(name: str, vec: np.ndarray) -> str:
    return name + " " + " ".join(f"{x:.6f}" for x in vec)


def _load_space_arg(args) -> SemanticSpace:
    if not args.space:
        raise ValueError(
            f"no space given: pass --space or set ${SPACE_ENV_VAR}"
        )
    return load_space(args.space, args.space_format)


def _add_space_args(sub) -> None:
    sub.add_argument(
        "--space",
        default=os.environ.get(SPACE_ENV_VAR),
        help=f"background space path (default: ${SPACE_ENV_VAR})",
    )
    sub.add_argument(
        "--space-format",
        choices=("binary", "text"),
        default="binary",
        help="layout of the space files",
    )


def _add_nonce_args(sub) -> None:
    grp = sub.add_argument_group("nonce learner")
    grp.add_argument("--alpha0", type=_positive_float, default=1.0)
    grp.add_argument(
        "--lambda", dest="lambda_", type=_nonneg_float, default=1.0 / 70.0,
        help="exponential decay constant of the learning rate",
    )
    grp.add_argument("--window0", type=_positive_int, default=15)
    grp.add_argument("--window-decay", type=_nonneg_int, default=5)
    grp.add_argument("--window-min", type=_positive_int, default=3)
    grp.add_argument("--neg", type=_positive_int, default=3)
    grp.add_argument("--epochs", type=_positive_int, default=1)
    grp.add_argument("--sample-mult", type=_positive_float, default=10000.0)
    grp.add_argument("--sample-factor", type=_positive_float, default=1.9)
    grp.add_argument("--bg-sample", type=_positive_float, default=1e-3)


def _nonce_config(args) -> NonceConfig:
    return NonceConfig(
        alpha0=args.alpha0,
        lambda_=args.lambda_,
        window0=args.window0,
        window_decay=args.window_decay,
        window_min=args.window_min,
        negatives=args.neg,
        epochs=args.epochs,
        subsample_mult0=args.sample_mult,
        subsample_factor=args.sample_factor,
        background_subsample_t=args.bg_sample,
        seed=args.seed,
    )


def _read_sentences(path: str) -> list[list[str]]:
    sentences: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            tokens = [t if t == "___" else t.lower() for t in line.split()]
            if tokens:
                sentences.append(tokens)
    return sentences


def _maybe_stopwords(args) -> set[str]:
    if getattr(args, "stopwords", None):
        return load_stopwords(args.stopwords)
    return set()


# ---------------------------------------------------------------------------
# Subcommands


def cmd_train(args) -> int:
    started = time.monotonic()
    config = TrainConfig(
        alpha0=args.alpha,
        alpha_min=args.alpha_min,
        window=args.window,
        negatives=args.neg,
        subsample_t=args.sample,
        epochs=args.epochs,
        min_count=args.min_count,
        dim=args.dim,
        noise_exponent=args.noise_exponent,
        seed=args.seed,
        workers=args.workers,
    )

    def progress(done: int, total: int, alpha: float) -> None:
        logger.info(
            "trained %.1fM of %.1fM tokens (alpha %.5f)", done / 1e6, total / 1e6, alpha
        )

    space = train_background(args.corpus, config, progress=progress)
    save_space(space, args.out, args.format)
    logger.info("saved %d vectors of dim %d to %s", len(space), space.dim, args.out)
    outputs = {
        "space": args.out,
        "vocab": args.out + ".vocab",
        "context": args.out + ".out",
    }
    _write_manifest(
        Path(args.out + ".manifest.json"),
        "train",
        {**dataclasses.asdict(config), "format": args.format},
        {"corpus": args.corpus},
        outputs,
        started,
    )
    return EXIT_OK


def cmd_learn(args) -> int:
    started = time.monotonic()
    space = _load_space_arg(args)
    sentences = _read_sentences(args.sentences)
    config = _nonce_config(args)
    if args.mode == "sum":
        vec = sum_baseline(space, sentences, _maybe_stopwords(args))
    else:
        vec = learn_nonce(space, sentences, config, mode=args.mode, nonce=args.nonce)
    neighbors = space.nearest_neighbors(vec, args.topn, exclude={args.nonce})
    vector_line = _format_vector(args.nonce, vec)
    print(vector_line)
    for word, sim in neighbors.items:
        print(f"{word}\t{sim:.6f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "vector.txt").write_text(vector_line + "\n", encoding="utf-8")
        (out / "neighbors.tsv").write_text(
            "".join(f"{w}\t{s:.6f}\n" for w, s in neighbors.items), encoding="utf-8"
        )
        _write_manifest(
            out / "manifest.json",
            "learn",
            {**dataclasses.asdict(config), "mode": args.mode, "nonce": args.nonce},
            {"space": args.space, "sentences": args.sentences},
            {
                "vector": str(out / "vector.txt"),
                "neighbors": str(out / "neighbors.tsv"),
            },
            started,
        )
    return EXIT_OK


def _write_report(args, report, config_dict: dict, inputs: dict[str, str], started: float) -> None:
    print(report.summary_line())
    if not args.out:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.tsv").write_text(report.to_tsv(), encoding="utf-8")
    (out / "summary.txt").write_text(report.summary_line() + "\n", encoding="utf-8")
    outputs = {
        "report": str(out / "report.tsv"),
        "summary": str(out / "summary.txt"),
    }
    if not args.no_plots:
        from . import plots  # deferred: matplotlib is heavy

        figure = out / "figure.png"
        plots.plot_report(report, str(figure))
        outputs["figure"] = str(figure)
    _write_manifest(
        out / "manifest.json", args.command, config_dict, inputs, outputs, started
    )


def cmd_eval_def(args) -> int:
    started = time.monotonic()
    space = _load_space_arg(args)
    instances, errors = load_definitions(args.data)
    for err in errors:
        logger.warning("%s: %s", args.data, err)
    if not instances:
        raise FormatError(f"{args.data}: no valid instances")
    config = _nonce_config(args)
    report = eval_definitional(
        space, instances, args.learner, config, _maybe_stopwords(args)
    )
    _write_report(
        args,
        report,
        {**dataclasses.asdict(config), "learner": args.learner},
        {"space": args.space, "data": args.data},
        started,
    )
    return EXIT_OK


def cmd_eval_chimera(args) -> int:
    started = time.monotonic()
    space = _load_space_arg(args)
    trials, errors = load_chimeras(args.data, args.n)
    for err in errors:
        logger.warning("%s: %s", args.data, err)
    if not trials:
        raise FormatError(f"{args.data}: no valid trials")
    config = _nonce_config(args)
    report = eval_chimeras(space, trials, args.learner, config, _maybe_stopwords(args))
    _write_report(
        args,
        report,
        {**dataclasses.asdict(config), "learner": args.learner, "n": args.n},
        {"space": args.space, "data": args.data},
        started,
    )
    return EXIT_OK


def cmd_eval_men(args) -> int:
    started = time.monotonic()
    space = _load_space_arg(args)
    pairs = load_pairs(args.pairs)
    report = eval_men(space, pairs)
    _write_report(
        args, report, {}, {"space": args.space, "pairs": args.pairs}, started
    )
    return EXIT_OK


def _parse_grid(path: str) -> dict[str, list]:
    """Grid TSV: one ``param<TAB>v1,v2,...`` row per parameter."""
    int_fields = {
        f.name for f in dataclasses.fields(NonceConfig) if f.type in ("int", int)
    }
    grid: dict[str, list] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(
                    f"{path}:{lineno}: expected 'param<TAB>v1,v2,...'"
                )
            name = parts[0].strip()
            if name in grid:
                raise FormatError(f"{path}:{lineno}: duplicate parameter {name!r}")
            try:
                if name in int_fields:
                    values = [int(v) for v in parts[1].split(",")]
                else:
                    values = [float(v) for v in parts[1].split(",")]
            except ValueError:
                raise FormatError(
                    f"{path}:{lineno}: non-numeric value for {name!r}"
                ) from None
            if not values:
                raise FormatError(f"{path}:{lineno}: empty value list for {name!r}")
            grid[name] = values
    if not grid:
        raise FormatError(f"{path}: empty grid")
    return grid


def cmd_tune(args) -> int:
    started = time.monotonic()
    space = _load_space_arg(args)
    grid = _parse_grid(args.grid)
    if args.task == "definitional":
        items, errors = load_definitions(args.data)
    else:
        items, errors = load_chimeras(args.data, args.n)
    for err in errors:
        logger.warning("%s: %s", args.data, err)
    if not items:
        raise FormatError(f"{args.data}: no valid items")

    def progress(done: int, total: int) -> None:
        if done % 10 == 0 or done == total:
            logger.info("evaluated %d of %d grid cells", done, total)

    base = _nonce_config(args)
    best, rows = grid_search(
        space,
        items,
        grid,
        learner=args.learner,
        task=args.task,
        base_config=base,
        stopwords=_maybe_stopwords(args),
        progress=progress,
    )
    metric_name = "mrr" if args.task == "definitional" else "mean_rho"
    names = list(grid)
    lines = ["\t".join(names + [metric_name, "n_items", "n_skipped"])]
    for row in rows:
        params = dict(row.params)
        lines.append(
            "\t".join(
                [repr(params[n]) for n in names]
                + [f"{row.metric:.6f}", str(row.n_items), str(row.n_skipped)]
            )
        )
    table = "\n".join(lines) + "\n"
    best_dict = dataclasses.asdict(best)
    print(f"best {metric_name}: {max(r.metric for r in rows):.6f}")
    print("best config: " + json.dumps(best_dict, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.tsv").write_text(table, encoding="utf-8")
        with open(out / "best.json", "w", encoding="utf-8") as fh:
            json.dump(best_dict, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs = {
            "results": str(out / "results.tsv"),
            "best": str(out / "best.json"),
        }
        if not args.no_plots:
            from . import plots

            plots.plot_grid(rows, str(out / "figure.png"), metric_name)
            outputs["figure"] = str(out / "figure.png")
        _write_manifest(
            out / "manifest.json",
            "tune",
            {"grid": grid, "learner": args.learner, "task": args.task, "seed": args.seed},
            {"space": args.space, "data": args.data, "grid_file": args.grid},
            outputs,
            started,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noncevec",
        description="Skip-gram embeddings with fast learning of new words from tiny data.",
    )
    parser.add_argument("--version", action="version", version=f"noncevec {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")
    subs = parser.add_subparsers(dest="command", required=True)

    train = subs.add_parser("train", help="train the background space")
    train.add_argument("--corpus", required=True, help="one tokenized sentence per line")
    train.add_argument("--out", required=True, help="output path prefix for the space")
    train.add_argument("--dim", type=_positive_int, default=400)
    train.add_argument("--window", type=_positive_int, default=5)
    train.add_argument("--neg", type=_positive_int, default=5)
    train.add_argument("--sample", type=_positive_float, default=1e-3)
    train.add_argument("--epochs", type=_positive_int, default=5)
    train.add_argument("--min-count", type=_positive_int, default=50)
    train.add_argument("--alpha", type=_positive_float, default=0.025)
    train.add_argument("--alpha-min", type=_positive_float, default=0.0001)
    train.add_argument("--noise-exponent", type=float, default=0.75)
    train.add_argument("--format", choices=("binary", "text"), default="binary")
    train.add_argument("--seed", type=int, default=1)
    train.add_argument("--workers", type=_positive_int, default=1)
    train.set_defaults(func=cmd_train)

    learn = subs.add_parser("learn", help="learn a vector for a new word")
    _add_space_args(learn)
    learn.add_argument("--sentences", required=True, help="slotted sentences, one per line")
    learn.add_argument("--mode", choices=("nonce2vec", "vanilla", "sum"), default="nonce2vec")
    learn.add_argument("--nonce", default="___", help="label under which to insert the word")
    learn.add_argument("--stopwords", help="stopword list (sum mode)")
    learn.add_argument("--topn", type=_positive_int, default=10)
    learn.add_argument("--out", help="directory for vector/neighbor files + manifest")
    learn.add_argument("--seed", type=int, default=1)
    _add_nonce_args(learn)
    learn.set_defaults(func=cmd_learn)

    for name, fn, extra in (
        ("eval-def", cmd_eval_def, "definitional gold-rank evaluation"),
        ("eval-chimera", cmd_eval_chimera, "chimera correlation evaluation"),
    ):
        sub = subs.add_parser(name, help=extra)
        _add_space_args(sub)
        sub.add_argument("--data", required=True)
        sub.add_argument("--learner", choices=("nonce2vec", "sum", "vanilla"), default="nonce2vec")
        sub.add_argument("--stopwords")
        sub.add_argument("--out", help="report directory")
        sub.add_argument("--no-plots", action="store_true")
        sub.add_argument("--seed", type=int, default=1)
        if name == "eval-chimera":
            sub.add_argument("--n", type=int, choices=(2, 4, 6), required=True)
        _add_nonce_args(sub)
        sub.set_defaults(func=fn)

    men = subs.add_parser("eval-men", help="similarity benchmark correlation")
    _add_space_args(men)
    men.add_argument("--pairs", required=True, help="'word1 word2 score' lines")
    men.add_argument("--out", help="report directory")
    men.add_argument("--no-plots", action="store_true")
    men.add_argument("--seed", type=int, default=1)
    men.set_defaults(func=cmd_eval_men)

    tune = subs.add_parser("tune", help="grid search over nonce hyperparameters")
    _add_space_args(tune)
    tune.add_argument("--data", required=True, help="training split")
    tune.add_argument("--grid", required=True, help="TSV: param<TAB>v1,v2,...")
    tune.add_argument("--learner", choices=("nonce2vec", "sum", "vanilla"), default="nonce2vec")
    tune.add_argument("--task", choices=("definitional", "chimeras"), default="definitional")
    tune.add_argument("--n", type=int, choices=(2, 4, 6), default=2, help="chimera sentence count")
    tune.add_argument("--stopwords")
    tune.add_argument("--out", help="results directory")
    tune.add_argument("--no-plots", action="store_true")
    tune.add_argument("--seed", type=int, default=1)
    _add_nonce_args(tune)
    tune.set_defaults(func=cmd_tune)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (FormatError, UnevaluableError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except DivergenceError as exc:
        logger.error("%s", exc)
        return EXIT_DIVERGENCE
    except (ValueError, KeyError) as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except NoncevecError as exc:
        logger.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
