"""noncevec: skip-gram embeddings plus fast learning of new words from tiny data.

Train a background semantic space with skip-gram negative sampling, then
learn a usable vector for a previously unseen word from as little as one
sentence, and evaluate both with the bundled protocols (definitional gold
ranking, chimera correlation, similarity benchmarks).
"""

from .data import (
    ChimeraTrial,
    DefinitionalInstance,
    SimilarityPair,
    SLOT,
    load_chimeras,
    load_definitions,
    load_pairs,
    load_stopwords,
    train_test_split,
)
from .errors import DivergenceError, FormatError, NoncevecError, UnevaluableError
from .evaluation import (
    EvalReport,
    eval_chimeras,
    eval_definitional,
    eval_men,
    grid_search,
    mrr,
    spearman,
)
from .nonce import (
    NonceConfig,
    NonceSession,
    decayed_alpha,
    learn_nonce,
    sum_baseline,
    sum_initialize,
    window_schedule,
)
from .sgns import (
    CorpusFile,
    NoiseTable,
    TrainConfig,
    build_vocab,
    draw_negatives,
    keep_probability,
    sgd_step,
    train_background,
)
from .space import (
    NeighborList,
    SemanticSpace,
    Vocabulary,
    cosine,
    load_space,
    save_space,
)

__version__ = "0.1.0"

__all__ = [
    "ChimeraTrial",
    "CorpusFile",
    "DefinitionalInstance",
    "DivergenceError",
    "EvalReport",
    "FormatError",
    "NeighborList",
    "NoiseTable",
    "NonceConfig",
    "NonceSession",
    "NoncevecError",
    "SLOT",
    "SemanticSpace",
    "SimilarityPair",
    "TrainConfig",
    "UnevaluableError",
    "Vocabulary",
    "build_vocab",
    "cosine",
    "decayed_alpha",
    "draw_negatives",
    "eval_chimeras",
    "eval_definitional",
    "eval_men",
    "grid_search",
    "keep_probability",
    "learn_nonce",
    "load_chimeras",
    "load_definitions",
    "load_pairs",
    "load_space",
    "load_stopwords",
    "mrr",
    "save_space",
    "sgd_step",
    "spearman",
    "sum_baseline",
    "sum_initialize",
    "train_background",
    "train_test_split",
    "window_schedule",
    "__version__",
]
