import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import noncevec as nv

from helpers import build_corpus, definitional_instances


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """~1M-token topical corpus shared by training-dependent tests."""
    path = tmp_path_factory.mktemp("corpus") / "small.txt"
    return build_corpus(
        str(path),
        n_docs=12_000,
        n_topics=60,
        words_per_topic=60,
        n_function=120,
        body_sentences=4,
        seed=1234,
    )


@pytest.fixture(scope="session")
def small_space(small_corpus):
    """A trained desk-scale space over the small corpus."""
    config = nv.TrainConfig(dim=48, min_count=10, epochs=2, seed=99)
    return nv.train_background(small_corpus.path, config)


@pytest.fixture(scope="session")
def small_instances(small_corpus, small_space):
    items = [
        inst
        for inst in definitional_instances(small_corpus, 40)
        if inst.target in small_space.vocab
    ]
    assert len(items) >= 30
    return items
