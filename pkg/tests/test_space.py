"""Vocabulary, similarity ranking and persistence contracts."""

import hashlib
import math

import numpy as np
import pytest

from noncevec.errors import FormatError
from noncevec.space import (
    NeighborList,
    SemanticSpace,
    Vocabulary,
    cosine,
    load_space,
    save_space,
)

from helpers import random_space


def brute_force_order(space, query, exclude=()):
    """Exhaustive descending-cosine ordering, ties by ascending row id."""
    scored = []
    for row, word in enumerate(space.vocab.words):
        if word in exclude:
            continue
        scored.append((-cosine(space.input_vectors[row], query), row, word))
    scored.sort()
    return [(word, -neg) for neg, _, word in scored]


def space_checksum(space):
    digest = hashlib.blake2b()
    digest.update(space.input_vectors.tobytes())
    digest.update(space.output_vectors.tobytes())
    return digest.hexdigest()


def tiny_space():
    vocab = Vocabulary([("alpha", 10), ("beta", 5), ("gamma", 2)])
    matrix = np.array(
        [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        dtype=np.float32,
    )
    return SemanticSpace(vocab, matrix)


class TestVocabulary:
    def test_bijective_index(self):
        vocab = Vocabulary([("a", 3), ("b", 2), ("c", 1)])
        assert [vocab[w] for w in vocab.words] == [0, 1, 2]
        assert len(vocab) == 3
        assert vocab.total_tokens == 6

    def test_duplicate_word_rejected(self):
        vocab = Vocabulary([("a", 3)])
        with pytest.raises(ValueError, match="duplicate"):
            vocab.add("a", 1)

    def test_rename_keeps_row(self):
        vocab = Vocabulary([("a", 3), ("b", 2)])
        vocab.rename("a", "z")
        assert vocab["z"] == 0
        assert "a" not in vocab
        assert vocab.total_tokens == 5

    def test_rename_collision(self):
        vocab = Vocabulary([("a", 3), ("b", 2)])
        with pytest.raises(ValueError):
            vocab.rename("a", "b")
        with pytest.raises(KeyError):
            vocab.rename("missing", "c")


class TestCosine:
    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_colinear_scale_invariant(self):
        assert cosine(np.array([2.0, 0.0]), np.array([1.0, 0.0])) == 1.0

    def test_hand_computed(self):
        # ([1,1],[1,0]) -> 1/sqrt(2)
        value = cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert abs(value - 1.0 / math.sqrt(2.0)) < 1e-12

    def test_zero_norm_is_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            cosine(np.ones(3), np.ones(4))

    def test_symmetry_and_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = rng.normal(size=8)
            b = rng.normal(size=8)
            assert cosine(a, b) == cosine(b, a)
            assert abs(cosine(a, b)) <= 1.0 + 1e-12


class TestNearestNeighbors:
    def test_closest_remaining_word(self):
        space = tiny_space()
        result = space.nearest_neighbors("alpha", k=1)
        # gamma = [1,1] has cosine 1/sqrt(2) to alpha; beta is orthogonal
        assert result.words() == ["gamma"]

    def test_saturation_returns_all_sorted(self):
        space = random_space(50, 8, seed=1)
        result = space.nearest_neighbors(space.input_vectors[0], k=10_000)
        oracle = brute_force_order(space, space.input_vectors[0])
        assert result.words() == [w for w, _ in oracle]

    def test_matches_exhaustive_oracle(self):
        space = random_space(50, 10, seed=2)
        rng = np.random.default_rng(3)
        query = rng.normal(size=10).astype(np.float32)
        result = space.nearest_neighbors(query, k=10)
        oracle = brute_force_order(space, query)[:10]
        assert result.words() == [w for w, _ in oracle]
        for (w1, s1), (w2, s2) in zip(result.items, oracle):
            assert abs(s1 - s2) < 1e-12

    def test_k_zero_empty(self):
        space = tiny_space()
        assert space.nearest_neighbors(np.ones(2, dtype=np.float32), k=0).items == []

    def test_empty_vocabulary_errors(self):
        space = SemanticSpace(Vocabulary(), np.zeros((0, 4), dtype=np.float32))
        with pytest.raises(ValueError, match="empty"):
            space.nearest_neighbors(np.ones(4), k=1)

    def test_exclusion(self):
        space = tiny_space()
        result = space.nearest_neighbors(
            space.vector("alpha"), k=3, exclude={"alpha", "gamma"}
        )
        assert result.words() == ["beta"]

    def test_tie_break_by_row_id(self):
        vocab = Vocabulary([("a", 1), ("b", 1), ("c", 1)])
        matrix = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]], dtype=np.float32)
        space = SemanticSpace(vocab, matrix)
        result = space.nearest_neighbors(np.array([1.0, 0.0], dtype=np.float32), k=3)
        assert result.words() == ["a", "b", "c"]

    def test_query_type_preserved(self):
        space = tiny_space()
        result = space.nearest_neighbors("beta", k=1)
        assert isinstance(result, NeighborList)
        assert result.query == "beta"


class TestRankOf:
    def test_query_equal_to_target_ranks_first(self):
        space = random_space(100, 6, seed=4)
        space.add_word("nonce", space.vector("w0005").copy())
        rank = space.rank_of(space.vector("w0005"), "w0005", exclude={"nonce"})
        assert rank == 1

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        space = random_space(100, 7, seed=5, zero_rows=2, dup_rows=3)
        for _ in range(10):
            query = rng.normal(size=7).astype(np.float32)
            target = space.vocab.words[int(rng.integers(100))]
            oracle = brute_force_order(space, query)
            expected = 1 + [w for w, _ in oracle].index(target)
            assert space.rank_of(query, target) == expected

    def test_worst_case_bounded_by_vocab(self):
        space = random_space(64, 4, seed=6)
        query = -space.vector("w0000").astype(np.float64)
        assert space.rank_of(query, "w0000") <= 64

    def test_missing_target_errors(self):
        space = tiny_space()
        with pytest.raises(KeyError):
            space.rank_of(np.ones(2), "missing")

    def test_excluded_target_errors(self):
        space = tiny_space()
        with pytest.raises(ValueError):
            space.rank_of(np.ones(2), "alpha", exclude={"alpha"})


class TestAddWord:
    def test_grows_and_leaves_rows_unchanged(self):
        space = random_space(20, 5, seed=8)
        space.relabel("w0003", "w0003_gold")
        gold_row = space.vector("w0003_gold").copy()
        row = space.add_word("w0003", np.ones(5, dtype=np.float32))
        assert len(space) == 21
        assert row == 20
        assert np.array_equal(space.vector("w0003_gold"), gold_row)
        assert np.array_equal(space.output_vectors[row], np.zeros(5, dtype=np.float32))

    def test_zero_init(self):
        space = tiny_space()
        space.add_word("zed", np.zeros(2, dtype=np.float32))
        assert np.array_equal(space.vector("zed"), np.zeros(2, dtype=np.float32))

    def test_duplicate_rejected(self):
        space = tiny_space()
        with pytest.raises(ValueError):
            space.add_word("alpha", np.zeros(2, dtype=np.float32))

    def test_add_then_query_excluding_new_matches_pre_add(self):
        space = random_space(30, 6, seed=9)
        query = np.random.default_rng(10).normal(size=6).astype(np.float32)
        before = space.nearest_neighbors(query, k=30)
        space.add_word("fresh", query.copy())
        after = space.nearest_neighbors(query, k=30, exclude={"fresh"})
        assert before.words() == after.words()

    def test_wrong_dim_rejected(self):
        space = tiny_space()
        with pytest.raises(ValueError):
            space.add_word("zed", np.zeros(5, dtype=np.float32))


class TestRelabel:
    def test_lookup_returns_same_row(self):
        space = tiny_space()
        before = space.vector("alpha").copy()
        space.relabel("alpha", "alpha_gold")
        assert np.array_equal(space.vector("alpha_gold"), before)
        assert "alpha" not in space

    def test_involution(self):
        space = random_space(10, 4, seed=11)
        checked = space_checksum(space)
        words = list(space.vocab.words)
        space.relabel("w0001", "tmp")
        space.relabel("tmp", "w0001")
        assert space.vocab.words == words
        assert space_checksum(space) == checked

    def test_rank_invariant_under_relabel(self):
        space = random_space(40, 5, seed=12)
        query = np.random.default_rng(13).normal(size=5).astype(np.float32)
        before = space.rank_of(query, "w0007")
        space.relabel("w0007", "w0007_gold")
        assert space.rank_of(query, "w0007_gold") == before


class TestReadOnlyOps:
    def test_matrices_bitwise_unchanged(self):
        space = random_space(60, 6, seed=14)
        checked = space_checksum(space)
        query = np.random.default_rng(15).normal(size=6).astype(np.float32)
        cosine(space.vector("w0000"), space.vector("w0001"))
        space.nearest_neighbors(query, k=5)
        space.rank_of(query, "w0002")
        space.copy()
        assert space_checksum(space) == checked

    def test_save_does_not_mutate(self, tmp_path):
        space = random_space(10, 4, seed=16)
        checked = space_checksum(space)
        save_space(space, str(tmp_path / "s"), "binary")
        save_space(space, str(tmp_path / "t"), "text")
        assert space_checksum(space) == checked


class TestPersistence:
    def test_binary_round_trip_bit_exact_small(self, tmp_path):
        vocab = Vocabulary([("one", 4), ("two", 2)])
        matrix = np.array([[0.25, -1.5], [3.0, 0.001]], dtype=np.float32)
        space = SemanticSpace(vocab, matrix, matrix * 0.5)
        path = str(tmp_path / "tiny.bin")
        save_space(space, path, "binary")
        loaded = load_space(path, "binary")
        assert loaded.vocab.words == ["one", "two"]
        assert loaded.vocab.counts == [4, 2]
        assert np.array_equal(loaded.input_vectors, space.input_vectors)
        assert np.array_equal(loaded.output_vectors, space.output_vectors)

    def test_binary_round_trip_bit_exact_random(self, tmp_path):
        space = random_space(37, 19, seed=17)
        path = str(tmp_path / "r.bin")
        save_space(space, path, "binary")
        loaded = load_space(path, "binary")
        assert np.array_equal(loaded.input_vectors, space.input_vectors)
        assert np.array_equal(loaded.output_vectors, space.output_vectors)
        assert loaded.vocab.words == space.vocab.words
        assert loaded.vocab.counts == space.vocab.counts

    def test_text_round_trip_within_tolerance(self, tmp_path):
        space = random_space(10, 50, seed=18)
        path = str(tmp_path / "r.txt")
        save_space(space, path, "text")
        loaded = load_space(path, "text")
        assert loaded.vocab.words == space.vocab.words
        diff = np.abs(loaded.input_vectors - space.input_vectors)
        assert float(diff.max()) < 1e-6
        diff_out = np.abs(loaded.output_vectors - space.output_vectors)
        assert float(diff_out.max()) < 1e-6

    def test_truncated_text_rejected(self, tmp_path):
        path = tmp_path / "trunc.txt"
        path.write_text("3 400\n" + "a " + " ".join(["0.0"] * 400) + "\n"
                        + "b " + " ".join(["0.0"] * 400) + "\n")
        with pytest.raises(FormatError, match="truncated after 2 of 3"):
            load_space(str(path), "text")

    def test_truncated_binary_rejected(self, tmp_path):
        space = random_space(5, 8, seed=19)
        path = str(tmp_path / "t.bin")
        save_space(space, path, "binary")
        blob = open(path, "rb").read()
        open(path, "wb").write(blob[: len(blob) - 10])
        with pytest.raises(FormatError, match="truncated"):
            load_space(path, "binary")

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a header\n")
        with pytest.raises(FormatError, match="header"):
            load_space(str(path), "text")

    def test_duplicate_token_named(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("2 2\nsame 0.0 0.0\nsame 1.0 1.0\n")
        with pytest.raises(FormatError, match="'same'"):
            load_space(str(path), "text")

    def test_wrong_component_count_named(self, tmp_path):
        path = tmp_path / "wide.txt"
        path.write_text("1 3\nword 0.0 0.0\n")
        with pytest.raises(FormatError, match="'word'"):
            load_space(str(path), "text")

    def test_plain_vector_file_without_sidecars(self, tmp_path):
        # foreign word2vec-style file: counts default to 1, outputs to zero
        path = tmp_path / "plain.txt"
        path.write_text("2 2\nfoo 1.0 0.0\nbar 0.0 1.0\n")
        loaded = load_space(str(path), "text")
        assert loaded.vocab.counts == [1, 1]
        assert np.array_equal(loaded.output_vectors, np.zeros((2, 2), dtype=np.float32))

    def test_unknown_format(self, tmp_path):
        space = tiny_space()
        with pytest.raises(ValueError):
            save_space(space, str(tmp_path / "x"), "parquet")
