"""Synthetic corpus machinery shared by the test suite.

Generates a topical corpus with a realistic frequency profile: a Zipfian
pool of global function words plus disjoint per-topic content vocabularies.
Every "document" opens with a definitional first sentence for its title
word, followed by body sentences drawn from the topic, which gives the
evaluation protocols meaningful gold vectors at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noncevec.data import DefinitionalInstance, SLOT

DEF_LEN = 16  # tokens per definitional first sentence (> 10 after slotting)


@dataclass
class SynthCorpus:
    path: str
    n_tokens: int
    n_docs: int
    n_topics: int
    words_per_topic: int
    title_pool: int
    topic_words: list[list[str]]
    function_words: list[str]
    def_sentences: dict[str, list[str]]  # title -> its first definitional sentence

    @property
    def stopwords(self) -> set[str]:
        return set(self.function_words)

    def titles(self) -> list[str]:
        """All title words, interleaved across topics."""
        out = []
        for i in range(self.title_pool):
            for t in range(self.n_topics):
                out.append(self.topic_words[t][i])
        return out

    def topic_of(self, word: str) -> int:
        for t, words in enumerate(self.topic_words):
            if word in words:
                return t
        raise KeyError(word)


def _zipf_cdf(n: int, exponent: float) -> np.ndarray:
    weights = 1.0 / np.arange(1.0, n + 1.0) ** exponent
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def build_corpus(
    path: str,
    n_docs: int,
    n_topics: int,
    words_per_topic: int,
    n_function: int,
    body_sentences: int = 5,
    body_len: tuple[int, int] = (12, 22),
    n_assoc: int = 25,
    assoc_same_topic_p: float = 0.7,
    title_pool: int = 30,
    seed: int = 0,
) -> SynthCorpus:
    """Write a corpus file and return its metadata.

    Every content word gets a private signature of ``n_assoc`` associated
    words (mostly same-topic). Sentences are written "about" a head word
    and draw heavily from its signature, so co-occurrence carries
    word-specific information beyond topic membership, the way real
    definitional text does.
    """
    rng = np.random.default_rng(seed)
    title_pool = min(title_pool, words_per_topic)
    content_cdf = _zipf_cdf(words_per_topic, 0.8)
    func_cdf = _zipf_cdf(n_function, 1.07)

    topic_words = [
        [f"t{t:03d}w{i:03d}" for i in range(words_per_topic)] for t in range(n_topics)
    ]
    function_words = [f"fn{i:03d}" for i in range(n_function)]
    words = np.array([w for ws in topic_words for w in ws] + function_words)
    n_content = n_topics * words_per_topic
    func_base = n_content

    # per-word associate signature: mostly same topic, some anywhere
    topic_of_word = np.repeat(np.arange(n_topics), words_per_topic)
    assoc = np.empty((n_content, n_assoc), dtype=np.int64)
    same = rng.random((n_content, n_assoc)) < assoc_same_topic_p
    within = topic_of_word[:, None] * words_per_topic + rng.integers(
        words_per_topic, size=(n_content, n_assoc)
    )
    anywhere = rng.integers(n_content, size=(n_content, n_assoc))
    assoc[same] = within[same]
    assoc[~same] = anywhere[~same]

    doc_topic = (np.arange(n_docs) % n_topics).astype(np.int64)
    title_idx = (np.arange(n_docs) // n_topics) % title_pool
    title_ids = doc_topic * words_per_topic + title_idx

    def _fill(head_rep: np.ndarray, topic_rep: np.ndarray, roles: np.ndarray) -> np.ndarray:
        """Token ids for flat draws: roles 0=head, 1=associate, 2=topic, 3=function."""
        n = head_rep.shape[0]
        out = np.empty(n, dtype=np.int64)
        out[roles == 0] = head_rep[roles == 0]
        a = roles == 1
        out[a] = assoc[head_rep[a], rng.integers(n_assoc, size=int(a.sum()))]
        t = roles == 2
        out[t] = topic_rep[t] * words_per_topic + np.searchsorted(
            content_cdf, rng.random(int(t.sum())), side="right"
        )
        f = roles == 3
        out[f] = func_base + np.searchsorted(
            func_cdf, rng.random(int(f.sum())), side="right"
        )
        return out

    def _roles(n: int, p_head: float, p_assoc: float, p_topic: float) -> np.ndarray:
        u = rng.random(n)
        return np.select(
            [u < p_head, u < p_head + p_assoc, u < p_head + p_assoc + p_topic],
            [0, 1, 2],
            default=3,
        )

    # definitional first sentences: the title, then a signature-bearing mix
    # diluted with topic words and function words like real definitions
    n_rest = n_docs * (DEF_LEN - 1)
    roles = _roles(n_rest, p_head=0.0, p_assoc=0.45, p_topic=0.25)
    rest = _fill(
        np.repeat(title_ids, DEF_LEN - 1), np.repeat(doc_topic, DEF_LEN - 1), roles
    )
    def_matrix = np.empty((n_docs, DEF_LEN + 1), dtype=object)
    def_matrix[:, 0] = words[title_ids]
    def_matrix[:, 1:-1] = words[rest].reshape(n_docs, DEF_LEN - 1)
    def_matrix[:, -1] = "\n"

    # body sentences: each written about a head word from the doc's topic
    n_body = n_docs * body_sentences
    lengths = rng.integers(body_len[0], body_len[1] + 1, size=n_body)
    total = int(lengths.sum())
    sent_topic = np.repeat(doc_topic, body_sentences)
    heads = sent_topic * words_per_topic + np.searchsorted(
        content_cdf, rng.random(n_body), side="right"
    )
    roles = _roles(total, p_head=0.10, p_assoc=0.45, p_topic=0.22)
    body_ids = _fill(
        np.repeat(heads, lengths), np.repeat(sent_topic, lengths), roles
    )
    ends = np.cumsum(lengths) + np.arange(1, n_body + 1) - 1
    stream = np.empty(total + n_body, dtype=object)
    stream[ends] = "\n"
    token_slots = np.ones(total + n_body, dtype=bool)
    token_slots[ends] = False
    stream[token_slots] = words[body_ids]

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(def_matrix.ravel().tolist()))
        fh.write(" ".join(stream.tolist()))

    # first definitional sentence per title: doc i*n_topics + t is the first
    # appearance of title (t, i)
    def_sentences: dict[str, list[str]] = {}
    for i in range(title_pool):
        for t in range(n_topics):
            doc = i * n_topics + t
            if doc >= n_docs:
                break
            title = topic_words[t][i]
            if title not in def_sentences:
                def_sentences[title] = list(def_matrix[doc, :-1])

    return SynthCorpus(
        path=path,
        n_tokens=n_docs * DEF_LEN + total,
        n_docs=n_docs,
        n_topics=n_topics,
        words_per_topic=words_per_topic,
        title_pool=min(title_pool, (n_docs + n_topics - 1) // n_topics),
        topic_words=topic_words,
        function_words=function_words,
        def_sentences=def_sentences,
    )


def definitional_instances(corpus: SynthCorpus, n_items: int) -> list[DefinitionalInstance]:
    """Slot the first definitional sentence of the first ``n_items`` titles."""
    out = []
    for title in corpus.titles():
        if len(out) >= n_items:
            break
        sentence = corpus.def_sentences.get(title)
        if sentence is None:
            continue
        tokens = tuple(SLOT if tok == title else tok for tok in sentence)
        out.append(DefinitionalInstance(title, tokens))
    return out


def chimera_lines(
    corpus: SynthCorpus,
    n_trials: int,
    n_sentences: int,
    seed: int = 0,
    sentence_len: int = 14,
) -> list[str]:
    """Synthesize chimera-style TSV lines with topically consistent ratings."""
    rng = np.random.default_rng(seed)
    lines = []
    for k in range(n_trials):
        topic = int(rng.integers(corpus.n_topics))
        target = corpus.topic_words[topic][int(rng.integers(10))]
        sentences = []
        for _ in range(n_sentences):
            pool = [w for w in corpus.topic_words[topic][:40] if w != target]
            picks = rng.choice(len(pool), size=sentence_len - 1, replace=True)
            tokens = [pool[int(i)] for i in picks]
            fn = rng.choice(len(corpus.function_words), size=3, replace=True)
            tokens[1::4] = [corpus.function_words[int(i)] for i in fn][: len(tokens[1::4])]
            tokens.insert(int(rng.integers(sentence_len - 1)), SLOT)
            sentences.append(" ".join(tokens))
        same = [
            corpus.topic_words[topic][int(i)]
            for i in rng.choice(np.arange(10, 25), size=3, replace=False)
        ]
        other_topic = int((topic + 1 + rng.integers(corpus.n_topics - 1)) % corpus.n_topics)
        other = [
            corpus.topic_words[other_topic][int(i)]
            for i in rng.choice(np.arange(0, 25), size=3, replace=False)
        ]
        probes = same + other
        ratings = [
            round(4.2 + 0.2 * float(rng.random()) + 0.2 * i, 2) for i in range(3)
        ] + [round(1.0 + 0.15 * i + 0.2 * float(rng.random()), 2) for i in range(3)]
        lines.append(
            f"chimera{k:03d}\t{' @@ '.join(sentences)}\t{', '.join(probes)}\t"
            + ", ".join(str(r) for r in ratings)
        )
    return lines


def pair_lines(corpus: SynthCorpus, n_same: int, n_cross: int, seed: int = 0) -> list[str]:
    """Similarity-benchmark lines: same-topic pairs high, cross-topic low."""
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n_same):
        topic = int(rng.integers(corpus.n_topics))
        i, j = rng.choice(30, size=2, replace=False)
        score = 35.0 + 10.0 * float(rng.random())
        lines.append(
            f"{corpus.topic_words[topic][int(i)]} {corpus.topic_words[topic][int(j)]} {score:.2f}"
        )
    for _ in range(n_cross):
        t1 = int(rng.integers(corpus.n_topics))
        t2 = int((t1 + 1 + rng.integers(corpus.n_topics - 1)) % corpus.n_topics)
        i, j = int(rng.integers(30)), int(rng.integers(30))
        score = 2.0 + 10.0 * float(rng.random())
        lines.append(
            f"{corpus.topic_words[t1][i]} {corpus.topic_words[t2][j]} {score:.2f}"
        )
    return lines


def random_space(n_words: int, dim: int, seed: int, zero_rows: int = 0, dup_rows: int = 0):
    """A random space for oracle tests, optionally with degenerate rows."""
    from noncevec.space import SemanticSpace, Vocabulary

    rng = np.random.default_rng(seed)
    matrix = (rng.random((n_words, dim), dtype=np.float32) - 0.5).astype(np.float32)
    for k in range(zero_rows):
        matrix[int(rng.integers(n_words))] = 0.0
    for k in range(dup_rows):
        i, j = rng.integers(n_words, size=2)
        matrix[int(i)] = matrix[int(j)]
    vocab = Vocabulary((f"w{i:04d}", int(rng.integers(1, 1000))) for i in range(n_words))
    space = SemanticSpace(vocab, matrix)
    space.output_vectors[:] = (rng.random((n_words, dim), dtype=np.float32) - 0.5) * 0.2
    return space
