"""Numba inner loop for background skip-gram training.

The kernel owns a counter-based splitmix64 RNG seeded per sentence from
(seed, epoch, global sentence index), so the draws it makes do not depend
on chunking or thread scheduling. With one worker the whole pass is
bit-reproducible; with several workers only the float row updates race
(accepted, lock-free).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_EPOCH_SALT = np.uint64(0xA24BAED4963EE407)
_SENT_SALT = np.uint64(0x9FB21C651E98DF25)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next(state):
    state[0] = state[0] + _GOLD
    return _mix(state[0])


@njit(cache=True, inline="always")
def _next_float(state):
    return np.float64(_next(state) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True)
def train_sentences(
    inputs,
    outputs,
    token_ids,
    sent_offsets,
    sent_word_offsets,
    keep_prob,
    noise_cdf,
    window,
    negatives,
    alpha0,
    alpha_min,
    total_train_words,
    seed,
    epoch,
    epoch_base_words,
    first_sentence_index,
    max_sentence_len,
):
    """Run one skip-gram pass over a slice of encoded sentences.

    Returns -1 on success, or the index (within this slice) of the first
    sentence where a non-finite dot product appeared.
    """
    dim = inputs.shape[1]
    buf = np.empty(max_sentence_len, dtype=np.int64)
    neu = np.zeros(dim, dtype=np.float32)
    state = np.empty(1, dtype=np.uint64)
    n_sentences = sent_offsets.shape[0] - 1

    for s in range(n_sentences):
        lo = sent_offsets[s]
        hi = sent_offsets[s + 1]
        if hi - lo < 1:
            continue
        global_index = np.uint64(first_sentence_index + s)
        state[0] = _mix(
            np.uint64(seed)
            ^ (np.uint64(epoch + 1) * _EPOCH_SALT)
            ^ ((global_index + np.uint64(1)) * _SENT_SALT)
        )
        progress = (epoch_base_words + sent_word_offsets[s]) / total_train_words
        alpha = alpha0 * (1.0 - progress)
        if alpha < alpha_min:
            alpha = alpha_min

        # subsample: survivors of the frequency-based keep rule
        m = 0
        for p in range(lo, hi):
            w = token_ids[p]
            kp = keep_prob[w]
            if kp >= 1.0 or _next_float(state) < kp:
                buf[m] = w
                m += 1

        for i in range(m):
            b = 1 + np.int64(_next(state) % np.uint64(window))
            start = i - b
            if start < 0:
                start = 0
            end = i + b + 1
            if end > m:
                end = m
            center = buf[i]
            for j in range(start, end):
                if j == i:
                    continue
                tgt = buf[j]  # input row; `center` supplies the output row
                for k in range(dim):
                    neu[k] = 0.0
                for sample in range(negatives + 1):
                    if sample == 0:
                        out_row = center
                        label = 1.0
                    else:
                        out_row = np.searchsorted(noise_cdf, _next_float(state), side="right")
                        while out_row == center:
                            out_row = np.searchsorted(noise_cdf, _next_float(state), side="right")
                        label = 0.0
                    dot = 0.0
                    for k in range(dim):
                        dot += np.float64(inputs[tgt, k]) * np.float64(outputs[out_row, k])
                    if not np.isfinite(dot):
                        return s
                    g = np.float32((label - 1.0 / (1.0 + math.exp(-dot))) * alpha)
                    for k in range(dim):
                        neu[k] += g * outputs[out_row, k]
                    for k in range(dim):
                        outputs[out_row, k] += g * inputs[tgt, k]
                for k in range(dim):
                    inputs[tgt, k] += neu[k]
    return -1
