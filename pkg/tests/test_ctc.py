import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_posteriors
from mannerctc.ctc import (
    enumerate_oracle,
    forward_log_probability,
    forward_probability,
    min_frames,
    squash,
    transcript_distribution,
)
from mannerctc.exceptions import InstanceTooLargeError


@pytest.mark.parametrize("path, expected", [
    ([0, 0, 1, 1, 0, 2], (1, 2)),
    ([1, 0, 1], (1, 1)),
    ([0, 0, 0], ()),
    ([], ()),
    ([2, 2, 2], (2,)),
])
def test_squash(path, expected):
    assert squash(path) == expected


@given(st.lists(st.integers(1, 5), max_size=12))
def test_squash_idempotent_on_clean_sequences(seq):
    clean = [a for i, a in enumerate(seq) if i == 0 or a != seq[i - 1]]
    assert squash(clean) == tuple(clean)
    assert squash(squash(seq)) == squash(seq)


def test_forward_single_frame():
    assert forward_probability(np.array([[0.0, 1.0]]), [1]) == 1.0


def test_forward_two_uniform_frames():
    # paths AA, -A, A- (enumerated by hand)
    p = np.full((2, 2), 0.5)
    assert forward_probability(p, [1]) == pytest.approx(0.75, abs=1e-15)
    assert enumerate_oracle(p, [1]) == pytest.approx(0.75, abs=1e-15)


def test_forward_matches_oracle_random(rng):
    for _ in range(50):
        p = random_posteriors(rng, 6, 4)
        y = tuple(rng.integers(1, 4, size=rng.integers(0, 4)))
        assert abs(forward_probability(p, y) - enumerate_oracle(p, y)) <= 1e-10


def test_unreachable_transcript_is_zero(rng):
    p = random_posteriors(rng, 3, 3)
    assert min_frames((1, 1, 1)) == 5
    assert forward_probability(p, (1, 1, 1)) == 0.0
    assert enumerate_oracle(p, (1, 1, 1)) == 0.0
    assert forward_log_probability(p, (1, 2, 1, 2)) == float("-inf")


def test_exact_fit_repeats():
    # "AA" in 3 frames has the single path A - A
    p = np.array([[0.1, 0.9], [0.6, 0.4], [0.2, 0.8]])
    assert forward_probability(p, (1, 1)) == pytest.approx(0.9 * 0.6 * 0.8)


def test_total_probability(rng):
    for T, L in [(1, 2), (3, 3), (5, 4), (6, 3)]:
        p = random_posteriors(rng, T, L)
        dist = transcript_distribution(p)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(forward_probability(p, y) for y in dist) == pytest.approx(1.0, abs=1e-9)


def test_oracle_refuses_large_instances():
    p = np.full((12, 4), 0.25)
    with pytest.raises(InstanceTooLargeError, match="4\\*\\*12"):
        enumerate_oracle(p, (1,))
    with pytest.raises(InstanceTooLargeError):
        transcript_distribution(p)


def test_long_utterance_does_not_underflow(rng):
    p = random_posteriors(rng, 2000, 5, concentration=0.5)
    logp = forward_log_probability(p, tuple(rng.integers(1, 5, size=300)))
    assert np.isfinite(logp) and logp < -500


def test_zero_entries_are_handled():
    p = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    assert forward_probability(p, (2, 1)) == 1.0
    assert forward_probability(p, (1, 2)) == 0.0


def test_rejects_blank_in_transcript():
    with pytest.raises(ValueError):
        forward_probability(np.full((2, 2), 0.5), (0,))


def test_monotone_under_decrease(rng):
    # move mass from a used entry to label 3, which no path for y can use
    y = (1, 2)
    for _ in range(50):
        p = random_posteriors(rng, 4, 4)
        t, k = rng.integers(4), rng.integers(0, 3)
        q = p.copy()
        delta = q[t, k] * rng.uniform(0.1, 1.0)
        q[t, k] -= delta
        q[t, 3] += delta
        assert forward_probability(q, y) <= forward_probability(p, y) + 1e-15
        assert enumerate_oracle(q, y) <= enumerate_oracle(p, y) + 1e-15


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(2, 4)),
           elements=st.floats(0.01, 1.0)),
    st.lists(st.integers(1, 3), max_size=3),
)
def test_forward_equals_oracle_property(raw, y):
    p = raw / raw.sum(axis=1, keepdims=True)
    y = [c % (p.shape[1] - 1) + 1 for c in y]
    assert abs(forward_probability(p, y) - enumerate_oracle(p, y)) <= 1e-10
