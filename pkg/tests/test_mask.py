import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import REFERENCE_MANNERS, random_posteriors
from mannerctc.alphabet import Alphabet, MannerMap, default_alphabet, default_manner_map
from mannerctc.decode import BeamParams, beam_search_decode
from mannerctc.exceptions import PosteriorError
from mannerctc.mask import manner_based_char_decode, mask_posteriors, plan_from_manner_posteriors

TINY = MannerMap(Alphabet(("-", "A", "B", "E")), {"-": ["-"], "V": ["A", "E"], "S": ["B"]})


def manner_rows(manner_map, labels, peak=1.0):
    M = len(manner_map.manners)
    rows = np.full((len(labels), M), (1 - peak) / (M - 1) if M > 1 else 0.0)
    for t, lab in enumerate(labels):
        rows[t, manner_map.manners.index(lab)] = peak
    return rows


def test_plan_vowel_frame(manner_map):
    row = np.full((1, 7), 0.1 / 6)
    row[0, 1] = 0.9
    plan = plan_from_manner_posteriors(row, manner_map)
    assert plan.allowed_char_indices_per_frame[0] == REFERENCE_MANNERS["V"]


def test_plan_blank_and_tie(manner_map):
    rows = np.vstack([np.eye(7)[0], np.full(7, 1 / 7)])
    plan = plan_from_manner_posteriors(rows, manner_map)
    assert plan.manner_index_per_frame == (0, 0)
    assert plan.allowed_char_indices_per_frame == ({0}, {0})


def test_plan_rejects_wrong_alphabet(manner_map):
    with pytest.raises(PosteriorError):
        plan_from_manner_posteriors(np.full((2, 28), 1 / 28), manner_map)


def test_mask_example():
    plan = plan_from_manner_posteriors(manner_rows(TINY, "V"), TINY)
    out = mask_posteriors(np.array([[0.1, 0.5, 0.2, 0.2]]), plan)
    assert out[0, 0] == 0.0 and out[0, 2] == 0.0
    np.testing.assert_allclose(out[0], [0, 0.5 / 0.7, 0, 0.2 / 0.7], atol=1e-6)
    np.testing.assert_allclose(out[0], [0, 0.714286, 0, 0.285714], atol=1e-6)


def test_mask_already_supported_is_identity():
    plan = plan_from_manner_posteriors(manner_rows(TINY, "V"), TINY)
    row = np.array([[0.0, 0.25, 0.0, 0.75]])
    assert np.array_equal(mask_posteriors(row, plan), row)


def test_mask_degenerate_row_is_uniform_over_allowed():
    plan = plan_from_manner_posteriors(manner_rows(TINY, "V"), TINY)
    out = mask_posteriors(np.array([[0.7, 0.0, 0.3, 0.0]]), plan)
    np.testing.assert_array_equal(out, [[0.0, 0.5, 0.0, 0.5]])


def test_mask_frame_mismatch():
    plan = plan_from_manner_posteriors(manner_rows(TINY, "VV"), TINY)
    with pytest.raises(ValueError, match="2 frames"):
        mask_posteriors(np.full((3, 4), 0.25), plan)


def _check_invariants(pc, pm, manner_map):
    plan = plan_from_manner_posteriors(pm, manner_map)
    out = mask_posteriors(pc, plan)
    allowed = plan.support
    assert np.all(out[~allowed] == 0.0)
    assert np.all(np.abs(out.sum(axis=1) - 1) <= 1e-9)
    assert np.all(allowed[np.arange(len(out)), out.argmax(axis=1)])
    assert np.max(np.abs(mask_posteriors(out, plan) - out)) <= 1e-12
    for t in range(len(pc)):
        idx = np.flatnonzero(allowed[t] & (pc[t] > 0))
        if len(idx) >= 2 and pc[t, idx].sum() >= 1e-12:
            i, j = idx[0], idx[1:]
            np.testing.assert_allclose(out[t, i] / out[t, j], pc[t, i] / pc[t, j], rtol=1e-9)


def test_mask_invariants_random(rng, manner_map):
    pc = random_posteriors(rng, 200, 28, concentration=0.3)
    pm = random_posteriors(rng, 200, 7, concentration=0.5)
    _check_invariants(pc, pm, manner_map)


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 8), st.just(28)), elements=st.floats(0, 1)),
    st.lists(st.integers(0, 6), min_size=8, max_size=8),
)
def test_mask_invariants_property(raw, manners):
    mm = default_manner_map()
    raw = raw + 1e-300 * (raw.sum(axis=1, keepdims=True) == 0)
    pc = raw / raw.sum(axis=1, keepdims=True)
    pm = np.eye(7)[manners[: len(pc)]]
    _check_invariants(pc, pm, mm)


def test_composition(rng, manner_map, alphabet):
    pc = random_posteriors(rng, 25, 28, concentration=0.3)
    pm = random_posteriors(rng, 25, 7, concentration=0.5)
    params = BeamParams(8)
    composed = beam_search_decode(mask_posteriors(pc, plan_from_manner_posteriors(pm, manner_map)),
                                  alphabet, params)
    assert manner_based_char_decode(pc, pm, alphabet, manner_map, params) == composed


def test_stream_length_mismatch(alphabet, manner_map):
    with pytest.raises(PosteriorError, match="6 frames.*manner stream has 5"):
        manner_based_char_decode(np.full((6, 28), 1 / 28), np.full((5, 7), 1 / 7), alphabet, manner_map)


def test_blank_plan_gives_empty_transcript(rng, alphabet, manner_map):
    pc = random_posteriors(rng, 10, 28)
    pm = np.eye(7)[[0] * 10]
    assert manner_based_char_decode(pc, pm, alphabet, manner_map).transcript == ""


def test_aligned_an(rng, alphabet, manner_map):
    path = [0, 1, 1, 0, 14, 14, 0]
    pc = 0.8 * np.eye(28)[path] + 0.2 * random_posteriors(rng, len(path), 28)
    pm = np.eye(7)[[manner_map.char_to_manner[i] for i in path]]
    assert manner_based_char_decode(pc, pm, alphabet, manner_map).transcript == "AN"


def test_recovers_region_swallowed_by_blank(alphabet, manner_map):
    # "EL" is clear; in "EVEN" the blank dominates every character frame,
    # but the manner stream still marks those frames as emitting.
    text = "ELEVEN"
    weak = {2, 3, 4, 5}
    rows, manners = [], []
    blank_row = np.eye(28)[0]
    for k, ch in enumerate(text):
        idx = alphabet.index(ch)
        row = np.zeros(28)
        if k in weak:
            row[0], row[idx], row[alphabet.index("I")] = 0.8, 0.15, 0.05
        else:
            row[0], row[idx] = 0.1, 0.9
        rows += [row, blank_row]
        manners += [manner_map.char_to_manner[idx], 0]
    pc, pm = np.array(rows), np.eye(7)[manners]
    params = BeamParams(16)
    assert beam_search_decode(pc, alphabet, params).transcript == "EL"
    assert manner_based_char_decode(pc, pm, alphabet, manner_map, params).transcript == "ELEVEN"


def test_masking_needs_matching_map(rng):
    with pytest.raises(ValueError, match="different character alphabet"):
        manner_based_char_decode(np.full((2, 28), 1 / 28), np.full((2, 7), 1 / 7),
                                 default_alphabet(apostrophe=True).__class__(tuple("-ABCDEFGHIJKLMNOPQRSTUVWXYZ>")),
                                 MannerMap(Alphabet(tuple("-ABCDEFGHIJKLMNOPQRSTUVWXYZ>"), space_symbol=None),
                                           default_manner_map().classes()))
