import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convrec.catalog import Catalog
from convrec.conversation import ConversationState, PreferenceStatement
from convrec.errors import InvalidConfig
from convrec.preferences import (
    FeedbackSignal,
    PreferenceProfile,
    init_profile,
    profile_coverage,
    score_candidates_pref,
    update_profile,
)

from conftest import make_candidate, uniform_intent


def state_with(statements=(), turn_index=0) -> ConversationState:
    return ConversationState(
        intent=uniform_intent(),
        statements=tuple(statements),
        turn_index=turn_index,
        features=np.zeros(32),
    )


def test_init_profile_examples():
    p = init_profile(4)
    assert p.weights.tolist() == [0, 0, 0, 0]
    assert p.confidence.tolist() == [0, 0, 0, 0]
    assert p.last_turn == -1
    p1 = init_profile(1)
    assert p1.weights.tolist() == [0] and p1.last_turn == -1


def test_init_profile_zero_vocab():
    with pytest.raises(InvalidConfig):
        init_profile(0)


def test_update_pure_decay():
    prev = PreferenceProfile(np.array([1.0, 0.0]), np.zeros(2))
    out = update_profile(prev, FeedbackSignal(), state_with(), None, decay=0.9)
    assert out.weights.tolist() == [0.9, 0.0]
    assert out.confidence.tolist() == [0.0, 0.0]


def test_update_single_statement():
    prev = init_profile(2)
    conv = state_with([PreferenceStatement(0, 1.0, 1.0)])
    out = update_profile(prev, FeedbackSignal(), conv, None, decay=0.9, eta_explicit=0.3)
    assert out.weights == pytest.approx([0.3, 0.0])
    # attribute 0 touched, attribute 1 not
    assert out.confidence[0] == pytest.approx(0.5)
    assert out.confidence[1] == 0.0


def test_update_liked_disliked_cancel(tiny_catalog):
    # items "a" ([1,0,0,0]) liked and "b" ([0,1,0,0])... use same-attr items:
    cat = Catalog(
        vocab_size=2,
        items=[make_candidate("p", [0, 1]), make_candidate("q", [0, 1])],
    )
    prev = PreferenceProfile(np.array([0.5, 0.5]), np.zeros(2))
    fb = FeedbackSignal(liked_items=("p",), disliked_items=("q",))
    out = update_profile(prev, fb, state_with(), cat, decay=0.9)
    # explicit contributions on attribute 1 cancel exactly: pure decay remains
    assert out.weights == pytest.approx([0.45, 0.45])
    # ...but the attribute did receive contributions, so confidence moved
    assert out.confidence[1] > 0.0
    assert out.confidence[0] == 0.0


def test_update_click_and_dwell(tiny_catalog):
    prev = init_profile(4)
    fb = FeedbackSignal(clicks=("a",), dwell_ms={"b": 15000})
    out = update_profile(prev, fb, state_with(), tiny_catalog, eta_implicit=0.1)
    # click: 0.5 * attrs(a); dwell: min(15000/30000,1) * 0.5 * attrs(b)
    assert out.weights[0] == pytest.approx(0.1 * 0.5)
    assert out.weights[1] == pytest.approx(0.1 * 0.25)


def test_update_rejects_dimension_mismatch(tiny_catalog):
    prev = init_profile(3)  # catalog vocab is 4
    fb = FeedbackSignal(liked_items=("a",))
    with pytest.raises(InvalidConfig):
        update_profile(prev, fb, state_with(), tiny_catalog)


def test_feedback_like_dislike_overlap_rejected():
    with pytest.raises(ValueError):
        FeedbackSignal(liked_items=("x",), disliked_items=("x",))


def test_decay_law_50_turns():
    profile = PreferenceProfile(np.array([1.0, -0.5]), np.zeros(2))
    lam = 0.9
    for t in range(1, 51):
        profile = update_profile(profile, FeedbackSignal(), state_with(), None, decay=lam)
        sup = float(np.abs(profile.weights).max())
        assert abs(sup - lam**t) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.floats(-1, 1), st.booleans()), max_size=25))
def test_weights_stay_bounded(events):
    cat = Catalog(vocab_size=4, items=[
        make_candidate("a", [1, 0, 0.5, 0]),
        make_candidate("b", [0, 1, 0, 0.5]),
    ])
    profile = init_profile(4)
    for attr, polarity, like in events:
        statements = [PreferenceStatement(attr, polarity, 1.0)]
        fb = FeedbackSignal(liked_items=("a",) if like else (), clicks=("b",))
        profile = update_profile(profile, fb, state_with(statements), cat)
        assert (profile.weights >= -1.0).all() and (profile.weights <= 1.0).all()
        assert (profile.confidence >= 0.0).all() and (profile.confidence <= 1.0).all()


def test_confidence_monotone_under_touches():
    prev = init_profile(2)
    last = 0.0
    for _ in range(6):
        conv = state_with([PreferenceStatement(0, 1.0, 1.0)])
        prev = update_profile(prev, FeedbackSignal(), conv, None)
        assert prev.confidence[0] >= last
        last = prev.confidence[0]
        assert prev.confidence[1] == 0.0


def test_update_is_deterministic(tiny_catalog):
    prev = PreferenceProfile(np.array([0.2, -0.1, 0.0, 0.4]), np.full(4, 0.25))
    conv = state_with([PreferenceStatement(2, -1.0, 0.5)], turn_index=3)
    fb = FeedbackSignal(liked_items=("a",), clicks=("b",), dwell_ms={"d": 9000})
    a = update_profile(prev, fb, conv, tiny_catalog)
    b = update_profile(prev, fb, conv, tiny_catalog)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.confidence.tobytes() == b.confidence.tobytes()
    assert a.last_turn == b.last_turn == 3


def test_coverage_examples():
    assert profile_coverage(init_profile(4)) == 0.0
    assert profile_coverage(PreferenceProfile(np.zeros(4), np.ones(4))) == 1.0
    assert profile_coverage(PreferenceProfile(np.zeros(4), np.array([1.0, 0, 0, 1.0]))) == 0.5


def test_score_zero_profile(tiny_catalog):
    scores = score_candidates_pref(init_profile(4), tiny_catalog.items)
    assert scores.scores == pytest.approx([0, 0, 0, 0])


def test_score_affinity_normalization():
    profile = PreferenceProfile(np.array([1.0, 0.0]), np.zeros(2))
    cands = [make_candidate("x", [1, 0]), make_candidate("y", [0, 1])]
    scores = score_candidates_pref(profile, cands)
    assert scores.scores[0] == pytest.approx(1.0 / (1.0 + 1e-9), abs=1e-15)
    assert scores.scores[1] == 0.0
    assert scores.scores[0] > scores.scores[1]


def test_score_duplicate_candidate():
    profile = PreferenceProfile(np.array([0.7, -0.2]), np.zeros(2))
    c = make_candidate("x", [0.5, 0.5])
    scores = score_candidates_pref(profile, [c, c])
    assert scores.scores[0] == scores.scores[1]
