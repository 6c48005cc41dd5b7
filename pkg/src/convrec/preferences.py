"""Preference modeling agent.

Maintains the per-session preference profile: a decaying weight per attribute
plus a confidence estimate, updated each turn from explicit statements and
implicit feedback, and scores candidates by attribute affinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conversation import ConversationState
from .errors import InvalidConfig

AFFINITY_EPS = 1e-9
CLICK_GAIN = 0.5
DWELL_GAIN = 0.5


@dataclass(frozen=True)
class FeedbackSignal:
    """Explicit and implicit per-turn feedback, keyed by item id."""

    liked_items: tuple[str, ...] = ()
    disliked_items: tuple[str, ...] = ()
    clicks: tuple[str, ...] = ()
    dwell_ms: dict[str, int] = field(default_factory=dict)
    explicit_rating: tuple[str, float] | None = None

    def __post_init__(self) -> None:
        overlap = set(self.liked_items) & set(self.disliked_items)
        if overlap:
            raise ValueError(f"items cannot be both liked and disliked: {sorted(overlap)}")
        if self.explicit_rating is not None and not (0.0 <= self.explicit_rating[1] <= 1.0):
            raise ValueError("explicit rating must be in [0, 1]")

    def is_empty(self) -> bool:
        return not (
            self.liked_items or self.disliked_items or self.clicks
            or self.dwell_ms or self.explicit_rating
        )


EMPTY_FEEDBACK = FeedbackSignal()


@dataclass
class PreferenceProfile:
    weights: np.ndarray
    confidence: np.ndarray
    last_turn: int = -1

    @property
    def vocab_size(self) -> int:
        return len(self.weights)

    def copy(self) -> "PreferenceProfile":
        return PreferenceProfile(self.weights.copy(), self.confidence.copy(), self.last_turn)


def init_profile(vocab_size: int) -> PreferenceProfile:
    if vocab_size < 1:
        raise InvalidConfig(f"vocab_size must be >= 1, got {vocab_size}")
    return PreferenceProfile(
        weights=np.zeros(vocab_size, dtype=np.float64),
        confidence=np.zeros(vocab_size, dtype=np.float64),
        last_turn=-1,
    )


def profile_coverage(profile: PreferenceProfile) -> float:
    """Mean attribute confidence; 0 for a fresh profile, 1 when saturated."""
    return float(profile.confidence.mean())


def _accumulate(total: np.ndarray, touched: np.ndarray, contribution: np.ndarray) -> None:
    total += contribution
    touched |= contribution != 0


def update_profile(
    prev: PreferenceProfile,
    feedback: FeedbackSignal,
    conv: ConversationState,
    catalog,
    *,
    decay: float = 0.9,
    eta_explicit: float = 0.3,
    eta_implicit: float = 0.1,
    confidence_gain: float = 0.5,
    dwell_saturation_ms: int = 30000,
) -> PreferenceProfile:
    """Decay-and-accumulate profile update.

    new weights = clamp(decay * weights + eta_explicit * explicit
    + eta_implicit * implicit, -1, 1). Explicit gathers statement
    polarity*strength and liked/disliked item attribute vectors; implicit
    gathers click and saturated-dwell contributions. Confidence rises toward 1
    for every attribute that received any contribution this turn.
    """
    v = prev.vocab_size
    explicit = np.zeros(v, dtype=np.float64)
    implicit = np.zeros(v, dtype=np.float64)
    touched = np.zeros(v, dtype=bool)

    for st in conv.statements:
        if not 0 <= st.attribute_id < v:
            raise InvalidConfig(f"statement attribute {st.attribute_id} outside vocabulary {v}")
        contribution = st.polarity * st.strength
        explicit[st.attribute_id] += contribution
        touched[st.attribute_id] |= contribution != 0

    def attrs_of(item_id: str) -> np.ndarray | None:
        vec = catalog.attributes_of(item_id) if catalog is not None else None
        if vec is not None and len(vec) != v:
            raise InvalidConfig(
                f"catalog attribute dimension {len(vec)} != profile vocabulary {v}"
            )
        return vec

    for item_id in feedback.liked_items:
        vec = attrs_of(item_id)
        if vec is not None:
            _accumulate(explicit, touched, vec)
    for item_id in feedback.disliked_items:
        vec = attrs_of(item_id)
        if vec is not None:
            _accumulate(explicit, touched, -vec)
    for item_id in feedback.clicks:
        vec = attrs_of(item_id)
        if vec is not None:
            _accumulate(implicit, touched, CLICK_GAIN * vec)
    for item_id, ms in feedback.dwell_ms.items():
        vec = attrs_of(item_id)
        if vec is not None and ms > 0:
            _accumulate(implicit, touched, min(ms / dwell_saturation_ms, 1.0) * DWELL_GAIN * vec)

    weights = decay * prev.weights + eta_explicit * explicit + eta_implicit * implicit
    np.clip(weights, -1.0, 1.0, out=weights)
    confidence = 1.0 - (1.0 - prev.confidence) * (1.0 - touched * confidence_gain)
    return PreferenceProfile(weights=weights, confidence=confidence, last_turn=conv.turn_index)


def score_candidates_pref(profile: PreferenceProfile, candidates):
    """Affinity of each candidate to the profile: (w . attrs) / (|attrs|_1 + eps)."""
    from .context import attribute_matrix
    from .ranking import AgentId, AgentScores

    if not len(candidates):
        return AgentScores(AgentId.PREF, np.zeros(0))
    matrix = attribute_matrix(candidates)
    if matrix.shape[1] != profile.vocab_size:
        raise InvalidConfig(
            f"candidate attribute dimension {matrix.shape[1]} "
            f"!= profile vocabulary {profile.vocab_size}"
        )
    scores = (matrix @ profile.weights) / (np.abs(matrix).sum(axis=1) + AFFINITY_EPS)
    return AgentScores(AgentId.PREF, scores)
