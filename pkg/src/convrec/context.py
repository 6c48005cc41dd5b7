"""Context awareness agent: situational snapshot and contextual fit scoring."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidConfig, InvalidContext

CONTEXT_DIM = 12  # 4 time buckets + 4 locations + 3 social settings + mood


class TimeBucket(str, Enum):
    MORNING = "Morning"
    AFTERNOON = "Afternoon"
    EVENING = "Evening"
    NIGHT = "Night"


class LocationTag(str, Enum):
    HOME = "Home"
    WORK = "Work"
    TRANSIT = "Transit"
    OTHER = "Other"


class SocialSetting(str, Enum):
    ALONE = "Alone"
    WITH_FRIENDS = "WithFriends"
    WITH_FAMILY = "WithFamily"


@dataclass(frozen=True)
class ContextSnapshot:
    time_bucket: TimeBucket
    location_tag: LocationTag
    social_setting: SocialSetting
    mood: float
    features: np.ndarray


@dataclass(frozen=True)
class Candidate:
    """A recommendable item with attribute and context-affinity vectors."""

    item_id: str
    attributes: np.ndarray
    context_affinity: np.ndarray
    popularity: float
    novelty: float
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", np.asarray(self.attributes, dtype=np.float64))
        object.__setattr__(
            self, "context_affinity", np.asarray(self.context_affinity, dtype=np.float64)
        )
        if not (np.isfinite(self.attributes).all() and np.isfinite(self.context_affinity).all()):
            raise InvalidConfig(f"candidate {self.item_id} has non-finite vectors")


def _one_hot(value: Enum, members: type[Enum]) -> np.ndarray:
    vec = np.zeros(len(members), dtype=np.float64)
    vec[list(members).index(value)] = 1.0
    return vec


def snapshot_context(
    time_bucket: TimeBucket,
    location_tag: LocationTag,
    social_setting: SocialSetting,
    mood: float,
) -> ContextSnapshot:
    """Concatenated one-hot blocks plus the mood scalar."""
    if not -1.0 <= mood <= 1.0:
        raise InvalidContext(f"mood {mood} outside [-1, 1]")
    features = np.concatenate(
        [
            _one_hot(TimeBucket(time_bucket), TimeBucket),
            _one_hot(LocationTag(location_tag), LocationTag),
            _one_hot(SocialSetting(social_setting), SocialSetting),
            [float(mood)],
        ]
    )
    return ContextSnapshot(
        time_bucket=TimeBucket(time_bucket),
        location_tag=LocationTag(location_tag),
        social_setting=SocialSetting(social_setting),
        mood=float(mood),
        features=features,
    )


DEFAULT_CONTEXT = snapshot_context(
    TimeBucket.EVENING, LocationTag.HOME, SocialSetting.ALONE, 0.0
)


def attribute_matrix(candidates) -> np.ndarray:
    """Stacked (n, V) attribute matrix for vectorized scoring."""
    return np.stack([c.attributes for c in candidates])


def affinity_matrix(candidates) -> np.ndarray:
    for cand in candidates:
        if len(cand.context_affinity) != CONTEXT_DIM:
            raise InvalidConfig(
                f"candidate {cand.item_id} context affinity has dimension "
                f"{len(cand.context_affinity)}, expected {CONTEXT_DIM}"
            )
    return np.stack([c.context_affinity for c in candidates])


def score_candidates_ctx(ctx: ContextSnapshot, candidates):
    """Contextual fit: (context features . candidate affinity) / dimension."""
    from .ranking import AgentId, AgentScores

    if not len(candidates):
        return AgentScores(AgentId.CTX, np.zeros(0))
    scores = (affinity_matrix(candidates) @ ctx.features) / CONTEXT_DIM
    return AgentScores(AgentId.CTX, scores)
