"""Dynamic ranking agent: softmax-gated combination of interpretable factors."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .context import ContextSnapshot, score_candidates_ctx
from .preferences import PreferenceProfile, profile_coverage, score_candidates_pref
from .util import softmax

FACTORS = ("PreferenceFit", "ContextFit", "Popularity", "Novelty")
DEFAULT_GAINS = (2.0, 2.0, 0.5, 0.5)


class AgentId(str, Enum):
    CONV = "Conv"
    PREF = "Pref"
    CTX = "Ctx"
    RANK = "Rank"


AGENT_ORDER = (AgentId.CONV, AgentId.PREF, AgentId.CTX, AgentId.RANK)


@dataclass(frozen=True)
class AgentScores:
    agent_id: AgentId
    scores: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", s)
        if not np.isfinite(s).all():
            raise ValueError(f"{self.agent_id.value} agent produced non-finite scores")


@dataclass(frozen=True)
class FactorWeights:
    """Distribution over FACTORS; produced by the softmax gate."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.alpha, dtype=np.float64)
        object.__setattr__(self, "alpha", a)
        if a.shape != (len(FACTORS),) or (a < 0).any() or abs(float(a.sum()) - 1.0) > 1e-9:
            raise ValueError("factor weights must be a non-negative distribution over 4 factors")


def attention_weights(
    profile: PreferenceProfile,
    ctx: ContextSnapshot,
    gains: tuple[float, float, float, float] = DEFAULT_GAINS,
) -> FactorWeights:
    """Gate logits: [coverage*g1, mean|ctx|*g2, g3, g4] through a stable softmax."""
    logits = np.array(
        [
            profile_coverage(profile) * gains[0],
            float(np.abs(ctx.features).mean()) * gains[1],
            gains[2],
            gains[3],
        ]
    )
    return FactorWeights(softmax(logits))


def score_candidates_rank(
    candidates,
    profile: PreferenceProfile,
    ctx: ContextSnapshot,
    gains: tuple[float, float, float, float] = DEFAULT_GAINS,
) -> AgentScores:
    """Per-candidate dot product of factor scores with the attention gate."""
    alpha = attention_weights(profile, ctx, gains).alpha
    pref_fit = score_candidates_pref(profile, candidates).scores
    ctx_fit = score_candidates_ctx(ctx, candidates).scores
    factors = np.column_stack(
        [
            pref_fit,
            ctx_fit,
            np.array([c.popularity for c in candidates], dtype=np.float64),
            np.array([c.novelty for c in candidates], dtype=np.float64),
        ]
    ) if candidates else np.zeros((0, 4))
    return AgentScores(AgentId.RANK, factors @ alpha)
