"""Turn orchestration: wires the four agents, coordinator, and tier router.

One Engine serves many sessions against a single catalog. Each turn runs
state encoding, complexity routing, tier execution, and the persistent
profile update, and reports the work (number of agent scoring passes) spent.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass

from .catalog import Catalog
from .config import EngineConfig
from .conversation import (
    ConversationHistory,
    ConversationState,
    Role,
    Utterance,
    UtteranceAnalyzer,
    encode_state,
    rule_based_analyzer,
    score_candidates_conv,
)
from .context import DEFAULT_CONTEXT, ContextSnapshot
from .coordinator import (
    Coordinator,
    CoordinatorFeatures,
    RankedList,
    TurnReward,
    WeightNet,
    Weights,
    fuse_partial,
    fuse_scores,
    refine_round,
    turn_reward,
)
from .errors import InvalidConfig
from .preferences import (
    EMPTY_FEEDBACK,
    FeedbackSignal,
    PreferenceProfile,
    init_profile,
    profile_coverage,
    score_candidates_pref,
    update_profile,
)
from .ranking import AgentId, score_candidates_rank
from .routing import (
    ResponseCache,
    Tier,
    TierDecision,
    cache_signature,
    complexity_score,
    route,
)
from .util import rng_stream

_session_counter = itertools.count(1)


@dataclass
class EngineSession:
    """Per-session mutable state; one writer at a time."""

    session_id: str
    history: ConversationHistory
    profile: PreferenceProfile
    context: ContextSnapshot
    created_at_ms: int = 0
    last_active_ms: int = 0
    last_weights: Weights | None = None
    last_decision: TierDecision | None = None

    @property
    def turn_index(self) -> int:
        return len(self.history.utterances)


@dataclass
class TurnResult:
    state: ConversationState
    decision: TierDecision
    weights: Weights
    ranked: RankedList
    work_units: int
    reward: TurnReward | None
    turn_index: int


class Engine:
    """Recommendation engine bound to one catalog.

    Variant knobs: ``adaptive`` switches the coordinator between the learned
    weight network and fixed uniform weights; ``refine`` enables the Tier-3
    refinement pass; ``forced_tier`` pins every turn to one tier.
    """

    def __init__(
        self,
        config: EngineConfig,
        catalog: Catalog,
        *,
        net: WeightNet | None = None,
        net_seed: int = 0,
        adaptive: bool = True,
        refine: bool = True,
        forced_tier: Tier | None = None,
        analyzer: UtteranceAnalyzer | None = None,
    ) -> None:
        if catalog.vocab_size != config.vocab_size:
            raise InvalidConfig(
                f"catalog vocabulary {catalog.vocab_size} != lexicon vocabulary "
                f"{config.vocab_size}"
            )
        self.config = config
        self.catalog = catalog
        self.adaptive = adaptive
        self.refine = refine
        self.forced_tier = forced_tier
        self.analyzer = analyzer or rule_based_analyzer(config.lexicon, config.intent_smoothing)
        input_dim = config.feature_dim + 2 + 4 * config.perf_window
        if net is None:
            net = WeightNet.random(
                input_dim, config.hidden_units, rng_stream(net_seed, "weightnet-init")
            )
        self.coordinator = Coordinator(
            net,
            perf_window=config.perf_window,
            learning_rate=config.learning_rate,
            baseline_decay=config.baseline_decay,
            adaptive=adaptive,
        )
        self.cache = ResponseCache(config.cache_capacity, config.cache_coverage_drift)
        self.tier_counts: dict[str, int] = {t.value: 0 for t in Tier}
        self._counter_lock = threading.Lock()

    def new_session(
        self, context: ContextSnapshot | None = None, session_id: str | None = None
    ) -> EngineSession:
        sid = session_id or f"s{next(_session_counter):08d}"
        now = int(time.time() * 1000)
        return EngineSession(
            session_id=sid,
            history=ConversationHistory(session_id=sid),
            profile=init_profile(self.config.vocab_size),
            context=context or DEFAULT_CONTEXT,
            created_at_ms=now,
            last_active_ms=now,
        )

    def process_turn(
        self,
        session: EngineSession,
        text: str,
        feedback: FeedbackSignal | None = None,
        timestamp_ms: int = 0,
    ) -> TurnResult:
        """Run one full turn and persist session state."""
        cfg = self.config
        feedback = feedback if feedback is not None else EMPTY_FEEDBACK
        utt = Utterance(text, Role.USER, session.turn_index, timestamp_ms)
        state = encode_state(
            utt, session.history, cfg.lexicon, cfg.feature_dim,
            cfg.turn_saturation, cfg.intent_smoothing, analyzer=self.analyzer,
        )
        score = complexity_score(state, session.profile, cfg.router_betas, cfg.turn_saturation)
        decision = route(score, (cfg.tau1, cfg.tau2))
        if self.forced_tier is not None:
            decision = TierDecision(tier=self.forced_tier, score=score)

        features = self.coordinator.features_for(
            state, profile_coverage(session.profile), score.value
        )
        weights = self.coordinator.weights_for(features)
        decision, ranked, work, reward = self._execute_tier(
            decision, session, state, text, features, weights, feedback
        )

        session.profile = update_profile(
            session.profile, feedback, state, self.catalog,
            decay=cfg.decay, eta_explicit=cfg.eta_explicit, eta_implicit=cfg.eta_implicit,
            confidence_gain=cfg.confidence_gain, dwell_saturation_ms=cfg.dwell_saturation_ms,
        )
        session.history.append(utt)
        session.last_weights = weights
        session.last_decision = decision
        session.last_active_ms = int(time.time() * 1000)
        with self._counter_lock:
            self.tier_counts[decision.tier.value] += 1
        return TurnResult(
            state=state,
            decision=decision,
            weights=weights,
            ranked=ranked,
            work_units=work,
            reward=reward,
            turn_index=utt.turn_index,
        )

    def _execute_tier(
        self,
        decision: TierDecision,
        session: EngineSession,
        state: ConversationState,
        text: str,
        features: CoordinatorFeatures,
        weights: Weights,
        feedback: FeedbackSignal,
    ) -> tuple[TierDecision, RankedList, int, TurnReward | None]:
        candidates = self.catalog.items
        item_ids = [c.item_id for c in candidates]
        coverage = profile_coverage(session.profile)

        if decision.tier is Tier.RAPID:
            sig = cache_signature(text, session.profile)
            cached = self.cache.get(sig, coverage)
            if cached is not None:
                return TierDecision(Tier.RAPID, decision.score, cache_hit=True), cached, 0, None
            pref = score_candidates_pref(session.profile, candidates)
            ranked = fuse_partial({AgentId.PREF: (1.0, pref.scores)}, item_ids)
            self.cache.put(sig, ranked, coverage)
            return decision, ranked, 1, None

        if decision.tier is Tier.REASONING:
            pref = score_candidates_pref(session.profile, candidates)
            ctx = self._score_ctx(session, candidates)
            rank = score_candidates_rank(
                candidates, session.profile, session.context, self.config.rank_gains
            )
            subset = (AgentId.PREF, AgentId.CTX, AgentId.RANK)
            total = sum(weights.of(a) for a in subset)
            weighted = {
                AgentId.PREF: (weights.of(AgentId.PREF) / total, pref.scores),
                AgentId.CTX: (weights.of(AgentId.CTX) / total, ctx.scores),
                AgentId.RANK: (weights.of(AgentId.RANK) / total, rank.scores),
            }
            return decision, fuse_partial(weighted, item_ids), 3, None

        # deep collaboration: all four agents, refinement, reward, learning
        conv = score_candidates_conv(text, candidates, self.config.lexicon)
        pref = score_candidates_pref(session.profile, candidates)
        ctx = self._score_ctx(session, candidates)
        rank = score_candidates_rank(
            candidates, session.profile, session.context, self.config.rank_gains
        )
        outputs = [conv, pref, ctx, rank]
        work = 4
        if self.refine:
            outputs = refine_round(
                outputs, candidates, session.profile, session.context, state.statements,
                eta_explicit=self.config.eta_explicit, rank_gains=self.config.rank_gains,
            )
            work += 2
        ranked = fuse_scores(weights, outputs, item_ids)
        reward = turn_reward(ranked, feedback, self.config.top_k)
        self.coordinator.observe(features, weights, reward)
        return decision, ranked, work, reward

    def _score_ctx(self, session: EngineSession, candidates):
        from .context import score_candidates_ctx

        return score_candidates_ctx(session.context, candidates)

    def metrics(self) -> dict:
        with self._counter_lock:
            counts = dict(self.tier_counts)
        return {
            "requests_total": sum(counts.values()),
            "tier_counts": counts,
            "cache_hits": self.cache.hits,
            "cache_misses": self.cache.misses,
            "cache_hit_rate": self.cache.hit_rate(),
        }
