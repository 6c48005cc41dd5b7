"""Synthetic-user evaluation harness.

Generates seeded worlds (catalog + users with hidden preferences), plays
full multi-turn conversations against the engine, and aggregates the ranking
metrics (success@k, recall@k, NDCG@k, average turns) for the system variants.
Every random draw comes from a named seeded stream, so any experiment is
exactly reproducible from its configuration.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .catalog import Catalog
from .config import EngineConfig, synthetic_lexicon
from .context import (
    CONTEXT_DIM,
    Candidate,
    ContextSnapshot,
    LocationTag,
    SocialSetting,
    TimeBucket,
    snapshot_context,
)
from .coordinator import RankedList
from .engine import Engine
from .errors import InvalidConfig
from .preferences import EMPTY_FEEDBACK, FeedbackSignal
from .routing import Tier
from .util import rng_stream

AFFINITY_EPS = 1e-9
VARIANTS = ("Full", "FixedUniformWeights", "NoRefineRound", "Tier2Only")
SUCCESS_DEFINITION = (
    "per-conversation: success iff some turn's top-k contained an item whose "
    "true affinity reached the acceptance threshold before patience expired"
)

_NEUTRAL_TEMPLATES = (
    "what else do you have",
    "hmm tell me more",
    "not sure about these",
    "okay show me again",
    "anything different today",
)


@dataclass(frozen=True)
class SimUser:
    """Hidden ground truth driving one synthetic conversation."""

    user_id: str
    true_preferences: np.ndarray
    time_bucket: TimeBucket
    location_tag: LocationTag
    social_setting: SocialSetting
    mood: float
    patience: int = 15
    accept_threshold: float = 0.6
    disclosure_rate: float = 0.5
    rng_seed: int = 0

    def context(self) -> ContextSnapshot:
        return snapshot_context(self.time_bucket, self.location_tag, self.social_setting, self.mood)


def true_affinity(preferences: np.ndarray, item: Candidate) -> float:
    """Ground-truth item fit, same form the preference agent uses."""
    return float(preferences @ item.attributes) / (
        float(np.abs(item.attributes).sum()) + AFFINITY_EPS
    )


def catalog_affinities(preferences: np.ndarray, catalog: Catalog) -> np.ndarray:
    matrix = np.stack([it.attributes for it in catalog.items])
    return (matrix @ preferences) / (np.abs(matrix).sum(axis=1) + AFFINITY_EPS)


@dataclass(frozen=True)
class TurnRecord:
    text: str
    tier: str
    cache_hit: bool
    work_units: int
    weights: tuple[float, float, float, float]
    top_ids: tuple[str, ...]
    reward: float | None
    liked: tuple[str, ...] = ()  # the user's reaction to this turn's list
    clicked: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConversationLog:
    seed: int
    user_index: int
    outcome: str  # "Success" | "Abandoned"
    turns_used: int
    relevant_ids: tuple[str, ...]
    turns: tuple[TurnRecord, ...]

    @property
    def final_top_ids(self) -> tuple[str, ...]:
        return self.turns[-1].top_ids if self.turns else ()


def generate_world(
    seed: int,
    vocab_size: int,
    n_items: int,
    n_users: int,
    *,
    accept_threshold: float = 0.6,
    patience: int = 15,
    disclosure_rate: float = 0.5,
) -> tuple[Catalog, list[SimUser]]:
    """Seeded catalog and user population.

    Items carry at most 4 active attributes; every user has at least three
    strong hidden preferences and at least one acceptable catalog item
    (users are redrawn until satisfiable).
    """
    if n_items < 20:
        raise InvalidConfig(f"need at least 20 items, got {n_items}")
    if vocab_size < 4:
        raise InvalidConfig(f"need vocabulary of at least 4, got {vocab_size}")
    if n_users < 1:
        raise InvalidConfig("need at least one user")

    item_rng = rng_stream(seed, "world-items")
    items: list[Candidate] = []
    for i in range(n_items):
        # 3-4 active attributes at similar magnitudes: an item only clears the
        # acceptance threshold when most of its attributes genuinely match,
        # which keeps the acceptable set small and ranking quality decisive
        n_active = int(item_rng.integers(3, 5))
        active = item_rng.choice(vocab_size, size=n_active, replace=False)
        attrs = np.zeros(vocab_size)
        attrs[active] = item_rng.uniform(0.7, 1.0, size=n_active)
        items.append(
            Candidate(
                item_id=f"item{i:03d}",
                name=f"Item {i:03d}",
                attributes=attrs,
                context_affinity=item_rng.uniform(0.0, 1.0, size=CONTEXT_DIM),
                popularity=float(item_rng.uniform(0.0, 1.0)),
                novelty=float(item_rng.uniform(0.0, 1.0)),
            )
        )
    catalog = Catalog(vocab_size=vocab_size, items=items)
    attr_matrix = np.stack([it.attributes for it in items])
    l1 = np.abs(attr_matrix).sum(axis=1) + AFFINITY_EPS

    user_rng = rng_stream(seed, "world-users")
    users: list[SimUser] = []
    for u in range(n_users):
        for _ in range(200):
            prefs = user_rng.uniform(-0.1, 0.1, size=vocab_size)
            strong = user_rng.choice(vocab_size, size=3, replace=False)
            signs = np.where(user_rng.random(3) < 0.85, 1.0, -1.0)
            prefs[strong] = signs * user_rng.uniform(0.7, 1.0, size=3)
            if float(((attr_matrix @ prefs) / l1).max()) >= accept_threshold:
                break
        else:
            raise InvalidConfig(
                "could not generate a satisfiable user; catalog too adversarial"
            )
        users.append(
            SimUser(
                user_id=f"user{u:04d}",
                true_preferences=prefs,
                time_bucket=list(TimeBucket)[int(user_rng.integers(0, 4))],
                location_tag=list(LocationTag)[int(user_rng.integers(0, 4))],
                social_setting=list(SocialSetting)[int(user_rng.integers(0, 3))],
                mood=float(user_rng.uniform(-0.5, 0.5)),
                patience=patience,
                accept_threshold=accept_threshold,
                disclosure_rate=disclosure_rate,
                rng_seed=int(user_rng.integers(0, 2**63 - 1)),
            )
        )
    return catalog, users


@dataclass(frozen=True)
class SimTurn:
    utterance: str | None
    feedback: FeedbackSignal
    accepted_item: str | None


class UserSimulator:
    """Plays one user against the engine: accept, click, disclose, or stall."""

    def __init__(self, user: SimUser, catalog: Catalog) -> None:
        self.user = user
        affinities = catalog_affinities(user.true_preferences, catalog)
        self.affinity = {it.item_id: float(a) for it, a in zip(catalog.items, affinities)}
        self.rng = np.random.default_rng(user.rng_seed)
        self.disclosed: set[int] = set()
        # attributes worth mentioning, strongest first
        prefs = user.true_preferences
        self._disclosure_order = [
            int(i) for i in np.argsort(-np.abs(prefs), kind="stable") if abs(prefs[i]) >= 0.3
        ]

    def opening_utterance(self) -> str:
        return "recommend me something"

    def simulate_turn(self, response: RankedList, k: int) -> SimTurn:
        """React to the ranked list; ends the conversation on acceptance."""
        top = response.top(k)
        for it in top:
            if self.affinity[it.item_id] >= self.user.accept_threshold:
                return SimTurn(None, FeedbackSignal(liked_items=(it.item_id,)), it.item_id)

        clicks: tuple[str, ...] = ()
        if top:
            p_click = min(max(self.affinity[top[0].item_id], 0.0), 1.0)
            if self.rng.random() < p_click:
                clicks = (top[0].item_id,)

        undisclosed = [a for a in self._disclosure_order if a not in self.disclosed]
        if undisclosed and self.rng.random() < self.user.disclosure_rate:
            attr = undisclosed[0]
            self.disclosed.add(attr)
            term = f"attr{attr}"
            if self.user.true_preferences[attr] >= 0:
                text = f"i really like {term}"
            else:
                text = f"i am not into {term}"
        else:
            text = _NEUTRAL_TEMPLATES[int(self.rng.integers(0, len(_NEUTRAL_TEMPLATES)))]
        return SimTurn(text, FeedbackSignal(clicks=clicks), None)


def ndcg_at_k(ranked_ids, relevance: dict[str, int], k: int) -> float:
    """Binary-gain NDCG; 0 when nothing is relevant anywhere."""
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    total_relevant = sum(1 for v in relevance.values() if v > 0)
    if total_relevant == 0:
        return 0.0
    dcg = 0.0
    for rank, item_id in enumerate(ranked_ids[:k], start=1):
        if relevance.get(item_id, 0) > 0:
            dcg += 1.0 / np.log2(rank + 1)
    idcg = sum(1.0 / np.log2(rank + 1) for rank in range(1, min(k, total_relevant) + 1))
    return float(dcg / idcg)


def _require_logs(logs) -> None:
    if not logs:
        raise InvalidConfig("metrics need at least one conversation log")


def success_at_k(logs: list[ConversationLog], k: int) -> float:
    """Fraction of conversations where some turn's top-k held a relevant item."""
    _require_logs(logs)
    wins = 0
    for log in logs:
        relevant = set(log.relevant_ids)
        if any(set(t.top_ids[:k]) & relevant for t in log.turns):
            wins += 1
    return wins / len(logs)


def recall_at_k(logs: list[ConversationLog], k: int) -> float:
    """Mean final-turn recall of the relevant set."""
    _require_logs(logs)
    total = 0.0
    for log in logs:
        relevant = set(log.relevant_ids)
        if relevant:
            total += len(set(log.final_top_ids[:k]) & relevant) / len(relevant)
    return total / len(logs)


def mean_ndcg_at_k(logs: list[ConversationLog], k: int) -> float:
    _require_logs(logs)
    total = 0.0
    for log in logs:
        relevance = {i: 1 for i in log.relevant_ids}
        total += ndcg_at_k(list(log.final_top_ids), relevance, k)
    return total / len(logs)


def avg_turns(logs: list[ConversationLog]) -> float:
    _require_logs(logs)
    return float(np.mean([log.turns_used for log in logs]))


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str = "Full"
    seeds: tuple[int, ...] = (0,)
    n_users: int = 100
    n_items: int = 300
    vocab_size: int = 16
    k: int = 10
    patience: int = 15
    accept_threshold: float = 0.6
    disclosure_rate: float = 0.5
    tau1: float = 0.45
    tau2: float = 0.62

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}; pick one of {VARIANTS}")
        if self.n_users < 1:
            raise InvalidConfig("n_users must be >= 1")
        if not self.seeds:
            raise InvalidConfig("need at least one seed")

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            lexicon=synthetic_lexicon(self.vocab_size),
            top_k=self.k,
            tau1=self.tau1,
            tau2=self.tau2,
        )


@dataclass(frozen=True)
class MetricsReport:
    variant: str
    k: int
    seeds: tuple[int, ...]
    n_conversations: int
    success_at_k: float
    recall_at_k: float
    ndcg_at_k: float
    avg_turns: float
    per_seed: dict[str, list[float]]
    config_fingerprint: str
    success_definition: str = SUCCESS_DEFINITION

    def to_json(self) -> str:
        payload = asdict(self)
        payload["seeds"] = list(self.seeds)
        payload["metrics"] = {
            "success_at_k": self.success_at_k,
            "recall_at_k": self.recall_at_k,
            "ndcg_at_k": self.ndcg_at_k,
            "avg_turns": self.avg_turns,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def build_engine(variant: str, config: EngineConfig, catalog: Catalog, seed: int) -> Engine:
    if variant == "Full":
        return Engine(config, catalog, net_seed=seed)
    if variant == "FixedUniformWeights":
        return Engine(config, catalog, net_seed=seed, adaptive=False)
    if variant == "NoRefineRound":
        return Engine(config, catalog, net_seed=seed, refine=False)
    if variant == "Tier2Only":
        return Engine(config, catalog, net_seed=seed, forced_tier=Tier.REASONING)
    raise InvalidConfig(f"unknown variant {variant!r}")


def run_conversation(
    engine: Engine, user: SimUser, catalog: Catalog, k: int, seed: int, user_index: int
) -> ConversationLog:
    sim = UserSimulator(user, catalog)
    session = engine.new_session(context=user.context())
    affinities = catalog_affinities(user.true_preferences, catalog)
    relevant = tuple(
        sorted(it.item_id for it, a in zip(catalog.items, affinities)
               if a >= user.accept_threshold)
    )
    records: list[TurnRecord] = []
    text: str | None = sim.opening_utterance()
    feedback = EMPTY_FEEDBACK
    outcome = "Abandoned"
    turns_used = user.patience
    for turn in range(user.patience):
        result = engine.process_turn(session, text, feedback)
        sim_turn = sim.simulate_turn(result.ranked, k)
        records.append(
            TurnRecord(
                text=text,
                tier=result.decision.tier.value,
                cache_hit=result.decision.cache_hit,
                work_units=result.work_units,
                weights=tuple(float(v) for v in result.weights.w),
                top_ids=tuple(it.item_id for it in result.ranked.top(k)),
                reward=result.reward.total if result.reward is not None else None,
                liked=sim_turn.feedback.liked_items,
                clicked=sim_turn.feedback.clicks,
            )
        )
        if sim_turn.accepted_item is not None:
            outcome = "Success"
            turns_used = turn + 1
            # deliver the accepting like through the engine (the coordinator's
            # reward loop only sees feedback attached to a message)
            engine.process_turn(session, "perfect thanks", sim_turn.feedback)
            break
        text, feedback = sim_turn.utterance, sim_turn.feedback
    return ConversationLog(
        seed=seed,
        user_index=user_index,
        outcome=outcome,
        turns_used=turns_used,
        relevant_ids=relevant,
        turns=tuple(records),
    )


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> MetricsReport:
    """Run every (seed, user) conversation and aggregate the metrics report."""
    engine_cfg = config.engine_config()
    per_seed: dict[str, list[float]] = {
        "success_at_k": [], "recall_at_k": [], "ndcg_at_k": [], "avg_turns": [],
    }
    all_logs: list[ConversationLog] = []
    for seed in config.seeds:
        catalog, users = generate_world(
            seed, config.vocab_size, config.n_items, config.n_users,
            accept_threshold=config.accept_threshold,
            patience=config.patience,
            disclosure_rate=config.disclosure_rate,
        )
        engine = build_engine(config.variant, engine_cfg, catalog, seed)
        logs = [
            run_conversation(engine, user, catalog, config.k, seed, idx)
            for idx, user in enumerate(users)
        ]
        per_seed["success_at_k"].append(success_at_k(logs, config.k))
        per_seed["recall_at_k"].append(recall_at_k(logs, config.k))
        per_seed["ndcg_at_k"].append(mean_ndcg_at_k(logs, config.k))
        per_seed["avg_turns"].append(avg_turns(logs))
        all_logs.extend(logs)

    fingerprint_payload = {
        "experiment": asdict(config),
        "engine": engine_cfg.fingerprint(),
    }
    import hashlib

    fingerprint = hashlib.sha256(
        json.dumps(fingerprint_payload, sort_keys=True, default=list).encode("utf-8")
    ).hexdigest()

    report = MetricsReport(
        variant=config.variant,
        k=config.k,
        seeds=config.seeds,
        n_conversations=len(all_logs),
        success_at_k=success_at_k(all_logs, config.k),
        recall_at_k=recall_at_k(all_logs, config.k),
        ndcg_at_k=mean_ndcg_at_k(all_logs, config.k),
        avg_turns=avg_turns(all_logs),
        per_seed=per_seed,
        config_fingerprint=fingerprint,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        with open(out / "conversations.jsonl", "w", encoding="utf-8") as fh:
            for log in all_logs:
                fh.write(json.dumps(asdict(log), sort_keys=True) + "\n")
    return report
