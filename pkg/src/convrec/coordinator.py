"""Adaptive coordinator.

Computes the 4-simplex agent weights from conversation state plus recent
per-agent performance, fuses normalized agent scores into the final ranking,
runs the bounded Tier-3 refinement pass, and learns the weight network online
from per-turn reward via a gradient-bandit update with an EMA baseline.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .conversation import ConversationState, PreferenceStatement
from .context import ContextSnapshot
from .errors import InvalidConfig, NumericError
from .preferences import FeedbackSignal, PreferenceProfile, score_candidates_pref
from .ranking import AGENT_ORDER, AgentId, AgentScores, score_candidates_rank
from .util import softmax

N_AGENTS = len(AGENT_ORDER)


@dataclass(frozen=True)
class CoordinatorFeatures:
    """Flattened input to the weight network.

    state_features = conversation features ++ [profile coverage, complexity];
    perf_history is a (window x 4) matrix of recent per-agent rewards,
    zero-padded until enough turns have elapsed, most recent row last.
    """

    state_features: np.ndarray
    perf_history: np.ndarray

    def __post_init__(self) -> None:
        sf = np.asarray(self.state_features, dtype=np.float64)
        ph = np.asarray(self.perf_history, dtype=np.float64)
        object.__setattr__(self, "state_features", sf)
        object.__setattr__(self, "perf_history", ph)
        if ph.ndim != 2 or ph.shape[1] != N_AGENTS:
            raise InvalidConfig(f"perf_history must be (k, {N_AGENTS}), got {ph.shape}")

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.state_features, self.perf_history.ravel()])

    @staticmethod
    def build(
        conv: ConversationState,
        coverage: float,
        complexity: float,
        perf_history: np.ndarray,
    ) -> "CoordinatorFeatures":
        state = np.concatenate([conv.features, [coverage, complexity]])
        return CoordinatorFeatures(state, perf_history)


@dataclass
class WeightNet:
    """Two-layer MLP (tanh hidden) mapping coordinator features to 4 logits."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_units(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def zeros(cls, input_dim: int, hidden_units: int = 16) -> "WeightNet":
        return cls(
            w1=np.zeros((input_dim, hidden_units)),
            b1=np.zeros(hidden_units),
            w2=np.zeros((hidden_units, N_AGENTS)),
            b2=np.zeros(N_AGENTS),
        )

    @classmethod
    def random(cls, input_dim: int, hidden_units: int, rng: np.random.Generator,
               scale: float = 0.1) -> "WeightNet":
        return cls(
            w1=rng.normal(0.0, scale, (input_dim, hidden_units)),
            b1=np.zeros(hidden_units),
            w2=rng.normal(0.0, scale, (hidden_units, N_AGENTS)),
            b2=np.zeros(N_AGENTS),
        )

    def copy(self) -> "WeightNet":
        return WeightNet(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def hidden(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x @ self.w1 + self.b1)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.hidden(x) @ self.w2 + self.b2

    def is_finite(self) -> bool:
        return all(
            np.isfinite(p).all() for p in (self.w1, self.b1, self.w2, self.b2)
        )


@dataclass(frozen=True)
class Weights:
    """Strict-interior distribution over the four agents, AGENT_ORDER-aligned."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.shape != (N_AGENTS,):
            raise InvalidConfig(f"expected {N_AGENTS} agent weights, got shape {w.shape}")
        if abs(float(w.sum()) - 1.0) > 1e-9 or (w <= 0).any() or (w >= 1).any():
            raise InvalidConfig("agent weights must be strictly inside (0,1) and sum to 1")

    @staticmethod
    def uniform() -> "Weights":
        return Weights(np.full(N_AGENTS, 1.0 / N_AGENTS))

    def of(self, agent: AgentId) -> float:
        return float(self.w[AGENT_ORDER.index(agent)])

    def as_dict(self) -> dict[str, float]:
        return {a.value: float(v) for a, v in zip(AGENT_ORDER, self.w)}


@dataclass(frozen=True)
class RankedItem:
    item_id: str
    fused_score: float
    contributions: np.ndarray  # weighted addends, AGENT_ORDER-aligned
    norm_scores: np.ndarray  # min-max normalized per-agent scores


@dataclass(frozen=True)
class RankedList:
    items: tuple[RankedItem, ...]

    def top(self, k: int) -> tuple[RankedItem, ...]:
        return self.items[:k]

    def item_ids(self) -> list[str]:
        return [it.item_id for it in self.items]

    def find(self, item_id: str) -> RankedItem | None:
        for it in self.items:
            if it.item_id == item_id:
                return it
        return None


def compute_weights(features: CoordinatorFeatures, net: WeightNet) -> Weights:
    """softmax(net(features)); raises NumericError on non-finite inputs."""
    x = features.flatten()
    if not np.isfinite(x).all():
        raise NumericError("coordinator features contain non-finite values")
    if not net.is_finite():
        raise NumericError("weight network parameters are non-finite")
    if len(x) != net.input_dim:
        raise InvalidConfig(f"feature length {len(x)} != net input {net.input_dim}")
    return Weights(softmax(net.forward(x)))


def minmax_normalize(scores: np.ndarray) -> np.ndarray:
    """Map scores to [0,1]; a constant vector maps to all 0.5."""
    lo = float(scores.min())
    hi = float(scores.max())
    if hi - lo == 0.0:
        return np.full_like(scores, 0.5)
    return (scores - lo) / (hi - lo)


def fuse_partial(
    weighted_agents: dict[AgentId, tuple[float, np.ndarray]],
    item_ids: list[str],
) -> RankedList:
    """Weighted sum of min-max normalized scores over any agent subset.

    Absent agents contribute a zero addend. Sorting is by descending fused
    score with ties broken by ascending item id.
    """
    n = len(item_ids)
    norm = np.zeros((N_AGENTS, n))
    weights_vec = np.zeros(N_AGENTS)
    for agent, (weight, scores) in weighted_agents.items():
        if len(scores) != n:
            raise InvalidConfig(
                f"{agent.value} score length {len(scores)} != {n} candidates"
            )
        j = AGENT_ORDER.index(agent)
        norm[j] = minmax_normalize(np.asarray(scores, dtype=np.float64))
        weights_vec[j] = weight
    contributions = weights_vec[:, None] * norm
    fused = contributions.sum(axis=0)
    # primary: fused descending; ties: item id ascending
    order = np.lexsort((np.asarray(item_ids, dtype=object), -fused))
    items = tuple(
        RankedItem(
            item_id=item_ids[i],
            fused_score=float(fused[i]),
            contributions=contributions[:, i].copy(),
            norm_scores=norm[:, i].copy(),
        )
        for i in order
    )
    return RankedList(items)


def fuse_scores(
    weights: Weights, agent_scores: list[AgentScores], item_ids: list[str]
) -> RankedList:
    """Consensus fusion over exactly the four agents."""
    seen = [s.agent_id for s in agent_scores]
    if sorted(seen, key=AGENT_ORDER.index) != list(AGENT_ORDER) or len(seen) != N_AGENTS:
        raise InvalidConfig(f"need each agent exactly once, got {[a.value for a in seen]}")
    lengths = {len(s.scores) for s in agent_scores}
    if len(lengths) != 1 or lengths.pop() != len(item_ids):
        raise InvalidConfig("agent score vectors must all match the candidate count")
    weighted = {s.agent_id: (weights.of(s.agent_id), s.scores) for s in agent_scores}
    return fuse_partial(weighted, item_ids)


def refine_round(
    outputs: list[AgentScores],
    candidates,
    profile: PreferenceProfile,
    ctx: ContextSnapshot,
    statements: tuple[PreferenceStatement, ...],
    *,
    eta_explicit: float = 0.3,
    rank_gains: tuple[float, float, float, float] = (2.0, 2.0, 0.5, 0.5),
) -> list[AgentScores]:
    """One bounded inter-agent refinement pass (Tier 3 only).

    The preference agent re-scores after transiently ingesting the
    conversation agent's fresh statements, the ranking agent re-scores with
    the refined profile, and the other two outputs pass through unchanged.
    """
    by_id = {s.agent_id: s for s in outputs}
    if not statements:
        return [by_id[a] for a in AGENT_ORDER if a in by_id]

    refined = profile.copy()
    bump = np.zeros(refined.vocab_size)
    for st in statements:
        bump[st.attribute_id] += st.polarity * st.strength
    refined.weights = np.clip(refined.weights + eta_explicit * bump, -1.0, 1.0)

    by_id[AgentId.PREF] = score_candidates_pref(refined, candidates)
    by_id[AgentId.RANK] = score_candidates_rank(candidates, refined, ctx, rank_gains)
    return [by_id[a] for a in AGENT_ORDER if a in by_id]


@dataclass(frozen=True)
class TurnReward:
    total: float
    per_agent: np.ndarray
    accepted_item: str | None
    credited_agent: int | None


def turn_reward(ranked: RankedList, feedback: FeedbackSignal, k: int) -> TurnReward:
    """Top-k acceptance reward.

    1 when any liked or clicked item appears in the top k, else 0. On success
    each agent is rewarded by its normalized score for the accepted item, and
    credit goes to the agent with the largest weighted contribution.
    """
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    accepted = set(feedback.liked_items) | set(feedback.clicks)
    for it in ranked.top(k):
        if it.item_id in accepted:
            credited = int(np.argmax(it.contributions))
            return TurnReward(1.0, it.norm_scores.copy(), it.item_id, credited)
    return TurnReward(0.0, np.zeros(N_AGENTS), None, None)


def net_gradients(
    net: WeightNet,
    x: np.ndarray,
    weights: np.ndarray,
    credited_agent: int,
    advantage: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Backprop of the gradient-bandit logit gradient through both layers.

    The logit gradient is advantage * (onehot(credited) - weights), which is
    the exact gradient of advantage * log softmax(logits)[credited].
    """
    g_logits = advantage * (np.eye(N_AGENTS)[credited_agent] - weights)
    h = net.hidden(x)
    g_b2 = g_logits
    g_w2 = np.outer(h, g_logits)
    g_h = net.w2 @ g_logits
    g_z1 = g_h * (1.0 - h * h)
    g_b1 = g_z1
    g_w1 = np.outer(x, g_z1)
    return g_w1, g_b1, g_w2, g_b2


def update_net(
    net: WeightNet,
    features: CoordinatorFeatures,
    weights: Weights,
    reward: float,
    baseline: float,
    credited_agent: int | None = None,
    *,
    learning_rate: float = 0.05,
) -> WeightNet:
    """One gradient-bandit ascent step on the weight network.

    Credit defaults to the argmax-weight agent (the zero-reward case).
    Raises NumericError and leaves the input net untouched if the gradients
    are non-finite.
    """
    if not 0.0 <= reward <= 1.0:
        raise InvalidConfig(f"reward must be in [0, 1], got {reward}")
    j_star = credited_agent if credited_agent is not None else int(np.argmax(weights.w))
    advantage = reward - baseline
    if advantage == 0.0:
        return net.copy()
    x = features.flatten()
    grads = net_gradients(net, x, weights.w, j_star, advantage)
    if not all(np.isfinite(g).all() for g in grads):
        raise NumericError("non-finite gradient; update skipped")
    g_w1, g_b1, g_w2, g_b2 = grads
    return WeightNet(
        w1=net.w1 + learning_rate * g_w1,
        b1=net.b1 + learning_rate * g_b1,
        w2=net.w2 + learning_rate * g_w2,
        b2=net.b2 + learning_rate * g_b2,
    )


WEIGHTNET_MAGIC = "WEIGHTNET"
WEIGHTNET_VERSION = 1


def save_weightnet(net: WeightNet, path) -> None:
    """Versioned flat text layout: magic+version, dims, then row-major blocks."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{WEIGHTNET_MAGIC} {WEIGHTNET_VERSION}\n")
        fh.write(f"{net.input_dim} {net.hidden_units} {N_AGENTS}\n")
        for block in (net.w1, net.b1, net.w2, net.b2):
            fh.write(" ".join(repr(float(v)) for v in block.ravel()) + "\n")


def load_weightnet(path) -> WeightNet:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if header != [WEIGHTNET_MAGIC, str(WEIGHTNET_VERSION)]:
            raise InvalidConfig(f"unrecognized weight file header: {header}")
        dims = fh.readline().split()
        in_dim, hidden, out = (int(d) for d in dims)
        if out != N_AGENTS:
            raise InvalidConfig(f"weight file has {out} outputs, expected {N_AGENTS}")
        blocks = []
        for shape in ((in_dim, hidden), (hidden,), (hidden, out), (out,)):
            row = np.array(fh.readline().split(), dtype=np.float64)
            expected = int(np.prod(shape))
            if row.size != expected:
                raise InvalidConfig(f"weight block size {row.size} != expected {expected}")
            blocks.append(row.reshape(shape))
    return WeightNet(*blocks)


class Coordinator:
    """Stateful wrapper: weight net, EMA reward baseline, performance window.

    Updates are serialized behind a lock; readers always see a consistent
    parameter snapshot.
    """

    def __init__(
        self,
        net: WeightNet,
        *,
        perf_window: int = 5,
        learning_rate: float = 0.05,
        baseline_decay: float = 0.95,
        adaptive: bool = True,
    ) -> None:
        self._net = net
        self.perf_window = perf_window
        self.learning_rate = learning_rate
        self.baseline_decay = baseline_decay
        self.adaptive = adaptive
        self.baseline = 0.0
        self._perf = np.zeros((perf_window, N_AGENTS))
        self._lock = threading.Lock()

    @property
    def net(self) -> WeightNet:
        with self._lock:
            return self._net

    def perf_history(self) -> np.ndarray:
        with self._lock:
            return self._perf.copy()

    def features_for(
        self, conv: ConversationState, coverage: float, complexity: float
    ) -> CoordinatorFeatures:
        return CoordinatorFeatures.build(conv, coverage, complexity, self.perf_history())

    def weights_for(self, features: CoordinatorFeatures) -> Weights:
        if not self.adaptive:
            return Weights.uniform()
        return compute_weights(features, self.net)

    def observe(self, features: CoordinatorFeatures, weights: Weights, tr: TurnReward) -> bool:
        """Apply one online update; returns False when skipped (non-finite)."""
        if not self.adaptive:
            return False
        with self._lock:
            try:
                self._net = update_net(
                    self._net,
                    features,
                    weights,
                    tr.total,
                    self.baseline,
                    tr.credited_agent,
                    learning_rate=self.learning_rate,
                )
                applied = True
            except NumericError:
                applied = False
            self.baseline = (
                self.baseline_decay * self.baseline + (1.0 - self.baseline_decay) * tr.total
            )
            self._perf = np.vstack([self._perf[1:], tr.per_agent])
            return applied
