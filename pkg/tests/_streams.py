"""Synthetic non-stationary reward stream for coordinator adaptation tests.

One agent reliably scores the ground-truth item on top; the identity of that
agent switches mid-stream. The coordinator must shift its weights to keep the
fused top-1 on the true item.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from convrec.coordinator import (
    Coordinator,
    CoordinatorFeatures,
    WeightNet,
    Weights,
    fuse_partial,
    turn_reward,
)
from convrec.preferences import FeedbackSignal
from convrec.ranking import AGENT_ORDER
from convrec.util import rng_stream

STATE_DIM = 34  # conversation features (32) + coverage + complexity
PERF_WINDOW = 5
INPUT_DIM = STATE_DIM + 4 * PERF_WINDOW


@dataclass
class StreamResult:
    cumulative_reward: float
    weight_trajectory: np.ndarray  # (n_turns, 4)
    reward_trajectory: np.ndarray


def run_switching_stream(
    seed: int,
    adaptive: bool,
    n_turns: int = 200,
    switch_at: int = 50,
    n_items: int = 10,
    k: int = 1,
    pre_agent: int = 1,
    post_agent: int = 2,
    learning_rate: float = 0.05,
) -> StreamResult:
    rng = rng_stream(seed, "switch-stream")
    net = WeightNet.random(INPUT_DIM, 16, rng_stream(seed, "switch-net"))
    coord = Coordinator(net, perf_window=PERF_WINDOW,
                        learning_rate=learning_rate, adaptive=adaptive)
    state = np.full(STATE_DIM, 0.1)
    item_ids = [f"i{j}" for j in range(n_items)]

    weight_rows = np.zeros((n_turns, 4))
    rewards = np.zeros(n_turns)
    for t in range(n_turns):
        reliable = pre_agent if t < switch_at else post_agent
        true_item = int(rng.integers(0, n_items))
        weighted = {}
        features = CoordinatorFeatures(state, coord.perf_history())
        weights = coord.weights_for(features) if adaptive else Weights.uniform()
        for j, agent in enumerate(AGENT_ORDER):
            scores = rng.uniform(0.0, 1.0, n_items)
            if j == reliable:
                scores[true_item] = 2.0  # tops the normalized scale
            weighted[agent] = (float(weights.w[j]), scores)
        ranked = fuse_partial(weighted, item_ids)
        tr = turn_reward(ranked, FeedbackSignal(liked_items=(item_ids[true_item],)), k)
        coord.observe(features, weights, tr)
        weight_rows[t] = weights.w
        rewards[t] = tr.total
    return StreamResult(float(rewards.sum()), weight_rows, rewards)
