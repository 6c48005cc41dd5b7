"""Three-tier request routing.

A scalar complexity score (conversation length, profile incompleteness,
intent ambiguity) routes each turn to the rapid / reasoning / deep
collaboration tier. Thresholds are calibrated against a reference query mix
so the routed fractions land on the 70/25/5 target split, and rapid-tier
responses are served from a shared LRU cache.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .conversation import ConversationState, tokenize
from .coordinator import RankedList
from .errors import InvalidConfig
from .preferences import PreferenceProfile, profile_coverage
from .util import fnv1a64, rng_stream

DEFAULT_BETAS = (1 / 3, 1 / 3, 1 / 3)
TARGET_SPLIT = (0.70, 0.25, 0.05)


class Tier(str, Enum):
    RAPID = "Rapid"
    REASONING = "Reasoning"
    DEEP_COLLAB = "DeepCollab"

    @property
    def depth(self) -> int:
        return {"Rapid": 1, "Reasoning": 2, "DeepCollab": 3}[self.value]


@dataclass(frozen=True)
class ComplexityScore:
    value: float
    components: tuple[float, float, float]  # (history length, incompleteness, ambiguity)


@dataclass(frozen=True)
class TierDecision:
    tier: Tier
    score: ComplexityScore
    cache_hit: bool = False

    def __post_init__(self) -> None:
        if self.cache_hit and self.tier is not Tier.RAPID:
            raise InvalidConfig("cache hits can only occur in the rapid tier")


def complexity_score(
    conv: ConversationState,
    profile: PreferenceProfile,
    betas: tuple[float, float, float] = DEFAULT_BETAS,
    turn_saturation: int = 20,
) -> ComplexityScore:
    """Convex combination of saturated turn count, 1 - coverage, and
    normalized intent entropy."""
    c1 = min(conv.turn_index / turn_saturation, 1.0)
    c2 = 1.0 - profile_coverage(profile)
    c3 = conv.intent.normalized_entropy()
    value = betas[0] * c1 + betas[1] * c2 + betas[2] * c3
    return ComplexityScore(value=float(value), components=(float(c1), float(c2), float(c3)))


def route(score: ComplexityScore, thresholds: tuple[float, float]) -> TierDecision:
    """Boundary values go to the higher tier."""
    tau1, tau2 = thresholds
    if not 0.0 <= tau1 < tau2 <= 1.0:
        raise InvalidConfig(f"need 0 <= tau1 < tau2 <= 1, got ({tau1}, {tau2})")
    if score.value < tau1:
        tier = Tier.RAPID
    elif score.value < tau2:
        tier = Tier.REASONING
    else:
        tier = Tier.DEEP_COLLAB
    return TierDecision(tier=tier, score=score)


def calibrate_thresholds(
    sample: list[float] | np.ndarray,
    targets: tuple[float, float, float] = TARGET_SPLIT,
) -> tuple[float, float]:
    """Empirical percentile thresholds hitting the target tier split.

    With the boundary-to-higher-tier rule, the threshold for cumulative mass p
    is the sorted sample's floor(p*N)-th entry (0-based), so exactly p of a
    distinct-valued sample routes below it.
    """
    values = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(values)
    if n < 100:
        raise InvalidConfig(f"calibration needs >= 100 samples, got {n}")
    if abs(sum(targets) - 1.0) > 1e-9:
        raise InvalidConfig("calibration targets must sum to 1")
    p1 = targets[0]
    p2 = targets[0] + targets[1]
    tau1 = float(values[min(int(math.floor(p1 * n)), n - 1)])
    tau2 = float(values[min(int(math.floor(p2 * n)), n - 1)])
    if not tau1 < tau2:
        raise InvalidConfig(
            f"degenerate calibration sample: tau1 == tau2 == {tau1} "
            "(not enough distinct complexity values)"
        )
    return tau1, tau2


def routed_fractions(
    sample: list[float] | np.ndarray, thresholds: tuple[float, float]
) -> tuple[float, float, float]:
    values = np.asarray(sample, dtype=np.float64)
    n = len(values)
    rapid = float((values < thresholds[0]).sum()) / n
    deep = float((values >= thresholds[1]).sum()) / n
    return rapid, 1.0 - rapid - deep, deep


class ResponseCache:
    """Bounded LRU cache of rapid-tier rankings, shared across sessions.

    Entries remember the profile coverage at insertion time and are dropped
    when the querying session's coverage has drifted past the threshold.
    """

    def __init__(self, capacity: int = 1024, coverage_drift: float = 0.1) -> None:
        if capacity < 1:
            raise InvalidConfig("cache capacity must be >= 1")
        self.capacity = capacity
        self.coverage_drift = coverage_drift
        self._entries: OrderedDict[int, tuple[RankedList, float]] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def get(self, signature: int, coverage: float) -> RankedList | None:
        with self._lock:
            entry = self._entries.get(signature)
            if entry is None:
                self.misses += 1
                return None
            ranked, inserted_coverage = entry
            if abs(coverage - inserted_coverage) > self.coverage_drift:
                del self._entries[signature]
                self.misses += 1
                return None
            self._entries.move_to_end(signature)
            self.hits += 1
            return ranked

    def put(self, signature: int, ranked: RankedList, coverage: float) -> None:
        with self._lock:
            self._entries[signature] = (ranked, coverage)
            self._entries.move_to_end(signature)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0


def cache_signature(text: str, profile: PreferenceProfile) -> int:
    """Hash of the normalized utterance plus the top-3 profile attributes."""
    tokens = " ".join(tokenize(text))
    top3 = np.argsort(-profile.weights, kind="stable")[:3]
    return fnv1a64(f"{tokens}|{','.join(str(int(i)) for i in top3)}".encode("utf-8"))


@dataclass(frozen=True)
class QueryDescriptor:
    """One synthetic routing query: the three complexity inputs."""

    turn_index: int
    coverage: float
    ambiguity: float

    def complexity(
        self,
        betas: tuple[float, float, float] = DEFAULT_BETAS,
        turn_saturation: int = 20,
    ) -> float:
        c1 = min(self.turn_index / turn_saturation, 1.0)
        return betas[0] * c1 + betas[1] * (1.0 - self.coverage) + betas[2] * self.ambiguity


def generate_query_mix(seed: int, n: int) -> list[QueryDescriptor]:
    """Reference query mix for threshold calibration.

    Mimics a production request blend: mostly short, well-covered, pointed
    queries with a long tail of long ambiguous ones.
    """
    rng = rng_stream(seed, "query-mix")
    out: list[QueryDescriptor] = []
    for _ in range(n):
        kind = rng.random()
        if kind < 0.6:  # routine follow-ups
            turn = int(rng.integers(2, 12))
            coverage = rng.uniform(0.5, 1.0)
            ambiguity = rng.uniform(0.0, 0.4)
        elif kind < 0.9:  # mid-conversation exploration
            turn = int(rng.integers(0, 8))
            coverage = rng.uniform(0.2, 0.7)
            ambiguity = rng.uniform(0.3, 0.8)
        else:  # cold-start or rambling queries
            turn = int(rng.integers(0, 4))
            coverage = rng.uniform(0.0, 0.3)
            ambiguity = rng.uniform(0.6, 1.0)
        out.append(QueryDescriptor(turn, float(coverage), float(ambiguity)))
    return out


def save_query_mix(descriptors: list[QueryDescriptor], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# query mix: turn_index coverage ambiguity\n")
        for d in descriptors:
            fh.write(f"{d.turn_index} {d.coverage!r} {d.ambiguity!r}\n")


def load_query_mix(path) -> list[QueryDescriptor]:
    out: list[QueryDescriptor] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            turn, coverage, ambiguity = line.split()
            out.append(QueryDescriptor(int(turn), float(coverage), float(ambiguity)))
    return out
