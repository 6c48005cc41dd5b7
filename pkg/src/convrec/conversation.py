"""Conversation tracking agent.

Tokenizes utterances, classifies intent against a keyword table, extracts
explicit preference statements with a negation window, and assembles the
fixed-dimension conversation feature vector consumed by the coordinator.
All functions here are pure and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .config import INTENT_LABELS, Lexicon
from .errors import InvalidUtterance, StateDesync
from .util import fnv1a64

NEGATION_WINDOW = 2
_META_SLOTS = 3  # normalized turn index, statement density, mean polarity

# Adapter seam for plugging an external model: given the utterance text,
# produce the intent distribution and explicit preference statements. The
# rule-based implementation below is the default; nothing here ever calls
# out over the network.
UtteranceAnalyzer = Callable[[str], tuple["IntentDistribution", tuple["PreferenceStatement", ...]]]


class Role(str, Enum):
    USER = "User"
    SYSTEM = "System"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    out: list[str] = []
    cur: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


@dataclass(frozen=True)
class Utterance:
    text: str
    role: Role
    turn_index: int
    timestamp_ms: int = 0

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise InvalidUtterance("utterance text is empty")
        if self.turn_index < 0:
            raise InvalidUtterance(f"negative turn index {self.turn_index}")


@dataclass
class ConversationHistory:
    """Append-only utterance log ordered by turn index."""

    session_id: str
    utterances: list[Utterance] = field(default_factory=list)

    def append(self, utt: Utterance) -> None:
        if self.utterances and utt.turn_index <= self.utterances[-1].turn_index:
            raise StateDesync(
                f"turn index {utt.turn_index} not increasing "
                f"(last was {self.utterances[-1].turn_index})"
            )
        self.utterances.append(utt)

    def __len__(self) -> int:
        return len(self.utterances)


@dataclass(frozen=True)
class IntentDistribution:
    """Probabilities over the five intent labels, in INTENT_LABELS order."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=np.float64)
        object.__setattr__(self, "probabilities", p)
        if p.shape != (len(INTENT_LABELS),):
            raise ValueError(f"expected {len(INTENT_LABELS)} probabilities, got {p.shape}")
        if abs(float(p.sum()) - 1.0) > 1e-9 or (p < 0).any():
            raise ValueError("intent probabilities must be a distribution")

    def as_dict(self) -> dict[str, float]:
        return {label: float(v) for label, v in zip(INTENT_LABELS, self.probabilities)}

    @property
    def argmax_label(self) -> str:
        return INTENT_LABELS[int(np.argmax(self.probabilities))]

    def normalized_entropy(self) -> float:
        """Shannon entropy divided by ln(#labels); 1.0 for the uniform case."""
        p = self.probabilities[self.probabilities > 0]
        return float(-(p * np.log(p)).sum() / math.log(len(INTENT_LABELS)))


@dataclass(frozen=True)
class PreferenceStatement:
    attribute_id: int
    polarity: float
    strength: float


@dataclass(frozen=True)
class ConversationState:
    intent: IntentDistribution
    statements: tuple[PreferenceStatement, ...]
    turn_index: int
    features: np.ndarray


def classify_intent(text: str, lexicon: Lexicon, smoothing: float = 0.5) -> IntentDistribution:
    """Keyword-count intent scoring with additive smoothing."""
    tokens = tokenize(text)
    if not tokens:
        raise InvalidUtterance("cannot classify empty utterance")
    hits = np.zeros(len(INTENT_LABELS), dtype=np.float64)
    index = {label: i for i, label in enumerate(INTENT_LABELS)}
    for tok in tokens:
        label = lexicon.intent_keywords.get(tok)
        if label is not None:
            hits[index[label]] += 1.0
    probs = (hits + smoothing) / (hits.sum() + smoothing * len(INTENT_LABELS))
    return IntentDistribution(probs)


def find_term_matches(tokens: list[str], lexicon: Lexicon) -> list[tuple[int, int]]:
    """(start index, attribute id) pairs for every lexicon term occurrence."""
    matches: list[tuple[int, int]] = []
    n = len(tokens)
    for i in range(n):
        for length in lexicon.term_lengths:
            if i + length > n:
                continue
            attr = lexicon.term_tokens.get(tuple(tokens[i : i + length]))
            if attr is not None:
                matches.append((i, attr))
                break  # longest match wins at this position
    return matches


def extract_preferences(text: str, lexicon: Lexicon) -> list[PreferenceStatement]:
    """One statement per matched attribute term.

    Polarity is -1 when a negation token sits within the preceding
    NEGATION_WINDOW tokens, +1 otherwise; explicit matches carry strength 1.
    """
    tokens = tokenize(text)
    statements: list[PreferenceStatement] = []
    for start, attr in find_term_matches(tokens, lexicon):
        window = tokens[max(0, start - NEGATION_WINDOW) : start]
        polarity = -1.0 if any(t in lexicon.negation_tokens for t in window) else 1.0
        statements.append(PreferenceStatement(attr, polarity, 1.0))
    return statements


def rule_based_analyzer(lexicon: Lexicon, smoothing: float = 0.5) -> UtteranceAnalyzer:
    """Default deterministic analyzer over the keyword tables."""

    def analyze(text: str):
        return classify_intent(text, lexicon, smoothing), tuple(extract_preferences(text, lexicon))

    return analyze


def _hashed_bag(tokens: list[str], buckets: int) -> np.ndarray:
    vec = np.zeros(buckets, dtype=np.float64)
    for tok in tokens:
        vec[fnv1a64(tok.encode("utf-8")) % buckets] += 1.0
    norm = float(np.linalg.norm(vec))
    if norm > 0:
        vec /= norm
    return vec


def encode_state(
    utterance: Utterance,
    history: ConversationHistory,
    lexicon: Lexicon,
    feature_dim: int = 32,
    turn_saturation: int = 20,
    smoothing: float = 0.5,
    analyzer: UtteranceAnalyzer | None = None,
) -> ConversationState:
    """Build the per-turn conversation state and its feature vector.

    Layout: intent probabilities (5) ++ L2-normalized hashed bag of tokens
    (feature_dim - 8) ++ [normalized turn index, history statements per turn,
    mean polarity of all statements so far]. A custom analyzer replaces the
    rule-based intent/statement extraction when supplied.
    """
    if utterance.turn_index != len(history.utterances):
        raise StateDesync(
            f"utterance turn {utterance.turn_index} != history length {len(history.utterances)}"
        )
    analyze = analyzer if analyzer is not None else rule_based_analyzer(lexicon, smoothing)
    intent, current = analyze(utterance.text)

    past: list[PreferenceStatement] = []
    user_turns = 0
    for past_utt in history.utterances:
        if past_utt.role is Role.USER:
            user_turns += 1
            past.extend(analyze(past_utt.text)[1])

    buckets = feature_dim - len(INTENT_LABELS) - _META_SLOTS
    bag = _hashed_bag(tokenize(utterance.text), buckets)
    turn_norm = min(utterance.turn_index / turn_saturation, 1.0)
    stmt_density = len(past) / max(1, user_turns)
    all_polarities = [s.polarity for s in past + list(current)]
    mean_polarity = float(np.mean(all_polarities)) if all_polarities else 0.0

    features = np.concatenate(
        [intent.probabilities, bag, [turn_norm, stmt_density, mean_polarity]]
    )
    return ConversationState(
        intent=intent,
        statements=tuple(current),
        turn_index=utterance.turn_index,
        features=features,
    )


def score_candidates_conv(text: str, candidates, lexicon: Lexicon):
    """Conversation agent's candidate scores: lexical overlap with item attributes.

    Each attribute term present in the utterance adds that attribute's value
    from the candidate's attribute vector; items sharing no matched attribute
    score zero.
    """
    from .context import attribute_matrix
    from .ranking import AgentId, AgentScores

    matched = {attr for _, attr in find_term_matches(tokenize(text), lexicon)}
    scores = np.zeros(len(candidates), dtype=np.float64)
    if matched and len(candidates):
        scores = attribute_matrix(candidates)[:, sorted(matched)].sum(axis=1)
    return AgentScores(AgentId.CONV, scores)
