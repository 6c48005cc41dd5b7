"""Engine configuration and lexicon loading.

Everything tunable lives in one INI-style file. The ``[attributes]`` section
maps lexicon terms to attribute ids, ``[intents]`` maps keywords to intent
labels, and ``[negation]`` lists the tokens that flip statement polarity.
Numeric sections (``[engine]``, ``[preferences]``, ``[ranking]``,
``[coordinator]``, ``[router]``, ``[service]``) override the defaults below.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import InvalidConfig

INTENT_LABELS = (
    "ProvidePreference",
    "RequestRecommendation",
    "GiveFeedback",
    "Clarify",
    "Chitchat",
)

# Contractions tokenize as ("don", "t"); keeping "t" here lets "don't like X"
# land a negation token inside the 2-token window before X.
DEFAULT_NEGATION_TOKENS = frozenset(
    {"not", "no", "never", "dont", "don", "doesnt", "didnt", "isnt", "wasnt",
     "cant", "wont", "without", "hate", "dislike", "t"}
)

DEFAULT_INTENT_KEYWORDS = {
    "recommend": "RequestRecommendation",
    "recommendation": "RequestRecommendation",
    "recommendations": "RequestRecommendation",
    "suggest": "RequestRecommendation",
    "suggestion": "RequestRecommendation",
    "show": "RequestRecommendation",
    "find": "RequestRecommendation",
    "play": "RequestRecommendation",
    "give": "RequestRecommendation",
    "something": "RequestRecommendation",
    "anything": "RequestRecommendation",
    "like": "ProvidePreference",
    "love": "ProvidePreference",
    "enjoy": "ProvidePreference",
    "prefer": "ProvidePreference",
    "into": "ProvidePreference",
    "favorite": "ProvidePreference",
    "favourite": "ProvidePreference",
    "fan": "ProvidePreference",
    "hate": "ProvidePreference",
    "dislike": "ProvidePreference",
    "adore": "ProvidePreference",
    "mood": "ProvidePreference",
    "thanks": "GiveFeedback",
    "thank": "GiveFeedback",
    "great": "GiveFeedback",
    "good": "GiveFeedback",
    "nice": "GiveFeedback",
    "perfect": "GiveFeedback",
    "awesome": "GiveFeedback",
    "bad": "GiveFeedback",
    "terrible": "GiveFeedback",
    "awful": "GiveFeedback",
    "wrong": "GiveFeedback",
    "meh": "GiveFeedback",
    "what": "Clarify",
    "why": "Clarify",
    "how": "Clarify",
    "which": "Clarify",
    "mean": "Clarify",
    "explain": "Clarify",
    "difference": "Clarify",
    "more": "Clarify",
    "hi": "Chitchat",
    "hello": "Chitchat",
    "hey": "Chitchat",
    "morning": "Chitchat",
    "evening": "Chitchat",
    "weather": "Chitchat",
    "today": "Chitchat",
    "cool": "Chitchat",
    "ok": "Chitchat",
    "okay": "Chitchat",
}

# Demo attribute vocabulary (music genres); the simulator builds its own.
DEFAULT_ATTRIBUTE_TERMS = {
    "jazz": 0,
    "rock": 1,
    "pop": 2,
    "classical": 3,
    "orchestral": 3,
    "hiphop": 4,
    "hip hop": 4,
    "rap": 4,
    "electronic": 5,
    "techno": 5,
    "blues": 6,
    "country": 7,
    "metal": 8,
    "folk": 9,
    "soul": 10,
    "funk": 10,
    "reggae": 11,
    "ambient": 12,
    "chill": 12,
    "latin": 13,
    "salsa": 13,
    "indie": 14,
    "punk": 15,
}


def _tokenize_term(term: str) -> tuple[str, ...]:
    # mirrors conversation.tokenize without importing it (avoids a cycle)
    out: list[str] = []
    cur: list[str] = []
    for ch in term.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return tuple(out)


@dataclass(frozen=True)
class Lexicon:
    """Attribute terms, intent keywords, and negation tokens."""

    attribute_terms: dict[str, int]
    intent_keywords: dict[str, str]
    negation_tokens: frozenset[str]
    vocab_size: int
    term_tokens: dict[tuple[str, ...], int] = field(default_factory=dict, compare=False)
    term_lengths: tuple[int, ...] = field(default=(), compare=False)

    @staticmethod
    def build(
        attribute_terms: dict[str, int],
        intent_keywords: dict[str, str] | None = None,
        negation_tokens: frozenset[str] | None = None,
        vocab_size: int | None = None,
    ) -> "Lexicon":
        if not attribute_terms:
            raise InvalidConfig("attribute lexicon must be non-empty")
        for label in set((intent_keywords or DEFAULT_INTENT_KEYWORDS).values()):
            if label not in INTENT_LABELS:
                raise InvalidConfig(f"unknown intent label {label!r}")
        max_id = max(attribute_terms.values())
        if min(attribute_terms.values()) < 0:
            raise InvalidConfig("attribute ids must be non-negative")
        size = vocab_size if vocab_size is not None else max_id + 1
        if size <= max_id:
            raise InvalidConfig(f"vocab_size {size} too small for attribute id {max_id}")
        term_tokens = {_tokenize_term(t): a for t, a in attribute_terms.items()}
        lengths = tuple(sorted({len(tt) for tt in term_tokens}, reverse=True))
        return Lexicon(
            attribute_terms=dict(attribute_terms),
            intent_keywords=dict(intent_keywords or DEFAULT_INTENT_KEYWORDS),
            negation_tokens=frozenset(negation_tokens or DEFAULT_NEGATION_TOKENS),
            vocab_size=size,
            term_tokens=term_tokens,
            term_lengths=lengths,
        )


def default_lexicon() -> Lexicon:
    return Lexicon.build(DEFAULT_ATTRIBUTE_TERMS, vocab_size=16)


def synthetic_lexicon(vocab_size: int) -> Lexicon:
    """Lexicon for generated worlds: attribute i is named ``attr{i}``."""
    if vocab_size < 1:
        raise InvalidConfig("vocab_size must be >= 1")
    return Lexicon.build({f"attr{i}": i for i in range(vocab_size)}, vocab_size=vocab_size)


@dataclass
class EngineConfig:
    """All engine knobs with desk-scale defaults."""

    feature_dim: int = 32
    top_k: int = 10
    intent_smoothing: float = 0.5
    # preference profile update
    decay: float = 0.9
    eta_explicit: float = 0.3
    eta_implicit: float = 0.1
    confidence_gain: float = 0.5
    dwell_saturation_ms: int = 30000
    # ranking agent factor gains (preference fit, context fit, popularity, novelty)
    rank_gains: tuple[float, float, float, float] = (2.0, 2.0, 0.5, 0.5)
    # coordinator weight network
    hidden_units: int = 16
    perf_window: int = 5
    learning_rate: float = 0.05
    baseline_decay: float = 0.95
    # tier router
    router_betas: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    tau1: float = 0.45
    tau2: float = 0.62
    cache_capacity: int = 1024
    cache_coverage_drift: float = 0.1
    turn_saturation: int = 20
    # service
    port: int = 8000
    catalog_path: str = ""
    journal_path: str = ""
    lexicon: Lexicon = field(default_factory=default_lexicon)

    def __post_init__(self) -> None:
        if self.feature_dim < 9:
            raise InvalidConfig("feature_dim must be >= 9 (needs at least one hash bucket)")
        if not (0 <= self.tau1 < self.tau2 <= 1):
            raise InvalidConfig(f"need 0 <= tau1 < tau2 <= 1, got ({self.tau1}, {self.tau2})")
        if abs(sum(self.router_betas) - 1.0) > 1e-9:
            raise InvalidConfig("router betas must sum to 1")
        if not (0 < self.decay <= 1):
            raise InvalidConfig("decay must be in (0, 1]")
        if self.cache_capacity < 1 or self.perf_window < 1 or self.hidden_units < 1:
            raise InvalidConfig("capacity, perf_window and hidden_units must be >= 1")

    @property
    def vocab_size(self) -> int:
        return self.lexicon.vocab_size

    def with_lexicon(self, lexicon: Lexicon) -> "EngineConfig":
        return replace(self, lexicon=lexicon)

    def fingerprint_payload(self) -> dict:
        payload = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "lexicon":
                payload[f.name] = {
                    "attributes": sorted(v.attribute_terms.items()),
                    "intents": sorted(v.intent_keywords.items()),
                    "negation": sorted(v.negation_tokens),
                    "vocab_size": v.vocab_size,
                }
            elif isinstance(v, tuple):
                payload[f.name] = list(v)
            else:
                payload[f.name] = v
        return payload

    def fingerprint(self) -> str:
        raw = json.dumps(self.fingerprint_payload(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(raw).hexdigest()


_FLOAT_KEYS = {
    "intent_smoothing", "decay", "eta_explicit", "eta_implicit", "confidence_gain",
    "learning_rate", "baseline_decay", "tau1", "tau2", "cache_coverage_drift",
}
_INT_KEYS = {
    "feature_dim", "top_k", "dwell_saturation_ms", "hidden_units", "perf_window",
    "cache_capacity", "turn_saturation", "port",
}
_STR_KEYS = {"catalog_path", "journal_path"}


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    p.optionxform = lambda s: s.strip().lower()
    return p


def load_config(path: str | Path) -> EngineConfig:
    """Load an EngineConfig from an INI file; missing keys keep defaults."""
    p = _parser()
    read = p.read(str(path))
    if not read:
        raise InvalidConfig(f"cannot read config file {path}")

    kwargs: dict = {}
    for section in ("engine", "preferences", "coordinator", "router", "service"):
        if not p.has_section(section):
            continue
        for key, raw in p.items(section):
            if key in _FLOAT_KEYS:
                kwargs[key] = float(raw)
            elif key in _INT_KEYS:
                kwargs[key] = int(raw)
            elif key in _STR_KEYS:
                kwargs[key] = raw.strip()
            elif section == "router" and key in ("beta1", "beta2", "beta3"):
                pass  # handled below
            elif section == "engine" and key == "vocab_size":
                pass  # handled with the lexicon below
            else:
                raise InvalidConfig(f"unknown config key [{section}] {key}")
    if p.has_section("router"):
        betas = [p.getfloat("router", f"beta{i}", fallback=1 / 3) for i in (1, 2, 3)]
        kwargs["router_betas"] = tuple(betas)
    if p.has_section("ranking"):
        gains = [
            p.getfloat("ranking", k, fallback=d)
            for k, d in (("gain_pref", 2.0), ("gain_ctx", 2.0), ("gain_pop", 0.5), ("gain_nov", 0.5))
        ]
        kwargs["rank_gains"] = tuple(gains)

    attrs = {}
    if p.has_section("attributes"):
        for term, raw in p.items("attributes"):
            attrs[term] = int(raw)
    intents = None
    if p.has_section("intents"):
        intents = {term: raw.strip() for term, raw in p.items("intents")}
    negation = None
    if p.has_section("negation"):
        negation = frozenset(
            t.strip() for t in p.get("negation", "tokens", fallback="").split(",") if t.strip()
        )
    vocab_size = None
    if p.has_option("engine", "vocab_size"):
        vocab_size = p.getint("engine", "vocab_size")

    if attrs:
        kwargs["lexicon"] = Lexicon.build(attrs, intents, negation, vocab_size)
    elif intents or negation:
        base = default_lexicon()
        kwargs["lexicon"] = Lexicon.build(
            base.attribute_terms, intents or base.intent_keywords,
            negation or base.negation_tokens, base.vocab_size,
        )
    return EngineConfig(**kwargs)


def write_thresholds(path: str | Path, tau1: float, tau2: float) -> None:
    """Rewrite tau1/tau2 inside the [router] section, preserving the rest."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    out: list[str] = []
    in_router = False
    seen = {"tau1": False, "tau2": False}
    values = {"tau1": tau1, "tau2": tau2}
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("["):
            if in_router:
                for key, done in seen.items():
                    if not done:
                        out.append(f"{key} = {values[key]!r}\n")
                        seen[key] = True
            in_router = stripped.lower() == "[router]"
        elif in_router:
            key = stripped.split("=", 1)[0].strip().lower() if "=" in stripped else ""
            if key in values:
                out.append(f"{key} = {values[key]!r}\n")
                seen[key] = True
                continue
        out.append(line)
    if not all(seen.values()):
        if not in_router and not any(l.strip().lower() == "[router]" for l in out):
            out.append("\n[router]\n")
        for key, done in seen.items():
            if not done:
                out.append(f"{key} = {values[key]!r}\n")
    path.write_text("".join(out), encoding="utf-8")
