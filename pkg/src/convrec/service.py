"""HTTP session service.

JSON-over-HTTP surface for live chat sessions: session creation (idempotent
per client token), per-turn messaging through the full engine pipeline, a
read-only state snapshot, health and counters endpoints. Sessions live in an
in-process store with per-session write locks and an optional append-only
journal for restart recovery.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator, model_validator

from .catalog import Catalog
from .config import EngineConfig
from .context import (
    ContextSnapshot,
    LocationTag,
    SocialSetting,
    TimeBucket,
    snapshot_context,
)
from .conversation import Role, Utterance
from .engine import Engine, EngineSession
from .errors import ConvRecError, InvalidUtterance, NotFound
from .preferences import FeedbackSignal


class ContextBody(BaseModel):
    time_bucket: TimeBucket = TimeBucket.EVENING
    location: LocationTag = LocationTag.HOME
    social: SocialSetting = SocialSetting.ALONE
    mood: float = Field(default=0.0, ge=-1.0, le=1.0)


class CreateSessionBody(BaseModel):
    catalog: str | None = None
    client_token: str | None = None
    context: ContextBody | None = None


class RatingBody(BaseModel):
    item_id: str
    value: float = Field(ge=0.0, le=1.0)


class FeedbackBody(BaseModel):
    liked_items: list[str] = Field(default_factory=list)
    disliked_items: list[str] = Field(default_factory=list)
    clicks: list[str] = Field(default_factory=list)
    dwell_ms: dict[str, int] = Field(default_factory=dict)
    rating: RatingBody | None = None

    @model_validator(mode="after")
    def _no_like_dislike_overlap(self):
        if set(self.liked_items) & set(self.disliked_items):
            raise ValueError("an item cannot be both liked and disliked")
        return self

    def to_signal(self) -> FeedbackSignal:
        liked = list(self.liked_items)
        disliked = list(self.disliked_items)
        # Ratings are explicit feedback; fold them into the like/dislike
        # channel so they reach the profile update.
        if self.rating is not None and self.rating.item_id not in liked + disliked:
            (liked if self.rating.value >= 0.5 else disliked).append(self.rating.item_id)
        return FeedbackSignal(
            liked_items=tuple(liked),
            disliked_items=tuple(disliked),
            clicks=tuple(self.clicks),
            dwell_ms=dict(self.dwell_ms),
            explicit_rating=(self.rating.item_id, self.rating.value) if self.rating else None,
        )


class MessageBody(BaseModel):
    text: str
    feedback: FeedbackBody | None = None

    @field_validator("text")
    @classmethod
    def _non_empty(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("text must be non-empty")
        return v


@dataclass
class SessionEntry:
    session: EngineSession
    catalog_name: str
    client_token: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-process session map with an optional append-only recovery journal."""

    def __init__(self, journal_path: str | Path | None = None) -> None:
        self._entries: dict[str, SessionEntry] = {}
        self._tokens: dict[str, str] = {}
        self._lock = threading.Lock()
        self._journal = Path(journal_path) if journal_path else None
        self._journal_lock = threading.Lock()

    def by_token(self, token: str) -> str | None:
        with self._lock:
            return self._tokens.get(token)

    def add(self, entry: SessionEntry) -> None:
        with self._lock:
            self._entries[entry.session.session_id] = entry
            if entry.client_token:
                self._tokens[entry.client_token] = entry.session.session_id

    def get(self, session_id: str) -> SessionEntry:
        with self._lock:
            entry = self._entries.get(session_id)
        if entry is None:
            raise NotFound(f"unknown session {session_id!r}")
        return entry

    def journal_write(self, entry: SessionEntry) -> None:
        if self._journal is None:
            return
        snap = snapshot_session(entry)
        with self._journal_lock:
            with open(self._journal, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(snap, sort_keys=True) + "\n")


def snapshot_session(entry: SessionEntry) -> dict:
    s = entry.session
    return {
        "session_id": s.session_id,
        "catalog": entry.catalog_name,
        "client_token": entry.client_token,
        "history": [
            {"text": u.text, "role": u.role.value, "turn_index": u.turn_index,
             "timestamp_ms": u.timestamp_ms}
            for u in s.history.utterances
        ],
        "profile": {
            "weights": [float(v) for v in s.profile.weights],
            "confidence": [float(v) for v in s.profile.confidence],
            "last_turn": s.profile.last_turn,
        },
        "context": {
            "time_bucket": s.context.time_bucket.value,
            "location": s.context.location_tag.value,
            "social": s.context.social_setting.value,
            "mood": s.context.mood,
        },
        "created_at_ms": s.created_at_ms,
        "last_active_ms": s.last_active_ms,
    }


def restore_sessions(journal_path: str | Path, engines: dict[str, Engine]) -> list[SessionEntry]:
    """Rebuild session entries from the journal (last snapshot per id wins)."""
    path = Path(journal_path)
    if not path.exists():
        return []
    latest: dict[str, dict] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        snap = json.loads(line)
        latest[snap["session_id"]] = snap
    entries: list[SessionEntry] = []
    for snap in latest.values():
        engine = engines.get(snap["catalog"])
        if engine is None:
            continue
        ctx = snapshot_context(
            TimeBucket(snap["context"]["time_bucket"]),
            LocationTag(snap["context"]["location"]),
            SocialSetting(snap["context"]["social"]),
            snap["context"]["mood"],
        )
        session = engine.new_session(context=ctx, session_id=snap["session_id"])
        session.created_at_ms = snap["created_at_ms"]
        session.last_active_ms = snap["last_active_ms"]
        for u in snap["history"]:
            session.history.append(
                Utterance(u["text"], Role(u["role"]), u["turn_index"], u["timestamp_ms"])
            )
        session.profile.weights = np.array(snap["profile"]["weights"], dtype=np.float64)
        session.profile.confidence = np.array(snap["profile"]["confidence"], dtype=np.float64)
        session.profile.last_turn = snap["profile"]["last_turn"]
        entries.append(
            SessionEntry(session=session, catalog_name=snap["catalog"],
                         client_token=snap.get("client_token"))
        )
    return entries


def default_context_now(now: float | None = None) -> ContextSnapshot:
    """Map wall-clock time onto a time bucket; engine core never does this."""
    hour = time.localtime(now if now is not None else time.time()).tm_hour
    if 5 <= hour < 12:
        bucket = TimeBucket.MORNING
    elif 12 <= hour < 17:
        bucket = TimeBucket.AFTERNOON
    elif 17 <= hour < 22:
        bucket = TimeBucket.EVENING
    else:
        bucket = TimeBucket.NIGHT
    return snapshot_context(bucket, LocationTag.OTHER, SocialSetting.ALONE, 0.0)


def _ranked_payload(engine: Engine, result) -> tuple[list[dict], dict[str, dict[str, float]]]:
    agents = ("Conv", "Pref", "Ctx", "Rank")
    ranked = []
    explanation: dict[str, dict[str, float]] = {}
    for it in result.ranked.top(engine.config.top_k):
        ranked.append(
            {
                "item_id": it.item_id,
                "name": engine.catalog.name_of(it.item_id),
                "score": float(it.fused_score),
            }
        )
        explanation[it.item_id] = {
            a: float(v) for a, v in zip(agents, it.contributions)
        }
    return ranked, explanation


def _tier_payload(decision) -> dict:
    return {
        "tier": decision.tier.value,
        "cache_hit": decision.cache_hit,
        "complexity": decision.score.value,
        "components": {
            "history_length": decision.score.components[0],
            "profile_incompleteness": decision.score.components[1],
            "ambiguity": decision.score.components[2],
        },
    }


def create_app(
    config: EngineConfig,
    catalogs: dict[str, Catalog],
    default_catalog: str,
    journal_path: str | Path | None = None,
    analyzer=None,
) -> FastAPI:
    """Build the app; `analyzer` swaps in an external utterance model."""
    if default_catalog not in catalogs:
        raise NotFound(f"default catalog {default_catalog!r} not loaded")
    engines = {name: Engine(config, cat, analyzer=analyzer) for name, cat in catalogs.items()}
    store = SessionStore(journal_path)
    if journal_path:
        for entry in restore_sessions(journal_path, engines):
            store.add(entry)

    app = FastAPI(title="convrec", version="0.1.0")

    @app.exception_handler(ConvRecError)
    async def _engine_error(_, exc: ConvRecError):
        status = 404 if isinstance(exc, NotFound) else 422 if isinstance(exc, InvalidUtterance) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        name = body.catalog or default_catalog
        engine = engines.get(name)
        if engine is None:
            raise NotFound(f"unknown catalog {name!r}")
        if body.client_token:
            existing = store.by_token(body.client_token)
            if existing is not None:
                return {"session_id": existing}
        ctx = (
            snapshot_context(body.context.time_bucket, body.context.location,
                             body.context.social, body.context.mood)
            if body.context is not None
            else default_context_now()
        )
        session = engine.new_session(context=ctx)
        entry = SessionEntry(session=session, catalog_name=name, client_token=body.client_token)
        store.add(entry)
        store.journal_write(entry)
        return {"session_id": session.session_id}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        entry = store.get(session_id)
        engine = engines[entry.catalog_name]
        feedback = body.feedback.to_signal() if body.feedback else None
        with entry.lock:
            result = engine.process_turn(
                entry.session, body.text, feedback, timestamp_ms=int(time.time() * 1000)
            )
            store.journal_write(entry)
        ranked, explanation = _ranked_payload(engine, result)
        return {
            "session_id": session_id,
            "turn_index": result.turn_index,
            "ranked": ranked,
            "weights": result.weights.as_dict(),
            "tier": _tier_payload(result.decision),
            "explanation": explanation,
            "work_units": result.work_units,
        }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        entry = store.get(session_id)
        engine = engines[entry.catalog_name]
        s = entry.session
        from .preferences import profile_coverage

        return {
            "session_id": session_id,
            "turn_index": s.turn_index,
            "profile": {
                "weights": [float(v) for v in s.profile.weights],
                "confidence": [float(v) for v in s.profile.confidence],
                "coverage": profile_coverage(s.profile),
            },
            "weights": s.last_weights.as_dict() if s.last_weights is not None else None,
            "last_tier": _tier_payload(s.last_decision) if s.last_decision is not None else None,
            "coordinator_baseline": engine.coordinator.baseline,
        }

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/metrics")
    def metrics():
        totals = {"requests_total": 0, "cache_hits": 0, "cache_misses": 0}
        tiers: dict[str, int] = {}
        for engine in engines.values():
            m = engine.metrics()
            totals["requests_total"] += m["requests_total"]
            totals["cache_hits"] += m["cache_hits"]
            totals["cache_misses"] += m["cache_misses"]
            for tier, count in m["tier_counts"].items():
                tiers[tier] = tiers.get(tier, 0) + count
        lookups = totals["cache_hits"] + totals["cache_misses"]
        return {
            **totals,
            "tier_counts": tiers,
            "cache_hit_rate": totals["cache_hits"] / lookups if lookups else 0.0,
        }

    return app
