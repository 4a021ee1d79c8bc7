"""HTTP facade binding the engine to the annotation frontend.

Versioned endpoints under ``/v1``: session bootstrap, task serving with
ranked suggestions (recommender arm) or full-text taxonomy search (search
arm), decision recording, annotation submission, dataset export and the
analysis report. Every session walks the identical requirement sequence;
treatment is fixed per session; durations are measured here, from first
task open to submission, never client-supplied.

Feedback events from concurrent sessions serialize through the history
store's single-writer contract; per-session task state is only touched by
that session's requests.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .analysis import AnalysisError, JudgmentRecord, build_report
from .annotation_store import (
    AnnotationError,
    AnnotationRecord,
    AnnotationStore,
    Association,
    Requirement,
    export_dataset,
)
from .embeddings import EmbeddingStore
from .recommender import (
    FeedbackEvent,
    HistoryStore,
    PersistenceError,
    RecommenderConfig,
    Suggestion,
    record_feedback,
    suggest,
)
from .taxonomy import NounIndex, Taxonomy, TaxonomyError, search_taxonomy
from .textproc import AnalyzerConfig


@dataclass
class SessionState:
    token: str
    participant: str
    treatment: Literal["ccr", "search"]
    task_index: int = 0
    open_ts: Optional[float] = None
    decided: set[tuple[str, str]] = field(default_factory=set)
    accepted: list[dict] = field(default_factory=list)


class ServiceEngine:
    """Owns the stores and implements the session/task workflow."""

    def __init__(
        self,
        taxonomy: Taxonomy,
        index: NounIndex,
        requirements: list[Requirement],
        embeddings: Optional[EmbeddingStore] = None,
        history: Optional[HistoryStore] = None,
        annotations: Optional[AnnotationStore] = None,
        config: RecommenderConfig = RecommenderConfig(),
        analyzer: AnalyzerConfig = AnalyzerConfig(),
        judgments: Optional[list[JudgmentRecord]] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.taxonomy = taxonomy
        self.index = index
        self.requirements = list(requirements)
        self.embeddings = embeddings
        self.history = history if history is not None else HistoryStore()
        self.annotations = (
            annotations if annotations is not None else AnnotationStore(requirements)
        )
        self.config = config
        self.analyzer = analyzer
        self.judgments = judgments
        self.clock = clock
        self.sessions: dict[str, SessionState] = {}

    # -- sessions ---------------------------------------------------------

    def open_session(
        self, participant: str, treatment: Optional[str] = None
    ) -> SessionState:
        for session in self.sessions.values():
            if session.participant == participant:
                return session
        if treatment is None:
            counts = {"ccr": 0, "search": 0}
            for session in self.sessions.values():
                counts[session.treatment] += 1
            # Balance groups; a tie goes to the recommender arm.
            treatment = "ccr" if counts["ccr"] <= counts["search"] else "search"
        if treatment not in ("ccr", "search"):
            raise ValueError(f"unknown treatment {treatment!r}")
        session = SessionState(token=uuid.uuid4().hex, participant=participant, treatment=treatment)
        self.sessions[session.token] = session
        return session

    def session(self, token: Optional[str]) -> SessionState:
        if token is None or token not in self.sessions:
            raise HTTPException(status_code=401, detail="invalid session token")
        return self.sessions[token]

    # -- task flow --------------------------------------------------------

    def current_requirement(self, session: SessionState) -> Optional[Requirement]:
        if session.task_index >= len(self.requirements):
            return None
        return self.requirements[session.task_index]

    def live_suggestions(self, session: SessionState) -> list[Suggestion]:
        requirement = self.current_requirement(session)
        if requirement is None:
            return []
        ranked = suggest(
            requirement,
            self.index,
            self.embeddings,
            self.history,
            self.config,
            analyzer=self.analyzer,
        )
        return [
            s for s in ranked if (s.occurrence.stem, s.code) not in session.decided
        ]

    def suggestion_payload(self, suggestions: list[Suggestion]) -> list[dict]:
        payload = []
        for s in suggestions:
            obj = self.taxonomy.get(s.code)
            payload.append(
                {
                    "stem": s.occurrence.stem,
                    "surface": s.occurrence.surface,
                    "start": s.occurrence.start,
                    "end": s.occurrence.end,
                    "source": s.occurrence.source,
                    "code": s.code,
                    "label": obj.label,
                    "description": obj.description,
                    "confidence": s.confidence,
                    "predictors": {
                        "exact": s.p_exact,
                        "similarity": s.p_similarity,
                        "history": s.p_history,
                    },
                    "proxy": s.proxy,
                }
            )
        return payload

    def task_payload(self, session: SessionState) -> dict:
        requirement = self.current_requirement(session)
        total = len(self.requirements)
        if requirement is None:
            return {"done": True, "completed": session.task_index, "total": total}
        if session.open_ts is None:
            session.open_ts = self.clock()
        body: dict = {
            "done": False,
            "treatment": session.treatment,
            "requirement": {
                "id": requirement.id,
                "text": requirement.text,
                "index": session.task_index,
                "total": total,
            },
            "accepted": list(session.accepted),
        }
        if session.treatment == "ccr":
            body["suggestions"] = self.suggestion_payload(self.live_suggestions(session))
        return body


class SessionRequest(BaseModel):
    participant: str
    treatment: Optional[Literal["ccr", "search"]] = None


class DecisionRequest(BaseModel):
    stem: str
    code: str
    action: Literal["accept", "reject"]


class AssociationIn(BaseModel):
    term: str
    code: str


class AnnotationRequest(BaseModel):
    requirement_id: str
    conf_correct: int
    conf_complete: int
    associations: list[AssociationIn] = []
    duration_override_s: Optional[float] = None


def create_app(engine: ServiceEngine) -> FastAPI:
    app = FastAPI(title="tracerec service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/v1/session")
    def open_session(body: SessionRequest):
        try:
            session = engine.open_session(body.participant, body.treatment)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "token": session.token,
            "participant": session.participant,
            "treatment": session.treatment,
            "total_tasks": len(engine.requirements),
            "completed": session.task_index,
        }

    @app.get("/v1/task")
    def get_task(x_session_token: Optional[str] = Header(default=None)):
        session = engine.session(x_session_token)
        return engine.task_payload(session)

    @app.post("/v1/decision")
    def post_decision(
        body: DecisionRequest,
        x_session_token: Optional[str] = Header(default=None),
    ):
        session = engine.session(x_session_token)
        if session.treatment != "ccr":
            raise HTTPException(status_code=403, detail="decisions require a recommender session")
        requirement = engine.current_requirement(session)
        if requirement is None or session.open_ts is None:
            raise HTTPException(status_code=409, detail="no task is open")
        live = engine.live_suggestions(session)
        if (body.stem, body.code) not in {(s.occurrence.stem, s.code) for s in live}:
            raise HTTPException(status_code=404, detail="unknown suggestion for this task")
        event = FeedbackEvent(
            timestamp=engine.clock(),
            participant=session.participant,
            requirement_id=requirement.id,
            stem=body.stem,
            code=body.code,
            action=body.action,
        )
        try:
            record_feedback(engine.history, event)
        except PersistenceError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        session.decided.add((body.stem, body.code))
        if body.action == "accept":
            session.accepted.append({"stem": body.stem, "code": body.code})
        return {
            "accepted": list(session.accepted),
            "suggestions": engine.suggestion_payload(engine.live_suggestions(session)),
        }

    @app.post("/v1/annotation")
    def post_annotation(
        body: AnnotationRequest,
        x_session_token: Optional[str] = Header(default=None),
    ):
        session = engine.session(x_session_token)
        requirement = engine.current_requirement(session)
        if requirement is None or session.open_ts is None:
            raise HTTPException(status_code=409, detail="no task is open")
        if body.requirement_id != requirement.id:
            raise HTTPException(
                status_code=409,
                detail=f"open task is {requirement.id!r}, not {body.requirement_id!r}",
            )
        if body.duration_override_s is not None:
            duration = body.duration_override_s
        else:
            duration = max(0.0, engine.clock() - session.open_ts)
        try:
            record = AnnotationRecord(
                participant=session.participant,
                treatment=session.treatment,
                requirement_id=body.requirement_id,
                duration_s=duration,
                conf_correct=body.conf_correct,
                conf_complete=body.conf_complete,
                associations=tuple(
                    Association(a.term, a.code) for a in body.associations
                ),
            )
            engine.annotations.append_record(record)
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session.task_index += 1
        session.open_ts = None
        session.decided = set()
        session.accepted = []
        total = len(engine.requirements)
        return {
            "ok": True,
            "completed": session.task_index,
            "total": total,
            "done": session.task_index >= total,
        }

    @app.get("/v1/search")
    def get_search(
        q: str = Query(default=""),
        limit: int = Query(default=20, ge=1),
        x_session_token: Optional[str] = Header(default=None),
    ):
        engine.session(x_session_token)
        try:
            results = search_taxonomy(engine.taxonomy, q, limit)
        except TaxonomyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "results": [
                {
                    "code": code,
                    "score": score,
                    "label": engine.taxonomy.get(code).label,
                    "description": engine.taxonomy.get(code).description,
                }
                for code, score in results
            ]
        }

    @app.get("/v1/report")
    def get_report():
        try:
            return build_report(engine.annotations.records, engine.judgments)
        except AnalysisError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/v1/export", response_class=PlainTextResponse)
    def get_export(group: str = Query(default="all")):
        try:
            return export_dataset(engine.annotations, group)
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/v1/history")
    def get_history():
        pairs = [
            {"stem": stem, "code": code, "accepts": a, "rejects": r}
            for (stem, code), (a, r) in engine.history.pairs()
        ]
        pairs.sort(key=lambda p: (p["stem"], p["code"]))
        return {"pairs": pairs}

    return app
