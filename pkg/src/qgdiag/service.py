"""HTTP service: review queue, iteration control, taxonomy, diagnosis, and
an evaluation endpoint for the UI.

The state directory is the single source of truth; every mutation is
persisted to it before the response goes out. Iteration advancement is
exclusive via the state-directory lock (concurrent calls get 423).
"""
from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .config import EngineConfig
from .corpus import CorpusError, ErrorLabelSet, QGSample
from .evaluator import (
    EvaluationRequest,
    ParseError,
    PromptMode,
    build_prompt,
    default_criteria,
    evaluate,
)
from .identifier import decide_labels, predict_confidences, sample_confidence
from .refinement import (
    IterationState,
    ReviewError,
    ReviewStatus,
    StateLock,
    StateLockHeld,
    load_state,
    persist_iteration,
    resolve_review,
    run_iteration,
    save_queue,
    skip_review,
)
from .taxonomy import Dimension, taxonomy_records

__all__ = ["create_app", "run_server"]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


class ReviewSubmission(BaseModel):
    labels: List[str]
    reviewer: Optional[str] = None
    skip: bool = Field(default=False)


class EvaluateBody(BaseModel):
    passage: str
    answer: str = ""
    question: str
    dimension: str
    mode: str = "vanilla"


class DiagnoseBody(BaseModel):
    passage: str
    answer: str = ""
    question: str


def _queue_payload(state: Optional[IterationState]) -> List[dict]:
    if state is None:
        return []
    items = [
        item for item in state.review_queue if item.status is ReviewStatus.PENDING
    ]
    items.sort(key=lambda it: (-it.assessment.uncertainty, it.sample.id))
    return [
        {
            "sample_id": it.sample.id,
            "passage": it.sample.passage,
            "answer": it.sample.answer,
            "question": it.sample.question,
            "predicted": it.assessment.predicted.to_codes(),
            "confidences": list(it.assessment.confidences),
            "p_e": it.assessment.p_e,
            "p_v": it.assessment.p_v,
            "uncertainty": it.assessment.uncertainty,
            "inconsistency": it.assessment.inconsistency,
            "status": it.status.value,
        }
        for it in items
    ]


def create_app(config: EngineConfig) -> FastAPI:
    app = FastAPI(title="qgdiag service", version="0.1.0")
    state_dir = Path(config.state_dir)
    mutate_lock = threading.Lock()
    backend = config.make_backend()

    state: Optional[IterationState] = None
    try:
        state = load_state(state_dir)
    except (FileNotFoundError, CorpusError):
        state = None

    def require_state() -> IterationState:
        if state is None:
            raise LookupError(
                "state directory has no completed iterations; run `qgdiag train` first"
            )
        return state

    @app.exception_handler(LookupError)
    async def handle_lookup(request: Request, exc: LookupError):
        return _error(409, "state_not_initialized", str(exc))

    @app.get("/api/taxonomy")
    def get_taxonomy() -> dict:
        return {"errors": taxonomy_records(), "dimensions": [d.value for d in Dimension]}

    @app.get("/api/review/queue")
    def get_queue() -> dict:
        return {"items": _queue_payload(state)}

    @app.post("/api/review/{sample_id}")
    def post_review(sample_id: str, body: ReviewSubmission):
        current = require_state()
        with mutate_lock:
            try:
                if body.skip:
                    item = skip_review(
                        current, sample_id, reviewer=body.reviewer, timestamp=_now()
                    )
                else:
                    labels = ErrorLabelSet.from_codes(body.labels)
                    item = resolve_review(
                        current, sample_id, labels, reviewer=body.reviewer, timestamp=_now()
                    )
            except ReviewError as exc:
                status = 404 if exc.code == "unknown_item" else 409
                return _error(status, exc.code, str(exc))
            except CorpusError as exc:
                return _error(422, "invalid_labels", str(exc))
            # Durability before the response: the queue file is the ledger.
            save_queue(current.review_queue, state_dir / "queue.jsonl")
        return {
            "sample_id": item.sample.id,
            "status": item.status.value,
            "human_labels": item.human_labels.to_codes() if item.human_labels else None,
            "reviewer": item.reviewer,
            "timestamp": item.timestamp,
        }

    @app.get("/api/iterations")
    def get_iterations() -> dict:
        if state is None:
            return {"iterations": []}
        return {"iterations": [record.as_dict() for record in state.history]}

    @app.post("/api/iterations/advance")
    def post_advance():
        current = require_state()
        try:
            lock = StateLock(state_dir).acquire()
        except StateLockHeld as exc:
            return _error(423, "iteration_in_progress", str(exc))
        try:
            with mutate_lock:
                try:
                    record = run_iteration(current, config.refinement_config())
                except ValueError as exc:
                    return _error(409, "nothing_to_do", str(exc))
                persist_iteration(current, state_dir)
        finally:
            lock.release()
        return {"iteration": record.as_dict()}

    def _diagnose_sample(sample: QGSample) -> dict:
        current = require_state()
        assert current.ei_model is not None
        conf = predict_confidences(current.ei_model, sample)
        labels = decide_labels(conf, current.ei_model.decision_threshold)
        return {
            "sample_id": sample.id,
            "labels": labels.to_codes(),
            "confidences": [float(c) for c in conf],
            "p_e": sample_confidence(conf, labels),
        }

    @app.get("/api/diagnose")
    def get_diagnose(sample_id: str):
        current = require_state()
        for collection in (current.pool, [i.sample for i in current.training_set],
                           [i.sample for i in current.dev]):
            for sample in collection:
                if sample.id == sample_id:
                    return _diagnose_sample(sample)
        return _error(404, "unknown_sample", f"no sample with id {sample_id!r}")

    @app.post("/api/diagnose")
    def post_diagnose(body: DiagnoseBody):
        try:
            sample = QGSample(
                id="adhoc", passage=body.passage, answer=body.answer, question=body.question
            )
        except CorpusError as exc:
            return _error(422, "invalid_sample", str(exc))
        return _diagnose_sample(sample)

    @app.post("/api/evaluate")
    def post_evaluate(body: EvaluateBody):
        try:
            dimension = Dimension(body.dimension)
            mode = PromptMode(body.mode)
        except ValueError as exc:
            return _error(422, "invalid_request", str(exc))
        try:
            sample = QGSample(
                id="adhoc", passage=body.passage, answer=body.answer, question=body.question
            )
        except CorpusError as exc:
            return _error(422, "invalid_sample", str(exc))

        diagnosis = None
        diagnostics = None
        if mode is PromptMode.ERROR_AWARE:
            diagnosis = _diagnose_sample(sample)
            diagnostics = ErrorLabelSet.from_codes(diagnosis["labels"])
        request = EvaluationRequest(
            sample=sample,
            criteria=default_criteria(dimension),
            mode=mode,
            diagnostics=diagnostics,
        )
        prompt = build_prompt(request)
        try:
            result = evaluate(backend, request)
        except ParseError as exc:
            return JSONResponse(
                status_code=200,
                content={
                    "ok": False,
                    "error": {"code": "parse_failure", "message": str(exc)},
                    "prompt": prompt,
                    "diagnosed_errors": diagnosis["labels"] if diagnosis else None,
                    "mode": mode.value,
                    "dimension": dimension.value,
                },
            )
        return {
            "ok": True,
            "score": result.score,
            "reason": result.reason,
            "diagnosed_errors": diagnosis["labels"] if diagnosis else None,
            "prompt": prompt,
            "backend": result.backend_id,
            "mode": mode.value,
            "dimension": dimension.value,
        }

    frontend = Path(config.frontend_dir) if config.frontend_dir else None
    if frontend and frontend.is_dir():
        app.mount("/", StaticFiles(directory=frontend, html=True), name="ui")

    return app


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_server(config: EngineConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host="127.0.0.1", port=config.service_port)
