"""HTTP facade: format transformation, analyses, slicing, and sampling as
asynchronous jobs, a synchronous propagation endpoint, and the collaboration
relay behind a websocket.

Configuration comes from the environment:
  FMKIT_BIND (default 127.0.0.1), FMKIT_PORT (8000), FMKIT_WORKERS (cpu count),
  FMKIT_ENUM_BOUND (24), FMKIT_JOB_STORE_SIZE (1024),
  FMKIT_MODEL_SIZE_LIMIT (bytes, 16 MiB).
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import collab
from .analysis import AnalysisError, Configuration, analyze, count_solutions, propagate
from .formats import FormatKind, ParseError, UnsupportedDirection, parse, serialize
from .formula import render
from .model import validate
from .sampling import Canceled, SamplingError, coverage, sample_twise
from .slicing import SliceError, slice_model

OPERATIONS = {"TRANSFORM", "ANALYZE", "PROPAGATE", "SLICE", "SAMPLE", "COUNT"}

_FORMAT_ALIASES = {
    "uvl": FormatKind.UVL,
    "xml": FormatKind.FIDE_XML,
    "fide_xml": FormatKind.FIDE_XML,
    "dimacs": FormatKind.DIMACS,
    "svg": FormatKind.SVG,
}


@dataclass
class ServiceConfig:
    bind: str = "127.0.0.1"
    port: int = 8000
    workers: int = max(os.cpu_count() or 1, 2)
    enumeration_bound: int = 24
    job_store_size: int = 1024
    model_size_limit: int = 16 * 1024 * 1024

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        return cls(
            bind=os.environ.get("FMKIT_BIND", "127.0.0.1"),
            port=int(os.environ.get("FMKIT_PORT", "8000")),
            workers=int(os.environ.get("FMKIT_WORKERS", str(max(os.cpu_count() or 1, 2)))),
            enumeration_bound=int(os.environ.get("FMKIT_ENUM_BOUND", "24")),
            job_store_size=int(os.environ.get("FMKIT_JOB_STORE_SIZE", "1024")),
            model_size_limit=int(os.environ.get("FMKIT_MODEL_SIZE_LIMIT", str(16 * 1024 * 1024))),
        )


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, diagnostics=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.diagnostics = diagnostics or []

    def response(self) -> JSONResponse:
        body = {"code": self.code, "message": self.message}
        if self.diagnostics:
            body["diagnostics"] = [d.to_json() for d in self.diagnostics]
        return JSONResponse(status_code=self.status, content=body)


@dataclass
class Job:
    id: str
    operation: str
    request: dict
    status: str = "PENDING"  # PENDING | RUNNING | DONE | FAILED
    submitted_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    result: Any = None
    error: dict | None = None
    cancel_event: threading.Event = field(default_factory=threading.Event)

    def to_json(self) -> dict:
        body = {
            "jobId": self.id,
            "operation": self.operation,
            "status": self.status,
            "submittedAt": self.submitted_at,
            "finishedAt": self.finished_at,
        }
        if self.status == "DONE":
            body["result"] = self.result
        if self.status == "FAILED":
            body["error"] = self.error
        return body


def _format_kind(name: str) -> FormatKind:
    kind = _FORMAT_ALIASES.get((name or "").lower())
    if kind is None:
        raise ApiError(400, "unknown-format", f"unknown format kind {name!r}")
    return kind


def _parse_model(model_spec: dict, size_limit: int):
    text = model_spec.get("text")
    if not isinstance(text, str):
        raise ApiError(400, "missing-model", "model.text must be a string")
    if len(text.encode("utf-8", "replace")) > size_limit:
        raise ApiError(413, "model-too-large", f"model text exceeds {size_limit} bytes")
    kind = _format_kind(model_spec.get("format", "uvl"))
    if kind in (FormatKind.DIMACS, FormatKind.SVG):
        raise ApiError(400, "unsupported-direction", f"{kind.value} is export-only")
    try:
        model = parse(text, kind)
    except ParseError as exc:
        raise ApiError(400, "parse-error", str(exc), exc.diagnostics) from exc
    violations = validate(model)
    if violations:
        raise ApiError(400, "invalid-model", "; ".join(v.message for v in violations))
    return model


def _run_propagate(model, params: dict) -> dict:
    config = Configuration.from_decisions(
        select=params.get("select") or [], deselect=params.get("deselect") or []
    )
    return propagate(model, config).to_json()


def execute_operation(operation: str, request: dict, config: ServiceConfig, cancel_check) -> Any:
    params = request.get("params") or {}
    model = _parse_model(request.get("model") or {}, config.model_size_limit)
    if operation == "TRANSFORM":
        target = _format_kind(params.get("to", ""))
        try:
            return {"format": target.value, "text": serialize(model, target)}
        except UnsupportedDirection as exc:
            raise ApiError(400, "unsupported-direction", str(exc)) from exc
    if operation == "ANALYZE":
        return analyze(model).to_json()
    if operation == "PROPAGATE":
        return _run_propagate(model, params)
    if operation == "SLICE":
        try:
            result = slice_model(model, set(params.get("remove") or []))
        except SliceError as exc:
            raise ApiError(400, "slice-error", str(exc)) from exc
        return {
            "model": {"format": "uvl", "text": serialize(result.model, FormatKind.UVL)},
            "derivedConstraints": [render(f) for f in result.derived_constraints],
        }
    if operation == "SAMPLE":
        t = int(params.get("t", 2))
        seed = int(params.get("seed", 0))
        try:
            sample = sample_twise(model, t, seed=seed, should_cancel=cancel_check)
            covered, total, ratio = coverage(model, sample, t)
        except SamplingError as exc:
            raise ApiError(400, "sampling-error", str(exc)) from exc
        return {
            "t": t,
            "seed": seed,
            "configurations": [
                sorted(name for name, v in cfg.items() if v) for cfg in sample.configurations
            ],
            "coverage": {"covered": covered, "validTotal": total, "ratio": ratio},
        }
    if operation == "COUNT":
        bound = int(params.get("bound", config.enumeration_bound))
        try:
            return {"count": count_solutions(model, bound=bound)}
        except AnalysisError as exc:
            raise ApiError(400, "enumeration-bound", str(exc)) from exc
    raise ApiError(400, "unknown-operation", f"unknown operation {operation!r}")


class JobStore:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.jobs: OrderedDict[str, Job] = OrderedDict()
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=config.workers)

    def submit(self, operation: str, request: dict) -> Job:
        job = Job(id=uuid.uuid4().hex, operation=operation, request=request)
        with self.lock:
            self.jobs[job.id] = job
            while len(self.jobs) > self.config.job_store_size:
                self.jobs.popitem(last=False)
        self.executor.submit(self._run, job)
        return job

    def get(self, job_id: str) -> Job:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise ApiError(404, "unknown-job", f"unknown job id {job_id!r}")
        return job

    def cancel(self, job_id: str) -> Job:
        job = self.get(job_id)
        with self.lock:
            job.cancel_event.set()
            if job.status == "PENDING":
                job.status = "FAILED"
                job.error = {"code": "canceled", "message": "job canceled before start"}
                job.finished_at = time.time()
        return job

    def _run(self, job: Job):
        with self.lock:
            if job.status != "PENDING":
                return
            job.status = "RUNNING"
        try:
            result = execute_operation(
                job.operation, job.request, self.config, job.cancel_event.is_set
            )
            with self.lock:
                job.status = "DONE"
                job.result = result
        except Canceled:
            with self.lock:
                job.status = "FAILED"
                job.error = {"code": "canceled", "message": "job canceled"}
        except ApiError as exc:
            with self.lock:
                job.status = "FAILED"
                job.error = {"code": exc.code, "message": exc.message}
        except Exception as exc:  # keep the worker pool alive
            with self.lock:
                job.status = "FAILED"
                job.error = {"code": "internal-error", "message": str(exc)}
        finally:
            job.finished_at = time.time()

    def shutdown(self):
        self.executor.shutdown(wait=False, cancel_futures=True)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="feature-model toolbox service")
    store = JobStore(config)
    relay = collab.Relay()
    relay_lock = threading.Lock()
    sockets: dict[str, dict[str, WebSocket]] = {}
    app.state.job_store = store
    app.state.relay = relay

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return exc.response()

    @app.get("/healthz")
    async def healthz():
        return JSONResponse(content="ok")

    @app.post("/jobs", status_code=202)
    async def submit_job(request: Request):
        body = await _json_body(request)
        operation = body.get("operation")
        if operation not in OPERATIONS:
            raise ApiError(400, "unknown-operation", f"unknown operation {operation!r}")
        model_text = ((body.get("model") or {}).get("text")) or ""
        if len(model_text.encode("utf-8", "replace")) > config.model_size_limit:
            raise ApiError(413, "model-too-large", f"model text exceeds {config.model_size_limit} bytes")
        _format_kind((body.get("model") or {}).get("format", "uvl"))
        job = store.submit(operation, body)
        return {"jobId": job.id}

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        return store.get(job_id).to_json()

    @app.post("/jobs/{job_id}/cancel")
    async def cancel_job(job_id: str):
        return store.cancel(job_id).to_json()

    @app.post("/propagate")
    async def propagate_sync(request: Request):
        body = await _json_body(request)
        model = _parse_model(body.get("model") or {}, config.model_size_limit)
        return _run_propagate(model, body.get("params") or {})

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await _json_body(request)
        model = _parse_model(body.get("model") or {}, config.model_size_limit)
        host_name = body.get("hostName") or "Host"
        with relay_lock:
            state, link = relay.host_session(model, host_name)
        return {"sessionId": state.session_id, "shareLink": link, "hostName": host_name}

    async def _deliver(session_id: str, outbound):
        for pid, message in outbound:
            ws = sockets.get(session_id, {}).get(pid)
            if ws is not None:
                await ws.send_json(message)

    @app.websocket("/sessions/{session_id}/socket")
    async def session_socket(ws: WebSocket, session_id: str):
        await ws.accept()
        if session_id not in relay.sessions:
            await ws.send_json(collab.envelope("Reject", session_id, reason="unknown session"))
            await ws.close(code=4004)
            return
        pid: str | None = None
        try:
            first = await ws.receive_json()
            if first.get("type") != "Join":
                await ws.send_json(
                    collab.envelope("Reject", session_id, reason="handshake requires Join")
                )
                await ws.close(code=4000)
                return
            name = (first.get("payload") or {}).get("name") or "Guest"
            with relay_lock:
                state = relay.sessions.get(session_id)
                # the host slot is reserved at session creation; the first
                # socket presenting the host name binds to it
                if (
                    state is not None
                    and name in state.participants.values()
                    and state.participants[state.host] == name
                    and state.host not in sockets.get(session_id, {})
                ):
                    pid = state.host
                    outbound = [
                        (
                            pid,
                            collab.envelope(
                                "Welcome",
                                session_id,
                                seq=state.seq,
                                participantId=pid,
                                model=collab.canonical(state.model),
                                history=collab.history_to_json(state.history),
                                participants=dict(state.participants),
                                editor=state.editor,
                                shareLink=collab.share_link_of(session_id),
                                **collab.constraint_id_fields(state.model),
                            ),
                        )
                    ]
                else:
                    pid, outbound = relay.join(session_id, name)
            if pid is None:
                await ws.send_json(outbound[0][1])
                await ws.close(code=4004)
                return
            sockets.setdefault(session_id, {})[pid] = ws
            await _deliver(session_id, outbound)
            while True:
                message = await ws.receive_json()
                with relay_lock:
                    outbound = relay.handle(session_id, pid, message)
                await _deliver(session_id, outbound)
                if message.get("type") == "Leave":
                    break
        except WebSocketDisconnect:
            if pid is not None:
                with relay_lock:
                    outbound = relay.handle(session_id, pid, {"type": "Leave"})
                sockets.get(session_id, {}).pop(pid, None)
                await _deliver(session_id, outbound)
            return
        finally:
            sockets.get(session_id, {}).pop(pid, None)

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception as exc:
        raise ApiError(400, "invalid-json", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise ApiError(400, "invalid-json", "request body must be a JSON object")
    return body


def serve(config: ServiceConfig | None = None):
    import uvicorn

    config = config or ServiceConfig.from_env()
    uvicorn.run(create_app(config), host=config.bind, port=config.port)
