"""HTTP service for auto-labeling sessions.

A session wraps a frame source plus an annotation document.  One writer
at a time per session: either a human mutation or the single running
propagation job, whose per-frame results are appended as revisioned
writes so the UI can watch them arrive.  Corrections invalidate the
propagated annotations downstream of the corrected frame (marked stale;
excluded from export and replaced by the next propagation run).

Sessions persist under the data directory as JSON; no database.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .annodoc import Annotation, AnnotationDocument
from .autolabel import PropagationConfig, propagate_annotations
from .frameio import DecodeError, encode_png, list_frame_files, read_image
from .imgcore import Frame


class ServiceError(Exception):
    def __init__(self, status: int, reason: str):
        super().__init__(reason)
        self.status = status
        self.reason = reason


class Job:
    def __init__(self, job_id: str, frame_from: int, frame_to: int):
        self.id = job_id
        self.frame_from = frame_from
        self.frame_to = frame_to
        self.status = "running"
        self.halted_at: int | None = None
        self.reason: str | None = None
        self.frames_done = 0
        self.rng_seed = 0
        self.thread: threading.Thread | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "from": self.frame_from, "to": self.frame_to,
                "status": self.status, "halted_at": self.halted_at,
                "reason": self.reason, "frames_done": self.frames_done}


class Session:
    """Disk-backed annotation session with a single-writer discipline."""

    def __init__(self, session_id: str, root: Path, frame_files: list[Path]):
        self.id = session_id
        self.root = root
        self.frame_files = frame_files
        self.lock = threading.RLock()
        self.revision = 0
        # per frame: list of {"annotation": Annotation, "stale": bool}
        self.frames: dict[int, list[dict]] = {}
        self.diagnostics: list[dict] = []
        self.jobs: dict[str, Job] = {}
        self._job_counter = 0

    # -- persistence --------------------------------------------------

    def save(self) -> None:
        state = {
            "revision": self.revision,
            "frames": {
                str(idx): [{"annotation": e["annotation"].to_dict(),
                            "stale": e["stale"]} for e in entries]
                for idx, entries in self.frames.items()
            },
            "diagnostics": self.diagnostics,
        }
        (self.root / "state.json").write_text(
            json.dumps(state, sort_keys=True))

    @classmethod
    def load(cls, session_id: str, root: Path) -> "Session":
        manifest = json.loads((root / "manifest.json").read_text())
        files = [Path(p) for p in manifest["files"]]
        session = cls(session_id, root, files)
        state_path = root / "state.json"
        if state_path.exists():
            state = json.loads(state_path.read_text())
            session.revision = state["revision"]
            for key, entries in state["frames"].items():
                session.frames[int(key)] = [
                    {"annotation": Annotation.from_dict(e["annotation"]),
                     "stale": bool(e["stale"])} for e in entries]
            session.diagnostics = state.get("diagnostics", [])
        return session

    # -- reads ---------------------------------------------------------

    @property
    def frame_count(self) -> int:
        return len(self.frame_files)

    def info(self) -> dict:
        with self.lock:
            return {
                "id": self.id,
                "frame_count": self.frame_count,
                "revision": self.revision,
                "frames": [
                    {"index": idx,
                     "annotations": [
                         {**e["annotation"].to_dict(), "stale": e["stale"]}
                         for e in self.frames[idx]]}
                    for idx in sorted(self.frames)
                ],
                "diagnostics": self.diagnostics,
                "jobs": [j.to_dict() for j in self.jobs.values()],
            }

    def export(self) -> AnnotationDocument:
        with self.lock:
            doc = AnnotationDocument()
            for idx in sorted(self.frames):
                fresh = [e["annotation"] for e in self.frames[idx]
                         if not e["stale"]]
                if fresh:
                    doc.set_frame(idx, fresh)
            doc.diagnostics = list(self.diagnostics)
            return doc

    def frame_png(self, index: int) -> bytes:
        self._check_index(index)
        try:
            return encode_png(read_image(self.frame_files[index]))
        except DecodeError as exc:
            raise ServiceError(500, f"frame {index} unreadable: {exc}")

    # -- mutations -----------------------------------------------------

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.frame_count:
            raise ServiceError(
                404, f"frame index {index} outside 0..{self.frame_count - 1}")

    def running_job(self) -> Job | None:
        return next((j for j in self.jobs.values() if j.status == "running"),
                    None)

    def set_annotations(self, index: int, annotations: list[dict],
                        source: str = "human") -> int:
        self._check_index(index)
        parsed = []
        for raw in annotations:
            try:
                ann = Annotation.from_dict({**raw, "source":
                                            raw.get("source", source)})
            except (KeyError, TypeError) as exc:
                raise ServiceError(400, f"malformed annotation: {exc}")
            except ValueError as exc:
                raise ServiceError(400, str(exc))
            parsed.append(ann)
        with self.lock:
            if self.running_job() is not None:
                raise ServiceError(
                    409, "a propagation job is running; session is read-only")
            self.frames[index] = [{"annotation": a, "stale": False}
                                  for a in parsed]
            # everything propagated downstream of this frame is now suspect
            for idx, entries in self.frames.items():
                if idx > index:
                    for e in entries:
                        if e["annotation"].source == "propagated":
                            e["stale"] = True
            self.revision += 1
            self.save()
            return self.revision

    def start_propagation(self, frame_from: int, frame_to: int,
                          seed: int = 0) -> Job:
        self._check_index(frame_from)
        self._check_index(frame_to)
        if frame_from >= frame_to:
            raise ServiceError(400, "'from' must be below 'to'")
        with self.lock:
            if self.running_job() is not None:
                raise ServiceError(409, "another propagation job is running")
            seeds = [e["annotation"] for e in self.frames.get(frame_from, [])
                     if not e["stale"]]
            if not seeds:
                raise ServiceError(
                    400, f"no usable seed annotations at frame {frame_from}")
            self._job_counter += 1
            job = Job(f"job-{self._job_counter}", frame_from, frame_to)
            job.rng_seed = seed
            self.jobs[job.id] = job
        thread = threading.Thread(
            target=self._run_propagation, args=(job, seeds), daemon=True)
        job.thread = thread
        thread.start()
        return job

    def _run_propagation(self, job: Job, seeds: list[Annotation]) -> None:
        try:
            frames = []
            for idx in range(job.frame_from, job.frame_to + 1):
                frames.append(Frame(index=idx,
                                    pixels=read_image(self.frame_files[idx])))
        except DecodeError as exc:
            with self.lock:
                job.status = "halted"
                job.halted_at = job.frame_from
                job.reason = f"decode failure: {exc}"
            return

        def on_frame(index: int, annotations: list[Annotation], diag) -> None:
            with self.lock:
                if index != job.frame_from:
                    self.frames[index] = [{"annotation": a, "stale": False}
                                          for a in annotations]
                    self.revision += 1
                if diag is not None:
                    self.diagnostics.append(diag.to_dict())
                job.frames_done += 1
                self.save()

        try:
            # the chain position, not the absolute frame index, drives the
            # RANSAC draws, so a re-run from a correction reproduces a
            # fresh session started at that frame
            result = propagate_annotations(
                frames, seeds, PropagationConfig(seed=job.rng_seed), on_frame)
        except Exception as exc:  # defensive: job must always settle
            with self.lock:
                job.status = "halted"
                job.halted_at = job.frame_from
                job.reason = f"internal error: {exc}"
                self.save()
            return
        with self.lock:
            if result.completed:
                job.status = "completed"
            else:
                job.status = "halted"
                job.halted_at = result.halted_at
                job.reason = result.halt_reason
                if result.diagnostics:
                    last = result.diagnostics[-1].to_dict()
                    if last not in self.diagnostics:
                        self.diagnostics.append(last)
            self.save()


class SessionStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        for entry in self.data_dir.iterdir():
            if entry.is_dir() and (entry / "manifest.json").exists():
                session = Session.load(entry.name, entry)
                self.sessions[session.id] = session

    def create(self, frames_dir: str) -> Session:
        directory = Path(frames_dir)
        if not directory.is_dir():
            raise ServiceError(400, f"not a directory: {frames_dir}")
        files = list_frame_files(directory)
        if not files:
            raise ServiceError(400, f"no frames found in {frames_dir}")
        session_id = uuid.uuid4().hex[:12]
        root = self.data_dir / session_id
        root.mkdir()
        (root / "manifest.json").write_text(json.dumps(
            {"frames_dir": str(directory), "files": [str(f) for f in files]},
            sort_keys=True))
        session = Session(session_id, root, files)
        session.save()
        with self.lock:
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"no session {session_id}")
        return session


class CreateSessionBody(BaseModel):
    frames_dir: str


class AnnotationsBody(BaseModel):
    annotations: list[dict]


class PropagateBody(BaseModel):
    frame_from: int = Field(alias="from")
    to: int
    seed: int = 0

    model_config = {"populate_by_name": True}


def create_app(data_dir: Path, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="e2vts annotation service")
    store = SessionStore(Path(data_dir))
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"reason": exc.reason})

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody):
        session = store.create(body.frames_dir)
        return {"id": session.id, "frame_count": session.frame_count,
                "revision": session.revision}

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        return store.get(sid).info()

    @app.get("/api/sessions/{sid}/frames/{index}")
    def get_frame(sid: str, index: int):
        png = store.get(sid).frame_png(index)
        return Response(content=png, media_type="image/png")

    @app.put("/api/sessions/{sid}/frames/{index}/annotations")
    def put_annotations(sid: str, index: int, body: AnnotationsBody):
        revision = store.get(sid).set_annotations(index, body.annotations)
        return {"revision": revision}

    @app.post("/api/sessions/{sid}/propagate")
    def propagate(sid: str, body: PropagateBody):
        session = store.get(sid)
        job = session.start_propagation(body.frame_from, body.to,
                                        seed=body.seed)
        return {"job_id": job.id}

    @app.get("/api/sessions/{sid}/jobs/{jid}")
    def get_job(sid: str, jid: str):
        session = store.get(sid)
        job = session.jobs.get(jid)
        if job is None:
            raise ServiceError(404, f"no job {jid}")
        return job.to_dict()

    @app.get("/api/sessions/{sid}/export")
    def export(sid: str):
        return store.get(sid).export().to_dict()

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
