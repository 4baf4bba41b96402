"""HTTP/JSON API exposing the pipeline to scripts and the design UI.

All routes live under /v1.  validate/compile/simulate are pure and may run
concurrently; machine routes (jobs, jog) serialize through the single
controller session.  Job records are in-memory; instruction files written
to disk by clients are unaffected by restarts.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import pipeline
from .compensation import DomainError
from .instructions import (
    BEND,
    FEED,
    ROTATE,
    Instruction,
    InstructionError,
    graph_hash,
    parse_text,
)
from .machine import MachineProfile
from .protocol import Emulator, MachineController, ProtocolError, TransportError, open_channel
from .wiregraph import GraphError, graph_from_data

JOB_STATUSES = ("validated", "compiled", "simulated", "running", "done", "stopped", "failed")


class GraphBody(BaseModel):
    vertices: list[list[float]]
    edges: list[list[int]]


class ValidateRequest(BaseModel):
    graph: GraphBody


class CompileRequest(BaseModel):
    graph: GraphBody
    correct: bool = True


class SimulateRequest(BaseModel):
    text: str | None = None
    program: dict | None = None
    as_commanded: bool = False


class JobRequest(BaseModel):
    graph: GraphBody
    correct: bool = True


class StartRequest(BaseModel):
    address: str | None = None  # defaults to the service's machine session


class JogRequest(BaseModel):
    kind: str  # "F", "B" or "R"
    magnitude: float


@dataclass
class JobRecord:
    id: str
    graph_hash: str
    status: str = "validated"
    diagnostics: dict | None = None
    program_text: str | None = None
    program: dict | None = None
    simulation: dict | None = None
    run_report: dict | None = None
    error: str | None = None
    timestamps: dict[str, float] = field(default_factory=dict)

    def advance(self, status: str) -> None:
        if JOB_STATUSES.index(status) < JOB_STATUSES.index(self.status):
            raise ValueError(f"job status cannot move {self.status} -> {status}")
        self.status = status
        self.timestamps[status] = time.time()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "graph_hash": self.graph_hash,
            "status": self.status,
            "diagnostics": self.diagnostics,
            "program_text": self.program_text,
            "program": self.program,
            "simulation": self.simulation,
            "run_report": self.run_report,
            "error": self.error,
            "timestamps": self.timestamps,
        }


class MachineSession:
    """The single active connection to a machine (emulated by default)."""

    def __init__(self, profile: MachineProfile, address: str = "emulate:"):
        self.address = address
        self.profile = profile
        self.emulator: Emulator | None = None
        if address in ("emulate:", "emulate"):
            self.emulator = Emulator(profile)
            channel = self.emulator.start()
        else:
            channel = open_channel(address, profile)
        self.controller = MachineController(channel, profile)
        self.busy = threading.Lock()


class ServiceState:
    def __init__(self, profile: MachineProfile | None = None,
                 machine_address: str = "emulate:"):
        self.profile = profile or MachineProfile()
        self.machine_address = machine_address
        self.jobs: dict[str, JobRecord] = {}
        self.jobs_lock = threading.Lock()
        self._session: MachineSession | None = None
        self._session_lock = threading.Lock()

    def session(self) -> MachineSession:
        with self._session_lock:
            if self._session is None:
                self._session = MachineSession(self.profile, self.machine_address)
            return self._session

    def replace_profile(self, profile: MachineProfile) -> None:
        with self._session_lock:
            if self._session is not None and self._session.busy.locked():
                raise RuntimeError("cannot replace profile while a job is running")
            self.profile = profile
            self._session = None  # reconnect lazily with the new profile


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail={"error": str(exc)})


def create_app(profile: MachineProfile | None = None,
               machine_address: str = "emulate:") -> FastAPI:
    state = ServiceState(profile, machine_address)
    app = FastAPI(title="wirebend", version="0.1.0")
    app.state.wirebend = state

    def parse_graph(body: GraphBody):
        try:
            return graph_from_data(body.vertices, body.edges)
        except GraphError as exc:
            raise _bad_request(exc)

    @app.post("/v1/validate")
    def validate(req: ValidateRequest) -> dict:
        g = parse_graph(req.graph)
        return pipeline.validate_graph(g, state.profile).to_dict()

    @app.post("/v1/compile")
    def compile_(req: CompileRequest) -> dict:
        g = parse_graph(req.graph)
        try:
            program, text = pipeline.compile_graph(g, state.profile, correct=req.correct)
        except (GraphError, InstructionError, DomainError) as exc:
            raise _bad_request(exc)
        return {"text": text.decode("ascii"), "program": program.to_dict()}

    @app.post("/v1/simulate")
    def simulate_(req: SimulateRequest) -> dict:
        try:
            if req.text is not None:
                program = parse_text(req.text)
            elif req.program is not None:
                from .instructions import InstructionProgram
                program = InstructionProgram.from_dict(req.program)
            else:
                raise InstructionError("provide 'text' or 'program'")
            return pipeline.simulation_bundle(program, state.profile,
                                              as_commanded=req.as_commanded)
        except (InstructionError, DomainError) as exc:
            raise _bad_request(exc)

    @app.post("/v1/jobs")
    def create_job(req: JobRequest) -> dict:
        g = parse_graph(req.graph)
        job = JobRecord(id=uuid.uuid4().hex[:12], graph_hash=graph_hash(g))
        job.advance("validated")
        diagnostics = pipeline.validate_graph(g, state.profile)
        job.diagnostics = diagnostics.to_dict()
        if diagnostics.overall_fabricable:
            try:
                program, text = pipeline.compile_graph(g, state.profile, correct=req.correct)
                job.program_text = text.decode("ascii")
                job.program = program.to_dict()
                job.advance("compiled")
                job.simulation = pipeline.simulation_bundle(program, state.profile)
                job.advance("simulated")
            except (InstructionError, DomainError) as exc:
                job.error = str(exc)
                job.advance("failed")
        with state.jobs_lock:
            state.jobs[job.id] = job
        return job.to_dict()

    def get_job(job_id: str) -> JobRecord:
        with state.jobs_lock:
            job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail={"error": f"no job {job_id}"})
        return job

    @app.get("/v1/jobs/{job_id}")
    def read_job(job_id: str) -> dict:
        return get_job(job_id).to_dict()

    @app.post("/v1/jobs/{job_id}/start")
    def start_job(job_id: str, req: StartRequest | None = None) -> dict:
        job = get_job(job_id)
        if job.status != "simulated":
            raise HTTPException(status_code=409,
                                detail={"error": f"job is {job.status}, not startable"})
        session = state.session()
        if not session.busy.acquire(blocking=False):
            raise HTTPException(status_code=409, detail={"error": "machine busy"})
        program = parse_text(job.program_text or "")
        job.advance("running")

        def worker() -> None:
            try:
                report = session.controller.run_program(program)
                job.run_report = report.to_dict()
                job.advance(report.status if report.status in ("done", "stopped") else "failed")
                if report.status == "failed":
                    job.error = report.error
            except (TransportError, ProtocolError, ValueError) as exc:
                job.error = str(exc)
                job.advance("failed")
            finally:
                session.busy.release()

        threading.Thread(target=worker, daemon=True).start()
        return job.to_dict()

    @app.post("/v1/jobs/{job_id}/stop")
    def stop_job(job_id: str) -> dict:
        job = get_job(job_id)
        if job.status != "running":
            raise HTTPException(status_code=409,
                                detail={"error": f"job is {job.status}, not running"})
        state.session().controller.stop()
        return {"id": job.id, "stop_requested": True}

    @app.post("/v1/machine/jog")
    def jog(req: JogRequest) -> dict:
        if req.kind not in (FEED, BEND, ROTATE):
            raise _bad_request(ValueError(f"unknown jog kind {req.kind!r}"))
        session = state.session()
        if not session.busy.acquire(blocking=False):
            raise HTTPException(status_code=409, detail={"error": "machine busy"})
        try:
            if req.kind == BEND and not session.controller.homed:
                session.controller.home()
            events = session.controller.jog(Instruction(req.kind, req.magnitude))
            return {"ok": True, "events": events,
                    "session_log": [
                        {"kind": i.kind, "magnitude": i.magnitude}
                        for i in session.controller.session_log
                    ]}
        except (InstructionError, ProtocolError, TransportError, ValueError) as exc:
            raise _bad_request(exc)
        finally:
            session.busy.release()

    @app.get("/v1/profile")
    def read_profile() -> dict:
        return state.profile.to_dict()

    @app.put("/v1/profile")
    def write_profile(body: dict[str, Any]) -> dict:
        try:
            profile = MachineProfile.from_dict(body)
            state.replace_profile(profile)
        except (TypeError, ValueError, RuntimeError) as exc:
            raise _bad_request(exc)
        return state.profile.to_dict()

    return app
