"""HTTP facade over the run functions.

Every endpoint is stateless: the full scenario travels in the request, the
artifacts come back as text keyed by file name, and the caller decides where
(or whether) to write them.  Validation problems surface as 422 responses
with the offending field path; anything the runner rejects becomes a 422 too.
"""

from __future__ import annotations

import dataclasses
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from . import __version__
from .config import ScenarioConfig
from .orbit import PRESETS
from .runner import (
    RunResult,
    run_baseline,
    run_cka,
    run_offline,
    run_online,
    run_topology,
)


class RunResponse(BaseModel):
    summary: dict
    files: dict[str, str]


class OfflineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ScenarioConfig


class OnlineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())
    config: ScenarioConfig
    model: dict | None = None


class BaselineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())
    config: ScenarioConfig
    policy: Literal["shortest-path", "q-routing", "ma-drl"]
    model: dict | None = None


class CkaRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    archive: dict
    archive_b: dict | None = None
    probe_seed: int = 4


class TopologyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ScenarioConfig
    t: float = 0.0


def _respond(result: RunResult) -> RunResponse:
    return RunResponse(summary=result.summary, files=result.files)


def _guarded(fn, *args, **kwargs) -> RunResponse:
    try:
        return _respond(fn(*args, **kwargs))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="leosim", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/presets")
    def presets() -> dict:
        return {
            name: dataclasses.asdict(spec) for name, spec in sorted(PRESETS.items())
        }

    @app.post("/runs/offline", response_model=RunResponse)
    def offline(req: OfflineRequest) -> RunResponse:
        return _guarded(run_offline, req.config)

    @app.post("/runs/online", response_model=RunResponse)
    def online(req: OnlineRequest) -> RunResponse:
        return _guarded(run_online, req.config, req.model)

    @app.post("/runs/baseline", response_model=RunResponse)
    def baseline(req: BaselineRequest) -> RunResponse:
        return _guarded(run_baseline, req.config, req.policy, req.model)

    @app.post("/analysis/cka", response_model=RunResponse)
    def cka(req: CkaRequest) -> RunResponse:
        return _guarded(run_cka, req.archive, req.archive_b, req.probe_seed)

    @app.post("/topology/snapshot", response_model=RunResponse)
    def topology(req: TopologyRequest) -> RunResponse:
        return _guarded(run_topology, req.config, req.t)

    return app
