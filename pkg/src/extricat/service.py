"""FastAPI service wrapping the engine.

Requests carry a full input descriptor (or a built-in fixture name) plus
a command; responses are the same certificates the CLI prints.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .certificates import Certificate, replay as replay_witnesses
from .descriptors import (
    DescriptorModel,
    LoadError,
    build_backend,
    fixtures_dir,
    load_fixture,
    parse_descriptor,
)
from .runner import COMMANDS, UsageError, run

app = FastAPI(title="extricat", version=__version__)


class RunRequest(BaseModel):
    command: str
    descriptor: Optional[dict] = None
    fixture: Optional[str] = None
    pair: Optional[dict] = None
    caps: Optional[dict] = None
    field: Optional[dict] = None
    seed: int = 0
    timing: bool = False


class ReplayRequest(BaseModel):
    certificate: dict


class ReplayResponse(BaseModel):
    results: list


class LoadResponse(BaseModel):
    digest: str
    backend: str
    field: str
    objects: list


def _descriptor_from(req: RunRequest) -> Optional[DescriptorModel]:
    if req.command == "selftest":
        return None
    if (req.descriptor is None) == (req.fixture is None):
        raise HTTPException(422, "provide exactly one of descriptor or fixture")
    try:
        if req.fixture is not None:
            desc = load_fixture(req.fixture)
        else:
            desc = parse_descriptor(req.descriptor)
        overrides = desc.model_dump(exclude_none=True, by_alias=True)
        if req.pair is not None:
            overrides["pair"] = req.pair
        if req.caps is not None:
            overrides["caps"] = req.caps
        if req.field is not None:
            overrides["field"] = req.field
        return parse_descriptor(overrides)
    except LoadError as exc:
        raise HTTPException(422, str(exc))


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/commands")
def commands():
    return {"commands": list(COMMANDS)}


@app.get("/fixtures")
def fixtures():
    return {"fixtures": sorted(p.stem for p in fixtures_dir().glob("*.json"))}


@app.post("/load", response_model=LoadResponse)
def load(req: RunRequest):
    desc = _descriptor_from(req)
    if desc is None:
        raise HTTPException(422, "selftest takes no descriptor")
    try:
        backend = build_backend(desc, seed=req.seed)
    except LoadError as exc:
        raise HTTPException(422, str(exc))
    return LoadResponse(
        digest=desc.digest(),
        backend=backend.kind,
        field=backend.cat.field.describe(),
        objects=list(backend.cat.objects),
    )


@app.post("/run", response_model=Certificate)
def run_command(req: RunRequest) -> Certificate:
    desc = _descriptor_from(req)
    try:
        return run(req.command, desc, seed=req.seed, timing=req.timing)
    except (LoadError, UsageError) as exc:
        raise HTTPException(422, str(exc))


@app.post("/replay", response_model=ReplayResponse)
def replay(req: ReplayRequest):
    try:
        results = replay_witnesses(req.certificate)
    except (KeyError, ValueError) as exc:
        raise HTTPException(422, f"certificate not replayable: {exc}")
    return ReplayResponse(results=[list(r) for r in results])
