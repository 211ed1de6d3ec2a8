"""HTTP facade over the pipeline operations."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import StereoforgeError
from . import ops
from .schemas import (
    ConvertRequest,
    ConvertResponse,
    DegradeRequest,
    DegradeResponse,
    GenRequest,
    GenResponse,
    HealthResponse,
    HistmatchRequest,
    HistmatchResponse,
    MetricsRequest,
    MetricsResponse,
    PackRequest,
    PackResponse,
    WarpRequest,
    WarpResponse,
)

app = FastAPI(title="stereoforge", version=__version__)


@app.exception_handler(StereoforgeError)
def domain_error_handler(_request: Request, exc: StereoforgeError):
    return JSONResponse(status_code=400, content=exc.as_dict())


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/v1/gen", response_model=GenResponse)
def gen(req: GenRequest) -> GenResponse:
    return ops.run_gen(req)


@app.post("/v1/warp", response_model=WarpResponse)
def warp(req: WarpRequest) -> WarpResponse:
    return ops.run_warp(req)


@app.post("/v1/degrade", response_model=DegradeResponse)
def degrade(req: DegradeRequest) -> DegradeResponse:
    return ops.run_degrade(req)


@app.post("/v1/convert", response_model=ConvertResponse)
def convert(req: ConvertRequest) -> ConvertResponse:
    return ops.run_convert(req)


@app.post("/v1/histmatch", response_model=HistmatchResponse)
def histmatch(req: HistmatchRequest) -> HistmatchResponse:
    return ops.run_histmatch(req)


@app.post("/v1/pack", response_model=PackResponse)
def pack(req: PackRequest) -> PackResponse:
    return ops.run_pack(req)


@app.post("/v1/metrics", response_model=MetricsResponse)
def metrics(req: MetricsRequest) -> MetricsResponse:
    return ops.run_metrics(req)
