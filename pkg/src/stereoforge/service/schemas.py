"""Request/response models for every pipeline operation.

These are the single contract behind both transports: the CLI builds them
from argv and runs them in-process, and the HTTP API accepts them as JSON
bodies.  All frame data moves through directories on a filesystem shared by
client and service; the models carry paths, never pixels.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class GenRequest(BaseModel):
    seed: int
    out: str
    frames: int = 21
    drop: int = 5
    width: int = 1024
    height: int = 512
    objects: int = 6
    threads: int | None = None


class GenResponse(BaseModel):
    out: str
    left: str
    right: str
    depth_left: str
    depth_right: str
    frames: int
    width: int
    height: int
    focal_px: float
    baseline_m: float
    seed: int


class WarpRequest(BaseModel):
    input_dir: str
    depth_dir: str
    out: str
    mode: str = "scaled"
    scale: float = 0.03
    focal_px: float | None = None
    baseline_m: float | None = None
    fill: int = 2
    dilate: int = 1
    dilate_iterations: int = 1
    threads: int | None = None


class WarpResponse(BaseModel):
    warped: str
    mask: str
    frames: int
    mode: str
    scale: float | None = None
    focal_px: float | None = None
    baseline_m: float | None = None
    fill: int
    dilate: int


class DegradeRequest(BaseModel):
    input_dir: str
    out: str
    seed: int
    target: str | None = None  # "WxH"; overrides the sampled target
    stages: str | None = None  # comma list: blur,down,noise,jpeg
    second_order: bool = False
    threads: int | None = None


class DegradeResponse(BaseModel):
    out: str
    recipe_path: str
    passes: list[dict]
    frames: int


class ConvertRequest(BaseModel):
    left_dir: str
    depth_dir: str
    out: str
    scale_mode: str = "scaled"
    scale: float = 0.03
    focal_px: float | None = None
    baseline_m: float | None = None
    backend: str = "baseline"
    hist_match: bool = False
    hist_ref: str = "input"
    fill: int = 2
    dilate: int = 1
    dilate_iterations: int = 1
    timeout_s: float = 600.0
    workdir: str | None = None
    threads: int | None = None


class ConvertResponse(BaseModel):
    left: str
    right: str
    mask: str
    frames: int
    backend: str
    scale_mode: str
    scale: float | None = None
    hist_match: bool


class HistmatchRequest(BaseModel):
    src_dir: str
    ref_dir: str
    out: str
    threads: int | None = None


class HistmatchResponse(BaseModel):
    out: str
    frames: int


class PackRequest(BaseModel):
    left_dir: str
    right_dir: str
    out: str
    mode: str = "sbs"


class PackResponse(BaseModel):
    out: str
    mode: str
    frames: int
    width: int
    height: int


class MetricsRequest(BaseModel):
    kind: str  # view | temporal | psnr | ssim
    a_dir: str
    b_dir: str | None = None
    mask_dir: str | None = None
    temporal_metric: str = "patch_cosine"


class MetricsResponse(BaseModel):
    metric: str
    per_frame: list[float]
    mean: float


class ErrorBody(BaseModel):
    code: str
    message: str
    context: dict = Field(default_factory=dict)


class HealthResponse(BaseModel):
    status: str
    version: str
