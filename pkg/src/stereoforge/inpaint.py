"""Dual-branch stereo conversion around a pluggable inpainting backend.

The conversion runs the same backend twice: a left_to_right job carries the
warped frames with their occlusion mask, and a left_to_left job carries the
original input with an all-zero mask (so a well-behaved restoration backend
returns a cleaned-up left view and the builtin ones return it unchanged).

Backends talk through the file protocol: a job.json manifest pointing at
frame directories, `frame_%05d.png` outputs, exit code 0.  That keeps the
neural model replaceable by any process in any language.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BackendFailed,
    BackendTimeout,
    DecodeError,
    DimensionMismatch,
    FrameCountMismatch,
    FullyMaskedFrame,
    InvalidConfig,
    OutputMismatch,
)
from .parallel import frame_map
from .postproc import match_histograms
from .tensorio import (
    DepthSequence,
    OcclusionMask,
    Video,
    load_frames,
    load_mask_frames,
    save_mask,
    save_video,
)
from .warp import depth_to_disparity, warp_video

JOB_VERSION = "1"
BRANCHES = ("left_to_right", "left_to_left")
DEFAULT_TIMEOUT_S = 600.0
DEFAULT_SCALE = 0.03  # fraction of width given to the largest disparity


@dataclass(frozen=True)
class BackendJob:
    """One unit of backend work, serializable as job.json."""

    branch: str
    input_frames: str
    mask: str
    output_frames: str
    width: int
    height: int
    frame_count: int
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise InvalidConfig(f"branch must be one of {BRANCHES}",
                                branch=self.branch)
        if self.frame_count < 1 or self.width < 1 or self.height < 1:
            raise InvalidConfig("job geometry must be positive",
                                width=self.width, height=self.height,
                                frame_count=self.frame_count)

    def to_json(self) -> dict:
        return {
            "version": JOB_VERSION,
            "branch": self.branch,
            "input_frames": self.input_frames,
            "mask": self.mask,
            "output_frames": self.output_frames,
            "width": self.width,
            "height": self.height,
            "frame_count": self.frame_count,
            "extras": {str(k): str(v) for k, v in self.extras.items()},
        }

    @staticmethod
    def from_json(raw: dict) -> "BackendJob":
        try:
            return BackendJob(
                branch=str(raw["branch"]),
                input_frames=str(raw["input_frames"]),
                mask=str(raw["mask"]),
                output_frames=str(raw["output_frames"]),
                width=int(raw["width"]),
                height=int(raw["height"]),
                frame_count=int(raw["frame_count"]),
                extras=dict(raw.get("extras", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DecodeError(f"malformed job manifest: {exc}") from exc


def write_job(job: BackendJob, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(job.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_job(path: str) -> BackendJob:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DecodeError(f"unreadable job manifest: {exc}", path=path) from exc
    return BackendJob.from_json(raw)


@dataclass(frozen=True)
class BackendRegistration:
    """How to run one named backend."""

    name: str
    kind: str  # builtin_baseline | identity | external_process
    external: str | None = None  # command template with a {job} placeholder

    def __post_init__(self):
        if self.kind not in ("builtin_baseline", "identity", "external_process"):
            raise InvalidConfig("unknown backend kind", kind=self.kind)
        if self.kind == "external_process":
            if not self.external or "{job}" not in self.external:
                raise InvalidConfig(
                    "external backend needs a command template with {job}",
                    external=self.external,
                )


_REGISTRY: dict[str, BackendRegistration] = {}


def register_backend(reg: BackendRegistration) -> None:
    if reg.name in _REGISTRY:
        raise InvalidConfig("backend name already registered", name=reg.name)
    _REGISTRY[reg.name] = reg


def get_backend(name: str) -> BackendRegistration:
    """Resolve a backend by name; `exec:CMD {job}` makes an ad-hoc one."""
    if name.startswith("exec:"):
        return BackendRegistration(name=name, kind="external_process",
                                   external=name[len("exec:"):])
    if name not in _REGISTRY:
        raise InvalidConfig("no such backend", name=name,
                            known=sorted(_REGISTRY))
    return _REGISTRY[name]


register_backend(BackendRegistration(name="baseline", kind="builtin_baseline"))
register_backend(BackendRegistration(name="identity", kind="identity"))


def baseline_inpaint(frame: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill masked pixels from the nearest valid pixel to the right.

    Disocclusions from left-to-right warping open up on the far side of the
    foreground, so the background continuation lives to the hole's right.
    Pixels with no valid right neighbor take the nearest valid one on the
    left; fully-masked rows copy, column by column, the nearest row that has
    any valid pixel after that row has been filled (ties go to the smaller
    row index).  Unmasked pixels pass through untouched.
    """
    h, w = mask.shape
    if frame.shape[:2] != (h, w):
        raise DimensionMismatch("frame and mask dims differ",
                                frame=frame.shape, mask=mask.shape)
    valid = mask == 0
    if not valid.any():
        raise FullyMaskedFrame("every pixel is masked")
    out = frame.copy()

    cols = np.arange(w)
    # nearest valid source column to the right: suffix minimum of column
    # index over valid pixels (w stands for "none")
    right_src = np.where(valid, cols, w)
    right_src = np.minimum.accumulate(right_src[:, ::-1], axis=1)[:, ::-1]
    # nearest valid source column to the left: prefix maximum (-1 = "none")
    left_src = np.where(valid, cols, -1)
    left_src = np.maximum.accumulate(left_src, axis=1)

    src = np.where(right_src < w, right_src, left_src)
    rows_any = valid.any(axis=1)
    fill_rows = rows_any[:, None] & ~valid
    rr, cc = np.nonzero(fill_rows)
    out[rr, cc] = frame[rr, src[rr, cc]]

    if not rows_any.all():
        good = np.nonzero(rows_any)[0]
        for r in np.nonzero(~rows_any)[0]:
            nearest = good[np.argmin(np.abs(good - r))]
            out[r] = out[nearest]
    return out


def _inpaint_video(video: Video, mask: OcclusionMask,
                   threads: int | None = None) -> Video:
    def one(i, frame):
        if mask.bits[i].any():
            return baseline_inpaint(frame, mask.bits[i])
        return frame.copy()

    return Video(np.stack(frame_map(one, video.pixels, threads)))


def validate_job(job: BackendJob, mask: OcclusionMask) -> None:
    """Branch indicator law: mask is all-zero iff branch is left_to_left."""
    zero = not mask.any_set()
    if job.branch == "left_to_left" and not zero:
        raise InvalidConfig("left_to_left job carries a non-zero mask")
    if job.branch == "left_to_right" and zero:
        # legal but suspicious: nothing to inpaint
        pass


def run_backend(job: BackendJob, registration: BackendRegistration,
                timeout: float = DEFAULT_TIMEOUT_S,
                threads: int | None = None) -> Video:
    """Execute one job and return the validated output video.

    All kinds leave the output frames on disk at job.output_frames; the
    external kind additionally writes `job.json` there and substitutes its
    path into the command template.
    """
    frames = load_frames(job.input_frames, job.frame_count)
    if (frames.height, frames.width) != (job.height, job.width):
        raise OutputMismatch("input frames do not match job geometry",
                             expected=f"{job.width}x{job.height}",
                             actual=f"{frames.width}x{frames.height}")

    if registration.kind == "identity":
        out = frames
    elif registration.kind == "builtin_baseline":
        mask = load_mask_frames(job.mask, job.frame_count)
        if mask.bits.shape != frames.pixels.shape[:3]:
            raise OutputMismatch("mask does not match job geometry")
        out = _inpaint_video(frames, mask, threads)
    elif registration.kind == "external_process":
        os.makedirs(job.output_frames, exist_ok=True)
        job_path = os.path.join(job.output_frames, "job.json")
        write_job(job, job_path)
        argv = [
            arg.replace("{job}", job_path) if "{job}" in arg else arg
            for arg in shlex.split(registration.external)
        ]
        try:
            proc = subprocess.run(argv, timeout=timeout)
        except subprocess.TimeoutExpired as exc:
            raise BackendTimeout("backend exceeded its time budget",
                                 timeout_s=timeout, argv=argv) from exc
        except OSError as exc:
            raise BackendFailed(f"backend could not start: {exc}",
                                argv=argv) from exc
        if proc.returncode != 0:
            raise BackendFailed("backend exited nonzero",
                                exit_code=proc.returncode, argv=argv)
        try:
            out = load_frames(job.output_frames, job.frame_count)
        except (FrameCountMismatch, DimensionMismatch, DecodeError) as exc:
            raise OutputMismatch(f"backend output unreadable: {exc.message}",
                                 **exc.context) from exc
        if (out.height, out.width) != (job.height, job.width):
            raise OutputMismatch("backend output has wrong dimensions",
                                 expected=f"{job.width}x{job.height}",
                                 actual=f"{out.width}x{out.height}")
    else:
        raise InvalidConfig("unknown backend kind", kind=registration.kind)

    if registration.kind != "external_process":
        save_video(out, job.output_frames)
    return out


@dataclass(frozen=True)
class ConvertConfig:
    """Everything convert_stereo needs besides the pixel inputs."""

    scale_mode: str = "scaled"  # scaled | metric
    s: float = DEFAULT_SCALE
    focal_px: float | None = None
    baseline_m: float | None = None
    fill_span: int = 2
    dilate_radius: int = 1
    dilate_iterations: int = 1
    backend: str = "baseline"
    hist_match: bool = False
    hist_ref: str = "input"  # input | output-left
    timeout_s: float = DEFAULT_TIMEOUT_S
    workdir: str | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.scale_mode not in ("scaled", "metric"):
            raise InvalidConfig("scale_mode must be scaled or metric",
                                scale_mode=self.scale_mode)
        if self.hist_ref not in ("input", "output-left"):
            raise InvalidConfig("hist_ref must be input or output-left",
                                hist_ref=self.hist_ref)


@dataclass(frozen=True)
class ConvertResult:
    left_out: Video
    right_out: Video
    mask: OcclusionMask
    warped: Video


def convert_stereo(left: Video, depth: DepthSequence,
                   cfg: ConvertConfig | None = None) -> ConvertResult:
    """Full conversion: warp along the disparity, inpaint the disocclusions,
    re-generate the left view through the zero-mask branch, and optionally
    histogram-match the new right view to the input."""
    cfg = cfg or ConvertConfig()
    if (depth.frames, depth.height, depth.width) != (
            left.frames, left.height, left.width):
        raise DimensionMismatch("left video and depth geometry differ")

    if cfg.scale_mode == "metric":
        disparity = depth_to_disparity(depth, "metric",
                                       focal_px=cfg.focal_px,
                                       baseline_m=cfg.baseline_m)
        warp_depth = depth
    else:
        disparity = depth_to_disparity(depth, "scaled", s=cfg.s)
        warp_depth = None
    warped, mask = warp_video(
        left, disparity, warp_depth,
        fill_span=cfg.fill_span,
        dilate_radius=cfg.dilate_radius,
        dilate_iterations=cfg.dilate_iterations,
        threads=cfg.threads,
    )

    registration = get_backend(cfg.backend)
    workdir = cfg.workdir or tempfile.mkdtemp(prefix="stereoforge_convert_")
    os.makedirs(workdir, exist_ok=True)

    r2r_in = os.path.join(workdir, "left_to_right", "input")
    r2r_mask = os.path.join(workdir, "left_to_right", "mask")
    r2r_out = os.path.join(workdir, "left_to_right", "output")
    l2l_in = os.path.join(workdir, "left_to_left", "input")
    l2l_mask = os.path.join(workdir, "left_to_left", "mask")
    l2l_out = os.path.join(workdir, "left_to_left", "output")

    save_video(warped, r2r_in)
    save_mask(mask, r2r_mask)
    zero = OcclusionMask.zeros(left.frames, left.height, left.width)
    save_video(left, l2l_in)
    save_mask(zero, l2l_mask)

    right_job = BackendJob(
        branch="left_to_right", input_frames=r2r_in, mask=r2r_mask,
        output_frames=r2r_out, width=left.width, height=left.height,
        frame_count=left.frames,
    )
    left_job = BackendJob(
        branch="left_to_left", input_frames=l2l_in, mask=l2l_mask,
        output_frames=l2l_out, width=left.width, height=left.height,
        frame_count=left.frames,
    )
    validate_job(right_job, mask)
    validate_job(left_job, zero)

    right_out = run_backend(right_job, registration, cfg.timeout_s, cfg.threads)
    left_out = run_backend(left_job, registration, cfg.timeout_s, cfg.threads)

    if cfg.hist_match:
        ref = left if cfg.hist_ref == "input" else left_out
        right_out = match_histograms(right_out, ref, cfg.threads)
    return ConvertResult(left_out=left_out, right_out=right_out,
                         mask=mask, warped=warped)
