"""Disparity computation and forward warping with a z-buffer.

The warp direction convention: positive disparity shifts content toward −x,
which takes a left view to a right view on a rectified rig.  Each source
pixel splats to the nearest integer target column; collisions resolve by
minimum depth, with equal depths going to the larger source x.  Both rules
together make the result independent of traversal order, so frames and rows
can be processed in any schedule.

Two disparity modes: metric (focal_px * baseline_m / z, exact pinhole
geometry) and scaled (a fraction of image width times per-clip min-max
normalized inverse depth, for depth maps with unknown units).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    DimensionMismatch,
    InvalidConfig,
    NoOverlap,
    NonPositiveDepth,
)
from .metrics import psnr
from .parallel import frame_map
from .tensorio import DepthSequence, OcclusionMask, Video

DEFAULT_FILL_SPAN = 2
DEFAULT_DILATE_RADIUS = 1

CALIBRATION_GRID = tuple(round(0.02 + 0.005 * k, 3) for k in range(37))
CALIBRATION_MIN_PSNR = 20.0  # dB; below this the views do not overlap


@dataclass(frozen=True)
class DisparityField:
    """F x H x W horizontal displacement in pixels, >= 0."""

    disp: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.disp, dtype=np.float32)
        if d.ndim != 3:
            raise DimensionMismatch("disparity must have shape (F, H, W)",
                                    shape=d.shape)
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise DimensionMismatch("disparity must be finite and >= 0")
        d = np.ascontiguousarray(d)
        d.setflags(write=False)
        object.__setattr__(self, "disp", d)

    @property
    def frames(self) -> int:
        return self.disp.shape[0]

    @property
    def height(self) -> int:
        return self.disp.shape[1]

    @property
    def width(self) -> int:
        return self.disp.shape[2]


def depth_to_disparity(depth: DepthSequence, mode: str,
                       focal_px: float | None = None,
                       baseline_m: float | None = None,
                       s: float | None = None) -> DisparityField:
    """Convert depth to horizontal disparity.

    metric mode: disp = focal_px * baseline_m / z, the exact pinhole value.
    scaled mode: disp = s * W * q where q is inverse depth min-max normalized
    over the whole clip, so the clip's maximum disparity is exactly s * W and
    a constant-depth clip gets disparity 0 everywhere.
    """
    z = depth.depth
    if np.any(z <= 0):
        raise NonPositiveDepth("depth must be positive for disparity")
    if mode == "metric":
        if focal_px is None or baseline_m is None:
            raise InvalidConfig("metric mode needs focal_px and baseline_m")
        if focal_px <= 0 or baseline_m <= 0:
            raise InvalidConfig("focal_px and baseline_m must be > 0",
                                focal_px=focal_px, baseline_m=baseline_m)
        return DisparityField((focal_px * baseline_m) / z)
    if mode == "scaled":
        if s is None:
            raise InvalidConfig("scaled mode needs s")
        if s < 0:
            raise InvalidConfig("s must be >= 0", s=s)
        inv = 1.0 / z.astype(np.float64)
        lo = inv.min()
        hi = inv.max()
        if hi == lo:
            return DisparityField(np.zeros_like(z, dtype=np.float32))
        q = (inv - lo) / (hi - lo)
        return DisparityField((s * depth.width * q).astype(np.float32))
    raise InvalidConfig("mode must be 'metric' or 'scaled'", mode=mode)


def forward_warp(frame: np.ndarray, disp: np.ndarray,
                 depth: np.ndarray | None = None):
    """Splat one frame along its disparity, left view to right view.

    Each source pixel (x, y) lands on (round(x - disp[y, x]), y); rounding is
    nearest with halves up.  When several sources hit one target the one with
    the smallest z-key wins (the depth argument when given, else -disp), and
    equal keys go to the larger source x.  Unwritten targets get pixel value
    0 and mask 1.

    Returns:
        (warped uint8 HxWx3, hole mask uint8 HxW, z-key float32 HxW with
        +inf at holes).
    """
    h, w = disp.shape
    if frame.shape[:2] != (h, w):
        raise DimensionMismatch("frame and disparity dims differ",
                                frame=frame.shape, disp=disp.shape)
    if depth is not None and depth.shape != (h, w):
        raise DimensionMismatch("depth dims differ", depth=depth.shape)

    key = depth.astype(np.float64) if depth is not None else -disp.astype(np.float64)
    src_x = np.broadcast_to(np.arange(w), (h, w))
    tgt_x = np.floor(src_x - disp + 0.5).astype(np.int64)
    valid = (tgt_x >= 0) & (tgt_x < w)

    rows = np.broadcast_to(np.arange(h)[:, None], (h, w))[valid]
    tgt = rows * w + tgt_x[valid]
    k = key[valid]
    sx = src_x[valid]

    # one stable pass: per target, ascending z-key, larger source x first
    order = np.lexsort((-sx, k, tgt))
    tgt_sorted = tgt[order]
    first = np.ones(tgt_sorted.size, dtype=bool)
    first[1:] = tgt_sorted[1:] != tgt_sorted[:-1]
    winners = order[first]

    warped = np.zeros_like(frame)
    warped.reshape(-1, frame.shape[2])[tgt[winners]] = frame[valid][winners]
    mask = np.ones(h * w, dtype=np.uint8)
    mask[tgt[winners]] = 0
    zkey = np.full(h * w, np.inf, dtype=np.float32)
    zkey[tgt[winners]] = k[winners]
    return warped, mask.reshape(h, w), zkey.reshape(h, w)


def fill_flying_pixels(warped: np.ndarray, mask: np.ndarray,
                       max_span: int = DEFAULT_FILL_SPAN):
    """Close short horizontal hole runs by linear interpolation along rows.

    A run of masked pixels is filled (and unmasked) only when it is at most
    max_span long and has unmasked pixels on both sides in the same row;
    longer runs and runs touching the frame border are left for the
    inpainting backend.
    """
    if max_span < 1:
        raise InvalidConfig("max_span must be >= 1", max_span=max_span)
    h, w = mask.shape
    out = warped.copy()
    new_mask = mask.copy()
    padded = np.pad(mask.astype(np.int8), ((0, 0), (1, 1)))
    edges = np.diff(padded, axis=1)
    run_rows, run_starts = np.nonzero(edges == 1)
    end_rows, run_ends = np.nonzero(edges == -1)  # exclusive end
    # starts and ends pair up in scan order within each row
    for r, a, b in zip(run_rows, run_starts, run_ends):
        length = b - a
        if length > max_span or a == 0 or b == w:
            continue
        left = out[r, a - 1].astype(np.float64)
        right = out[r, b].astype(np.float64)
        t = (np.arange(1, length + 1) / (length + 1))[:, None]
        out[r, a:b] = np.floor(left + (right - left) * t + 0.5).astype(out.dtype)
        new_mask[r, a:b] = 0
    return out, new_mask


def dilate_mask(mask: OcclusionMask, radius: int = DEFAULT_DILATE_RADIUS,
                iterations: int = 1) -> OcclusionMask:
    """Grow each frame's mask with a (2*radius+1)^2 square element."""
    if radius < 1:
        raise InvalidConfig("radius must be >= 1", radius=radius)
    if iterations < 1:
        raise InvalidConfig("iterations must be >= 1", iterations=iterations)
    structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)

    def one(_i, frame):
        return ndimage.binary_dilation(
            frame.astype(bool), structure=structure, iterations=iterations
        ).astype(np.uint8)

    return OcclusionMask(np.stack(frame_map(one, mask.bits)))


def warp_video(video: Video, disparity: DisparityField,
               depth: DepthSequence | None = None,
               fill_span: int = DEFAULT_FILL_SPAN,
               dilate_radius: int = DEFAULT_DILATE_RADIUS,
               dilate_iterations: int = 1,
               threads: int | None = None):
    """Warp a whole clip: splat, close tiny holes, then dilate the mask.

    fill_span=0 skips hole filling and dilate_radius=0 skips dilation; the
    defaults give the standard left-to-right preprocessing chain.

    Returns:
        (warped Video, OcclusionMask ready for the inpainting backend).
    """
    if (video.frames, video.height, video.width) != (
            disparity.frames, disparity.height, disparity.width):
        raise DimensionMismatch("video and disparity geometry differ")
    if depth is not None and (depth.frames, depth.height, depth.width) != (
            video.frames, video.height, video.width):
        raise DimensionMismatch("video and depth geometry differ")

    def one(i, frame):
        d = depth.depth[i] if depth is not None else None
        warped, mask, _ = forward_warp(frame, disparity.disp[i], d)
        if fill_span > 0:
            warped, mask = fill_flying_pixels(warped, mask, fill_span)
        return warped, mask

    results = frame_map(one, video.pixels, threads)
    warped = Video(np.stack([r[0] for r in results]))
    mask = OcclusionMask(np.stack([r[1] for r in results]))
    if dilate_radius > 0:
        mask = dilate_mask(mask, dilate_radius, dilate_iterations)
    return warped, mask


@dataclass(frozen=True)
class CalibrationResult:
    s: float
    psnr_db: float


def calibrate_disparity_scale(left: Video, depth: DepthSequence, right: Video,
                              grid: tuple = CALIBRATION_GRID,
                              min_psnr: float = CALIBRATION_MIN_PSNR,
                              threads: int | None = None) -> CalibrationResult:
    """Grid-search the disparity scale that best aligns warped-left to right.

    Scores each candidate s by masked PSNR between forward_warp(left,
    scaled(s)) and the right view, averaged per frame, and returns the best
    grid point with its score.  Raises NoOverlap when no candidate reaches
    min_psnr, which is how non-corresponding view pairs are filtered out.
    """
    if (left.frames, left.height, left.width) != (
            right.frames, right.height, right.width):
        raise DimensionMismatch("left/right geometry differs")

    best_s = None
    best_score = -np.inf
    for s in grid:
        disparity = depth_to_disparity(depth, "scaled", s=s)

        def one(i, frame):
            warped, mask, _ = forward_warp(frame, disparity.disp[i])
            return warped, mask

        results = frame_map(one, left.pixels, threads)
        warped = Video(np.stack([r[0] for r in results]))
        holes = OcclusionMask(np.stack([r[1] for r in results]))
        score = psnr(warped, right, mask=holes)
        if score > best_score:
            best_score = score
            best_s = s
    if best_score < min_psnr:
        raise NoOverlap("no disparity scale aligns the views",
                        best_psnr=round(float(best_score), 2),
                        min_psnr=min_psnr)
    return CalibrationResult(s=float(best_s), psnr_db=float(best_score))
