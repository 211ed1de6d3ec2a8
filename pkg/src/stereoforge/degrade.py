"""Temporally-consistent degradation: blur, area resampling, noise, JPEG.

A clip is degraded by one seeded recipe: every frame sees the same blur
sigma, target size, noise sigma, and JPEG quality, so the degradation is
steady over time.  Only the noise sample values differ per frame, drawn from
a stream keyed by (recipe seed, frame index) so results are independent of
thread scheduling.

The overall shape is down-then-up: the stage chain runs on the way down to
the target size and the final step resizes back to the source size with
area interpolation, which is also the downsampling method.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InvalidRange, InvalidRecipe
from .parallel import frame_map
from .tensorio import Video

STAGE_ORDER = ("blur", "resize_down", "noise", "jpeg")

BLUR_SIGMA_BOUNDS = (0.2, 3.0)
NOISE_SIGMA_BOUNDS = (1.0, 30.0)
JPEG_QUALITY_BOUNDS = (30, 95)
DEFAULT_TARGETS = ((256, 128), (320, 160), (360, 180))


@dataclass(frozen=True)
class DegradationRanges:
    """Sampling ranges for sample_recipe; defaults cover the full bounds."""

    blur_sigma: tuple[float, float] = BLUR_SIGMA_BOUNDS
    noise_sigma: tuple[float, float] = NOISE_SIGMA_BOUNDS
    jpeg_quality: tuple[int, int] = JPEG_QUALITY_BOUNDS
    targets: tuple[tuple[int, int], ...] = DEFAULT_TARGETS

    def __post_init__(self):
        def check(name, rng, bounds, integer=False):
            lo, hi = rng
            if lo > hi:
                raise InvalidRange(f"{name} range is inverted", range=rng)
            if lo < bounds[0] or hi > bounds[1]:
                raise InvalidRange(f"{name} range exceeds {bounds}", range=rng)
            if integer and (int(lo) != lo or int(hi) != hi):
                raise InvalidRange(f"{name} bounds must be integers", range=rng)

        check("blur_sigma", self.blur_sigma, BLUR_SIGMA_BOUNDS)
        check("noise_sigma", self.noise_sigma, NOISE_SIGMA_BOUNDS)
        check("jpeg_quality", self.jpeg_quality, JPEG_QUALITY_BOUNDS, integer=True)
        if not self.targets:
            raise InvalidRange("targets must be non-empty")
        for t in self.targets:
            if len(t) != 2 or t[0] < 1 or t[1] < 1:
                raise InvalidRange("bad target size", target=t)


@dataclass(frozen=True)
class DegradationRecipe:
    """One clip's frozen degradation parameters."""

    seed: int
    blur_sigma: float
    target_w: int
    target_h: int
    noise_sigma: float
    jpeg_quality: int
    stages: tuple[str, ...] = STAGE_ORDER

    def __post_init__(self):
        if not (BLUR_SIGMA_BOUNDS[0] <= self.blur_sigma <= BLUR_SIGMA_BOUNDS[1]):
            raise InvalidRecipe("blur_sigma out of bounds",
                                blur_sigma=self.blur_sigma)
        if not (NOISE_SIGMA_BOUNDS[0] <= self.noise_sigma <= NOISE_SIGMA_BOUNDS[1]):
            raise InvalidRecipe("noise_sigma out of bounds",
                                noise_sigma=self.noise_sigma)
        if not (JPEG_QUALITY_BOUNDS[0] <= self.jpeg_quality <= JPEG_QUALITY_BOUNDS[1]):
            raise InvalidRecipe("jpeg_quality out of bounds",
                                jpeg_quality=self.jpeg_quality)
        if self.target_w < 1 or self.target_h < 1:
            raise InvalidRecipe("target size must be >= 1x1",
                                target_w=self.target_w, target_h=self.target_h)
        seen = set()
        for stage in self.stages:
            if stage not in STAGE_ORDER:
                raise InvalidRecipe("unknown stage", stage=stage)
            if stage in seen:
                raise InvalidRecipe("duplicate stage", stage=stage)
            seen.add(stage)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "blur_sigma": self.blur_sigma,
            "target_w": self.target_w,
            "target_h": self.target_h,
            "noise_sigma": self.noise_sigma,
            "jpeg_quality": self.jpeg_quality,
            "stages": list(self.stages),
        }

    @staticmethod
    def from_json(raw: dict) -> "DegradationRecipe":
        return DegradationRecipe(
            seed=int(raw["seed"]),
            blur_sigma=float(raw["blur_sigma"]),
            target_w=int(raw["target_w"]),
            target_h=int(raw["target_h"]),
            noise_sigma=float(raw["noise_sigma"]),
            jpeg_quality=int(raw["jpeg_quality"]),
            stages=tuple(raw.get("stages", STAGE_ORDER)),
        )


def sample_recipe(seed: int, ranges: DegradationRanges | None = None,
                  pass_index: int = 0) -> DegradationRecipe:
    """Draw one recipe, uniform over each range, deterministic in the seed.

    pass_index keys extra recipes off the same seed (second-order chains).
    The draw order (blur, target, noise, quality) is frozen; changing it
    would re-key every seed.
    """
    ranges = ranges or DegradationRanges()
    rng = np.random.default_rng([seed, pass_index])
    blur_sigma = float(rng.uniform(*ranges.blur_sigma))
    target = ranges.targets[int(rng.integers(0, len(ranges.targets)))]
    noise_sigma = float(rng.uniform(*ranges.noise_sigma))
    quality = int(rng.integers(ranges.jpeg_quality[0],
                               ranges.jpeg_quality[1] + 1))
    return DegradationRecipe(
        seed=seed,
        blur_sigma=blur_sigma,
        target_w=target[0],
        target_h=target[1],
        noise_sigma=noise_sigma,
        jpeg_quality=quality,
    )


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """Exact overlap weights mapping an n_in axis onto n_out cells.

    Work on a common grid of n_in * n_out units: input cell j spans
    [j*n_out, (j+1)*n_out), output cell i spans [i*n_in, (i+1)*n_in).  The
    overlap lengths are integers, so the weights are exact rationals over
    n_in and every row sums to exactly 1.
    """
    i = np.arange(n_out)[:, None]
    j = np.arange(n_in)[None, :]
    lo = np.maximum(i * n_in, j * n_out)
    hi = np.minimum((i + 1) * n_in, (j + 1) * n_out)
    overlap = np.clip(hi - lo, 0, None)
    return overlap / float(n_in)


def area_resize(frame: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize with exact area-weighted averaging (both directions).

    Identity when the size is unchanged; preserves the mean value to within
    rounding for any size pair because the weights sum to 1.
    """
    if width < 1 or height < 1:
        raise InvalidRecipe("resize target must be >= 1x1",
                            width=width, height=height)
    h, w = frame.shape[:2]
    if (w, h) == (width, height):
        return frame.copy()
    acc = frame.astype(np.float64)
    if h != height:
        wr = _area_weights(h, height)
        acc = np.tensordot(wr, acc, axes=(1, 0))
    if w != width:
        wc = _area_weights(w, width)
        acc = np.tensordot(acc, wc, axes=(1, 1))
        acc = np.moveaxis(acc, -1, 1)
    if frame.dtype == np.uint8:
        return np.clip(np.floor(acc + 0.5), 0, 255).astype(np.uint8)
    return acc


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 * sigma)."""
    if sigma <= 0:
        raise InvalidRecipe("sigma must be > 0", sigma=sigma)
    radius = int(np.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return w / w.sum()


def gaussian_blur(frame: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur per channel, reflect-101 boundaries."""
    kernel = gaussian_kernel(sigma)
    acc = frame.astype(np.float64)
    acc = ndimage.convolve1d(acc, kernel, axis=0, mode="mirror")
    acc = ndimage.convolve1d(acc, kernel, axis=1, mode="mirror")
    if frame.dtype == np.uint8:
        return np.clip(np.floor(acc + 0.5), 0, 255).astype(np.uint8)
    return acc


def add_noise(frame: np.ndarray, sigma: float,
              rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian noise in 8-bit code values, clamped and rounded."""
    if sigma < 0:
        raise InvalidRecipe("sigma must be >= 0", sigma=sigma)
    if sigma == 0:
        return frame.copy()
    noisy = frame.astype(np.float64) + rng.normal(0.0, sigma, size=frame.shape)
    return np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)


def noise_stream(seed: int, frame_index: int) -> np.random.Generator:
    """Per-frame noise stream; keyed so scheduling cannot change results."""
    return np.random.default_rng([seed, frame_index])


def jpeg_roundtrip(frame: np.ndarray, quality: int) -> np.ndarray:
    """Encode to baseline JPEG (4:2:0) at the given quality and decode."""
    if not (1 <= quality <= 100):
        raise InvalidRecipe("quality must be in [1, 100]", quality=quality)
    buf = io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(
        buf, format="JPEG", quality=quality, subsampling=2
    )
    buf.seek(0)
    with Image.open(buf) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def degrade_frame(frame: np.ndarray, recipe: DegradationRecipe,
                  frame_index: int) -> np.ndarray:
    """Run one frame through the recipe's stage chain, then resize back.

    Blur runs before the downsize (source resolution); noise and JPEG run
    wherever the chain has put the frame by then (target resolution in the
    default order).  The final upsize back to the source size always runs.
    """
    src_h, src_w = frame.shape[:2]
    if recipe.target_w > src_w or recipe.target_h > src_h:
        raise InvalidRecipe(
            "target size exceeds source size",
            target=f"{recipe.target_w}x{recipe.target_h}",
            source=f"{src_w}x{src_h}",
        )
    out = frame
    for stage in recipe.stages:
        if stage == "blur":
            out = gaussian_blur(out, recipe.blur_sigma)
        elif stage == "resize_down":
            out = area_resize(out, recipe.target_w, recipe.target_h)
        elif stage == "noise":
            out = add_noise(out, recipe.noise_sigma,
                            noise_stream(recipe.seed, frame_index))
        elif stage == "jpeg":
            out = jpeg_roundtrip(out, recipe.jpeg_quality)
    return area_resize(out, src_w, src_h)


def degrade_video(video: Video, recipe: DegradationRecipe,
                  threads: int | None = None) -> Video:
    """Apply one recipe to every frame; output dims equal input dims."""

    def one(i, frame):
        return degrade_frame(frame, recipe, i)

    return Video(np.stack(frame_map(one, video.pixels, threads)))
