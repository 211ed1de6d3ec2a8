"""Quantitative evaluation: PSNR, SSIM, and patch-feature consistency scores.

All metrics are pure functions of their pixel inputs, so identical inputs
give bit-identical scores.  Video-level scores are the mean of per-frame
(or per-consecutive-pair) values; the per-frame lists are part of the public
result so callers can report both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    DimensionMismatch,
    EmptyMask,
    InvalidConfig,
    SingleFrame,
    TooSmall,
)
from .tensorio import OcclusionMask, Video

PSNR_CAP_DB = 99.0  # reported when MSE is exactly 0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0

PATCH_BLOCK = 8

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class MetricReport:
    """Per-frame values plus their mean, as emitted by the CLI."""

    metric: str
    per_frame: tuple[float, ...]
    mean: float

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "per_frame": list(self.per_frame),
            "mean": self.mean,
        }


def _luma(frame: np.ndarray) -> np.ndarray:
    return frame.astype(np.float64) @ LUMA_WEIGHTS


def _check_same_geometry(a: Video, b: Video) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch("videos have different geometry",
                                a=a.pixels.shape, b=b.pixels.shape)


def psnr_per_frame(a: Video, b: Video,
                   mask: OcclusionMask | None = None) -> list[float]:
    """Per-frame PSNR in dB, evaluated where mask == 0 when a mask is given."""
    _check_same_geometry(a, b)
    if mask is not None and mask.bits.shape != a.pixels.shape[:3]:
        raise DimensionMismatch("mask geometry differs from videos",
                                mask=mask.bits.shape, video=a.pixels.shape)
    values = []
    for i in range(a.frames):
        diff = a.pixels[i].astype(np.float64) - b.pixels[i].astype(np.float64)
        if mask is not None:
            include = mask.bits[i] == 0
            if not include.any():
                raise EmptyMask("mask excludes every pixel", frame=i)
            diff = diff[include]
        mse = float(np.mean(diff * diff))
        if mse == 0.0:
            values.append(PSNR_CAP_DB)
        else:
            values.append(min(float(10.0 * np.log10(255.0**2 / mse)), PSNR_CAP_DB))
    return values


def psnr(a: Video, b: Video, mask: OcclusionMask | None = None) -> float:
    """Mean per-frame PSNR in dB (99 dB cap for identical frames)."""
    return float(np.mean(psnr_per_frame(a, b, mask)))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    k = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return w / w.sum()


def _ssim_frame(x: np.ndarray, y: np.ndarray) -> float:
    """SSIM of two luma frames over all fully-inside window positions."""
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    half = SSIM_WINDOW // 2

    def smooth(img):
        out = ndimage.convolve1d(img, win, axis=0, mode="mirror")
        out = ndimage.convolve1d(out, win, axis=1, mode="mirror")
        return out[half:-half, half:-half]

    mu_x = smooth(x)
    mu_y = smooth(y)
    xx = smooth(x * x) - mu_x * mu_x
    yy = smooth(y * y) - mu_y * mu_y
    xy = smooth(x * y) - mu_x * mu_y
    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def ssim_per_frame(a: Video, b: Video) -> list[float]:
    _check_same_geometry(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise TooSmall(
            f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM",
            height=a.height, width=a.width,
        )
    return [
        _ssim_frame(_luma(a.pixels[i]), _luma(b.pixels[i]))
        for i in range(a.frames)
    ]


def ssim(a: Video, b: Video) -> float:
    """Mean per-frame SSIM on luma, 11x11 Gaussian window, sigma 1.5."""
    return float(np.mean(ssim_per_frame(a, b)))


def _block_means(img: np.ndarray, block: int) -> np.ndarray:
    h = (img.shape[0] // block) * block
    w = (img.shape[1] // block) * block
    cropped = img[:h, :w]
    return cropped.reshape(h // block, block, w // block, block).mean(axis=(1, 3))


def patch_features(frame: np.ndarray) -> np.ndarray:
    """L2-normalized feature vector: 8x8 block means of luma and of Sobel
    gradient magnitude, concatenated.  A cheap deterministic descriptor that
    reacts to both luminance and structure."""
    y = _luma(frame)
    gx = ndimage.sobel(y, axis=1, mode="reflect")
    gy = ndimage.sobel(y, axis=0, mode="reflect")
    grad = np.hypot(gx, gy)
    vec = np.concatenate([
        _block_means(y, PATCH_BLOCK).ravel(),
        _block_means(grad, PATCH_BLOCK).ravel(),
    ])
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        return vec  # zero vector; patch_cosine handles it
    return vec / norm


def patch_cosine(frame_a: np.ndarray, frame_b: np.ndarray) -> float:
    """Cosine similarity of the two frames' patch feature vectors."""
    if frame_a.shape != frame_b.shape:
        raise DimensionMismatch("frames have different shapes",
                                a=frame_a.shape, b=frame_b.shape)
    fa = patch_features(frame_a)
    fb = patch_features(frame_b)
    na = float(np.linalg.norm(fa))
    nb = float(np.linalg.norm(fb))
    if na < 1e-12 or nb < 1e-12:
        return 1.0 if (na < 1e-12 and nb < 1e-12) else 0.0
    return float(np.dot(fa, fb))


def _pair_score(metric: str, a: np.ndarray, b: np.ndarray) -> float:
    if metric == "psnr":
        diff = a.astype(np.float64) - b.astype(np.float64)
        mse = float(np.mean(diff * diff))
        if mse == 0.0:
            return PSNR_CAP_DB
        return min(float(10.0 * np.log10(255.0**2 / mse)), PSNR_CAP_DB)
    if metric == "ssim":
        return _ssim_frame(_luma(a), _luma(b))
    if metric == "patch_cosine":
        return patch_cosine(a, b)
    raise InvalidConfig("unknown temporal metric", metric=metric)


def temporal_consistency_per_pair(video: Video,
                                  metric: str = "patch_cosine") -> list[float]:
    if video.frames < 2:
        raise SingleFrame("temporal consistency needs at least 2 frames")
    if metric not in ("ssim", "psnr", "patch_cosine"):
        raise InvalidConfig("unknown temporal metric", metric=metric)
    if metric == "ssim" and (video.height < SSIM_WINDOW or video.width < SSIM_WINDOW):
        raise TooSmall("frames too small for SSIM")
    return [
        _pair_score(metric, video.pixels[i - 1], video.pixels[i])
        for i in range(1, video.frames)
    ]


def temporal_consistency(video: Video, metric: str = "patch_cosine") -> float:
    """Mean similarity of consecutive frame pairs; higher is steadier."""
    return float(np.mean(temporal_consistency_per_pair(video, metric)))


def view_consistency_per_frame(left: Video, right: Video) -> list[float]:
    _check_same_geometry(left, right)
    return [
        patch_cosine(left.pixels[i], right.pixels[i])
        for i in range(left.frames)
    ]


def view_consistency(left: Video, right: Video) -> float:
    """Mean per-frame patch-feature cosine between the two views."""
    return float(np.mean(view_consistency_per_frame(left, right)))
