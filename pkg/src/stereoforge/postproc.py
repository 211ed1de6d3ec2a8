"""Histogram matching and stereo frame packing."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, FrameCountMismatch, InvalidConfig
from .parallel import frame_map
from .tensorio import Video


def match_channel(src: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Map one 8-bit channel so its histogram tracks the reference's.

    Exact integer CDF matching: value v goes to the smallest u with
    F_ref(u) >= F_src(v).  Comparing cum_ref * N_src >= cum_src * N_ref in
    int64 keeps the mapping free of float ties, and because both CDFs are
    non-decreasing the mapping is monotone.
    """
    cum_src = np.cumsum(np.bincount(src.ravel(), minlength=256)).astype(np.int64)
    cum_ref = np.cumsum(np.bincount(ref.ravel(), minlength=256)).astype(np.int64)
    n_src = cum_src[-1]
    n_ref = cum_ref[-1]
    lut = np.searchsorted(cum_ref * n_src, cum_src * n_ref, side="left")
    return lut.astype(np.uint8)[src]


def match_histograms(src: Video, ref: Video,
                     threads: int | None = None) -> Video:
    """Per frame, per channel, remap src's values onto ref's distribution.

    Frame counts must agree; spatial dims may differ (only histograms are
    compared).  Output dims equal src dims.
    """
    if src.frames != ref.frames:
        raise FrameCountMismatch("src and ref frame counts differ",
                                 src=src.frames, ref=ref.frames)

    def one(i, frame):
        out = np.empty_like(frame)
        for c in range(3):
            out[:, :, c] = match_channel(frame[:, :, c], ref.pixels[i][:, :, c])
        return out

    return Video(np.stack(frame_map(one, src.pixels, threads)))


PACK_MODES = ("sbs", "tb", "anaglyph")


def pack(left: Video, right: Video, mode: str = "sbs") -> Video:
    """Combine the two views for display: side-by-side, top-bottom, or
    red/cyan anaglyph (red from the left view, green and blue from the
    right)."""
    if left.pixels.shape != right.pixels.shape:
        raise DimensionMismatch("views have different geometry",
                                left=left.pixels.shape,
                                right=right.pixels.shape)
    if mode == "sbs":
        return Video(np.concatenate([left.pixels, right.pixels], axis=2))
    if mode == "tb":
        return Video(np.concatenate([left.pixels, right.pixels], axis=1))
    if mode == "anaglyph":
        out = right.pixels.copy()
        out[:, :, :, 0] = left.pixels[:, :, :, 0]
        return Video(out)
    raise InvalidConfig(f"mode must be one of {PACK_MODES}", mode=mode)


def unpack(packed: Video, mode: str) -> tuple[Video, Video]:
    """Split an sbs or tb packing back into the two views (lossless)."""
    if mode == "sbs":
        half = packed.width // 2
        return (Video(packed.pixels[:, :, :half]),
                Video(packed.pixels[:, :, half:]))
    if mode == "tb":
        half = packed.height // 2
        return (Video(packed.pixels[:, :half]),
                Video(packed.pixels[:, half:]))
    raise InvalidConfig("only sbs and tb can be unpacked", mode=mode)
