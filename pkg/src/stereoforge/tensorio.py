"""Core array types and on-disk formats.

A clip lives on disk as a directory of per-frame files plus a
``manifest.json``.  Frames are 8-bit RGB PNGs, masks are 8-bit grayscale PNGs
(0 or 255 only), depth is either float PFM or 16-bit PNG with an explicit
scale.  All loads and saves round-trip bit-exactly.

The in-memory types are immutable: their arrays are marked read-only at
construction so instances can be shared freely across threads.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import (
    DecodeError,
    DimensionMismatch,
    FrameCountMismatch,
    IoError,
    MissingManifest,
    NonPositiveDepth,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = "1"
DEFAULT_FRAME_PATTERN = "frame_%05d.png"
DEFAULT_DEPTH_PATTERN = "frame_%05d.pfm"

MIN_SIDE = 8


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Video:
    """F x H x W x 3 stack of 8-bit sRGB frames."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 4 or px.shape[3] != 3:
            raise DimensionMismatch(
                "video pixels must have shape (F, H, W, 3)", shape=px.shape
            )
        if px.dtype != np.uint8:
            raise DimensionMismatch("video pixels must be uint8", dtype=str(px.dtype))
        f, h, w, _ = px.shape
        if f < 1:
            raise DimensionMismatch("video needs at least one frame", frames=f)
        if h < MIN_SIDE or w < MIN_SIDE:
            raise DimensionMismatch(
                f"frame sides must be >= {MIN_SIDE} px", height=h, width=w
            )
        object.__setattr__(self, "pixels", _freeze(px))

    @property
    def frames(self) -> int:
        return self.pixels.shape[0]

    @property
    def height(self) -> int:
        return self.pixels.shape[1]

    @property
    def width(self) -> int:
        return self.pixels.shape[2]

    def frame(self, i: int) -> np.ndarray:
        return self.pixels[i]


@dataclass(frozen=True)
class DepthSequence:
    """F x H x W positive finite depth values (scene units)."""

    depth: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.depth, dtype=np.float32)
        if d.ndim != 3:
            raise DimensionMismatch(
                "depth must have shape (F, H, W)", shape=d.shape
            )
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise NonPositiveDepth("depth values must be positive and finite")
        object.__setattr__(self, "depth", _freeze(d))

    @property
    def frames(self) -> int:
        return self.depth.shape[0]

    @property
    def height(self) -> int:
        return self.depth.shape[1]

    @property
    def width(self) -> int:
        return self.depth.shape[2]

    def frame(self, i: int) -> np.ndarray:
        return self.depth[i]


@dataclass(frozen=True)
class OcclusionMask:
    """F x H x W binary mask; 1 marks a hole to inpaint."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 3:
            raise DimensionMismatch("mask must have shape (F, H, W)", shape=b.shape)
        if b.dtype != np.uint8:
            b = b.astype(np.uint8)
        if not np.all((b == 0) | (b == 1)):
            raise DecodeError("mask values must be 0 or 1")
        object.__setattr__(self, "bits", _freeze(b))

    @property
    def frames(self) -> int:
        return self.bits.shape[0]

    @property
    def height(self) -> int:
        return self.bits.shape[1]

    @property
    def width(self) -> int:
        return self.bits.shape[2]

    def frame(self, i: int) -> np.ndarray:
        return self.bits[i]

    def any_set(self) -> bool:
        return bool(self.bits.any())

    @staticmethod
    def zeros(frames: int, height: int, width: int) -> "OcclusionMask":
        return OcclusionMask(np.zeros((frames, height, width), dtype=np.uint8))


@dataclass(frozen=True)
class Manifest:
    """Sidecar metadata for one frame-sequence directory."""

    frame_count: int
    width: int
    height: int
    version: str = MANIFEST_VERSION
    frame_pattern: str = DEFAULT_FRAME_PATTERN
    depth_encoding: str | None = None  # "pfm" | "png16", depth dirs only
    depth_scale: float | None = None  # units per code, png16 only
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.depth_encoding not in (None, "pfm", "png16"):
            raise DecodeError(
                "unknown depth_encoding", depth_encoding=self.depth_encoding
            )
        if self.depth_encoding == "png16":
            if self.depth_scale is None or self.depth_scale <= 0:
                raise DecodeError("png16 depth needs depth_scale > 0")

    def frame_path(self, dir_path: str, index: int) -> str:
        return os.path.join(dir_path, self.frame_pattern % index)

    def to_json(self) -> dict:
        out = {
            "version": self.version,
            "frame_pattern": self.frame_pattern,
            "frame_count": self.frame_count,
            "width": self.width,
            "height": self.height,
            "extras": dict(self.extras),
        }
        if self.depth_encoding is not None:
            out["depth_encoding"] = self.depth_encoding
            if self.depth_encoding == "png16":
                out["depth_scale"] = self.depth_scale
        return out


def write_manifest(manifest: Manifest, dir_path: str) -> None:
    path = os.path.join(dir_path, MANIFEST_NAME)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write manifest: {exc}", path=path) from exc


def read_manifest(dir_path: str) -> Manifest:
    path = os.path.join(dir_path, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise MissingManifest("no manifest.json in directory", path=dir_path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DecodeError(f"unreadable manifest: {exc}", path=path) from exc
    try:
        return Manifest(
            frame_count=int(raw["frame_count"]),
            width=int(raw["width"]),
            height=int(raw["height"]),
            version=str(raw.get("version", MANIFEST_VERSION)),
            frame_pattern=str(raw.get("frame_pattern", DEFAULT_FRAME_PATTERN)),
            depth_encoding=raw.get("depth_encoding"),
            depth_scale=raw.get("depth_scale"),
            extras=dict(raw.get("extras", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(f"malformed manifest: {exc}", path=path) from exc


def _require_frames(manifest: Manifest, dir_path: str) -> list:
    paths = []
    for i in range(manifest.frame_count):
        p = manifest.frame_path(dir_path, i)
        if not os.path.isfile(p):
            raise FrameCountMismatch(
                "manifest frame_count does not match files present",
                expected=manifest.frame_count,
                missing=os.path.basename(p),
                path=dir_path,
            )
        paths.append(p)
    return paths


def _ensure_dir(dir_path: str) -> None:
    try:
        os.makedirs(dir_path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create directory: {exc}", path=dir_path) from exc


# ---------------------------------------------------------------------------
# Video


def save_video(video: Video, dir_path: str) -> None:
    """Write frames as PNGs plus a manifest; load_video inverts bit-exactly."""
    _ensure_dir(dir_path)
    manifest = Manifest(
        frame_count=video.frames, width=video.width, height=video.height
    )
    write_manifest(manifest, dir_path)
    for i in range(video.frames):
        path = manifest.frame_path(dir_path, i)
        try:
            Image.fromarray(video.pixels[i], mode="RGB").save(path, format="PNG")
        except OSError as exc:
            raise IoError(f"cannot write frame: {exc}", path=path) from exc


def load_video(dir_path: str) -> Video:
    manifest = read_manifest(dir_path)
    paths = _require_frames(manifest, dir_path)
    frames = np.empty(
        (manifest.frame_count, manifest.height, manifest.width, 3), dtype=np.uint8
    )
    for i, path in enumerate(paths):
        arr = _read_rgb_png(path)
        if arr.shape[:2] != (manifest.height, manifest.width):
            raise DimensionMismatch(
                "frame size differs from manifest",
                path=path,
                expected=f"{manifest.width}x{manifest.height}",
                actual=f"{arr.shape[1]}x{arr.shape[0]}",
            )
        frames[i] = arr
    return Video(frames)


def _read_rgb_png(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise DecodeError(
                    "expected 8-bit RGB PNG", path=path, mode=img.mode
                )
            return np.asarray(img, dtype=np.uint8)
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode frame: {exc}", path=path) from exc


def load_frames(dir_path: str, frame_count: int,
                pattern: str = DEFAULT_FRAME_PATTERN) -> Video:
    """Load a frame sequence without requiring a manifest.

    Used to ingest output directories written by external backend processes,
    whose contract is only "write frame_%05d.png".
    """
    arrays = []
    for i in range(frame_count):
        path = os.path.join(dir_path, pattern % i)
        if not os.path.isfile(path):
            raise FrameCountMismatch(
                "expected frame file is missing",
                expected=frame_count,
                missing=os.path.basename(path),
                path=dir_path,
            )
        arrays.append(_read_rgb_png(path))
    first = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.shape != first:
            raise DimensionMismatch(
                "mixed frame dimensions", path=dir_path, frame=i
            )
    return Video(np.stack(arrays))


# ---------------------------------------------------------------------------
# Occlusion masks (8-bit grayscale PNG, 255 -> 1, 0 -> 0)


def save_mask(mask: OcclusionMask, dir_path: str) -> None:
    _ensure_dir(dir_path)
    manifest = Manifest(
        frame_count=mask.frames, width=mask.width, height=mask.height
    )
    write_manifest(manifest, dir_path)
    for i in range(mask.frames):
        path = manifest.frame_path(dir_path, i)
        try:
            Image.fromarray(mask.bits[i] * np.uint8(255), mode="L").save(
                path, format="PNG"
            )
        except OSError as exc:
            raise IoError(f"cannot write mask frame: {exc}", path=path) from exc


def load_mask(dir_path: str) -> OcclusionMask:
    manifest = read_manifest(dir_path)
    paths = _require_frames(manifest, dir_path)
    bits = np.empty(
        (manifest.frame_count, manifest.height, manifest.width), dtype=np.uint8
    )
    for i, path in enumerate(paths):
        try:
            with Image.open(path) as img:
                if img.mode != "L":
                    raise DecodeError(
                        "expected 8-bit grayscale mask PNG", path=path, mode=img.mode
                    )
                arr = np.asarray(img, dtype=np.uint8)
        except DecodeError:
            raise
        except Exception as exc:
            raise DecodeError(f"cannot decode mask: {exc}", path=path) from exc
        if arr.shape != (manifest.height, manifest.width):
            raise DimensionMismatch(
                "mask size differs from manifest", path=path
            )
        bad = (arr != 0) & (arr != 255)
        if bad.any():
            raise DecodeError(
                "mask samples must be 0 or 255",
                path=path,
                offending_value=int(arr[bad][0]),
            )
        bits[i] = arr // 255
    return OcclusionMask(bits)


def load_mask_frames(dir_path: str, frame_count: int,
                     pattern: str = DEFAULT_FRAME_PATTERN) -> OcclusionMask:
    """Load a mask sequence without requiring a manifest (backend protocol)."""
    bits = []
    for i in range(frame_count):
        path = os.path.join(dir_path, pattern % i)
        if not os.path.isfile(path):
            raise FrameCountMismatch(
                "expected mask file is missing",
                expected=frame_count,
                missing=os.path.basename(path),
                path=dir_path,
            )
        try:
            with Image.open(path) as img:
                if img.mode != "L":
                    raise DecodeError("expected 8-bit grayscale mask PNG",
                                      path=path, mode=img.mode)
                arr = np.asarray(img, dtype=np.uint8)
        except DecodeError:
            raise
        except Exception as exc:
            raise DecodeError(f"cannot decode mask: {exc}", path=path) from exc
        bad = (arr != 0) & (arr != 255)
        if bad.any():
            raise DecodeError("mask samples must be 0 or 255", path=path,
                              offending_value=int(arr[bad][0]))
        bits.append(arr // 255)
    first = bits[0].shape
    for i, arr in enumerate(bits):
        if arr.shape != first:
            raise DimensionMismatch("mixed mask dimensions",
                                    path=dir_path, frame=i)
    return OcclusionMask(np.stack(bits))


# ---------------------------------------------------------------------------
# Depth (PFM or 16-bit PNG with scale)


def save_depth(depth: DepthSequence, dir_path: str, encoding: str = "pfm",
               depth_scale: float = 0.001) -> None:
    _ensure_dir(dir_path)
    if encoding == "pfm":
        manifest = Manifest(
            frame_count=depth.frames,
            width=depth.width,
            height=depth.height,
            frame_pattern=DEFAULT_DEPTH_PATTERN,
            depth_encoding="pfm",
        )
        write_manifest(manifest, dir_path)
        for i in range(depth.frames):
            _write_pfm(manifest.frame_path(dir_path, i), depth.depth[i])
    elif encoding == "png16":
        manifest = Manifest(
            frame_count=depth.frames,
            width=depth.width,
            height=depth.height,
            depth_encoding="png16",
            depth_scale=depth_scale,
        )
        codes = np.round(depth.depth / depth_scale)
        if np.any(codes < 1) or np.any(codes > 65535):
            raise IoError(
                "depth out of range for png16 at this depth_scale",
                depth_scale=depth_scale,
            )
        write_manifest(manifest, dir_path)
        codes = codes.astype(np.uint16)
        for i in range(depth.frames):
            path = manifest.frame_path(dir_path, i)
            try:
                Image.fromarray(codes[i]).save(path, format="PNG")
            except OSError as exc:
                raise IoError(f"cannot write depth frame: {exc}", path=path) from exc
    else:
        raise IoError("unknown depth encoding", encoding=encoding)


def load_depth(dir_path: str) -> DepthSequence:
    manifest = read_manifest(dir_path)
    if manifest.depth_encoding is None:
        raise DecodeError(
            "manifest does not declare depth_encoding", path=dir_path
        )
    paths = _require_frames(manifest, dir_path)
    frames = np.empty(
        (manifest.frame_count, manifest.height, manifest.width), dtype=np.float32
    )
    for i, path in enumerate(paths):
        if manifest.depth_encoding == "pfm":
            arr = _read_pfm(path)
        else:
            try:
                with Image.open(path) as img:
                    codes = np.asarray(img)
            except Exception as exc:
                raise DecodeError(f"cannot decode depth: {exc}", path=path) from exc
            if codes.dtype not in (np.uint16, np.int32):
                raise DecodeError(
                    "expected 16-bit PNG depth", path=path, dtype=str(codes.dtype)
                )
            if np.any(codes == 0):
                raise NonPositiveDepth(
                    "png16 code 0 marks missing depth", path=path
                )
            arr = codes.astype(np.float32) * np.float32(manifest.depth_scale)
        if arr.shape != (manifest.height, manifest.width):
            raise DimensionMismatch("depth size differs from manifest", path=path)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise NonPositiveDepth("depth file holds non-positive values", path=path)
        frames[i] = arr
    return DepthSequence(frames)


_PFM_HEADER = re.compile(rb"^(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9eE.]+)\s")


def _write_pfm(path: str, data: np.ndarray) -> None:
    """Grayscale PFM, little-endian (negative scale), rows bottom-to-top."""
    h, w = data.shape
    try:
        with open(path, "wb") as fh:
            fh.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
            fh.write(np.flipud(data).astype("<f4").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write PFM: {exc}", path=path) from exc


def _read_pfm(path: str) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read PFM: {exc}", path=path) from exc
    m = _PFM_HEADER.match(blob)
    if not m:
        raise DecodeError("not a PFM file", path=path)
    kind, w, h = m.group(1), int(m.group(2)), int(m.group(3))
    if kind != b"Pf":
        raise DecodeError("only grayscale PFM is supported", path=path)
    scale = float(m.group(4))
    dtype = "<f4" if scale < 0 else ">f4"
    body = blob[m.end():]
    count = w * h
    data = np.frombuffer(body, dtype=dtype, count=count)
    if data.size != count:
        raise DecodeError("truncated PFM payload", path=path)
    data = np.flipud(data.reshape(h, w)).astype(np.float32)
    norm = abs(scale)
    if norm != 1.0:
        data = data * np.float32(norm)
    return data


# ---------------------------------------------------------------------------
# Geometry checks (used by every stage before touching pixel data)


def ensure_same_geometry(a, b, what: str = "inputs") -> None:
    if (a.frames, a.height, a.width) != (b.frames, b.height, b.width):
        raise DimensionMismatch(
            f"{what} have mismatched geometry",
            a=f"{a.frames}x{a.height}x{a.width}",
            b=f"{b.frames}x{b.height}x{b.width}",
        )


def drop_leading_frames(video: Video, drop: int) -> Video:
    if drop <= 0:
        return video
    if drop >= video.frames:
        raise DimensionMismatch(
            "cannot drop all frames", frames=video.frames, drop=drop
        )
    return Video(video.pixels[drop:])
