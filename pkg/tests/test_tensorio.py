"""Round trips and validation for the frame, depth, and mask containers."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from stereoforge.errors import (
    DecodeError,
    DimensionMismatch,
    FrameCountMismatch,
    MissingManifest,
    NonPositiveDepth,
)
from stereoforge.tensorio import (
    DepthSequence,
    Manifest,
    OcclusionMask,
    Video,
    drop_leading_frames,
    ensure_same_geometry,
    load_depth,
    load_frames,
    load_mask,
    load_video,
    read_manifest,
    save_depth,
    save_mask,
    save_video,
    write_manifest,
)
from tests.conftest import make_depth, make_mask, make_video


def test_video_rejects_wrong_dtype():
    with pytest.raises(DimensionMismatch):
        Video(np.zeros((2, 8, 8, 3), dtype=np.float32))


def test_video_rejects_small_side():
    with pytest.raises(DimensionMismatch):
        Video(np.zeros((2, 4, 8, 3), dtype=np.uint8))


def test_video_rejects_missing_channel():
    with pytest.raises(DimensionMismatch):
        Video(np.zeros((2, 8, 8), dtype=np.uint8))


def test_video_pixels_are_read_only(tiny_video):
    with pytest.raises(ValueError):
        tiny_video.pixels[0, 0, 0, 0] = 1


def test_depth_rejects_zero():
    data = np.ones((1, 8, 8), dtype=np.float32)
    data[0, 3, 3] = 0.0
    with pytest.raises(NonPositiveDepth):
        DepthSequence(data)


def test_depth_rejects_nan():
    data = np.ones((1, 8, 8), dtype=np.float32)
    data[0, 0, 0] = np.nan
    with pytest.raises(NonPositiveDepth):
        DepthSequence(data)


def test_mask_rejects_value_two():
    data = np.zeros((1, 8, 8), dtype=np.uint8)
    data[0, 1, 1] = 2
    with pytest.raises(DecodeError):
        OcclusionMask(data)


def test_video_round_trip(tmp_path):
    video = make_video(3, frames=4)
    save_video(video, str(tmp_path))
    back = load_video(str(tmp_path))
    assert np.array_equal(back.pixels, video.pixels)


def test_video_writes_expected_names(tmp_path):
    save_video(make_video(3, frames=2), str(tmp_path))
    assert (tmp_path / "frame_00000.png").exists()
    assert (tmp_path / "frame_00001.png").exists()
    assert (tmp_path / "manifest.json").exists()


def test_load_video_missing_frame(tmp_path):
    save_video(make_video(5, frames=16), str(tmp_path))
    (tmp_path / "frame_00015.png").unlink()
    with pytest.raises(FrameCountMismatch):
        load_video(str(tmp_path))


def test_load_video_without_manifest(tmp_path):
    save_video(make_video(5, frames=2), str(tmp_path))
    (tmp_path / "manifest.json").unlink()
    with pytest.raises(MissingManifest):
        load_video(str(tmp_path))


def test_mask_round_trip_and_png_encoding(tmp_path):
    mask = make_mask(11, frames=3)
    save_mask(mask, str(tmp_path))
    # set pixels are stored as 255 so mask PNGs are legible in a viewer
    raw = np.asarray(Image.open(tmp_path / "frame_00000.png"))
    assert set(np.unique(raw)) <= {0, 255}
    back = load_mask(str(tmp_path))
    assert np.array_equal(back.bits, mask.bits)


def test_load_mask_rejects_gray_values(tmp_path):
    Image.fromarray(np.full((8, 8), 7, dtype=np.uint8), mode="L").save(
        tmp_path / "frame_00000.png"
    )
    write_manifest(Manifest(frame_count=1, width=8, height=8), str(tmp_path))
    with pytest.raises(DecodeError):
        load_mask(str(tmp_path))


def test_depth_pfm_round_trip(tmp_path):
    depth = make_depth(13, frames=3)
    save_depth(depth, str(tmp_path), encoding="pfm")
    back = load_depth(str(tmp_path))
    assert np.array_equal(back.depth, depth.depth)


def test_depth_png16_round_trip_within_half_code(tmp_path):
    depth = make_depth(17, frames=2)
    save_depth(depth, str(tmp_path), encoding="png16", depth_scale=0.001)
    back = load_depth(str(tmp_path))
    assert np.max(np.abs(back.depth - depth.depth)) <= 0.001 / 2 + 1e-6


def test_depth_png16_decodes_code_times_scale(tmp_path):
    codes = np.full((8, 8), 1000, dtype=np.uint16)
    Image.fromarray(codes).save(tmp_path / "frame_00000.png")
    write_manifest(
        Manifest(frame_count=1, width=8, height=8,
                 depth_encoding="png16", depth_scale=0.001),
        str(tmp_path),
    )
    back = load_depth(str(tmp_path))
    assert back.depth.shape == (1, 8, 8)
    assert np.all(back.depth == np.float32(1.0))


def test_depth_png16_zero_code_rejected(tmp_path):
    codes = np.zeros((8, 8), dtype=np.uint16)
    Image.fromarray(codes).save(tmp_path / "frame_00000.png")
    write_manifest(
        Manifest(frame_count=1, width=8, height=8,
                 depth_encoding="png16", depth_scale=0.001),
        str(tmp_path),
    )
    with pytest.raises(NonPositiveDepth):
        load_depth(str(tmp_path))


def test_pfm_bytes_are_little_endian_bottom_up(tmp_path):
    depth = make_depth(19, frames=1, height=8, width=8)
    save_depth(depth, str(tmp_path), encoding="pfm")
    blob = (tmp_path / "frame_00000.pfm").read_bytes()
    header, rest = blob.split(b"\n", 1)
    assert header == b"Pf"
    dims, rest = rest.split(b"\n", 1)
    assert dims == b"8 8"
    scale, payload = rest.split(b"\n", 1)
    assert float(scale) == -1.0
    rows = np.frombuffer(payload, dtype="<f4").reshape(8, 8)
    assert np.array_equal(np.flipud(rows), depth.depth[0])


def test_manifest_round_trip(tmp_path):
    manifest = Manifest(frame_count=4, width=32, height=16)
    write_manifest(manifest, str(tmp_path))
    assert read_manifest(str(tmp_path)) == manifest


def test_manifest_rejects_bad_encoding():
    with pytest.raises(DecodeError):
        Manifest(frame_count=1, width=8, height=8, depth_encoding="exr")


def test_manifest_png16_requires_scale():
    with pytest.raises(DecodeError):
        Manifest(frame_count=1, width=8, height=8, depth_encoding="png16")


def test_load_frames_without_manifest(tmp_path):
    video = make_video(23, frames=3)
    save_video(video, str(tmp_path))
    (tmp_path / "manifest.json").unlink()
    back = load_frames(str(tmp_path), frame_count=3)
    assert np.array_equal(back.pixels, video.pixels)


def test_ensure_same_geometry_rejects_width_mismatch():
    a = make_video(1, frames=2, height=8, width=16)
    b = make_video(2, frames=2, height=8, width=8)
    with pytest.raises(DimensionMismatch):
        ensure_same_geometry(a, b)


def test_drop_leading_frames():
    video = make_video(29, frames=6)
    trimmed = drop_leading_frames(video, 2)
    assert trimmed.frames == 4
    assert np.array_equal(trimmed.pixels, video.pixels[2:])


def test_drop_all_frames_rejected():
    video = make_video(29, frames=3)
    with pytest.raises(DimensionMismatch):
        drop_leading_frames(video, 3)
