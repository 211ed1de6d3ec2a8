"""HTTP API tests over the in-process test client."""

import numpy as np
from fastapi.testclient import TestClient

from stereoforge import __version__
from stereoforge.service.app import app
from stereoforge.tensorio import load_video, save_video

from conftest import make_video

client = TestClient(app)


def test_health_reports_ok():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_pack_endpoint_writes_side_by_side(tmp_path):
    left = make_video(seed=1, frames=2, height=16, width=16)
    right = make_video(seed=2, frames=2, height=16, width=16)
    save_video(left, tmp_path / "left")
    save_video(right, tmp_path / "right")

    resp = client.post(
        "/v1/pack",
        json={
            "left_dir": str(tmp_path / "left"),
            "right_dir": str(tmp_path / "right"),
            "out": str(tmp_path / "packed"),
            "mode": "sbs",
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["mode"] == "sbs"
    assert body["frames"] == 2
    assert body["width"] == 32
    assert body["height"] == 16

    packed = load_video(tmp_path / "packed")
    assert np.array_equal(packed.pixels[:, :, :16], left.pixels)
    assert np.array_equal(packed.pixels[:, :, 16:], right.pixels)


def test_metrics_endpoint_returns_per_frame_values(tmp_path):
    video = make_video(seed=3, frames=3, height=16, width=16)
    save_video(video, tmp_path / "a")
    save_video(video, tmp_path / "b")

    resp = client.post(
        "/v1/metrics",
        json={
            "kind": "psnr",
            "a_dir": str(tmp_path / "a"),
            "b_dir": str(tmp_path / "b"),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["metric"] == "psnr"
    assert len(body["per_frame"]) == 3
    assert body["mean"] == 99.0


def test_domain_error_maps_to_400_with_error_body(tmp_path):
    left = make_video(seed=4, frames=2, height=16, width=16)
    right = make_video(seed=5, frames=2, height=16, width=8)
    save_video(left, tmp_path / "left")
    save_video(right, tmp_path / "right")

    resp = client.post(
        "/v1/pack",
        json={
            "left_dir": str(tmp_path / "left"),
            "right_dir": str(tmp_path / "right"),
            "out": str(tmp_path / "packed"),
        },
    )
    assert resp.status_code == 400
    body = resp.json()
    assert body["code"] == "DimensionMismatch"
    assert body["message"]
    assert isinstance(body["context"], dict)


def test_missing_input_directory_maps_to_400(tmp_path):
    resp = client.post(
        "/v1/metrics",
        json={
            "kind": "psnr",
            "a_dir": str(tmp_path / "nowhere_a"),
            "b_dir": str(tmp_path / "nowhere_b"),
        },
    )
    assert resp.status_code == 400
    assert resp.json()["code"] == "MissingManifest"
