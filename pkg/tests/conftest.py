"""Shared fixtures and small-array factories for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from stereoforge.tensorio import DepthSequence, OcclusionMask, Video


def make_video(seed: int, frames: int = 3, height: int = 16, width: int = 16) -> Video:
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 256, size=(frames, height, width, 3), dtype=np.uint8)
    return Video(data)


def make_depth(seed: int, frames: int = 3, height: int = 16, width: int = 16,
               low: float = 1.0, high: float = 5.0) -> DepthSequence:
    rng = np.random.default_rng(seed)
    data = rng.uniform(low, high, size=(frames, height, width)).astype(np.float32)
    return DepthSequence(data)


def make_mask(seed: int, frames: int = 3, height: int = 16, width: int = 16,
              fill: float = 0.2) -> OcclusionMask:
    rng = np.random.default_rng(seed)
    data = (rng.random((frames, height, width)) < fill).astype(np.uint8)
    return OcclusionMask(data)


@pytest.fixture
def tiny_video() -> Video:
    return make_video(7, frames=2, height=8, width=8)


@pytest.fixture
def tiny_depth() -> DepthSequence:
    return make_depth(7, frames=2, height=8, width=8)
