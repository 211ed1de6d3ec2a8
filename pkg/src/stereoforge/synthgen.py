"""Deterministic renderer for synthetic stereo clips with ground-truth depth.

Geometry is a rectified parallel rig: the left camera sits at the origin
looking down +z, the right camera is displaced by the baseline along +x,
and both share one focal length, so disparity is purely horizontal and
equals focal_px * baseline_m / z in closed form.

Scenes are fronto-parallel textured quads drifting in front of a textured
background plane.  Rasterization is nearest-sample (a pixel takes the
texture value at the exact world point its center ray hits, no filtering)
with a per-view z-buffer, and the winning z per pixel is recorded as the
ground-truth depth.  Everything is a pure function of (seed, config), so
renders are bit-identical across runs and thread counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .parallel import frame_map
from .tensorio import MIN_SIDE, DepthSequence, Video
from .texture import shade_rgb

MIN_SCENE_DEPTH = 0.1  # m; nothing may come closer to the rig than this

BASELINE_MEAN = 0.065
BASELINE_STD = 0.001
BASELINE_CLAMP = (0.060, 0.070)


@dataclass(frozen=True)
class CameraRig:
    """Rectified parallel stereo rig (left camera at the origin)."""

    focal_px: float
    baseline_m: float
    width: int
    height: int

    def __post_init__(self):
        if self.focal_px <= 0:
            raise InvalidConfig("focal_px must be > 0", focal_px=self.focal_px)
        if self.baseline_m <= 0:
            raise InvalidConfig("baseline_m must be > 0", baseline_m=self.baseline_m)
        if self.width < MIN_SIDE or self.height < MIN_SIDE:
            raise InvalidConfig(
                f"render size must be >= {MIN_SIDE} px",
                width=self.width,
                height=self.height,
            )


@dataclass(frozen=True)
class QuadSpec:
    """Fronto-parallel square quad: center, half-extent, per-frame velocity."""

    center: tuple[float, float, float]  # m, world coords at frame 0
    half_extent: float  # m
    velocity: tuple[float, float, float]  # m per frame
    texture_seed: int
    wavelength_m: float  # coarsest texture detail, world units

    def center_at(self, frame: int) -> tuple[float, float, float]:
        cx, cy, cz = self.center
        vx, vy, vz = self.velocity
        return (cx + vx * frame, cy + vy * frame, cz + vz * frame)


@dataclass(frozen=True)
class BackgroundSpec:
    """Infinite textured plane closing the frustum behind the quads."""

    depth_m: float
    texture_seed: int
    wavelength_m: float


@dataclass(frozen=True)
class SceneSpec:
    """Complete recipe for one clip: rig, quads, background, texture knobs."""

    seed: int
    rig: CameraRig
    objects: tuple[QuadSpec, ...]
    background: BackgroundSpec
    frame_count: int
    texture_octaves: int = 3
    shade_low: int = 16
    shade_high: int = 240

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidConfig("frame_count must be >= 1",
                                frame_count=self.frame_count)
        if self.background.depth_m <= MIN_SCENE_DEPTH:
            raise InvalidConfig("background too close",
                                depth_m=self.background.depth_m)
        last = self.frame_count - 1
        for i, quad in enumerate(self.objects):
            # z(t) is linear in t, so checking both endpoints is exact
            z0 = quad.center[2]
            z1 = quad.center_at(last)[2]
            if min(z0, z1) <= MIN_SCENE_DEPTH:
                raise InvalidConfig(
                    "quad crosses the near plane during the clip",
                    quad=i, z_start=z0, z_end=z1,
                )
            if quad.half_extent <= 0:
                raise InvalidConfig("quad half_extent must be > 0", quad=i)


@dataclass(frozen=True)
class SceneConfig:
    """Knobs for sample_scene; defaults give a desk-scale six-quad scene."""

    num_objects: int = 6
    depth_range: tuple[float, float] = (1.5, 5.0)
    speed_range: tuple[float, float] = (0.005, 0.04)  # m/frame magnitude
    size_range: tuple[float, float] = (0.2, 0.55)  # half-extent, m
    frame_count: int = 21
    width: int = 1024
    height: int = 512
    focal_px: float | None = None  # default: width / 2
    bg_depth: float | None = None  # default: depth_range max + 2 m
    texture_wavelength_px: float = 24.0  # coarsest detail at spawn depth
    texture_octaves: int = 3
    shade_low: int = 16
    shade_high: int = 240

    def __post_init__(self):
        if self.num_objects < 1:
            raise InvalidConfig("num_objects must be >= 1",
                                num_objects=self.num_objects)
        lo, hi = self.depth_range
        if not (MIN_SCENE_DEPTH < lo < hi):
            raise InvalidConfig(
                f"depth_range must satisfy {MIN_SCENE_DEPTH} < lo < hi",
                depth_range=self.depth_range,
            )
        slo, shi = self.speed_range
        if not (0 <= slo <= shi):
            raise InvalidConfig("speed_range must satisfy 0 <= lo <= hi",
                                speed_range=self.speed_range)
        zlo, zhi = self.size_range
        if not (0 < zlo <= zhi):
            raise InvalidConfig("size_range must satisfy 0 < lo <= hi",
                                size_range=self.size_range)
        if self.frame_count < 1:
            raise InvalidConfig("frame_count must be >= 1",
                                frame_count=self.frame_count)
        if self.width < MIN_SIDE or self.height < MIN_SIDE:
            raise InvalidConfig("render size too small",
                                width=self.width, height=self.height)
        if self.bg_depth is not None and self.bg_depth <= hi:
            raise InvalidConfig("bg_depth must exceed depth_range max",
                                bg_depth=self.bg_depth)
        if not (0 <= self.shade_low < self.shade_high <= 255):
            raise InvalidConfig("shade range must satisfy 0 <= low < high <= 255")

    @property
    def effective_focal(self) -> float:
        return self.focal_px if self.focal_px is not None else self.width / 2.0

    @property
    def effective_bg_depth(self) -> float:
        return self.bg_depth if self.bg_depth is not None else self.depth_range[1] + 2.0


@dataclass(frozen=True)
class StereoClip:
    """One rendered clip: both views plus per-view ground-truth depth."""

    left: Video
    right: Video
    left_depth: DepthSequence
    right_depth: DepthSequence


def sample_baseline(rng: np.random.Generator) -> float:
    """Draw a baseline in meters: N(0.065, 0.001) clamped to [0.060, 0.070]."""
    return float(np.clip(rng.normal(BASELINE_MEAN, BASELINE_STD), *BASELINE_CLAMP))


def sample_scene(seed: int, config: SceneConfig | None = None) -> SceneSpec:
    """Deterministically sample a scene (and its rig) from a seed.

    The draw order below is frozen; changing it would silently re-key every
    seed, so treat it as part of the on-disk format.
    """
    config = config or SceneConfig()
    rng = np.random.default_rng(seed)
    focal = config.effective_focal
    bg_depth = config.effective_bg_depth

    rig = CameraRig(
        focal_px=focal,
        baseline_m=sample_baseline(rng),
        width=config.width,
        height=config.height,
    )
    px_wl = config.texture_wavelength_px
    background = BackgroundSpec(
        depth_m=bg_depth,
        texture_seed=int(rng.integers(0, 2**63)),
        wavelength_m=bg_depth * px_wl / focal,
    )

    last = config.frame_count - 1
    z_floor = MIN_SCENE_DEPTH + 0.05
    z_ceil = bg_depth - 0.2
    quads = []
    for _ in range(config.num_objects):
        tex_seed = int(rng.integers(0, 2**63))
        half = float(rng.uniform(*config.size_range))
        cz = float(rng.uniform(*config.depth_range))
        # lateral placement as a fraction of the frustum at this depth
        fx = float(rng.uniform(-0.55, 0.55))
        fy = float(rng.uniform(-0.55, 0.55))
        cx = fx * (config.width / 2.0) * cz / focal
        cy = fy * (config.height / 2.0) * cz / focal
        speed = float(rng.uniform(*config.speed_range))
        direction = rng.normal(size=3)
        norm = float(np.linalg.norm(direction))
        direction = direction / norm if norm > 1e-9 else np.array([0.0, 0.0, 1.0])
        vx, vy, vz = (speed * direction).tolist()
        # keep the whole z path inside (z_floor, z_ceil): flip the z drift
        # if it would escape, freeze it if flipping is not enough
        if not (z_floor < cz + vz * last < z_ceil):
            vz = -vz
        if not (z_floor < cz + vz * last < z_ceil):
            vz = 0.0
        quads.append(QuadSpec(
            center=(cx, cy, cz),
            half_extent=half,
            velocity=(vx, vy, vz),
            texture_seed=tex_seed,
            wavelength_m=cz * px_wl / focal,
        ))

    return SceneSpec(
        seed=seed,
        rig=rig,
        objects=tuple(quads),
        background=background,
        frame_count=config.frame_count,
        texture_octaves=config.texture_octaves,
        shade_low=config.shade_low,
        shade_high=config.shade_high,
    )


def _shade_plane(scene: SceneSpec, rig: CameraRig, cam_x: float) -> np.ndarray:
    """Full-frame render of the static background plane for one camera."""
    bg = scene.background
    z = bg.depth_m
    f = rig.focal_px
    xs = cam_x + (np.arange(rig.width) - rig.width / 2.0) * z / f
    ys = (np.arange(rig.height) - rig.height / 2.0) * z / f
    return shade_rgb(
        bg.texture_seed, xs[None, :], ys[:, None], bg.wavelength_m,
        scene.texture_octaves, scene.shade_low, scene.shade_high,
    )


def _paint_quads(scene: SceneSpec, rig: CameraRig, frame: int, cam_x: float,
                 image: np.ndarray, zbuf: np.ndarray) -> None:
    """Splat every quad into (image, zbuf) for one camera, far to near."""
    w, h, f = rig.width, rig.height, rig.focal_px
    # stable far-to-near order + strict z test => ties resolve to list order
    order = sorted(range(len(scene.objects)),
                   key=lambda i: -scene.objects[i].center_at(frame)[2])
    for i in order:
        quad = scene.objects[i]
        cx, cy, cz = quad.center_at(frame)
        e = quad.half_extent
        # pixel centers whose rays hit the quad: closed interval in u and v
        u_lo = f * (cx - e - cam_x) / cz + w / 2.0
        u_hi = f * (cx + e - cam_x) / cz + w / 2.0
        v_lo = f * (cy - e) / cz + h / 2.0
        v_hi = f * (cy + e) / cz + h / 2.0
        u0 = max(int(np.ceil(u_lo)), 0)
        u1 = min(int(np.floor(u_hi)), w - 1)
        v0 = max(int(np.ceil(v_lo)), 0)
        v1 = min(int(np.floor(v_hi)), h - 1)
        if u0 > u1 or v0 > v1:
            continue
        win = zbuf[v0:v1 + 1, u0:u1 + 1] > cz
        if not win.any():
            continue
        xs = cam_x + (np.arange(u0, u1 + 1) - w / 2.0) * cz / f
        ys = (np.arange(v0, v1 + 1) - h / 2.0) * cz / f
        colors = shade_rgb(
            quad.texture_seed, xs[None, :], ys[:, None], quad.wavelength_m,
            scene.texture_octaves, scene.shade_low, scene.shade_high,
        )
        patch = image[v0:v1 + 1, u0:u1 + 1]
        patch[win] = colors[win]
        zpatch = zbuf[v0:v1 + 1, u0:u1 + 1]
        zpatch[win] = cz


def render_stereo(scene: SceneSpec, rig: CameraRig | None = None,
                  threads: int | None = None) -> StereoClip:
    """Render both views and both ground-truth depth sequences.

    The rig defaults to the one sampled into the scene; passing another rig
    re-renders the same world through different cameras.
    """
    rig = rig if rig is not None else scene.rig
    h, w = rig.height, rig.width
    bg_z = scene.background.depth_m
    # backgrounds are static, render them once per view
    bg = {0.0: _shade_plane(scene, rig, 0.0),
          rig.baseline_m: _shade_plane(scene, rig, rig.baseline_m)}

    def one(idx: int, _item) -> tuple:
        out = []
        for cam_x in (0.0, rig.baseline_m):
            image = bg[cam_x].copy()
            zbuf = np.full((h, w), bg_z, dtype=np.float64)
            _paint_quads(scene, rig, idx, cam_x, image, zbuf)
            out.append((image, zbuf.astype(np.float32)))
        return out

    frames = frame_map(one, range(scene.frame_count), threads)
    left = np.stack([f[0][0] for f in frames])
    right = np.stack([f[1][0] for f in frames])
    left_d = np.stack([f[0][1] for f in frames])
    right_d = np.stack([f[1][1] for f in frames])
    return StereoClip(
        left=Video(left),
        right=Video(right),
        left_depth=DepthSequence(left_d),
        right_depth=DepthSequence(right_d),
    )
