"""Operation handlers: one function per pipeline verb.

Each handler takes a request model, moves pixels between directories, and
returns a response model.  Domain failures raise StereoforgeError
subclasses; transports translate them (CLI: JSON on stderr + exit 1,
HTTP: status 400 with the same body).
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from ..degrade import (
    DegradationRanges,
    DegradationRecipe,
    degrade_video,
    sample_recipe,
)
from ..errors import InvalidConfig
from ..inpaint import ConvertConfig, convert_stereo
from ..metrics import (
    psnr_per_frame,
    ssim_per_frame,
    temporal_consistency_per_pair,
    view_consistency_per_frame,
)
from ..postproc import match_histograms, pack
from ..synthgen import SceneConfig, render_stereo, sample_scene
from ..tensorio import (
    DepthSequence,
    OcclusionMask,
    Video,
    load_depth,
    load_mask,
    load_video,
    save_depth,
    save_mask,
    save_video,
)
from ..warp import depth_to_disparity, warp_video
from .schemas import (
    ConvertRequest,
    ConvertResponse,
    DegradeRequest,
    DegradeResponse,
    GenRequest,
    GenResponse,
    HistmatchRequest,
    HistmatchResponse,
    MetricsRequest,
    MetricsResponse,
    PackRequest,
    PackResponse,
    WarpRequest,
    WarpResponse,
)

RECIPE_FILE = "recipe.json"


def run_gen(req: GenRequest) -> GenResponse:
    if req.drop < 0 or req.drop >= req.frames:
        raise InvalidConfig("drop must be in [0, frames)", drop=req.drop,
                            frames=req.frames)
    config = SceneConfig(
        num_objects=req.objects,
        frame_count=req.frames,
        width=req.width,
        height=req.height,
    )
    scene = sample_scene(req.seed, config)
    clip = render_stereo(scene, threads=req.threads)
    d = req.drop
    left = Video(clip.left.pixels[d:])
    right = Video(clip.right.pixels[d:])
    left_depth = DepthSequence(clip.left_depth.depth[d:])
    right_depth = DepthSequence(clip.right_depth.depth[d:])

    paths = {name: os.path.join(req.out, name)
             for name in ("left", "right", "depth_left", "depth_right")}
    save_video(left, paths["left"])
    save_video(right, paths["right"])
    save_depth(left_depth, paths["depth_left"])
    save_depth(right_depth, paths["depth_right"])
    return GenResponse(
        out=req.out,
        left=paths["left"],
        right=paths["right"],
        depth_left=paths["depth_left"],
        depth_right=paths["depth_right"],
        frames=left.frames,
        width=left.width,
        height=left.height,
        focal_px=scene.rig.focal_px,
        baseline_m=scene.rig.baseline_m,
        seed=req.seed,
    )


def run_warp(req: WarpRequest) -> WarpResponse:
    video = load_video(req.input_dir)
    depth = load_depth(req.depth_dir)
    if req.mode == "metric":
        if req.focal_px is None or req.baseline_m is None:
            raise InvalidConfig("metric mode needs focal_px and baseline_m")
        disparity = depth_to_disparity(depth, "metric",
                                       focal_px=req.focal_px,
                                       baseline_m=req.baseline_m)
        zdepth = depth
    elif req.mode == "scaled":
        disparity = depth_to_disparity(depth, "scaled", s=req.scale)
        zdepth = None
    else:
        raise InvalidConfig("mode must be scaled or metric", mode=req.mode)
    warped, mask = warp_video(
        video, disparity, zdepth,
        fill_span=req.fill,
        dilate_radius=req.dilate,
        dilate_iterations=req.dilate_iterations,
        threads=req.threads,
    )
    warped_dir = os.path.join(req.out, "warped")
    mask_dir = os.path.join(req.out, "mask")
    save_video(warped, warped_dir)
    save_mask(mask, mask_dir)
    return WarpResponse(
        warped=warped_dir,
        mask=mask_dir,
        frames=video.frames,
        mode=req.mode,
        scale=req.scale if req.mode == "scaled" else None,
        focal_px=req.focal_px if req.mode == "metric" else None,
        baseline_m=req.baseline_m if req.mode == "metric" else None,
        fill=req.fill,
        dilate=req.dilate,
    )


_STAGE_ALIASES = {
    "blur": "blur",
    "down": "resize_down",
    "resize_down": "resize_down",
    "noise": "noise",
    "jpeg": "jpeg",
}


def _parse_stages(spec: str) -> tuple[str, ...]:
    names = [s.strip() for s in spec.split(",") if s.strip()]
    stages = []
    for name in names:
        if name not in _STAGE_ALIASES:
            raise InvalidConfig("unknown stage", stage=name,
                                known=sorted(set(_STAGE_ALIASES)))
        stages.append(_STAGE_ALIASES[name])
    return tuple(stages)


def _parse_size(spec: str) -> tuple[int, int]:
    try:
        w, h = spec.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise InvalidConfig("size must look like 256x128", size=spec) from exc


def run_degrade(req: DegradeRequest) -> DegradeResponse:
    video = load_video(req.input_dir)
    passes = 2 if req.second_order else 1
    recipes = []
    for i in range(passes):
        recipe = sample_recipe(req.seed, DegradationRanges(), pass_index=i)
        if req.target is not None:
            w, h = _parse_size(req.target)
            recipe = dataclasses.replace(recipe, target_w=w, target_h=h)
        if req.stages is not None:
            recipe = dataclasses.replace(recipe,
                                         stages=_parse_stages(req.stages))
        recipes.append(recipe)
    out = video
    for recipe in recipes:
        out = degrade_video(out, recipe, threads=req.threads)
    save_video(out, req.out)
    recipe_path = os.path.join(req.out, RECIPE_FILE)
    payload = {"version": "1", "passes": [r.to_json() for r in recipes]}
    with open(recipe_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return DegradeResponse(
        out=req.out,
        recipe_path=recipe_path,
        passes=[r.to_json() for r in recipes],
        frames=out.frames,
    )


def run_convert(req: ConvertRequest) -> ConvertResponse:
    left = load_video(req.left_dir)
    depth = load_depth(req.depth_dir)
    cfg = ConvertConfig(
        scale_mode=req.scale_mode,
        s=req.scale,
        focal_px=req.focal_px,
        baseline_m=req.baseline_m,
        fill_span=req.fill,
        dilate_radius=req.dilate,
        dilate_iterations=req.dilate_iterations,
        backend=req.backend,
        hist_match=req.hist_match,
        hist_ref=req.hist_ref,
        timeout_s=req.timeout_s,
        workdir=req.workdir or os.path.join(req.out, "work"),
        threads=req.threads,
    )
    result = convert_stereo(left, depth, cfg)
    left_dir = os.path.join(req.out, "left")
    right_dir = os.path.join(req.out, "right")
    mask_dir = os.path.join(req.out, "mask")
    save_video(result.left_out, left_dir)
    save_video(result.right_out, right_dir)
    save_mask(result.mask, mask_dir)
    return ConvertResponse(
        left=left_dir,
        right=right_dir,
        mask=mask_dir,
        frames=left.frames,
        backend=req.backend,
        scale_mode=req.scale_mode,
        scale=req.scale if req.scale_mode == "scaled" else None,
        hist_match=req.hist_match,
    )


def run_histmatch(req: HistmatchRequest) -> HistmatchResponse:
    src = load_video(req.src_dir)
    ref = load_video(req.ref_dir)
    out = match_histograms(src, ref, threads=req.threads)
    save_video(out, req.out)
    return HistmatchResponse(out=req.out, frames=out.frames)


def run_pack(req: PackRequest) -> PackResponse:
    left = load_video(req.left_dir)
    right = load_video(req.right_dir)
    packed = pack(left, right, req.mode)
    save_video(packed, req.out)
    return PackResponse(out=req.out, mode=req.mode, frames=packed.frames,
                        width=packed.width, height=packed.height)


def run_metrics(req: MetricsRequest) -> MetricsResponse:
    a = load_video(req.a_dir)
    if req.kind in ("psnr", "ssim", "view") and req.b_dir is None:
        raise InvalidConfig(f"kind={req.kind} needs a second directory",
                            kind=req.kind)
    if req.kind == "psnr":
        b = load_video(req.b_dir)
        mask = load_mask(req.mask_dir) if req.mask_dir else None
        per = psnr_per_frame(a, b, mask)
        name = "psnr"
    elif req.kind == "ssim":
        b = load_video(req.b_dir)
        per = ssim_per_frame(a, b)
        name = "ssim"
    elif req.kind == "view":
        b = load_video(req.b_dir)
        per = view_consistency_per_frame(a, b)
        name = "view_consistency"
    elif req.kind == "temporal":
        per = temporal_consistency_per_pair(a, req.temporal_metric)
        name = f"temporal_consistency[{req.temporal_metric}]"
    else:
        raise InvalidConfig("kind must be view, temporal, psnr, or ssim",
                            kind=req.kind)
    return MetricsResponse(metric=name, per_frame=[float(v) for v in per],
                           mean=float(np.mean(per)))
