"""stereoforge: deterministic stereo video generation and restoration.

Pipeline stages: render synthetic stereo clips with ground-truth depth,
degrade them with seeded temporally-consistent recipes, warp the left view
along its disparity, inpaint the disocclusions through a pluggable backend,
and score the results with classical metrics.
"""

from .degrade import (
    DegradationRanges,
    DegradationRecipe,
    area_resize,
    add_noise,
    degrade_video,
    gaussian_blur,
    jpeg_roundtrip,
    sample_recipe,
)
from .errors import StereoforgeError
from .inpaint import (
    BackendJob,
    BackendRegistration,
    ConvertConfig,
    ConvertResult,
    baseline_inpaint,
    convert_stereo,
    get_backend,
    register_backend,
    run_backend,
)
from .metrics import (
    psnr,
    ssim,
    temporal_consistency,
    view_consistency,
)
from .postproc import match_histograms, pack, unpack
from .synthgen import (
    CameraRig,
    SceneConfig,
    SceneSpec,
    StereoClip,
    render_stereo,
    sample_scene,
)
from .tensorio import (
    DepthSequence,
    Manifest,
    OcclusionMask,
    Video,
    load_depth,
    load_mask,
    load_video,
    save_depth,
    save_mask,
    save_video,
)
from .warp import (
    CalibrationResult,
    DisparityField,
    calibrate_disparity_scale,
    depth_to_disparity,
    dilate_mask,
    fill_flying_pixels,
    forward_warp,
    warp_video,
)

__version__ = "0.1.0"

__all__ = [
    "BackendJob",
    "BackendRegistration",
    "CalibrationResult",
    "CameraRig",
    "ConvertConfig",
    "ConvertResult",
    "DegradationRanges",
    "DegradationRecipe",
    "DepthSequence",
    "DisparityField",
    "Manifest",
    "OcclusionMask",
    "SceneConfig",
    "SceneSpec",
    "StereoClip",
    "StereoforgeError",
    "Video",
    "add_noise",
    "area_resize",
    "baseline_inpaint",
    "calibrate_disparity_scale",
    "convert_stereo",
    "degrade_video",
    "depth_to_disparity",
    "dilate_mask",
    "fill_flying_pixels",
    "forward_warp",
    "gaussian_blur",
    "get_backend",
    "jpeg_roundtrip",
    "load_depth",
    "load_mask",
    "load_video",
    "match_histograms",
    "pack",
    "psnr",
    "register_backend",
    "render_stereo",
    "run_backend",
    "sample_recipe",
    "sample_scene",
    "save_depth",
    "save_mask",
    "save_video",
    "ssim",
    "temporal_consistency",
    "unpack",
    "view_consistency",
    "warp_video",
]
