"""Recipe sampling and the blur / resize / noise / jpeg degradation chain."""

from __future__ import annotations

import numpy as np
import pytest
from fractions import Fraction
from scipy import stats

from stereoforge.errors import InvalidRange, InvalidRecipe
from stereoforge.degrade import (
    DegradationRanges,
    DegradationRecipe,
    add_noise,
    area_resize,
    degrade_video,
    gaussian_blur,
    gaussian_kernel,
    jpeg_roundtrip,
    noise_stream,
    sample_recipe,
)
from tests.conftest import make_video


def _recipe(**kw) -> DegradationRecipe:
    base = dict(seed=0, blur_sigma=1.0, target_w=8, target_h=8,
                noise_sigma=5.0, jpeg_quality=60)
    base.update(kw)
    return DegradationRecipe(**base)


# -- recipe sampling ---------------------------------------------------------


def test_sample_recipe_deterministic():
    assert sample_recipe(42) == sample_recipe(42)


def test_sample_recipe_seed_sensitivity():
    assert sample_recipe(1) != sample_recipe(2)


def test_sample_recipe_degenerate_ranges():
    ranges = DegradationRanges(blur_sigma=(0.7, 0.7), noise_sigma=(3.0, 3.0),
                               jpeg_quality=(50, 50), targets=((320, 160),))
    recipe = sample_recipe(9, ranges)
    assert recipe.blur_sigma == 0.7
    assert recipe.noise_sigma == 3.0
    assert recipe.jpeg_quality == 50
    assert (recipe.target_w, recipe.target_h) == (320, 160)


def test_sample_recipe_within_bounds():
    for seed in range(200):
        recipe = sample_recipe(seed)
        assert 0.2 <= recipe.blur_sigma <= 3.0
        assert 1.0 <= recipe.noise_sigma <= 30.0
        assert 30 <= recipe.jpeg_quality <= 95
        assert (recipe.target_w, recipe.target_h) in (
            (256, 128), (320, 160), (360, 180))


def test_jpeg_quality_distribution_uniform():
    qualities = np.array([sample_recipe(seed).jpeg_quality
                          for seed in range(1000)])
    counts = np.bincount(qualities, minlength=96)[30:96]
    _, p = stats.chisquare(counts)
    assert p > 0.01


def test_second_pass_recipe_differs():
    assert sample_recipe(7, pass_index=0) != sample_recipe(7, pass_index=1)


def test_ranges_reject_out_of_bound_sigma():
    with pytest.raises(InvalidRange):
        DegradationRanges(blur_sigma=(0.0, 3.0))


def test_recipe_rejects_unknown_stage():
    with pytest.raises(InvalidRecipe):
        _recipe(stages=("blur", "sharpen"))


def test_recipe_rejects_duplicate_stage():
    with pytest.raises(InvalidRecipe):
        _recipe(stages=("blur", "blur"))


def test_recipe_rejects_out_of_bound_quality():
    with pytest.raises(InvalidRecipe):
        _recipe(jpeg_quality=20)


def test_recipe_json_round_trip():
    recipe = sample_recipe(11)
    assert DegradationRecipe.from_json(recipe.to_json()) == recipe


# -- area resampling ---------------------------------------------------------


def test_area_resize_2x2_mean():
    frame = np.array([[[10], [20]], [[30], [40]]], dtype=np.uint8)
    frame = np.repeat(frame, 3, axis=2)
    out = area_resize(frame, 1, 1)
    assert np.all(out == 25)


def test_area_resize_identity_is_bit_exact():
    video = make_video(1, frames=1)
    frame = video.pixels[0]
    assert np.array_equal(area_resize(frame, 16, 16), frame)


def test_area_resize_3_to_2_rational_weights():
    row = np.array([[[0], [90], [180]]], dtype=np.uint8)
    row = np.repeat(row, 3, axis=2)
    out = area_resize(row, 2, 1)
    assert np.all(out[0, 0] == 30)   # 2/3 * 0 + 1/3 * 90
    assert np.all(out[0, 1] == 150)  # 1/3 * 90 + 2/3 * 180


def test_area_resize_matches_fraction_oracle():
    # exact rational overlap computation, one axis at a time
    def weights(n_in, n_out):
        w = [[Fraction(0)] * n_in for _ in range(n_out)]
        for j in range(n_out):
            lo = Fraction(j * n_in, n_out)
            hi = Fraction((j + 1) * n_in, n_out)
            for i in range(n_in):
                overlap = min(hi, Fraction(i + 1)) - max(lo, Fraction(i))
                if overlap > 0:
                    w[j][i] = overlap / (hi - lo)
        return w

    rng = np.random.default_rng(21)
    row = rng.integers(0, 256, size=(1, 7, 3), dtype=np.uint8)
    out = area_resize(row, 5, 1)
    w = weights(7, 5)
    for j in range(5):
        for c in range(3):
            exact = sum(w[j][i] * int(row[0, i, c]) for i in range(7))
            want = int(exact + Fraction(1, 2))  # floor(x + 1/2) on rationals
            assert out[0, j, c] == want


def test_area_resize_preserves_mean():
    rng = np.random.default_rng(22)
    frame = rng.integers(0, 256, size=(30, 42, 3), dtype=np.uint8)
    for (w, h) in ((21, 15), (14, 10), (42, 30), (5, 3)):
        out = area_resize(frame, w, h)
        assert abs(out.mean() - frame.mean()) < 0.5


def test_up_down_is_projection_at_integer_ratio():
    rng = np.random.default_rng(23)
    frame = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    once = area_resize(area_resize(frame, 32, 24), 64, 48)
    twice = area_resize(area_resize(once, 32, 24), 64, 48)
    assert np.max(np.abs(twice.astype(int) - once.astype(int))) <= 1


# -- gaussian blur -----------------------------------------------------------


def test_blur_constant_frame_unchanged():
    frame = np.full((16, 16, 3), 77, dtype=np.uint8)
    assert np.array_equal(gaussian_blur(frame, 2.0), frame)


def test_kernel_matches_density_oracle():
    kernel = gaussian_kernel(1.0)
    radius = (len(kernel) - 1) // 2
    assert radius == 3
    taps = stats.norm.pdf(np.arange(-radius, radius + 1), 0, 1.0)
    assert abs(kernel[radius] - taps[radius] / taps.sum()) < 1e-6
    assert kernel.sum() == pytest.approx(1.0)


def test_blur_semigroup():
    rng = np.random.default_rng(24)
    frame = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    two_step = gaussian_blur(gaussian_blur(frame, 1.2), 0.9)
    one_step = gaussian_blur(frame, float(np.hypot(1.2, 0.9)))
    assert np.max(np.abs(two_step.astype(int) - one_step.astype(int))) <= 2


# -- gaussian noise ----------------------------------------------------------


def test_noise_sigma_zero_is_identity():
    frame = make_video(2, frames=1).pixels[0]
    out = add_noise(frame, 0.0, noise_stream(5, 0))
    assert np.array_equal(out, frame)


def test_noise_sample_sigma():
    frame = np.full((256, 256, 3), 128, dtype=np.uint8)
    out = add_noise(frame, 10.0, noise_stream(5, 0))
    residual = out.astype(np.float64) - 128.0
    assert 9.5 <= residual.std() <= 10.5


def test_noise_stream_deterministic():
    frame = make_video(3, frames=1).pixels[0]
    a = add_noise(frame, 8.0, noise_stream(9, 4))
    b = add_noise(frame, 8.0, noise_stream(9, 4))
    assert np.array_equal(a, b)


def test_noise_stream_varies_per_frame():
    frame = make_video(3, frames=1).pixels[0]
    a = add_noise(frame, 8.0, noise_stream(9, 0))
    b = add_noise(frame, 8.0, noise_stream(9, 1))
    assert not np.array_equal(a, b)


# -- jpeg --------------------------------------------------------------------


def test_jpeg_quality_100_smooth_gradient():
    grad = np.broadcast_to(np.linspace(0, 255, 256), (64, 256))
    frame = np.stack([grad] * 3, axis=-1).astype(np.uint8)
    out = jpeg_roundtrip(frame, 100)
    mse = np.mean((out.astype(float) - frame.astype(float)) ** 2)
    psnr = np.inf if mse == 0 else 10 * np.log10(255.0 ** 2 / mse)
    assert psnr >= 45.0


def test_jpeg_recompression_settles():
    rng = np.random.default_rng(25)
    frame = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    once = jpeg_roundtrip(frame, 30)
    twice = jpeg_roundtrip(once, 30)
    first_changed = int((once != frame).sum())
    second_changed = int((twice != once).sum())
    assert second_changed < first_changed


def test_jpeg_constant_gray_survives():
    frame = np.full((64, 64, 3), 128, dtype=np.uint8)
    for quality in (30, 60, 95):
        out = jpeg_roundtrip(frame, quality)
        mse = np.mean((out.astype(float) - 128.0) ** 2)
        psnr = np.inf if mse == 0 else 10 * np.log10(255.0 ** 2 / mse)
        assert psnr >= 50.0


# -- full chain --------------------------------------------------------------


def test_degrade_identity_recipe():
    video = make_video(4, frames=2, height=16, width=16)
    recipe = _recipe(target_w=16, target_h=16, stages=())
    out = degrade_video(video, recipe)
    assert np.array_equal(out.pixels, video.pixels)


def test_degrade_output_keeps_source_size():
    video = make_video(5, frames=2, height=32, width=48)
    recipe = _recipe(target_w=24, target_h=16)
    out = degrade_video(video, recipe)
    assert (out.frames, out.height, out.width) == (2, 32, 48)
    assert not np.array_equal(out.pixels, video.pixels)


def test_degrade_rejects_upscale_target():
    video = make_video(5, frames=1, height=16, width=16)
    with pytest.raises(InvalidRecipe):
        degrade_video(video, _recipe(target_w=32, target_h=16))


def test_degrade_deterministic_across_threads():
    video = make_video(6, frames=4, height=32, width=32)
    recipe = _recipe(target_w=16, target_h=16)
    a = degrade_video(video, recipe, threads=1)
    b = degrade_video(video, recipe, threads=4)
    assert np.array_equal(a.pixels, b.pixels)


def test_degrade_noise_is_fresh_per_frame():
    # same content every frame, same recipe: outputs must still differ
    # because the noise stream advances with the frame index
    frame = make_video(7, frames=1, height=32, width=32).pixels[0]
    from stereoforge.tensorio import Video
    video = Video(np.stack([frame, frame]))
    recipe = _recipe(target_w=32, target_h=32, stages=("noise",),
                     noise_sigma=10.0)
    out = degrade_video(video, recipe)
    assert not np.array_equal(out.pixels[0], out.pixels[1])
