"""Noise injectors: distributional oracles, determinism, pixel independence.

The statistical checks follow a fixed-seed, >=3-sigma-tolerance policy:
each bound below is at least three standard errors wide at the stated
sample size, so a failure indicates a code change, not sampling luck.
"""

import numpy as np
import pytest

from tempcal.interchange import GrayImage
from tempcal.noise import (
    NoiseSpec,
    inject,
    inject_gaussian,
    inject_poisson,
    inject_salt_pepper,
    inject_speckle,
    inject_uniform,
)

_MEGA = GrayImage(pixels=np.full((1000, 1000), 0.5))


# ---------------------------------------------------------------------------
# distributional oracles (10^6 pixels each)
# ---------------------------------------------------------------------------

def test_gaussian_moments():
    out = inject_gaussian(_MEGA, 0.0, 0.02, seed=11)
    delta = out.pixels - _MEGA.pixels
    assert abs(delta.mean()) < 1e-4  # 3 sigma ~ 6e-5
    assert abs(delta.std() - 0.02) / 0.02 < 0.02


def test_gaussian_mean_shift():
    out = inject_gaussian(_MEGA, 0.1, 0.02, seed=12)
    assert abs((out.pixels - _MEGA.pixels).mean() - 0.1) < 1e-4


def test_gaussian_clips_to_floor():
    img = GrayImage(pixels=np.zeros((100, 100)))
    out = inject_gaussian(img, -1.0, 0.001, seed=13)
    assert np.all(out.pixels == 0.0)


def test_salt_pepper_fractions():
    out = inject_salt_pepper(_MEGA, 0.1, 0.1, seed=21)
    ones = float((out.pixels == 1.0).mean())
    zeros = float((out.pixels == 0.0).mean())
    assert abs(ones - 0.1) < 0.001  # 3 sigma ~ 9e-4
    assert abs(zeros - 0.1) < 0.001
    untouched = (out.pixels == 0.5).mean()
    assert abs(untouched - 0.8) < 0.0015


def test_salt_pepper_rejects_excess_probability():
    with pytest.raises(ValueError):
        inject_salt_pepper(_MEGA, 0.7, 0.5, seed=1)


def test_poisson_large_lambda_moments():
    # scale 1 on a 0.5 image: lambda = 127.5 photons per pixel
    out = inject_poisson(_MEGA, 1.0, seed=31)
    counts = out.pixels * 255.0
    assert abs(out.pixels.mean() - 0.5) < 2e-4
    assert abs(counts.var() - 127.5) / 127.5 < 0.05


def test_poisson_small_lambda_moments():
    # inversion branch: lambda = 0.05 * 255 * 0.5 = 6.375
    img = GrayImage(pixels=np.full((1000, 1000), 0.05))
    out = inject_poisson(img, 0.5, seed=32)
    counts = out.pixels * (255.0 * 0.5)
    assert abs(counts.mean() - 6.375) < 0.01  # 3 sigma ~ 7.6e-3
    assert abs(counts.var() - 6.375) / 6.375 < 0.05


def test_poisson_zero_pixels_stay_zero():
    img = GrayImage(pixels=np.zeros((64, 64)))
    out = inject_poisson(img, 1.0, seed=33)
    assert np.all(out.pixels == 0.0)


def test_poisson_noise_shrinks_with_scale():
    spreads = []
    for scale in (0.5, 1.0, 2.0):
        out = inject_poisson(_MEGA, scale, seed=34)
        spreads.append(out.pixels.std())
    assert spreads[0] > spreads[1] > spreads[2]


def test_speckle_std_proportional_to_pixel():
    out = inject_speckle(_MEGA, 0.05, seed=41)
    assert abs(out.pixels.std() - 0.025) / 0.025 < 0.02


def test_uniform_moments_and_support():
    out = inject_uniform(_MEGA, 0.1, seed=51)
    delta = out.pixels - _MEGA.pixels
    assert out.pixels.min() >= 0.4 and out.pixels.max() <= 0.6
    assert abs(out.pixels.mean() - 0.5) < 2e-4
    assert abs(delta.var() - 0.2**2 / 12.0) / (0.2**2 / 12.0) < 0.02


def test_uniform_clips_on_the_negative_half():
    img = GrayImage(pixels=np.zeros((200, 200)))
    out = inject_uniform(img, 0.1, seed=52)
    assert out.pixels.min() == 0.0
    assert out.pixels.max() <= 0.1


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------

def test_identity_at_zero_noise_is_exact():
    rng = np.random.default_rng(6)
    img = GrayImage(pixels=rng.random((37, 53)))
    for out in (
        inject_gaussian(img, 0.0, 0.0, seed=3),
        inject_salt_pepper(img, 0.0, 0.0, seed=3),
        inject_speckle(img, 0.0, seed=3),
        inject_uniform(img, 0.0, seed=3),
    ):
        assert np.array_equal(out.pixels, img.pixels)


def test_all_outputs_stay_in_unit_range():
    rng = np.random.default_rng(7)
    img = GrayImage(pixels=rng.random((64, 64)))
    outs = [
        inject_gaussian(img, 0.3, 0.5, seed=4),
        inject_salt_pepper(img, 0.3, 0.3, seed=4),
        inject_poisson(img, 0.25, seed=4),
        inject_speckle(img, 0.8, seed=4),
        inject_uniform(img, 0.9, seed=4),
    ]
    for out in outs:
        assert out.pixels.min() >= 0.0
        assert out.pixels.max() <= 1.0


def test_same_seed_bit_identical():
    rng = np.random.default_rng(8)
    img = GrayImage(pixels=rng.random((48, 48)))
    for spec in (
        NoiseSpec("gaussian", {"mu": 0.05, "sigma": 0.1}),
        NoiseSpec("salt_pepper", {"salt_prob": 0.1, "pepper_prob": 0.05}),
        NoiseSpec("poisson", {"scale": 1.0}),
        NoiseSpec("speckle", {"scale": 0.1}),
        NoiseSpec("uniform", {"scale": 0.1}),
    ):
        a = spec.apply(img, seed=99)
        b = spec.apply(img, seed=99)
        assert np.array_equal(a.pixels, b.pixels), spec.kind


def test_image_index_changes_the_noise_field():
    img = GrayImage(pixels=np.full((32, 32), 0.5))
    spec = NoiseSpec("gaussian", {"mu": 0.0, "sigma": 0.1})
    a = inject(img, spec, base_seed=5, image_index=0)
    b = inject(img, spec, base_seed=5, image_index=1)
    assert not np.array_equal(a.pixels, b.pixels)


def test_crop_commutes_with_injection():
    """Noising a crop at the right stream offset equals cropping the noised image."""
    full = GrayImage(pixels=np.linspace(0.0, 1.0, 64 * 64).reshape(64, 64))
    crop = GrayImage(pixels=full.pixels[16:32, :].copy())
    offset = 16 * 64  # row-major position of the crop's first pixel
    cases = [
        (inject_gaussian(full, 0.1, 0.2, seed=61),
         inject_gaussian(crop, 0.1, 0.2, seed=61, pixel_index_offset=offset)),
        (inject_salt_pepper(full, 0.2, 0.1, seed=62),
         inject_salt_pepper(crop, 0.2, 0.1, seed=62, pixel_index_offset=offset)),
        (inject_poisson(full, 1.0, seed=63),
         inject_poisson(crop, 1.0, seed=63, pixel_index_offset=offset)),
        (inject_speckle(full, 0.2, seed=64),
         inject_speckle(crop, 0.2, seed=64, pixel_index_offset=offset)),
        (inject_uniform(full, 0.2, seed=65),
         inject_uniform(crop, 0.2, seed=65, pixel_index_offset=offset)),
    ]
    for noised_full, noised_crop in cases:
        assert np.array_equal(noised_full.pixels[16:32, :], noised_crop.pixels)


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown noise kind"):
        NoiseSpec("perlin", {"scale": 1.0})
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", {"mu": 0.0})
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", {"mu": 0.0, "sigma": -0.1})
    with pytest.raises(ValueError):
        NoiseSpec("poisson", {"scale": 0.0})
    with pytest.raises(ValueError):
        NoiseSpec("salt_pepper", {"salt_prob": 0.6, "pepper_prob": 0.6})
    with pytest.raises(ValueError):
        NoiseSpec("uniform", {"scale": -1.0})


def test_spec_labels():
    assert NoiseSpec("gaussian", {"mu": 0.0, "sigma": 0.02}).label() == "gaussian mu=0 sigma=0.02"
    assert (
        NoiseSpec("salt_pepper", {"salt_prob": 0.1, "pepper_prob": 0.2}).label()
        == "salt_pepper salt_prob=0.1 pepper_prob=0.2"
    )
    assert NoiseSpec("poisson", {"scale": 2.0}).label() == "poisson scale=2"
