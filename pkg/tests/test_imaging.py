import math

import numpy as np
import pytest

from plumbline.imaging import (
    ClaheParams,
    GrayImage,
    clahe,
    gaussian_blur,
    gaussian_kernel,
    to_grayscale,
)

import oracles


def constant_mapping(value: int, n_pixels: int, clip_limit: float = 2.0) -> float:
    """Where a single-bin histogram sends its bin after clip + redistribute."""
    hist = np.zeros(256, dtype=np.float64)
    hist[value] = float(n_pixels)
    cap = clip_limit * n_pixels / 256.0
    clipped = np.minimum(hist, cap)
    clipped += (hist - clipped).sum() / 256.0
    cdf = np.cumsum(clipped) / n_pixels
    return float(np.floor(255.0 * cdf[value] + 0.5))


def test_grayimage_rejects_small_images():
    with pytest.raises(ValueError):
        GrayImage.from_array(np.zeros((7, 64)))
    with pytest.raises(ValueError):
        GrayImage.from_array(np.zeros((64, 7)))
    img = GrayImage.from_array(np.zeros((8, 8)))
    assert img.width == 8 and img.height == 8


def test_grayimage_rejects_out_of_range_values():
    with pytest.raises(ValueError):
        GrayImage.from_array(np.full((16, 16), 256.0))
    with pytest.raises(ValueError):
        GrayImage.from_array(np.full((16, 16), -1.0))


def test_to_grayscale_primary_colors():
    rgb = np.zeros((8, 8, 3), dtype=np.uint8)
    assert np.all(to_grayscale(rgb).data == 0.0)

    rgb[:, :, :] = 255
    assert np.all(to_grayscale(rgb).data == 255.0)

    red = np.zeros((8, 8, 3), dtype=np.uint8)
    red[:, :, 0] = 255
    # 0.299 * 255 = 76.245, rounded half-up
    assert np.all(to_grayscale(red).data == 76.0)


def test_to_grayscale_rejects_bad_shapes():
    with pytest.raises(ValueError):
        to_grayscale(np.zeros((8, 8)))
    with pytest.raises(ValueError):
        to_grayscale(np.zeros((8, 8, 4)))


def test_clahe_constant_image_maps_to_fixed_constant():
    for value in (0, 64, 128, 200, 255):
        img = GrayImage.from_array(np.full((64, 48), float(value)))
        for grid in ((8, 8), (3, 5), (1, 1)):
            out = clahe(img, ClaheParams(tile_grid=grid))
            expected = constant_mapping(value, 64 * 48)
            assert np.unique(out.data).size == 1
            assert float(out.data[0, 0]) == expected


def test_clahe_constant_128_stays_within_one():
    img = GrayImage.from_array(np.full((64, 64), 128.0))
    out = clahe(img, ClaheParams())
    assert np.all(out.data == 129.0)
    assert abs(float(out.data[0, 0]) - 128.0) <= 1.0


def test_clahe_single_tile_unclipped_equals_global_equalization():
    rng = np.random.default_rng(5)
    data = np.floor(rng.uniform(0.0, 256.0, (48, 64))).clip(0, 255)
    img = GrayImage.from_array(data)
    out = clahe(img, ClaheParams(tile_grid=(1, 1), clip_limit=math.inf))
    assert np.array_equal(out.data, oracles.global_equalize(data))


def test_clahe_bimodal_spread_increases():
    rng = np.random.default_rng(11)
    data = np.where(rng.uniform(size=(64, 64)) < 0.5, 100.0, 120.0)
    img = GrayImage.from_array(data)
    out = clahe(img, ClaheParams())
    assert float(out.data.std()) > float(data.std())


def test_clahe_applied_twice_stays_in_range():
    rng = np.random.default_rng(7)
    data = np.floor(rng.uniform(0.0, 256.0, (64, 64))).clip(0, 255)
    once = clahe(GrayImage.from_array(data), ClaheParams())
    twice = clahe(once, ClaheParams())
    assert float(twice.data.min()) >= 0.0
    assert float(twice.data.max()) <= 255.0


def test_clahe_preserves_dimensions():
    img = GrayImage.from_array(np.zeros((40, 56)))
    out = clahe(img, ClaheParams(tile_grid=(4, 3)))
    assert (out.height, out.width) == (40, 56)


def test_clahe_parameter_validation():
    with pytest.raises(ValueError):
        ClaheParams(clip_limit=0.5)
    with pytest.raises(ValueError):
        ClaheParams(tile_grid=(0, 4))
    img = GrayImage.from_array(np.zeros((16, 16)))
    with pytest.raises(ValueError):
        clahe(img, ClaheParams(tile_grid=(16, 1)))  # 1 px tiles


def test_gaussian_kernel_shape_and_mass():
    for sigma in (0.8, 1.4, 2.0):
        kernel = gaussian_kernel(sigma)
        assert kernel.shape[0] == 2 * math.ceil(3.0 * sigma) + 1
        assert abs(float(kernel.sum()) - 1.0) < 1e-12
        assert np.array_equal(kernel, kernel[::-1])


def test_blur_constant_image_unchanged():
    img = GrayImage.from_array(np.full((32, 32), 77.0))
    out = gaussian_blur(img, 1.4)
    assert np.allclose(out.data, 77.0, atol=1e-9)


def test_blur_impulse_reproduces_kernel_center():
    data = np.zeros((33, 33))
    data[16, 16] = 255.0
    out = gaussian_blur(GrayImage.from_array(data), 1.4)
    center_weight = float(gaussian_kernel(1.4)[math.ceil(3.0 * 1.4)])
    assert abs(float(out.data[16, 16]) - center_weight * center_weight * 255.0) < 1e-6


def test_blur_conserves_interior_mass():
    rng = np.random.default_rng(3)
    data = np.zeros((64, 64))
    data[12:-12, 12:-12] = np.floor(rng.uniform(0.0, 256.0, (40, 40))).clip(0, 255)
    out = gaussian_blur(GrayImage.from_array(data), 1.4)
    assert abs(float(out.data.sum()) - float(data.sum())) <= 0.005 * float(data.sum())


def test_blur_commutes_with_transpose():
    rng = np.random.default_rng(9)
    data = np.floor(rng.uniform(0.0, 256.0, (48, 64))).clip(0, 255)
    blurred = gaussian_blur(GrayImage.from_array(data), 1.4)
    transposed = gaussian_blur(GrayImage.from_array(data.T.copy()), 1.4)
    # the separable passes run in swapped order on the transpose, so the
    # two results agree to rounding of the last few ulps, not bit for bit
    assert float(np.abs(blurred.data - transposed.data.T).max()) < 1e-9


def test_blur_output_stays_in_range():
    rng = np.random.default_rng(13)
    data = np.floor(rng.uniform(0.0, 256.0, (32, 32))).clip(0, 255)
    out = gaussian_blur(GrayImage.from_array(data), 2.0)
    assert float(out.data.min()) >= 0.0
    assert float(out.data.max()) <= 255.0


def test_blur_rejects_bad_sigma():
    img = GrayImage.from_array(np.zeros((16, 16)))
    with pytest.raises(ValueError):
        gaussian_blur(img, 0.0)
