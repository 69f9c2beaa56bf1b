import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pyrtone.image import Image
from pyrtone.pyramid import (
    KERNEL,
    adaptive_levels,
    downsample2,
    gaussian_pyramid,
    laplacian_decompose,
    laplacian_reconstruct,
    upsample2,
    LaplacianPyramid,
)

from conftest import random_image


# --- independent oracles -----------------------------------------------------


def conv5_clamped(a, k=KERNEL):
    """Brute-force 2-D separable 5-tap convolution with clamped borders."""
    h, w = a.shape[:2]
    out = np.zeros_like(a)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-2, 3):
                for dx in range(-2, 3):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += k[dy + 2] * k[dx + 2] * a[yy, xx]
            out[y, x] = acc
    return out


def downsample_oracle(a):
    return conv5_clamped(a)[::2, ::2]


def reference_pyramid(a, n):
    """Straight-line Gaussian/Laplacian pyramid built from the naive kernels."""
    gauss = [a]
    for _ in range(n):
        gauss.append(downsample_oracle(gauss[-1]))
    bands = []
    for k in range(n):
        up = upsample_oracle(gauss[k + 1], *gauss[k].shape)
        bands.append(gauss[k] - up)
    return gauss, bands


def upsample_oracle(a, out_h, out_w):
    """Zero-insert then convolve with the doubled kernel, clamping in the
    source sample domain (scalar loops, no vectorization)."""
    h, w = a.shape

    def up_1d(vec, out_n):
        n = len(vec)
        out = np.zeros(out_n)
        for j in range(out_n):
            if j % 2 == 0:
                i = j // 2
                out[j] = (vec[max(i - 1, 0)] + 6.0 * vec[i] + vec[min(i + 1, n - 1)]) / 8.0
            else:
                i = j // 2
                out[j] = (vec[i] + vec[min(i + 1, n - 1)]) / 2.0
        return out

    rows = np.stack([up_1d(a[y], out_w) for y in range(h)])
    return np.stack([up_1d(rows[:, x], out_h) for x in range(out_w)], axis=1)


# --- adaptive level count -----------------------------------------------------


@pytest.mark.parametrize(
    "h,w,target,expected",
    [
        (2160, 3840, 64, 6),
        (64, 64, 64, 1),
        (480, 854, 64, 4),
        (65, 65, 64, 1),
        (128, 128, 64, 1),
        (129, 40, 64, 2),
        (1, 1, 64, 0),
        (2, 1, 64, 1),
    ],
)
def test_adaptive_levels(h, w, target, expected):
    assert adaptive_levels(h, w, target) == expected


def test_adaptive_levels_bounds_coarse_size():
    n = adaptive_levels(2160, 3840, 64)
    h, w = 2160, 3840
    for _ in range(n):
        h, w = (h + 1) // 2, (w + 1) // 2
    assert max(h, w) <= 64
    assert (h, w) == (34, 60)


def test_adaptive_levels_rejects_degenerate_args():
    with pytest.raises(ValueError):
        adaptive_levels(0, 10, 64)
    with pytest.raises(ValueError):
        adaptive_levels(10, 10, 0)


# --- resampling ---------------------------------------------------------------


def test_downsample_constant():
    img = Image(np.full((10, 10, 3), 0.5))
    out = downsample2(img)
    assert out.shape == (5, 5, 3)
    np.testing.assert_allclose(out.data, 0.5, atol=1e-12)


def test_upsample_constant():
    img = Image(np.full((5, 5, 1), 0.5))
    for th, tw in [(10, 10), (9, 9), (9, 10)]:
        np.testing.assert_allclose(upsample2(img, th, tw).data, 0.5, atol=1e-12)


def test_downsample_impulse_matches_convolution_oracle():
    a = np.zeros((8, 8))
    a[3, 3] = 1.0
    out = downsample2(Image(a))
    np.testing.assert_allclose(out.data[:, :, 0], downsample_oracle(a), atol=1e-12)


def test_downsample_random_matches_oracle(rng):
    a = rng.random((9, 6))
    out = downsample2(Image(a))
    np.testing.assert_allclose(out.data[:, :, 0], downsample_oracle(a), atol=1e-12)


def test_downsample_ceil_halving():
    assert downsample2(Image(np.zeros((7, 7, 1)))).shape == (4, 4, 1)


def test_upsample_matches_oracle(rng):
    a = rng.random((4, 5))
    for th, tw in [(8, 10), (7, 9), (8, 9)]:
        out = upsample2(Image(a), th, tw)
        np.testing.assert_allclose(out.data[:, :, 0], upsample_oracle(a, th, tw), atol=1e-12)


def test_upsample_rejects_bad_target(rng):
    img = random_image(rng, 4, 4, c=1)
    with pytest.raises(ValueError, match="upsample target"):
        upsample2(img, 10, 8)
    with pytest.raises(ValueError, match="upsample target"):
        upsample2(img, 8, 6)


# --- gaussian pyramid ----------------------------------------------------------


def test_gaussian_pyramid_level_sizes(rng):
    gp = gaussian_pyramid(random_image(rng, 64, 64), 1)
    assert [lvl.shape[:2] for lvl in gp.levels] == [(64, 64), (32, 32)]

    gp = gaussian_pyramid(random_image(rng, 33, 17), 2)
    assert [lvl.shape[:2] for lvl in gp.levels] == [(33, 17), (17, 9), (9, 5)]


def test_gaussian_pyramid_constant_invariance():
    gp = gaussian_pyramid(Image(np.full((32, 24, 3), 0.7)), 3)
    for lvl in gp.levels:
        np.testing.assert_allclose(lvl.data, 0.7, atol=1e-12)


def test_gaussian_pyramid_rejects_excess_depth():
    with pytest.raises(ValueError, match="ran out of pixels"):
        gaussian_pyramid(Image(np.zeros((2, 2, 1))), 5)
    with pytest.raises(ValueError, match=">= 1"):
        gaussian_pyramid(Image(np.zeros((8, 8, 1))), 0)


# --- laplacian decompose / reconstruct -----------------------------------------


def test_constant_image_zero_bands():
    lap = laplacian_decompose(Image(np.full((16, 16, 3), 0.25)), 2)
    for band in lap.bands:
        np.testing.assert_allclose(band.data, 0.0, atol=1e-12)
    np.testing.assert_allclose(lap.residual.data, 0.25, atol=1e-12)


def test_round_trip_exact(rng):
    for h, w in [(16, 16), (17, 13), (31, 64), (9, 27)]:
        img = random_image(rng, h, w)
        lap = laplacian_decompose(img, 2)
        back = laplacian_reconstruct(lap)
        assert np.max(np.abs(back.data - img.data)) < 1e-5


def test_single_bright_pixel_matches_reference_pyramid(rng):
    a = np.zeros((32, 32))
    a[10, 20] = 1.0
    lap = laplacian_decompose(Image(a), 2)
    gauss, bands = reference_pyramid(a, 2)
    for k in range(2):
        np.testing.assert_allclose(lap.bands[k].data[:, :, 0], bands[k], atol=1e-12)
    np.testing.assert_allclose(lap.residual.data[:, :, 0], gauss[2], atol=1e-12)


def test_zero_bands_reconstruct_is_repeated_upsample(rng):
    res = rng.random((5, 5))
    bands = (
        Image(np.zeros((17, 17, 1))),
        Image(np.zeros((9, 9, 1))),
    )
    pyr = LaplacianPyramid(bands, Image(res))
    out = laplacian_reconstruct(pyr)
    expected = upsample_oracle(upsample_oracle(res, 9, 9), 17, 17)
    np.testing.assert_allclose(out.data[:, :, 0], expected, atol=1e-12)


def test_scaled_bands_linearity(rng):
    img = random_image(rng, 24, 18)
    lap = laplacian_decompose(img, 2)
    doubled = LaplacianPyramid(
        tuple(b.with_data(2.0 * b.data) for b in lap.bands),
        lap.residual,
    )
    out = laplacian_reconstruct(doubled)
    # out = img + (img - repeated upsample of residual), by linearity
    base = laplacian_reconstruct(
        LaplacianPyramid(tuple(b.with_data(np.zeros_like(b.data)) for b in lap.bands), lap.residual)
    )
    expected = 2.0 * img.data - base.data
    np.testing.assert_allclose(out.data, expected, atol=1e-10)


def test_decompose_linearity(rng):
    x = random_image(rng, 20, 15)
    y = random_image(rng, 20, 15)
    a, b = 0.7, -0.3
    mix = Image(a * x.data + b * y.data, x.space)
    lap_mix = laplacian_decompose(mix, 2)
    lap_x = laplacian_decompose(x, 2)
    lap_y = laplacian_decompose(y, 2)
    for k in range(2):
        np.testing.assert_allclose(
            lap_mix.bands[k].data,
            a * lap_x.bands[k].data + b * lap_y.bands[k].data,
            atol=1e-5,
        )


def test_reconstruct_rejects_inconsistent_chain(rng):
    pyr = LaplacianPyramid(
        (Image(np.zeros((16, 16, 1))),),
        Image(np.zeros((5, 5, 1))),
    )
    with pytest.raises(ValueError, match="inconsistent pyramid"):
        laplacian_reconstruct(pyr)


@settings(max_examples=20, deadline=None)
@given(
    h=st.integers(min_value=8, max_value=70),
    w=st.integers(min_value=8, max_value=70),
    n=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_round_trip_property(h, w, n, seed):
    img = Image(np.random.default_rng(seed).random((h, w, 1)))
    back = laplacian_reconstruct(laplacian_decompose(img, n))
    assert np.max(np.abs(back.data - img.data)) < 1e-5
