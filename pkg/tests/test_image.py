import numpy as np
import pytest

from pyrtone.image import (
    ColorSpace,
    Image,
    ImageIOError,
    lab_to_rgb,
    linear_rgb_to_xyz,
    linear_to_srgb,
    load_image,
    resize_bilinear,
    rgb_to_lab,
    save_image,
    srgb_to_linear,
    xyz_to_linear_rgb,
)

from conftest import random_image


# --- independent oracles -----------------------------------------------------


def bilinear_oracle(src, out_h, out_w):
    """Scalar half-pixel-center bilinear resample with clamped edges."""
    h, w, c = src.shape
    out = np.zeros((out_h, out_w, c))
    for oy in range(out_h):
        for ox in range(out_w):
            sy = (oy + 0.5) * h / out_h - 0.5
            sx = (ox + 0.5) * w / out_w - 0.5
            y0 = int(np.floor(sy))
            x0 = int(np.floor(sx))
            fy = sy - y0
            fx = sx - x0
            y1 = min(max(y0 + 1, 0), h - 1)
            x1 = min(max(x0 + 1, 0), w - 1)
            y0 = min(max(y0, 0), h - 1)
            x0 = min(max(x0, 0), w - 1)
            out[oy, ox] = (
                src[y0, x0] * (1 - fy) * (1 - fx)
                + src[y0, x1] * (1 - fy) * fx
                + src[y1, x0] * fy * (1 - fx)
                + src[y1, x1] * fy * fx
            )
    return out


def lab_oracle(r, g, b):
    """CIE Lab from linear RGB by direct formula evaluation."""
    m = np.array([
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ])
    x, y, z = m @ np.array([r, g, b])
    xn, yn, zn = 0.95047, 1.0, 1.08883
    d = 6.0 / 29.0

    def f(t):
        return t ** (1.0 / 3.0) if t > d**3 else t / (3 * d * d) + 4.0 / 29.0

    fx, fy, fz = f(x / xn), f(y / yn), f(z / zn)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


# --- Image container ----------------------------------------------------------


def test_image_invariants():
    img = Image(np.zeros((4, 5)))
    assert img.shape == (4, 5, 1)
    with pytest.raises(ValueError, match="channel count"):
        Image(np.zeros((4, 5, 2)))
    with pytest.raises(ValueError, match="dimensions"):
        Image(np.zeros((0, 5, 3)))
    with pytest.raises(ValueError, match="finite"):
        Image(np.full((2, 2, 3), np.nan))
    # non-finite allowed only outside display spaces
    Image(np.full((2, 2, 3), np.inf), ColorSpace.LAB)


# --- resize -------------------------------------------------------------------


def test_resize_constant_invariance():
    img = Image(np.full((8, 8, 3), 0.3))
    out = resize_bilinear(img, 16, 16)
    assert out.shape == (16, 16, 3)
    np.testing.assert_array_equal(out.data, 0.3)


def test_resize_identity(rng):
    img = random_image(rng, 9, 13)
    out = resize_bilinear(img, 9, 13)
    assert np.max(np.abs(out.data - img.data)) < 1e-6


def test_resize_2x1_to_4x1_matches_hand_oracle():
    img = Image(np.array([[0.0], [1.0]])[:, :, None])  # 2 rows x 1 col grayscale
    out = resize_bilinear(img, 4, 1)
    expected = bilinear_oracle(img.data, 4, 1)
    np.testing.assert_allclose(out.data, expected, atol=1e-12)
    np.testing.assert_allclose(out.data[:, 0, 0], [0.0, 0.25, 0.75, 1.0], atol=1e-12)


def test_resize_random_matches_oracle(rng):
    img = random_image(rng, 5, 7)
    out = resize_bilinear(img, 11, 4)
    np.testing.assert_allclose(out.data, bilinear_oracle(img.data, 11, 4), atol=1e-12)


def test_resize_rejects_zero_target(rng):
    with pytest.raises(ValueError):
        resize_bilinear(random_image(rng, 4, 4), 0, 4)


# --- transfer functions -------------------------------------------------------


def test_srgb_endpoints():
    img = Image(np.array([[[0.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]]]), ColorSpace.SRGB)
    lin = srgb_to_linear(img)
    np.testing.assert_allclose(lin.data[0], 0.0)
    np.testing.assert_allclose(lin.data[1], 1.0)
    assert lin.space is ColorSpace.LINEAR_RGB


def test_srgb_mid_value():
    img = Image(np.full((1, 1, 3), 0.5), ColorSpace.SRGB)
    # ((0.5 + 0.055) / 1.055) ** 2.4, evaluated independently
    assert abs(srgb_to_linear(img).data[0, 0, 0] - 0.21404114048223255) < 1e-12


def test_srgb_round_trip(rng):
    img = Image(rng.random((10, 100, 1)), ColorSpace.SRGB)
    back = linear_to_srgb(srgb_to_linear(img))
    assert np.max(np.abs(back.data - img.data)) < 1e-6


def test_transfer_rejects_wrong_space(rng):
    with pytest.raises(ValueError, match="expects srgb"):
        srgb_to_linear(random_image(rng, 2, 2))
    with pytest.raises(ValueError, match="expects linear-rgb"):
        linear_to_srgb(Image(np.zeros((2, 2, 3)), ColorSpace.SRGB))


# --- XYZ / Lab ----------------------------------------------------------------


def test_white_point_maps_to_lab_white():
    white = Image(np.ones((1, 1, 3)))
    lab = rgb_to_lab(white)
    np.testing.assert_allclose(lab.data[0, 0], [100.0, 0.0, 0.0], atol=1e-3)


def test_black_maps_to_lab_zero():
    lab = rgb_to_lab(Image(np.zeros((1, 1, 3))))
    np.testing.assert_allclose(lab.data[0, 0], [0.0, 0.0, 0.0], atol=1e-9)


def test_red_primary_matches_lab_oracle():
    red = Image(np.array([[[1.0, 0.0, 0.0]]]))
    lab = rgb_to_lab(red)
    np.testing.assert_allclose(lab.data[0, 0], lab_oracle(1.0, 0.0, 0.0), atol=1e-9)


def test_color_round_trips(rng):
    img = random_image(rng, 16, 16)
    via_xyz = xyz_to_linear_rgb(linear_rgb_to_xyz(img))
    assert np.max(np.abs(via_xyz.data - img.data)) < 1e-5
    via_lab = lab_to_rgb(rgb_to_lab(img))
    assert np.max(np.abs(via_lab.data - img.data)) < 1e-5


def test_xyz_rejects_wrong_space(rng):
    with pytest.raises(ValueError, match="expects xyz"):
        xyz_to_linear_rgb(random_image(rng, 2, 2))


# --- file I/O -----------------------------------------------------------------


def test_tiff16_full_scale_and_zero(tmp_path):
    import tifffile

    path = tmp_path / "scale.tif"
    tifffile.imwrite(path, np.array([[0, 65535]], dtype=np.uint16))
    img = load_image(path)
    np.testing.assert_array_equal(img.data[:, :, 0], [[0.0, 1.0]])


def test_png_round_trip_bit_exact(tmp_path, rng):
    quantized = np.round(rng.random((6, 7, 3)) * 255.0) / 255.0
    img = Image(quantized)
    path = tmp_path / "rt.png"
    save_image(img, path)
    back = load_image(path)
    np.testing.assert_array_equal(back.data, img.data)


def test_tiff16_round_trip_bit_exact(tmp_path, rng):
    quantized = np.round(rng.random((6, 7, 3)) * 65535.0) / 65535.0
    path = tmp_path / "rt.tif"
    save_image(Image(quantized), path, kind="tiff16")
    np.testing.assert_array_equal(load_image(path).data, quantized)


def test_tiff8_round_trip_bit_exact(tmp_path, rng):
    quantized = np.round(rng.random((5, 5, 3)) * 255.0) / 255.0
    path = tmp_path / "rt8.tif"
    save_image(Image(quantized), path, kind="tiff8")
    np.testing.assert_array_equal(load_image(path).data, quantized)


def test_tiff_float32_keeps_signed_samples(tmp_path, rng):
    signed = rng.standard_normal((5, 4, 3))
    path = tmp_path / "bands.tif"
    save_image(Image(signed, ColorSpace.LAB), path, kind="tiff32f")
    back = load_image(path, kind="tiff32f")
    np.testing.assert_array_equal(back.data, signed.astype(np.float32).astype(np.float64))


def test_tiff_deflate_compression_reads(tmp_path, rng):
    import tifffile

    samples = (rng.random((9, 11)) * 65535).astype(np.uint16)
    path = tmp_path / "deflate.tif"
    tifffile.imwrite(path, samples, compression="deflate")
    img = load_image(path)
    np.testing.assert_array_equal(img.data[:, :, 0], samples / 65535.0)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.png")


def test_load_malformed_file(tmp_path):
    path = tmp_path / "garbage.tif"
    path.write_bytes(b"this is not a tiff")
    with pytest.raises(ImageIOError, match="malformed"):
        load_image(path)


def test_load_unsupported_bit_depth(tmp_path):
    import tifffile

    path = tmp_path / "deep.tif"
    tifffile.imwrite(path, np.zeros((2, 2), dtype=np.int32))
    with pytest.raises(ImageIOError, match="unsupported bit depth"):
        load_image(path)


def test_unsupported_extension(tmp_path):
    with pytest.raises(ImageIOError, match="cannot infer format"):
        save_image(Image(np.zeros((2, 2, 3))), tmp_path / "img.exr")


def test_load_rejects_unsupported_layouts(tmp_path):
    import tifffile

    four_channel = tmp_path / "rgba.tif"
    tifffile.imwrite(four_channel, np.zeros((4, 4, 4), dtype=np.uint8))
    with pytest.raises(ImageIOError, match="unsupported image layout"):
        load_image(four_channel)

    stack = tmp_path / "stack.tif"
    tifffile.imwrite(stack, np.zeros((2, 4, 4, 3), dtype=np.uint8))
    with pytest.raises(ImageIOError, match="unsupported image layout"):
        load_image(stack)


# --- purity -------------------------------------------------------------------


def test_operations_are_deterministic(rng):
    img = random_image(rng, 13, 9)
    a = resize_bilinear(img, 7, 21).data
    b = resize_bilinear(img, 7, 21).data
    np.testing.assert_array_equal(a, b)
