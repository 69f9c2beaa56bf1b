"""Image container, resampling, color-space conversions, and raster file I/O.

Every stage of the engine works on :class:`Image`: a planar float raster of
shape ``(height, width, channels)`` with a color-space tag.  Samples are
nominally in ``[0, 1]``; integer file formats are normalized on load
(16-bit by 1/65535, 8-bit by 1/255).  Laplacian bands reuse the same
container with signed values, which is why only finiteness is enforced,
not range.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ColorSpace(enum.Enum):
    LINEAR_RGB = "linear-rgb"
    SRGB = "srgb"
    XYZ = "xyz"
    LAB = "lab"
    GRAY = "gray"


_FINITE_SPACES = (ColorSpace.LINEAR_RGB, ColorSpace.SRGB)

# sRGB <-> CIE XYZ (D65, 2-degree observer).  Rows of the RGB->XYZ matrix
# sum to the D65 white point, so linear (1,1,1) maps to reference white.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.array([
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
])
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


class ImageIOError(RuntimeError):
    """Raised for unsupported or malformed raster files."""


@dataclass(frozen=True)
class Image:
    """Immutable float raster with shape ``(height, width, channels)``.

    ``data`` is coerced to float64; 2-D arrays become single-channel.
    Channel count must be 1 or 3.  All operations in this package treat
    images as immutable values and return new instances.
    """

    data: np.ndarray
    space: ColorSpace = ColorSpace.LINEAR_RGB

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ValueError(f"image data must be 2-D or 3-D, got {data.ndim}-D")
        h, w, c = data.shape
        if h < 1 or w < 1:
            raise ValueError(f"image dimensions must be >= 1, got {h}x{w}")
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if self.space in _FINITE_SPACES and not np.isfinite(data).all():
            raise ValueError(f"{self.space.value} samples must be finite")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "Image":
        """New image with replaced samples, same color-space tag."""
        return Image(data, self.space)


def clamp_unit(img: Image) -> Image:
    """Clamp samples to [0, 1].  Applied once at pipeline entry/exit."""
    return img.with_data(np.clip(img.data, 0.0, 1.0))


def _axis_taps(n_src: int, n_dst: int):
    """Half-pixel-centered source taps for 1-D bilinear resampling."""
    x = (np.arange(n_dst) + 0.5) * (n_src / n_dst) - 0.5
    i0 = np.floor(x).astype(np.intp)
    frac = x - i0
    i1 = np.clip(i0 + 1, 0, n_src - 1)
    i0 = np.clip(i0, 0, n_src - 1)
    return i0, i1, frac


def resize_bilinear(img: Image, out_h: int, out_w: int) -> Image:
    """Separable bilinear resample with half-pixel centers and clamped edges."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target dimensions must be >= 1, got {out_h}x{out_w}")
    data = img.data
    y0, y1, fy = _axis_taps(img.height, out_h)
    x0, x1, fx = _axis_taps(img.width, out_w)

    rows0 = data[y0]
    rows1 = data[y1]
    fy = fy[:, None, None]
    rows = rows0 * (1.0 - fy) + rows1 * fy

    cols0 = rows[:, x0]
    cols1 = rows[:, x1]
    fx = fx[None, :, None]
    out = cols0 * (1.0 - fx) + cols1 * fx
    return img.with_data(out)


def _require_space(img: Image, space: ColorSpace, op: str) -> None:
    if img.space is not space:
        raise ValueError(f"{op} expects {space.value} input, got {img.space.value}")


def srgb_to_linear(img: Image) -> Image:
    """IEC 61966-2-1 decoding: sRGB-encoded samples to linear light."""
    _require_space(img, ColorSpace.SRGB, "srgb_to_linear")
    s = img.data
    out = np.where(s <= 0.04045, s / 12.92, ((s + 0.055) / 1.055) ** 2.4)
    return Image(out, ColorSpace.LINEAR_RGB)


def linear_to_srgb(img: Image) -> Image:
    """IEC 61966-2-1 encoding: linear light to sRGB-encoded samples."""
    _require_space(img, ColorSpace.LINEAR_RGB, "linear_to_srgb")
    l = img.data
    out = np.where(l <= 0.0031308, 12.92 * l, 1.055 * np.power(np.maximum(l, 0.0), 1.0 / 2.4) - 0.055)
    return Image(out, ColorSpace.SRGB)


def _matmul_colors(data: np.ndarray, m: np.ndarray) -> np.ndarray:
    return data @ m.T


def xyz_to_linear_rgb(img: Image) -> Image:
    """CIE XYZ to linear sRGB primaries (D65).  Out-of-gamut values are not clamped."""
    _require_space(img, ColorSpace.XYZ, "xyz_to_linear_rgb")
    if img.channels != 3:
        raise ValueError("xyz_to_linear_rgb expects a 3-channel image")
    return Image(_matmul_colors(img.data, _XYZ_TO_RGB), ColorSpace.LINEAR_RGB)


def linear_rgb_to_xyz(img: Image) -> Image:
    """Linear sRGB primaries to CIE XYZ (D65)."""
    _require_space(img, ColorSpace.LINEAR_RGB, "linear_rgb_to_xyz")
    if img.channels != 3:
        raise ValueError("linear_rgb_to_xyz expects a 3-channel image")
    return Image(_matmul_colors(img.data, _RGB_TO_XYZ), ColorSpace.XYZ)


_LAB_DELTA = 6.0 / 29.0


def _lab_f(t: np.ndarray) -> np.ndarray:
    d3 = _LAB_DELTA ** 3
    return np.where(t > d3, np.cbrt(t), t / (3.0 * _LAB_DELTA ** 2) + 4.0 / 29.0)


def _lab_f_inv(ft: np.ndarray) -> np.ndarray:
    return np.where(ft > _LAB_DELTA, ft ** 3, 3.0 * _LAB_DELTA ** 2 * (ft - 4.0 / 29.0))


def rgb_to_lab(img: Image) -> Image:
    """Linear RGB to CIELAB via XYZ, D65 white point."""
    _require_space(img, ColorSpace.LINEAR_RGB, "rgb_to_lab")
    if img.channels != 3:
        raise ValueError("rgb_to_lab expects a 3-channel image")
    xyz = _matmul_colors(img.data, _RGB_TO_XYZ) / _D65_WHITE
    fx, fy, fz = (_lab_f(xyz[..., i]) for i in range(3))
    lab = np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)
    return Image(lab, ColorSpace.LAB)


def lab_to_rgb(img: Image) -> Image:
    """CIELAB back to linear RGB (inverse of :func:`rgb_to_lab`)."""
    _require_space(img, ColorSpace.LAB, "lab_to_rgb")
    if img.channels != 3:
        raise ValueError("lab_to_rgb expects a 3-channel image")
    lab = img.data
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _D65_WHITE
    return Image(_matmul_colors(xyz, _XYZ_TO_RGB), ColorSpace.LINEAR_RGB)


# ---------------------------------------------------------------------------
# File I/O.  Supported: PNG (8-bit), TIFF (8/16-bit integer, 32-bit float).
# ---------------------------------------------------------------------------

_KINDS = ("png", "tiff8", "tiff16", "tiff32f")


def _kind_from_path(path: Path) -> str:
    ext = path.suffix.lower()
    if ext == ".png":
        return "png"
    if ext in (".tif", ".tiff"):
        return "tiff16"
    raise ImageIOError(f"cannot infer format from extension {ext!r}; pass kind explicitly")


def _from_integer(arr: np.ndarray, path: Path) -> np.ndarray:
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / 65535.0
    if arr.dtype in (np.float32, np.float64):
        return arr.astype(np.float64)
    raise ImageIOError(f"unsupported bit depth {arr.dtype} in {path}")


def load_image(path, kind: str | None = None, space: ColorSpace = ColorSpace.LINEAR_RGB) -> Image:
    """Load a PNG or TIFF raster and normalize integer samples to [0, 1].

    ``kind`` is inferred from the extension when omitted.  The color-space
    tag is caller-supplied: raster files carry no tag of their own.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    kind = kind or _kind_from_path(path)
    if kind not in _KINDS:
        raise ImageIOError(f"unknown image kind {kind!r}; expected one of {_KINDS}")
    try:
        if kind == "png":
            from PIL import Image as PILImage

            with PILImage.open(path) as im:
                if im.mode not in ("L", "RGB"):
                    if im.mode in ("I", "I;16", "I;16B", "F", "RGBA", "LA", "P"):
                        raise ImageIOError(f"unsupported PNG mode {im.mode!r} in {path} (8-bit L/RGB only)")
                    raise ImageIOError(f"unsupported PNG mode {im.mode!r} in {path}")
                arr = np.asarray(im)
        else:
            import tifffile

            arr = tifffile.imread(path)
    except ImageIOError:
        raise
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageIOError(f"malformed image file {path}: {exc}") from exc
    arr = np.asarray(arr)
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] not in (1, 3)):
        raise ImageIOError(f"unsupported image layout {arr.shape} in {path} (need HxW or HxWx1/3)")
    if arr.ndim == 2 and (arr.shape[0] < 1 or arr.shape[1] < 1):
        raise ImageIOError(f"empty image in {path}")
    return Image(_from_integer(arr, path), space)


def save_image(img: Image, path, kind: str | None = None) -> None:
    """Write an image as 8-bit PNG, 8/16-bit TIFF, or 32-bit float TIFF.

    Integer kinds clamp to [0, 1] and round; ``tiff32f`` stores samples
    verbatim (float32), which is the interchange format for pyramid bands
    and conditioning stacks.
    """
    path = Path(path)
    kind = kind or _kind_from_path(path)
    if kind not in _KINDS:
        raise ImageIOError(f"unknown image kind {kind!r}; expected one of {_KINDS}")
    data = img.data
    squeezed = data[:, :, 0] if img.channels == 1 else data
    try:
        if kind == "png":
            from PIL import Image as PILImage

            q = np.round(np.clip(squeezed, 0.0, 1.0) * 255.0).astype(np.uint8)
            PILImage.fromarray(q).save(path, format="PNG")
        else:
            import tifffile

            if kind == "tiff8":
                out = np.round(np.clip(squeezed, 0.0, 1.0) * 255.0).astype(np.uint8)
            elif kind == "tiff16":
                out = np.round(np.clip(squeezed, 0.0, 1.0) * 65535.0).astype(np.uint16)
            else:
                out = squeezed.astype(np.float32)
            photometric = "minisblack" if out.ndim == 2 else "rgb"
            tifffile.imwrite(path, out, photometric=photometric)
    except ImageIOError:
        raise
    except Exception as exc:
        raise ImageIOError(f"cannot write image file {path}: {exc}") from exc
