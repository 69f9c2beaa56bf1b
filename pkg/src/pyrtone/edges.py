"""Canny edge maps, used to condition the coarsest refinement level.

Stages: Rec. 709 luminance -> Gaussian blur (2*ceil(3*sigma)+1 taps) ->
Sobel gradients -> non-maximum suppression with 8-direction quantization
-> double threshold (relative to the gradient maximum) -> hysteresis by
8-connectivity.  Thresholds are relative, so the result is invariant to
rescaling the input by a positive constant.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .image import ColorSpace, Image

_LUMA = np.array([0.2126, 0.7152, 0.0722])
_TAN_22_5 = math.tan(math.pi / 8.0)


def _shift(a: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift with edge clamping: out[y, x] = a[y + dy, x + dx]."""
    p = np.pad(a, 1, mode="edge")
    return p[1 + dy : 1 + dy + a.shape[0], 1 + dx : 1 + dx + a.shape[1]]


def canny(img: Image, blur_sigma: float = 1.0, low_thresh: float = 0.1, high_thresh: float = 0.2) -> Image:
    """Binary edge map (values exactly 0 or 1) at the input resolution."""
    if not (0.0 < low_thresh < high_thresh <= 1.0):
        raise ValueError(f"need 0 < low < high <= 1, got low={low_thresh} high={high_thresh}")
    lum = img.data @ _LUMA if img.channels == 3 else img.data[:, :, 0]

    if blur_sigma > 0:
        radius = math.ceil(3.0 * blur_sigma)
        lum = ndimage.gaussian_filter(lum, blur_sigma, mode="nearest", radius=radius)

    gy = ndimage.sobel(lum, axis=0, mode="nearest")
    gx = ndimage.sobel(lum, axis=1, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0.0:
        return Image(np.zeros_like(lum), ColorSpace.GRAY)

    # Quantize the gradient into 8 directions by magnitude comparison (no
    # arctan, so 90-degree rotations map sectors exactly).  The uphill
    # neighbor offset follows the signed gradient.
    ax, ay = np.abs(gx), np.abs(gy)
    horiz = ay <= _TAN_22_5 * ax
    vert = ax <= _TAN_22_5 * ay
    sx = np.sign(gx).astype(np.intp)
    sy = np.sign(gy).astype(np.intp)
    dy = np.where(horiz, 0, sy)
    dx = np.where(vert, 0, sx)

    # Keep a pixel if it is >= its downhill neighbor and > its uphill
    # neighbor; the strict side breaks two-pixel plateau ties consistently
    # toward the uphill (brighter) side.
    up = np.zeros_like(mag)
    down = np.zeros_like(mag)
    for off_y in (-1, 0, 1):
        for off_x in (-1, 0, 1):
            if off_y == 0 and off_x == 0:
                continue
            sel = (dy == off_y) & (dx == off_x)
            if not np.any(sel):
                continue
            shifted = _shift(mag, off_y, off_x)
            up[sel] = shifted[sel]
            shifted = _shift(mag, -off_y, -off_x)
            down[sel] = shifted[sel]
    ridge = (mag > 0) & (mag >= down) & (mag > up)
    nms = np.where(ridge, mag, 0.0)

    strong = nms >= high_thresh * peak
    weak = nms >= low_thresh * peak
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return Image(np.zeros_like(lum), ColorSpace.GRAY)
    keep = np.unique(labels[strong])
    keep = keep[keep > 0]
    out = np.isin(labels, keep).astype(np.float64)
    return Image(out, ColorSpace.GRAY)
