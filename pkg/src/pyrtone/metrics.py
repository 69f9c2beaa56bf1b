"""Quality metrics: PSNR, SSIM, and mean CIELAB distance (CIE76).

PSNR assumes unit dynamic range.  SSIM uses the reference windowed
formulation: 11x11 Gaussian window (sigma 1.5), C1 = 0.01**2,
C2 = 0.03**2, statistics over valid windows only, averaged over channels.
An LPIPS slot exists in the report but is always absent here; it needs a
pretrained network this engine deliberately does not ship.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import ColorSpace, Image, rgb_to_lab, srgb_to_linear

_SSIM_C1 = 0.01 ** 2
_SSIM_C2 = 0.03 ** 2
_SSIM_RADIUS = 5  # 11-tap window


def _check_dims(a: Image, b: Image, op: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    delta_e: float
    lpips: float | None = None

    def as_dict(self) -> dict:
        return {"psnr": self.psnr, "ssim": self.ssim, "delta_e": self.delta_e, "lpips": self.lpips}


def psnr(a: Image, b: Image) -> float:
    """10*log10(1/MSE); identical inputs report infinity."""
    _check_dims(a, b, "psnr")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def _ssim_window_means(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(x, taps, axis=0, mode="constant")
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant")
    r = _SSIM_RADIUS
    return out[r:-r, r:-r]


def ssim(a: Image, b: Image) -> float:
    """Mean local structural similarity over valid 11x11 windows."""
    _check_dims(a, b, "ssim")
    if min(a.height, a.width) < 2 * _SSIM_RADIUS + 1:
        raise ValueError(f"ssim needs min dimension >= 11, got {a.height}x{a.width}")
    offs = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    taps = np.exp(-(offs ** 2) / (2.0 * 1.5 ** 2))
    taps /= taps.sum()

    scores = []
    for c in range(a.channels):
        x = a.data[:, :, c]
        y = b.data[:, :, c]
        mx = _ssim_window_means(x, taps)
        my = _ssim_window_means(y, taps)
        mxx = _ssim_window_means(x * x, taps)
        myy = _ssim_window_means(y * y, taps)
        mxy = _ssim_window_means(x * y, taps)
        vx = mxx - mx * mx
        vy = myy - my * my
        cov = mxy - mx * my
        num = (2.0 * mx * my + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
        den = (mx * mx + my * my + _SSIM_C1) * (vx + vy + _SSIM_C2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def _to_lab(img: Image) -> np.ndarray:
    if img.space is ColorSpace.LAB:
        return img.data
    if img.space is ColorSpace.SRGB:
        img = srgb_to_linear(img)
    if img.space is not ColorSpace.LINEAR_RGB:
        raise ValueError(f"delta_e expects linear RGB, sRGB, or Lab input, got {img.space.value}")
    return rgb_to_lab(img).data


def delta_e(a: Image, b: Image) -> float:
    """Mean per-pixel Euclidean distance in CIELAB (CIE76)."""
    _check_dims(a, b, "delta_e")
    if a.channels != 3:
        raise ValueError("delta_e expects 3-channel images")
    la = _to_lab(a)
    lb = _to_lab(b)
    return float(np.mean(np.sqrt(np.sum((la - lb) ** 2, axis=-1))))


def evaluate(a: Image, b: Image) -> MetricReport:
    return MetricReport(psnr=psnr(a, b), ssim=ssim(a, b), delta_e=delta_e(a, b))
