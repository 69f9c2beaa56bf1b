"""Gaussian/Laplacian pyramid decomposition with exact reconstruction.

The pyramid uses the classical 5-tap binomial kernel (1, 4, 6, 4, 1)/16
with clamped borders.  Sizes ceil-halve at every level, so any input size
decomposes and reconstructs exactly: ``upsample2`` accepts a target of
``2s - 1`` or ``2s`` for an input dimension ``s``.  The depth is chosen
adaptively so the coarsest level lands at (or just under) a target edge
length, 64 px by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .image import Image

KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def adaptive_levels(h: int, w: int, target: int = 64) -> int:
    """Number of halvings needed to bring max(h, w) to <= target.

    Returns at least 1 whenever any halving is possible; 0 only for a
    degenerate 1x1 input.  Equivalent to ceil(log2(max(h, w) / target))
    floored at 1, computed with integer arithmetic.
    """
    if h < 1 or w < 1 or target < 1:
        raise ValueError(f"dimensions and target must be >= 1, got {h}x{w} target {target}")
    m = max(h, w)
    if m <= target:
        return 1 if m >= 2 else 0
    n = 0
    while m > target:
        m = (m + 1) // 2
        n += 1
    return n


def _down2(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 2:
        return _kernels.down2(a[:, :, None])[:, :, 0]
    return _kernels.down2(a)


def _check_up_target(n: int, out_n: int) -> None:
    if out_n not in (2 * n - 1, 2 * n):
        raise ValueError(f"upsample target {out_n} invalid for source size {n} (expected {2 * n - 1} or {2 * n})")


def _up2(a: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    _check_up_target(a.shape[0], out_h)
    _check_up_target(a.shape[1], out_w)
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 2:
        return _kernels.up2(a[:, :, None], out_h, out_w)[:, :, 0]
    return _kernels.up2(a, out_h, out_w)


def _up2_add(a: np.ndarray, band: np.ndarray) -> np.ndarray:
    _check_up_target(a.shape[0], band.shape[0])
    _check_up_target(a.shape[1], band.shape[1])
    return _kernels.up2_add(np.ascontiguousarray(a, dtype=np.float64), band)


def downsample2(img: Image) -> Image:
    """Blur with the 5-tap kernel and decimate by 2 (ceil-halved sizes)."""
    return img.with_data(_down2(img.data))


def upsample2(img: Image, out_h: int, out_w: int) -> Image:
    """Invert one halving step; target dims must be 2s-1 or 2s per axis."""
    return img.with_data(_up2(img.data, out_h, out_w))


@dataclass(frozen=True)
class GaussianPyramid:
    """Progressively low-passed levels; index 0 is the source resolution."""

    levels: tuple[Image, ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    kernel = KERNEL


@dataclass(frozen=True)
class LaplacianPyramid:
    """Signed band-pass levels plus the low-frequency residual."""

    bands: tuple[Image, ...]
    residual: Image

    @property
    def depth(self) -> int:
        return len(self.bands)


def gaussian_pyramid(img: Image, n: int) -> GaussianPyramid:
    """n+1 levels, each a blurred ceil-halving of the previous one."""
    if n < 1:
        raise ValueError(f"level count must be >= 1, got {n}")
    levels = [img]
    cur = img
    for _ in range(n):
        if cur.height == 1 and cur.width == 1:
            raise ValueError(f"cannot build {n} levels from {img.height}x{img.width}: ran out of pixels to halve")
        cur = downsample2(cur)
        levels.append(cur)
    return GaussianPyramid(tuple(levels))


def laplacian_from_gaussian(gp: GaussianPyramid) -> LaplacianPyramid:
    """Band k = level k minus the upsampled level k+1; residual = coarsest."""
    bands = []
    for k in range(gp.depth):
        lo = gp.levels[k + 1]
        bands.append(gp.levels[k].with_data(_kernels.up2_sub(lo.data, gp.levels[k].data)))
    return LaplacianPyramid(tuple(bands), gp.levels[-1])


def laplacian_decompose(img: Image, n: int) -> LaplacianPyramid:
    return laplacian_from_gaussian(gaussian_pyramid(img, n))


def laplacian_reconstruct(pyr: LaplacianPyramid) -> Image:
    """Upsample-and-add from the residual back to full resolution."""
    x = pyr.residual.data
    h, w = pyr.residual.height, pyr.residual.width
    for band in reversed(pyr.bands):
        bh, bw = band.height, band.width
        if bh not in (2 * h - 1, 2 * h) or bw not in (2 * w - 1, 2 * w):
            raise ValueError(f"inconsistent pyramid: band {bh}x{bw} does not chain from {h}x{w}")
        x = _up2_add(x, band.data)
        h, w = bh, bw
    return pyr.residual.with_data(x)
