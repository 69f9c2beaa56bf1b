"""3D look-up tables: trilinear application, basis fusion, `.cube` I/O.

A :class:`Lut3D` is an ``n_bins**3`` lattice of RGB output triples over the
unit cube, indexed ``entries[i, j, k]`` for (red, green, blue) coordinates.
Two fusion strategies are provided: fusing basis LUT lattices with scalar
weight points before a single interpolation pass, and interpolating each
basis LUT separately before blending per pixel with weight maps.  Because
trilinear interpolation is linear in the lattice entries, the two agree
whenever the weight maps are spatially uniform.

Diagnostics for learned lattices (smoothness and monotonicity penalties)
and the Adobe/IRIDAS ``.cube`` text format round out the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .image import Image


class CubeParseError(ValueError):
    """Malformed `.cube` text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Lut3D:
    """Lattice of output colors; ``entries`` has shape (n, n, n, 3)."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 4 or entries.shape[3] != 3:
            raise ValueError(f"entries must have shape (n, n, n, 3), got {entries.shape}")
        n = entries.shape[0]
        if entries.shape[:3] != (n, n, n):
            raise ValueError(f"lattice must be cubic, got {entries.shape[:3]}")
        if n < 2:
            raise ValueError(f"lattice size must be >= 2, got {n}")
        if not np.isfinite(entries).all():
            raise ValueError("lattice entries must be finite")
        object.__setattr__(self, "entries", entries)

    @property
    def n_bins(self) -> int:
        return self.entries.shape[0]


def identity_lut(n_bins: int = 33) -> Lut3D:
    """Lattice mapping every node to its own coordinates."""
    if n_bins < 2:
        raise ValueError(f"lattice size must be >= 2, got {n_bins}")
    axis = np.linspace(0.0, 1.0, n_bins)
    r, g, b = np.meshgrid(axis, axis, axis, indexing="ij")
    return Lut3D(np.stack([r, g, b], axis=-1))


def apply_trilinear(lut: Lut3D, img: Image) -> Image:
    """Map colors through the lattice with trilinear interpolation.

    Input samples are clamped to the unit cube, scaled by ``n_bins - 1`` to
    locate the containing cell, and blended from its 8 corner entries.
    Inputs exactly on lattice nodes return the stored entries.
    """
    if img.channels != 3:
        raise ValueError(f"LUT application expects a 3-channel image, got {img.channels}")
    out = _kernels.trilinear(lut.entries, np.ascontiguousarray(img.data))
    return img.with_data(out)


def fuse_luts_points(luts: Sequence[Lut3D], weights) -> Lut3D:
    """Entrywise weighted sum of basis lattices (scalar weight points)."""
    weights = np.asarray(weights, dtype=np.float64)
    if len(luts) == 0:
        raise ValueError("need at least one basis LUT")
    if weights.ndim != 1 or weights.shape[0] != len(luts):
        raise ValueError(f"weight count {weights.shape} does not match {len(luts)} LUTs")
    n = luts[0].n_bins
    for t, lut in enumerate(luts):
        if lut.n_bins != n:
            raise ValueError(f"LUT {t} has {lut.n_bins} bins, expected {n}")
    fused = np.zeros_like(luts[0].entries)
    for w, lut in zip(weights, luts):
        fused += w * lut.entries
    return Lut3D(fused)


def apply_fused_maps(luts: Sequence[Lut3D], maps, img: Image) -> Image:
    """Interpolate each basis LUT, then blend per pixel with weight maps.

    ``maps`` is a sequence (one per LUT) of single-channel images or 2-D
    arrays matching the input dimensions.
    """
    if len(maps) != len(luts):
        raise ValueError(f"{len(maps)} weight maps for {len(luts)} LUTs")
    arrays = []
    for t, m in enumerate(maps):
        arr = m.data[:, :, 0] if isinstance(m, Image) else np.asarray(m, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"weight map {t} must be single-channel 2-D, got shape {arr.shape}")
        if arr.shape != (img.height, img.width):
            raise ValueError(
                f"weight map {t} is {arr.shape[0]}x{arr.shape[1]}, image is {img.height}x{img.width}"
            )
        arrays.append(arr)
    out = np.zeros_like(img.data)
    for arr, lut in zip(arrays, luts):
        out += arr[:, :, None] * apply_trilinear(lut, img).data
    return img.with_data(out)


def smoothness_penalty(lut: Lut3D) -> float:
    """Sum of squared adjacent-entry differences along each lattice axis."""
    total = 0.0
    for axis in range(3):
        d = np.diff(lut.entries, axis=axis)
        total += float(np.sum(d * d))
    return total


def monotonicity_penalty(lut: Lut3D) -> float:
    """Squared hinge on entry decreases along each lattice axis."""
    total = 0.0
    for axis in range(3):
        d = np.diff(lut.entries, axis=axis)
        viol = np.minimum(d, 0.0)
        total += float(np.sum(viol * viol))
    return total


# ---------------------------------------------------------------------------
# Adobe/IRIDAS .cube text format (3D only, unit domain, red varies fastest).
# ---------------------------------------------------------------------------


def parse_cube(text: str) -> Lut3D:
    """Parse `.cube` text into a lattice.

    Requires ``LUT_3D_SIZE``; ``DOMAIN_MIN``/``DOMAIN_MAX`` must describe
    the unit cube if present.  Raises :class:`CubeParseError` with the
    offending line number otherwise.
    """
    size: int | None = None
    rows: list[tuple[float, float, float]] = []
    first_data_line: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        token = line.split()[0]
        if token == "TITLE":
            continue
        if token == "LUT_1D_SIZE":
            raise CubeParseError("1D LUTs are not supported", lineno)
        if token == "LUT_3D_SIZE":
            parts = line.split()
            if len(parts) != 2:
                raise CubeParseError(f"malformed size line {line!r}", lineno)
            try:
                size = int(parts[1])
            except ValueError:
                raise CubeParseError(f"malformed size value {parts[1]!r}", lineno) from None
            if size < 2:
                raise CubeParseError(f"LUT_3D_SIZE must be >= 2, got {size}", lineno)
            continue
        if token in ("DOMAIN_MIN", "DOMAIN_MAX"):
            parts = line.split()
            want = 0.0 if token == "DOMAIN_MIN" else 1.0
            try:
                vals = [float(v) for v in parts[1:]]
            except ValueError:
                raise CubeParseError(f"malformed {token} line {line!r}", lineno) from None
            if len(vals) != 3 or any(v != want for v in vals):
                raise CubeParseError(f"{token} must be {want} {want} {want} (unit domain only)", lineno)
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CubeParseError(f"expected 3 values per data line, got {len(parts)}", lineno)
        try:
            triple = (float(parts[0]), float(parts[1]), float(parts[2]))
        except ValueError:
            raise CubeParseError(f"malformed float in data line {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in triple):
            raise CubeParseError(f"non-finite value in data line {line!r}", lineno)
        rows.append(triple)
        if first_data_line is None:
            first_data_line = lineno

    if size is None:
        raise CubeParseError("missing LUT_3D_SIZE line")
    expected = size ** 3
    if len(rows) != expected:
        raise CubeParseError(f"expected {expected} entries for size {size}, got {len(rows)}", first_data_line)
    # File order is red-fastest: axes come out (b, g, r) and are transposed.
    data = np.asarray(rows, dtype=np.float64).reshape(size, size, size, 3)
    return Lut3D(np.ascontiguousarray(data.transpose(2, 1, 0, 3)))


def write_cube(lut: Lut3D, title: str | None = None) -> str:
    """Serialize a lattice as `.cube` text (7 significant decimals)."""
    lines = []
    if title:
        lines.append(f'TITLE "{title}"')
    lines.append(f"LUT_3D_SIZE {lut.n_bins}")
    flat = lut.entries.transpose(2, 1, 0, 3).reshape(-1, 3)
    lines.extend(f"{r:.7f} {g:.7f} {b:.7f}" for r, g, b in flat)
    lines.append("")
    return "\n".join(lines)
