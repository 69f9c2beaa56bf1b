"""Learned-parameter supply: bundles, built-in fallback, conditioning stacks.

The engine itself contains no predictor.  Everything learned (basis LUT
lattices, scalar weight points, per-pixel weight maps, per-level remap
parameters) arrives through an :class:`EnhancementParams` value, either
deserialized from an ``LLFP1`` bundle or synthesized by
:func:`heuristic_params` (the provable no-op configuration).

Bundle wire format (all multi-byte values little-endian)::

    magic   6 bytes  b"LLFP1\\n"
    length  u32      byte length of the JSON manifest
    json    manifest (utf-8, canonical key order)
    arrays  float32 payload, concatenated in manifest["arrays"] order

The manifest declares scalar configuration (t, n_bins, sigma_r, lr_size,
param_mode, conditioning flag) plus an explicit array directory of
{name, shape} records.  The directory is validated against the scalar
configuration, and the payload byte length must match it exactly, so
truncation and over-/under-declared arrays are caught with the offending
field named.

This module also defines the conditioning-stack layouts an external
predictor consumes: for the coarsest refined level the channel order is
[band(3), up(residual)(3), up(lr_enhanced)(3), up(lr_edges)(1), gauss(3)]
(13 channels); interior levels use [band(3), up(refined_below)(3),
gauss(3)] (9 channels).  Setting ``include_gaussian_conditioning`` to
False drops the trailing gauss block (10- and 6-channel variants).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from .image import Image
from .lut import Lut3D, identity_lut
from .pyramid import _up2

MAGIC = b"LLFP1\n"


class BundleError(ValueError):
    """Malformed or inconsistent parameter bundle."""


@dataclass(frozen=True)
class ConstantParams:
    """Same remap parameters at every level.

    ``alpha``/``beta`` may each be a single float (applied to all levels)
    or a per-level sequence indexed by band level.
    """

    alpha: float | tuple[float, ...] = 1.0
    beta: float | tuple[float, ...] = 1.0

    def level(self, k: int):
        a = self.alpha[k] if isinstance(self.alpha, tuple) else self.alpha
        b = self.beta[k] if isinstance(self.beta, tuple) else self.beta
        return a, b


@dataclass(frozen=True)
class LevelParamMaps:
    """Per-level alpha/beta maps at band resolution, indexed by band level."""

    alpha_maps: tuple[np.ndarray, ...]
    beta_maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.alpha_maps) != len(self.beta_maps):
            raise BundleError("alpha_maps and beta_maps must pair up one per level")
        object.__setattr__(self, "alpha_maps", tuple(np.asarray(a, dtype=np.float64) for a in self.alpha_maps))
        object.__setattr__(self, "beta_maps", tuple(np.asarray(b, dtype=np.float64) for b in self.beta_maps))

    def level(self, k: int):
        if k >= len(self.alpha_maps):
            raise BundleError(f"no parameter maps for level {k} (bundle has {len(self.alpha_maps)})")
        return self.alpha_maps[k], self.beta_maps[k]


@dataclass(frozen=True)
class EnhancementParams:
    """Everything learned that the pipeline consumes."""

    luts: tuple[Lut3D, ...]
    weight_points: np.ndarray
    weight_maps: np.ndarray  # (t, lr_h, lr_w)
    level_params: ConstantParams | LevelParamMaps
    sigma_r: float = 0.1
    include_gaussian_conditioning: bool = True

    def __post_init__(self):
        luts = tuple(self.luts)
        points = np.asarray(self.weight_points, dtype=np.float64)
        maps = np.asarray(self.weight_maps, dtype=np.float64)
        if len(luts) < 1:
            raise BundleError("luts: need at least one basis LUT")
        t = len(luts)
        n = luts[0].n_bins
        for idx, lut in enumerate(luts):
            if lut.n_bins != n:
                raise BundleError(f"luts[{idx}]: {lut.n_bins} bins, expected {n}")
        if points.shape != (t,):
            raise BundleError(f"weight_points: shape {points.shape} does not match t={t}")
        if not np.isfinite(points).all():
            raise BundleError("weight_points: values must be finite")
        if maps.ndim != 3 or maps.shape[0] != t:
            raise BundleError(f"weight_maps: shape {maps.shape} does not match t={t} single-channel maps")
        if not np.isfinite(maps).all():
            raise BundleError("weight_maps: values must be finite")
        if self.sigma_r <= 0:
            raise BundleError(f"sigma_r: must be positive, got {self.sigma_r}")
        object.__setattr__(self, "luts", luts)
        object.__setattr__(self, "weight_points", points)
        object.__setattr__(self, "weight_maps", maps)

    @property
    def basis_count(self) -> int:
        return len(self.luts)

    @property
    def n_bins(self) -> int:
        return self.luts[0].n_bins

    @property
    def lr_size(self) -> tuple[int, int]:
        return self.weight_maps.shape[1], self.weight_maps.shape[2]


def heuristic_params(lr: Image, t: int = 3, n_bins: int = 33) -> EnhancementParams:
    """Identity fallback used when no trained bundle is supplied.

    Identity basis LUTs, a one-hot weight point on LUT 0, uniform one-hot
    weight maps at the low-resolution dimensions, alpha = beta = 1, and
    sigma_r = 0.1: the pipeline becomes a provable no-op.
    """
    if t < 1:
        raise ValueError(f"need at least one basis LUT, got t={t}")
    luts = tuple(identity_lut(n_bins) for _ in range(t))
    points = np.zeros(t)
    points[0] = 1.0
    maps = np.zeros((t, lr.height, lr.width))
    maps[0] = 1.0
    return EnhancementParams(luts, points, maps, ConstantParams(1.0, 1.0), sigma_r=0.1)


# ---------------------------------------------------------------------------
# Bundle serialization.
# ---------------------------------------------------------------------------


def _expected_arrays(manifest: dict) -> list[tuple[str, tuple[int, ...]]]:
    t = manifest["t"]
    n = manifest["n_bins"]
    lr_h, lr_w = manifest["lr_size"]
    arrays = [(f"lut{i}", (n, n, n, 3)) for i in range(t)]
    arrays.append(("weight_points", (t,)))
    arrays.extend((f"weight_map{i}", (lr_h, lr_w)) for i in range(t))
    if manifest["param_mode"] == "maps":
        for lvl, (h, w) in enumerate(manifest["map_sizes"]):
            arrays.append((f"alpha_map{lvl}", (h, w)))
            arrays.append((f"beta_map{lvl}", (h, w)))
    return arrays


def _manifest_for(params: EnhancementParams) -> tuple[dict, list[np.ndarray]]:
    manifest: dict = {
        "version": 1,
        "t": params.basis_count,
        "n_bins": params.n_bins,
        "sigma_r": params.sigma_r,
        "lr_size": list(params.lr_size),
        "include_gaussian_conditioning": params.include_gaussian_conditioning,
    }
    payload = [lut.entries for lut in params.luts]
    payload.append(params.weight_points)
    payload.extend(params.weight_maps)
    lp = params.level_params
    if isinstance(lp, ConstantParams):
        manifest["param_mode"] = "constant"
        manifest["alpha"] = list(lp.alpha) if isinstance(lp.alpha, tuple) else lp.alpha
        manifest["beta"] = list(lp.beta) if isinstance(lp.beta, tuple) else lp.beta
    else:
        manifest["param_mode"] = "maps"
        manifest["map_sizes"] = [list(a.shape) for a in lp.alpha_maps]
        for a, b in zip(lp.alpha_maps, lp.beta_maps):
            payload.append(a)
            payload.append(b)
    manifest["arrays"] = [
        {"name": name, "shape": list(shape)} for name, shape in _expected_arrays(manifest)
    ]
    return manifest, payload


def save_bundle(params: EnhancementParams, path) -> None:
    """Serialize to the LLFP1 format; identical params yield identical bytes."""
    manifest, payload = _manifest_for(params)
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in payload:
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_bundle(path) -> EnhancementParams:
    """Read and validate an LLFP1 bundle; errors name the offending field."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise BundleError(f"bad magic in {path}: not an LLFP1 bundle")
    offset = len(MAGIC)
    (blob_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if len(raw) < offset + blob_len:
        raise BundleError(f"manifest: truncated (declared {blob_len} bytes, {len(raw) - offset} available)")
    try:
        manifest = json.loads(raw[offset : offset + blob_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleError(f"manifest: invalid JSON ({exc})") from exc
    offset += blob_len

    for key in ("t", "n_bins", "sigma_r", "lr_size", "param_mode", "arrays"):
        if key not in manifest:
            raise BundleError(f"manifest: missing field {key!r}")
    if manifest["param_mode"] not in ("constant", "maps"):
        raise BundleError(f"param_mode: unknown value {manifest['param_mode']!r}")
    if manifest["param_mode"] == "maps" and "map_sizes" not in manifest:
        raise BundleError("manifest: missing field 'map_sizes'")
    if not isinstance(manifest["t"], int) or manifest["t"] < 0:
        raise BundleError(f"t: must be a non-negative integer, got {manifest['t']!r}")
    if not isinstance(manifest["n_bins"], int) or manifest["n_bins"] < 2:
        raise BundleError(f"n_bins: must be an integer >= 2, got {manifest['n_bins']!r}")
    if not (isinstance(manifest["lr_size"], list) and len(manifest["lr_size"]) == 2):
        raise BundleError(f"lr_size: must be [height, width], got {manifest['lr_size']!r}")
    if not all(isinstance(v, int) and v >= 1 for v in manifest["lr_size"]):
        raise BundleError(f"lr_size: dimensions must be positive integers, got {manifest['lr_size']!r}")
    for size in manifest.get("map_sizes", []):
        if not (isinstance(size, list) and len(size) == 2 and all(isinstance(v, int) and v >= 1 for v in size)):
            raise BundleError(f"map_sizes: each entry must be [height, width] of positive integers, got {size!r}")

    try:
        expected = _expected_arrays(manifest)
    except (TypeError, ValueError) as exc:
        raise BundleError(f"manifest: malformed array configuration ({exc})") from exc
    try:
        declared = [(rec["name"], tuple(rec["shape"])) for rec in manifest["arrays"]]
    except (TypeError, KeyError) as exc:
        raise BundleError(f"arrays: malformed directory entry ({exc})") from exc
    if declared != expected:
        if len(declared) != len(expected):
            raise BundleError(f"arrays: manifest declares {len(declared)} arrays, configuration requires {len(expected)}")
        for (dn, ds), (en, es) in zip(declared, expected):
            if dn != en or ds != es:
                raise BundleError(f"arrays: declared {dn}{list(ds)}, expected {en}{list(es)}")

    total = sum(int(np.prod(shape)) for _, shape in expected)
    body = raw[offset:]
    if len(body) != total * 4:
        raise BundleError(f"payload: truncated or oversized ({len(body)} bytes for {total * 4} expected)")
    flat = np.frombuffer(body, dtype="<f4").astype(np.float64)

    arrays: dict[str, np.ndarray] = {}
    pos = 0
    for name, shape in expected:
        size = int(np.prod(shape))
        arrays[name] = flat[pos : pos + size].reshape(shape)
        pos += size

    t = manifest["t"]
    try:
        luts = tuple(Lut3D(arrays[f"lut{i}"]) for i in range(t))
    except ValueError as exc:
        raise BundleError(f"luts: {exc}") from exc
    if manifest["param_mode"] == "constant":
        alpha = manifest.get("alpha", 1.0)
        beta = manifest.get("beta", 1.0)
        level_params = ConstantParams(
            tuple(alpha) if isinstance(alpha, list) else float(alpha),
            tuple(beta) if isinstance(beta, list) else float(beta),
        )
    else:
        levels = len(manifest["map_sizes"])
        level_params = LevelParamMaps(
            tuple(arrays[f"alpha_map{k}"] for k in range(levels)),
            tuple(arrays[f"beta_map{k}"] for k in range(levels)),
        )
    return EnhancementParams(
        luts,
        arrays["weight_points"],
        np.stack([arrays[f"weight_map{i}"] for i in range(t)]) if t else np.zeros((0, 0, 0)),
        level_params,
        sigma_r=float(manifest["sigma_r"]),
        include_gaussian_conditioning=bool(manifest.get("include_gaussian_conditioning", True)),
    )


# ---------------------------------------------------------------------------
# Conditioning stacks (the external-predictor input contract).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditioningStack:
    """Channel-concatenated predictor input for one refinement level."""

    level: int
    data: np.ndarray  # (h, w, channels)
    layout: tuple[tuple[str, int], ...]  # ordered (role, channel count)

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def _up_to(img: Image, h: int, w: int) -> np.ndarray:
    return _up2(img.data, h, w)


def assemble_coarsest_conditioning(
    band: Image,
    residual: Image,
    lr_enhanced: Image,
    lr_edges: Image,
    gauss: Image,
    level: int,
    include_gaussian: bool = True,
) -> ConditioningStack:
    """Stack for the deepest refined level.

    Channel order: band (3), upsampled residual (3), upsampled enhanced LR
    image (3), upsampled LR edge map (1), then the Gaussian level (3)
    unless disabled.  All upsampling is the pyramid's own upsample2.
    """
    h, w = band.height, band.width
    if band.channels != 3 or residual.channels != 3 or lr_enhanced.channels != 3:
        raise ValueError("band, residual, and lr_enhanced must be 3-channel")
    if lr_edges.channels != 1:
        raise ValueError("lr_edges must be single-channel")
    if residual.shape != lr_enhanced.shape or (residual.height, residual.width) != (lr_edges.height, lr_edges.width):
        raise ValueError("residual, lr_enhanced, and lr_edges must share dimensions")
    parts = [
        band.data,
        _up_to(residual, h, w),
        _up_to(lr_enhanced, h, w),
        _up_to(lr_edges, h, w),
    ]
    layout = [("band", 3), ("up_residual", 3), ("up_lr_enhanced", 3), ("up_lr_edges", 1)]
    if include_gaussian:
        if gauss.shape != band.shape:
            raise ValueError(f"gaussian level {gauss.shape} does not match band {band.shape}")
        parts.append(gauss.data)
        layout.append(("gauss", 3))
    return ConditioningStack(level, np.concatenate(parts, axis=2), tuple(layout))


def assemble_interior_conditioning(
    band: Image,
    refined_below: Image,
    gauss: Image,
    level: int,
    include_gaussian: bool = True,
) -> ConditioningStack:
    """Stack for levels above the deepest: band, upsampled refined band
    from the level below, and (unless disabled) the Gaussian level."""
    h, w = band.height, band.width
    if band.channels != 3 or refined_below.channels != 3:
        raise ValueError("band and refined_below must be 3-channel")
    parts = [band.data, _up_to(refined_below, h, w)]
    layout = [("band", 3), ("up_refined_below", 3)]
    if include_gaussian:
        if gauss.shape != band.shape:
            raise ValueError(f"gaussian level {gauss.shape} does not match band {band.shape}")
        parts.append(gauss.data)
        layout.append(("gauss", 3))
    return ConditioningStack(level, np.concatenate(parts, axis=2), tuple(layout))
