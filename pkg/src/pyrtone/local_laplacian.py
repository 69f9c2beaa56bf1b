"""Edge-aware detail manipulation built on the local Laplacian filter.

The core is the pointwise remapping curve :func:`remap`: around a reference
intensity ``g``, differences up to ``sigma_r`` are treated as detail and
reshaped by the exponent ``alpha``, while larger excursions are treated as
edges and scaled by ``beta``.  ``alpha = beta = 1`` is the identity and is
returned exactly.

Three ways of applying the curve are provided:

* :func:`refine_level` remaps existing Laplacian coefficients directly
  against their Gaussian references (cheap, used by the pipeline);
* :func:`direct_llf` rebuilds every output coefficient from a remapped
  copy of the image, one reference value per coefficient (the slow,
  unambiguous definition, used as the correctness oracle);
* :func:`fast_llf` approximates the direct filter by remapping against K
  uniformly spaced reference values and interpolating between the
  resulting pyramids.

Color images are filtered per channel independently.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .image import Image
from .pyramid import (
    LaplacianPyramid,
    gaussian_pyramid,
    laplacian_from_gaussian,
    laplacian_reconstruct,
    _down2,
    _up2,
)


def _remap_delta(delta: np.ndarray, alpha, beta, sigma_r: float) -> np.ndarray:
    """Signed remapped offset from the reference: remap(g + delta, g) - g.

    Dispatches to a fused kernel for the common scalar-parameter and
    (h, w)-map cases; arbitrary broadcast shapes fall back to numpy.
    """
    if np.ndim(alpha) == 0 and np.ndim(beta) == 0:
        flat = np.ascontiguousarray(delta, dtype=np.float64).reshape(-1)
        return _kernels.remap_delta_scalar(flat, float(alpha), float(beta), sigma_r).reshape(delta.shape)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if (
        delta.ndim == 3
        and alpha.shape in ((delta.shape[0], delta.shape[1]), (delta.shape[0], delta.shape[1], 1))
        and alpha.shape == beta.shape
    ):
        return _kernels.remap_delta_maps(
            np.ascontiguousarray(delta, dtype=np.float64),
            np.ascontiguousarray(alpha.reshape(delta.shape[0], delta.shape[1])),
            np.ascontiguousarray(beta.reshape(delta.shape[0], delta.shape[1])),
            sigma_r,
        )
    a = np.abs(delta)
    detail_region = a <= sigma_r
    t = a / sigma_r
    np.power(t, alpha, out=t)
    t *= sigma_r
    # edge branch reuses the |delta| buffer
    a -= sigma_r
    a *= beta
    a += sigma_r
    np.copyto(a, t, where=detail_region)
    return np.copysign(a, delta, out=a)


def remap(i, g, alpha=1.0, beta=1.0, sigma_r: float = 0.1):
    """Remapping curve around reference intensity g.

    For a = |i - g|: within the detail range (a <= sigma_r) the output is
    g + sign(i-g) * sigma_r * (a/sigma_r)**alpha; beyond it the output is
    g + sign(i-g) * (beta * (a - sigma_r) + sigma_r).  The two branches
    meet at a = sigma_r for any alpha > 0, beta >= 0.  All arguments
    broadcast; scalars and arrays mix freely.
    """
    if sigma_r <= 0:
        raise ValueError(f"sigma_r must be positive, got {sigma_r}")
    i = np.asarray(i, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    shape = np.broadcast_shapes(i.shape, g.shape, alpha.shape, beta.shape)
    if np.all(alpha == 1.0) and np.all(beta == 1.0):
        # Identity parameters return the input exactly; the formula below
        # agrees only to round-off.
        return np.broadcast_to(i, shape).copy()
    work_shape = shape if shape else (1,)
    delta = np.broadcast_to(np.subtract(i, g), work_shape)
    out = _remap_delta(delta, alpha, beta, sigma_r)
    out += g
    return out.reshape(shape)


def _map_array(m, name: str, shape: tuple[int, int]) -> np.ndarray:
    if np.isscalar(m) or (isinstance(m, np.ndarray) and m.ndim == 0):
        return np.asarray(m, dtype=np.float64)
    arr = m.data[:, :, 0] if isinstance(m, Image) else np.asarray(m, dtype=np.float64)
    if arr.shape != shape:
        raise ValueError(f"{name} map is {arr.shape}, band is {shape}")
    return arr


def refine_level(band: Image, gauss: Image, alpha_map, beta_map, sigma_r: float = 0.1) -> Image:
    """Remap one band's coefficients against its Gaussian level.

    Treats g + l as the local intensity: the refined coefficient is
    remap(g + l, g) - g per pixel and channel.  Parameter maps are
    single-channel (broadcast across color channels) or scalars.  With
    alpha = beta = 1 the band is returned unchanged.
    """
    if band.shape != gauss.shape:
        raise ValueError(f"band {band.shape} and gaussian {gauss.shape} differ")
    hw = (band.height, band.width)
    alpha = _map_array(alpha_map, "alpha", hw)
    beta = _map_array(beta_map, "beta", hw)
    if np.all(alpha == 1.0) and np.all(beta == 1.0):
        return band.with_data(band.data.copy())
    if alpha.ndim == 2:
        alpha = alpha[:, :, None]
    if beta.ndim == 2:
        beta = beta[:, :, None]
    # The band *is* the offset from the reference, so the Gaussian level
    # cancels out of the pointwise rule remap(g + l, g) - g.
    refined = _remap_delta(band.data, alpha, beta, sigma_r)
    return band.with_data(refined)


def refine_level_sampled(
    band: Image, gauss: Image, alpha_map, beta_map, sigma_r: float = 0.1, n_samples: int = 16
) -> Image:
    """Sampled-reference variant of :func:`refine_level`.

    Evaluates the remap against ``n_samples`` uniformly spaced reference
    values and linearly interpolates the refined coefficients between the
    two samples bracketing each Gaussian coefficient.  Converges to
    :func:`refine_level` as the sample count grows.
    """
    if n_samples < 2:
        raise ValueError(f"need at least 2 reference samples, got {n_samples}")
    if band.shape != gauss.shape:
        raise ValueError(f"band {band.shape} and gaussian {gauss.shape} differ")
    hw = (band.height, band.width)
    alpha = _map_array(alpha_map, "alpha", hw)
    beta = _map_array(beta_map, "beta", hw)
    if alpha.ndim == 2:
        alpha = alpha[:, :, None]
    if beta.ndim == 2:
        beta = beta[:, :, None]
    g = gauss.data
    i = g + band.data
    pos = np.clip(g, 0.0, 1.0) * (n_samples - 1)
    out = np.zeros_like(band.data)
    for s in range(n_samples):
        w = np.clip(1.0 - np.abs(pos - s), 0.0, 1.0)
        if not np.any(w):
            continue
        ref = s / (n_samples - 1)
        out += w * (remap(i, ref, alpha, beta, sigma_r) - ref)
    return band.with_data(out)


def _channel_views(img: Image) -> list[np.ndarray]:
    return [img.data[:, :, c] for c in range(img.channels)]


def direct_llf(img: Image, alpha=1.0, beta=1.0, sigma_r: float = 0.1, n: int = 1) -> Image:
    """Reference local Laplacian filter, one remapped pyramid per coefficient.

    For every output coefficient at level k, position p: remap the whole
    channel against the Gaussian coefficient g_k(p), decompose the remapped
    channel, and keep its band-k value at p.  The residual is the input's
    own coarse Gaussian level.  Quadratic in pixel count; intended as the
    ground-truth oracle for :func:`fast_llf`, not for production use.
    """
    if n < 1:
        raise ValueError(f"level count must be >= 1, got {n}")
    out_channels = []
    for chan in _channel_views(img):
        gauss = [chan]
        for _ in range(n):
            if gauss[-1].shape == (1, 1):
                raise ValueError(f"cannot build {n} levels from {img.height}x{img.width}: ran out of pixels to halve")
            gauss.append(_down2(gauss[-1]))
        bands = []
        for k in range(n):
            hk, wk = gauss[k].shape
            band = np.empty_like(gauss[k])
            refs = gauss[k]
            for y in range(hk):
                for x in range(wk):
                    remapped = remap(chan, refs[y, x], alpha, beta, sigma_r)
                    lvl = remapped
                    for _ in range(k):
                        lvl = _down2(lvl)
                    nxt = _down2(lvl)
                    up = _up2(nxt, hk, wk)
                    band[y, x] = lvl[y, x] - up[y, x]
            bands.append(band)
        x_rec = gauss[n]
        for k in reversed(range(n)):
            x_rec = _up2(x_rec, *gauss[k].shape) + bands[k]
        out_channels.append(x_rec)
    return img.with_data(np.stack(out_channels, axis=-1))


def fast_llf(img: Image, alpha=1.0, beta=1.0, sigma_r: float = 0.1, n: int = 1, n_samples: int = 16) -> Image:
    """Sampled-reference local Laplacian filter.

    Remaps the image against ``n_samples`` uniformly spaced reference
    intensities in [0, 1], decomposes each remapped copy, and blends the
    per-level coefficients of the two pyramids bracketing each Gaussian
    coefficient.  Exact whenever every Gaussian coefficient lies on the
    sample grid; converges to :func:`direct_llf` as samples increase.
    """
    if n_samples < 2:
        raise ValueError(f"need at least 2 reference samples, got {n_samples}")
    gp = gaussian_pyramid(img, n)
    glevels = [lvl.data for lvl in gp.levels]
    positions = [np.clip(g, 0.0, 1.0) * (n_samples - 1) for g in glevels[:n]]
    out_bands = [np.zeros_like(g) for g in glevels[:n]]
    for s in range(n_samples):
        ref = s / (n_samples - 1)
        remapped = img.with_data(remap(img.data, ref, alpha, beta, sigma_r))
        lap = laplacian_from_gaussian(gaussian_pyramid(remapped, n))
        for k in range(n):
            w = np.clip(1.0 - np.abs(positions[k] - s), 0.0, 1.0)
            if np.any(w):
                out_bands[k] += w * lap.bands[k].data
    pyr = LaplacianPyramid(
        tuple(img.with_data(b) for b in out_bands),
        gp.levels[n],
    )
    return laplacian_reconstruct(pyr)


def objective_eval(output: Image, reference: Image) -> float:
    """Mean absolute error between an output and its reference."""
    if output.shape != reference.shape:
        raise ValueError(f"shape mismatch: {output.shape} vs {reference.shape}")
    return float(np.mean(np.abs(output.data - reference.data)))
