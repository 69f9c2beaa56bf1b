"""Fused numba kernels for the per-pixel hot paths.

Everything here is a single streaming pass over contiguous float64 arrays;
the numpy expression equivalents allocate a temporary per operator, which
costs a full memory round-trip each at 4K sizes.  Kernels are compiled
single-threaded and IEEE-strict (no fastmath), so results are bit-stable
across runs and match the straightforward formulas to the last ulp or two.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def down2(a: np.ndarray) -> np.ndarray:
    """Separable (1,4,6,4,1)/16 blur + decimate by 2, edge-clamped."""
    h, w, c = a.shape
    ho = (h + 1) // 2
    wo = (w + 1) // 2
    tmp = np.empty((ho, w, c), dtype=np.float64)
    for yo in range(ho):
        y = 2 * yo
        y0 = max(y - 2, 0)
        y1 = max(y - 1, 0)
        y3 = min(y + 1, h - 1)
        y4 = min(y + 2, h - 1)
        for x in range(w):
            for ch in range(c):
                tmp[yo, x, ch] = (
                    a[y0, x, ch]
                    + 4.0 * a[y1, x, ch]
                    + 6.0 * a[y, x, ch]
                    + 4.0 * a[y3, x, ch]
                    + a[y4, x, ch]
                ) / 16.0
    out = np.empty((ho, wo, c), dtype=np.float64)
    for y in range(ho):
        for xo in range(wo):
            x = 2 * xo
            x0 = max(x - 2, 0)
            x1 = max(x - 1, 0)
            x3 = min(x + 1, w - 1)
            x4 = min(x + 2, w - 1)
            for ch in range(c):
                out[y, xo, ch] = (
                    tmp[y, x0, ch]
                    + 4.0 * tmp[y, x1, ch]
                    + 6.0 * tmp[y, x, ch]
                    + 4.0 * tmp[y, x3, ch]
                    + tmp[y, x4, ch]
                ) / 16.0
    return out


@njit(cache=True)
def _up_axis0(a: np.ndarray, out_h: int) -> np.ndarray:
    """Vertical polyphase upsample: even rows (1,6,1)/8, odd rows (4,4)/8."""
    h, w, c = a.shape
    tmp = np.empty((out_h, w, c), dtype=np.float64)
    for i in range(h):
        im = max(i - 1, 0)
        ip = min(i + 1, h - 1)
        ye = 2 * i
        if ye < out_h:
            for x in range(w):
                for ch in range(c):
                    tmp[ye, x, ch] = (a[im, x, ch] + 6.0 * a[i, x, ch] + a[ip, x, ch]) / 8.0
        yo = 2 * i + 1
        if yo < out_h:
            for x in range(w):
                for ch in range(c):
                    tmp[yo, x, ch] = (a[i, x, ch] + a[ip, x, ch]) / 2.0
    return tmp


@njit(cache=True)
def up2(a: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Polyphase zero-insertion upsample with the doubled kernel.

    Even outputs: (1, 6, 1)/8 at source offsets (-1, 0, +1); odd outputs:
    (source[i] + source[i+1])/2; indices clamped in the source domain.
    """
    tmp = _up_axis0(a, out_h)
    h, w, c = tmp.shape
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    for y in range(out_h):
        for i in range(w):
            im = max(i - 1, 0)
            ip = min(i + 1, w - 1)
            xe = 2 * i
            if xe < out_w:
                for ch in range(c):
                    out[y, xe, ch] = (tmp[y, im, ch] + 6.0 * tmp[y, i, ch] + tmp[y, ip, ch]) / 8.0
            xo = 2 * i + 1
            if xo < out_w:
                for ch in range(c):
                    out[y, xo, ch] = (tmp[y, i, ch] + tmp[y, ip, ch]) / 2.0
    return out


@njit(cache=True)
def up2_add(a: np.ndarray, band: np.ndarray) -> np.ndarray:
    """band + upsample(a), the reconstruction step, in one output pass."""
    out_h, out_w, _ = band.shape
    tmp = _up_axis0(a, out_h)
    h, w, c = tmp.shape
    out = np.empty_like(band)
    for y in range(out_h):
        for i in range(w):
            im = max(i - 1, 0)
            ip = min(i + 1, w - 1)
            xe = 2 * i
            if xe < out_w:
                for ch in range(c):
                    out[y, xe, ch] = band[y, xe, ch] + (tmp[y, im, ch] + 6.0 * tmp[y, i, ch] + tmp[y, ip, ch]) / 8.0
            xo = 2 * i + 1
            if xo < out_w:
                for ch in range(c):
                    out[y, xo, ch] = band[y, xo, ch] + (tmp[y, i, ch] + tmp[y, ip, ch]) / 2.0
    return out


@njit(cache=True)
def up2_sub(a: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """ref - upsample(a), the band-extraction step, in one output pass."""
    out_h, out_w, _ = ref.shape
    tmp = _up_axis0(a, out_h)
    h, w, c = tmp.shape
    out = np.empty_like(ref)
    for y in range(out_h):
        for i in range(w):
            im = max(i - 1, 0)
            ip = min(i + 1, w - 1)
            xe = 2 * i
            if xe < out_w:
                for ch in range(c):
                    out[y, xe, ch] = ref[y, xe, ch] - (tmp[y, im, ch] + 6.0 * tmp[y, i, ch] + tmp[y, ip, ch]) / 8.0
            xo = 2 * i + 1
            if xo < out_w:
                for ch in range(c):
                    out[y, xo, ch] = ref[y, xo, ch] - (tmp[y, i, ch] + tmp[y, ip, ch]) / 2.0
    return out


@njit(cache=True)
def up2_sub_into(a: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """In-place band extraction: ref <- ref - upsample(a).

    Mutating `ref` through a single argument keeps large pipelines from
    churning fresh 100+ MB allocations per level (the page-fault cost of
    which dwarfs the arithmetic at 4K).
    """
    out_h, out_w, _ = ref.shape
    tmp = _up_axis0(a, out_h)
    h, w, c = tmp.shape
    for y in range(out_h):
        for i in range(w):
            im = max(i - 1, 0)
            ip = min(i + 1, w - 1)
            xe = 2 * i
            if xe < out_w:
                for ch in range(c):
                    ref[y, xe, ch] = ref[y, xe, ch] - (tmp[y, im, ch] + 6.0 * tmp[y, i, ch] + tmp[y, ip, ch]) / 8.0
            xo = 2 * i + 1
            if xo < out_w:
                for ch in range(c):
                    ref[y, xo, ch] = ref[y, xo, ch] - (tmp[y, i, ch] + tmp[y, ip, ch]) / 2.0
    return ref


@njit(cache=True)
def up2_add_into(a: np.ndarray, band: np.ndarray) -> np.ndarray:
    """In-place reconstruction step: band <- band + upsample(a)."""
    out_h, out_w, _ = band.shape
    tmp = _up_axis0(a, out_h)
    h, w, c = tmp.shape
    for y in range(out_h):
        for i in range(w):
            im = max(i - 1, 0)
            ip = min(i + 1, w - 1)
            xe = 2 * i
            if xe < out_w:
                for ch in range(c):
                    band[y, xe, ch] = band[y, xe, ch] + (tmp[y, im, ch] + 6.0 * tmp[y, i, ch] + tmp[y, ip, ch]) / 8.0
            xo = 2 * i + 1
            if xo < out_w:
                for ch in range(c):
                    band[y, xo, ch] = band[y, xo, ch] + (tmp[y, i, ch] + tmp[y, ip, ch]) / 2.0
    return band


@njit(cache=True)
def remap_delta_scalar_into(delta: np.ndarray, alpha: float, beta: float, sigma_r: float) -> np.ndarray:
    """In-place scalar-parameter remap of a flat signed-offset array."""
    for k in range(delta.shape[0]):
        d = delta[k]
        a = abs(d)
        if a <= sigma_r:
            m = sigma_r * (a / sigma_r) ** alpha
        else:
            m = beta * (a - sigma_r) + sigma_r
        delta[k] = m if d > 0.0 else (-m if d < 0.0 else 0.0)
    return delta


@njit(cache=True)
def remap_delta_maps_into(delta: np.ndarray, alpha: np.ndarray, beta: np.ndarray, sigma_r: float) -> np.ndarray:
    """In-place per-pixel-parameter remap of an (h, w, c) signed-offset array."""
    h, w, c = delta.shape
    for y in range(h):
        for x in range(w):
            al = alpha[y, x]
            be = beta[y, x]
            for ch in range(c):
                d = delta[y, x, ch]
                a = abs(d)
                if a <= sigma_r:
                    m = sigma_r * (a / sigma_r) ** al
                else:
                    m = be * (a - sigma_r) + sigma_r
                delta[y, x, ch] = m if d > 0.0 else (-m if d < 0.0 else 0.0)
    return delta


@njit(cache=True)
def remap_delta_scalar(delta: np.ndarray, alpha: float, beta: float, sigma_r: float) -> np.ndarray:
    """Signed remap offset for scalar detail/edge parameters (flat array)."""
    out = np.empty_like(delta)
    for k in range(delta.shape[0]):
        d = delta[k]
        a = abs(d)
        if a <= sigma_r:
            m = sigma_r * (a / sigma_r) ** alpha
        else:
            m = beta * (a - sigma_r) + sigma_r
        out[k] = m if d > 0.0 else (-m if d < 0.0 else 0.0)
    return out


@njit(cache=True)
def remap_delta_maps(delta: np.ndarray, alpha: np.ndarray, beta: np.ndarray, sigma_r: float) -> np.ndarray:
    """Signed remap offset with per-pixel (h, w) parameter maps."""
    h, w, c = delta.shape
    out = np.empty_like(delta)
    for y in range(h):
        for x in range(w):
            al = alpha[y, x]
            be = beta[y, x]
            for ch in range(c):
                d = delta[y, x, ch]
                a = abs(d)
                if a <= sigma_r:
                    m = sigma_r * (a / sigma_r) ** al
                else:
                    m = be * (a - sigma_r) + sigma_r
                out[y, x, ch] = m if d > 0.0 else (-m if d < 0.0 else 0.0)
    return out


@njit(cache=True)
def trilinear(entries: np.ndarray, img: np.ndarray) -> np.ndarray:
    """8-corner blend through an (n, n, n, 3) lattice, inputs clamped."""
    n = entries.shape[0]
    scale = float(n - 1)
    h, w, _ = img.shape
    out = np.empty((h, w, 3), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            r = min(max(img[y, x, 0], 0.0), 1.0) * scale
            g = min(max(img[y, x, 1], 0.0), 1.0) * scale
            b = min(max(img[y, x, 2], 0.0), 1.0) * scale
            i0 = min(int(r), n - 2)
            j0 = min(int(g), n - 2)
            k0 = min(int(b), n - 2)
            fr = r - i0
            fg = g - j0
            fb = b - k0
            for ch in range(3):
                c00 = entries[i0, j0, k0, ch] * (1.0 - fb) + entries[i0, j0, k0 + 1, ch] * fb
                c01 = entries[i0, j0 + 1, k0, ch] * (1.0 - fb) + entries[i0, j0 + 1, k0 + 1, ch] * fb
                c10 = entries[i0 + 1, j0, k0, ch] * (1.0 - fb) + entries[i0 + 1, j0, k0 + 1, ch] * fb
                c11 = entries[i0 + 1, j0 + 1, k0, ch] * (1.0 - fb) + entries[i0 + 1, j0 + 1, k0 + 1, ch] * fb
                c0 = c00 * (1.0 - fg) + c01 * fg
                c1 = c10 * (1.0 - fg) + c11 * fg
                out[y, x, ch] = c0 * (1.0 - fr) + c1 * fr
    return out


@njit(cache=True)
def fused_maps_apply(entries_list: np.ndarray, maps: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Per-pixel weight-map blend of several lattices in one pass.

    ``entries_list`` has shape (t, n, n, n, 3) and ``maps`` (t, h, w).
    """
    t = entries_list.shape[0]
    n = entries_list.shape[1]
    scale = float(n - 1)
    h, w, _ = img.shape
    out = np.zeros((h, w, 3), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            r = min(max(img[y, x, 0], 0.0), 1.0) * scale
            g = min(max(img[y, x, 1], 0.0), 1.0) * scale
            b = min(max(img[y, x, 2], 0.0), 1.0) * scale
            i0 = min(int(r), n - 2)
            j0 = min(int(g), n - 2)
            k0 = min(int(b), n - 2)
            fr = r - i0
            fg = g - j0
            fb = b - k0
            for ti in range(t):
                wt = maps[ti, y, x]
                for ch in range(3):
                    c00 = entries_list[ti, i0, j0, k0, ch] * (1.0 - fb) + entries_list[ti, i0, j0, k0 + 1, ch] * fb
                    c01 = entries_list[ti, i0, j0 + 1, k0, ch] * (1.0 - fb) + entries_list[ti, i0, j0 + 1, k0 + 1, ch] * fb
                    c10 = entries_list[ti, i0 + 1, j0, k0, ch] * (1.0 - fb) + entries_list[ti, i0 + 1, j0, k0 + 1, ch] * fb
                    c11 = entries_list[ti, i0 + 1, j0 + 1, k0, ch] * (1.0 - fb) + entries_list[ti, i0 + 1, j0 + 1, k0 + 1, ch] * fb
                    c0 = c00 * (1.0 - fg) + c01 * fg
                    c1 = c10 * (1.0 - fg) + c11 * fg
                    out[y, x, ch] += wt * (c0 * (1.0 - fr) + c1 * fr)
    return out
