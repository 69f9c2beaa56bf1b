"""Benchmark harness: per-stage wall times for the full pipeline.

Runs the enhancement pipeline on seeded synthetic images, one warm-up run
excluded, and reports median and p95 of the total plus per-stage medians.
Parameters are deliberately non-identity (noisy LUTs, alpha/beta away
from 1) so the remap work is actually measured.
"""

from __future__ import annotations

import json
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from .image import Image
from .lut import Lut3D, identity_lut
from .params import ConstantParams, EnhancementParams
from .pipeline import PipelineConfig, enhance_detailed
from .pyramid import adaptive_levels

NAMED_SIZES = {
    "480p": (480, 854),
    "720p": (720, 1280),
    "1080p": (1080, 1920),
    "4k": (2160, 3840),
}

_STAGES = ("lut", "decompose", "refine", "reconstruct", "total")


@dataclass
class BenchEntry:
    height: int
    width: int
    pixels: int
    reps: int
    threads: int
    median_ms: float
    p95_ms: float
    stage_median_ms: dict

    def as_dict(self) -> dict:
        return {
            "height": self.height,
            "width": self.width,
            "pixels": self.pixels,
            "reps": self.reps,
            "threads": self.threads,
            "median_ms": self.median_ms,
            "p95_ms": self.p95_ms,
            "stage_median_ms": self.stage_median_ms,
        }


@dataclass
class BenchReport:
    entries: list[BenchEntry] = field(default_factory=list)
    platform: str = ""

    def as_dict(self) -> dict:
        return {"platform": self.platform, "entries": [e.as_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def parse_size(token: str) -> tuple[int, int]:
    """Accepts named sizes ('480p', '4k') or explicit 'HxW'."""
    token = token.strip().lower()
    if token in NAMED_SIZES:
        return NAMED_SIZES[token]
    if "x" in token:
        h, w = token.split("x", 1)
        return int(h), int(w)
    raise ValueError(f"cannot parse size {token!r}; use e.g. '480p', '4k', or '2160x3840'")


def bench_params(h: int, w: int, cfg: PipelineConfig, seed: int) -> EnhancementParams:
    """Non-identity parameters for a given input size (seeded, deterministic)."""
    rng = np.random.default_rng(seed)
    n = adaptive_levels(h, w, cfg.target_low_res)
    lr_h, lr_w = h, w
    for _ in range(n):
        lr_h = (lr_h + 1) // 2
        lr_w = (lr_w + 1) // 2
    base = identity_lut(cfg.lut_bins).entries
    luts = tuple(
        Lut3D(np.clip(base + rng.normal(0.0, 0.02, size=base.shape), 0.0, 1.0))
        for _ in range(cfg.basis_count)
    )
    points = rng.dirichlet(np.ones(cfg.basis_count))
    maps = rng.dirichlet(np.ones(cfg.basis_count), size=(lr_h, lr_w)).transpose(2, 0, 1)
    maps = np.ascontiguousarray(maps)
    return EnhancementParams(luts, points, maps, ConstantParams(0.8, 1.2), sigma_r=cfg.sigma_r)


def bench(
    sizes: list[tuple[int, int]],
    reps: int = 10,
    cfg: PipelineConfig | None = None,
    seed: int = 0,
    threads: int | None = None,
) -> BenchReport:
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    cfg = cfg or PipelineConfig()
    threads = threads if threads is not None else (os.cpu_count() or 1)
    report = BenchReport(platform=f"{platform.python_implementation()} {platform.python_version()} on {platform.machine()}")
    for h, w in sizes:
        rng = np.random.default_rng(seed + h * 31 + w)
        img = Image(rng.random((h, w, 3)))
        params = bench_params(h, w, cfg, seed)
        enhance_detailed(img, params, cfg)  # warm-up, excluded
        totals = []
        stages: dict[str, list[float]] = {s: [] for s in _STAGES}
        for _ in range(reps):
            t0 = time.perf_counter()
            result = enhance_detailed(img, params, cfg)
            elapsed = (time.perf_counter() - t0) * 1e3
            totals.append(elapsed)
            for s in _STAGES:
                stages[s].append(result.stage_ms.get(s, 0.0))
        report.entries.append(
            BenchEntry(
                height=h,
                width=w,
                pixels=h * w,
                reps=reps,
                threads=threads,
                median_ms=float(np.median(totals)),
                p95_ms=float(np.percentile(totals, 95)),
                stage_median_ms={s: float(np.median(v)) for s, v in stages.items()},
            )
        )
    return report
