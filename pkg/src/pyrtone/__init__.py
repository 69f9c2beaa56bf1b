"""pyrtone: photo enhancement via adaptive Laplacian pyramids, image-adaptive
3D LUT fusion, and local Laplacian detail filtering."""

__version__ = "0.1.0"

from .image import ColorSpace, Image, clamp_unit, load_image, resize_bilinear, save_image
from .lut import Lut3D, apply_fused_maps, apply_trilinear, fuse_luts_points, identity_lut, parse_cube, write_cube
from .local_laplacian import direct_llf, fast_llf, objective_eval, refine_level, remap
from .params import ConstantParams, EnhancementParams, LevelParamMaps, heuristic_params, load_bundle, save_bundle
from .pipeline import EnhanceResult, PipelineConfig, coarse_global, coarse_lr, enhance, enhance_detailed
from .pyramid import (
    GaussianPyramid,
    LaplacianPyramid,
    adaptive_levels,
    downsample2,
    gaussian_pyramid,
    laplacian_decompose,
    laplacian_reconstruct,
    upsample2,
)
from .metrics import MetricReport, delta_e, evaluate, psnr, ssim
from .edges import canny

__all__ = [
    "ColorSpace",
    "ConstantParams",
    "EnhanceResult",
    "EnhancementParams",
    "GaussianPyramid",
    "Image",
    "LaplacianPyramid",
    "LevelParamMaps",
    "Lut3D",
    "MetricReport",
    "PipelineConfig",
    "adaptive_levels",
    "apply_fused_maps",
    "apply_trilinear",
    "canny",
    "clamp_unit",
    "coarse_global",
    "coarse_lr",
    "delta_e",
    "direct_llf",
    "downsample2",
    "enhance",
    "enhance_detailed",
    "evaluate",
    "fast_llf",
    "fuse_luts_points",
    "gaussian_pyramid",
    "heuristic_params",
    "identity_lut",
    "laplacian_decompose",
    "laplacian_reconstruct",
    "load_bundle",
    "load_image",
    "objective_eval",
    "parse_cube",
    "psnr",
    "refine_level",
    "remap",
    "resize_bilinear",
    "save_bundle",
    "save_image",
    "ssim",
    "upsample2",
    "write_cube",
]
