"""Segment-wise luminance adjustment for multi-exposure image fusion.

The package turns an exposure stack whose frames are all badly exposed into
a single well-exposed image: it enhances local contrast on each frame's
luminance, segments the scene by brightness (equal-width bands or a
variational Gaussian mixture), rescales each segment's luminance toward
middle gray, compresses with a shoulder curve, recombines colors, and fuses
the adjusted renditions with a Laplacian-pyramid blend.

Typical use::

    from ssla import PipelineConfig, run_pipeline
    fused, report, _ = run_pipeline(stack, PipelineConfig(approach=2))
"""

from .adjust import (AdjustedStack, adjust_stack, plan_scaling, recombine,
                     segment_log_means, tonemap)
from .core import MixtureModel, Partition, ScalePlan, geometric_mean
from .enhance import bilateral_exact, bilateral_grid, enhance_contrast, local_mean
from .errors import DecodeError, InferenceError, InputError, SslaError
from .expogen import (BUILTIN_SCENES, HdrScene, builtin_scene, expose,
                      make_stack, normalize_scene, random_evs)
from .fuse import fuse_average, fuse_images, fuse_mertens, fusion_weights
from .imageio import (decode_image, decode_png, encode_png, eotf, load_stack,
                      luminance, oetf, read_pfm, write_pfm)
from .metrics import NaturalnessParams, entropy_bits, naturalness, patch_stats
from .pipeline import (PipelineConfig, build_config, compare_runs,
                       load_config_file, run_pipeline, standard_configs)
from .segment import (band_thresholds, fit_mixture, mixture_partition,
                      responsibilities, select_middle_index,
                      threshold_partition)

__all__ = [
    "AdjustedStack", "BUILTIN_SCENES", "DecodeError", "HdrScene",
    "InferenceError", "InputError", "MixtureModel", "NaturalnessParams",
    "Partition", "PipelineConfig", "ScalePlan", "SslaError", "adjust_stack",
    "band_thresholds", "bilateral_exact", "bilateral_grid", "builtin_scene",
    "build_config", "compare_runs", "decode_image", "decode_png",
    "encode_png", "enhance_contrast", "entropy_bits", "eotf", "expose",
    "fit_mixture", "fuse_average", "fuse_images", "fuse_mertens",
    "fusion_weights", "geometric_mean", "load_config_file", "load_stack",
    "local_mean", "luminance", "make_stack", "mixture_partition",
    "naturalness", "normalize_scene", "oetf", "patch_stats", "plan_scaling",
    "random_evs", "read_pfm", "recombine", "responsibilities", "run_pipeline",
    "segment_log_means", "select_middle_index", "standard_configs",
    "threshold_partition", "tonemap", "write_pfm",
]

__version__ = "0.1.0"
