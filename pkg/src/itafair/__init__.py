"""ITA-based skin tone estimation and subgroup fairness auditing."""

__version__ = "0.1.0"

from .colorspace import (
    ItaVariant,
    LabColor,
    RgbColor,
    SkinTypeThresholds,
    bin_skin_type,
    cielab_to_srgb,
    ita_degrees,
    srgb_to_cielab,
    srgb_to_hsv,
    srgb_to_ycrcb,
)
from .estimators import (
    EstimatorConfig,
    ItaResult,
    Method,
    Status,
    estimate_colorseg,
    estimate_dlhss,
    estimate_ght,
    estimate_random_patch,
    run_batch,
)
from .thresholding import GhtParams, ght_threshold, otsu_threshold

__all__ = [
    "EstimatorConfig",
    "GhtParams",
    "ItaResult",
    "ItaVariant",
    "LabColor",
    "Method",
    "RgbColor",
    "SkinTypeThresholds",
    "Status",
    "__version__",
    "bin_skin_type",
    "cielab_to_srgb",
    "estimate_colorseg",
    "estimate_dlhss",
    "estimate_ght",
    "estimate_random_patch",
    "ght_threshold",
    "ita_degrees",
    "otsu_threshold",
    "run_batch",
    "srgb_to_cielab",
    "srgb_to_hsv",
    "srgb_to_ycrcb",
]
