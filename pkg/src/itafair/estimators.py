"""The four per-image skin tone estimation methods and batch execution.

Every estimator reduces an image to one representative ITA value plus a skin
type. They differ in how healthy (non-lesion) skin is isolated:

* ``estimate_dlhss``      - externally supplied healthy-skin mask, outlier-robust
                            medians of L* and b*.
* ``estimate_colorseg``   - Otsu split on grey, HSV/YCrCb skin gates, mean colour.
* ``estimate_random_patch`` - eight periphery patches, brightest patch-mean ITA;
                            supports both arctangent variants (RP / RP2).
* ``estimate_ght``        - grey-world white balance, generalized histogram
                            threshold, median per-pixel ITA.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import imaging
from .colorspace import (
    ItaVariant,
    SkinTypeThresholds,
    bin_skin_type,
    ita_degrees_array,
    luma_bt601,
    srgb_to_cielab_array,
    srgb_to_hsv_array,
    srgb_to_ycrcb_array,
)
from .errors import (
    DegenerateHistogramError,
    ItafairError,
    MissingMaskDirError,
    ZeroChannelError,
)
from .thresholding import GhtParams, ght_threshold, histogram256, otsu_threshold

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
MASK_SUFFIX = "_mask.png"

TONES_CSV_HEADER = ("image_id", "method", "variant", "ita_deg", "skin_type", "status", "pixel_count")


class Method(str, Enum):
    DLHSS = "Dlhss"
    COLOR_SEG = "ColorSeg"
    RANDOM_PATCH = "RandomPatch"
    GHT = "Ght"
    TRUTH = "Truth"  # used by the synthetic generator's ground-truth rows


class Status(str, Enum):
    OK = "Ok"
    NO_SKIN = "NoSkinDetected"
    EMPTY_MASK = "EmptyMask"
    DEGENERATE = "Degenerate"
    LESION_DOMINATED = "LesionDominated"
    ERROR = "Error"


@dataclass(frozen=True)
class IntervalGate:
    """Inclusive per-channel bounds a pixel must satisfy to count as skin."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self) -> None:
        for a, b in zip(self.lo, self.hi):
            if not a <= b:
                raise ValueError(f"gate interval [{a}, {b}] is empty")

    def passes(self, channels: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((channels >= lo) & (channels <= hi), axis=-1)


# Widely used skin-detection gates; fully configurable, see EstimatorConfig.
DEFAULT_HSV_GATE = IntervalGate(lo=(0.0, 0.06, 0.16), hi=(25.0, 0.67, 1.0))
DEFAULT_YCRCB_GATE = IntervalGate(lo=(0.0, 135.0, 85.0), hi=(255.0, 180.0, 135.0))


@dataclass(frozen=True)
class EstimatorConfig:
    """Free parameters of the four estimation methods."""

    thresholds: SkinTypeThresholds = field(default_factory=SkinTypeThresholds)
    side: int = imaging.DEFAULT_STANDARD_SIDE
    patch_size: int = 20
    hsv_gate: IntervalGate = DEFAULT_HSV_GATE
    ycrcb_gate: IntervalGate = DEFAULT_YCRCB_GATE
    blackhat_kernel: int = imaging.DEFAULT_BLACKHAT_KERNEL
    blackhat_threshold: int = imaging.DEFAULT_BLACKHAT_THRESHOLD
    ght: GhtParams = field(default_factory=GhtParams)
    min_patch_usable_frac: float = 0.25

    def __post_init__(self) -> None:
        if self.patch_size < 1:
            raise ValueError("patch_size must be >= 1")
        if self.side < 2 * self.patch_size:
            raise ValueError("side must be at least twice the patch size")
        if not 0.0 <= self.min_patch_usable_frac <= 1.0:
            raise ValueError("min_patch_usable_frac must lie in [0, 1]")


@dataclass(frozen=True)
class ItaResult:
    """Per-image estimation outcome; ita_deg is NaN when no estimate exists."""

    image_id: str
    method: Method
    variant: ItaVariant
    ita_deg: float
    skin_type: int | None
    status: Status
    pixel_count: int


def _ok(image_id, method, variant, ita, pixel_count, cfg, status=Status.OK) -> ItaResult:
    return ItaResult(
        image_id=image_id,
        method=method,
        variant=variant,
        ita_deg=float(ita),
        skin_type=bin_skin_type(float(ita), cfg.thresholds),
        status=status,
        pixel_count=int(pixel_count),
    )


def _failed(image_id, method, variant, status) -> ItaResult:
    return ItaResult(image_id, method, variant, math.nan, None, status, 0)


def _robust_median(values: np.ndarray) -> float:
    """Median of the values within one standard deviation of the mean.

    At least one value always survives the window; sigma = 0 keeps everything.
    """
    mu = values.mean()
    sd = values.std()
    kept = values[np.abs(values - mu) <= sd]
    if kept.size == 0:  # unreachable, kept as a guard
        kept = values
    return float(np.median(kept))


def estimate_dlhss(
    img: np.ndarray,
    mask: np.ndarray,
    cfg: EstimatorConfig | None = None,
    image_id: str = "",
) -> ItaResult:
    """ITA from externally segmented healthy skin.

    Masked pixels are converted to CIELab; L* and b* are reduced separately to
    the median of values within one standard deviation of their mean, and the
    angle comes from that (median L*, median b*) pair.
    """
    cfg = cfg or EstimatorConfig()
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match image {img.shape[:2]}")
    if not mask.any():
        return _failed(image_id, Method.DLHSS, ItaVariant.ARCTAN2, Status.EMPTY_MASK)
    lab = srgb_to_cielab_array(img[mask])
    med_l = _robust_median(lab[:, 0])
    med_b = _robust_median(lab[:, 2])
    ita = math.degrees(math.atan2(med_l - 50.0, med_b))
    return _ok(image_id, Method.DLHSS, ItaVariant.ARCTAN2, ita, mask.sum(), cfg)


def estimate_colorseg(
    img: np.ndarray,
    cfg: EstimatorConfig | None = None,
    image_id: str = "",
) -> ItaResult:
    """ITA of the mean colour of gated non-lesion pixels.

    Otsu splits the grey image and the brighter class is taken as non-lesion
    (pigmented lesions are darker); on a degenerate histogram every pixel is
    gated instead. Survivors of both the HSV and YCrCb gates are averaged in
    RGB and that single colour is converted to CIELab.
    """
    cfg = cfg or EstimatorConfig()
    grey = luma_bt601(img)
    try:
        level = otsu_threshold(histogram256(grey))
        candidates = grey > level
    except DegenerateHistogramError:
        candidates = np.ones(grey.shape, dtype=bool)

    hsv = srgb_to_hsv_array(img)
    ycrcb = srgb_to_ycrcb_array(img)
    skin = candidates & cfg.hsv_gate.passes(hsv) & cfg.ycrcb_gate.passes(ycrcb)
    count = int(skin.sum())
    if count == 0:
        return _failed(image_id, Method.COLOR_SEG, ItaVariant.ARCTAN2, Status.NO_SKIN)
    mean_rgb = img[skin].astype(np.float64).mean(axis=0)
    lab = srgb_to_cielab_array(mean_rgb)
    ita = math.degrees(math.atan2(lab[0] - 50.0, lab[2]))
    return _ok(image_id, Method.COLOR_SEG, ItaVariant.ARCTAN2, ita, count, cfg)


def _patch_origins(side: int, patch: int) -> list[tuple[int, int]]:
    """Top-left corners of the eight periphery patches: corners + edge midpoints."""
    e = side - patch
    m = e // 2
    return [(0, 0), (0, m), (0, e), (m, 0), (m, e), (e, 0), (e, m), (e, e)]


def estimate_random_patch(
    img: np.ndarray,
    variant: ItaVariant,
    cfg: EstimatorConfig | None = None,
    image_id: str = "",
    lesion_mask: np.ndarray | None = None,
) -> ItaResult:
    """Brightest patch-mean ITA over eight fixed periphery patches.

    The image is standardized, hair pixels are masked out via black-hat
    morphology, and each patch contributes the mean of its per-pixel ITA
    values (requested arctangent variant). Patches with fewer than
    ``min_patch_usable_frac`` usable pixels are dropped; the maximum patch
    mean wins. When a lesion mask is supplied and covers all eight patch
    centres, the result is flagged LesionDominated but still reported.
    """
    cfg = cfg or EstimatorConfig()
    std = imaging.standardize_geometry(img, cfg.side)
    hair = imaging.blackhat_hair_mask(std, cfg.blackhat_kernel, cfg.blackhat_threshold)
    lab = srgb_to_cielab_array(std)
    ita = ita_degrees_array(lab[..., 0], lab[..., 2], variant)
    usable = ~hair & np.isfinite(ita)

    p = cfg.patch_size
    floor = cfg.min_patch_usable_frac * p * p
    best_mean = -math.inf
    best_count = 0
    for y, x in _patch_origins(cfg.side, p):
        sel = usable[y:y + p, x:x + p]
        n_usable = int(sel.sum())
        if n_usable < floor or n_usable == 0:
            continue
        mean_ita = float(ita[y:y + p, x:x + p][sel].mean())
        if mean_ita > best_mean:
            best_mean, best_count = mean_ita, n_usable

    if not math.isfinite(best_mean):
        return _failed(image_id, Method.RANDOM_PATCH, variant, Status.DEGENERATE)

    status = Status.OK
    if lesion_mask is not None:
        lesion = imaging.standardize_mask(np.asarray(lesion_mask, dtype=bool), cfg.side)
        centres = [(y + p // 2, x + p // 2) for y, x in _patch_origins(cfg.side, p)]
        if all(lesion[cy, cx] for cy, cx in centres):
            status = Status.LESION_DOMINATED
    return _ok(image_id, Method.RANDOM_PATCH, variant, best_mean, best_count, cfg, status)


def estimate_ght(
    img: np.ndarray,
    cfg: EstimatorConfig | None = None,
    image_id: str = "",
) -> ItaResult:
    """Median per-pixel ITA of the brighter class after white balance.

    The standardized image is grey-world balanced, split by the generalized
    histogram threshold, and the class with the higher mean L* is kept as
    non-lesion skin.
    """
    cfg = cfg or EstimatorConfig()
    std = imaging.standardize_geometry(img, cfg.side)
    try:
        balanced = imaging.grey_world_balance(std)
        grey = luma_bt601(balanced)
        level = ght_threshold(histogram256(grey), cfg.ght)
    except (ZeroChannelError, DegenerateHistogramError):
        return _failed(image_id, Method.GHT, ItaVariant.ARCTAN2, Status.DEGENERATE)

    lab = srgb_to_cielab_array(balanced)
    lightness = lab[..., 0]
    low = grey <= level
    high = ~low
    mean_low = lightness[low].mean() if low.any() else -math.inf
    mean_high = lightness[high].mean() if high.any() else -math.inf
    skin = high if mean_high >= mean_low else low
    count = int(skin.sum())
    if count == 0:
        return _failed(image_id, Method.GHT, ItaVariant.ARCTAN2, Status.NO_SKIN)
    ita = ita_degrees_array(lightness[skin], lab[..., 2][skin], ItaVariant.ARCTAN2)
    return _ok(image_id, Method.GHT, ItaVariant.ARCTAN2, float(np.median(ita)), count, cfg)


def _estimate_one(img, method, variant, cfg, image_id, mask, lesion_mask):
    if method is Method.DLHSS:
        return estimate_dlhss(img, mask, cfg, image_id)
    if method is Method.COLOR_SEG:
        return estimate_colorseg(img, cfg, image_id)
    if method is Method.RANDOM_PATCH:
        return estimate_random_patch(img, variant, cfg, image_id, lesion_mask)
    if method is Method.GHT:
        return estimate_ght(img, cfg, image_id)
    raise ValueError(f"cannot estimate with method {method}")


def list_image_ids(image_dir) -> list[str]:
    """Image ids (file stems) in lexicographic order; duplicates rejected."""
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise FileNotFoundError(f"no such image directory: {image_dir}")
    found: dict[str, Path] = {}
    for path in image_dir.iterdir():
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        if path.stem in found:
            raise ValueError(f"duplicate image id {path.stem!r} in {image_dir}")
        found[path.stem] = path
    return sorted(found)


def run_batch(
    image_dir,
    method: Method,
    cfg: EstimatorConfig | None = None,
    variant: ItaVariant = ItaVariant.ARCTAN2,
    mask_dir=None,
    lesion_mask_dir=None,
) -> list[ItaResult]:
    """Estimate every image in a directory, in image-id order.

    Per-image failures become status=Error rows instead of aborting the batch,
    so two runs over the same inputs produce identical output.
    """
    cfg = cfg or EstimatorConfig()
    if method is Method.DLHSS and mask_dir is None:
        raise MissingMaskDirError("method Dlhss requires a healthy-skin mask directory")
    if variant is ItaVariant.ARCTAN and method is not Method.RANDOM_PATCH:
        raise ValueError("only the RandomPatch method supports the Arctan variant")

    image_dir = Path(image_dir)
    ids = list_image_ids(image_dir)
    paths = {p.stem: p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES}

    results = []
    for image_id in ids:
        try:
            img = imaging.load_image(paths[image_id])
            mask = None
            if method is Method.DLHSS:
                mask = imaging.load_mask(Path(mask_dir) / f"{image_id}{MASK_SUFFIX}")
            lesion = None
            if lesion_mask_dir is not None and method is Method.RANDOM_PATCH:
                lesion_path = Path(lesion_mask_dir) / f"{image_id}{MASK_SUFFIX}"
                if lesion_path.exists():
                    lesion = imaging.load_mask(lesion_path)
            results.append(_estimate_one(img, method, variant, cfg, image_id, mask, lesion))
        except Exception:  # noqa: BLE001 - batch rows must not abort the run
            results.append(_failed(image_id, method, variant, Status.ERROR))
    return results


def write_tones_csv(results, path) -> None:
    """Write results in the tones CSV schema (ita to 3 decimals)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TONES_CSV_HEADER)
        for r in results:
            ita = f"{r.ita_deg:.3f}" if math.isfinite(r.ita_deg) else ""
            skin = str(r.skin_type) if r.status is Status.OK else ""
            writer.writerow(
                [r.image_id, r.method.value, r.variant.value, ita, skin, r.status.value, r.pixel_count]
            )


def read_tones_csv(path) -> list[ItaResult]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such tones file: {path}")
    results = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TONES_CSV_HEADER:
            raise ItafairError(f"{path}: unexpected tones CSV header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TONES_CSV_HEADER):
                raise ItafairError(f"{path}: row {lineno} has {len(row)} fields")
            image_id, method, variant, ita, skin, status, count = row
            try:
                results.append(
                    ItaResult(
                        image_id=image_id,
                        method=Method(method),
                        variant=ItaVariant(variant),
                        ita_deg=float(ita) if ita else math.nan,
                        skin_type=int(skin) if skin else None,
                        status=Status(status),
                        pixel_count=int(count),
                    )
                )
            except ValueError as exc:
                raise ItafairError(f"{path}: row {lineno}: {exc}") from exc
    return results
