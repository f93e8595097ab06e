"""Synthetic dermoscopy-like images with known ground-truth ITA.

Each image is a uniform skin colour with an optional centred lesion disc,
optional dark hair strokes (seeded random-walk polylines), per-pixel Gaussian
noise and global channel gains. The ground truth is computed analytically
from the requested skin colour, so the generator doubles as a verification
oracle for the estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from . import imaging
from .colorspace import (
    ItaVariant,
    LabColor,
    RgbColor,
    SkinTypeThresholds,
    bin_skin_type,
    cielab_to_srgb,
    srgb_to_cielab,
)
from .estimators import ItaResult, Method, Status, write_tones_csv

HAIR_RGB = (30, 25, 20)


@dataclass(frozen=True)
class SyntheticSpec:
    skin_lab: tuple[float, float, float]
    lesion_lab: tuple[float, float, float] = (35.0, 15.0, 12.0)
    lesion_radius_frac: float = 0.0
    hair_count: int = 0
    hair_width: int = 3
    noise_sigma: float = 0.0
    channel_gains: tuple[float, float, float] = (1.0, 1.0, 1.0)
    side: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.lesion_radius_frac < 1.0:
            raise ValueError("lesion_radius_frac must lie in [0, 1)")
        if self.hair_count < 0 or self.hair_width < 1:
            raise ValueError("hair_count must be >= 0 and hair_width >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if any(g <= 0 for g in self.channel_gains):
            raise ValueError("channel gains must be positive")
        if self.side < 1:
            raise ValueError("side must be >= 1")


def lesion_disc_mask(side: int, radius_frac: float) -> np.ndarray:
    """Boolean disc centred on the canvas; radius is a fraction of the side."""
    if radius_frac <= 0.0:
        return np.zeros((side, side), dtype=bool)
    radius = radius_frac * side
    c = (side - 1) / 2.0
    yy, xx = np.ogrid[:side, :side]
    return (yy - c) ** 2 + (xx - c) ** 2 <= radius * radius


def _draw_hair(img: np.ndarray, rng: np.random.Generator, count: int, width: int) -> None:
    side = img.shape[0]
    for _ in range(count):
        x = float(rng.uniform(0, side))
        y = float(rng.uniform(0, side))
        heading = float(rng.uniform(0, 2 * math.pi))
        n_segments = int(rng.integers(6, 14))
        step = side / 8.0
        for _ in range(n_segments):
            heading += float(rng.normal(0.0, 0.5))
            x2 = x + step * math.cos(heading)
            y2 = y + step * math.sin(heading)
            cv2.line(
                img,
                (int(round(x)), int(round(y))),
                (int(round(x2)), int(round(y2))),
                HAIR_RGB,
                thickness=width,
            )
            x, y = x2, y2


def generate_synthetic(
    spec: SyntheticSpec,
    image_id: str | None = None,
    thresholds: SkinTypeThresholds | None = None,
) -> tuple[np.ndarray, ItaResult, np.ndarray, np.ndarray]:
    """Render one image; returns (image, ground_truth, lesion_mask, skin_mask).

    The ground-truth ITA is the quadrant-aware angle of the requested skin
    colour and does not depend on the seed. Raises OutOfGamutError if the
    skin or lesion colour has no sRGB representation.
    """
    skin_rgb = cielab_to_srgb(LabColor(*spec.skin_lab))
    canvas = np.empty((spec.side, spec.side, 3), dtype=np.uint8)
    canvas[:] = (skin_rgb.r, skin_rgb.g, skin_rgb.b)

    lesion_mask = lesion_disc_mask(spec.side, spec.lesion_radius_frac)
    if lesion_mask.any():
        lesion_rgb = cielab_to_srgb(LabColor(*spec.lesion_lab))
        canvas[lesion_mask] = (lesion_rgb.r, lesion_rgb.g, lesion_rgb.b)
    skin_mask = ~lesion_mask

    rng = np.random.default_rng(spec.seed)
    if spec.hair_count > 0:
        _draw_hair(canvas, rng, spec.hair_count, spec.hair_width)

    out = canvas.astype(np.float64)
    if spec.noise_sigma > 0:
        out += rng.normal(0.0, spec.noise_sigma, out.shape)
    out *= np.asarray(spec.channel_gains)
    image = np.clip(np.rint(out), 0.0, 255.0).astype(np.uint8)

    ita = math.degrees(math.atan2(spec.skin_lab[0] - 50.0, spec.skin_lab[2]))
    truth = ItaResult(
        image_id=image_id if image_id is not None else f"synth_{spec.seed:05d}",
        method=Method.TRUTH,
        variant=ItaVariant.ARCTAN2,
        ita_deg=ita,
        skin_type=bin_skin_type(ita, thresholds),
        status=Status.OK,
        pixel_count=int(skin_mask.sum()),
    )
    return image, truth, lesion_mask, skin_mask


def mean_grey_lesion_rgb(skin_rgb: RgbColor, side: int, radius_frac: float,
                         channel_cap: int = 255) -> RgbColor:
    """Lesion colour that makes the composed image's channel means achromatic.

    Grey-world balancing is then a near no-op on the clean image, so the skin
    colour survives the white-balance path unchanged. Raises ValueError when
    no in-range lesion colour exists for this skin colour and disc size.
    """
    n = side * side
    k = int(lesion_disc_mask(side, radius_frac).sum())
    if k == 0:
        raise ValueError("lesion disc is empty; nothing to compensate with")
    skin = np.array([skin_rgb.r, skin_rgb.g, skin_rgb.b], dtype=np.float64)
    # target per-channel mean m: lesion channel = (m*n - (n-k)*skin) / k
    m = (n - k) / n * skin.max() + 1.0
    lesion = (m * n - (n - k) * skin) / k
    lesion_int = np.rint(lesion).astype(int)
    if np.any(lesion_int < 0) or np.any(lesion_int > channel_cap):
        raise ValueError(f"no in-range grey-mean lesion for skin {tuple(skin.astype(int))}")
    return RgbColor(int(lesion_int[0]), int(lesion_int[1]), int(lesion_int[2]))


# ---------------------------------------------------------------------------
# Corpus generation (used by the `synth` CLI command).

CORPUS_SPEC_KEYS = {
    "count", "side", "seed", "skin_l", "skin_a", "skin_b",
    "lesion_mode", "lesion_lab", "lesion_radius_frac",
    "hair_count", "hair_width", "noise_sigma", "gains",
}


@dataclass(frozen=True)
class CorpusSpec:
    """Sampling ranges for a corpus of synthetic images."""

    count: int = 20
    side: int = 200
    seed: int = 0
    # ranges chosen so a grey-mean lesion colour exists for most draws
    skin_l: tuple[float, float] = (60.0, 75.0)
    skin_a: tuple[float, float] = (4.0, 12.0)
    skin_b: tuple[float, float] = (8.0, 20.0)
    lesion_mode: str = "grey_mean"  # grey_mean | fixed | none
    lesion_lab: tuple[float, float, float] = (35.0, 15.0, 12.0)
    lesion_radius_frac: float = 0.25
    hair_count: int = 0
    hair_width: int = 3
    noise_sigma: float = 0.0
    gains: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.lesion_mode not in ("grey_mean", "fixed", "none"):
            raise ValueError(f"unknown lesion_mode {self.lesion_mode!r}")


def _parse_pair(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def parse_corpus_spec(path) -> CorpusSpec:
    """Read a key=value corpus spec file (unknown keys rejected)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such spec file: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or key not in CORPUS_SPEC_KEYS:
            raise ValueError(f"{path}: line {lineno}: bad spec entry {raw!r}")
        values[key] = value
    kwargs = {}
    for key, value in values.items():
        if key in ("count", "side", "seed", "hair_count", "hair_width"):
            kwargs[key] = int(value)
        elif key in ("skin_l", "skin_a", "skin_b"):
            kwargs[key] = _parse_pair(value)
        elif key in ("lesion_lab", "gains"):
            parts = tuple(float(v) for v in value.split(","))
            if len(parts) != 3:
                raise ValueError(f"{path}: {key} needs three comma-separated values")
            kwargs[key] = parts
        elif key in ("lesion_radius_frac", "noise_sigma"):
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    return CorpusSpec(**kwargs)


def _sample_spec(corpus: CorpusSpec, rng: np.random.Generator, seed: int) -> SyntheticSpec:
    for _ in range(200):
        lab = (
            float(rng.uniform(*corpus.skin_l)),
            float(rng.uniform(*corpus.skin_a)),
            float(rng.uniform(*corpus.skin_b)),
        )
        try:
            skin_rgb = cielab_to_srgb(LabColor(*lab))
        except Exception:
            continue
        # regenerate the lab from the quantized colour so truth is exact
        exact = srgb_to_cielab(skin_rgb)
        lab = (exact.l, exact.a, exact.b)
        radius = corpus.lesion_radius_frac if corpus.lesion_mode != "none" else 0.0
        lesion_lab = corpus.lesion_lab
        if corpus.lesion_mode == "grey_mean" and radius > 0:
            try:
                lesion_rgb = mean_grey_lesion_rgb(skin_rgb, corpus.side, radius)
            except ValueError:
                continue
            lesion_exact = srgb_to_cielab(lesion_rgb)
            lesion_lab = (lesion_exact.l, lesion_exact.a, lesion_exact.b)
        return SyntheticSpec(
            skin_lab=lab,
            lesion_lab=lesion_lab,
            lesion_radius_frac=radius,
            hair_count=corpus.hair_count,
            hair_width=corpus.hair_width,
            noise_sigma=corpus.noise_sigma,
            channel_gains=corpus.gains,
            side=corpus.side,
            seed=seed,
        )
    raise ValueError("could not sample a feasible skin colour from the spec ranges")


def generate_corpus(corpus: CorpusSpec, out_dir) -> dict[str, Path]:
    """Write images/, masks/ (healthy skin), lesions/ and ground_truth.csv."""
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    masks_dir = out_dir / "masks"
    lesions_dir = out_dir / "lesions"
    for d in (images_dir, masks_dir, lesions_dir):
        d.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(corpus.seed)
    truths = []
    for i in range(corpus.count):
        image_id = f"synth_{i:05d}"
        spec = _sample_spec(corpus, rng, seed=corpus.seed * 100003 + i)
        image, truth, lesion_mask, skin_mask = generate_synthetic(spec, image_id=image_id)
        imaging.save_image(image, images_dir / f"{image_id}.png")
        imaging.save_mask(skin_mask, masks_dir / f"{image_id}_mask.png")
        imaging.save_mask(lesion_mask, lesions_dir / f"{image_id}_mask.png")
        truths.append(truth)
    truth_csv = out_dir / "ground_truth.csv"
    write_tones_csv(truths, truth_csv)
    return {
        "images": images_dir,
        "masks": masks_dir,
        "lesions": lesions_dir,
        "ground_truth": truth_csv,
    }
