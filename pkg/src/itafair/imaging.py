"""Image I/O, geometric standardization, white balance and hair masking.

Images are ``(H, W, 3)`` uint8 RGB numpy arrays in row-major order; masks are
``(H, W)`` bool arrays aligned with their image. Mask files are single-channel
PNGs where any nonzero pixel means True.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .colorspace import luma_bt601
from .errors import DecodeError, InvalidKernelError, InvalidSideError, ZeroChannelError

# Smallest standardized side that still hosts 20x20 periphery patches.
MIN_STANDARD_SIDE = 40
DEFAULT_STANDARD_SIDE = 200
DEFAULT_BLACKHAT_KERNEL = 17
DEFAULT_BLACKHAT_THRESHOLD = 10


def _require_rgb(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError("expected an (H, W, 3) uint8 RGB image")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must have at least one pixel")
    return arr


def load_image(path) -> np.ndarray:
    """Decode a PNG or JPEG file to an (H, W, 3) uint8 RGB array."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with PILImage.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def save_image(img: np.ndarray, path) -> None:
    PILImage.fromarray(_require_rgb(img), mode="RGB").save(Path(path))


def load_mask(path) -> np.ndarray:
    """Read a single-channel mask PNG; nonzero pixels become True."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such mask file: {path}")
    try:
        with PILImage.open(path) as im:
            return np.asarray(im.convert("L")) > 0
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def save_mask(mask: np.ndarray, path) -> None:
    arr = (np.asarray(mask, dtype=bool) * np.uint8(255))
    PILImage.fromarray(arr, mode="L").save(Path(path))


def _centre_square(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    s = min(h, w)
    y0 = (h - s) // 2
    x0 = (w - s) // 2
    return arr[y0:y0 + s, x0:x0 + s]


def standardize_geometry(img: np.ndarray, side: int = DEFAULT_STANDARD_SIDE) -> np.ndarray:
    """Centre-crop to the largest square, then bilinear-resize to side x side."""
    if side < MIN_STANDARD_SIDE:
        raise InvalidSideError(f"side must be >= {MIN_STANDARD_SIDE}, got {side}")
    sq = _centre_square(_require_rgb(img))
    if sq.shape[0] == side:
        return sq.copy()
    return cv2.resize(sq, (side, side), interpolation=cv2.INTER_LINEAR)


def standardize_mask(mask: np.ndarray, side: int = DEFAULT_STANDARD_SIDE) -> np.ndarray:
    """Apply the same crop/resize as standardize_geometry to a boolean mask."""
    if side < MIN_STANDARD_SIDE:
        raise InvalidSideError(f"side must be >= {MIN_STANDARD_SIDE}, got {side}")
    sq = _centre_square(np.asarray(mask, dtype=bool))
    if sq.shape[0] == side:
        return sq.copy()
    resized = cv2.resize(sq.astype(np.uint8), (side, side), interpolation=cv2.INTER_NEAREST)
    return resized > 0


def grey_world_balance(img: np.ndarray) -> np.ndarray:
    """Scale each channel so all channel means equal their common average.

    Values are rounded and clamped back to [0, 255] afterwards, which biases
    saturated pixels; clamp-free inputs are rebalanced exactly.
    """
    arr = _require_rgb(img)
    means = arr.reshape(-1, 3).mean(axis=0)
    if np.any(means == 0.0):
        raise ZeroChannelError("a channel mean is zero; gains undefined")
    gains = means.mean() / means
    out = np.rint(arr.astype(np.float64) * gains)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


def blackhat_hair_mask(
    img: np.ndarray,
    kernel_side: int = DEFAULT_BLACKHAT_KERNEL,
    intensity_threshold: int = DEFAULT_BLACKHAT_THRESHOLD,
) -> np.ndarray:
    """Flag thin dark structures (hair) via grey black-hat morphology.

    Black-hat is morphological closing minus the original; pixels whose
    response exceeds the threshold are flagged.
    """
    if kernel_side < 3 or kernel_side % 2 == 0:
        raise InvalidKernelError(f"kernel_side must be odd and >= 3, got {kernel_side}")
    grey = luma_bt601(_require_rgb(img))
    kernel = np.ones((kernel_side, kernel_side), dtype=np.uint8)
    response = cv2.morphologyEx(grey, cv2.MORPH_BLACKHAT, kernel)
    return response > intensity_threshold
