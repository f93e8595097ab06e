"""Pixel-level colour conversions and the Individual Typology Angle (ITA).

All converters exist in two forms: a scalar form over the small colour
dataclasses, and a vectorised ``*_array`` form over numpy arrays with the
channel axis last. The array forms are what the estimators use on whole
images; the scalar forms are convenience wrappers with validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateAngleError, OutOfGamutError

# Linear sRGB -> XYZ (IEC 61966-2-1 primaries, D65). The white point is taken
# as the matrix row sums so that (255,255,255) maps to exactly (100, 0, 0).
_RGB_TO_XYZ = np.array(
    [
        [0.4123907992659595, 0.3575843393838780, 0.1804807884018343],
        [0.2126390058715104, 0.7151686787677559, 0.0721923153607337],
        [0.0193308187155918, 0.1191947797946260, 0.9505321522496608],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ.sum(axis=1)
_DELTA = 6.0 / 29.0

DEFAULT_SKIN_TYPE_CUTOFFS = (55.0, 41.0, 28.0, 19.0, 10.0)

# BT.601 luma weights; also the Y row of the YCrCb transform.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class RgbColor:
    """8-bit sRGB-encoded colour."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v!r} outside [0, 255]")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)


@dataclass(frozen=True)
class LabColor:
    """CIELab triple: lightness L* in [0, 100], chroma axes a*, b*."""

    l: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.l) and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("Lab components must be finite")
        if not 0.0 <= self.l <= 100.0:
            raise ValueError(f"L*={self.l} outside [0, 100]")


class ItaVariant(str, Enum):
    """Which arctangent the typology angle uses.

    ARCTAN assumes positive b* and maps into (-90, 90); ARCTAN2 is the
    quadrant-aware two-argument form mapping into (-180, 180].
    """

    ARCTAN = "Arctan"
    ARCTAN2 = "Arctan2"


@dataclass(frozen=True)
class SkinTypeThresholds:
    """Descending ITA cutoffs (degrees) separating skin types 1..6."""

    cutoffs: tuple[float, ...] = DEFAULT_SKIN_TYPE_CUTOFFS

    def __post_init__(self) -> None:
        if len(self.cutoffs) != 5:
            raise ValueError("exactly five cutoffs required")
        if not all(math.isfinite(c) for c in self.cutoffs):
            raise ValueError("cutoffs must be finite")
        if not all(a > b for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly descending")


def srgb_to_linear(channels: np.ndarray) -> np.ndarray:
    """Decode 8-bit-scaled sRGB values (0..255) to linear light (0..1)."""
    c = np.asarray(channels, dtype=np.float64) / 255.0
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _encode_srgb(lin: np.ndarray) -> np.ndarray:
    return np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1.0 / 2.4) - 0.055)


def linear_to_srgb(linear: np.ndarray) -> np.ndarray:
    """Encode linear light (0..1) back to the 0..255 sRGB scale."""
    return _encode_srgb(np.asarray(linear, dtype=np.float64)) * 255.0


_LINEAR_LUT = srgb_to_linear(np.arange(256, dtype=np.float64))


def _to_linear(rgb: np.ndarray) -> np.ndarray:
    arr = np.asarray(rgb)
    if arr.dtype == np.uint8:
        return _LINEAR_LUT[arr]
    return srgb_to_linear(arr)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA ** 3, np.cbrt(t), t / (3.0 * _DELTA ** 2) + 4.0 / 29.0)


def _lab_f_inv(f: np.ndarray) -> np.ndarray:
    return np.where(f > _DELTA, f ** 3, 3.0 * _DELTA ** 2 * (f - 4.0 / 29.0))


def srgb_to_cielab_array(rgb: np.ndarray) -> np.ndarray:
    """Convert (..., 3) sRGB values on the 0..255 scale to CIELab (D65)."""
    lin = _to_linear(rgb)
    xyz = lin @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    out = np.empty_like(f)
    out[..., 0] = 116.0 * f[..., 1] - 16.0
    out[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    out[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return out


def cielab_to_linear_array(lab: np.ndarray) -> np.ndarray:
    """Invert CIELab to linear RGB without clipping (gamut checks happen here)."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE
    return xyz @ _XYZ_TO_RGB.T


def cielab_to_srgb_array(lab: np.ndarray) -> np.ndarray:
    """CIELab to sRGB on the 0..255 scale; out-of-gamut values are clipped."""
    lin = np.clip(cielab_to_linear_array(lab), 0.0, 1.0)
    return _encode_srgb(lin) * 255.0


def srgb_to_cielab(c: RgbColor) -> LabColor:
    lab = srgb_to_cielab_array(c.as_array())
    return LabColor(float(lab[0]), float(lab[1]), float(lab[2]))


_GAMUT_TOL = 1e-6


def cielab_to_srgb(lab: LabColor) -> RgbColor:
    """Invert to an 8-bit sRGB colour, raising if the colour has none."""
    lin = cielab_to_linear_array(np.array([lab.l, lab.a, lab.b]))
    if np.any(lin < -_GAMUT_TOL) or np.any(lin > 1.0 + _GAMUT_TOL):
        raise OutOfGamutError(f"Lab({lab.l}, {lab.a}, {lab.b}) has no sRGB representation")
    enc = _encode_srgb(np.clip(lin, 0.0, 1.0)) * 255.0
    r, g, b = (int(v) for v in np.rint(enc))
    return RgbColor(r, g, b)


def srgb_to_hsv_array(rgb: np.ndarray) -> np.ndarray:
    """Hexcone HSV: h in degrees [0, 360), s and v in [0, 1]; achromatic h = 0."""
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    mx = arr.max(axis=-1)
    c = mx - arr.min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.select(
            [c == 0.0, mx == r, mx == g],
            [0.0, ((g - b) / c) % 6.0, (b - r) / c + 2.0],
            default=(r - g) / c + 4.0,
        )
        s = np.where(mx > 0.0, c / mx, 0.0)
    return np.stack([60.0 * h, s, mx], axis=-1)


def srgb_to_hsv(c: RgbColor) -> tuple[float, float, float]:
    h, s, v = srgb_to_hsv_array(c.as_array())
    return float(h), float(s), float(v)


def srgb_to_ycrcb_array(rgb: np.ndarray) -> np.ndarray:
    """Full-range BT.601 Y, Cr, Cb with the +128 chroma offset, all in [0, 255]."""
    arr = np.asarray(rgb, dtype=np.float64)
    y = arr @ _LUMA_WEIGHTS
    cr = (arr[..., 0] - y) * 0.713 + 128.0
    cb = (arr[..., 2] - y) * 0.564 + 128.0
    return np.clip(np.stack([y, cr, cb], axis=-1), 0.0, 255.0)


def srgb_to_ycrcb(c: RgbColor) -> tuple[float, float, float]:
    y, cr, cb = srgb_to_ycrcb_array(c.as_array())
    return float(y), float(cr), float(cb)


def luma_bt601(rgb: np.ndarray) -> np.ndarray:
    """Rounded BT.601 luma as uint8; the grey image used for thresholding."""
    y = np.asarray(rgb, dtype=np.float64) @ _LUMA_WEIGHTS
    return np.rint(y).astype(np.uint8)


def ita_degrees(l: float, b: float, variant: ItaVariant) -> float:
    """Individual Typology Angle in degrees from lightness L* and chroma b*.

    The ARCTAN variant computes arctan((L*-50)/b*) and is undefined at b*=0;
    ARCTAN2 uses the standard two-argument convention, so b*=0 yields +/-90
    for L* != 50 and 0 at the origin.
    """
    if not 0.0 <= l <= 100.0:
        raise ValueError(f"L*={l} outside [0, 100]")
    if not math.isfinite(b):
        raise ValueError("b* must be finite")
    if variant is ItaVariant.ARCTAN:
        if b == 0.0:
            raise DegenerateAngleError("arctan variant undefined at b*=0")
        return math.degrees(math.atan((l - 50.0) / b))
    return math.degrees(math.atan2(l - 50.0, b))


def ita_degrees_array(l: np.ndarray, b: np.ndarray, variant: ItaVariant) -> np.ndarray:
    """Vectorised ITA; arctan-variant pixels with b*=0 come back as NaN."""
    l = np.asarray(l, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if variant is ItaVariant.ARCTAN:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.degrees(np.arctan((l - 50.0) / b))
        return np.where(b == 0.0, np.nan, out)
    return np.degrees(np.arctan2(l - 50.0, b))


def bin_skin_type(ita: float, thresholds: SkinTypeThresholds | None = None) -> int:
    """Map an ITA in degrees to skin type 1 (lightest) .. 6 (darkest).

    Upper bounds are inclusive: type k+1 covers cutoffs[k-1] >= ita > cutoffs[k].
    """
    if not math.isfinite(ita):
        raise ValueError("ita must be finite")
    cutoffs = (thresholds or SkinTypeThresholds()).cutoffs
    for k, cut in enumerate(cutoffs):
        if ita > cut:
            return k + 1
    return 6
