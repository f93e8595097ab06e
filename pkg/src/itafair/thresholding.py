"""Histogram binarisation used by the colour-gate and white-balance estimators.

Both algorithms enumerate the 255 candidate splits ``{levels <= t} / {levels > t}``
over a 256-bin grey histogram and keep the score-maximising ``t``, breaking ties
toward the smallest level. ``otsu_threshold`` scores splits by between-class
variance using exact integer arithmetic, so its output is bit-reproducible and
invariant to scaling the counts. ``ght_threshold`` scores a two-component
Gaussian-mixture MAP objective with conjugate priors on the class variances
(strength ``nu`` toward scale ``tau**2``) and on the mixing weight
(concentration ``kappa`` toward mode ``omega``); the histogram is normalised to
unit mass first so the prior strengths are count-scale free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogramError

HISTOGRAM_BINS = 256

_CLIP_FLOOR = 1e-30


@dataclass(frozen=True)
class GhtParams:
    """Prior settings for the generalized histogram threshold.

    The defaults push the class variances hard toward a shared small scale,
    which makes the split behave like between-class-variance maximisation.
    """

    nu: float = 1e10
    tau: float = 0.01
    kappa: float = 0.0
    omega: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError("nu must be >= 0")
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError("tau must be > 0")
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ValueError("kappa must be >= 0")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")


def histogram256(grey: np.ndarray) -> np.ndarray:
    """Counts per grey level for a uint8 image."""
    arr = np.asarray(grey)
    if arr.dtype != np.uint8:
        raise ValueError("expected a uint8 grey image")
    return np.bincount(arr.ravel(), minlength=HISTOGRAM_BINS)


def _validated_counts(counts) -> list[int]:
    counts = list(counts)
    if len(counts) != HISTOGRAM_BINS:
        raise ValueError(f"histogram must have {HISTOGRAM_BINS} bins, got {len(counts)}")
    out = []
    for i, c in enumerate(counts):
        ci = int(c)
        if ci != c or ci < 0:
            raise ValueError(f"count at level {i} must be a non-negative integer")
        out.append(ci)
    if sum(1 for c in out if c > 0) < 2:
        raise DegenerateHistogramError("need at least two populated grey levels")
    return out


def otsu_threshold(counts) -> int:
    """Split level maximising between-class variance, smallest level on ties.

    Scores are compared as exact rational numbers, so the result is exact for
    any integer histogram.
    """
    n = _validated_counts(counts)
    w_tot = sum(n)
    s_tot = sum(i * c for i, c in enumerate(n))

    best_t = -1
    best_num = 0  # score(t) = num^2 / den, compared by cross-multiplication
    best_den = 1
    w0 = 0
    s0 = 0
    for t in range(HISTOGRAM_BINS - 1):
        w0 += n[t]
        s0 += t * n[t]
        w1 = w_tot - w0
        if w0 == 0 or w1 == 0:
            continue
        num = s0 * w1 - (s_tot - s0) * w0
        den = w0 * w1
        if best_t < 0 or num * num * best_den > best_num * best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def ght_threshold(counts, params: GhtParams | None = None) -> int:
    """Split level maximising the mixture MAP score, smallest level on ties."""
    params = params or GhtParams()
    n = _validated_counts(counts)
    total = sum(n)
    p = [c / total for c in n]

    # Totals and prefix statistics accumulate left to right; the upper class
    # is obtained by subtraction from the totals.
    w_all = sum(p)
    s_all = sum(i * q for i, q in enumerate(p))
    ss_all = sum(i * i * q for i, q in enumerate(p))

    best_t = -1
    best_score = -math.inf
    w0 = s0 = ss0 = 0.0
    for t in range(HISTOGRAM_BINS - 1):
        w0 += p[t]
        s0 += t * p[t]
        ss0 += t * t * p[t]
        score = _ght_score(
            w0, s0, ss0, w_all - w0, s_all - s0, ss_all - ss0,
            params.nu, params.tau, params.kappa, params.omega,
        )
        if score > best_score:
            best_t, best_score = t, score
    return best_t


def _ght_score(w0, s0, ss0, w1, s1, ss1, nu, tau, kappa, omega):
    w0 = max(w0, _CLIP_FLOOR)
    w1 = max(w1, _CLIP_FLOOR)
    p0 = w0 / (w0 + w1)
    p1 = w1 / (w0 + w1)
    mu0 = s0 / w0
    mu1 = s1 / w1
    d0 = ss0 - w0 * mu0 * mu0
    d1 = ss1 - w1 * mu1 * mu1
    v0 = max((p0 * nu * tau * tau + d0) / (p0 * nu + w0), _CLIP_FLOOR)
    v1 = max((p1 * nu * tau * tau + d1) / (p1 * nu + w1), _CLIP_FLOOR)
    f0 = -d0 / v0 - w0 * math.log(v0) + 2.0 * (w0 + kappa * omega) * math.log(w0)
    f1 = -d1 / v1 - w1 * math.log(v1) + 2.0 * (w1 + kappa * (1.0 - omega)) * math.log(w1)
    return f0 + f1
