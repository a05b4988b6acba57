"""Dendrogram-derived feature vectors for distribution-type identification.

The backbone is the incorporation curve: how many original points have
joined the dendrogram at or below each merge height. A feature vector
concatenates four cut statistics with either a fixed-length resampling of
that curve or the coefficients of a cubic fit to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cutting import CutResult
from .dendrogram import Dendrogram
from .errors import ValidationError

RAW_CURVE = "raw-curve"
POLYFIT = "polyfit"
VARIANTS = (RAW_CURVE, POLYFIT)

DEFAULT_CURVE_SAMPLES = 100


@dataclass(frozen=True)
class IncorporationCurve:
    """Cumulative count of incorporated points per sorted merge height."""

    heights: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        heights = np.asarray(self.heights, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if heights.shape != counts.shape or heights.ndim != 1 or heights.size == 0:
            raise ValidationError("curve needs matching non-empty heights and counts")
        if (np.diff(counts) < 0).any():
            raise ValidationError("curve counts must be non-decreasing")
        if counts[-1] != self.n:
            raise ValidationError(f"final count {counts[-1]} != n={self.n}")
        heights.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "counts", counts)


class CubicFit(NamedTuple):
    coeffs: tuple[float, float, float, float]  # a, b, c, d for a*x^3 + b*x^2 + c*x + d
    rss: float


@dataclass(frozen=True)
class FeatureVector:
    """Four cut scalars plus curve features, in a fixed order per variant.

    Scalars: outlier stop height and mean cluster formation height (both as
    fractions of the root height), outlier count and total clustered count
    (both as fractions of n).
    """

    variant: str
    scalars: np.ndarray = field(repr=False)
    curve_features: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown feature variant {self.variant!r}")
        scalars = np.asarray(self.scalars, dtype=np.float64)
        curve = np.asarray(self.curve_features, dtype=np.float64)
        if scalars.shape != (4,):
            raise ValidationError("expected exactly 4 scalar features")
        if not (np.isfinite(scalars).all() and np.isfinite(curve).all()):
            raise ValidationError("feature vector contains non-finite entries")
        scalars.setflags(write=False)
        curve.setflags(write=False)
        object.__setattr__(self, "scalars", scalars)
        object.__setattr__(self, "curve_features", curve)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.scalars, self.curve_features])


def feature_names(variant: str, curve_samples: int = DEFAULT_CURVE_SAMPLES) -> list[str]:
    names = ["outlier_height", "cluster_height", "outlier_count", "cluster_size"]
    if variant == POLYFIT:
        return names + ["fit_a", "fit_b", "fit_c", "fit_d"]
    return names + [f"curve_{i:03d}" for i in range(curve_samples)]


def incorporation_curve(d: Dendrogram) -> IncorporationCurve:
    """Replay merges sorted by height, counting direct leaf children."""
    leaf_children = (d.children < d.n).sum(axis=1)
    order = np.argsort(d.heights, kind="stable")
    return IncorporationCurve(
        heights=d.heights[order],
        counts=np.cumsum(leaf_children[order]),
        n=d.n,
    )


def _dedupe(curve: IncorporationCurve) -> tuple[np.ndarray, np.ndarray]:
    """Distinct heights with the final (largest) count at each."""
    distinct, last_index = np.unique(curve.heights[::-1], return_index=True)
    # np.unique keeps the first occurrence; reversing takes the last instead.
    counts = curve.counts[::-1][last_index]
    return distinct, counts


def resample_curve(curve: IncorporationCurve, samples: int) -> np.ndarray:
    """Normalized curve values at ``samples`` equally spaced heights.

    Piecewise-linear between the distinct curve points, spanning
    [min height, max height]; counts are scaled by 1/n so curves from
    different datasets are comparable. A zero height range yields a constant
    curve.
    """
    if samples < 2:
        raise ValidationError(f"need at least 2 samples, got {samples}")
    heights, counts = _dedupe(curve)
    if heights[0] == heights[-1]:
        return np.full(samples, counts[-1] / curve.n)
    xs = np.linspace(heights[0], heights[-1], samples)
    return np.interp(xs, heights, counts / curve.n)


def cubic_fit(curve: IncorporationCurve) -> CubicFit:
    """Least-squares cubic through the normalized curve.

    Coefficients are ordered (a, b, c, d) for a*x^3 + b*x^2 + c*x + d; the
    residual sum of squares comes along for fit-quality checks.
    """
    heights, counts = _dedupe(curve)
    if heights.size < 4:
        raise ValidationError(
            f"cubic fit needs >= 4 distinct heights, got {heights.size} (rank deficient)"
        )
    y = counts / curve.n
    vander = np.vander(heights, 4)  # columns x^3, x^2, x, 1
    coeffs, *_ = np.linalg.lstsq(vander, y, rcond=None)
    residuals = y - vander @ coeffs
    return CubicFit(coeffs=tuple(float(c) for c in coeffs), rss=float(residuals @ residuals))


def build_features(
    d: Dendrogram,
    cr: CutResult,
    variant: str = RAW_CURVE,
    curve_samples: int = DEFAULT_CURVE_SAMPLES,
) -> FeatureVector:
    """Assemble the full feature vector for one (dendrogram, cut) pair.

    Heights are divided by the root height before the curve is resampled or
    fitted, making features scale-free; when no outlier was pruned the
    outlier height is the root itself, i.e. exactly 1.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown feature variant {variant!r}")
    root = d.root_height
    norm = root if root > 0 else 1.0

    scalars = np.array(
        [
            cr.outlier_stop_height / norm,
            (float(np.mean(cr.cluster_heights)) / norm) if cr.cluster_heights else 0.0,
            len(cr.outliers) / d.n,
            sum(len(c) for c in cr.clusters) / d.n,
        ]
    )

    raw = incorporation_curve(d)
    curve = IncorporationCurve(heights=raw.heights / norm, counts=raw.counts, n=raw.n)
    if variant == RAW_CURVE:
        curve_features = resample_curve(curve, curve_samples)
    else:
        curve_features = np.array(cubic_fit(curve).coeffs)
    return FeatureVector(variant=variant, scalars=scalars, curve_features=curve_features)
