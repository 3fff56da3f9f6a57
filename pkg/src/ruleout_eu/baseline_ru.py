"""Baseline relative utility from an empirical performance curve.

If a reader operates at the utility-optimal point of their curve, the
tangent slope there fixes the relative utility.  The curve is interpolated
with a natural cubic spline and differentiated at the operating point.
"""

from __future__ import annotations

import csv
import io
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Literal, TextIO

import numpy as np
from scipy.interpolate import CubicSpline

from .metrics import relative_utility_from_rd_slope, relative_utility_from_roc_slope

__all__ = [
    "PerformanceCurve",
    "SplineModel",
    "CurveFormatError",
    "read_curve",
    "bundled_curve",
    "fit_spline",
    "slope_at",
    "baseline_relative_utility",
    "knot_bootstrap_relative_utility",
]

Space = Literal["rd", "roc"]

BUNDLED_CURVE = "otten_style_curve.csv"


class CurveFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PerformanceCurve:
    """Points of a performance curve with strictly increasing ``x``.

    For ``space="rd"`` x is the recall rate and y the detection rate; for
    ``space="roc"`` x is the false-positive rate and y the true-positive
    rate.
    """

    x: np.ndarray
    y: np.ndarray
    space: Space = "rd"

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if len(x) < 3:
            raise ValueError(f"need at least 3 curve points, got {len(x)}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("curve points must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("curve x values must be strictly increasing (duplicate or unsorted x)")
        if self.space not in ("rd", "roc"):
            raise ValueError(f"space must be 'rd' or 'roc', got {self.space!r}")
        if np.any(np.diff(y) < 0):
            warnings.warn("curve y values are not non-decreasing", RuntimeWarning, stacklevel=3)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]], space: Space = "rd") -> PerformanceCurve:
        """Build from unsorted points; sorts by x, then checks strict monotonicity."""
        arr = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
        order = np.argsort(arr[:, 0], kind="stable")
        return cls(arr[order, 0], arr[order, 1], space)


@dataclass(frozen=True)
class SplineModel:
    curve: PerformanceCurve
    spline: CubicSpline = field(repr=False, compare=False)

    @property
    def x_min(self) -> float:
        return float(self.curve.x[0])

    @property
    def x_max(self) -> float:
        return float(self.curve.x[-1])

    def __call__(self, x, nu: int = 0):
        return self.spline(x, nu)


def read_curve(source: TextIO | str | os.PathLike, space: Space = "rd") -> PerformanceCurve:
    """Read an ``x,y`` curve file; ``#`` comment lines are skipped."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_curve(fh, space)
    points = []
    header_seen = False
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader(io.StringIO(line)))]
        if not header_seen:
            if fields != ["x", "y"]:
                raise CurveFormatError(f"row {lineno}: expected header 'x,y', got {stripped!r}")
            header_seen = True
            continue
        if len(fields) != 2:
            raise CurveFormatError(f"row {lineno}: expected 2 fields, got {len(fields)}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            raise CurveFormatError(f"row {lineno}: non-numeric value in {stripped!r}") from None
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise CurveFormatError(f"row {lineno}: rates must lie in [0, 1]")
        points.append((x, y))
    try:
        return PerformanceCurve.from_points(points, space)
    except ValueError as exc:
        raise CurveFormatError(str(exc)) from None


def bundled_curve() -> PerformanceCurve:
    """Synthetic recall/detection curve shipped with the package.

    Generated from a smooth saturating model, *not* digitised from any
    published study.  Handy for demos; it says nothing about real readers.
    """
    text = resources.files("ruleout_eu.data").joinpath(BUNDLED_CURVE).read_text(encoding="utf-8")
    return read_curve(io.StringIO(text), "rd")


def fit_spline(curve: PerformanceCurve) -> SplineModel:
    """Interpolating cubic spline with natural (zero second derivative) ends."""
    return SplineModel(curve, CubicSpline(curve.x, curve.y, bc_type="natural"))


def slope_at(model: SplineModel, x: float) -> float:
    """First derivative of the fitted spline at ``x``; no extrapolation."""
    if not model.x_min <= x <= model.x_max:
        raise ValueError(
            f"x={x} outside the knot range [{model.x_min}, {model.x_max}]; refusing to extrapolate"
        )
    return float(model.spline(x, 1))


def baseline_relative_utility(
    curve: PerformanceCurve, at: float, prevalence: float | None = None
) -> float:
    """Relative utility implied by the curve's tangent at ``at``.

    Raises
    ------
    ValueError
        If the query point is outside the curve, ``prevalence`` is missing
        for an ROC curve, or the slope implies a non-positive relative
        utility (slope outside (0, 1) in recall/detection space, or
        non-positive in ROC space).
    """
    slope = slope_at(fit_spline(curve), at)
    if curve.space == "roc":
        if prevalence is None:
            raise ValueError("an ROC-space curve needs the prevalence")
        return relative_utility_from_roc_slope(slope, prevalence)
    return relative_utility_from_rd_slope(slope)


def knot_bootstrap_relative_utility(
    curve: PerformanceCurve,
    at: float,
    n_resamples: int = 1000,
    seed: int = 0,
    prevalence: float | None = None,
    ci_level: float = 0.95,
) -> dict:
    """Heuristic spread of the estimate from resampling curve points.

    Points are drawn with replacement; duplicates are dropped before the
    refit.  Draws with fewer than 3 distinct points, a query outside the
    resampled range, or an invalid slope are skipped and counted.  This
    ignores the sampling error inside each point, so it is only a rough
    sensitivity check.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    n = len(curve.x)
    values = []
    skipped = 0
    for _ in range(n_resamples):
        idx = np.unique(rng.integers(0, n, size=n))
        if len(idx) < 3:
            skipped += 1
            continue
        sub = PerformanceCurve(curve.x[idx], curve.y[idx], curve.space)
        try:
            values.append(baseline_relative_utility(sub, at, prevalence))
        except ValueError:
            skipped += 1
    if not values:
        raise ValueError("no usable knot resamples")
    arr = np.asarray(values)
    alpha = 1.0 - ci_level
    lo, hi = np.quantile(arr, [alpha / 2.0, 1.0 - alpha / 2.0])
    return {
        "median": float(np.median(arr)),
        "ci_low": float(lo),
        "ci_high": float(hi),
        "n_used": len(values),
        "n_skipped": skipped,
    }
