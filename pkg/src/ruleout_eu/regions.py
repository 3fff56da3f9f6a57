"""Superiority regions of a candidate operating point against a reference.

Three nested notions of "better" in ROC space:

* Se/Sp dominance: higher-or-equal sensitivity and specificity, one strict.
* PPV/NPV superiority: larger positive and smaller negative likelihood
  ratio, i.e. left of the line through (0, 0) and the reference and above
  the line through the reference and (1, 1).  Holds at every prevalence.
* EU superiority: above the iso-utility line through the reference.

The comparisons are done in exact rational arithmetic on the float inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

import numpy as np

from .metrics import RocPoint, UtilityContext, iso_slope_roc, iui, likelihood_ratios

__all__ = ["BoundaryLine", "RegionVerdict", "classify", "boundary_polylines", "write_polylines"]


@dataclass(frozen=True)
class BoundaryLine:
    """Line ``tpr = slope * fpr + intercept`` (``slope=inf`` means vertical at ``anchor``)."""

    region: str
    slope: float
    intercept: float
    anchor: tuple[float, float]


@dataclass(frozen=True)
class RegionVerdict:
    sesp_superior: bool
    ppv_npv_superior: bool
    eu_superior: bool
    boundary_lines: tuple[BoundaryLine, BoundaryLine, BoundaryLine]


def _exact_ratios(p: RocPoint) -> tuple[Fraction | float, Fraction | float]:
    tpr, fpr = Fraction(p.tpr), Fraction(p.fpr)
    if fpr > 0:
        plus: Fraction | float = tpr / fpr
    else:
        plus = math.inf if tpr > 0 else Fraction(1)
    if fpr < 1:
        minus: Fraction | float = (1 - tpr) / (1 - fpr)
    else:
        minus = math.inf if tpr < 1 else Fraction(1)
    return plus, minus


def _exact_iui(p: RocPoint, ctx: UtilityContext) -> Fraction:
    pi = Fraction(ctx.prevalence)
    slope = ((1 - pi) / pi) / Fraction(ctx.relative_utility)
    return Fraction(p.tpr) - slope * Fraction(p.fpr)


def _lines(ref: RocPoint, ctx: UtilityContext) -> tuple[BoundaryLine, BoundaryLine, BoundaryLine]:
    rho_plus, rho_minus = likelihood_ratios(ref)
    anchor = (ref.fpr, ref.tpr)
    ppv_line = BoundaryLine("ppv", rho_plus, 0.0 if math.isfinite(rho_plus) else math.nan, anchor)
    if math.isfinite(rho_minus):
        npv_line = BoundaryLine("npv", rho_minus, 1.0 - rho_minus, anchor)
    else:
        npv_line = BoundaryLine("npv", math.inf, math.nan, anchor)
    eu_line = BoundaryLine("iso_utility", iso_slope_roc(ctx), iui(ref, ctx), anchor)
    return ppv_line, npv_line, eu_line


def classify(cand: RocPoint, ref: RocPoint, ctx: UtilityContext) -> RegionVerdict:
    """Which superiority regions of ``ref`` contain ``cand``.  Ties are not superior."""
    sesp = (
        cand.tpr >= ref.tpr
        and cand.fpr <= ref.fpr
        and (cand.tpr > ref.tpr or cand.fpr < ref.fpr)
    )
    c_plus, c_minus = _exact_ratios(cand)
    r_plus, r_minus = _exact_ratios(ref)
    pv = c_plus > r_plus and c_minus < r_minus
    eu = _exact_iui(cand, ctx) > _exact_iui(ref, ctx)
    return RegionVerdict(bool(sesp), bool(pv), bool(eu), _lines(ref, ctx))


def _clip_segment(line: BoundaryLine) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Endpoints of the line inside the unit square, or None if it misses."""
    if math.isinf(line.slope):
        x = line.anchor[0]
        return (x, 0.0), (x, 1.0)
    m, b = line.slope, line.intercept
    lo, hi = 0.0, 1.0
    if m > 0:
        lo = max(lo, -b / m)
        hi = min(hi, (1.0 - b) / m)
    elif m < 0:
        lo = max(lo, (1.0 - b) / m)
        hi = min(hi, -b / m)
    elif not 0.0 <= b <= 1.0:
        return None
    if lo > hi:
        return None
    return (lo, m * lo + b), (hi, m * hi + b)


def boundary_polylines(ref: RocPoint, ctx: UtilityContext, resolution: int = 101) -> list[tuple[str, int, float, float]]:
    """Sampled boundary lines of the three regions, clipped to the unit square.

    Returns rows ``(region, segment_index, x, y)`` with ``resolution``
    evenly spaced points per line, endpoints included.
    """
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("resolution must be an integer >= 2")
    rows = []
    for line in _lines(ref, ctx):
        seg = _clip_segment(line)
        if seg is None:
            continue
        (x0, y0), (x1, y1) = seg
        t = np.linspace(0.0, 1.0, int(resolution))
        xs = x0 + t * (x1 - x0)
        if math.isinf(line.slope):
            ys = y0 + t * (y1 - y0)
        else:
            ys = line.slope * xs + line.intercept
            ys[0], ys[-1] = y0, y1
        rows.extend((line.region, i, float(x), float(y)) for i, (x, y) in enumerate(zip(xs, ys)))
    return rows


def write_polylines(rows: list[tuple[str, int, float, float]], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["region", "segment_index", "x", "y"])
    for region, i, x, y in rows:
        w.writerow([region, i, repr(x), repr(y)])
