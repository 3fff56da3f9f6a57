"""Closed-form operating-point metrics.

Predictive values from likelihood ratios, expected utility, iso-utility
slopes and intercepts in ROC space (IUI) and in recall/detection space
(DIUI), and the transforms between the two spaces.

All functions are pure; the point and context types are frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ConfusionCounts",
    "RocPoint",
    "RdPoint",
    "UtilityContext",
    "likelihood_ratios",
    "ppv",
    "npv",
    "expected_utility",
    "iso_slope_roc",
    "iso_slope_rd",
    "iui",
    "diui",
    "roc_to_rd",
    "rd_to_roc",
    "relative_utility_from_roc_slope",
    "relative_utility_from_rd_slope",
]

_REL_TOL = 1e-12


def _check_probability(name: str, value: float, *, open_interval: bool = False) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if open_interval:
        if not 0.0 < value < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    elif not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ConfusionCounts:
    """Outcome counts of one binary decision rule."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def n_positive(self) -> int:
        return self.tp + self.fn

    @property
    def n_negative(self) -> int:
        return self.fp + self.tn

    @property
    def total(self) -> int:
        return self.n_positive + self.n_negative

    @property
    def prevalence(self) -> float:
        return self.n_positive / self.total


@dataclass(frozen=True)
class RocPoint:
    """Operating point in ROC space.

    Attributes
    ----------
    tpr : float
        True-positive rate (sensitivity).
    fpr : float
        False-positive rate (1 - specificity).
    counts : ConfusionCounts, optional
        Underlying outcome counts, when known.  Must agree with the rates.
    """

    tpr: float
    fpr: float
    counts: ConfusionCounts | None = None

    def __post_init__(self) -> None:
        _check_probability("tpr", self.tpr)
        _check_probability("fpr", self.fpr)
        c = self.counts
        if c is not None:
            if c.n_positive == 0 or c.n_negative == 0:
                raise ValueError("counts need at least one case in each truth class")
            if not math.isclose(self.tpr, c.tp / c.n_positive, rel_tol=_REL_TOL, abs_tol=0.0):
                raise ValueError("tpr disagrees with counts")
            if not math.isclose(self.fpr, c.fp / c.n_negative, rel_tol=_REL_TOL, abs_tol=0.0):
                raise ValueError("fpr disagrees with counts")

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> RocPoint:
        if counts.n_positive == 0 or counts.n_negative == 0:
            raise ValueError("counts need at least one case in each truth class")
        return cls(counts.tp / counts.n_positive, counts.fp / counts.n_negative, counts)

    @classmethod
    def from_se_sp(cls, sensitivity: float, specificity: float) -> RocPoint:
        return cls(sensitivity, 1.0 - specificity)

    @property
    def sensitivity(self) -> float:
        return self.tpr

    @property
    def specificity(self) -> float:
        return 1.0 - self.fpr


@dataclass(frozen=True)
class RdPoint:
    """Operating point as recall rate and cancer-detection rate."""

    recall_rate: float
    detection_rate: float
    n_patients: int | None = None

    def __post_init__(self) -> None:
        _check_probability("recall_rate", self.recall_rate)
        _check_probability("detection_rate", self.detection_rate)
        if self.detection_rate > self.recall_rate:
            raise ValueError(
                f"detection_rate {self.detection_rate} exceeds recall_rate {self.recall_rate}"
            )
        if self.n_patients is not None and (int(self.n_patients) != self.n_patients or self.n_patients < 1):
            raise ValueError("n_patients must be a positive integer")


@dataclass(frozen=True)
class UtilityContext:
    """Prevalence and utility assumptions for a screening program.

    ``outcome_utilities`` is the quadruple ``(u_tp, u_fp, u_tn, u_fn)``.
    Absolute utilities are rarely known; most callers only supply the
    relative utility.
    """

    prevalence: float
    relative_utility: float
    outcome_utilities: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        _check_probability("prevalence", self.prevalence, open_interval=True)
        if not (math.isfinite(self.relative_utility) and self.relative_utility > 0):
            raise ValueError(f"relative_utility must be positive, got {self.relative_utility!r}")
        if self.outcome_utilities is not None:
            u_tp, u_fp, u_tn, u_fn = self.outcome_utilities
            if not (u_tp > u_fn and u_tn > u_fp):
                raise ValueError("correct decisions must have greater utility than incorrect ones")
            implied = (u_tp - u_fn) / (u_tn - u_fp)
            if not math.isclose(implied, self.relative_utility, rel_tol=_REL_TOL, abs_tol=0.0):
                raise ValueError(
                    f"outcome utilities imply relative utility {implied}, not {self.relative_utility}"
                )

    @classmethod
    def from_outcome_utilities(
        cls, prevalence: float, u_tp: float, u_fp: float, u_tn: float, u_fn: float
    ) -> UtilityContext:
        if not (u_tp > u_fn and u_tn > u_fp):
            raise ValueError("correct decisions must have greater utility than incorrect ones")
        return cls(prevalence, (u_tp - u_fn) / (u_tn - u_fp), (u_tp, u_fp, u_tn, u_fn))

    @classmethod
    def from_counts(
        cls,
        counts: ConfusionCounts,
        relative_utility: float,
        prevalence: float | None = None,
    ) -> UtilityContext:
        """Context whose prevalence defaults to the counts' case fraction.

        An explicit ``prevalence`` always wins over the counts.
        """
        if prevalence is None:
            prevalence = counts.prevalence
        return cls(prevalence, relative_utility)

    @property
    def prevalence_odds(self) -> float:
        return (1.0 - self.prevalence) / self.prevalence


def likelihood_ratios(p: RocPoint) -> tuple[float, float]:
    """Positive and negative likelihood ratios of an operating point.

    Degenerate corners follow the chance-line limit: ``rho_plus`` is 1 at
    (0, 0) and ``inf`` on the left edge; ``rho_minus`` is 1 at (1, 1) and
    ``inf`` on the right edge.
    """
    tpr, fpr = p.tpr, p.fpr
    if fpr > 0.0:
        rho_plus = tpr / fpr
    else:
        rho_plus = math.inf if tpr > 0.0 else 1.0
    if fpr < 1.0:
        rho_minus = (1.0 - tpr) / (1.0 - fpr)
    else:
        rho_minus = math.inf if tpr < 1.0 else 1.0
    return rho_plus, rho_minus


def ppv(p: RocPoint, ctx: UtilityContext) -> float:
    rho_plus, _ = likelihood_ratios(p)
    if math.isinf(rho_plus):
        return 1.0
    if rho_plus == 0.0:
        return 0.0
    # rho/(rho + Q) written so every rounding step is monotone in rho
    return 1.0 / (1.0 + ctx.prevalence_odds / rho_plus)


def npv(p: RocPoint, ctx: UtilityContext) -> float:
    _, rho_minus = likelihood_ratios(p)
    if math.isinf(rho_minus):
        return 0.0
    return 1.0 / (1.0 + rho_minus / ctx.prevalence_odds)


def expected_utility(p: RocPoint, ctx: UtilityContext) -> float:
    """Expected utility per screened patient, in the outcome-utility units.

    Raises
    ------
    ValueError
        If the context carries no absolute outcome utilities.
    """
    if ctx.outcome_utilities is None:
        raise ValueError(
            "expected_utility needs absolute outcome utilities; use iui/diui as proxies"
        )
    u_tp, u_fp, u_tn, u_fn = ctx.outcome_utilities
    pi = ctx.prevalence
    return (
        u_tp * p.tpr * pi
        + u_fn * (1.0 - p.tpr) * pi
        + u_tn * (1.0 - p.fpr) * (1.0 - pi)
        + u_fp * p.fpr * (1.0 - pi)
    )


def iso_slope_roc(ctx: UtilityContext) -> float:
    """Slope of the iso-utility lines in ROC space."""
    return ctx.prevalence_odds / ctx.relative_utility


def iso_slope_rd(relative_utility: float) -> float:
    """Slope of the iso-utility lines in recall/detection space."""
    if not relative_utility > 0:
        raise ValueError("relative_utility must be positive")
    return 1.0 / (1.0 + relative_utility)


def iui(p: RocPoint, ctx: UtilityContext) -> float:
    """Iso-utility intercept: y-intercept of the iso-utility line through ``p``."""
    return p.tpr - iso_slope_roc(ctx) * p.fpr


def diui(p: RdPoint, relative_utility: float) -> float:
    """Detection iso-utility intercept in recall/detection space."""
    return p.detection_rate - p.recall_rate / (1.0 + relative_utility)


def roc_to_rd(p: RocPoint, ctx: UtilityContext) -> RdPoint:
    pi = ctx.prevalence
    detection = pi * p.tpr
    recall = detection + (1.0 - pi) * p.fpr
    # guard against one-ulp inversions of the detection <= recall invariant
    return RdPoint(min(recall, 1.0), min(detection, recall))


def rd_to_roc(p: RdPoint, ctx: UtilityContext) -> RocPoint:
    """Invert :func:`roc_to_rd` given the prevalence.

    Raises
    ------
    ValueError
        If the rates are impossible at this prevalence.
    """
    pi = ctx.prevalence
    if p.detection_rate > pi * (1.0 + _REL_TOL):
        raise ValueError(
            f"detection_rate {p.detection_rate} exceeds prevalence {pi} (tpr would exceed 1)"
        )
    benign = p.recall_rate - p.detection_rate
    if benign > (1.0 - pi) * (1.0 + _REL_TOL):
        raise ValueError("recalled non-cancers exceed the non-cancer fraction (fpr would exceed 1)")
    return RocPoint(min(p.detection_rate / pi, 1.0), min(benign / (1.0 - pi), 1.0))


def relative_utility_from_roc_slope(slope: float, prevalence: float) -> float:
    """Relative utility implied by an ROC tangent slope at an optimal point."""
    if not (math.isfinite(slope) and slope > 0):
        raise ValueError(f"ROC slope must be positive, got {slope!r}")
    _check_probability("prevalence", prevalence, open_interval=True)
    return ((1.0 - prevalence) / prevalence) / slope


def relative_utility_from_rd_slope(slope: float) -> float:
    """Relative utility implied by a recall/detection tangent slope."""
    if not (math.isfinite(slope) and 0.0 < slope < 1.0):
        raise ValueError(
            f"recall/detection slope must lie in (0, 1), got {slope!r}; "
            "a slope outside that range implies a non-positive relative utility"
        )
    return 1.0 / slope - 1.0
