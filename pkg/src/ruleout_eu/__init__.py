"""Decision-analytic evaluation of AI rule-out triage for screening exams."""

__version__ = "0.1.0"

from .metrics import (
    ConfusionCounts,
    RdPoint,
    RocPoint,
    UtilityContext,
    diui,
    expected_utility,
    iso_slope_rd,
    iso_slope_roc,
    iui,
    likelihood_ratios,
    npv,
    ppv,
    rd_to_roc,
    relative_utility_from_rd_slope,
    relative_utility_from_roc_slope,
    roc_to_rd,
)
from .cohort import (
    Cohort,
    PairedOutcomeTable,
    PairedRecallTable,
    PatientRecord,
    apply_ruleout,
    ingest_cohort,
    sweep,
    table_from_aggregates,
    threshold_for_fraction,
)
from .inference import BootstrapConfig, BootstrapResult, bootstrap_metric, bootstrap_rd
from .baseline_ru import PerformanceCurve, baseline_relative_utility, fit_spline, slope_at
from .regions import RegionVerdict, boundary_polylines, classify
