"""Paired bootstrap inference for rule-out comparisons.

Resampling is done on the nested outcome tables, one multinomial draw per
truth class (or over the whole table in unconditional mode), so every
replicate keeps the with-device recall set inside the without-device one.
Each replicate owns a Philox stream keyed by ``(seed, replicate index)``;
results are identical whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .cohort import OutcomeRow, PairedOutcomeTable, PairedRecallTable
from .metrics import UtilityContext, diui, iui, likelihood_ratios

__all__ = [
    "BootstrapConfig",
    "BootstrapResult",
    "TooManyUndefinedError",
    "replicate_rng",
    "resample_paired",
    "resample_recall",
    "bootstrap_metric",
    "bootstrap_rd",
    "iui_metric",
    "iui_ratio_metric",
    "diui_ratio_metric",
    "ppv_npv_exceedance",
]

UNDEFINED_CEILING = 0.01

Metric = Callable[[Any], tuple[float, float]]


class TooManyUndefinedError(ValueError):
    """More than 1% of bootstrap replicates produced an undefined metric."""


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampling settings.

    ``conditional`` keeps the observed class sizes fixed (the default);
    otherwise class totals are redrawn too, which resamples prevalence.
    ``n_workers`` only affects speed, never results.
    """

    n_resamples: int = 5000
    ci_level: float = 0.95
    seed: int = 0
    conditional: bool = True
    n_workers: int = 1
    keep_replicates: bool = False

    def __post_init__(self) -> None:
        if int(self.n_resamples) != self.n_resamples or self.n_resamples < 1:
            raise ValueError("n_resamples must be a positive integer")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ci_level must lie in (0, 1)")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.n_workers < 1:
            raise ValueError("n_workers must be at least 1")


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile bootstrap summary of one workflow's metric.

    ``exceedance_probability`` is the fraction of defined replicates in
    which the candidate metric is strictly greater than the reference
    metric; both results of a pair carry the same value.
    ``tie_probability`` is the fraction with exact equality.
    """

    point_estimate: float
    ci_low: float
    ci_high: float
    exceedance_probability: float
    tie_probability: float = 0.0
    n_undefined: int = 0
    replicate_values: np.ndarray | None = field(default=None, repr=False, compare=False)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one replicate."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _multinomial_rows(rows: Sequence[np.ndarray], rng: np.random.Generator, conditional: bool) -> list[np.ndarray]:
    if conditional:
        out = []
        for cells in rows:
            n = int(cells.sum())
            out.append(cells.copy() if n == 0 else rng.multinomial(n, cells / n))
        return out
    flat = np.concatenate(rows)
    n = int(flat.sum())
    drawn = rng.multinomial(n, flat / n)
    return np.split(drawn, np.cumsum([len(r) for r in rows])[:-1])


def resample_paired(
    table: PairedOutcomeTable, rng: np.random.Generator, conditional: bool = True
) -> PairedOutcomeTable:
    """One bootstrap replicate of a nested paired table."""
    cancer, noncancer = _multinomial_rows(
        [table.cancer.as_array(), table.noncancer.as_array()], rng, conditional
    )
    return PairedOutcomeTable(OutcomeRow(*map(int, cancer)), OutcomeRow(*map(int, noncancer)))


def resample_recall(table: PairedRecallTable, rng: np.random.Generator) -> PairedRecallTable:
    """One bootstrap replicate of a recall table (exam-level multinomial)."""
    (cells,) = _multinomial_rows([table.as_array()], rng, True)
    return PairedRecallTable(*map(int, cells))


def _resampler(table: Any, conditional: bool) -> Callable[[np.random.Generator], Any]:
    if isinstance(table, PairedOutcomeTable):
        return lambda rng: resample_paired(table, rng, conditional)
    if isinstance(table, PairedRecallTable):
        return lambda rng: resample_recall(table, rng)
    raise TypeError(f"cannot resample {type(table).__name__}")


def _evaluate(metric: Callable[[Any], Any], t: Any) -> Any:
    try:
        return metric(t)
    except (ZeroDivisionError, ValueError):
        return None


def _run_replicates(table: Any, fn: Callable[[Any], Any], cfg: BootstrapConfig) -> list[Any]:
    draw = _resampler(table, cfg.conditional)

    def one(i: int) -> Any:
        return _evaluate(fn, draw(replicate_rng(cfg.seed, i)))

    if cfg.n_workers == 1:
        return [one(i) for i in range(cfg.n_resamples)]
    out: list[Any] = [None] * cfg.n_resamples
    chunks = np.array_split(np.arange(cfg.n_resamples), cfg.n_workers)

    def run(idx: np.ndarray) -> None:
        for i in idx:
            out[i] = one(int(i))

    with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
        list(pool.map(run, chunks))
    return out


def _defined(value: Any) -> bool:
    return value is not None and all(math.isfinite(v) for v in value)


def _check_undefined(n_undefined: int, cfg: BootstrapConfig) -> None:
    if n_undefined > UNDEFINED_CEILING * cfg.n_resamples:
        raise TooManyUndefinedError(
            f"{n_undefined} of {cfg.n_resamples} replicates undefined "
            f"(ceiling {UNDEFINED_CEILING:.0%})"
        )
    if n_undefined == cfg.n_resamples:
        raise TooManyUndefinedError("every replicate undefined")


def _percentile_ci(values: np.ndarray, level: float) -> tuple[float, float]:
    alpha = 1.0 - level
    lo, hi = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0])
    return float(lo), float(hi)


def bootstrap_metric(
    table: PairedOutcomeTable | PairedRecallTable,
    metric: Metric,
    cfg: BootstrapConfig = BootstrapConfig(),
) -> tuple[BootstrapResult, BootstrapResult]:
    """Paired percentile bootstrap of a metric evaluated on both workflows.

    Parameters
    ----------
    table : PairedOutcomeTable or PairedRecallTable
        Observed nested outcomes.
    metric : callable
        Maps a table to ``(candidate_value, reference_value)``.  Replicates
        where it raises ``ZeroDivisionError``/``ValueError`` or returns a
        non-finite value are excluded and counted.
    cfg : BootstrapConfig

    Returns
    -------
    (candidate, reference) : BootstrapResult

    Raises
    ------
    TooManyUndefinedError
        If more than 1% of replicates are undefined.
    """
    point_c, point_r = metric(table)
    reps = _run_replicates(table, metric, cfg)
    ok = [r for r in reps if _defined(r)]
    n_undefined = len(reps) - len(ok)
    _check_undefined(n_undefined, cfg)
    values = np.array(ok, dtype=np.float64)
    cand, ref = values[:, 0], values[:, 1]
    exceed = float(np.mean(cand > ref))
    ties = float(np.mean(cand == ref))
    results = []
    for point, vals in ((point_c, cand), (point_r, ref)):
        lo, hi = _percentile_ci(vals, cfg.ci_level)
        results.append(
            BootstrapResult(
                point_estimate=float(point),
                ci_low=lo,
                ci_high=hi,
                exceedance_probability=exceed,
                tie_probability=ties,
                n_undefined=n_undefined,
                replicate_values=vals if cfg.keep_replicates else None,
            )
        )
    return results[0], results[1]


def iui_metric(ctx: UtilityContext) -> Metric:
    """IUI of (with-device, without-device) at a fixed prevalence and relative utility."""

    def metric(t: PairedOutcomeTable) -> tuple[float, float]:
        return iui(t.with_device_point(), ctx), iui(t.without_device_point(), ctx)

    return metric


def iui_ratio_metric(ctx: UtilityContext) -> Metric:
    """Ratio of with-device to without-device IUI, paired with the unit reference."""

    def metric(t: PairedOutcomeTable) -> tuple[float, float]:
        return iui(t.with_device_point(), ctx) / iui(t.without_device_point(), ctx), 1.0

    return metric


def _diui_metric(relative_utility: float) -> Metric:
    def metric(t: PairedRecallTable) -> tuple[float, float]:
        return (
            diui(t.with_device_point(), relative_utility),
            diui(t.without_device_point(), relative_utility),
        )

    return metric


def diui_ratio_metric(relative_utility: float) -> Metric:
    def metric(t: PairedRecallTable) -> tuple[float, float]:
        c = diui(t.with_device_point(), relative_utility)
        return c / diui(t.without_device_point(), relative_utility), 1.0

    return metric


def bootstrap_rd(
    table: PairedRecallTable,
    relative_utility: float,
    cfg: BootstrapConfig = BootstrapConfig(),
) -> tuple[BootstrapResult, BootstrapResult]:
    """Paired bootstrap of DIUI for a rule-out scenario against its baseline."""
    if not relative_utility > 0:
        raise ValueError("relative_utility must be positive")
    return bootstrap_metric(table, _diui_metric(relative_utility), cfg)


def _pv_superior(t: PairedOutcomeTable) -> tuple[float, float]:
    c_plus, c_minus = likelihood_ratios(t.with_device_point())
    r_plus, r_minus = likelihood_ratios(t.without_device_point())
    # PPV and NPV orderings are prevalence-free: they follow the likelihood ratios
    return float(c_plus > r_plus and c_minus < r_minus), 0.0


def ppv_npv_exceedance(
    table: PairedOutcomeTable, cfg: BootstrapConfig = BootstrapConfig()
) -> float:
    """Fraction of replicates where the with-device PPV *and* NPV both exceed baseline."""
    reps = _run_replicates(table, _pv_superior, cfg)
    ok = [r[0] for r in reps if r is not None]
    _check_undefined(len(reps) - len(ok), cfg)
    return float(np.mean(ok))
