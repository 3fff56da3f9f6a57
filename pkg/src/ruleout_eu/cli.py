"""Command-line front end.

Subcommands: ``metrics``, ``compare``, ``simulate``, ``baseline-ru``,
``reproduce``.  Exit status is 0 on success, 2 on invalid input and 1 on
an unexpected internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from typing import Any, Sequence, TextIO

from . import __version__
from .baseline_ru import (
    baseline_relative_utility,
    bundled_curve,
    fit_spline,
    knot_bootstrap_relative_utility,
    read_curve,
    slope_at,
)
from .cohort import (
    NestingError,
    apply_ruleout,
    ingest_cohort,
    table_from_aggregates,
    threshold_for_fraction,
)
from .inference import BootstrapConfig, bootstrap_metric, iui_metric, ppv_npv_exceedance
from .metrics import (
    RdPoint,
    RocPoint,
    UtilityContext,
    diui,
    iui,
    likelihood_ratios,
    npv,
    ppv,
    roc_to_rd,
)
from .regions import classify
from .studies import reproduce


class UsageError(Exception):
    """Invalid or inconsistent command-line input (exit status 2)."""


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text!r}")
    return v


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")


def _add_bootstrap(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=5000, help="bootstrap resamples (default 5000)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--ci", type=float, default=0.95, help="confidence level (default 0.95)")
    p.add_argument("--workers", type=int, default=1, help="bootstrap threads; results do not depend on it")


def _config(args: argparse.Namespace) -> BootstrapConfig:
    try:
        return BootstrapConfig(
            n_resamples=args.samples, ci_level=args.ci, seed=args.seed, n_workers=args.workers
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output -----------------------------------------------------------------

def _fmt(v: Any) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _emit_records(report: dict, rows: list[dict], fmt: str, out: TextIO, meta_keys: Sequence[str] = ()) -> None:
    if fmt == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
        return
    meta = {k: report[k] for k in meta_keys if k in report}
    if fmt == "csv":
        for k, v in meta.items():
            out.write(f"# {k}={v}\n")
        for note in report.get("notes", []):
            out.write(f"# {note}\n")
        if rows:
            w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in r.items()})
        return
    for k, v in meta.items():
        out.write(f"{k}: {v}\n")
    for note in report.get("notes", []):
        out.write(f"note: {note}\n")
    if not rows:
        return
    cols = list(rows[0])
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    out.write("  ".join(c.rjust(w) for c, w in zip(cols, widths)) + "\n")
    for row in cells:
        out.write("  ".join(v.rjust(w) for v, w in zip(row, widths)) + "\n")


def _emit_mapping(report: dict, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["quantity", "value"])
        for k, v in _flatten(report):
            w.writerow([k, repr(v) if isinstance(v, float) else v])
    else:
        for k, v in _flatten(report):
            out.write(f"{k:<32} {_fmt(v)}\n")


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, Any]]:
    items = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            items.extend(_flatten(v, key + "."))
        else:
            items.append((key, v))
    return items


def _bootstrap_dict(res) -> dict:
    d = asdict(res)
    d.pop("replicate_values", None)
    return d


# -- subcommands --------------------------------------------------------------

def cmd_metrics(args: argparse.Namespace, out: TextIO) -> int:
    roc_given = args.se is not None or args.sp is not None
    rd_given = args.recall_rate is not None or args.detection_rate is not None
    if roc_given == rd_given:
        raise UsageError("give either --se/--sp/--prevalence or --recall-rate/--detection-rate")
    report: dict[str, Any] = {}
    u = args.relative_utility
    if roc_given:
        if args.se is None or args.sp is None or args.prevalence is None:
            raise UsageError("--se, --sp and --prevalence are all required")
        if not 0.0 < args.prevalence < 1.0:
            raise UsageError("--prevalence must lie in (0, 1)")
        p = RocPoint.from_se_sp(args.se, args.sp)
        # PPV/NPV do not depend on the relative utility; 1.0 is a placeholder
        ctx = UtilityContext(args.prevalence, u if u is not None else 1.0)
        rho_plus, rho_minus = likelihood_ratios(p)
        report.update(
            se=args.se, sp=args.sp, prevalence=args.prevalence,
            rho_plus=rho_plus, rho_minus=rho_minus, ppv=ppv(p, ctx), npv=npv(p, ctx),
        )
        rd = roc_to_rd(p, ctx)
        report.update(recall_rate=rd.recall_rate, detection_rate=rd.detection_rate)
        if u is not None:
            report.update(relative_utility=u, iui=iui(p, ctx), diui=diui(rd, u))
    else:
        if args.recall_rate is None or args.detection_rate is None:
            raise UsageError("--recall-rate and --detection-rate are both required")
        if u is None:
            raise UsageError("--relative-utility is required for DIUI")
        try:
            rd = RdPoint(args.recall_rate, args.detection_rate)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report.update(
            recall_rate=rd.recall_rate, detection_rate=rd.detection_rate,
            relative_utility=u, diui=diui(rd, u),
        )
    _emit_mapping(report, args.format, out)
    return 0


def _verdict_dict(v) -> dict:
    return {
        "sesp_superior": v.sesp_superior,
        "ppv_npv_superior": v.ppv_npv_superior,
        "eu_superior": v.eu_superior,
    }


def cmd_compare(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _config(args)
    if args.cohort is not None:
        if args.threshold is None:
            raise UsageError("--cohort needs --threshold")
        cohort = ingest_cohort(args.cohort)
        r = apply_ruleout(cohort, args.threshold)
        table, ref, cand = r.table, r.without_device, r.with_device
        prevalence = args.prevalence if args.prevalence is not None else cohort.prevalence
        source = {"cohort": args.cohort, "threshold": args.threshold, "ruled_out_fraction": r.ruled_out_fraction}
    else:
        needed = ("ref_se", "ref_sp", "cand_se", "cand_sp", "n_cancer", "n_noncancer")
        missing = [f"--{n.replace('_', '-')}" for n in needed if getattr(args, n) is None]
        if missing:
            raise UsageError("missing " + ", ".join(missing) + " (or use --cohort/--threshold)")
        ref = RocPoint.from_se_sp(args.ref_se, args.ref_sp)
        cand = RocPoint.from_se_sp(args.cand_se, args.cand_sp)
        try:
            table = table_from_aggregates(args.n_cancer, args.n_noncancer, ref, cand)
        except NestingError as exc:
            raise UsageError(str(exc)) from None
        prevalence = (
            args.prevalence if args.prevalence is not None
            else args.n_cancer / (args.n_cancer + args.n_noncancer)
        )
        source = {"n_cancer": args.n_cancer, "n_noncancer": args.n_noncancer}
    try:
        ctx = UtilityContext(prevalence, args.relative_utility)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    verdict = classify(cand, ref, ctx)
    c_res, r_res = bootstrap_metric(table, iui_metric(ctx), cfg)
    report = {
        **source,
        "prevalence": prevalence,
        "relative_utility": args.relative_utility,
        "seed": cfg.seed,
        "n_resamples": cfg.n_resamples,
        "ci_level": cfg.ci_level,
        "reference": {"tpr": ref.tpr, "fpr": ref.fpr},
        "candidate": {"tpr": cand.tpr, "fpr": cand.fpr},
        "verdict": _verdict_dict(verdict),
        "iui_candidate": _bootstrap_dict(c_res),
        "iui_reference": _bootstrap_dict(r_res),
        "p_iui_gt_reference": c_res.exceedance_probability,
        "p_ppv_npv_gt_reference": ppv_npv_exceedance(table, cfg),
    }
    _emit_mapping(report, args.format, out)
    return 0


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    if (args.fractions is None) == (args.thresholds is None):
        raise UsageError("give exactly one of --fractions or --thresholds")
    cfg = _config(args)
    cohort = ingest_cohort(args.cohort)
    prevalence = args.prevalence if args.prevalence is not None else cohort.prevalence
    try:
        ctx = UtilityContext(prevalence, args.relative_utility)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    points: list[tuple[float | None, float]] = []
    if args.fractions is not None:
        for f in sorted(args.fractions):
            if not 0.0 <= f <= 1.0:
                raise UsageError(f"fraction {f} outside [0, 1]")
            points.append((f, threshold_for_fraction(cohort, f)[0]))
    else:
        points = [(None, t) for t in args.thresholds]
    rows = []
    for requested, threshold in points:
        r = apply_ruleout(cohort, threshold)
        p = r.with_device
        c_res, _ = bootstrap_metric(r.table, iui_metric(ctx), cfg)
        rows.append({
            "requested_fraction": requested,
            "threshold": r.threshold,
            "achieved_fraction": r.ruled_out_fraction,
            "se": p.sensitivity,
            "sp": p.specificity,
            "ppv": ppv(p, ctx),
            "npv": npv(p, ctx),
            "iui": iui(p, ctx),
            "ci_low": c_res.ci_low,
            "ci_high": c_res.ci_high,
            "p_iui_gt_baseline": c_res.exceedance_probability,
        })
    report = {
        "cohort": args.cohort,
        "n_patients": len(cohort),
        "n_cancer": cohort.n_cancer,
        "prevalence": prevalence,
        "relative_utility": args.relative_utility,
        "seed": cfg.seed,
        "n_resamples": cfg.n_resamples,
        "ci_level": cfg.ci_level,
        "rows": rows,
    }
    _emit_records(report, rows, args.format, out,
                  ("n_patients", "n_cancer", "prevalence", "relative_utility", "seed", "n_resamples"))
    return 0


def cmd_baseline_ru(args: argparse.Namespace, out: TextIO) -> int:
    if args.space == "roc" and args.prevalence is None:
        raise UsageError("--space roc needs --prevalence")
    if args.curve is None:
        curve = bundled_curve()
        if args.space != "rd":
            raise UsageError("the bundled curve is in recall/detection space")
        curve_name = "bundled synthetic curve (data-dependent; not published reader data)"
    else:
        curve = read_curve(args.curve, args.space)
        curve_name = args.curve
    slope = slope_at(fit_spline(curve), args.at)
    u = baseline_relative_utility(curve, args.at, args.prevalence)
    report: dict[str, Any] = {"curve": curve_name, "space": args.space, "at": args.at,
                              "slope": slope, "relative_utility": u}
    if args.knot_bootstrap:
        report["seed"] = args.seed
        report["knot_bootstrap_heuristic"] = knot_bootstrap_relative_utility(
            curve, args.at, args.knot_bootstrap, args.seed, args.prevalence
        )
    _emit_mapping(report, args.format, out)
    return 0


def cmd_reproduce(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _config(args)
    report = reproduce(args.study, cfg)
    if args.plot_data:
        _emit_records(report, report["eu_ratio"], "csv" if args.format == "table" else args.format,
                      out, ("study", "seed", "n_resamples"))
        return 0
    meta = ("study", "seed", "n_resamples", "ci_level", "prevalence", "relative_utility",
            "n_cancer", "n_noncancer", "n_total")
    if args.format == "table":
        keep = ("ruleout_pct", "se", "sp", "recall_rate", "detection_rate", "iui", "diui",
                "ci_low", "ci_high", "p_iui_gt_baseline", "p_ppv_npv_gt_baseline", "p_eu_gt_baseline",
                "published_iui", "published_diui", "delta_iui", "delta_diui")
        rows = [{k: r[k] for k in keep if k in r} for r in report["rows"]]
    else:
        rows = [{k: v for k, v in r.items() if not isinstance(v, list)} for r in report["rows"]]
    _emit_records(report, rows, args.format, out, meta)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruleout-eu",
        description="Predictive values and expected utility for AI rule-out triage.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="PPV/NPV, likelihood ratios, IUI and DIUI of one operating point")
    p.add_argument("--se", type=_probability)
    p.add_argument("--sp", type=_probability)
    p.add_argument("--prevalence", type=_probability)
    p.add_argument("--recall-rate", type=_probability)
    p.add_argument("--detection-rate", type=_probability)
    p.add_argument("--relative-utility", type=_positive)
    _add_format(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="with-device vs without-device comparison with paired bootstrap")
    p.add_argument("--ref-se", type=_probability)
    p.add_argument("--ref-sp", type=_probability)
    p.add_argument("--cand-se", type=_probability)
    p.add_argument("--cand-sp", type=_probability)
    p.add_argument("--n-cancer", type=int)
    p.add_argument("--n-noncancer", type=int)
    p.add_argument("--cohort")
    p.add_argument("--threshold", type=float)
    p.add_argument("--prevalence", type=_probability)
    p.add_argument("--relative-utility", type=_positive, required=True)
    _add_bootstrap(p)
    _add_format(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="rule-out sweep on a per-patient cohort file")
    p.add_argument("--cohort", required=True)
    p.add_argument("--fractions", type=_float_list)
    p.add_argument("--thresholds", type=_float_list)
    p.add_argument("--prevalence", type=_probability)
    p.add_argument("--relative-utility", type=_positive, required=True)
    _add_bootstrap(p)
    _add_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline-ru", help="relative utility from the tangent of a performance curve")
    p.add_argument("--curve", help="x,y curve file (default: bundled synthetic curve)")
    p.add_argument("--at", type=_probability, required=True)
    p.add_argument("--space", choices=("rd", "roc"), default="rd")
    p.add_argument("--prevalence", type=_probability)
    p.add_argument("--knot-bootstrap", type=int, default=0, metavar="N",
                   help="heuristic spread from N resamples of curve points")
    p.add_argument("--seed", type=_seed, default=0)
    _add_format(p)
    p.set_defaults(func=cmd_baseline_ru)

    p = sub.add_parser("reproduce", help="re-analyse a published study from its aggregates")
    p.add_argument("--study", required=True)
    p.add_argument("--plot-data", action="store_true", help="emit EU-ratio vs rule-out fraction instead")
    _add_bootstrap(p)
    _add_format(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args, out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"ruleout-eu {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"ruleout-eu {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
