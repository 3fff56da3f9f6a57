"""Per-patient cohorts and the believe-the-negative rule-out simulation.

A rule-out device removes every exam whose AI score falls below a
threshold.  Retained exams keep the reader's original decision (the
consistent-behaviour assumption), so the with-device recall set is always
a subset of the without-device recall set.  That nesting is what
:class:`PairedOutcomeTable` encodes.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .metrics import ConfusionCounts, RdPoint, RocPoint

__all__ = [
    "CohortFormatError",
    "NestingError",
    "PatientRecord",
    "Cohort",
    "OutcomeRow",
    "PairedOutcomeTable",
    "PairedRecallTable",
    "RuleoutResult",
    "SweepRow",
    "ingest_cohort",
    "apply_ruleout",
    "threshold_for_fraction",
    "sweep",
    "table_from_aggregates",
]

COHORT_HEADER = ("patient_id", "truth", "reader_decision", "ai_score")


class CohortFormatError(ValueError):
    """Malformed cohort input.  ``row`` is the 1-based physical line number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class NestingError(ValueError):
    """A candidate workflow that cannot arise from rule-out of the reference."""


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    truth: int
    reader_decision: int
    ai_score: float

    def __post_init__(self) -> None:
        if self.truth not in (0, 1):
            raise ValueError(f"truth must be 0 or 1, got {self.truth!r}")
        if self.reader_decision not in (0, 1):
            raise ValueError(f"reader_decision must be 0 or 1, got {self.reader_decision!r}")
        if not math.isfinite(self.ai_score):
            raise ValueError(f"ai_score must be finite, got {self.ai_score!r}")


@dataclass(frozen=True)
class Cohort:
    """Immutable, ordered collection of patient records with unique ids."""

    records: tuple[PatientRecord, ...]
    truth: np.ndarray = field(init=False, repr=False, compare=False)
    reader: np.ndarray = field(init=False, repr=False, compare=False)
    scores: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        records = tuple(self.records)
        if not records:
            raise ValueError("empty cohort")
        seen: set[str] = set()
        for r in records:
            if r.patient_id in seen:
                raise ValueError(f"duplicate patient_id {r.patient_id!r}")
            seen.add(r.patient_id)
        object.__setattr__(self, "records", records)
        for name, values, dtype in (
            ("truth", [r.truth for r in records], np.int8),
            ("reader", [r.reader_decision for r in records], np.int8),
            ("scores", [r.ai_score for r in records], np.float64),
        ):
            arr = np.asarray(values, dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_arrays(
        cls,
        truth: Sequence[int],
        reader_decision: Sequence[int],
        ai_score: Sequence[float],
        patient_ids: Sequence[str] | None = None,
    ) -> Cohort:
        n = len(truth)
        if not (len(reader_decision) == n and len(ai_score) == n):
            raise ValueError("truth, reader_decision and ai_score differ in length")
        if patient_ids is None:
            patient_ids = [str(i + 1) for i in range(n)]
        return cls(
            tuple(
                PatientRecord(str(pid), int(t), int(d), float(s))
                for pid, t, d, s in zip(patient_ids, truth, reader_decision, ai_score)
            )
        )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_cancer(self) -> int:
        return int(self.truth.sum())

    @property
    def n_noncancer(self) -> int:
        return len(self) - self.n_cancer

    @property
    def prevalence(self) -> float:
        return self.n_cancer / len(self)


def _parse_binary(text: str, name: str, row: int) -> int:
    text = text.strip()
    if text not in ("0", "1"):
        raise CohortFormatError(f"{name} must be 0 or 1, got {text!r}", row)
    return int(text)


def ingest_cohort(source: TextIO | str | os.PathLike) -> Cohort:
    """Read a cohort from comma-separated text.

    The header must be ``patient_id,truth,reader_decision,ai_score``.
    Lines starting with ``#`` and blank lines are skipped.  ``source`` is
    an open text stream or a path.

    Raises
    ------
    CohortFormatError
        With the offending line number for malformed rows, duplicate ids,
        non-binary labels or non-finite scores; or for an empty cohort.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return ingest_cohort(fh)

    header_seen = False
    records: list[PatientRecord] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = next(csv.reader(io.StringIO(line)))
        if not header_seen:
            if tuple(f.strip() for f in fields) != COHORT_HEADER:
                raise CohortFormatError(
                    f"expected header {','.join(COHORT_HEADER)!r}, got {stripped!r}", lineno
                )
            header_seen = True
            continue
        if len(fields) != len(COHORT_HEADER):
            raise CohortFormatError(
                f"expected {len(COHORT_HEADER)} fields, got {len(fields)}", lineno
            )
        pid = fields[0].strip()
        if not pid:
            raise CohortFormatError("empty patient_id", lineno)
        if pid in seen:
            raise CohortFormatError(
                f"duplicate patient_id {pid!r} (first seen on row {seen[pid]})", lineno
            )
        truth = _parse_binary(fields[1], "truth", lineno)
        decision = _parse_binary(fields[2], "reader_decision", lineno)
        try:
            score = float(fields[3])
        except ValueError:
            raise CohortFormatError(f"ai_score is not a number: {fields[3].strip()!r}", lineno) from None
        if not math.isfinite(score):
            raise CohortFormatError(f"ai_score must be finite, got {fields[3].strip()!r}", lineno)
        seen[pid] = lineno
        records.append(PatientRecord(pid, truth, decision, score))
    if not records:
        raise CohortFormatError("empty cohort")
    return Cohort(tuple(records))


@dataclass(frozen=True)
class OutcomeRow:
    """Joint outcome counts of the two workflows within one truth class.

    There is no "positive with device only" cell: a with-device positive
    needs an AI-positive *and* a reader-positive.
    """

    pos_both: int
    pos_ref_only: int
    neg_both: int

    def __post_init__(self) -> None:
        for name in ("pos_both", "pos_ref_only", "neg_both"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.pos_both + self.pos_ref_only + self.neg_both

    @property
    def pos_with(self) -> int:
        return self.pos_both

    @property
    def pos_without(self) -> int:
        return self.pos_both + self.pos_ref_only

    def as_array(self) -> np.ndarray:
        return np.array([self.pos_both, self.pos_ref_only, self.neg_both], dtype=np.int64)


@dataclass(frozen=True)
class PairedOutcomeTable:
    """Nested joint outcomes of the with-device and without-device workflows."""

    cancer: OutcomeRow
    noncancer: OutcomeRow

    @classmethod
    def from_counts(
        cls, cancer: Iterable[int], noncancer: Iterable[int]
    ) -> PairedOutcomeTable:
        return cls(OutcomeRow(*map(int, cancer)), OutcomeRow(*map(int, noncancer)))

    @property
    def total(self) -> int:
        return self.cancer.total + self.noncancer.total

    def with_device_counts(self) -> ConfusionCounts:
        c, n = self.cancer, self.noncancer
        return ConfusionCounts(
            tp=c.pos_with, fp=n.pos_with, tn=n.total - n.pos_with, fn=c.total - c.pos_with
        )

    def without_device_counts(self) -> ConfusionCounts:
        c, n = self.cancer, self.noncancer
        return ConfusionCounts(
            tp=c.pos_without, fp=n.pos_without, tn=n.total - n.pos_without, fn=c.total - c.pos_without
        )

    def with_device_point(self) -> RocPoint:
        return RocPoint.from_counts(self.with_device_counts())

    def without_device_point(self) -> RocPoint:
        return RocPoint.from_counts(self.without_device_counts())


@dataclass(frozen=True)
class PairedRecallTable:
    """Nested recall outcomes when only recall and detection are known.

    Cells: cancers detected by both workflows, detected without the device
    only, benign recalls in both, benign recalls without the device only,
    and exams not recalled by either.  Truth of non-recalled exams is never
    needed.
    """

    detected_both: int
    detected_ref_only: int
    benign_both: int
    benign_ref_only: int
    not_recalled: int

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
        if self.total == 0:
            raise ValueError("empty recall table")

    @classmethod
    def from_rates(cls, n: int, reference: RdPoint, candidate: RdPoint) -> PairedRecallTable:
        """Rebuild the nested table from published per-exam rates.

        Raises
        ------
        NestingError
            If the candidate recalls or detects more than the reference.
        """
        det_ref = round(reference.detection_rate * n)
        rec_ref = round(reference.recall_rate * n)
        det_cand = round(candidate.detection_rate * n)
        rec_cand = round(candidate.recall_rate * n)
        benign_ref = rec_ref - det_ref
        benign_cand = rec_cand - det_cand
        if det_cand > det_ref or benign_cand > benign_ref:
            raise NestingError(
                "candidate recalls or detects more than the reference; "
                "not reachable by rule-out"
            )
        return cls(det_cand, det_ref - det_cand, benign_cand, benign_ref - benign_cand, n - rec_ref)

    @property
    def total(self) -> int:
        return (
            self.detected_both + self.detected_ref_only + self.benign_both
            + self.benign_ref_only + self.not_recalled
        )

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.detected_both, self.detected_ref_only, self.benign_both,
             self.benign_ref_only, self.not_recalled],
            dtype=np.int64,
        )

    def with_device_point(self) -> RdPoint:
        n = self.total
        return RdPoint((self.detected_both + self.benign_both) / n, self.detected_both / n, n)

    def without_device_point(self) -> RdPoint:
        n = self.total
        detected = self.detected_both + self.detected_ref_only
        recalled = detected + self.benign_both + self.benign_ref_only
        return RdPoint(recalled / n, detected / n, n)


@dataclass(frozen=True)
class RuleoutResult:
    with_device: RocPoint
    without_device: RocPoint
    table: PairedOutcomeTable
    ruled_out_fraction: float
    threshold: float


def _paired_table(truth: np.ndarray, reader: np.ndarray, retained: np.ndarray) -> PairedOutcomeTable:
    rows = []
    for cls in (1, 0):
        in_cls = truth == cls
        pos_without = in_cls & (reader == 1)
        pos_both = int(np.count_nonzero(pos_without & retained))
        n_pos = int(np.count_nonzero(pos_without))
        rows.append(OutcomeRow(pos_both, n_pos - pos_both, int(np.count_nonzero(in_cls)) - n_pos))
    return PairedOutcomeTable(*rows)


def apply_ruleout(c: Cohort, threshold: float) -> RuleoutResult:
    """Simulate the believe-the-negative workflow at one AI threshold.

    An exam is ruled out iff ``ai_score < threshold``; equality keeps it.
    """
    retained = c.scores >= threshold
    table = _paired_table(c.truth, c.reader, retained)
    return RuleoutResult(
        with_device=table.with_device_point(),
        without_device=table.without_device_point(),
        table=table,
        ruled_out_fraction=float(np.count_nonzero(~retained)) / len(c),
        threshold=float(threshold),
    )


def threshold_for_fraction(c: Cohort, fraction: float) -> tuple[float, float]:
    """Threshold ruling out the largest achievable fraction not above ``fraction``.

    Tied scores cannot be split, so the achieved fraction may fall short of
    the request.  The threshold is the next float above the highest
    ruled-out score (``-inf`` when nothing is ruled out).

    Returns
    -------
    (threshold, achieved_fraction)
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction!r}")
    s = np.sort(c.scores)
    n = len(s)
    k = min(n, int(math.floor(fraction * n + 1e-9)))
    # k lowest exams are separable iff the k-th and (k+1)-th sorted scores differ
    while 0 < k < n and s[k - 1] == s[k]:
        k -= 1
    if k == 0:
        return -math.inf, 0.0
    return float(np.nextafter(s[k - 1], math.inf)), k / n


@dataclass(frozen=True)
class SweepRow:
    requested_fraction: float
    achieved_fraction: float
    threshold: float
    with_device: RocPoint
    table: PairedOutcomeTable


def sweep(c: Cohort, fractions: Iterable[float]) -> list[SweepRow]:
    """Rule-out simulation at each requested fraction, ordered by fraction."""
    rows = []
    for f in sorted(fractions):
        t, achieved = threshold_for_fraction(c, f)
        r = apply_ruleout(c, t)
        rows.append(SweepRow(f, achieved, t, r.with_device, r.table))
    return rows


def _nested_row(n: int, rate_ref: float, rate_cand: float, label: str) -> OutcomeRow:
    pos_ref = round(rate_ref * n)
    pos_cand = round(rate_cand * n)
    for name, rate, count in (("reference", rate_ref, pos_ref), ("candidate", rate_cand, pos_cand)):
        # nearest-integer reconstruction: residual is at most half a count
        if abs(rate * n - count) > 0.5 + 1e-9:
            raise ValueError(f"{label} {name} rate {rate} inconsistent with n={n}")
    if pos_cand > pos_ref:
        raise NestingError(
            f"candidate {label} positives ({pos_cand}) exceed reference ({pos_ref}); "
            "not reachable by rule-out"
        )
    return OutcomeRow(pos_cand, pos_ref - pos_cand, n - pos_ref)


def table_from_aggregates(
    n_cancer: int, n_noncancer: int, ref: RocPoint, cand: RocPoint
) -> PairedOutcomeTable:
    """Rebuild the nested paired table from published Se/Sp pairs.

    Raises
    ------
    NestingError
        If ``cand`` has a higher tpr or fpr than ``ref``.
    """
    if n_cancer < 0 or n_noncancer < 0:
        raise ValueError("class sizes must be non-negative")
    if cand.tpr > ref.tpr or cand.fpr > ref.fpr:
        raise NestingError(
            "candidate has higher tpr or fpr than the reference; not reachable by rule-out"
        )
    return PairedOutcomeTable(
        _nested_row(n_cancer, ref.tpr, cand.tpr, "cancer"),
        _nested_row(n_noncancer, ref.fpr, cand.fpr, "non-cancer"),
    )
