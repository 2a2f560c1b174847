"""Per-patient histories and population / duration statistics."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .icd import chapter_of
from .records import Dataset, Sex, ValidatedRecord, Window

STAY_SORT_KEY = lambda r: (r.admission, r.discharge, r.facility_id)


@dataclass
class PatientHistory:
    patient_id: str
    stays: List[ValidatedRecord]  # sorted by (admission, discharge, facility)
    sex: Sex
    birth_year: int


@dataclass
class GroupingReport:
    patients: int = 0
    stays: int = 0
    conflicting_demographics: int = 0


def group_by_patient(
    records: Iterable[ValidatedRecord],
    report: Optional[GroupingReport] = None,
    assume_grouped: bool = False,
) -> Iterator[PatientHistory]:
    """Group records into per-patient histories.

    With assume_grouped=True the input is trusted to keep each patient's
    rows contiguous (as the synthetic generator writes them) and histories
    are emitted with O(single history) memory. Otherwise all records are
    accumulated first.

    Conflicting sex/birth_year within one patient id keeps the first seen
    value and bumps the report counter.
    """
    if report is None:
        report = GroupingReport()

    def finish(pid: str, stays: List[ValidatedRecord]) -> PatientHistory:
        sex, birth_year = stays[0].sex, stays[0].birth_year
        for s in stays[1:]:
            if s.sex is not sex or s.birth_year != birth_year:
                report.conflicting_demographics += 1
                break
        stays.sort(key=STAY_SORT_KEY)
        report.patients += 1
        report.stays += len(stays)
        return PatientHistory(pid, stays, sex, birth_year)

    if assume_grouped:
        current_id: Optional[str] = None
        current: List[ValidatedRecord] = []
        for r in records:
            if r.patient_id != current_id:
                if current:
                    yield finish(current_id, current)
                current_id, current = r.patient_id, []
            current.append(r)
        if current:
            yield finish(current_id, current)
    else:
        buckets: Dict[str, List[ValidatedRecord]] = defaultdict(list)
        for r in records:
            buckets[r.patient_id].append(r)
        for pid in sorted(buckets):
            yield finish(pid, buckets[pid])


def stay_durations(h: PatientHistory, window: Window) -> List[int]:
    """Inclusive stay lengths, truncated at the window end for censored stays."""
    return [min(s.discharge, window.end) - s.admission + 1 for s in h.stays]


def home_gaps(h: PatientHistory) -> List[int]:
    """Full days spent in no facility between consecutive stays.

    gap = next.admission - prev.discharge - 1. Gap 0 (discharge one day,
    admission the next) counts; intersecting or touching pairs (gap < 0)
    contribute nothing.
    """
    gaps = []
    for prev, nxt in zip(h.stays, h.stays[1:]):
        gap = nxt.admission - prev.discharge - 1
        if gap >= 0:
            gaps.append(gap)
    return gaps


@dataclass
class AdmissionStats:
    patients: int
    mean: float
    median: int  # lower median on even-sized samples
    min: int
    max: int

    def to_dict(self) -> dict:
        return {
            "patients": self.patients,
            "mean": self.mean,
            "median": self.median,
            "min": self.min,
            "max": self.max,
        }


def _stats_of(sizes: List[int]) -> AdmissionStats:
    sizes = sorted(sizes)
    n = len(sizes)
    return AdmissionStats(
        patients=n,
        mean=sum(sizes) / n,
        median=sizes[(n - 1) // 2],
        min=sizes[0],
        max=sizes[-1],
    )


def admission_stats(
    histories: Iterable[PatientHistory],
) -> Dict[Sex, AdmissionStats]:
    """Admissions-per-person aggregates, keyed by sex."""
    sizes: Dict[Sex, List[int]] = defaultdict(list)
    for h in histories:
        sizes[h.sex].append(len(h.stays))
    return {sex: _stats_of(values) for sex, values in sizes.items()}


@dataclass
class PopulationPyramid:
    # (birth_year, sex) -> distinct patient count; unknown demographics
    # are kept in a separate bucket so the known counts stay clean.
    counts: Counter = field(default_factory=Counter)
    unknown: int = 0

    def total(self) -> int:
        return sum(self.counts.values()) + self.unknown

    def to_rows(self) -> List[Tuple[int, str, int]]:
        return sorted(
            (year, sex.value, n) for (year, sex), n in self.counts.items()
        )


def population_pyramid(histories: Iterable[PatientHistory]) -> PopulationPyramid:
    pyramid = PopulationPyramid()
    for h in histories:
        if h.sex is Sex.UNKNOWN:
            pyramid.unknown += 1
        else:
            pyramid.counts[(h.birth_year, h.sex)] += 1
    return pyramid


def chapter_admission_counts(
    records: Iterable[ValidatedRecord],
) -> Tuple[Counter, int]:
    """Record counts per diagnosis chapter; second value counts records
    whose code maps to no chapter."""
    counts: Counter = Counter()
    unknown = 0
    for r in records:
        chapter = chapter_of(r.diagnosis)
        if chapter is None:
            unknown += 1
        else:
            counts[chapter] += 1
    return counts, unknown


def duration_histogram(values: Iterable[int]) -> Dict[int, int]:
    """Occurrence counts per integer day length."""
    return dict(Counter(values))
