"""Facility-level statistics: admissions, distinct patients, decade-bucket
histograms, per-year breakdowns, and daily census series."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .dates import iso_of, year_of
from .records import Dataset, ValidatedRecord, Window

# Decade buckets partitioning [1, inf): 1-9, 10-99, ..., 100000+.
BUCKET_BOUNDS: Tuple[Tuple[int, Optional[int]], ...] = (
    (1, 9),
    (10, 99),
    (100, 999),
    (1_000, 9_999),
    (10_000, 99_999),
    (100_000, None),
)


@dataclass
class FacilityStats:
    facility_id: str
    admissions: int = 0
    patients: set = field(default_factory=set)
    # year -> [admissions, distinct patient ids]; attribution by admission year
    per_year: Dict[int, List] = field(default_factory=dict)

    @property
    def distinct_patients(self) -> int:
        return len(self.patients)

    def to_dict(self) -> dict:
        return {
            "facility_id": self.facility_id,
            "admissions": self.admissions,
            "distinct_patients": self.distinct_patients,
            "per_year": {
                str(year): {"admissions": adm, "distinct_patients": len(pats)}
                for year, (adm, pats) in sorted(self.per_year.items())
            },
        }


def facility_stats(
    records: Iterable[ValidatedRecord], per_year: bool = True
) -> List[FacilityStats]:
    """Per-facility admission and distinct-patient counts.

    A stay spanning New Year counts once, in its admission year, so the
    per-year admissions always sum to the total.
    """
    stats: Dict[str, FacilityStats] = {}
    for r in records:
        s = stats.get(r.facility_id)
        if s is None:
            s = stats[r.facility_id] = FacilityStats(r.facility_id)
        s.admissions += 1
        s.patients.add(r.patient_id)
        if per_year:
            year = year_of(r.admission)
            cell = s.per_year.get(year)
            if cell is None:
                cell = s.per_year[year] = [0, set()]
            cell[0] += 1
            cell[1].add(r.patient_id)
    return [stats[fid] for fid in sorted(stats)]


def bucket_of(value: int) -> int:
    """Index of the decade bucket containing a metric value >= 1."""
    for i, (lo, hi) in enumerate(BUCKET_BOUNDS):
        if value >= lo and (hi is None or value <= hi):
            return i
    raise ValueError(f"metric value {value} below 1")


def _metric(s: FacilityStats, metric: str) -> int:
    if metric == "admissions":
        return s.admissions
    if metric == "patients":
        return s.distinct_patients
    raise ValueError(f"unknown metric {metric!r}")


@dataclass
class BucketHistogram:
    metric: str
    counts: List[int]  # aligned with BUCKET_BOUNDS

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "buckets": [
                {"lo": lo, "hi": hi, "facilities": n}
                for (lo, hi), n in zip(BUCKET_BOUNDS, self.counts)
            ],
        }


def bucketize(stats: Iterable[FacilityStats], metric: str) -> BucketHistogram:
    counts = [0] * len(BUCKET_BOUNDS)
    for s in stats:
        value = _metric(s, metric)
        if value >= 1:
            counts[bucket_of(value)] += 1
    return BucketHistogram(metric, counts)


def bucketize_per_year(
    stats: Iterable[FacilityStats], metric: str
) -> Dict[int, BucketHistogram]:
    """One decade histogram per admission year."""
    per_year_counts: Dict[int, List[int]] = defaultdict(
        lambda: [0] * len(BUCKET_BOUNDS)
    )
    for s in stats:
        for year, (adm, pats) in s.per_year.items():
            value = adm if metric == "admissions" else len(pats)
            if value >= 1:
                per_year_counts[year][bucket_of(value)] += 1
    return {
        year: BucketHistogram(metric, counts)
        for year, counts in sorted(per_year_counts.items())
    }


@dataclass
class CensusSeries:
    facility_id: str
    start: int  # day number of series[0]
    series: List[int]  # concurrent stays per day

    def to_rows(self) -> List[Tuple[str, str, int]]:
        return [
            (self.facility_id, iso_of(self.start + i), n)
            for i, n in enumerate(self.series)
        ]


def daily_census(
    records: Iterable[ValidatedRecord],
    facility_id: str,
    window: Window,
) -> CensusSeries:
    """Concurrent stays per day for one facility, via a difference-array
    sweep (+1 at admission, -1 past discharge, prefix sum). Days outside
    the window are clipped."""
    n_days = window.end - window.start + 1
    diff = [0] * (n_days + 1)
    for r in records:
        if r.facility_id != facility_id:
            continue
        lo = max(r.admission, window.start) - window.start
        hi = min(r.discharge, window.end) - window.start
        if hi < lo:
            continue
        diff[lo] += 1
        diff[hi + 1] -= 1
    series = []
    depth = 0
    for i in range(n_days):
        depth += diff[i]
        series.append(depth)
    return CensusSeries(facility_id, window.start, series)


def top_k_facilities(
    stats: Iterable[FacilityStats], k: int, metric: str = "patients"
) -> List[FacilityStats]:
    """k largest facilities, metric-descending, ties by facility id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(stats, key=lambda s: (-_metric(s, metric), s.facility_id))
    return ranked[:k]
