import random
from collections import Counter, defaultdict

import pytest

from hospnet.dates import day_of, year_of
from hospnet.facilities import (
    BUCKET_BOUNDS,
    bucket_of,
    bucketize,
    bucketize_per_year,
    daily_census,
    facility_stats,
    top_k_facilities,
)
from hospnet.records import DEFAULT_WINDOW, Window

from conftest import vrec


def test_facility_stats_counts():
    recs = [
        vrec(pid="p1", fac="h9", adm="2012-01-01", dis="2012-01-02"),
        vrec(pid="p1", fac="h9", adm="2012-02-01", dis="2012-02-02"),
        vrec(pid="p1", fac="h9", adm="2012-03-01", dis="2012-03-02"),
        vrec(pid="p2", fac="h9", adm="2012-04-01", dis="2012-04-02"),
    ]
    (s,) = facility_stats(recs)
    assert s.facility_id == "h9"
    assert s.admissions == 4
    assert s.distinct_patients == 2


def test_facility_stats_empty():
    assert facility_stats([]) == []


def test_facility_stats_matches_recount():
    rng = random.Random(11)
    recs = []
    for _ in range(800):
        adm = DEFAULT_WINDOW.start + rng.randrange(2000)
        recs.append(
            vrec(
                pid=f"p{rng.randrange(120)}",
                fac=f"h{rng.randrange(15)}",
                adm=adm,
                dis=adm + rng.randrange(8),
            )
        )
    stats = {s.facility_id: s for s in facility_stats(recs)}
    admissions = Counter(r.facility_id for r in recs)
    patients = defaultdict(set)
    per_year = defaultdict(Counter)
    for r in recs:
        patients[r.facility_id].add(r.patient_id)
        per_year[r.facility_id][year_of(r.admission)] += 1
    for fid, s in stats.items():
        assert s.admissions == admissions[fid]
        assert s.distinct_patients == len(patients[fid])
        assert {y: c[0] for y, c in s.per_year.items()} == dict(per_year[fid])
        # per-year admissions sum to the all-years total
        assert sum(c[0] for c in s.per_year.values()) == s.admissions


def test_bucketize_examples():
    class S:
        def __init__(self, fid, admissions):
            self.facility_id = fid
            self.admissions = admissions
            self.distinct_patients = admissions

    hist = bucketize([S("a", 5), S("b", 50), S("c", 50_000)], "admissions")
    assert hist.counts == [1, 1, 0, 0, 1, 0]


def test_bucket_boundaries():
    assert bucket_of(9) == 0
    assert bucket_of(10) == 1
    assert bucket_of(999) == 2
    assert bucket_of(1_000) == 3
    assert bucket_of(100_000) == 5
    with pytest.raises(ValueError):
        bucket_of(0)


def test_bucketize_matches_direct_classification():
    rng = random.Random(5)
    recs = []
    for _ in range(600):
        adm = DEFAULT_WINDOW.start + rng.randrange(2000)
        recs.append(
            vrec(
                pid=f"p{rng.randrange(400)}",
                fac=f"h{rng.randrange(40)}",
                adm=adm,
                dis=adm + 1,
            )
        )
    stats = facility_stats(recs)
    hist = bucketize(stats, "admissions")
    assert sum(hist.counts) == len(stats)
    direct = [0] * len(BUCKET_BOUNDS)
    for s in stats:
        for i, (lo, hi) in enumerate(BUCKET_BOUNDS):
            if s.admissions >= lo and (hi is None or s.admissions <= hi):
                direct[i] += 1
                break
    assert hist.counts == direct


def test_daily_census_single_stay():
    window = Window(day_of("2012-01-01"), day_of("2012-01-10"))
    recs = [vrec(fac="h1", adm="2012-01-03", dis="2012-01-05")]
    census = daily_census(recs, "h1", window)
    assert census.series == [0, 0, 1, 1, 1, 0, 0, 0, 0, 0]


def test_daily_census_overlapping_stays():
    window = Window(day_of("2012-01-01"), day_of("2012-01-06"))
    recs = [
        vrec(pid="p1", fac="h1", adm="2012-01-02", dis="2012-01-04"),
        vrec(pid="p2", fac="h1", adm="2012-01-04", dis="2012-01-05"),
    ]
    census = daily_census(recs, "h1", window)
    assert census.series == [0, 1, 1, 2, 1, 0]


def test_daily_census_unknown_facility_empty():
    window = Window(day_of("2012-01-01"), day_of("2012-01-03"))
    census = daily_census([vrec(fac="h1")], "nope", window)
    assert census.series == [0, 0, 0]


def test_daily_census_matches_brute_force_and_conserves():
    rng = random.Random(9)
    window = Window(DEFAULT_WINDOW.start, DEFAULT_WINDOW.start + 400)
    recs = []
    for _ in range(10_000):
        adm = window.start + rng.randrange(380)
        recs.append(
            vrec(
                pid=f"p{rng.randrange(500)}",
                fac=f"h{rng.randrange(4)}",
                adm=adm,
                dis=adm + rng.randrange(10),
            )
        )
    for fid in ["h0", "h1", "h2", "h3"]:
        census = daily_census(recs, fid, window)
        brute = [
            sum(
                1
                for r in recs
                if r.facility_id == fid and r.admission <= day <= r.discharge
            )
            for day in range(window.start, window.end + 1)
        ]
        assert census.series == brute
        stays = [r for r in recs if r.facility_id == fid]
        expected = sum(
            min(r.discharge, window.end) - max(r.admission, window.start) + 1
            for r in stays
        )
        assert sum(census.series) == expected


def test_top_k_facilities():
    recs = []
    for i, n in enumerate([5, 3, 3, 1]):
        for j in range(n):
            recs.append(
                vrec(
                    pid=f"p{i}_{j}",
                    fac=f"h{i}",
                    adm=DEFAULT_WINDOW.start + 10 * j,
                    dis=DEFAULT_WINDOW.start + 10 * j + 1,
                )
            )
    stats = facility_stats(recs)
    top = top_k_facilities(stats, 2, metric="admissions")
    assert [s.facility_id for s in top] == ["h0", "h1"]  # tie h1/h2 -> id order
    everything = top_k_facilities(stats, 99, metric="admissions")
    assert len(everything) == 4
    with pytest.raises(ValueError):
        top_k_facilities(stats, 0, metric="admissions")


def test_bucketize_per_year_sums():
    recs = [
        vrec(pid=f"p{i}", fac="h1", adm=f"201{y}-03-01", dis=f"201{y}-03-04")
        for i, y in enumerate([0, 0, 1, 2, 2, 2])
    ]
    stats = facility_stats(recs)
    per_year = bucketize_per_year(stats, "admissions")
    assert set(per_year) == {2010, 2011, 2012}
    assert per_year[2012].counts[0] == 1  # 3 admissions -> bucket 1-9
