"""Overlap detection and the ten-type taxonomy.

An overlap group is a maximal set of >= 2 records of one patient whose
closed stay intervals form a connected intersection graph. Two-record
groups are classified by a fixed-precedence rule list; larger groups are
labeled by their maximal per-day record multiplicity.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .cohort import PatientHistory
from .dates import iso_of
from .icd import chapter_of, pair_key
from .records import ValidatedRecord


class OverlapKind(enum.Enum):
    STANDARD_TRANSFER = "standard_transfer"
    FIRST_DAY_TRANSFER = "first_day_transfer"
    LAST_DAY_TRANSFER = "last_day_transfer"
    SIMULTANEOUS_SINGLE_INSTITUTION = "simultaneous_single_institution"
    TEMPORARY_TRANSFER = "temporary_transfer"
    SIMULTANEOUS_TWO_INSTITUTIONS = "simultaneous_two_institutions"
    UNKNOWN_TWO_INSTITUTIONS = "unknown_two_institutions"
    TWO_ADMISSIONS_SINGLE_INSTITUTION = "two_admissions_single_institution"
    UNKNOWN_MULTIPLE = "unknown_multiple"


PAIR_KINDS = frozenset(k for k in OverlapKind if k is not OverlapKind.UNKNOWN_MULTIPLE)


def kind_label(kind: OverlapKind, multiplicity: Optional[int] = None) -> str:
    """Stable report key, e.g. 'standard_transfer' or 'unknown_multiple(3)'."""
    if kind is OverlapKind.UNKNOWN_MULTIPLE:
        return f"unknown_multiple({multiplicity})"
    return kind.value


@dataclass
class OverlapGroup:
    patient_id: str
    members: List[ValidatedRecord]  # sorted by (admission, discharge, facility)
    kind: Optional[OverlapKind] = None
    multiplicity: Optional[int] = None  # set for UNKNOWN_MULTIPLE

    @property
    def label(self) -> str:
        assert self.kind is not None, "group not classified"
        return kind_label(self.kind, self.multiplicity)


def intersects(a: ValidatedRecord, b: ValidatedRecord) -> bool:
    """Closed day intervals share at least one day."""
    return a.admission <= b.discharge and b.admission <= a.discharge


def find_overlap_groups(h: PatientHistory) -> List[OverlapGroup]:
    """Connected components of the stay-intersection graph, by a single
    left-to-right sweep over the sorted stays.

    A component stays open while the next admission is <= the running
    maximum discharge; singletons are not emitted.
    """
    groups: List[OverlapGroup] = []
    current: List[ValidatedRecord] = []
    max_discharge = -1
    for stay in h.stays:
        if current and stay.admission <= max_discharge:
            current.append(stay)
        else:
            if len(current) >= 2:
                groups.append(OverlapGroup(h.patient_id, current))
            current = [stay]
            max_discharge = stay.discharge
        if stay.discharge > max_discharge:
            max_discharge = stay.discharge
    if len(current) >= 2:
        groups.append(OverlapGroup(h.patient_id, current))
    return groups


def overlap_length(a: ValidatedRecord, b: ValidatedRecord) -> int:
    """Number of shared days of two intersecting stays."""
    return min(a.discharge, b.discharge) - max(a.admission, b.admission) + 1


def daily_multiplicity(g: OverlapGroup) -> int:
    """Maximum number of member stays covering any single day."""
    events: List[Tuple[int, int]] = []
    for m in g.members:
        events.append((m.admission, 1))
        events.append((m.discharge + 1, -1))
    events.sort()
    best = depth = 0
    for _, delta in events:
        depth += delta
        if depth > best:
            best = depth
    return best


def classify_pair(a: ValidatedRecord, b: ValidatedRecord) -> OverlapKind:
    """Type of a two-record overlap; first matching rule wins.

    Preconditions: the periods intersect and a != b. The rule order is the
    one that keeps every taxonomy class reachable: identical periods first,
    then same-facility, then one-day transfer stays, then the one-day
    overlap, then containment.
    """
    assert intersects(a, b), "classify_pair on non-intersecting stays"
    same_adm = a.admission == b.admission
    same_dis = a.discharge == b.discharge
    if same_adm and same_dis:
        if a.facility_id == b.facility_id:
            return OverlapKind.SIMULTANEOUS_SINGLE_INSTITUTION
        return OverlapKind.SIMULTANEOUS_TWO_INSTITUTIONS
    if a.facility_id == b.facility_id:
        return OverlapKind.TWO_ADMISSIONS_SINGLE_INSTITUTION
    for one, other in ((a, b), (b, a)):
        if one.admission == one.discharge:
            if one.admission == other.admission:
                return OverlapKind.FIRST_DAY_TRANSFER
            if one.admission == other.discharge:
                return OverlapKind.LAST_DAY_TRANSFER
    if (
        overlap_length(a, b) == 1
        and a.discharge > a.admission
        and b.discharge > b.admission
    ):
        return OverlapKind.STANDARD_TRANSFER
    contained = (a.admission >= b.admission and a.discharge <= b.discharge) or (
        b.admission >= a.admission and b.discharge <= a.discharge
    )
    if contained and not same_adm and not same_dis:
        return OverlapKind.TEMPORARY_TRANSFER
    return OverlapKind.UNKNOWN_TWO_INSTITUTIONS


def classify_group(g: OverlapGroup) -> OverlapGroup:
    """Attach the taxonomy label to a detected group (in place)."""
    if len(g.members) == 2:
        g.kind = classify_pair(g.members[0], g.members[1])
        g.multiplicity = None
    else:
        # A chain of 3+ records may never stack more than 2 per day; it is
        # still reported as unknown_multiple(2).
        g.kind = OverlapKind.UNKNOWN_MULTIPLE
        g.multiplicity = daily_multiplicity(g)
    return g


def pair_code(
    a: ValidatedRecord, b: ValidatedRecord, chapter_equality: bool = False
) -> str:
    """Four-digit equality signature of a two-record overlap.

    Bits in order: same facility, same diagnosis, same admission date,
    same discharge date. Diagnosis equality compares full codes by
    default; chapter_equality=True compares chapter numbers instead.
    """
    if chapter_equality:
        same_diag = chapter_of(a.diagnosis) == chapter_of(b.diagnosis)
    else:
        same_diag = a.diagnosis == b.diagnosis
    return "".join(
        "1" if same else "0"
        for same in (
            a.facility_id == b.facility_id,
            same_diag,
            a.admission == b.admission,
            a.discharge == b.discharge,
        )
    )


def tally_types(groups: Iterable[OverlapGroup]) -> Dict[str, Tuple[int, float]]:
    """Per-type counts and percentages (of all groups, one decimal)."""
    counts: Counter = Counter()
    for g in groups:
        counts[g.label] += 1
    total = sum(counts.values())
    return {
        label: (n, round(100.0 * n / total, 1))
        for label, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    }


def chapter_pair_tally(
    groups: Iterable[OverlapGroup], chapter_equality: bool = False
) -> Tuple[Dict[str, Counter], int]:
    """Per pair-code tallies of sorted diagnosis chapter pairs.

    Only two-record groups contribute (larger ones are skipped silently by
    the caller's filtering); members with unmappable codes are excluded
    and counted in the second return value.
    """
    tallies: Dict[str, Counter] = {}
    excluded = 0
    for g in groups:
        if len(g.members) != 2:
            continue
        a, b = g.members
        ca, cb = chapter_of(a.diagnosis), chapter_of(b.diagnosis)
        if ca is None or cb is None:
            excluded += 1
            continue
        code = pair_code(a, b, chapter_equality=chapter_equality)
        tallies.setdefault(code, Counter())[pair_key(ca, cb)] += 1
    return tallies, excluded


def top_pairs(tally: Counter, k: int) -> List[Tuple[Tuple[int, int], int]]:
    """k most frequent chapter pairs, count-descending then pair-ascending."""
    return sorted(tally.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def overlap_length_histogram(groups: Iterable[OverlapGroup]) -> Dict[int, int]:
    """Shared-day counts of two-record groups."""
    hist: Counter = Counter()
    for g in groups:
        if len(g.members) == 2:
            hist[overlap_length(g.members[0], g.members[1])] += 1
    return dict(hist)


def chain_diagnostics(groups: Iterable[OverlapGroup]) -> int:
    """Count of 3+-record groups whose per-day multiplicity is only 2."""
    return sum(
        1
        for g in groups
        if g.kind is OverlapKind.UNKNOWN_MULTIPLE and g.multiplicity == 2
    )


def render_group(g: OverlapGroup) -> str:
    """ASCII bars of a group's stays, one line per record.

    Each '#' is one inclusive day of stay; lines share a common origin at
    the group's earliest admission and are padded to equal width.
    """
    origin = min(m.admission for m in g.members)
    width = max(m.discharge for m in g.members) - origin + 1
    id_width = max(len(m.facility_id) for m in g.members)
    lines = []
    for m in g.members:
        offset = m.admission - origin
        bar = " " * offset + "#" * (m.discharge - m.admission + 1)
        lines.append(
            f"{m.facility_id + ':':<{id_width + 1}} | "
            f"{iso_of(origin)}: {bar:<{width}} |"
        )
    return "\n".join(lines)
