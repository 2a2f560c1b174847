"""Seeded synthetic dataset generator with planted, labeled overlap patterns.

The generator stands in for the private insurance extract: it emits the
canonical record file format plus a ground-truth JSON naming every planted
overlap group (type, pair code, transfer direction), so the detection
pipeline can be verified exactly. Same seed, same bytes.

Planted patterns are isolated: each planted patient's remaining stays keep
at least two empty days of distance from the pattern, so detection can
never merge a pattern with unrelated stays.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_left
from dataclasses import dataclass, field
from random import Random
from typing import Dict, Iterable, List, Optional, Tuple

from .dates import iso_of
from .overlaps import OverlapGroup, OverlapKind
from .records import HEADER_LINE, Window, DEFAULT_WINDOW

SCHEMA_VERSION = 1

_MULTI_LABEL = re.compile(r"^unknown_multiple\((\d+)\)$")

PAIR_LABELS = tuple(
    k.value for k in OverlapKind if k is not OverlapKind.UNKNOWN_MULTIPLE
)

# Weighted pool of plausible diagnosis categories spread over the chapters.
DIAGNOSES: Tuple[Tuple[str, int], ...] = (
    ("I21", 6), ("I50", 8), ("I10", 7), ("I639", 3),
    ("K35", 3), ("K80", 4), ("K297", 2),
    ("S72", 5), ("S060", 3), ("T84", 2),
    ("C34", 4), ("C50", 4), ("D12", 1),
    ("F10", 5), ("F32", 3), ("F03", 2),
    ("J18", 4), ("J44", 4),
    ("M16", 3), ("M54", 2),
    ("N39", 3), ("A09", 2), ("E11", 4), ("G40", 2),
    ("H25", 2), ("H66", 1), ("L40", 1), ("O80", 2),
    ("P07", 1), ("Q21", 1), ("R55", 2), ("Z380", 2),
    ("D50", 1), ("U69", 1),
)

DEFAULT_DEMOGRAPHICS: Tuple[Tuple[int, int, int], ...] = (
    (1925, 1944, 2),
    (1945, 1964, 3),
    (1965, 1984, 3),
    (1985, 2004, 2),
    (2005, 2015, 1),
)

DEFAULT_SEX_WEIGHTS: Tuple[Tuple[str, int], ...] = (("M", 47), ("F", 52), ("U", 1))

# Stay lengths: mode at 3 days, quick decay; home gaps: mode near 6 days
# with a heavy tail. Shape-matching only; no value claims.
_STAY_WEIGHTS = [0.35, 0.7, 1.0] + [pow(2.718, -(d - 3) / 5.0) for d in range(4, 61)]
_GAP_WEIGHTS = [pow((g + 1) / 7.0, 1.6) for g in range(0, 6)] + [
    pow(7.0 / (g + 1), 1.25) for g in range(6, 366)
]


def _cumulative(weights: List[float]) -> List[float]:
    total = 0.0
    out = []
    for w in weights:
        total += w
        out.append(total)
    return out


_STAY_CUM = _cumulative(_STAY_WEIGHTS)
_GAP_CUM = _cumulative(_GAP_WEIGHTS)
_DIAG_CUM = _cumulative([w for _, w in DIAGNOSES])
_DIAG_CODES = [c for c, _ in DIAGNOSES]


def _sample(rnd: Random, cum: List[float]) -> int:
    return bisect_left(cum, rnd.random() * cum[-1])


class ConfigError(ValueError):
    pass


@dataclass
class SynthConfig:
    seed: int = 0
    patients: int = 1000  # ordinary patients without planted patterns
    facilities: int = 50
    window: Window = DEFAULT_WINDOW
    # type label -> number of planted patterns (one patient each)
    plant_counts: Dict[str, int] = field(default_factory=dict)
    noise: bool = False  # extra random stays, incl. accidental overlaps
    states: Tuple[Tuple[str, int], ...] = (("SN", 6), ("TH", 3), ("BY", 1))
    demographics: Tuple[Tuple[int, int, int], ...] = DEFAULT_DEMOGRAPHICS
    sex_weights: Tuple[Tuple[str, int], ...] = DEFAULT_SEX_WEIGHTS

    def validate(self) -> None:
        span = self.window.end - self.window.start + 1
        if span < 120:
            raise ConfigError("window too small for planted patterns")
        if self.patients < 0 or self.facilities < 1:
            raise ConfigError("patients must be >= 0 and facilities >= 1")
        for label, count in self.plant_counts.items():
            if count < 0:
                raise ConfigError(f"negative plant count for {label}")
            m = _MULTI_LABEL.match(label)
            if m:
                if int(m.group(1)) < 3:
                    raise ConfigError("unknown_multiple requires n >= 3")
            elif label not in PAIR_LABELS:
                raise ConfigError(f"unknown overlap type label {label!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "SynthConfig":
        window = DEFAULT_WINDOW
        if "window" in raw:
            window = Window.from_iso(raw["window"][0], raw["window"][1])
        return cls(
            seed=raw.get("seed", 0),
            patients=raw.get("patients", 1000),
            facilities=raw.get("facilities", 50),
            window=window,
            plant_counts=dict(raw.get("plant_counts", {})),
            noise=raw.get("noise", False),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "patients": self.patients,
            "facilities": self.facilities,
            "window": [iso_of(self.window.start), iso_of(self.window.end)],
            "plant_counts": dict(sorted(self.plant_counts.items())),
            "noise": self.noise,
        }


@dataclass
class PlantedGroup:
    patient_id: str
    label: str
    # (facility_id, admission day, discharge day, diagnosis)
    members: List[Tuple[str, int, int, str]]
    code: Optional[str] = None  # four-digit code, two-record groups only
    direction: Optional[Tuple[str, str]] = None  # (src, dst) facility

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "kind": self.label,
            "members": [
                {
                    "facility_id": f,
                    "admission": iso_of(a),
                    "discharge": iso_of(d),
                    "diagnosis": icd,
                }
                for f, a, d, icd in self.members
            ],
            "pair_code": self.code,
            "direction": list(self.direction) if self.direction else None,
        }


class _Generator:
    def __init__(self, cfg: SynthConfig):
        cfg.validate()
        self.cfg = cfg
        self.rnd = Random(cfg.seed)
        self.facility_ids = [f"h{i + 1:04d}" for i in range(cfg.facilities)]
        # Zipf-like facility popularity so a handful of large units emerge.
        self.fac_cum = _cumulative(
            [1.0 / (i + 1) for i in range(cfg.facilities)]
        )
        self.state_cum = _cumulative([w for _, w in cfg.states])
        self.state_codes = [s for s, _ in cfg.states]
        self.demo_cum = _cumulative([w for *_, w in cfg.demographics])
        self.sex_cum = _cumulative([w for _, w in cfg.sex_weights])
        self.sex_codes = [s for s, _ in cfg.sex_weights]
        self.facility_state: Dict[str, str] = {
            fid: self.state_codes[_sample(self.rnd, self.state_cum)]
            for fid in self.facility_ids
        }

    # -- sampling helpers ------------------------------------------------
    def stay_len(self, minimum: int = 1) -> int:
        while True:
            length = _sample(self.rnd, _STAY_CUM) + 1
            if length >= minimum:
                return length

    def gap_len(self) -> int:
        return _sample(self.rnd, _GAP_CUM)

    def facility(self, exclude: Iterable[str] = ()) -> str:
        banned = set(exclude)
        while True:
            fid = self.facility_ids[_sample(self.rnd, self.fac_cum)]
            if fid not in banned:
                return fid

    def diagnosis(self, exclude: Iterable[str] = ()) -> str:
        banned = set(exclude)
        while True:
            code = _DIAG_CODES[_sample(self.rnd, _DIAG_CUM)]
            if code not in banned:
                return code

    def demographics(self) -> Tuple[str, int]:
        lo, hi, _ = self.cfg.demographics[_sample(self.rnd, self.demo_cum)]
        return self.sex_codes[_sample(self.rnd, self.sex_cum)], self.rnd.randint(lo, hi)

    # -- pattern templates ----------------------------------------------
    def plant(self, label: str, start: int) -> PlantedGroup:
        """Realize one pattern of the given type beginning near `start`.

        Returns the planted group; member order is generation order.
        """
        r = self.rnd
        m = _MULTI_LABEL.match(label)
        if m:
            return self._plant_multi(int(m.group(1)), start)
        fa = self.facility()
        da = self.diagnosis()
        if label == "standard_transfer":
            la, lb = self.stay_len(2), self.stay_len(2)
            fb = self.facility(exclude=[fa])
            a = (fa, start, start + la - 1, da)
            b = (fb, start + la - 1, start + la - 1 + lb - 1, self.diagnosis())
            direction = (fa, fb)
        elif label == "first_day_transfer":
            length = self.stay_len(2)
            fb = self.facility(exclude=[fa])
            a = (fa, start, start + length - 1, da)
            b = (fb, start, start, self.diagnosis())
            # Same admission; the one-day stay discharges first, so it is
            # the source under the tie rule.
            direction = (fb, fa)
        elif label == "last_day_transfer":
            length = self.stay_len(2)
            fb = self.facility(exclude=[fa])
            a = (fa, start, start + length - 1, da)
            b = (fb, start + length - 1, start + length - 1, self.diagnosis())
            direction = (fa, fb)
        elif label == "temporary_transfer":
            outer = self.stay_len(4)
            inner_start = start + r.randint(1, outer - 3)
            inner_end = r.randint(inner_start, start + outer - 2)
            fb = self.facility(exclude=[fa])
            a = (fa, start, start + outer - 1, da)
            b = (fb, inner_start, inner_end, self.diagnosis())
            direction = (fa, fb)
        elif label == "simultaneous_two_institutions":
            length = self.stay_len(1)
            fb = self.facility(exclude=[fa])
            a = (fa, start, start + length - 1, da)
            b = (fb, start, start + length - 1, self.diagnosis())
            direction = None
        elif label == "simultaneous_single_institution":
            length = self.stay_len(1)
            a = (fa, start, start + length - 1, da)
            # diagnosis must differ, otherwise the pair would be 1111
            b = (fa, start, start + length - 1, self.diagnosis(exclude=[da]))
            direction = None
        elif label == "two_admissions_single_institution":
            la = self.stay_len(2)
            offset = r.randint(1, la - 1)
            lb = self.stay_len(1)
            a = (fa, start, start + la - 1, da)
            b = (fa, start + offset, start + offset + lb - 1, self.diagnosis())
            direction = None
        elif label == "unknown_two_institutions":
            fb = self.facility(exclude=[fa])
            if r.random() < 0.5:
                # staggered: overlap of >= 2 days, no containment
                la = self.stay_len(3)
                offset = r.randint(1, la - 2)
                lb = (start + la - 1) - (start + offset) + 2 + self.stay_len(1)
                a = (fa, start, start + la - 1, da)
                b = (fb, start + offset, start + offset + lb - 1, self.diagnosis())
            else:
                # same admission, different lengths >= 2 (containment is
                # blocked by the equal admission dates)
                la = self.stay_len(2)
                lb = la + self.stay_len(1)
                if r.random() < 0.5:
                    la, lb = lb, la
                a = (fa, start, start + la - 1, da)
                b = (fb, start, start + lb - 1, self.diagnosis())
            direction = None
        else:
            raise ConfigError(f"unknown overlap type label {label!r}")
        group = PlantedGroup("", label, [a, b], direction=direction)
        group.code = _code_of(a, b)
        return group

    def _plant_multi(self, n: int, start: int) -> PlantedGroup:
        r = self.rnd
        length = max(self.stay_len(1), n + 4)
        common = start + length // 2  # day covered by every member
        members = [(self.facility(), start, start + length - 1, self.diagnosis())]
        used = {members[0][0]}
        for i in range(1, n):
            lo = r.randint(start + 1, common)
            hi = r.randint(common, start + length - 2)
            fid = self.facility(exclude=used)
            used.add(fid)
            members.append((fid, lo, hi, self.diagnosis()))
        return PlantedGroup("", f"unknown_multiple({n})", members)


def _code_of(
    a: Tuple[str, int, int, str], b: Tuple[str, int, int, str]
) -> str:
    return "".join(
        "1" if same else "0"
        for same in (a[0] == b[0], a[3] == b[3], a[1] == b[1], a[2] == b[2])
    )


def generate(cfg: SynthConfig, dataset_path: str, truth_path: str) -> dict:
    """Write the dataset file and ground-truth JSON; returns summary counts.

    Output is byte-identical for identical configs (single sequential RNG
    stream, rows grouped by patient and sorted by admission within one).
    """
    gen = _Generator(cfg)
    rnd = gen.rnd
    window = cfg.window
    span = window.end - window.start + 1
    margin = 70  # keeps patterns and trailing stays inside the window
    truth: List[PlantedGroup] = []
    records_written = 0
    iso_cache: Dict[int, str] = {}

    def iso(day: int) -> str:
        try:
            return iso_cache[day]
        except KeyError:
            text = iso_of(day)
            iso_cache[day] = text
            return text

    def write_rows(out, pid, sex, birth_year, rows):
        nonlocal records_written
        for fid, adm, dis, icd in sorted(rows, key=lambda t: (t[1], t[2], t[0])):
            out.write(
                f"{pid};{fid};{gen.facility_state[fid]};{iso(adm)};"
                f"{iso(dis)};{icd};{sex};{birth_year}\n"
            )
            records_written += 1

    def ordinary_rows(first_day: int, max_stays: int) -> List[tuple]:
        rows = []
        day = first_day
        for _ in range(max_stays):
            length = gen.stay_len()
            if day + length - 1 > window.end:
                break
            fid = gen.facility()
            rows.append((fid, day, day + length - 1, gen.diagnosis()))
            last_end = rows[-1][2]
            if cfg.noise and rnd.random() < 0.08:
                # accidental overlap stay; a different facility keeps the
                # pair from ever being a full-field duplicate (code 1111)
                prev = rows[-1]
                o_fid = gen.facility(exclude=[prev[0]])
                o_start = rnd.randint(prev[1], prev[2])
                o_len = gen.stay_len()
                if o_start + o_len - 1 <= window.end:
                    rows.append((o_fid, o_start, o_start + o_len - 1, gen.diagnosis()))
                    last_end = max(last_end, rows[-1][2])
            # next admission = last discharge + 1 + gap, so the sampled gap
            # is exactly the number of full days at home
            day = last_end + 1 + gen.gap_len()
            if day > window.end:
                break
        return rows

    plant_jobs: List[str] = []
    for label in sorted(cfg.plant_counts):
        plant_jobs.extend([label] * cfg.plant_counts[label])

    next_pid = 1
    with open(dataset_path, "w", encoding="utf-8") as out:
        out.write(HEADER_LINE + "\n")
        for _ in range(cfg.patients):
            pid = f"p{next_pid:07d}"
            next_pid += 1
            sex, birth_year = gen.demographics()
            n_stays = 1 + min(_sample(rnd, _STAY_CUM), 12)
            first = window.start + rnd.randint(0, max(span - margin, 1))
            rows = ordinary_rows(first, n_stays)
            if not rows:  # ran out of window; retry from the window start
                rows = ordinary_rows(window.start, n_stays)
            write_rows(out, pid, sex, birth_year, rows)
        for label in plant_jobs:
            pid = f"p{next_pid:07d}"
            next_pid += 1
            sex, birth_year = gen.demographics()
            start = window.start + rnd.randint(0, span - margin)
            group = gen.plant(label, start)
            group.patient_id = pid
            rows = list(group.members)
            pattern_lo = min(r[1] for r in rows)
            pattern_hi = max(r[2] for r in rows)
            # isolated extra stays: >= 2 empty days away from the pattern
            if rnd.random() < 0.5:
                tail = pattern_hi + 3 + gen.gap_len()
                extra = ordinary_rows(tail, rnd.randint(1, 3))
                rows.extend(e for e in extra if e[1] >= pattern_hi + 3)
            if pattern_lo - window.start > margin and rnd.random() < 0.3:
                length = gen.stay_len()
                lead_end = pattern_lo - 3
                lead_start = max(window.start, lead_end - length + 1)
                if lead_start <= lead_end:
                    rows.append(
                        (gen.facility(), lead_start, lead_end, gen.diagnosis())
                    )
            write_rows(out, pid, sex, birth_year, rows)
            truth.append(group)

    truth_doc = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "groups": [g.to_dict() for g in truth],
    }
    with open(truth_path, "w", encoding="utf-8") as out:
        json.dump(truth_doc, out, indent=2, sort_keys=True)
        out.write("\n")
    return {
        "records": records_written,
        "patients": next_pid - 1,
        "planted_groups": len(truth),
    }


# -- verification against ground truth ----------------------------------

GroupKey = Tuple[str, Tuple[Tuple[str, str, str, str], ...]]


def _truth_key(g: dict) -> GroupKey:
    members = tuple(
        sorted(
            (m["facility_id"], m["admission"], m["discharge"], m["diagnosis"])
            for m in g["members"]
        )
    )
    return (g["patient_id"], members)


def _detected_key(g: OverlapGroup) -> GroupKey:
    members = tuple(
        sorted(
            (m.facility_id, iso_of(m.admission), iso_of(m.discharge), m.diagnosis)
            for m in g.members
        )
    )
    return (g.patient_id, members)


@dataclass
class VerifyReport:
    planted: int = 0
    detected: int = 0
    missing: List[GroupKey] = field(default_factory=list)
    extra: List[GroupKey] = field(default_factory=list)
    mislabeled: List[Tuple[GroupKey, str, str]] = field(default_factory=list)
    per_type: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def empty(self) -> bool:
        return not (self.missing or self.extra or self.mislabeled)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "planted": self.planted,
            "detected": self.detected,
            "missing": [list(map(list, (k,))) for k in self.missing],
            "extra": [list(map(list, (k,))) for k in self.extra],
            "mislabeled": [
                {"group": list(key), "planted": want, "detected": got}
                for key, want, got in self.mislabeled
            ],
            "per_type": {
                label: {"planted": want, "detected": got}
                for label, (want, got) in sorted(self.per_type.items())
            },
            "pass": self.empty(),
        }


def verify(
    detected: Iterable[OverlapGroup],
    ground_truth: dict,
    allow_extra: bool = False,
) -> VerifyReport:
    """Diff detector output against the generator's ground truth.

    allow_extra tolerates detected groups beyond the planted ones (noise
    mode); planted groups must still all be found with matching labels.
    """
    report = VerifyReport()
    truth_by_key: Dict[GroupKey, str] = {}
    for g in ground_truth["groups"]:
        truth_by_key[_truth_key(g)] = g["kind"]
    report.planted = len(truth_by_key)

    detected_by_key: Dict[GroupKey, str] = {}
    for g in detected:
        detected_by_key[_detected_key(g)] = g.label
    report.detected = len(detected_by_key)

    per_type_want: Dict[str, int] = {}
    per_type_got: Dict[str, int] = {}
    for key, want in truth_by_key.items():
        per_type_want[want] = per_type_want.get(want, 0) + 1
        got = detected_by_key.get(key)
        if got is None:
            report.missing.append(key)
        elif got != want:
            report.mislabeled.append((key, want, got))
        else:
            per_type_got[want] = per_type_got.get(want, 0) + 1
    if not allow_extra:
        for key in detected_by_key:
            if key not in truth_by_key:
                report.extra.append(key)
    report.per_type = {
        label: (per_type_want.get(label, 0), per_type_got.get(label, 0))
        for label in set(per_type_want) | set(per_type_got)
    }
    return report
