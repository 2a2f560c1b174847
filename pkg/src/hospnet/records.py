"""Hospitalization record table: parsing, validation, streaming ingestion.

Input format (fixed, documented): semicolon-delimited UTF-8 text with a
header row and ISO-8601 dates::

    patient_id;facility_id;state;admission;discharge;diagnosis;sex;birth_year
    p1;h47;SN;2012-08-13;2012-08-21;I21;M;1950

Stay periods are closed day intervals, both endpoints inclusive, so a
one-day stay has admission == discharge and duration 1.

Bad rows are counted and skipped, never abort a run; the IngestReport
carries the counts.
"""

from __future__ import annotations

import enum
import json
import sys
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, TextIO, Union

from .dates import day_of, iso_of, make_day

SCHEMA_VERSION = 1

FIELD_NAMES = (
    "patient_id",
    "facility_id",
    "state",
    "admission",
    "discharge",
    "diagnosis",
    "sex",
    "birth_year",
)
HEADER_LINE = ";".join(FIELD_NAMES)


class State(enum.Enum):
    """German federal state of the healthcare facility."""

    BADEN_WUERTTEMBERG = "BW"
    BAVARIA = "BY"
    BERLIN = "BE"
    BRANDENBURG = "BB"
    BREMEN = "HB"
    HAMBURG = "HH"
    HESSE = "HE"
    MECKLENBURG_VORPOMMERN = "MV"
    LOWER_SAXONY = "NI"
    NORTH_RHINE_WESTPHALIA = "NW"
    RHINELAND_PALATINATE = "RP"
    SAARLAND = "SL"
    SAXONY = "SN"
    SAXONY_ANHALT = "ST"
    SCHLESWIG_HOLSTEIN = "SH"
    THURINGIA = "TH"
    UNKNOWN = "??"


_STATE_BY_CODE = {s.value: s for s in State}

ALL_KNOWN_STATES = frozenset(s for s in State if s is not State.UNKNOWN)


class Sex(enum.Enum):
    MALE = "M"
    FEMALE = "F"
    UNKNOWN = "U"


_SEX_BY_CODE = {"M": Sex.MALE, "F": Sex.FEMALE}

BIRTH_YEAR_MIN = 1890
BIRTH_YEAR_MAX = 2100


class ParseError(ValueError):
    """A row that cannot be turned into a Record; carries the row index."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


class ValidationKind(enum.Enum):
    INVERTED_INTERVAL = "inverted_interval"
    OUT_OF_WINDOW = "out_of_window"


class ValidationError(ValueError):
    def __init__(self, kind: ValidationKind, message: str):
        self.kind = kind
        super().__init__(message)


class Record(NamedTuple):
    patient_id: str
    facility_id: str
    state: State
    admission: int  # day number
    discharge: int  # day number
    diagnosis: str  # normalized ICD-10-GM code text
    sex: Sex
    birth_year: int


class ValidatedRecord(NamedTuple):
    patient_id: str
    facility_id: str
    state: State
    admission: int
    discharge: int
    diagnosis: str
    sex: Sex
    birth_year: int
    censored: bool  # discharge exceeds the observation window end

    @property
    def duration_days(self) -> int:
        return self.discharge - self.admission + 1

    def effective_discharge(self, window: "Window") -> int:
        return min(self.discharge, window.end)


@dataclass(frozen=True)
class Window:
    """Closed observation window in day numbers."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("window start after end")

    @classmethod
    def from_iso(cls, start: str, end: str) -> "Window":
        return cls(day_of(start), day_of(end))

    def contains(self, day: int) -> bool:
        return self.start <= day <= self.end


# Observation period of a typical seven-year extract; overridable everywhere.
DEFAULT_WINDOW = Window(make_day(2010, 1, 1), make_day(2016, 12, 31))


@dataclass
class IngestReport:
    accepted: int = 0
    rejected_parse: int = 0
    rejected_inverted: int = 0
    rejected_out_of_window: int = 0
    censored: int = 0
    unknown_state: int = 0

    @property
    def total_rows(self) -> int:
        return (
            self.accepted
            + self.rejected_parse
            + self.rejected_inverted
            + self.rejected_out_of_window
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "total_rows": self.total_rows,
            "accepted": self.accepted,
            "rejected": {
                "parse_error": self.rejected_parse,
                "inverted_interval": self.rejected_inverted,
                "out_of_window": self.rejected_out_of_window,
            },
            "censored": self.censored,
            "unknown_state": self.unknown_state,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class Dataset:
    """A validated record collection plus its observation window."""

    records: list  # of ValidatedRecord
    window: Window

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def parse_record(line: str, row: Optional[int] = None,
                 report: Optional[IngestReport] = None) -> Record:
    """Parse one delimited row into a Record.

    Unrecognized state text maps to State.UNKNOWN; when a report is given
    its unknown_state counter is incremented for such rows.
    """
    parts = line.rstrip("\n").split(";")
    if len(parts) != 8:
        raise ParseError(f"expected 8 fields, got {len(parts)}", row)
    pid, fid, state_text, adm_text, dis_text, icd, sex_text, by_text = parts
    if not pid or not fid:
        raise ParseError("empty patient or facility id", row)
    state = _STATE_BY_CODE.get(state_text)
    if state is None:
        state = State.UNKNOWN
        if report is not None:
            report.unknown_state += 1
    try:
        admission = day_of(adm_text)
        discharge = day_of(dis_text)
    except ValueError as exc:
        raise ParseError(f"bad date: {exc}", row) from None
    try:
        birth_year = int(by_text)
    except ValueError:
        raise ParseError(f"non-integer birth_year {by_text!r}", row) from None
    if not (BIRTH_YEAR_MIN <= birth_year <= BIRTH_YEAR_MAX):
        raise ParseError(f"birth_year {birth_year} out of range", row)
    return Record(
        patient_id=sys.intern(pid),
        facility_id=sys.intern(fid),
        state=state,
        admission=admission,
        discharge=discharge,
        diagnosis=sys.intern(icd),
        sex=_SEX_BY_CODE.get(sex_text, Sex.UNKNOWN),
        birth_year=birth_year,
    )


def format_record(r: Union[Record, ValidatedRecord]) -> str:
    """Inverse of parse_record for valid records (round-trip safe)."""
    return ";".join(
        (
            r.patient_id,
            r.facility_id,
            r.state.value,
            iso_of(r.admission),
            iso_of(r.discharge),
            r.diagnosis,
            r.sex.value,
            str(r.birth_year),
        )
    )


def validate(r: Record, window: Window = DEFAULT_WINDOW) -> ValidatedRecord:
    """Accept a record iff its interval is well-formed and starts in-window.

    A discharge past the window end is allowed and flagged as censored;
    duration statistics truncate such stays at the window end.
    """
    if r.admission > r.discharge:
        raise ValidationError(
            ValidationKind.INVERTED_INTERVAL,
            f"admission {iso_of(r.admission)} after discharge {iso_of(r.discharge)}",
        )
    if not window.contains(r.admission):
        raise ValidationError(
            ValidationKind.OUT_OF_WINDOW,
            f"admission {iso_of(r.admission)} outside window",
        )
    return ValidatedRecord(*r, censored=r.discharge > window.end)


def iter_records(
    source: Union[str, TextIO],
    window: Window = DEFAULT_WINDOW,
    report: Optional[IngestReport] = None,
) -> Iterator[ValidatedRecord]:
    """Stream validated records from a file path or open text handle.

    Individual bad rows are counted in the report and skipped. Memory use
    is bounded by one row at a time.
    """
    if report is None:
        report = IngestReport()
    own = isinstance(source, str)
    handle = open(source, "r", encoding="utf-8") if own else source
    try:
        first = True
        for row, line in enumerate(handle):
            if first:
                first = False
                if line.rstrip("\n") == HEADER_LINE:
                    continue
            if not line.strip():
                continue
            try:
                rec = parse_record(line, row=row, report=report)
            except ParseError:
                report.rejected_parse += 1
                continue
            try:
                vrec = validate(rec, window)
            except ValidationError as exc:
                if exc.kind is ValidationKind.INVERTED_INTERVAL:
                    report.rejected_inverted += 1
                else:
                    report.rejected_out_of_window += 1
                continue
            report.accepted += 1
            if vrec.censored:
                report.censored += 1
            yield vrec
    finally:
        if own:
            handle.close()


def load_dataset(
    source: Union[str, TextIO],
    window: Window = DEFAULT_WINDOW,
) -> tuple[Dataset, IngestReport]:
    """Materialize a whole file. For multi-million-row inputs prefer
    iter_records and streaming consumers."""
    report = IngestReport()
    records = list(iter_records(source, window, report))
    return Dataset(records, window), report


def filter_by_state(d: Dataset, states: Iterable[State]) -> Dataset:
    """Keep exactly the records whose facility state is in `states`."""
    wanted = frozenset(states)
    return Dataset([r for r in d.records if r.state in wanted], d.window)


def write_records(path: str, records: Iterable[Union[Record, ValidatedRecord]]) -> int:
    """Write records in the canonical file format; returns the row count."""
    n = 0
    with open(path, "w", encoding="utf-8") as out:
        out.write(HEADER_LINE + "\n")
        for r in records:
            out.write(format_record(r) + "\n")
            n += 1
    return n
