"""Static figure rendering for the hospnet CLI reports.

Every figure reads one of the machine-readable outputs (cohort.json,
facilities.json, census.csv, overlap_report.json) and writes an image
file. Inputs are never modified, so re-rendering is idempotent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SUPPORTED_SCHEMA = 1

FIGURE_KINDS = ("pyramid", "buckets", "durations", "census", "overlap_lengths")

# Two-series convention: the unfiltered cohort in blue, the regional
# subset in red.
SERIES_COLORS = ("tab:blue", "tab:red")


class SchemaError(ValueError):
    """Input file missing or carrying an unsupported schema_version."""


@dataclass
class FigureSpec:
    kind: str
    inputs: List[str]
    output: str
    labels: List[str] = field(default_factory=list)
    title: Optional[str] = None


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaError(
            f"{path}: schema_version {version!r}, supported {SUPPORTED_SCHEMA}"
        )
    return doc


def _label(spec: FigureSpec, index: int, fallback: str) -> str:
    if index < len(spec.labels):
        return spec.labels[index]
    return fallback


def _require_inputs(spec: FigureSpec, low: int, high: int) -> None:
    if not (low <= len(spec.inputs) <= high):
        raise SchemaError(
            f"{spec.kind}: expected {low}"
            + (f"-{high}" if high != low else "")
            + f" input file(s), got {len(spec.inputs)}"
        )


def _pyramid(spec: FigureSpec, ax) -> None:
    doc = _load_json(spec.inputs[0])
    male: Dict[int, int] = {}
    female: Dict[int, int] = {}
    for row in doc["population_pyramid"]:
        side = male if row["sex"] == "M" else female
        side[row["birth_year"]] = side.get(row["birth_year"], 0) + row["patients"]
    years = sorted(set(male) | set(female))
    ax.barh(
        years, [-male.get(y, 0) for y in years], color=SERIES_COLORS[0],
        label="male",
    )
    ax.barh(
        years, [female.get(y, 0) for y in years], color=SERIES_COLORS[1],
        label="female",
    )
    ax.set_xlabel("patients (male left, female right)")
    ax.set_ylabel("birth year")
    ax.legend()


def _buckets(spec: FigureSpec, ax) -> None:
    doc = _load_json(spec.inputs[0])
    total = doc["buckets"]["admissions"]["total"]["buckets"]
    labels = [
        f"{b['lo']}+" if b["hi"] is None else f"{b['lo']}-{b['hi']}"
        for b in total
    ]
    ax.bar(labels, [b["facilities"] for b in total], color=SERIES_COLORS[0])
    # facility counts span several orders of magnitude
    ax.set_yscale("log")
    ax.set_xlabel("admissions per facility")
    ax.set_ylabel("facilities")


def _durations(spec: FigureSpec, ax) -> None:
    defaults = ("all facilities", "selected states")
    for i, path in enumerate(spec.inputs):
        doc = _load_json(path)
        hist = doc["stay_duration_histogram"]
        days = sorted(int(k) for k in hist)
        ax.plot(
            days,
            [hist[str(d)] for d in days],
            color=SERIES_COLORS[i],
            marker=".",
            label=_label(spec, i, defaults[i]),
        )
    ax.set_xlabel("stay duration (days)")
    ax.set_ylabel("stays")
    ax.legend()


def _read_census(path: str) -> Dict[str, List]:
    series: Dict[str, List] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["facility_id", "date", "patients"]:
            raise SchemaError(f"{path}: unexpected census columns")
        for row in reader:
            series.setdefault(row["facility_id"], []).append(
                (row["date"], int(row["patients"]))
            )
    return series


def _census(spec: FigureSpec, fig) -> None:
    series = _read_census(spec.inputs[0])
    if not series:
        raise SchemaError(f"{spec.inputs[0]}: no census rows")
    ids = sorted(series)[:6]
    rows = 2 if len(ids) > 3 else 1
    cols = min(len(ids), 3)
    for i, fid in enumerate(ids):
        ax = fig.add_subplot(rows, cols, i + 1)
        points = series[fid]
        ax.plot(range(len(points)), [n for _, n in points],
                color=SERIES_COLORS[0], linewidth=0.8)
        ax.set_title(fid)
        ax.set_xlabel(f"days since {points[0][0]}")
        ax.set_ylabel("patients")


def _overlap_lengths(spec: FigureSpec, ax) -> None:
    doc = _load_json(spec.inputs[0])
    hist = doc["overlap_length_histogram"]
    days = sorted(int(k) for k in hist)
    ax.bar(days, [hist[str(d)] for d in days], color=SERIES_COLORS[0])
    ax.set_xlabel("overlap length (days)")
    ax.set_ylabel("record pairs")


def render(spec: FigureSpec):
    """Render one figure and save it to spec.output.

    Returns the matplotlib Figure (useful for inspection in tests).
    """
    if spec.kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}")
    _require_inputs(spec, 1, 2 if spec.kind == "durations" else 1)

    fig = plt.figure(figsize=(10, 6) if spec.kind == "census" else (7, 5))
    if spec.kind == "census":
        _census(spec, fig)
    else:
        ax = fig.add_subplot(1, 1, 1)
        {
            "pyramid": _pyramid,
            "buckets": _buckets,
            "durations": _durations,
            "overlap_lengths": _overlap_lengths,
        }[spec.kind](spec, ax)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
    return fig
