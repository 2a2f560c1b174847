import json
import os

import pytest

from hospnet_plots import FIGURE_KINDS, FigureSpec, SchemaError, render
from hospnet_plots.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")

INPUTS = {
    "pyramid": ["cohort.json"],
    "buckets": ["facilities.json"],
    "durations": ["cohort.json"],
    "census": ["census.csv"],
    "overlap_lengths": ["overlap_report.json"],
}


def spec_for(kind, tmp_path, inputs=None):
    names = inputs or INPUTS[kind]
    return FigureSpec(
        kind=kind,
        inputs=[os.path.join(DATA, n) for n in names],
        output=str(tmp_path / f"{kind}.png"),
    )


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_every_kind_renders_nonempty_image(kind, tmp_path):
    spec = spec_for(kind, tmp_path)
    render(spec)
    assert os.path.getsize(spec.output) > 0


def test_durations_two_series_has_two_legend_entries(tmp_path):
    spec = spec_for(
        "durations", tmp_path, ["cohort.json", "cohort_thuringia.json"]
    )
    fig = render(spec)
    legend = fig.axes[0].get_legend()
    assert len(legend.get_texts()) == 2
    assert os.path.getsize(spec.output) > 0


def test_census_renders_six_panels(tmp_path):
    fig = render(spec_for("census", tmp_path))
    assert len(fig.axes) == 6


def test_rerender_is_idempotent_and_leaves_input_untouched(tmp_path):
    src = os.path.join(DATA, "cohort.json")
    before = open(src, "rb").read()
    spec = spec_for("pyramid", tmp_path)
    render(spec)
    first = open(spec.output, "rb").read()
    render(spec)
    assert open(spec.output, "rb").read() == first
    assert open(src, "rb").read() == before


def test_schema_mismatch_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    doc = json.load(open(os.path.join(DATA, "cohort.json")))
    doc["schema_version"] = 99
    bad.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        render(FigureSpec("pyramid", [str(bad)], str(tmp_path / "x.png")))


def test_cli_renders_and_reports_errors(tmp_path):
    out = str(tmp_path / "fig.png")
    rc = main(
        ["durations", "--input", os.path.join(DATA, "cohort.json"),
         "--input", os.path.join(DATA, "cohort_thuringia.json"),
         "--out", out, "--label", "all", "--label", "Thuringia"]
    )
    assert rc == 0
    assert os.path.getsize(out) > 0
    assert main(["pyramid", "--input", "/nonexistent.json", "--out", out]) == 2


def test_smoke_suite_acceptance(tmp_path):
    """One figure per kind from the committed golden reports, plus the
    two-legend duration overlay. Prints a single PASS/FAIL line."""
    try:
        for kind in FIGURE_KINDS:
            spec = spec_for(kind, tmp_path)
            render(spec)
            assert os.path.getsize(spec.output) > 0
        two = spec_for(
            "durations", tmp_path, ["cohort.json", "cohort_thuringia.json"]
        )
        fig = render(two)
        assert len(fig.axes[0].get_legend().get_texts()) == 2
    except BaseException:
        print("FAIL plot smoke suite (5 kinds, two-legend overlay)")
        raise
    print("PASS plot smoke suite (5 kinds, two-legend overlay)")
