"""Command-line driver: ingest, stats, overlaps, network, synth.

All reports are machine-readable (JSON/CSV, schema_version field) with a
short human summary on stdout. Exit codes: 0 ok, 1 validation failures
present under --strict (or a non-empty ground-truth diff), 2 fatal.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from collections import Counter
from typing import List, Optional

from . import cohort, facilities, icd, pipeline, records, synth
from .dates import iso_of, year_of
from .network import (
    DEFAULT_POLICY,
    POLICY_CHOICES,
    adjacency_dict,
    degree_summary,
    write_adjacency_json,
    write_edge_csv,
)
from .overlaps import classify_group, find_overlap_groups, top_pairs
from .records import IngestReport, State, Window

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_FATAL = 2


class CliError(Exception):
    pass


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="record file path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--window-start", default="2010-01-01")
    parser.add_argument("--window-end", default="2016-12-31")
    parser.add_argument(
        "--states",
        default=None,
        help="comma-separated state codes to keep (e.g. SN,TH); default all",
    )
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--strict",
        action="store_true",
        help="exit 1 when any row was rejected during ingestion",
    )
    parser.add_argument(
        "--grouped",
        action="store_true",
        help="input rows are contiguous per patient; enables streaming grouping",
    )


def _window(args) -> Window:
    return Window.from_iso(args.window_start, args.window_end)


def _state_filter(args) -> Optional[frozenset]:
    if args.states is None:
        return None
    wanted = set()
    for code in args.states.split(","):
        code = code.strip().upper()
        if not code:
            continue
        try:
            wanted.add(State(code))
        except ValueError:
            raise CliError(f"unknown state code {code!r}")
    return frozenset(wanted)


def _policy(args) -> frozenset:
    if args.policy is None:
        return DEFAULT_POLICY
    kinds = set()
    for label in args.policy.split(","):
        label = label.strip()
        if not label:
            continue
        if label not in POLICY_CHOICES:
            raise CliError(f"unknown policy type {label!r}")
        kinds.add(POLICY_CHOICES[label])
    return frozenset(kinds)


def _stream(args, report: IngestReport):
    window = _window(args)
    wanted = _state_filter(args)
    stream = records.iter_records(args.input, window, report)
    if wanted is None:
        return stream
    return (r for r in stream if r.state in wanted)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as out:
        json.dump(payload, out, indent=2, sort_keys=True)
        out.write("\n")


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _finish(args, report: IngestReport) -> int:
    rejected = report.total_rows - report.accepted
    if args.strict and rejected > 0:
        return EXIT_VALIDATION
    return EXIT_OK


# -- subcommands ---------------------------------------------------------

def cmd_ingest(args) -> int:
    out_dir = _ensure_out(args)
    report = IngestReport()
    for _ in _stream(args, report):
        pass
    _write_json(os.path.join(out_dir, "ingest_report.json"), report.to_dict())
    print(
        f"ingest: {report.accepted} accepted, "
        f"{report.total_rows - report.accepted} rejected, "
        f"{report.censored} censored"
    )
    return _finish(args, report)


def cmd_stats(args) -> int:
    out_dir = _ensure_out(args)
    window = _window(args)
    report = IngestReport()
    grouping = cohort.GroupingReport()

    stay_hist: Counter = Counter()
    gap_hist: Counter = Counter()
    pyramid = cohort.PopulationPyramid()
    chapter_counts: Counter = Counter()
    chapter_unknown = 0
    sizes_by_sex: dict = {}
    fac_stats: dict = {}

    def histories():
        return cohort.group_by_patient(
            _stream(args, report), grouping, assume_grouped=args.grouped
        )

    for h in histories():
        stay_hist.update(cohort.stay_durations(h, window))
        gap_hist.update(cohort.home_gaps(h))
        sizes_by_sex.setdefault(h.sex, []).append(len(h.stays))
        if h.sex is records.Sex.UNKNOWN:
            pyramid.unknown += 1
        else:
            pyramid.counts[(h.birth_year, h.sex)] += 1
        for r in h.stays:
            chapter = icd.chapter_of(r.diagnosis)
            if chapter is None:
                chapter_unknown += 1
            else:
                chapter_counts[chapter] += 1
            s = fac_stats.get(r.facility_id)
            if s is None:
                s = fac_stats[r.facility_id] = facilities.FacilityStats(r.facility_id)
            s.admissions += 1
            s.patients.add(r.patient_id)
            # per-year attribution by admission year
            y = year_of(r.admission)
            cell = s.per_year.get(y)
            if cell is None:
                cell = s.per_year[y] = [0, set()]
            cell[0] += 1
            cell[1].add(r.patient_id)

    stats_by_sex = {
        sex.value: cohort._stats_of(sizes).to_dict()
        for sex, sizes in sorted(sizes_by_sex.items(), key=lambda kv: kv[0].value)
    }
    all_sizes = [n for sizes in sizes_by_sex.values() for n in sizes]

    cohort_doc = {
        "schema_version": SCHEMA_VERSION,
        "window": [iso_of(window.start), iso_of(window.end)],
        "patients": grouping.patients,
        "stays": grouping.stays,
        "conflicting_demographics": grouping.conflicting_demographics,
        "admissions_per_person": {
            "by_sex": stats_by_sex,
            "overall": cohort._stats_of(all_sizes).to_dict() if all_sizes else None,
        },
        "stay_duration_histogram": {str(k): v for k, v in sorted(stay_hist.items())},
        "home_gap_histogram": {str(k): v for k, v in sorted(gap_hist.items())},
        "population_pyramid": [
            {"birth_year": y, "sex": s, "patients": n}
            for y, s, n in pyramid.to_rows()
        ],
        "population_pyramid_unknown": pyramid.unknown,
        "chapter_admissions": {str(k): v for k, v in sorted(chapter_counts.items())},
        "chapter_admissions_unknown": chapter_unknown,
        "mean_stay_days": (
            round(
                sum(k * v for k, v in stay_hist.items()) / sum(stay_hist.values()), 2
            )
            if stay_hist
            else None
        ),
        "mean_home_gap_days": (
            round(sum(k * v for k, v in gap_hist.items()) / sum(gap_hist.values()), 2)
            if gap_hist
            else None
        ),
    }
    _write_json(os.path.join(out_dir, "cohort.json"), cohort_doc)

    stats_list = [fac_stats[fid] for fid in sorted(fac_stats)]
    facilities_doc = {
        "schema_version": SCHEMA_VERSION,
        "facilities": len(stats_list),
        "buckets": {
            metric: {
                "total": facilities.bucketize(stats_list, metric).to_dict(),
                "per_year": {
                    str(year): hist.to_dict()
                    for year, hist in facilities.bucketize_per_year(
                        stats_list, metric
                    ).items()
                },
            }
            for metric in ("admissions", "patients")
        },
        "per_facility": [s.to_dict() for s in stats_list],
    }
    _write_json(os.path.join(out_dir, "facilities.json"), facilities_doc)

    # Daily census of the biggest facilities needs a second pass, now that
    # we know which ones they are.
    top = (
        facilities.top_k_facilities(stats_list, min(6, len(stats_list)))
        if stats_list
        else []
    )
    top_ids = {s.facility_id for s in top}
    series = {fid: [0] * (window.end - window.start + 2) for fid in top_ids}
    if top_ids:
        second = IngestReport()
        for r in _stream(args, second):
            diff = series.get(r.facility_id)
            if diff is None:
                continue
            lo = max(r.admission, window.start) - window.start
            hi = min(r.discharge, window.end) - window.start
            if hi >= lo:
                diff[lo] += 1
                diff[hi + 1] -= 1
    with open(
        os.path.join(out_dir, "census.csv"), "w", encoding="utf-8", newline=""
    ) as out:
        writer = csv.writer(out)
        writer.writerow(["facility_id", "date", "patients"])
        for fid in sorted(top_ids):
            depth = 0
            diff = series[fid]
            for i in range(window.end - window.start + 1):
                depth += diff[i]
                writer.writerow([fid, iso_of(window.start + i), depth])

    _write_json(os.path.join(out_dir, "ingest_report.json"), report.to_dict())
    print(
        f"stats: {grouping.patients} patients, {grouping.stays} stays, "
        f"{len(stats_list)} facilities"
    )
    return _finish(args, report)


def _run_summary(args, policy, chapter_equality=False, audit=False):
    """Run the overlap pipeline; grouped multi-thread inputs are sharded
    by byte range so workers parse independently."""
    if args.threads > 1 and args.grouped:
        return pipeline.run_pipeline_on_file(
            args.input,
            _window(args),
            _state_filter(args),
            policy=policy,
            threads=args.threads,
            chapter_equality=chapter_equality,
            audit=audit,
        )
    report = IngestReport()
    grouping = cohort.GroupingReport()
    histories = cohort.group_by_patient(
        _stream(args, report), grouping, assume_grouped=args.grouped
    )
    summary = pipeline.run_pipeline(
        histories,
        policy=policy,
        threads=args.threads,
        chapter_equality=chapter_equality,
        audit=audit,
    )
    return summary, report, grouping


def cmd_overlaps(args) -> int:
    out_dir = _ensure_out(args)
    summary, report, grouping = _run_summary(
        args,
        policy=_policy(args),
        chapter_equality=args.chapter_equality,
        audit=args.audit is not None,
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "patients": grouping.patients,
        "records": grouping.stays,
        "groups": summary.groups,
        "types": {
            label: {
                "count": n,
                "percent": round(100.0 * n / summary.groups, 1),
            }
            for label, n in sorted(summary.type_counts.items())
        }
        if summary.groups
        else {},
        "pair_codes": {
            code: n for code, n in sorted(summary.code_counts.items())
        },
        "chapter_pairs_top": {
            code: [
                {"pair": list(pair), "count": n}
                for pair, n in top_pairs(tally, args.top_k)
            ]
            for code, tally in sorted(summary.chapter_pairs.items())
        },
        "overlap_length_histogram": {
            str(k): v for k, v in sorted(summary.length_hist.items())
        },
        "chain_groups_multiplicity_2": summary.chain_groups,
        "chapter_pairs_excluded_unknown_codes": summary.excluded_unknown_codes,
    }
    rc = EXIT_OK
    if args.verify_truth:
        with open(args.verify_truth, "r", encoding="utf-8") as fh:
            truth = json.load(fh)
        # verification needs the concrete groups; rerun detection on a
        # second pass collecting them (verification-scale inputs only)
        report2 = IngestReport()
        detected = []
        for h in cohort.group_by_patient(
            _stream(args, report2), assume_grouped=args.grouped
        ):
            for g in find_overlap_groups(h):
                detected.append(classify_group(g))
        vr = synth.verify(detected, truth, allow_extra=args.allow_extra)
        doc["verification"] = vr.to_dict()
        if not vr.empty():
            rc = EXIT_VALIDATION
    _write_json(os.path.join(out_dir, "overlap_report.json"), doc)
    if args.audit is not None:
        with open(args.audit, "w", encoding="utf-8", newline="") as out:
            writer = csv.writer(out)
            writer.writerow(["patient_id", "members", "type", "pair_code"])
            writer.writerows(sorted(summary.audit_rows))
    print(f"overlaps: {summary.groups} groups among {grouping.patients} patients")
    ingest_rc = _finish(args, report)
    return max(rc, ingest_rc)


def cmd_network(args) -> int:
    out_dir = _ensure_out(args)
    summary, report, grouping = _run_summary(args, policy=_policy(args))
    net = summary.network
    write_edge_csv(net, os.path.join(out_dir, "edges.csv"))
    write_adjacency_json(net, os.path.join(out_dir, "adjacency.json"))
    degrees = degree_summary(net)
    _write_json(
        os.path.join(out_dir, "degrees.json"),
        {
            "schema_version": SCHEMA_VERSION,
            "nodes": {
                fid: {
                    "in_degree": d.in_degree,
                    "out_degree": d.out_degree,
                    "in_strength": d.in_strength,
                    "out_strength": d.out_strength,
                }
                for fid, d in sorted(degrees.items())
            },
        },
    )
    print(
        f"network: {len(net.nodes)} facilities, {len(net.edges)} edges, "
        f"{net.events} transfer events"
    )
    return _finish(args, report)


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = synth.SynthConfig.from_dict(json.load(fh))
    else:
        cfg = synth.SynthConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.patients is not None:
        cfg.patients = args.patients
    dataset_path = os.path.join(args.out, "dataset.csv")
    truth_path = os.path.join(args.out, "ground_truth.json")
    try:
        info = synth.generate(cfg, dataset_path, truth_path)
    except synth.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    print(
        f"synth: {info['records']} records, {info['patients']} patients, "
        f"{info['planted_groups']} planted groups -> {dataset_path}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hospnet",
        description="Hospitalization record analytics and transfer-network toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a record file")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="cohort and facility statistics")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("overlaps", help="detect and classify overlap groups")
    _add_common(p)
    p.add_argument("--policy", default=None, help="comma-separated transfer types")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument(
        "--chapter-equality",
        action="store_true",
        help="pair-code diagnosis bit compares chapters instead of full codes",
    )
    p.add_argument("--audit", default=None, help="write per-group audit CSV here")
    p.add_argument("--verify-truth", default=None, help="ground-truth JSON to diff")
    p.add_argument(
        "--allow-extra",
        action="store_true",
        help="tolerate non-planted groups during verification (noise mode)",
    )
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("network", help="derive the transfer network")
    _add_common(p)
    p.add_argument("--policy", default=None, help="comma-separated transfer types")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", default=None, help="generator config JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--patients", type=int, default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
