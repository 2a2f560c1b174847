"""Streaming overlap/network pipeline over per-patient histories.

Histories are independent units of work, and every aggregate here is a
commutative counter merge, so batches can be processed by a process pool
and merged in submission order with results identical to a sequential
run.
"""

from __future__ import annotations

import io
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from .cohort import GroupingReport, PatientHistory, group_by_patient
from .dates import iso_of
from .network import TransferNetwork, DEFAULT_POLICY
from .records import IngestReport, State, Window, iter_records
from .overlaps import (
    OverlapGroup,
    OverlapKind,
    chapter_pair_tally,
    classify_group,
    find_overlap_groups,
    overlap_length,
    pair_code,
)

BATCH_SIZE = 20_000


@dataclass
class OverlapSummary:
    groups: int = 0
    type_counts: Counter = field(default_factory=Counter)  # label -> n
    code_counts: Counter = field(default_factory=Counter)  # '0100' -> n
    chapter_pairs: Dict[str, Counter] = field(default_factory=dict)
    length_hist: Counter = field(default_factory=Counter)
    chain_groups: int = 0  # 3+ records but per-day multiplicity only 2
    excluded_unknown_codes: int = 0
    network: TransferNetwork = field(default_factory=TransferNetwork)
    audit_rows: List[Tuple[str, str, str, str]] = field(default_factory=list)

    def merge(self, other: "OverlapSummary") -> None:
        self.groups += other.groups
        self.type_counts.update(other.type_counts)
        self.code_counts.update(other.code_counts)
        for code, tally in other.chapter_pairs.items():
            mine = self.chapter_pairs.get(code)
            if mine is None:
                self.chapter_pairs[code] = Counter(tally)
            else:
                mine.update(tally)
        self.length_hist.update(other.length_hist)
        self.chain_groups += other.chain_groups
        self.excluded_unknown_codes += other.excluded_unknown_codes
        self.network.merge(other.network)
        self.audit_rows.extend(other.audit_rows)


def _audit_row(g: OverlapGroup) -> Tuple[str, str, str, str]:
    members = " ".join(
        f"{m.facility_id}:{iso_of(m.admission)}..{iso_of(m.discharge)}"
        for m in g.members
    )
    code = pair_code(g.members[0], g.members[1]) if len(g.members) == 2 else ""
    return (g.patient_id, members, g.label, code)


def analyze_histories(
    histories: Iterable[PatientHistory],
    policy=DEFAULT_POLICY,
    chapter_equality: bool = False,
    audit: bool = False,
) -> OverlapSummary:
    """Detect, classify, and aggregate overlap groups for a set of patients."""
    s = OverlapSummary(network=TransferNetwork(policy=policy))
    for h in histories:
        for g in find_overlap_groups(h):
            classify_group(g)
            s.groups += 1
            s.type_counts[g.label] += 1
            if g.kind is OverlapKind.UNKNOWN_MULTIPLE and g.multiplicity == 2:
                s.chain_groups += 1
            if len(g.members) == 2:
                a, b = g.members
                s.code_counts[pair_code(a, b, chapter_equality=False)] += 1
                s.length_hist[overlap_length(a, b)] += 1
                tallies, excluded = chapter_pair_tally(
                    [g], chapter_equality=chapter_equality
                )
                s.excluded_unknown_codes += excluded
                for code, tally in tallies.items():
                    s.chapter_pairs.setdefault(code, Counter()).update(tally)
                if g.kind in policy:
                    _add_network_event(s.network, g)
            if audit:
                s.audit_rows.append(_audit_row(g))
    return s


def _add_network_event(net: TransferNetwork, g: OverlapGroup) -> None:
    from .network import _ordered_pair

    src, dst = _ordered_pair(g.members[0], g.members[1])
    if g.kind is OverlapKind.TEMPORARY_TRANSFER:
        net.add_event(src.facility_id, dst.facility_id, g.kind)
        net.add_event(dst.facility_id, src.facility_id, g.kind)
    else:
        net.add_event(src.facility_id, dst.facility_id, g.kind)


def _worker(args) -> OverlapSummary:
    batch, policy_labels, chapter_equality, audit = args
    policy = frozenset(OverlapKind(label) for label in policy_labels)
    return analyze_histories(
        batch, policy=policy, chapter_equality=chapter_equality, audit=audit
    )


def _batches(histories: Iterable[PatientHistory], size: int) -> Iterator[list]:
    batch: list = []
    for h in histories:
        batch.append(h)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def run_pipeline(
    histories: Iterable[PatientHistory],
    policy=DEFAULT_POLICY,
    threads: int = 1,
    chapter_equality: bool = False,
    audit: bool = False,
) -> OverlapSummary:
    """Sequential or process-parallel analysis with deterministic merge."""
    if threads <= 1:
        return analyze_histories(
            histories, policy=policy, chapter_equality=chapter_equality, audit=audit
        )
    policy_labels = sorted(k.value for k in policy)
    total = OverlapSummary(network=TransferNetwork(policy=policy))
    jobs = (
        (batch, policy_labels, chapter_equality, audit)
        for batch in _batches(histories, BATCH_SIZE)
    )
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for result in pool.map(_worker, jobs):
            total.merge(result)
    return total


# -- file-sharded parallelism --------------------------------------------
#
# When the input file keeps each patient's rows contiguous, it can be cut
# into byte ranges at patient boundaries and every worker parses its own
# slice. That parallelizes parsing as well, instead of serializing parsed
# records from the parent to the pool.

def _patient_boundary(handle, target: int) -> int:
    """Byte offset of the first patient-run start strictly after `target`.

    The line containing `target` and the rest of its patient run belong to
    the preceding shard.
    """
    handle.seek(target)
    handle.readline()  # rest of a possibly partial line
    pos = handle.tell()
    line = handle.readline()
    if not line:
        return pos
    pid = line.split(b";", 1)[0]
    while True:
        pos = handle.tell()
        line = handle.readline()
        if not line or line.split(b";", 1)[0] != pid:
            return pos


def _shard_offsets(path: str, shards: int) -> List[int]:
    size = os.path.getsize(path)
    offsets = [0]
    with open(path, "rb") as fh:
        for i in range(1, shards):
            cut = _patient_boundary(fh, size * i // shards)
            if offsets[-1] < cut < size:
                offsets.append(cut)
    offsets.append(size)
    return offsets


def _file_worker(args) -> Tuple[OverlapSummary, IngestReport, GroupingReport]:
    (
        path,
        start,
        end,
        window_days,
        state_codes,
        policy_labels,
        chapter_equality,
        audit,
    ) = args
    window = Window(*window_days)
    wanted = (
        None
        if state_codes is None
        else frozenset(State(code) for code in state_codes)
    )
    report = IngestReport()
    grouping = GroupingReport()
    with open(path, "rb") as fh:
        fh.seek(start)
        text = fh.read(end - start).decode("utf-8")
    stream = iter_records(io.StringIO(text), window, report)
    if wanted is not None:
        stream = (r for r in stream if r.state in wanted)
    policy = frozenset(OverlapKind(label) for label in policy_labels)
    summary = analyze_histories(
        group_by_patient(stream, grouping, assume_grouped=True),
        policy=policy,
        chapter_equality=chapter_equality,
        audit=audit,
    )
    return summary, report, grouping


def run_pipeline_on_file(
    path: str,
    window: Window,
    states: Optional[FrozenSet[State]],
    policy=DEFAULT_POLICY,
    threads: int = 2,
    chapter_equality: bool = False,
    audit: bool = False,
) -> Tuple[OverlapSummary, IngestReport, GroupingReport]:
    """Parallel analysis of a file whose rows are contiguous per patient.

    Results are identical to the sequential path: shards follow file
    order and every aggregate is an order-preserving counter merge.
    """
    offsets = _shard_offsets(path, threads * 4)
    state_codes = None if states is None else sorted(s.value for s in states)
    policy_labels = sorted(k.value for k in policy)
    jobs = [
        (path, lo, hi, (window.start, window.end), state_codes,
         policy_labels, chapter_equality, audit)
        for lo, hi in zip(offsets, offsets[1:])
    ]
    total = OverlapSummary(network=TransferNetwork(policy=policy))
    report = IngestReport()
    grouping = GroupingReport()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for summary, part_report, part_grouping in pool.map(_file_worker, jobs):
            total.merge(summary)
            report.accepted += part_report.accepted
            report.rejected_parse += part_report.rejected_parse
            report.rejected_inverted += part_report.rejected_inverted
            report.rejected_out_of_window += part_report.rejected_out_of_window
            report.censored += part_report.censored
            report.unknown_state += part_report.unknown_state
            grouping.patients += part_grouping.patients
            grouping.stays += part_grouping.stays
            grouping.conflicting_demographics += (
                part_grouping.conflicting_demographics
            )
    return total, report, grouping
