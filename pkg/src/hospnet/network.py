"""Weighted directed inter-facility transfer network from classified overlaps.

Direction convention: the stay admitted earlier is the source; on equal
admissions the stay discharged earlier is the source (the patient left it
first); a remaining tie falls back to facility id order for determinism.
Temporary transfers, when enabled, count as two directed events: outward
to the contained stay's facility and back.
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .overlaps import OverlapGroup, OverlapKind
from .records import ValidatedRecord

DEFAULT_POLICY: FrozenSet[OverlapKind] = frozenset(
    {
        OverlapKind.STANDARD_TRANSFER,
        OverlapKind.FIRST_DAY_TRANSFER,
        OverlapKind.LAST_DAY_TRANSFER,
    }
)

POLICY_CHOICES = {
    "standard_transfer": OverlapKind.STANDARD_TRANSFER,
    "first_day_transfer": OverlapKind.FIRST_DAY_TRANSFER,
    "last_day_transfer": OverlapKind.LAST_DAY_TRANSFER,
    "temporary_transfer": OverlapKind.TEMPORARY_TRANSFER,
    "unknown_two_institutions": OverlapKind.UNKNOWN_TWO_INSTITUTIONS,
}


@dataclass
class TransferNetwork:
    # (src, dst) -> per-kind event counts
    edges: Dict[Tuple[str, str], Counter] = field(default_factory=dict)
    policy: FrozenSet[OverlapKind] = DEFAULT_POLICY
    events: int = 0

    def add_event(self, src: str, dst: str, kind: OverlapKind) -> None:
        counter = self.edges.get((src, dst))
        if counter is None:
            counter = self.edges[(src, dst)] = Counter()
        counter[kind] += 1
        self.events += 1

    def weight(self, src: str, dst: str) -> int:
        counter = self.edges.get((src, dst))
        return sum(counter.values()) if counter else 0

    @property
    def nodes(self) -> List[str]:
        seen = set()
        for src, dst in self.edges:
            seen.add(src)
            seen.add(dst)
        return sorted(seen)

    def merge(self, other: "TransferNetwork") -> None:
        for key, counter in other.edges.items():
            mine = self.edges.get(key)
            if mine is None:
                self.edges[key] = Counter(counter)
            else:
                mine.update(counter)
        self.events += other.events


def _ordered_pair(
    a: ValidatedRecord, b: ValidatedRecord
) -> Tuple[ValidatedRecord, ValidatedRecord]:
    ka = (a.admission, a.discharge, a.facility_id)
    kb = (b.admission, b.discharge, b.facility_id)
    return (a, b) if ka <= kb else (b, a)


def build_network(
    groups: Iterable[OverlapGroup],
    policy: FrozenSet[OverlapKind] = DEFAULT_POLICY,
) -> TransferNetwork:
    """Aggregate directed transfer events from classified two-record groups.

    Only kinds in the policy contribute; groups of 3+ records never do.
    """
    net = TransferNetwork(policy=policy)
    for g in groups:
        if g.kind not in policy or len(g.members) != 2:
            continue
        src_stay, dst_stay = _ordered_pair(g.members[0], g.members[1])
        if g.kind is OverlapKind.TEMPORARY_TRANSFER:
            # Outward at the containment start, return at its end.
            net.add_event(src_stay.facility_id, dst_stay.facility_id, g.kind)
            net.add_event(dst_stay.facility_id, src_stay.facility_id, g.kind)
        else:
            net.add_event(src_stay.facility_id, dst_stay.facility_id, g.kind)
    return net


@dataclass
class NodeDegrees:
    in_degree: int = 0
    out_degree: int = 0
    in_strength: int = 0
    out_strength: int = 0


def degree_summary(net: TransferNetwork) -> Dict[str, NodeDegrees]:
    summary: Dict[str, NodeDegrees] = defaultdict(NodeDegrees)
    for (src, dst), counter in net.edges.items():
        weight = sum(counter.values())
        summary[src].out_degree += 1
        summary[src].out_strength += weight
        summary[dst].in_degree += 1
        summary[dst].in_strength += weight
    return dict(summary)


_KIND_COLUMNS = [k.value for k in OverlapKind if k is not OverlapKind.UNKNOWN_MULTIPLE]


def write_edge_csv(net: TransferNetwork, path: str) -> None:
    """Edge list with a per-kind breakdown column for each pair type."""
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(["src", "dst", "weight"] + _KIND_COLUMNS)
        for (src, dst) in sorted(net.edges):
            counter = net.edges[(src, dst)]
            writer.writerow(
                [src, dst, sum(counter.values())]
                + [counter.get(OverlapKind(col), 0) for col in _KIND_COLUMNS]
            )


def adjacency_dict(net: TransferNetwork) -> dict:
    adjacency: Dict[str, Dict[str, int]] = {}
    for (src, dst) in sorted(net.edges):
        adjacency.setdefault(src, {})[dst] = net.weight(src, dst)
    return {
        "schema_version": 1,
        "policy": sorted(k.value for k in net.policy),
        "events": net.events,
        "nodes": net.nodes,
        "adjacency": adjacency,
    }


def write_adjacency_json(net: TransferNetwork, path: str) -> None:
    with open(path, "w", encoding="utf-8") as out:
        json.dump(adjacency_dict(net), out, indent=2, sort_keys=True)
        out.write("\n")
