import filecmp

from hospnet.cohort import group_by_patient
from hospnet.network import (
    DEFAULT_POLICY,
    adjacency_dict,
    build_network,
    degree_summary,
    write_adjacency_json,
    write_edge_csv,
)
from hospnet.overlaps import OverlapKind, classify_group, find_overlap_groups

from conftest import vrec


def _groups(dataset):
    return [
        classify_group(g)
        for h in group_by_patient(dataset.records)
        for g in find_overlap_groups(h)
    ]


def test_default_policy_edges_from_examples(golden_dataset):
    net = build_network(_groups(golden_dataset))
    assert net.events == 3
    assert net.weight("h47", "h79") == 1  # standard transfer, earlier admission
    assert net.weight("h24", "h12") == 1  # tie on admission -> earlier discharge
    assert net.weight("h5", "h28") == 1  # last day transfer
    assert sorted(net.edges) == [("h24", "h12"), ("h47", "h79"), ("h5", "h28")]


def test_temporary_policy_adds_round_trip(golden_dataset):
    policy = DEFAULT_POLICY | {OverlapKind.TEMPORARY_TRANSFER}
    net = build_network(_groups(golden_dataset), policy)
    assert net.events == 5
    assert net.weight("h171", "h193") == 1
    assert net.weight("h193", "h171") == 1


def test_empty_groups_empty_network():
    net = build_network([])
    assert net.events == 0
    assert net.edges == {}
    assert degree_summary(net) == {}


def test_event_conservation(golden_dataset):
    groups = _groups(golden_dataset)
    net = build_network(groups)
    qualifying = sum(
        1 for g in groups if g.kind in DEFAULT_POLICY and len(g.members) == 2
    )
    assert net.events == qualifying
    assert sum(sum(c.values()) for c in net.edges.values()) == net.events


def test_degree_summary_strengths():
    a = vrec(pid="p1", fac="hA", adm="2012-01-01", dis="2012-01-05")
    b = vrec(pid="p1", fac="hB", adm="2012-01-05", dis="2012-01-09")
    history = next(iter(group_by_patient([a, b])))
    g = classify_group(find_overlap_groups(history)[0])
    net = build_network([g, g, g])
    degrees = degree_summary(net)
    assert degrees["hA"].out_strength == 3
    assert degrees["hB"].in_strength == 3
    total_out = sum(d.out_strength for d in degrees.values())
    total_in = sum(d.in_strength for d in degrees.values())
    assert total_out == total_in == net.events


def test_exports_are_deterministic(tmp_path, golden_dataset):
    net = build_network(_groups(golden_dataset))
    for i in (1, 2):
        write_edge_csv(net, str(tmp_path / f"edges{i}.csv"))
        write_adjacency_json(net, str(tmp_path / f"adj{i}.json"))
    assert filecmp.cmp(tmp_path / "edges1.csv", tmp_path / "edges2.csv", shallow=False)
    assert filecmp.cmp(tmp_path / "adj1.json", tmp_path / "adj2.json", shallow=False)
    doc = adjacency_dict(net)
    assert doc["events"] == 3
    assert doc["adjacency"]["h47"]["h79"] == 1
