"""Check-graph compilation: structure, determinism, fault distance,
and the CNOT mirror/time-reversal symmetry."""

import math

import pytest

from surgesim import checkgraph, protocol
from surgesim.noise import NoiseParams


IND = NoiseParams("independent", 0.01)


def _compile(spec, noise=IND):
    return checkgraph.compile(spec, noise)


def test_compile_deterministic():
    spec = protocol.build_cnot(3, 1, 1, 2, 1)
    a = _compile(spec)
    b = _compile(spec)
    assert a.zgraph.dump() == b.zgraph.dump()
    assert a.xgraph.dump() == b.xgraph.dump()


def test_memory_graph_shape():
    spec = protocol.build_memory(3, 3)
    pair = _compile(spec)
    # (d*d-1)/2 checks per kind per round boundary (perfect init/readout)
    assert len(pair.zgraph.nodes) == 4 * 4
    assert len(pair.xgraph.nodes) == 4 * 4
    assert pair.zgraph.comps == ("left", "right")
    assert pair.xgraph.comps == ("bottom", "top")
    # graph size scales with d^2 * rounds
    big = _compile(protocol.build_memory(5, 6))
    assert len(big.zgraph.nodes) == 12 * 7


def test_zz_comps_and_merge():
    pair = _compile(protocol.build_zz(3, 1, 1, 3, 1))
    assert set(pair.zgraph.comps) == {"left", "right",
                                      "bridge-lower", "bridge-upper"}
    assert set(pair.xgraph.comps) == {"bottom", "top"}


def test_cnot_comps():
    pair = _compile(protocol.build_cnot(3, 1, 1, 3, 1))
    assert pair.zgraph.comps == ("A", "B", "C")
    assert pair.xgraph.comps == ("D", "E", "F")


def test_edge_weights_follow_probabilities():
    pair = _compile(protocol.build_memory(3, 3))
    for g in (pair.zgraph, pair.xgraph):
        for e in g.edges:
            assert 0 < e.p < 0.5
            assert e.weight == pytest.approx(math.log((1 - e.p) / e.p))


def test_parallel_edges_merged():
    pair = _compile(protocol.build_memory(3, 3))
    for g in (pair.zgraph, pair.xgraph):
        seen = set()
        for e in g.edges:
            key = (tuple(sorted(e.nodes)), tuple(sorted(e.boundaries)))
            assert key not in seen
            seen.add(key)
        merged = [e for e in g.edges if len(e.locations) > 1]
        assert merged, "expected XOR-merged parallel fault locations"


def test_correlation_links_share_location():
    pair = _compile(protocol.build_memory(3, 3))
    zloc = {e.id: set(e.locations) for e in pair.zgraph.edges}
    xloc = {e.id: set(e.locations) for e in pair.xgraph.edges}
    assert pair.correlation_links
    for ze, xe in pair.correlation_links:
        shared = {l for l in zloc[ze] if l[0] == "data"} & \
                 {l for l in xloc[xe] if l[0] == "data"}
        assert shared, (ze, xe)


def _oracle_fault_distance(graph):
    """Independent unit-weight shortest comp-to-comp path via networkx."""
    import networkx as nx
    g = nx.Graph()
    for e in graph.edges:
        ends = [f"n{n}" for n in e.nodes] + [f"b{c}" for c in e.boundaries]
        if len(ends) == 1:
            continue
        u, v = ends
        if g.has_edge(u, v):
            continue
        g.add_edge(u, v)
    comps = [f"b{c}" for c in graph.comps if f"b{c}" in g]
    best = None
    for i, a in enumerate(comps):
        for b in comps[i + 1:]:
            try:
                length = nx.shortest_path_length(g, a, b)
            except nx.NetworkXNoPath:
                continue
            best = length if best is None else min(best, length)
    return best


@pytest.mark.parametrize("d", [3, 5, 7])
def test_fault_distance_table(d):
    mem = _compile(protocol.build_memory(d, d))
    assert checkgraph.fault_distance(mem.zgraph) == d
    assert checkgraph.fault_distance(mem.xgraph) == d
    zz = _compile(protocol.build_zz(d, 1, 1, d, 1))
    assert checkgraph.fault_distance(zz.zgraph) == d
    assert checkgraph.fault_distance(zz.xgraph) == d
    cnot = _compile(protocol.build_cnot(d, 1, 1, d, 1))
    assert checkgraph.fault_distance(cnot.zgraph) == d
    assert checkgraph.fault_distance(cnot.xgraph) == d
    for g in (mem.zgraph, zz.zgraph, cnot.zgraph, cnot.xgraph):
        assert _oracle_fault_distance(g) == checkgraph.fault_distance(g)


def test_fault_distance_short_merge():
    zz = _compile(protocol.build_zz(5, 1, 1, 2, 1))
    assert checkgraph.fault_distance(zz.zgraph) == 2
    assert _oracle_fault_distance(zz.zgraph) == 2


@pytest.mark.parametrize("w", [1, 2, 3])
def test_fault_distance_bridge_widths(w):
    for d in (3, 5):
        zz = _compile(protocol.build_zz(d, w, 1, d, 1))
        assert checkgraph.fault_distance(zz.zgraph) == d
        assert checkgraph.fault_distance(zz.xgraph) == d


def test_symmetry_true_cases():
    for d in (3, 5):
        pair = _compile(protocol.build_cnot(d, 1, 1, d, 1))
        ok, witness = checkgraph.verify_symmetry(pair)
        assert ok, witness
        # applying the witness twice is the identity
        assert all(witness[witness[k]] == k for k in witness)
        assert len(witness) == 2 * len(pair.zgraph.nodes)


def test_symmetry_false_cases():
    ok, msg = checkgraph.verify_symmetry(
        _compile(protocol.build_cnot(3, 1, 1, 2, 3)))
    assert not ok and isinstance(msg, str)
    ok, msg = checkgraph.verify_symmetry(
        _compile(protocol.build_cnot(3, 1, 1, 2, 1),
                 NoiseParams("xBiased", 0.01)))
    assert not ok
    ok, msg = checkgraph.verify_symmetry(
        _compile(protocol.build_zz(3, 1, 1, 2, 1)))
    assert not ok
