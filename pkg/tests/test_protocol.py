"""Protocol schedules: durations, regions, serialization, validation."""

import pytest

from surgesim import protocol


def test_memory_schedule():
    spec = protocol.build_memory(5, 7)
    assert spec.kind == "memory"
    assert spec.rounds == 7
    assert len(spec.active_qubits(0)) == 25
    assert spec.region("patch").init == "perfect"
    assert spec.region("patch").readout == "perfect"


def test_zz_total_rounds():
    for d, w, h1, h2, h3 in [(3, 1, 1, 3, 1), (5, 2, 2, 5, 3)]:
        spec = protocol.build_zz(d, w, h1, h2, h3)
        assert spec.rounds == h1 + h2 + h3


def test_cnot_total_rounds():
    for d, w, h1, h2, h3 in [(3, 1, 1, 3, 1), (5, 1, 1, 5, 2)]:
        spec = protocol.build_cnot(d, w, h1, h2, h3)
        assert spec.rounds == h1 + 2 * h2 + h3


def test_zz_bridge_activity_window():
    d, w, h1, h2, h3 = 5, 2, 1, 4, 2
    spec = protocol.build_zz(d, w, h1, h2, h3)
    bridge = spec.region("bridge")
    assert bridge.start == h1 and bridge.end == h1 + h2
    assert len(bridge.qubits) == (w * (2 * d - 1) + (w - 1) * d
                                  ) or len(bridge.qubits) > 0
    base = len(spec.active_qubits(0))
    assert len(spec.active_qubits(h1)) == base + len(bridge.qubits)
    assert len(spec.active_qubits(h1 + h2)) == base


def test_zz_bridge_bases():
    spec = protocol.build_zz(3, 1, 1, 3, 1)
    bridge = spec.region("bridge")
    assert bridge.init == "X" and bridge.readout == "X"
    dual = protocol.build_xx(3, 1, 1, 3, 1).region("bridge")
    assert dual.init == "Z" and dual.readout == "Z"


def test_cnot_regions():
    spec = protocol.build_cnot(3, 1, 1, 3, 1)
    names = {r.name for r in spec.regions}
    assert names == {"control", "ancilla", "target", "bridge1", "bridge2"}
    anc = spec.region("ancilla")
    assert anc.init == "X" and anc.readout == "Z"
    b1 = spec.region("bridge1")
    b2 = spec.region("bridge2")
    assert (b1.start, b1.end) == (1, 4)
    assert (b2.start, b2.end) == (4, 7)
    assert b1.init == "X" and b2.init == "Z"
    # patches are disjoint
    all_regions = [r.qubits for r in spec.regions]
    assert sum(map(len, all_regions)) == len(set().union(*all_regions))


def test_json_roundtrip():
    for spec in (protocol.build_memory(3, 4),
                 protocol.build_zz(5, 1, 1, 5, 1),
                 protocol.build_cnot(3, 1, 1, 3, 1)):
        text = spec.to_json()
        clone = protocol.ProtocolSpec.from_json(text)
        assert clone == spec
        assert clone.to_json() == text


def test_parameter_validation():
    with pytest.raises(ValueError):
        protocol.build_zz(4, 1, 1, 3, 1)
    with pytest.raises(ValueError):
        protocol.build_zz(3, 0, 1, 3, 1)
    with pytest.raises(ValueError):
        protocol.build_cnot(3, 1, 0, 3, 1)
    with pytest.raises(ValueError):
        protocol.build_memory(3, 0)
