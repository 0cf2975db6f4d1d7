"""Protocol schedules for lattice-surgery operations.

A protocol is a set of rectangular qubit regions, each active over a
half-open round interval [start, end) with an initialization and a readout
condition.  Conditions are 'X' (the |+> state / X-basis measurement),
'Z' (|0> / Z-basis measurement), or 'perfect' (an artificial noiseless
boundary: both stabilizer kinds are known at the boundary round and no
physical measurement layer is attached).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import geometry

BASES = ("X", "Z", "perfect")


@dataclass(frozen=True)
class Region:
    name: str
    qubits: frozenset
    start: int
    end: int
    init: str
    readout: str

    def active_at(self, t):
        return self.start <= t < self.end


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str
    d: int
    rounds: int
    regions: tuple
    params: dict = field(default_factory=dict)

    def region(self, name):
        for r in self.regions:
            if r.name == name:
                return r
        raise KeyError(name)

    def active_qubits(self, t):
        out = set()
        for r in self.regions:
            if r.active_at(t):
                out.update(r.qubits)
        return frozenset(out)

    def to_json(self):
        return json.dumps({
            "kind": self.kind,
            "d": self.d,
            "rounds": self.rounds,
            "params": self.params,
            "regions": [{
                "name": r.name,
                "qubits": sorted(r.qubits),
                "start": r.start,
                "end": r.end,
                "init": r.init,
                "readout": r.readout,
            } for r in self.regions],
        }, sort_keys=True)

    @staticmethod
    def from_json(text):
        obj = json.loads(text)
        regions = tuple(
            Region(r["name"], frozenset(map(tuple, r["qubits"])),
                   r["start"], r["end"], r["init"], r["readout"])
            for r in obj["regions"])
        return ProtocolSpec(obj["kind"], obj["d"], obj["rounds"],
                            regions, obj.get("params", {}))


def _validate_d(d):
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise ValueError(f"code distance must be an odd integer >= 3, got {d}")


def _validate_pos(name, value, minimum=1):
    if not isinstance(value, int) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value}")


def _rect(x0, x1, y0, y1):
    """Data qubits on even-even coordinates in [x0,x1] x [y0,y1]."""
    return frozenset((x, y)
                     for x in range(x0, x1 + 1, 2)
                     for y in range(y0, y1 + 1, 2))


def build_memory(d, rounds, lower="perfect", upper="perfect"):
    """A single idle patch kept alive for `rounds` stabilizer rounds."""
    _validate_d(d)
    _validate_pos("rounds", rounds)
    if lower not in BASES or upper not in BASES:
        raise ValueError(f"invalid timelike boundary: {lower!r}/{upper!r}")
    patch = Region("patch", geometry.qubit_grid(d), 0, rounds, lower, upper)
    return ProtocolSpec("memory", d, rounds, (patch,),
                        {"lower": lower, "upper": upper})


def build_zz(d, w, h1, h2, h3):
    """Joint ZZ measurement of two patches via a width-w horizontal bridge.

    The patches sit side by side with their X-boundaries facing; the bridge
    columns are initialized in |+> at round h1, measured out in the X basis
    after h2 merged rounds, followed by h3 separate rounds.  The patches
    themselves have perfect timelike boundaries.
    """
    _validate_d(d)
    for nm, v in (("w", w), ("h1", h1), ("h2", h2), ("h3", h3)):
        _validate_pos(nm, v)
    rounds = h1 + h2 + h3
    p1 = Region("p1", geometry.qubit_grid(d), 0, rounds, "perfect", "perfect")
    p2 = Region("p2", geometry.qubit_grid(d, (2 * d + 2 * w, 0)),
                0, rounds, "perfect", "perfect")
    bridge = Region("bridge",
                    _rect(2 * d, 2 * d + 2 * w - 2, 0, 2 * d - 2),
                    h1, h1 + h2, "X", "X")
    return ProtocolSpec("zz", d, rounds, (p1, p2, bridge),
                        {"w": w, "h1": h1, "h2": h2, "h3": h3})


def build_xx(d, w, h1, h2, h3):
    """Joint XX measurement: two patches stacked vertically, Z-boundaries
    facing, bridge rows initialized in |0> and measured in the Z basis."""
    _validate_d(d)
    for nm, v in (("w", w), ("h1", h1), ("h2", h2), ("h3", h3)):
        _validate_pos(nm, v)
    rounds = h1 + h2 + h3
    p1 = Region("p1", geometry.qubit_grid(d), 0, rounds, "perfect", "perfect")
    p2 = Region("p2", geometry.qubit_grid(d, (0, 2 * d + 2 * w)),
                0, rounds, "perfect", "perfect")
    bridge = Region("bridge",
                    _rect(0, 2 * d - 2, 2 * d, 2 * d + 2 * w - 2),
                    h1, h1 + h2, "Z", "Z")
    return ProtocolSpec("xx", d, rounds, (p1, p2, bridge),
                        {"w": w, "h1": h1, "h2": h2, "h3": h3})


def build_cnot(d, w, h1, h2, h3):
    """Lattice-surgery CNOT between two patches via an ancilla patch.

    Layout (an L shape): the control patch sits west of the ancilla with a
    width-w gap bridged during the first merge window; the target patch
    sits south of the ancilla with a width-w gap bridged during the second
    window.  The ancilla is initialized in |+> and measured out in the Z
    basis.  Schedule: h1 separate rounds, h2 rounds of a joint ZZ
    measurement (control-ancilla), h2 rounds of a joint XX measurement
    (ancilla-target), then h3 separate rounds.
    """
    _validate_d(d)
    for nm, v in (("w", w), ("h1", h1), ("h2", h2), ("h3", h3)):
        _validate_pos(nm, v)
    rounds = h1 + 2 * h2 + h3
    x0 = 2 * d + 2 * w  # west edge of the ancilla/target column
    control = Region("control", geometry.qubit_grid(d),
                     0, rounds, "perfect", "perfect")
    ancilla = Region("ancilla", geometry.qubit_grid(d, (x0, 0)),
                     0, rounds, "X", "Z")
    target = Region("target",
                    geometry.qubit_grid(d, (x0, -2 * d - 2 * w)),
                    0, rounds, "perfect", "perfect")
    bridge1 = Region("bridge1", _rect(2 * d, x0 - 2, 0, 2 * d - 2),
                     h1, h1 + h2, "X", "X")
    bridge2 = Region("bridge2", _rect(x0, x0 + 2 * d - 2, -2 * w, -2),
                     h1 + h2, h1 + 2 * h2, "Z", "Z")
    return ProtocolSpec("cnot", d, rounds,
                        (control, ancilla, target, bridge1, bridge2),
                        {"w": w, "h1": h1, "h2": h2, "h3": h3})
