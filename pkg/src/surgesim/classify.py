"""Classification of residual error chains by boundary parities.

After decoding, the joint configuration of faults and correction is
syndrome-free, so it is a union of closed loops and boundary-to-boundary
strings.  The parity of string endpoints on each boundary component is a
homology invariant and determines the logical error class.
"""

from __future__ import annotations

from dataclasses import dataclass


def boundary_parities(graph, chain):
    """Endpoint parity per boundary component of a syndrome-free chain."""
    core = graph.core()
    chain = list(chain)
    defects = core.defects_of(chain)
    if defects:
        raise ValueError(
            f"chain does not annihilate all defects ({len(defects)} left)")
    mask = core.comp_parity(chain)
    return {c: (mask >> i) & 1 for i, c in enumerate(graph.comps)}


# --- CNOT -------------------------------------------------------------------
#
# The three X-type boundary components of the protocol are labeled A
# (control outer), B (the early merged sheet), C (the late sheet); the
# Z-type ones are D (early/north), E (late/south), F (target outer).
# A string between two components applies the logical operator of the pair:
#
#   A-B: X1      A-C: X1 X2    B-C: X2
#   D-E: Z1      D-F: Z2       E-F: Z1 Z2

_X_CLASS = {frozenset(): "I",
            frozenset("AB"): "X1",
            frozenset("AC"): "X1X2",
            frozenset("BC"): "X2"}
_Z_CLASS = {frozenset(): "I",
            frozenset("DE"): "Z1",
            frozenset("DF"): "Z2",
            frozenset("EF"): "Z1Z2"}

CNOT_X_PARTS = ("I", "X1", "X2", "X1X2")
CNOT_Z_PARTS = ("I", "Z1", "Z2", "Z1Z2")


@dataclass(frozen=True)
class LogicalClass:
    x_part: str
    z_part: str

    def __str__(self):
        if self.x_part == "I" and self.z_part == "I":
            return "I"
        parts = [p for p in (self.x_part, self.z_part) if p != "I"]
        return "*".join(parts)


def _odd_set(parities, labels):
    odd = frozenset(c for c in labels if parities.get(c, 0) & 1)
    if len(odd) % 2:
        raise ValueError(f"odd total boundary parity: {sorted(odd)}")
    return odd

def classify_cnot(px_parities, pz_parities):
    """Logical class of a CNOT shot from the two graphs' boundary parities."""
    odd_x = _odd_set(px_parities, "ABC")
    odd_z = _odd_set(pz_parities, "DEF")
    if odd_x not in _X_CLASS or odd_z not in _Z_CLASS:
        raise ValueError(f"unrecognized parity pattern {odd_x} / {odd_z}")
    return LogicalClass(_X_CLASS[odd_x], _Z_CLASS[odd_z])


# --- joint ZZ / XX ------------------------------------------------------------

def classify_zz(pz_parities, px_parities):
    """Failure flags of a joint ZZ measurement shot.

    'timelike' is a flipped joint-measurement outcome (string from the
    lower to the upper merge boundary); 'spacelike-left'/'spacelike-right'
    are logical X errors on the respective patch; 'z' is a logical Z
    error (the two patch Z operators are equivalent modulo the measured
    joint ZZ, so they form a single class).
    """
    flags = set()
    if pz_parities.get("bridge-lower", 0) & pz_parities.get("bridge-upper", 0) & 1:
        flags.add("timelike")
    if pz_parities.get("left", 0) & 1:
        flags.add("spacelike-left")
    if pz_parities.get("right", 0) & 1:
        flags.add("spacelike-right")
    if px_parities.get("bottom", 0) & 1:
        flags.add("z")
    return frozenset(flags)


# --- memory -------------------------------------------------------------------

def classify_memory(pz_parities, px_parities):
    """'I', 'X', 'Z', or 'Y' for a memory shot with perfect timelike
    boundaries (spatial components only)."""
    x_err = pz_parities.get("left", 0) & 1
    z_err = px_parities.get("bottom", 0) & 1
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x_err, z_err)]


# --- mask-level helpers (vectorized classification) ----------------------------

def mask_tables(pair):
    """Maps from comp-parity bit masks to class labels for both graphs,
    given the compiled pair's component ordering."""
    kind = pair.spec.kind
    zc = pair.zgraph.comps
    xc = pair.xgraph.comps

    def bit(comps, label):
        return 1 << comps.index(label) if label in comps else 0

    if kind == "cnot":
        z_table = {}
        for mask in range(1 << len(zc)):
            odd = frozenset(c for i, c in enumerate(zc) if (mask >> i) & 1)
            z_table[mask] = _X_CLASS.get(odd)
        x_table = {}
        for mask in range(1 << len(xc)):
            odd = frozenset(c for i, c in enumerate(xc) if (mask >> i) & 1)
            x_table[mask] = _Z_CLASS.get(odd)
        return z_table, x_table
    raise ValueError(f"no mask table for protocol kind {kind!r}")
