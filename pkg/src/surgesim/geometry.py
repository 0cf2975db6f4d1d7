"""Rotated surface-code patch geometry.

Coordinate convention: data qubits sit at even-even integer coordinates
(2i, 2j); stabilizer faces sit at odd-odd coordinates.  The face kind is a
global checkerboard: a face at (x, y) is an X-face iff ((x + y) // 2) is
even.  With a patch anchored at the origin this puts X-faces on the left
and right boundaries and Z-faces on the top and bottom.
"""

from __future__ import annotations

from dataclasses import dataclass


def face_kind(pos):
    """Checkerboard kind of the face position (odd-odd coordinates)."""
    x, y = pos
    return "X" if ((x + y) // 2) % 2 == 0 else "Z"


def qubit_grid(d, offset=(0, 0)):
    """The d x d data-qubit coordinates of a patch anchored at `offset`."""
    ox, oy = offset
    return frozenset(
        (ox + 2 * i, oy + 2 * j) for i in range(d) for j in range(d))


def diagonal_faces(qubit):
    """The four face positions diagonal to a data qubit."""
    x, y = qubit
    return ((x - 1, y - 1), (x + 1, y - 1), (x - 1, y + 1), (x + 1, y + 1))


def error_face_pair(qubit, error_type):
    """The two face positions whose checks an error of `error_type` flips.

    An X error anticommutes with the two Z-faces diagonal to the qubit,
    which lie on one diagonal; a Z error hits the two X-faces on the other
    diagonal.
    """
    x, y = qubit
    flipped_kind = "Z" if error_type == "X" else "X"
    a = (x - 1, y - 1)
    if face_kind(a) == flipped_kind:
        return (a, (x + 1, y + 1))
    return ((x + 1, y - 1), (x - 1, y + 1))


def active_faces(qubits):
    """Stabilizer faces supported on an active data-qubit set.

    Returns {position: corners}.  A face is active with its 4 diagonal
    neighbours when all are present; with 2 vertically aligned corners when
    it is an X-face (left/right boundary); with 2 horizontally aligned
    corners when it is a Z-face (top/bottom boundary).
    """
    candidates = set()
    for q in qubits:
        candidates.update(diagonal_faces(q))
    faces = {}
    for pos in candidates:
        corners = tuple(sorted(q for q in diagonal_faces(pos) if q in qubits))
        if len(corners) == 4:
            faces[pos] = corners
        elif len(corners) == 2:
            (x1, y1), (x2, y2) = corners
            if x1 == x2 and face_kind(pos) == "X":
                faces[pos] = corners
            elif y1 == y2 and face_kind(pos) == "Z":
                faces[pos] = corners
    return faces


@dataclass(frozen=True)
class StabilizerFace:
    kind: str
    corners: tuple
    position: tuple


@dataclass(frozen=True)
class PatchLayout:
    d: int
    n: int
    data_qubits: frozenset
    faces: tuple

    def faces_of_kind(self, kind):
        return [f for f in self.faces if f.kind == kind]


def build_patch(d, offset=(0, 0)):
    """Build a distance-d rotated surface-code patch layout."""
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise ValueError(f"code distance must be an odd integer >= 3, got {d}")
    qubits = qubit_grid(d, offset)
    faces = tuple(
        StabilizerFace(face_kind(pos), corners, pos)
        for pos, corners in sorted(active_faces(qubits).items()))
    return PatchLayout(d=d, n=d * d, data_qubits=qubits, faces=faces)
