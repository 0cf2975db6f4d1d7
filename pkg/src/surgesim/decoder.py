"""Exact minimum-weight perfect-matching decoding on a check graph.

The decoder pairs up flipped checks (and optionally the boundary) along
minimum-weight paths, which is the exact maximum-likelihood matching
configuration for independent edge flips with weights ln((1-p)/p).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Correction:
    edges: tuple
    total_weight: float


def extract_syndrome(graph, flipped_edges):
    """Check nodes with odd incidence under the flipped edge set."""
    return tuple(graph.core().defects_of(list(flipped_edges)))


def decode(graph, syndrome):
    """Minimum-weight correction annihilating the syndrome."""
    syndrome = sorted(syndrome)
    if not syndrome:
        return Correction((), 0.0)
    core = graph.core()
    edges = core.decode_defects(list(syndrome))
    return Correction(tuple(int(e) for e in edges),
                      float(core.correction_weight(list(edges))))
