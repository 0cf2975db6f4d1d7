"""Compile a protocol schedule plus noise model into a pair of check graphs.

Each graph holds the detector nodes of one stabilizer kind: node (p, t)
is the comparison of consecutive measurement outcomes of the face at
position p around round t (or a single outcome against a known reference
at an initialization / readout / perfect boundary).  Fault edges connect
the one or two nodes a given elementary fault flips; endpoints that fall
on a boundary carry the label of the boundary component instead.

Z-check nodes detect X errors (the "Z graph"); X-check nodes detect Z
errors.  Boundary components partition the open boundary of the
spacetime volume; the pair of components an undetectable error string
connects determines its logical class.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from . import geometry
from .geometry import error_face_pair, face_kind


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckNode:
    id: int
    position: tuple
    t: int


@dataclass(frozen=True)
class FaultEdge:
    id: int
    nodes: tuple        # 0..2 node ids
    boundaries: tuple   # component labels for endpoints on the boundary
    kind: str           # 'spacelike' | 'timelike' | 'readout'
    p: float            # marginal flip probability
    weight: float       # ln((1-p)/p)
    locations: tuple    # contributing elementary fault locations


@dataclass(frozen=True)
class FaultConfig:
    z_edges: tuple
    x_edges: tuple


class CheckGraph:
    def __init__(self, kind, nodes, edges, comps):
        self.kind = kind          # 'Z' or 'X' (the check kind)
        self.nodes = nodes        # list[CheckNode]
        self.edges = edges        # list[FaultEdge]
        self.comps = comps        # ordered tuple of component labels
        self.comp_index = {c: i for i, c in enumerate(comps)}
        self._core = None

    def core(self):
        """The compiled detector-graph backend (built lazily)."""
        if self._core is None:
            from . import _core
            eu, ev, wts = [], [], []
            for e in self.edges:
                ends = [("n", n) for n in e.nodes]
                ends += [("b", self.comp_index[c]) for c in e.boundaries]
                assert len(ends) == 2
                enc = [n if tag == "n" else -1 - n for tag, n in ends]
                eu.append(enc[0])
                ev.append(enc[1])
                wts.append(e.weight)
            self._core = _core.DetectorGraph(len(self.nodes), len(self.comps),
                                             eu, ev, wts)
        return self._core

    def dump(self):
        """Line-oriented text dump (stable ordering, for diffing)."""
        out = io.StringIO()
        out.write(f"graph kind={self.kind} nodes={len(self.nodes)} "
                  f"edges={len(self.edges)} comps={','.join(self.comps)}\n")
        for n in self.nodes:
            out.write(f"node {n.id} pos={n.position[0]},{n.position[1]} "
                      f"t={n.t}\n")
        for e in self.edges:
            ends = " ".join([f"n{n}" for n in e.nodes]
                            + [f"b:{c}" for c in e.boundaries])
            out.write(f"edge {e.id} {e.kind} p={e.p:.12g} {ends}\n")
        return out.getvalue()


class CheckGraphPair:
    def __init__(self, zgraph, xgraph, spec, noise, pauli_groups,
                 single_groups, correlation_links):
        self.zgraph = zgraph
        self.xgraph = xgraph
        self.spec = spec
        self.noise = noise
        # (p_first, p_second, p_both, z_edge_ids, x_edge_ids)
        self.pauli_groups = pauli_groups
        # (graph_index, prob, edge_ids)
        self.single_groups = single_groups
        # set of (z_edge_id, x_edge_id) pairs from shared locations
        self.correlation_links = correlation_links
        self._engine = None

    def graph(self, kind):
        return self.zgraph if kind == "Z" else self.xgraph

    def engine(self, noise_params=None, decode_z=True, decode_x=True):
        if noise_params is not None and noise_params != self.noise:
            raise ValueError("noise parameters differ from the compiled pair")
        key = (decode_z, decode_x)
        if self._engine is None or self._engine[0] != key:
            from . import _core
            pgroups = [_core.PauliGroup(pf, ps, pb, list(fe), list(se))
                       for pf, ps, pb, fe, se in self.pauli_groups]
            sgroups = [_core.SingleGroup(g, prob, list(eids))
                       for g, prob, eids in self.single_groups]
            eng = _core.ShotEngine(self.zgraph.core(), self.xgraph.core(),
                                   pgroups, sgroups, decode_z, decode_x)
            self._engine = (key, eng)
        return self._engine[1]


# ---------------------------------------------------------------------------
# Face intervals
# ---------------------------------------------------------------------------

@dataclass
class _Segment:
    position: tuple
    kind: str
    a: int                  # first measured round
    b: int                  # one past the last measured round
    lower: bool             # check (p, a) exists
    upper: bool             # check (p, b) exists
    supports: list          # [(t0, t1, corners)] runs covering [a, b)
    birth_region: str = ""  # region owning the birth facet (if not lower)
    death_region: str = ""  # region owning the death facet (if not upper)

    def support_at(self, t):
        for t0, t1, corners in self.supports:
            if t0 <= t < t1:
                return corners
        raise KeyError((self.position, t))


def _build_eras(spec):
    cuts = {0, spec.rounds}
    for r in spec.regions:
        cuts.add(r.start)
        cuts.add(r.end)
    cuts = sorted(c for c in cuts if 0 <= c <= spec.rounds)
    eras = []
    for t0, t1 in zip(cuts, cuts[1:]):
        qubits = spec.active_qubits(t0)
        eras.append((t0, t1, qubits, geometry.active_faces(qubits)))
    return eras


def _build_segments(spec, qinfo):
    """All face measurement intervals, keyed by face position."""
    eras = _build_eras(spec)
    positions = set()
    for _, _, _, faces in eras:
        positions.update(faces)
    segments = {}

    def lower_flag(corners, a, kind):
        return all(qinfo[q].start == a and qinfo[q].init in (kind, "perfect")
                   for q in corners)

    def upper_flag(corners, b, kind):
        return all(qinfo[q].end == b and qinfo[q].readout in (kind, "perfect")
                   for q in corners)

    def owner_region(corners, fallback):
        regions = {qinfo[q].name for q in corners}
        if len(regions) == 1:
            return next(iter(regions))
        return fallback

    for p in sorted(positions):
        kind = face_kind(p)
        segs = []
        cur = None
        for t0, t1, _, faces in eras:
            corners = faces.get(p)
            if corners is None:
                if cur is not None:
                    segs.append(cur)
                    cur = None
                continue
            if cur is None:
                cur = _Segment(p, kind, t0, t1, False, False,
                               [(t0, t1, corners)])
                born = [q for q in corners if qinfo[q].start == t0]
                cur.lower = lower_flag(corners, t0, kind)
                if not cur.lower:
                    cur.birth_region = owner_region(
                        born or corners, qinfo[corners[0]].name)
                continue
            old = cur.supports[-1][2]
            added = [q for q in corners if q not in old]
            removed = [q for q in old if q not in corners]
            ok = (all(qinfo[q].start == t0
                      and qinfo[q].init in (kind, "perfect") for q in added)
                  and all(qinfo[q].end == t0
                          and qinfo[q].readout in (kind, "perfect")
                          for q in removed))
            if ok:
                cur.b = t1
                cur.supports.append((t0, t1, corners))
            else:
                segs.append(cur)
                cur = _Segment(p, kind, t0, t1, False, False,
                               [(t0, t1, corners)])
                born = [q for q in corners if qinfo[q].start == t0]
                cur.lower = lower_flag(corners, t0, kind)
                if not cur.lower:
                    cur.birth_region = owner_region(
                        born or corners, qinfo[corners[0]].name)
        if cur is not None:
            segs.append(cur)
        for seg in segs:
            corners = seg.supports[-1][2]
            seg.upper = upper_flag(corners, seg.b, seg.kind)
            if not seg.upper:
                dying = [q for q in corners if qinfo[q].end == seg.b]
                seg.death_region = owner_region(
                    dying or corners, qinfo[corners[0]].name)
        segments[p] = segs
    return segments


# ---------------------------------------------------------------------------
# Boundary component naming
# ---------------------------------------------------------------------------

def _memory_comp(spec, graph_kind, facet):
    tag = facet[0]
    if tag == "tl":
        return "lower"
    if tag == "tu":
        return "upper"
    _, _, dirn, _ = facet
    return {"W": "left", "E": "right", "S": "bottom", "N": "top"}[dirn]


def _zz_comp(spec, graph_kind, facet):
    h1 = spec.params["h1"]
    h2 = spec.params["h2"]
    tag = facet[0]
    if tag == "tl":
        return "bridge-lower"
    if tag == "tu":
        return "bridge-upper"
    _, region, dirn, t = facet
    if dirn == "S":
        return "bottom"
    if dirn == "N":
        return "top"
    if region == "p1" and dirn == "W":
        return "left"
    if region == "p2" and dirn == "E":
        return "right"
    # Facing boundaries of the merge gap.
    return "bridge-lower" if t < h1 else "bridge-upper"


def _xx_comp(spec, graph_kind, facet):
    h1 = spec.params["h1"]
    tag = facet[0]
    if tag == "tl":
        return "bridge-lower"
    if tag == "tu":
        return "bridge-upper"
    _, region, dirn, t = facet
    if dirn == "W":
        return "left"
    if dirn == "E":
        return "right"
    if region == "p1" and dirn == "S":
        return "bottom"
    if region == "p2" and dirn == "N":
        return "top"
    return "bridge-lower" if t < h1 else "bridge-upper"


def _cnot_comp(spec, graph_kind, facet):
    h1 = spec.params["h1"]
    h2 = spec.params["h2"]
    tag = facet[0]
    if graph_kind == "Z":
        if tag == "tl":
            region = facet[1]
            if region == "ancilla":
                return "B"
            if region == "bridge1":
                return "B"
        elif tag == "tu":
            if facet[1] == "bridge1":
                return "C"
        else:
            _, region, dirn, t = facet
            if region == "control" and dirn == "W":
                return "A"
            if (region, dirn) in (("control", "E"), ("ancilla", "W")):
                return "B" if t < h1 + h2 else "C"
            if dirn == "E" and region in ("ancilla", "bridge2", "target"):
                return "B"
            if dirn == "W" and region in ("bridge2", "target"):
                return "C"
    else:
        if tag == "tl":
            if facet[1] == "bridge2":
                return "E"
        elif tag == "tu":
            region = facet[1]
            if region == "ancilla":
                return "D"
            if region == "bridge2":
                return "D"
        else:
            _, region, dirn, t = facet
            if region == "target" and dirn == "S":
                return "F"
            if dirn == "N" and region in ("control", "bridge1", "ancilla"):
                return "D"
            if dirn == "S" and region in ("control", "bridge1"):
                return "E"
            if (region, dirn) in (("ancilla", "S"), ("target", "N")):
                return "E" if t < h1 + h2 else "D"
    raise KeyError(f"unassigned boundary facet {facet!r} in {graph_kind} graph")


_COMP_FNS = {"memory": _memory_comp, "zz": _zz_comp, "xx": _xx_comp,
             "cnot": _cnot_comp}


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def _xor_prob(p1, p2):
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


def compile(spec, noise_params):  # noqa: A001 - spec-mandated name
    comp_fn = _COMP_FNS.get(spec.kind)
    if comp_fn is None:
        raise ValueError(f"cannot compile protocol kind {spec.kind!r}")
    R = spec.rounds

    qinfo = {}
    for r in spec.regions:
        for q in r.qubits:
            if q in qinfo:
                raise ValueError(f"qubit {q} in two regions")
            qinfo[q] = r

    segments = _build_segments(spec, qinfo)

    # --- nodes -------------------------------------------------------------
    checks = {"Z": [], "X": []}
    for p, segs in sorted(segments.items()):
        kind = face_kind(p)
        for seg in segs:
            ts = list(range(seg.a + 1, seg.b))
            if seg.lower:
                ts.append(seg.a)
            if seg.upper:
                ts.append(seg.b)
            checks[kind].extend((t, p) for t in ts)
    node_ix = {"Z": {}, "X": {}}
    nodes = {"Z": [], "X": []}
    for kind in ("Z", "X"):
        for t, p in sorted(checks[kind]):
            nid = len(nodes[kind])
            nodes[kind].append(CheckNode(nid, p, t))
            node_ix[kind][(p, t)] = nid

    def boundary(graph_kind, facet):
        return ("b", comp_fn(spec, graph_kind, facet))

    def endpoint(p, layer, graph_kind, region_name, dirn):
        """Graph endpoint flipped by a data error at `layer` at face p."""
        segs = segments.get(p, ())
        for seg in segs:
            if seg.b - 1 >= layer:
                t_star = max(seg.a, layer)
                if t_star > seg.a:
                    return ("n", node_ix[graph_kind][(p, t_star)])
                if seg.lower:
                    return ("n", node_ix[graph_kind][(p, seg.a)])
                return boundary(graph_kind, ("tl", seg.birth_region, seg.a))
        if segs and layer == R and segs[-1].b == R and segs[-1].upper:
            return ("n", node_ix[graph_kind][(p, R)])
        return boundary(graph_kind, ("sp", region_name, dirn, layer))

    # --- fault locations ----------------------------------------------------
    px, py, pz = noise_params.pauli_probs()
    mz, mx = noise_params.marginals()
    q_prob = noise_params.q

    # location -> per-graph (endpoints, prob, kind); accumulated below.
    GZ, GX = "Z", "X"
    raw = []  # (loc_id, graph_kind, key(endpoints), edge_kind, prob)
    pauli_locs = []   # (loc_id_z, loc_id_x) sharing one Pauli draw

    def loc_endpoints(j, layer, error_type):
        graph_kind = GZ if error_type == "X" else GX
        ends = []
        for p in error_face_pair(j, error_type):
            if graph_kind == GZ:
                dirn = "W" if p[0] < j[0] else "E"
            else:
                dirn = "S" if p[1] < j[1] else "N"
            ends.append(endpoint(p, layer, graph_kind, qinfo[j].name, dirn))
        if (ends[0][0] == "b" and ends[1][0] == "b"
                and ends[0][1] == ends[1][1]):
            return None  # both ends on the same boundary component: invisible
        return tuple(sorted(ends))

    loc_counter = 0
    for j in sorted(qinfo):
        info = qinfo[j]
        layers = list(range(info.start, info.end))
        if info.readout == "perfect":
            layers.append(info.end)
        for layer in layers:
            sides = {}
            for error_type, marg in (("X", mz), ("Z", mx)):
                if marg <= 0.0:
                    continue
                if layer == info.start and info.init == error_type:
                    continue  # error matching the fresh init state: trivial
                ends = loc_endpoints(j, layer, error_type)
                if ends is None:
                    continue
                sides[error_type] = ends
            if not sides:
                continue
            loc_id = ("data", j, layer)
            if len(sides) == 2:
                raw.append((loc_id, GZ, sides["X"], "spacelike", mz))
                raw.append((loc_id, GX, sides["Z"], "spacelike", mx))
                pauli_locs.append(loc_id)
            else:
                (etype, ends), = sides.items()
                gk = GZ if etype == "X" else GX
                raw.append((loc_id, gk, ends, "spacelike",
                            mz if etype == "X" else mx))
        if info.readout in ("X", "Z"):
            # Faulty data-qubit readout: flips the checks of the readout
            # kind that consume this final measurement.
            gk = info.readout
            marg = mz if gk == GZ else mx
            if marg > 0.0:
                t_end = info.end
                ends = []
                etype = "X" if gk == GZ else "Z"
                for p in error_face_pair(j, etype):
                    if (p, t_end) in node_ix[gk]:
                        ends.append(("n", node_ix[gk][(p, t_end)]))
                        continue
                    segs = segments.get(p, ())
                    active = any(s.a <= t_end - 1 < s.b for s in segs)
                    if active:
                        raise AssertionError(
                            f"readout of {j} unconsumed at face {p}")
                    dirn = (("W" if p[0] < j[0] else "E") if gk == GZ
                            else ("S" if p[1] < j[1] else "N"))
                    ends.append(boundary(gk, ("sp", info.name, dirn, t_end)))
                if not (ends[0][0] == "b" and ends[1][0] == "b"
                        and ends[0][1] == ends[1][1]):
                    raw.append((("readout", j), gk, tuple(sorted(ends)),
                                "readout", marg))

    if q_prob > 0.0:
        for p, segs in sorted(segments.items()):
            gk = face_kind(p)
            for seg in segs:
                for t in range(seg.a, seg.b):
                    if t > seg.a or seg.lower:
                        e0 = ("n", node_ix[gk][(p, t)])
                    else:
                        e0 = boundary(gk, ("tl", seg.birth_region, seg.a))
                    if t + 1 < seg.b or seg.upper:
                        e1 = ("n", node_ix[gk][(p, t + 1)])
                    else:
                        e1 = boundary(gk, ("tu", seg.death_region, seg.b))
                    if (e0[0] == "b" and e1[0] == "b" and e0[1] == e1[1]):
                        continue
                    raw.append((("meas", p, t), gk, tuple(sorted((e0, e1))),
                                "timelike", q_prob))

    # --- merge parallel fault locations into edges ---------------------------
    merged = {"Z": {}, "X": {}}
    for loc_id, gk, key, ekind, prob in raw:
        slot = merged[gk].setdefault(key, {"kind": ekind, "p": 0.0,
                                           "locs": []})
        slot["p"] = _xor_prob(slot["p"], prob)
        slot["locs"].append(loc_id)

    comps = {"Z": [], "X": []}
    edges = {"Z": [], "X": []}
    edge_of_loc = {"Z": {}, "X": {}}
    for gk in ("Z", "X"):
        seen = {}
        for key in sorted(merged[gk]):
            for tag, val in key:
                if tag == "b" and val not in seen:
                    seen[val] = True
                    comps[gk].append(val)
        comps[gk].sort()
        for key in sorted(merged[gk]):
            slot = merged[gk][key]
            if slot["p"] <= 0.0:
                continue
            eid = len(edges[gk])
            nds = tuple(v for tag, v in key if tag == "n")
            bds = tuple(v for tag, v in key if tag == "b")
            w = math.log((1.0 - slot["p"]) / slot["p"])
            edges[gk].append(FaultEdge(eid, nds, bds, slot["kind"],
                                       slot["p"], w, tuple(slot["locs"])))
            for loc in slot["locs"]:
                edge_of_loc[gk][loc] = eid

    zgraph = CheckGraph("Z", nodes["Z"], edges["Z"], tuple(comps["Z"]))
    xgraph = CheckGraph("X", nodes["X"], edges["X"], tuple(comps["X"]))

    # --- sampling groups ------------------------------------------------------
    pauli_groups = []
    if pauli_locs:
        zl = [edge_of_loc["Z"].get(l, -1) for l in pauli_locs]
        xl = [edge_of_loc["X"].get(l, -1) for l in pauli_locs]
        pauli_groups.append((px, pz, py, tuple(zl), tuple(xl)))
    singles = {}
    for loc_id, gk, key, ekind, prob in raw:
        if ekind == "spacelike" and loc_id in edge_of_loc["Z"] \
                and loc_id in edge_of_loc["X"]:
            continue  # handled by the correlated group
        eid = edge_of_loc[gk].get(loc_id)
        if eid is None:
            continue
        gi = 0 if gk == "Z" else 1
        singles.setdefault((gi, prob), []).append(eid)
    single_groups = [(gi, prob, tuple(eids))
                     for (gi, prob), eids in sorted(singles.items())]

    correlation_links = set()
    for loc in pauli_locs:
        ez = edge_of_loc["Z"].get(loc)
        ex = edge_of_loc["X"].get(loc)
        if ez is not None and ex is not None:
            correlation_links.add((ez, ex))

    return CheckGraphPair(zgraph, xgraph, spec, noise_params,
                          tuple(pauli_groups), tuple(single_groups),
                          frozenset(correlation_links))


# ---------------------------------------------------------------------------
# Fault distance
# ---------------------------------------------------------------------------

def fault_distance(graph):
    """Minimum number of fault edges forming an undetectable logical error
    (a path connecting two distinct boundary components).  Returns None if
    the graph has fewer than two boundary components."""
    import collections

    adj = [[] for _ in graph.nodes]
    comp_edges = {}
    touched = set()
    direct = False
    for e in graph.edges:
        touched.update(e.boundaries)
        if len(e.nodes) == 2:
            a, b = e.nodes
            adj[a].append(b)
            adj[b].append(a)
        elif len(e.nodes) == 1 and len(e.boundaries) == 1:
            comp_edges.setdefault(e.boundaries[0], []).append(e.nodes[0])
        elif len(e.boundaries) == 2:
            direct = True  # single edge spanning two components
    if len(touched) < 2:
        return None
    if direct:
        return 1
    active_comps = sorted(comp_edges)
    if len(active_comps) < 2:
        return None
    best = None
    for ci, c in enumerate(active_comps[:-1]):
        dist = {}
        queue = collections.deque()
        for n in comp_edges[c]:
            if n not in dist:
                dist[n] = 1
                queue.append(n)
        targets = {}
        for c2 in active_comps[ci + 1:]:
            for n in comp_edges[c2]:
                targets.setdefault(n, c2)
        while queue:
            n = queue.popleft()
            if n in targets:
                cand = dist[n] + 1
                if best is None or cand < best:
                    best = cand
            if best is not None and dist[n] + 1 >= best:
                continue
            for m in adj[n]:
                if m not in dist:
                    dist[m] = dist[n] + 1
                    queue.append(m)
    return best


# ---------------------------------------------------------------------------
# Symmetry verification
# ---------------------------------------------------------------------------

def _cnot_mirror(spec, pos):
    """The diagonal mirror of the L-shaped layout: an involution of the
    plane exchanging the control and target patches and the two merge
    strips while fixing the ancilla (transposed)."""
    x0 = 2 * spec.d + 2 * spec.params["w"]
    x, y = pos
    return (y + x0, x - x0)


def _cnot_cell(spec, pos):
    """Coarse spatial cell of a face position.  The layout mirror maps
    these cells onto each other exactly, but it cannot be refined to
    single lattice faces: the checkerboard kind is invariant under any
    reflection of the layout onto itself, so face-by-face the mirror maps
    Z-faces to Z-faces; the X<->Z symmetry is exact only at the
    granularity of these cells."""
    d = spec.d
    w = spec.params["w"]
    x0 = 2 * d + 2 * w
    x, y = pos
    if y >= -1 and x <= 2 * d - 2:
        return "control"
    if y <= -2 * w - 2 and x >= x0 - 1:
        return "target"
    return "center"


def verify_symmetry(pair):
    """Check whether time reversal composed with the mirror of the L-shaped
    layout and an X<->Z relabeling maps the Z graph onto the X graph,
    preserving edge probabilities and boundary-component structure.  The
    comparison is at the granularity of (layout cell, round): cell node
    counts must agree and the aggregated fault-edge statistics between
    cells/boundary components must map exactly.  Returns (ok, witness):
    on success the witness is a bidirectional node mapping realizing the
    cell bijection (applying it twice is the identity); on failure it is
    a diagnostic string."""
    spec = pair.spec
    if spec.kind != "cnot":
        return False, f"protocol kind {spec.kind!r} has no such symmetry"
    R = spec.rounds
    comp_partner = {"A": "F", "B": "D", "C": "E"}
    zg, xg = pair.zgraph, pair.xgraph
    if set(zg.comps) != set("ABC") or set(xg.comps) != set("DEF"):
        return False, (f"unexpected boundary components {zg.comps} / "
                       f"{xg.comps}")
    if len(zg.nodes) != len(xg.nodes):
        return False, (f"node count mismatch: {len(zg.nodes)} Z checks vs "
                       f"{len(xg.nodes)} X checks")

    def cells(g, mirrored):
        out = {}
        for n in g.nodes:
            if mirrored:
                key = (_cnot_cell(spec, _cnot_mirror(spec, n.position)),
                       R - n.t)
            else:
                key = (_cnot_cell(spec, n.position), n.t)
            out.setdefault(key, []).append(n.id)
        for v in out.values():
            v.sort(key=lambda i: g.nodes[i].position)
        return out

    z_cells, x_cells = cells(zg, True), cells(xg, False)
    node_cell = {"Z": {}, "X": {}}
    for cc, tag in ((z_cells, "Z"), (x_cells, "X")):
        for key, ids in cc.items():
            for i in ids:
                node_cell[tag][i] = key
    for key in sorted(set(z_cells) | set(x_cells)):
        nz = len(z_cells.get(key, ()))
        nx = len(x_cells.get(key, ()))
        if nz != nx:
            return False, (f"cell {key[0]} t={key[1]}: {nz} mirrored Z "
                           f"checks vs {nx} X checks")

    def edge_stats(g, tag, mapped):
        # Fault edges are aggregated by the rounds of their check
        # endpoints and the boundary components they touch.  Finer spatial
        # keys cannot match exactly: the face-level correspondence under
        # the mirror is offset by one lattice unit with a direction that
        # flips at patch boundaries, so individual edges near any spatial
        # cut migrate across it.
        stats = {}
        for e in g.edges:
            ends = [("t", node_cell[tag][nid][1]) for nid in e.nodes]
            for c in e.boundaries:
                ends.append(("b", comp_partner[c] if mapped else c))
            key = (tuple(sorted(ends)), round(e.p, 12))
            stats[key] = stats.get(key, 0) + 1
        return stats

    sz = edge_stats(zg, "Z", True)
    sx = edge_stats(xg, "X", False)
    if sz != sx:
        for key in sorted(set(sz) | set(sx), key=repr):
            a, b = sz.get(key, 0), sx.get(key, 0)
            if a != b:
                return False, (f"edge statistics mismatch at {key[0]} "
                               f"p={key[1]}: {a} Z-graph edges vs {b} "
                               f"X-graph edges")

    witness = {}
    for key, ids in z_cells.items():
        for a, b in zip(ids, x_cells[key]):
            witness[("Z", a)] = ("X", b)
            witness[("X", b)] = ("Z", a)
    return True, witness
