"""Shared test helpers: random detector graphs and a brute-force oracle
for the minimum-weight annihilating edge set."""

from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest

from surgesim import _core


def random_detector_graph(rng, max_nodes=30, max_comps=3, ensure_boundary=True):
    """A connected random weighted detector graph plus its edge list.

    Returns (graph, edges) where edges is a list of (u, v, w) with
    v < 0 meaning boundary component -1 - v.
    """
    n = rng.randint(2, max_nodes)
    ncomp = rng.randint(1, max_comps)
    edges = []
    # random spanning tree keeps the graph connected
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u = order[rng.randrange(i)]
        edges.append((order[i], u, round(rng.uniform(0.05, 10.0), 4)))
    extra = rng.randint(0, 2 * n)
    for _ in range(extra):
        u, v = rng.sample(range(n), 2)
        edges.append((u, v, round(rng.uniform(0.05, 10.0), 4)))
    nb = rng.randint(1 if ensure_boundary else 0, max(1, n // 3))
    for _ in range(nb):
        u = rng.randrange(n)
        c = rng.randrange(ncomp)
        edges.append((u, -1 - c, round(rng.uniform(0.05, 10.0), 4)))
    eu = [e[0] for e in edges]
    ev = [e[1] for e in edges]
    w = [e[2] for e in edges]
    graph = _core.DetectorGraph(n, ncomp, eu, ev, w)
    return graph, edges


def oracle_min_weight(n, edges, defects):
    """Brute-force minimum total weight of an edge set annihilating the
    given defects.

    Node-to-node distances use only internal edges (a chain through a
    boundary is two separate strings, covered by the singleton option);
    each defect may instead terminate on its cheapest boundary route.
    """
    INF = math.inf
    dist = [[INF] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    bcost = [INF] * n
    adj = [[] for _ in range(n)]
    for u, v, w in edges:
        if v < 0:
            bcost[u] = min(bcost[u], w)
        else:
            adj[u].append((v, w))
            adj[v].append((u, w))
    import heapq
    for s in range(n):
        dv = dist[s]
        heap = [(0.0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dv[u]:
                continue
            for v, w in adj[u]:
                nd = d + w
                if nd < dv[v]:
                    dv[v] = nd
                    heapq.heappush(heap, (nd, v))
    # cheapest boundary termination may route through other nodes
    bterm = [min((dist[i][j] + bcost[j] for j in range(n)), default=INF)
             for i in range(n)]

    best = [INF]

    def rec(remaining, total):
        if total >= best[0]:
            return
        if not remaining:
            best[0] = total
            return
        i = remaining[0]
        rest = remaining[1:]
        rec(rest, total + bterm[i])
        for k, j in enumerate(rest):
            d = dist[i][j]
            if d < INF:
                rec(rest[:k] + rest[k + 1:], total + d)

    rec(tuple(defects), 0.0)
    return best[0]


@pytest.fixture
def rng():
    return random.Random(20240817)
