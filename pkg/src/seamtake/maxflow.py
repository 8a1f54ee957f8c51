"""Min-cut / max-flow on grid-like graphs with float capacities.

FIFO push-relabel with periodic global relabeling, JIT-compiled with numba.
Seam graphs have sparse terminals and long source-to-sink paths, which is
the regime where preflow algorithms comfortably beat augmenting-path ones.
Arcs are stored in sister pairs: arc 2i and 2i+1 are the two directions of
one edge, so residual bookkeeping is `a ^ 1`.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _build_adjacency(tail, n):  # pragma: no cover - jitted
    m = tail.size
    first = np.full(n, -1, np.int64)
    nxt = np.full(m, -1, np.int64)
    # insert in reverse so adjacency lists iterate in arc order
    for a in range(m - 1, -1, -1):
        u = tail[a]
        nxt[a] = first[u]
        first[u] = a
    return first, nxt


@njit(cache=True)
def _global_relabel(first, nxt, head, rcap, height, n, s, t):  # pragma: no cover
    """height = residual BFS distance to the sink; nodes that cannot reach
    it drain back toward the source at n + distance-to-source."""
    for i in range(n):
        height[i] = 2 * n
    height[t] = 0
    queue = np.empty(n, np.int64)
    queue[0] = t
    qh, qt = 0, 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        a = first[v]
        while a != -1:
            w = head[a]
            if rcap[a ^ 1] > 0.0 and height[w] == 2 * n:
                height[w] = height[v] + 1
                queue[qt] = w
                qt += 1
            a = nxt[a]
    height[s] = n
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        a = first[v]
        while a != -1:
            w = head[a]
            if rcap[a ^ 1] > 0.0 and height[w] == 2 * n:
                height[w] = n + (height[v] - n) + 1
                queue[qt] = w
                qt += 1
            a = nxt[a]


@njit(cache=True)
def _push_relabel(first, nxt, head, rcap, s, t):  # pragma: no cover - jitted
    n = first.size
    height = np.zeros(n, np.int64)
    excess = np.zeros(n, np.float64)
    cur = first.copy()
    in_queue = np.zeros(n, np.uint8)
    qcap = n + 16
    fifo = np.empty(qcap, np.int64)
    qh = qt = qn = 0

    _global_relabel(first, nxt, head, rcap, height, n, s, t)

    a = first[s]
    while a != -1:
        if rcap[a] > 0.0:
            v = head[a]
            d = rcap[a]
            rcap[a] = 0.0
            rcap[a ^ 1] += d
            excess[v] += d
            if v != t and v != s and in_queue[v] == 0:
                in_queue[v] = 1
                fifo[qt] = v
                qt = (qt + 1) % qcap
                qn += 1
        a = nxt[a]

    work = 0
    work_budget = 6 * n + rcap.size // 2
    while qn > 0:
        u = fifo[qh]
        qh = (qh + 1) % qcap
        qn -= 1
        in_queue[u] = 0
        if height[u] >= 2 * n:
            continue
        while excess[u] > 0.0:
            a = cur[u]
            if a == -1:
                hmin = 2 * n
                b = first[u]
                while b != -1:
                    if rcap[b] > 0.0 and height[head[b]] + 1 < hmin:
                        hmin = height[head[b]] + 1
                    b = nxt[b]
                height[u] = hmin
                cur[u] = first[u]
                work += 12
                if hmin >= 2 * n:
                    break
            else:
                v = head[a]
                work += 1
                if rcap[a] > 0.0 and height[u] == height[v] + 1:
                    d = excess[u] if excess[u] < rcap[a] else rcap[a]
                    rcap[a] -= d
                    rcap[a ^ 1] += d
                    excess[u] -= d
                    excess[v] += d
                    if v != s and v != t and in_queue[v] == 0:
                        in_queue[v] = 1
                        fifo[qt] = v
                        qt = (qt + 1) % qcap
                        qn += 1
                else:
                    cur[u] = nxt[a]
        if excess[u] > 0.0 and height[u] < 2 * n and in_queue[u] == 0:
            in_queue[u] = 1
            fifo[qt] = u
            qt = (qt + 1) % qcap
            qn += 1
        if work > work_budget:
            work = 0
            _global_relabel(first, nxt, head, rcap, height, n, s, t)
            for i in range(n):
                cur[i] = first[i]
    return excess[t]


@njit(cache=True)
def _reaches_sink(first, nxt, head, rcap, t):  # pragma: no cover - jitted
    """Nodes with a residual path to the sink (the sink side of the cut)."""
    n = first.size
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    seen[t] = True
    queue[0] = t
    qh, qt = 0, 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        a = first[v]
        while a != -1:
            w = head[a]
            if rcap[a ^ 1] > 0.0 and not seen[w]:
                seen[w] = True
                queue[qt] = w
                qt += 1
            a = nxt[a]
    return seen


class FlowNetwork:
    """Flow network over `num_nodes` pixels plus implicit terminals.

    Pairwise edges are undirected by default (equal residual both ways,
    realizing a symmetric cut cost); terminal capacities accumulate per
    node and become explicit arcs at solve time.
    """

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self._tails: list[np.ndarray] = []
        self._heads: list[np.ndarray] = []
        self._caps_fwd: list[np.ndarray] = []
        self._caps_rev: list[np.ndarray] = []
        self._src_cap = np.zeros(num_nodes, dtype=np.float64)
        self._snk_cap = np.zeros(num_nodes, dtype=np.float64)

    def add_edges(self, u, v, cap_fwd, cap_rev=None) -> None:
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.size == 0:
            return
        cap_fwd = np.ascontiguousarray(
            np.broadcast_to(np.asarray(cap_fwd, dtype=np.float64).ravel(), u.shape)
        )
        cap_rev = cap_fwd if cap_rev is None else np.ascontiguousarray(
            np.broadcast_to(np.asarray(cap_rev, dtype=np.float64).ravel(), u.shape)
        )
        self._tails.append(u)
        self._heads.append(v)
        self._caps_fwd.append(cap_fwd)
        self._caps_rev.append(cap_rev)

    def add_source_edges(self, nodes, caps) -> None:
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        np.add.at(
            self._src_cap, nodes, np.broadcast_to(np.asarray(caps, dtype=np.float64), nodes.shape)
        )

    def add_sink_edges(self, nodes, caps) -> None:
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        np.add.at(
            self._snk_cap, nodes, np.broadcast_to(np.asarray(caps, dtype=np.float64), nodes.shape)
        )

    @property
    def num_edges(self) -> int:
        return sum(t.size for t in self._tails)

    def memory_estimate_bytes(self) -> int:
        """Footprint of the solver arrays this graph expands to."""
        terminal = int(np.count_nonzero(self._src_cap) + np.count_nonzero(self._snk_cap))
        arcs = 2 * (self.num_edges + terminal)
        return (self.num_nodes + 2) * 42 + arcs * 24

    def solve(self) -> tuple[float, np.ndarray]:
        """Run max-flow. Returns (flow value, source-side membership): nodes
        with no residual path to the sink sit on the source side."""
        n = self.num_nodes
        s, t = n, n + 1
        src_nodes = np.flatnonzero(self._src_cap)
        snk_nodes = np.flatnonzero(self._snk_cap)
        tails = list(self._tails) + [np.full(src_nodes.size, s), snk_nodes]
        heads = list(self._heads) + [src_nodes, np.full(snk_nodes.size, t)]
        caps_f = list(self._caps_fwd) + [self._src_cap[src_nodes], self._snk_cap[snk_nodes]]
        caps_r = list(self._caps_rev) + [np.zeros(src_nodes.size), np.zeros(snk_nodes.size)]
        tails_e = np.concatenate(tails) if tails else np.empty(0, np.int64)
        heads_e = np.concatenate(heads) if heads else np.empty(0, np.int64)
        cf = np.concatenate(caps_f) if caps_f else np.empty(0, np.float64)
        cr = np.concatenate(caps_r) if caps_r else np.empty(0, np.float64)
        m = tails_e.size
        tail = np.empty(2 * m, dtype=np.int64)
        head = np.empty(2 * m, dtype=np.int64)
        rcap = np.empty(2 * m, dtype=np.float64)
        tail[0::2] = tails_e
        head[0::2] = heads_e
        rcap[0::2] = cf
        tail[1::2] = heads_e
        head[1::2] = tails_e
        rcap[1::2] = cr
        first, nxt = _build_adjacency(tail.astype(np.int64), n + 2)
        flow = _push_relabel(first, nxt, head.astype(np.int64), rcap, s, t)
        sink_side = _reaches_sink(first, nxt, head.astype(np.int64), rcap, t)
        return float(flow), ~sink_side[:n]
