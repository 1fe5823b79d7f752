"""Boykov-Kolmogorov max-flow / min-cut over float capacities.

Nodes are integers ``0..n-1``; the source and sink are implicit. Terminal
capacities are kept as one signed residual per node (positive: residual
from the source, negative: residual to the sink), as in Kolmogorov's
reference implementation.
"""

from __future__ import annotations

from collections import deque

EPS = 1e-13

_FREE, _SRC, _SNK = 0, 1, 2
_TERMINAL, _ORPHAN, _NONE = -1, -2, -3


class Graph:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.tr = [0.0] * n_nodes
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.head: list[int] = []
        self.rcap: list[float] = []
        self.flow = 0.0
        self._source_side: list[bool] | None = None

    def add_tedge(self, i: int, cap_source: float, cap_sink: float) -> None:
        delta = self.tr[i]
        if delta > 0:
            cap_source += delta
        else:
            cap_sink -= delta
        self.flow += min(cap_source, cap_sink)
        self.tr[i] = cap_source - cap_sink

    def add_edge(self, i: int, j: int, cap: float, rev_cap: float) -> None:
        if i == j:
            raise ValueError("self loops are not allowed")
        e = len(self.head)
        self.head += [j, i]
        self.rcap += [cap, rev_cap]
        self.adj[i].append(e)
        self.adj[j].append(e + 1)

    # -- search trees -------------------------------------------------

    def _origin_is_terminal(self, v: int, pe: list[int]) -> bool:
        head = self.head
        while True:
            e = pe[v]
            if e == _TERMINAL:
                return True
            if e < 0:
                return False
            v = head[e]

    def maxflow(self) -> float:
        n = self.n
        head, rcap, tr, adj = self.head, self.rcap, self.tr, self.adj
        tree = [_FREE] * n
        pe = [_NONE] * n
        active = deque()
        is_active = [False] * n

        def activate(v):
            if not is_active[v]:
                is_active[v] = True
                active.append(v)

        for v in range(n):
            if tr[v] > EPS:
                tree[v], pe[v] = _SRC, _TERMINAL
                activate(v)
            elif tr[v] < -EPS:
                tree[v], pe[v] = _SNK, _TERMINAL
                activate(v)

        orphans: deque[int] = deque()
        while active:
            v = active[0]
            if tree[v] == _FREE:
                active.popleft()
                is_active[v] = False
                continue

            # grow
            mid = -1
            if tree[v] == _SRC:
                for e in adj[v]:
                    if rcap[e] > EPS:
                        w = head[e]
                        if tree[w] == _FREE:
                            tree[w], pe[w] = _SRC, e ^ 1
                            activate(w)
                        elif tree[w] == _SNK:
                            mid = e
                            break
            else:
                for e in adj[v]:
                    if rcap[e ^ 1] > EPS:
                        w = head[e]
                        if tree[w] == _FREE:
                            tree[w], pe[w] = _SNK, e ^ 1
                            activate(w)
                        elif tree[w] == _SRC:
                            mid = e ^ 1
                            break
            if mid < 0:
                active.popleft()
                is_active[v] = False
                continue

            # augment along source-tree path -> mid -> sink-tree path
            a, b = head[mid ^ 1], head[mid]
            bn = rcap[mid]
            u = a
            while pe[u] != _TERMINAL:
                e = pe[u]
                bn = min(bn, rcap[e ^ 1])
                u = head[e]
            bn = min(bn, tr[u])
            u = b
            while pe[u] != _TERMINAL:
                e = pe[u]
                bn = min(bn, rcap[e])
                u = head[e]
            bn = min(bn, -tr[u])

            rcap[mid] -= bn
            rcap[mid ^ 1] += bn
            u = a
            while True:
                e = pe[u]
                if e == _TERMINAL:
                    tr[u] -= bn
                    if tr[u] <= EPS:
                        tr[u] = 0.0
                        pe[u] = _ORPHAN
                        orphans.append(u)
                    break
                rcap[e ^ 1] -= bn
                rcap[e] += bn
                nxt = head[e]
                if rcap[e ^ 1] <= EPS:
                    rcap[e ^ 1] = 0.0
                    pe[u] = _ORPHAN
                    orphans.append(u)
                u = nxt
            u = b
            while True:
                e = pe[u]
                if e == _TERMINAL:
                    tr[u] += bn
                    if tr[u] >= -EPS:
                        tr[u] = 0.0
                        pe[u] = _ORPHAN
                        orphans.append(u)
                    break
                rcap[e] -= bn
                rcap[e ^ 1] += bn
                nxt = head[e]
                if rcap[e] <= EPS:
                    rcap[e] = 0.0
                    pe[u] = _ORPHAN
                    orphans.append(u)
                u = nxt
            self.flow += bn

            # adopt orphans
            while orphans:
                v = orphans.popleft()
                side = tree[v]
                found = False
                for e in adj[v]:
                    w = head[e]
                    if tree[w] != side:
                        continue
                    cap = rcap[e ^ 1] if side == _SRC else rcap[e]
                    if cap > EPS and self._origin_is_terminal(w, pe):
                        pe[v] = e
                        found = True
                        break
                if found:
                    continue
                for e in adj[v]:
                    w = head[e]
                    if tree[w] != side:
                        continue
                    cap = rcap[e ^ 1] if side == _SRC else rcap[e]
                    if cap > EPS:
                        activate(w)
                    pw = pe[w]
                    if pw >= 0 and head[pw] == v:
                        pe[w] = _ORPHAN
                        orphans.append(w)
                tree[v], pe[v] = _FREE, _NONE

        self._source_side = self._residual_reach()
        return self.flow

    def _residual_reach(self) -> list[bool]:
        """Nodes reachable from the source in the residual graph."""
        seen = [False] * self.n
        queue = deque(v for v in range(self.n) if self.tr[v] > EPS)
        for v in queue:
            seen[v] = True
        head, rcap, adj = self.head, self.rcap, self.adj
        while queue:
            v = queue.popleft()
            for e in adj[v]:
                w = head[e]
                if not seen[w] and rcap[e] > EPS:
                    seen[w] = True
                    queue.append(w)
        return seen

    def in_source_segment(self, i: int) -> bool:
        """True if node i lies on the source side of the minimal min cut."""
        if self._source_side is None:
            raise RuntimeError("call maxflow() first")
        return self._source_side[i]
