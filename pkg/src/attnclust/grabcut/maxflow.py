"""Max-flow / min-cut over pixel graphs with terminal links.

Dinic's algorithm (BFS level graph + blocking flow) on a flat arc-array
representation.  The hot loops are numba-jitted when numba is available
and run as plain Python otherwise; both paths execute the same code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

EPS = 1e-12  # residual capacities at or below this are treated as saturated


@dataclass(frozen=True)
class PixelGraph:
    """One node per pixel plus implicit source/sink terminals.

    ``source_cap[p]`` / ``sink_cap[p]`` are the terminal-link capacities of
    pixel p; n-links are undirected (symmetric capacity both ways), stored
    once as (links_u[i], links_v[i], links_w[i]).
    """

    source_cap: np.ndarray
    sink_cap: np.ndarray
    links_u: np.ndarray
    links_v: np.ndarray
    links_w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_cap", np.ascontiguousarray(self.source_cap, dtype=np.float64))
        object.__setattr__(self, "sink_cap", np.ascontiguousarray(self.sink_cap, dtype=np.float64))
        object.__setattr__(self, "links_u", np.ascontiguousarray(self.links_u, dtype=np.int32))
        object.__setattr__(self, "links_v", np.ascontiguousarray(self.links_v, dtype=np.int32))
        object.__setattr__(self, "links_w", np.ascontiguousarray(self.links_w, dtype=np.float64))
        n = self.source_cap.shape[0]
        if self.sink_cap.shape[0] != n:
            raise ValueError("source_cap and sink_cap must have one entry per pixel")
        for caps in (self.source_cap, self.sink_cap, self.links_w):
            if caps.size and (not np.all(np.isfinite(caps)) or np.any(caps < 0)):
                raise ValueError("capacities must be finite and non-negative")
        if self.links_u.shape != self.links_v.shape or self.links_u.shape != self.links_w.shape:
            raise ValueError("n-link arrays must have equal length")
        if self.links_u.size:
            if self.links_u.min() < 0 or self.links_v.min() < 0:
                raise ValueError("n-link endpoints out of range")
            if max(self.links_u.max(), self.links_v.max()) >= n:
                raise ValueError("n-link endpoints out of range")
            if np.any(self.links_u == self.links_v):
                raise ValueError("self-loop n-link")

    @property
    def n_pixels(self) -> int:
        return self.source_cap.shape[0]


@njit(cache=True)
def _build_adjacency(tails, n_nodes, m):  # pragma: no cover - exercised via max_flow_min_cut
    head = np.full(n_nodes, -1, dtype=np.int32)
    nxt = np.full(m, -1, dtype=np.int32)
    for i in range(m - 1, -1, -1):
        u = tails[i]
        nxt[i] = head[u]
        head[u] = i
    return head, nxt


@njit(cache=True)
def _dinic(head, nxt, to, cap, n_nodes, s, t):  # pragma: no cover - exercised via max_flow_min_cut
    level = np.empty(n_nodes, dtype=np.int32)
    iters = np.empty(n_nodes, dtype=np.int32)
    queue = np.empty(n_nodes, dtype=np.int32)
    path = np.empty(n_nodes, dtype=np.int32)
    total = 0.0
    while True:
        for i in range(n_nodes):
            level[i] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            e = head[u]
            while e != -1:
                v = to[e]
                if cap[e] > EPS and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
                e = nxt[e]
        if level[t] < 0:
            return total
        for i in range(n_nodes):
            iters[i] = head[i]
        depth = 0
        u = s
        while True:
            if u == t:
                bottleneck = np.inf
                for i in range(depth):
                    if cap[path[i]] < bottleneck:
                        bottleneck = cap[path[i]]
                for i in range(depth):
                    e = path[i]
                    cap[e] -= bottleneck
                    cap[e ^ 1] += bottleneck
                total += bottleneck
                j = 0
                while j < depth and cap[path[j]] > EPS:
                    j += 1
                depth = j
                u = s if depth == 0 else to[path[depth - 1]]
                continue
            e = iters[u]
            while e != -1 and not (cap[e] > EPS and level[to[e]] == level[u] + 1):
                e = nxt[e]
            iters[u] = e
            if e != -1:
                path[depth] = e
                depth += 1
                u = to[e]
            else:
                if u == s:
                    break
                level[u] = -1
                depth -= 1
                dead_arc = path[depth]
                u = s if depth == 0 else to[path[depth - 1]]
                iters[u] = nxt[dead_arc]


@njit(cache=True)
def _residual_reachable(head, nxt, to, cap, n_nodes, s):  # pragma: no cover
    seen = np.zeros(n_nodes, dtype=np.bool_)
    queue = np.empty(n_nodes, dtype=np.int32)
    seen[s] = True
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > EPS and not seen[v]:
                seen[v] = True
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return seen


def _build_arcs(g: PixelGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, int, int]:
    p = g.n_pixels
    n_nodes = p + 2
    s, t = p, p + 1
    m = 4 * p + 2 * g.links_u.size
    tails = np.empty(m, dtype=np.int32)
    to = np.empty(m, dtype=np.int32)
    cap = np.empty(m, dtype=np.float64)
    pix = np.arange(p, dtype=np.int32)
    # arc pairs (2i, 2i+1) are each other's residuals
    tails[0 : 4 * p : 4] = s
    to[0 : 4 * p : 4] = pix
    cap[0 : 4 * p : 4] = g.source_cap
    tails[1 : 4 * p : 4] = pix
    to[1 : 4 * p : 4] = s
    cap[1 : 4 * p : 4] = 0.0
    tails[2 : 4 * p : 4] = pix
    to[2 : 4 * p : 4] = t
    cap[2 : 4 * p : 4] = g.sink_cap
    tails[3 : 4 * p : 4] = t
    to[3 : 4 * p : 4] = pix
    cap[3 : 4 * p : 4] = 0.0
    base = 4 * p
    tails[base::2] = g.links_u
    to[base::2] = g.links_v
    cap[base::2] = g.links_w
    tails[base + 1 :: 2] = g.links_v
    to[base + 1 :: 2] = g.links_u
    cap[base + 1 :: 2] = g.links_w
    return tails, to, cap, n_nodes, s, t


def max_flow_min_cut(g: PixelGraph) -> tuple[np.ndarray, float]:
    """Minimum s/t cut of the pixel graph.

    Returns (mask, flow) where mask[p] is True for pixels on the source
    side and flow equals the cut capacity.
    """
    tails, to, cap, n_nodes, s, t = _build_arcs(g)
    head, nxt = _build_adjacency(tails, n_nodes, tails.size)
    flow = _dinic(head, nxt, to, cap, n_nodes, s, t)
    seen = _residual_reachable(head, nxt, to, cap, n_nodes, s)
    return np.asarray(seen[: g.n_pixels]), float(flow)


def cut_capacity(g: PixelGraph, mask: np.ndarray) -> float:
    """Capacity of the cut induced by a source-side pixel mask."""
    mask = np.asarray(mask, dtype=bool)
    total = float(g.source_cap[~mask].sum()) + float(g.sink_cap[mask].sum())
    if g.links_u.size:
        crossing = mask[g.links_u] != mask[g.links_v]
        total += float(g.links_w[crossing].sum())
    return total


def warmup() -> None:
    """Trigger JIT compilation on a trivial graph (no-op without numba)."""
    g = PixelGraph(
        source_cap=np.array([1.0]),
        sink_cap=np.array([1.0]),
        links_u=np.empty(0, dtype=np.int32),
        links_v=np.empty(0, dtype=np.int32),
        links_w=np.empty(0, dtype=np.float64),
    )
    max_flow_min_cut(g)
