import numpy as np
import pytest

from attnclust.grabcut.maxflow import PixelGraph


@pytest.fixture(scope="session")
def maxflow_warm():
    """Compile the jitted min-cut kernels before any timed test runs."""
    from attnclust.grabcut.maxflow import warmup

    warmup()


def random_pixel_graph(rng: np.random.Generator, max_pixels: int = 12) -> PixelGraph:
    """Random small graph: uniform terminal links, random-subset n-links."""
    n = int(rng.integers(1, max_pixels + 1))
    source = rng.uniform(0.0, 10.0, n)
    sink = rng.uniform(0.0, 10.0, n)
    links_u, links_v, links_w = [], [], []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.4:
                links_u.append(u)
                links_v.append(v)
                links_w.append(rng.uniform(0.0, 10.0))
    return PixelGraph(
        source_cap=source,
        sink_cap=sink,
        links_u=np.array(links_u, dtype=np.int32),
        links_v=np.array(links_v, dtype=np.int32),
        links_w=np.array(links_w, dtype=np.float64),
    )


def brute_force_min_cut(g: PixelGraph) -> tuple[float, np.ndarray]:
    """Exhaustive minimum over all 2^n source-side subsets."""
    n = g.n_pixels
    bits = np.arange(1 << n, dtype=np.uint32)
    memb = ((bits[:, None] >> np.arange(n)) & 1).astype(bool)  # True = source side
    cap = (~memb @ g.source_cap) + (memb @ g.sink_cap)
    if g.links_u.size:
        crossing = memb[:, g.links_u] != memb[:, g.links_v]
        cap = cap + crossing @ g.links_w
    best = int(np.argmin(cap))
    return float(cap[best]), memb[best]
