import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from pamcut.graph import Graph

settings.register_profile("pamcut", max_examples=60, deadline=None)
settings.load_profile("pamcut")


def random_pm1_graph(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi graph with uniform +-1 weights (the G-set flavor)."""
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, int(rng.integers(0, 2)) * 2 - 1))
    if not edges:
        edges = [(0, 1, 1)]
    return Graph.from_edges(n, edges)


def random_pm1_graph_large(n: int, m: int, seed: int) -> Graph:
    """Vectorized builder for big sparse +-1 graphs (~m edges after dedup)."""
    rng = np.random.default_rng(seed)
    us = rng.integers(0, n, size=3 * m)
    vs = rng.integers(0, n, size=3 * m)
    keep = us != vs
    lo = np.minimum(us[keep], vs[keep]).astype(np.int64)
    hi = np.maximum(us[keep], vs[keep]).astype(np.int64)
    keys = np.unique(lo * n + hi)[:m]
    ws = rng.integers(0, 2, size=keys.shape[0]) * 2 - 1
    edges = [(int(k // n), int(k % n), int(w)) for k, w in zip(keys, ws)]
    return Graph.from_edges(n, edges)


TRIANGLE_TEXT = "3 3\n1 2 1\n2 3 1\n1 3 1"


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])


def _g63_candidates():
    env = os.environ.get("PAMCUT_CACHE")
    if env:
        yield Path(env) / "G63"
    from pamcut.catalog import default_cache_dir

    yield default_cache_dir() / "G63"
    yield Path(__file__).resolve().parent.parent / "data" / "G63"


@pytest.fixture(scope="session")
def g63():
    """The real G63 instance, from cache or network; skip when unobtainable.

    Warm the cache with `pamcut fetch G63` (or drop the file into ./data/)
    to enable the record-verification tests.
    """
    from pamcut.catalog import CATALOG, FetchError, fetch_instance
    from pamcut.graph import parse_gset

    for path in _g63_candidates():
        if path.exists():
            g = parse_gset(path.read_text())
            entry = CATALOG["G63"]
            if (g.n, g.m) != (entry.expected_n, entry.expected_m):
                pytest.fail(f"cached G63 at {path} has n={g.n}, m={g.m}")
            return g
    try:
        path = fetch_instance("G63")
    except FetchError as exc:
        pytest.skip(
            f"G63 instance unavailable (no cached copy, download failed: {exc}); "
            "run `pamcut fetch G63` with network access, or place the file at "
            "./data/G63, then re-run"
        )
    return parse_gset(path.read_text())
