"""Named graph-family generators used by the CLI and the experiment sweeps."""

from __future__ import annotations

from itertools import combinations

from .graphs import StorageGraph, make_edge

FAMILY_NAMES = ("complete", "star", "bipartite", "cycle", "path")


def generate_family(name: str, *params: int) -> StorageGraph:
    """Build a canonical graph for the named family.

    complete N | star N (hub is vertex N) | bipartite N1 N2 | cycle N | path N
    """
    if name == "complete":
        (n,) = params
        if n < 2:
            raise ValueError("complete graph needs N >= 2")
        return StorageGraph(n, tuple(make_edge(a, b) for a, b in combinations(range(1, n + 1), 2)))
    if name == "star":
        (n,) = params
        if n < 2:
            raise ValueError("star graph needs N >= 2")
        return StorageGraph(n, tuple(make_edge(i, n) for i in range(1, n)))
    if name == "bipartite":
        n1, n2 = params
        if n1 < 1 or n2 < 1:
            raise ValueError("bipartite sides must be non-empty")
        left = range(1, n1 + 1)
        right = range(n1 + 1, n1 + n2 + 1)
        return StorageGraph(n1 + n2, tuple(make_edge(a, b) for a in left for b in right))
    if name == "cycle":
        (n,) = params
        if n < 3:
            raise ValueError("cycle needs N >= 3")
        edges = [make_edge(i, i + 1) for i in range(1, n)] + [make_edge(n, 1)]
        return StorageGraph(n, tuple(edges))
    if name == "path":
        (n,) = params
        if n < 2:
            raise ValueError("path needs N >= 2")
        return StorageGraph(n, tuple(make_edge(i, i + 1) for i in range(1, n)))
    raise ValueError(f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}")
