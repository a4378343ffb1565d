from pathlib import Path

import pytest

from graphpir import (
    StorageGraph,
    generate_family,
    greedy_independent_partition,
    make_edge,
    multigraph_extend,
)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

FIG3_EDGES = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (4, 5), (4, 7), (5, 6), (5, 7)]
EXAMPLE_ORDER = [2, 6, 7, 1, 4, 3, 5]


def fig3_graph() -> StorageGraph:
    return StorageGraph(7, tuple(make_edge(a, b) for a, b in FIG3_EDGES))


@pytest.fixture
def fig3():
    return fig3_graph()


@pytest.fixture
def fig3_partition(fig3):
    return greedy_independent_partition(fig3, EXAMPLE_ORDER)


def fixture_graphs() -> dict[str, StorageGraph]:
    """The small graphs the exact audits and correctness sweeps run over."""
    return {
        "path5": generate_family("path", 5),
        "cycle5": generate_family("cycle", 5),
        "star5": generate_family("star", 5),
        "k3": generate_family("complete", 3),
        "k4": generate_family("complete", 4),
        "k5": generate_family("complete", 5),
        "k6": generate_family("complete", 6),
        "k23": generate_family("bipartite", 2, 3),
        "fig3": fig3_graph(),
        "k3x2": multigraph_extend(generate_family("complete", 3), 2),
    }


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR
