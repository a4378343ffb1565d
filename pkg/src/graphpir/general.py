"""Variable-download retrieval on arbitrary storage graphs at unit subpacketization.

The vertices are split into ordered disjoint independent sets I_1..I_kappa
(each maximal in the remaining suffix subgraph). Query vectors are built set
by set:

* every server with downstream edges (edges toward later sets) flips one fair
  coin per multiplicity group and assigns that coin to all its downstream
  edges in the group;
* every upstream edge slot copies the bit the other (earlier-set) endpoint
  assigned to the same edge, flipped exactly when the edge is the desired
  file; the flip always lands on the later-set endpoint.

A server whose query vector is all-zero is not contacted at all; any other
server returns the XOR of its files weighted by the received bits. XORing
all responses cancels every file whose two endpoint bits agree, leaving only
the desired file, whose endpoint bits differ by the flip.

Multigraphs with r parallel edges per adjacent pair use r coins per server,
one per parallel-edge group, and the flip lands on exactly the desired
parallel edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Callable, Mapping

from .distributions import NULL_ENCODING
from .errors import DecodeError, ProtocolError
from .graphs import (
    Edge,
    FileStore,
    IndependentPartition,
    StorageGraph,
    classify_edges,
)

CoinKey = tuple[int, int]  # (vertex, multiplicity group)


def default_group(e: Edge) -> int:
    """Group of a downstream edge: its multiplicity index."""
    return e.k


def coin_keys(
    g: StorageGraph, p: IndependentPartition, group_of: Callable[[Edge], int] = default_group
) -> tuple[CoinKey, ...]:
    """Coin draw order: vertices in partition order, groups ascending.

    A vertex with no downstream edges draws no coins.
    """
    keys: list[CoinKey] = []
    for n in p.vertices_in_order():
        down, _ = classify_edges(g, p, n)
        groups = sorted({group_of(e) for e in down})
        keys.extend((n, k) for k in groups)
    return tuple(keys)


def draw_coins(
    g: StorageGraph,
    p: IndependentPartition,
    rng: Random,
    group_of: Callable[[Edge], int] = default_group,
) -> dict[CoinKey, int]:
    """One fair bit per coin key, drawn in canonical order from the seeded stream."""
    return {key: rng.getrandbits(1) for key in coin_keys(g, p, group_of)}


@dataclass(frozen=True)
class GraphQueryVector:
    """Query for one server: bits over its canonical edge slots (downstream then upstream)."""

    server: int
    slots: tuple[Edge, ...]
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.slots) != len(self.bits):
            raise ValueError("slot/bit length mismatch")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("query bits must be 0 or 1")

    @property
    def is_null(self) -> bool:
        return not any(self.bits)

    def bit_for(self, e: Edge) -> int:
        return self.bits[self.slots.index(e)]

    def encode(self) -> str:
        if self.is_null:
            return NULL_ENCODING
        return "bits:" + "".join(str(b) for b in self.bits)


def _assemble_queries(
    theta: Edge,
    g: StorageGraph,
    p: IndependentPartition,
    coins: Mapping[CoinKey, int],
    group_of: Callable[[Edge], int],
    shift_on_later_side: bool,
) -> dict[int, GraphQueryVector]:
    queries: dict[int, GraphQueryVector] = {}
    for n in p.vertices_in_order():
        down, up = classify_edges(g, p, n)
        bits: list[int] = []
        for e in down:
            b = coins[(n, group_of(e))]
            if e == theta and not shift_on_later_side:
                b ^= 1
            bits.append(b)
        for e in up:
            m = e.other(n)
            b = coins[(m, group_of(e))]
            if e == theta and shift_on_later_side:
                b ^= 1
            bits.append(b)
        queries[n] = GraphQueryVector(n, down + up, tuple(bits))
    return queries


def queries_from_coins(
    theta: Edge,
    g: StorageGraph,
    p: IndependentPartition,
    coins: Mapping[CoinKey, int],
) -> dict[int, GraphQueryVector]:
    """Deterministic query construction given the coin outcomes.

    This is the function the exhaustive privacy enumerator iterates; sampling
    is just this applied to freshly drawn coins.
    """
    if theta not in g.edges:
        raise ValueError(f"theta {theta} is not an edge of the graph")
    return _assemble_queries(theta, g, p, coins, default_group, shift_on_later_side=True)


def generate_queries(
    theta: Edge, g: StorageGraph, p: IndependentPartition, rng: Random
) -> dict[int, GraphQueryVector]:
    """Sample one run's query vectors for desired file theta."""
    return queries_from_coins(theta, g, p, draw_coins(g, p, rng))


@dataclass(frozen=True)
class QueryScheme:
    """A coin layout plus a query builder; audits can swap in mutated variants."""

    name: str
    coin_keys: Callable[[StorageGraph, IndependentPartition], tuple[CoinKey, ...]]
    build: Callable[
        [Edge, StorageGraph, IndependentPartition, Mapping[CoinKey, int]],
        dict[int, GraphQueryVector],
    ]


HONEST_SCHEME = QueryScheme("honest", coin_keys, queries_from_coins)


def server_respond(n: int, q: GraphQueryVector, fs: FileStore) -> int | None:
    """XOR of the server's files weighted by the query bits; None on a null query."""
    if q.server != n:
        raise ProtocolError(f"server {n} received a query addressed to {q.server}")
    if q.is_null:
        return None
    acc = 0
    for e, b in zip(q.slots, q.bits):
        if n not in (e.u, e.v):
            raise ProtocolError(f"server {n} queried for file {e} it does not store")
        if b:
            acc ^= fs[e]
    return acc


def decode(responses: Mapping[int, int]) -> int:
    """XOR of all non-null responses; equals the desired payload by construction."""
    if not responses:
        raise DecodeError("no responses to decode")
    acc = 0
    for payload in responses.values():
        acc ^= payload
    return acc


def graph_file_store(g: StorageGraph, rng: Random, l_bits: int = 1) -> FileStore:
    """Independent random payloads for every file (edge) of the graph."""
    return FileStore.random(g.edges, l_bits, rng)


@dataclass(frozen=True)
class GraphTranscript:
    theta: Edge
    queries: dict[int, GraphQueryVector]
    responses: dict[int, int]
    decoded: int
    download_units: int


def run_graph_transcript(
    theta: Edge, g: StorageGraph, p: IndependentPartition, fs: FileStore, rng: Random
) -> GraphTranscript:
    """Execute queries, responses, and decoding for one retrieval."""
    queries = generate_queries(theta, g, p, rng)
    responses = {}
    for n, q in queries.items():
        answer = server_respond(n, q, fs)
        if answer is not None:
            responses[n] = answer
    return GraphTranscript(theta, queries, responses, decode(responses), len(responses))


def null_query_probability(n: int, g: StorageGraph, p: IndependentPartition) -> Fraction:
    """Exact probability that server n's query is all-zero.

    The query is null iff every coin it depends on hits a forced value. Those
    coins are: one per distinct group among n's own downstream edges, plus the
    earlier endpoint's coin for each upstream edge. The coin keys are counted
    explicitly rather than assuming a closed form, since the key sets decide
    independence.
    """
    down, up = classify_edges(g, p, n)
    constraining: set[CoinKey] = {(n, default_group(e)) for e in down}
    constraining |= {(e.other(n), default_group(e)) for e in up}
    return Fraction(1, 2 ** len(constraining))


def expected_download(g: StorageGraph, p: IndependentPartition) -> Fraction:
    """Exact expected download in file units: sum of non-null probabilities."""
    total = Fraction(0)
    for n in p.vertices_in_order():
        total += 1 - null_query_probability(n, g, p)
    return total


@dataclass(frozen=True)
class SchemeBound:
    """One closed-form rate bound, with whether this run may assert it."""

    name: str
    value: Fraction
    assertable: bool
    satisfied: bool


@dataclass(frozen=True)
class GraphRateReport:
    download: Fraction
    rate: Fraction
    alpha: int
    alpha_exact: bool
    bounds: tuple[SchemeBound, ...]

    @property
    def asserted_ok(self) -> bool:
        return all(b.satisfied for b in self.bounds if b.assertable)


def rate_bounds(
    g: StorageGraph,
    p: IndependentPartition,
    alpha: int,
    alpha_exact: bool,
) -> GraphRateReport:
    """Exact achieved rate next to the scheme's guaranteed lower bounds.

    The independent-set bound 1/(N - alpha * 2^-r) is only guaranteed when the
    first partition set is a maximum independent set, so it is marked
    assertable only when alpha is exact and the first set attains it. The
    complete-multigraph closed form 1/(N - 2^(1-r)) is known to overstate the
    achievable rate for r >= 2, so it is assertable only at r = 1 (where it
    reads 1/(N-1)).
    """
    d = expected_download(g, p)
    rate = 1 / d
    n = g.n_servers
    alpha_backed = alpha_exact and len(p.sets[0]) == alpha
    alpha_bound = Fraction(2**g.r, n * 2**g.r - alpha)
    closed_form = Fraction(2 ** (g.r - 1), n * 2 ** (g.r - 1) - 1)
    bounds = (
        SchemeBound(
            "independent_set_lower",
            alpha_bound,
            assertable=alpha_backed,
            satisfied=rate >= alpha_bound,
        ),
        SchemeBound(
            "complete_family_lower",
            closed_form,
            assertable=g.r == 1 and alpha_backed,
            satisfied=rate >= closed_form,
        ),
    )
    return GraphRateReport(d, rate, alpha, alpha_exact, bounds)
