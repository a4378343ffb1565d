"""Storage graphs, file stores, and independent-set decomposition.

Servers are vertices 1..N; every file lives on exactly two servers, so files
are (multi)edges. An edge is the triple (u, v, k) with u < v, where k is the
1-based multiplicity index distinguishing parallel edges (k = 1 everywhere in
a simple graph).

Both retrieval schemes need client and servers to agree on the meaning of
each query-vector slot, so incidence ordering is fixed globally:

* without a partition: incident edges sorted by (neighbor id, multiplicity);
* with a partition attached: downstream edges first (neighbors in strictly
  later independent sets), then upstream edges, each group sorted by
  (neighbor id, multiplicity).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import ParseError, SizeLimitError

MAX_EXACT_MIS_VERTICES = 24


class Edge(NamedTuple):
    """Undirected edge {u, v} with multiplicity index k; always u < v."""

    u: int
    v: int
    k: int = 1

    def other(self, n: int) -> int:
        if n == self.u:
            return self.v
        if n == self.v:
            return self.u
        raise ValueError(f"vertex {n} is not an endpoint of {self}")

    def __str__(self) -> str:
        return f"{self.u},{self.v}" if self.k == 1 else f"{self.u},{self.v},{self.k}"


def make_edge(a: int, b: int, k: int = 1) -> Edge:
    """Normalize endpoint order; reject self-loops and bad multiplicities."""
    if a == b:
        raise ValueError(f"self-loop at vertex {a}")
    if k < 1:
        raise ValueError(f"multiplicity index must be >= 1, got {k}")
    return Edge(min(a, b), max(a, b), k)


@dataclass(frozen=True)
class StorageGraph:
    """Immutable storage graph: N servers, files as (multi)edges."""

    n_servers: int
    edges: tuple[Edge, ...]
    r: int = field(init=False, default=1)

    def __post_init__(self):
        if self.n_servers < 1:
            raise ValueError("graph needs at least one server")
        seen: set[Edge] = set()
        per_pair: dict[tuple[int, int], list[int]] = {}
        for e in self.edges:
            if not (1 <= e.u < e.v <= self.n_servers):
                raise ValueError(f"edge {e} has a vertex outside 1..{self.n_servers}")
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            per_pair.setdefault((e.u, e.v), []).append(e.k)
        # Uniform multiplicity: every adjacent pair carries exactly r parallel
        # edges indexed 1..r (r = 1 means simple graph).
        r = 1
        if per_pair:
            counts = {len(ks) for ks in per_pair.values()}
            if len(counts) != 1:
                raise ValueError("all adjacent pairs must have the same number of parallel edges")
            r = counts.pop()
            for pair, ks in per_pair.items():
                if sorted(ks) != list(range(1, r + 1)):
                    raise ValueError(f"pair {pair} must carry multiplicity indices 1..{r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @property
    def n_files(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n_servers + 1)

    def incident_edges(self, n: int) -> tuple[Edge, ...]:
        """Incident edges of n in canonical (neighbor, multiplicity) order."""
        return self._incidence().get(n, ())

    def degree(self, n: int) -> int:
        return len(self.incident_edges(n))

    def neighbors(self, n: int) -> tuple[int, ...]:
        return tuple(sorted({e.other(n) for e in self.incident_edges(n)}))

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.neighbors(a)

    def _incidence(self) -> dict[int, tuple[Edge, ...]]:
        cached = getattr(self, "_incidence_cache", None)
        if cached is None:
            by_vertex: dict[int, list[Edge]] = {}
            for e in self.edges:
                by_vertex.setdefault(e.u, []).append(e)
                by_vertex.setdefault(e.v, []).append(e)
            cached = {
                n: tuple(sorted(es, key=lambda e, n=n: (e.other(n), e.k)))
                for n, es in by_vertex.items()
            }
            object.__setattr__(self, "_incidence_cache", cached)
        return cached


@dataclass(frozen=True)
class FileStore:
    """Payloads for a set of files, each an l_bits-wide bit string (as int).

    Keys are whatever identifies a file in the owning scheme: Edge triples for
    graph schemes, plain indices 1..K for the star scheme. All payloads share
    the same width; XOR of payloads is integer XOR.
    """

    payloads: Mapping[object, int]
    l_bits: int = 1

    def __post_init__(self):
        if self.l_bits < 1:
            raise ValueError("l_bits must be positive")
        limit = 1 << self.l_bits
        for key, value in self.payloads.items():
            if not (0 <= value < limit):
                raise ValueError(f"payload for {key} does not fit in {self.l_bits} bits")
        object.__setattr__(self, "payloads", dict(self.payloads))

    def __getitem__(self, key) -> int:
        return self.payloads[key]

    def __contains__(self, key) -> bool:
        return key in self.payloads

    @classmethod
    def random(cls, keys: Iterable[object], l_bits: int, rng) -> "FileStore":
        """Independent uniform payloads, one per key, drawn from rng."""
        return cls({key: rng.getrandbits(l_bits) for key in keys}, l_bits)


@dataclass(frozen=True)
class IndependentPartition:
    """Ordered disjoint independent sets I_1..I_kappa covering all non-isolated vertices."""

    graph: StorageGraph
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(s) for s in self.sets))
        validate_partition(self.graph, self.sets)
        index = {}
        for s, members in enumerate(self.sets, start=1):
            for n in members:
                index[n] = s
        object.__setattr__(self, "_set_index", index)

    @property
    def kappa(self) -> int:
        return len(self.sets)

    def set_of(self, n: int) -> int:
        """1-based index of the independent set containing n."""
        try:
            return self._set_index[n]
        except KeyError:
            raise ValueError(f"vertex {n} is not in the partition") from None

    def __contains__(self, n: int) -> bool:
        return n in self._set_index

    def vertices_in_order(self) -> tuple[int, ...]:
        """All partitioned vertices, set by set, in stored order."""
        return tuple(n for members in self.sets for n in members)


def validate_partition(g: StorageGraph, sets: Sequence[Sequence[int]]) -> None:
    """Check every IndependentPartition invariant; raise ValueError on failure."""
    seen: set[int] = set()
    for members in sets:
        if not members:
            raise ValueError("empty independent set in partition")
        for n in members:
            if not (1 <= n <= g.n_servers):
                raise ValueError(f"vertex {n} out of range")
            if n in seen:
                raise ValueError(f"vertex {n} appears in two sets")
            seen.add(n)
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if g.adjacent(a, b):
                    raise ValueError(f"set {tuple(members)} is not independent: edge {{{a},{b}}}")
    non_isolated = {n for n in g.vertices if g.degree(n) > 0}
    if seen != non_isolated:
        missing = non_isolated - seen
        extra = seen - non_isolated
        if missing:
            raise ValueError(f"partition misses vertices {sorted(missing)}")
        raise ValueError(f"partition includes isolated vertices {sorted(extra)}")
    # Maximality within each suffix subgraph, which also guarantees that every
    # vertex in I_s (s >= 2) has an upstream edge.
    for s, members in enumerate(sets):
        suffix = set()
        for later in sets[s:]:
            suffix.update(later)
        member_set = set(members)
        for n in suffix - member_set:
            if not any(g.adjacent(n, m) for m in member_set):
                raise ValueError(
                    f"set {s + 1} is not maximal in its suffix subgraph: vertex {n} could join"
                )
    for s, members in enumerate(sets[1:], start=2):
        earlier = seen - {n for later in sets[s - 1 :] for n in later}
        for n in members:
            if not any(g.adjacent(n, m) for m in earlier):
                raise ValueError(f"vertex {n} in set {s} has no upstream edge")


def parse_edge_list(text: str, max_multiplicity: int = 1) -> StorageGraph:
    """Parse the external edge-list format.

    First non-comment line: N. Each following non-comment line: ``i j`` or
    ``i j k`` (1-based vertex ids, optional multiplicity index). ``#`` starts
    a comment; blank lines are skipped.

    A bare pair repeated on several lines is numbered as parallel edges when
    `max_multiplicity` allows it; at the default of 1 a repeated pair is a
    duplicate-edge error.
    """
    n_servers = None
    edges: list[Edge] = []
    bare_counts: dict[tuple[int, int], int] = {}
    triples: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_servers is None:
            if len(parts) != 1:
                raise ParseError("expected a single integer vertex count", lineno)
            try:
                n_servers = int(parts[0])
            except ValueError:
                raise ParseError(f"bad vertex count {parts[0]!r}", lineno) from None
            if n_servers < 1:
                raise ParseError("vertex count must be positive", lineno)
            continue
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'i j' or 'i j k', got {line!r}", lineno)
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", lineno) from None
        i, j = nums[0], nums[1]
        if i == j:
            raise ParseError(f"self-loop at vertex {i}", lineno)
        if not (1 <= i <= n_servers and 1 <= j <= n_servers):
            raise ParseError(f"vertex id out of range 1..{n_servers}", lineno)
        if len(nums) == 3:
            k = nums[2]
            if k < 1:
                raise ParseError(f"multiplicity index must be >= 1, got {k}", lineno)
        else:
            pair = (min(i, j), max(i, j))
            k = bare_counts.get(pair, 0) + 1
            if k > max_multiplicity:
                raise ParseError(f"duplicate edge {pair[0]} {pair[1]}", lineno)
            bare_counts[pair] = k
        edge = make_edge(i, j, k)
        if edge in triples:
            raise ParseError(f"duplicate edge {edge}", lineno)
        triples.add(edge)
        edges.append(edge)
    if n_servers is None:
        raise ParseError("empty edge-list input")
    try:
        return StorageGraph(n_servers, tuple(edges))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_edge_list(g: StorageGraph) -> str:
    """Canonical text form; parse(serialize(g)) reproduces g."""
    lines = [str(g.n_servers)]
    for e in g.edges:
        lines.append(f"{e.u} {e.v}" if g.r == 1 else f"{e.u} {e.v} {e.k}")
    return "\n".join(lines) + "\n"


def greedy_independent_partition(
    g: StorageGraph, order: Sequence[int] | None = None
) -> IndependentPartition:
    """Split the non-isolated vertices into maximal independent sets, greedily.

    Vertices are examined in `order` (default ascending id); each pass builds a
    maximal independent set of the subgraph induced by the still-unassigned
    vertices, so every set is maximal within its suffix subgraph. Deterministic
    given the order. Isolated vertices are stripped with a warning: they store
    no files and are never queried.
    """
    if order is None:
        order = list(g.vertices)
    else:
        order = list(order)
        if sorted(order) != list(g.vertices):
            raise ValueError("order must be a permutation of all vertices")
    isolated = [n for n in order if g.degree(n) == 0]
    if isolated:
        warnings.warn(f"stripping isolated vertices {isolated}: they hold no files")
        order = [n for n in order if g.degree(n) > 0]
    remaining = list(order)
    sets: list[tuple[int, ...]] = []
    while remaining:
        chosen: list[int] = []
        for n in remaining:
            if not any(g.adjacent(n, m) for m in chosen):
                chosen.append(n)
        sets.append(tuple(chosen))
        chosen_set = set(chosen)
        remaining = [n for n in remaining if n not in chosen_set]
    return IndependentPartition(g, tuple(sets))


def exact_max_independent_set(g: StorageGraph) -> frozenset[int]:
    """A maximum independent set, by branch and bound. Guarded at N <= 24."""
    if g.n_servers > MAX_EXACT_MIS_VERTICES:
        raise SizeLimitError(
            f"exact maximum independent set is limited to N <= {MAX_EXACT_MIS_VERTICES}, "
            f"got N = {g.n_servers}"
        )
    verts = list(g.vertices)
    pos = {n: i for i, n in enumerate(verts)}
    adj = [0] * len(verts)
    for e in set((e.u, e.v) for e in g.edges):
        a, b = pos[e[0]], pos[e[1]]
        adj[a] |= 1 << b
        adj[b] |= 1 << a

    def search(avail: int) -> int:
        best = 0
        while avail:
            # Vertices of degree <= 1 within avail are always safe to take.
            reduced = False
            m = avail
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                if not avail >> v & 1:
                    continue
                nb = adj[v] & avail
                if nb == 0:
                    best += 1
                    avail &= ~(1 << v)
                    reduced = True
                elif nb & (nb - 1) == 0:
                    best += 1
                    avail &= ~((1 << v) | nb)
                    reduced = True
            if reduced:
                continue
            # Branch on a maximum-degree vertex: either exclude it, or take it
            # and drop its whole neighborhood.
            v = max(
                (i for i in range(len(verts)) if avail >> i & 1),
                key=lambda i: bin(adj[i] & avail).count("1"),
            )
            with_v = 1 + search(avail & ~((1 << v) | adj[v]))
            without_v = search(avail & ~(1 << v))
            return best + max(with_v, without_v)
        return best

    target = search((1 << len(verts)) - 1)

    # Recover one witness set of that size.
    chosen: list[int] = []
    avail = (1 << len(verts)) - 1
    need = target
    for i in range(len(verts)):
        if not avail >> i & 1:
            continue
        take = 1 + search(avail & ~((1 << i) | adj[i]))
        if take == need:
            chosen.append(verts[i])
            avail &= ~((1 << i) | adj[i])
            need -= 1
    return frozenset(chosen)


def alpha_first_partition(g: StorageGraph) -> IndependentPartition:
    """Greedy partition whose first set is an exact maximum independent set.

    Ordering the vertices with one maximum independent set first makes the
    greedy pass adopt exactly that set as I_1 (it is maximal, so no further
    vertex can join), which is what the download bound N - alpha * 2^(-r)
    presumes. Subject to the same N <= 24 guard as the exact search.
    """
    mis = exact_max_independent_set(g)
    order = sorted(mis) + sorted(set(g.vertices) - mis)
    return greedy_independent_partition(g, order)


def classify_edges(
    g: StorageGraph, p: IndependentPartition, n: int
) -> tuple[tuple[Edge, ...], tuple[Edge, ...]]:
    """Split n's incident edges into (downstream, upstream), canonical order.

    Downstream endpoints lie in strictly later independent sets, upstream in
    strictly earlier ones; each list is sorted by (neighbor id, multiplicity).
    """
    s = p.set_of(n)
    down: list[Edge] = []
    up: list[Edge] = []
    for e in g.incident_edges(n):
        t = p.set_of(e.other(n))
        if t > s:
            down.append(e)
        elif t < s:
            up.append(e)
        else:
            raise ValueError(f"edge {e} joins two vertices of set {s}; partition invalid")
    return tuple(down), tuple(up)


def query_slots(g: StorageGraph, p: IndependentPartition, n: int) -> tuple[Edge, ...]:
    """Slot order of n's query vector: downstream edges then upstream edges."""
    down, up = classify_edges(g, p, n)
    return down + up


def multigraph_extend(g: StorageGraph, r: int) -> StorageGraph:
    """Replace every edge of a simple graph by r parallel edges."""
    if r < 1:
        raise ValueError("r must be a positive integer")
    if g.r != 1:
        raise ValueError("multigraph_extend expects a simple graph")
    if r == 1:
        return g
    edges = tuple(Edge(e.u, e.v, k) for e in g.edges for k in range(1, r + 1))
    return StorageGraph(g.n_servers, edges)
