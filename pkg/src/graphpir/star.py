"""Variable-download retrieval on star graphs at unit subpacketization.

One hub server stores all K files; spoke server i stores only file i
(K = N - 1 for N servers). To fetch file theta privately the client:

1. picks a side-information size u with (u+1) | K, downloads the u files of a
   uniformly random u-subset U from their spoke servers;
2. if theta landed in U, stops; otherwise sends the hub a (u+1) x a query
   matrix (a = K/(u+1)) containing every file index exactly once, with theta
   placed in the same column as U, and receives one XOR per column;
3. cancels the U files out of theta's column XOR.

Every spoke is hit with probability u/K and the hub sees either no query or
a uniformly scrambled matrix, so no single server learns anything about
theta. Expected download is (u^2 + K)/(u+1) file units.

When (u+1) does not divide the real file count, zero-filled dummy files (and
their simulated dummy spoke servers) pad K up to the next multiple; dummy
downloads count toward the download cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from random import Random

from .distributions import NULL_ENCODING, ExactDistribution
from .errors import DecodeError, ProtocolError, SizeLimitError
from .graphs import FileStore

MAX_ENUM_KPAD = 8


@dataclass(frozen=True)
class StarParams:
    """Scheme parameters: real file count k, padded count k_pad, side-info size u."""

    k: int
    k_pad: int
    u: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one real file")
        if self.k_pad < self.k:
            raise ValueError("padded file count cannot shrink below the real count")
        if not 0 <= self.u <= self.k_pad:
            raise ValueError("u must lie in 0..k_pad")
        if self.k_pad % (self.u + 1) != 0:
            raise ValueError(f"(u+1)={self.u + 1} must divide k_pad={self.k_pad}")

    @property
    def a(self) -> int:
        """Number of matrix columns."""
        return self.k_pad // (self.u + 1)

    @property
    def n_dummies(self) -> int:
        return self.k_pad - self.k

    @property
    def hub_id(self) -> int:
        """Server id of the hub; spokes are 1..k_pad."""
        return self.k_pad + 1


def minimal_padding(k: int, u: int) -> int:
    """Smallest k_pad >= k divisible by u+1."""
    return (u + 1) * -(-k // (u + 1))


def optimize_params(k: int) -> StarParams:
    """Choose (u, k_pad) minimizing expected download (u^2 + k_pad)/(u+1).

    Searches every u >= 0 with the minimal padding for that u; ties break
    toward smaller u, then smaller k_pad. Stops once u alone exceeds the best
    download found, since the download grows at least like u - 1.
    """
    if k < 1:
        raise ValueError("need at least one real file")
    best: StarParams | None = None
    best_d: Fraction | None = None
    u = 0
    while u <= k + 1:
        if best_d is not None and u - 1 > best_d:
            break
        k_pad = minimal_padding(k, u)
        d = Fraction(u * u + k_pad, u + 1)
        if best_d is None or d < best_d:
            best, best_d = StarParams(k, k_pad, u), d
        u += 1
    assert best is not None
    return best


def square_padding_params(k: int) -> StarParams:
    """The alternative pick that pads k so that k_pad + 1 is a perfect square."""
    s = math.isqrt(k)  # smallest s with s^2 >= k + 1
    while s * s < k + 1:
        s += 1
    return StarParams(k, s * s - 1, s)


def star_expected_download(p: StarParams) -> Fraction:
    """Exact expected download in file units: (u^2 + k_pad)/(u+1)."""
    return Fraction(p.u * p.u + p.k_pad, p.u + 1)


def download_guarantee(k: int) -> Fraction:
    """Guaranteed download ceiling 2*sqrt(k'+1) - 2 + 1/(sqrt(k'+1)+1).

    k' is the smallest integer >= k with k'+1 a perfect square, so the square
    root is an integer and the bound is an exact rational.
    """
    s = math.isqrt(k)
    while s * s < k + 1:
        s += 1
    return Fraction(2 * s * s - 1, s + 1)


@dataclass(frozen=True)
class QueryMatrix:
    """(u+1) x a matrix holding each file index of 1..k_pad exactly once."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if not self.rows or not self.rows[0]:
            raise ValueError("matrix must be non-empty")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise ValueError("ragged matrix")
        flat = [x for row in self.rows for x in row]
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError("matrix must contain each file index exactly once")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.rows[0])

    def column(self, c: int) -> tuple[int, ...]:
        """1-based column c."""
        return tuple(row[c - 1] for row in self.rows)

    def column_of(self, value: int) -> int:
        """1-based index of the column containing value."""
        for c in range(1, self.n_cols + 1):
            if value in self.column(c):
                return c
        raise ValueError(f"{value} not present in matrix")

    def encode(self) -> str:
        return encode_matrix_rows(self.rows)


@dataclass(frozen=True)
class StarQueryBundle:
    """Client-side view of one protocol run: the sampled U and the hub query.

    Spoke i receives a fetch query iff i is in u_set; the hub query is None
    exactly when the desired index landed in u_set.
    """

    params: StarParams
    u_set: frozenset[int]
    hub_matrix: QueryMatrix | None

    def spoke_query(self, i: int) -> int | None:
        if not 1 <= i <= self.params.k_pad:
            raise ValueError(f"spoke {i} out of range")
        return i if i in self.u_set else None

    def download_units(self) -> int:
        """Total download in file units: one per fetched spoke, a for the hub."""
        return len(self.u_set) + (self.params.a if self.hub_matrix is not None else 0)


def encode_matrix_rows(rows: tuple[tuple[int, ...], ...]) -> str:
    return "matrix:" + ";".join(",".join(map(str, row)) for row in rows)


def _matrix_rows(
    theta: int,
    n_rows: int,
    n_cols: int,
    row: int,
    col: int,
    sigma_u: tuple[int, ...],
    sigma_v: tuple[int, ...],
) -> tuple[tuple[int, ...], ...]:
    """Raw fill, shared by the sampler and the exhaustive enumerator.

    theta goes to cell (row, col); sigma_u fills column col's remaining rows
    top to bottom; sigma_v fills the other columns left to right, top to
    bottom within each column.
    """
    grid = [[0] * n_cols for _ in range(n_rows)]
    grid[row - 1][col - 1] = theta
    fill = 0
    for m in range(n_rows):
        if m != row - 1:
            grid[m][col - 1] = sigma_u[fill]
            fill += 1
    idx = 0
    for c in range(n_cols):
        if c == col - 1:
            continue
        for m in range(n_rows):
            grid[m][c] = sigma_v[idx]
            idx += 1
    return tuple(map(tuple, grid))


def build_query_matrix(
    theta: int,
    p: StarParams,
    row: int,
    col: int,
    sigma_u: tuple[int, ...],
    sigma_v: tuple[int, ...],
) -> QueryMatrix:
    """Assemble the hub matrix from its random ingredients, deterministically."""
    n_rows, n_cols = p.u + 1, p.a
    if not (1 <= row <= n_rows and 1 <= col <= n_cols):
        raise ValueError("matrix position out of range")
    if len(sigma_u) != p.u or len(sigma_v) != p.k_pad - p.u - 1:
        raise ValueError("permutation lengths do not match the parameters")
    return QueryMatrix(_matrix_rows(theta, n_rows, n_cols, row, col, sigma_u, sigma_v))


def star_generate_queries(theta: int, p: StarParams, rng: Random) -> StarQueryBundle:
    """Sample one run's queries for desired file theta.

    Draw order from the seeded stream is fixed: U, then (only when theta is
    not in U) the matrix position (row, col), the ordering of U, and the
    ordering of the leftover indices.
    """
    if not 1 <= theta <= p.k:
        raise ValueError(f"theta must name a real file in 1..{p.k}")
    u_set = frozenset(rng.sample(range(1, p.k_pad + 1), p.u))
    if theta in u_set:
        return StarQueryBundle(p, u_set, None)
    row = rng.randrange(1, p.u + 2)
    col = rng.randrange(1, p.a + 1)
    sigma_u = sorted(u_set)
    rng.shuffle(sigma_u)
    sigma_v = sorted(set(range(1, p.k_pad + 1)) - u_set - {theta})
    rng.shuffle(sigma_v)
    matrix = build_query_matrix(theta, p, row, col, tuple(sigma_u), tuple(sigma_v))
    return StarQueryBundle(p, u_set, matrix)


def star_file_store(p: StarParams, rng: Random, l_bits: int = 1) -> FileStore:
    """Random payloads for the real files; dummies are all-zero."""
    payloads = {i: rng.getrandbits(l_bits) for i in range(1, p.k + 1)}
    payloads.update({i: 0 for i in range(p.k + 1, p.k_pad + 1)})
    return FileStore(payloads, l_bits)


def star_spoke_respond(i: int, query: int | None, fs: FileStore) -> int | None:
    """Spoke i returns its single file on a fetch query, nothing on null."""
    if query is None:
        return None
    if query != i:
        raise ProtocolError(f"spoke {i} asked for file {query} it does not store")
    if i not in fs:
        raise ProtocolError(f"spoke {i} has no payload in the store")
    return fs[i]


def star_hub_respond(matrix: QueryMatrix, fs: FileStore) -> list[int]:
    """Hub returns the XOR of the (u+1) files in each column."""
    k_pad = matrix.n_rows * matrix.n_cols
    if any(i not in fs for i in range(1, k_pad + 1)):
        raise ProtocolError("hub store is missing files named by the matrix")
    answers = []
    for c in range(1, matrix.n_cols + 1):
        acc = 0
        for i in matrix.column(c):
            acc ^= fs[i]
        answers.append(acc)
    return answers


def star_decode(
    theta: int,
    bundle: StarQueryBundle,
    spoke_payloads: dict[int, int],
    hub_payloads: list[int] | None,
) -> int:
    """Recover the desired payload from the responses of one run."""
    if theta in bundle.u_set:
        if theta not in spoke_payloads:
            raise DecodeError(f"missing spoke response for file {theta}")
        return spoke_payloads[theta]
    if bundle.hub_matrix is None or hub_payloads is None:
        raise DecodeError("hub response required but absent")
    if len(hub_payloads) != bundle.params.a:
        raise DecodeError("hub returned the wrong number of column XORs")
    c = bundle.hub_matrix.column_of(theta)
    acc = hub_payloads[c - 1]
    for i in bundle.u_set:
        if i not in spoke_payloads:
            raise DecodeError(f"missing spoke response for file {i}")
        acc ^= spoke_payloads[i]
    return acc


@dataclass(frozen=True)
class StarTranscript:
    theta: int
    bundle: StarQueryBundle
    spoke_payloads: dict[int, int]
    hub_payloads: list[int] | None
    decoded: int
    download_units: int


def run_star_transcript(theta: int, p: StarParams, fs: FileStore, rng: Random) -> StarTranscript:
    """Execute queries, responses, and decoding for one retrieval."""
    bundle = star_generate_queries(theta, p, rng)
    spoke_payloads = {i: star_spoke_respond(i, i, fs) for i in sorted(bundle.u_set)}
    hub_payloads = None
    if bundle.hub_matrix is not None:
        hub_payloads = star_hub_respond(bundle.hub_matrix, fs)
    decoded = star_decode(theta, bundle, spoke_payloads, hub_payloads)
    return StarTranscript(theta, bundle, spoke_payloads, hub_payloads, decoded, bundle.download_units())


def encode_spoke_query(query: int | None) -> str:
    return NULL_ENCODING if query is None else f"fetch:{query}"


def encode_hub_query(matrix: QueryMatrix | None) -> str:
    return NULL_ENCODING if matrix is None else matrix.encode()


def star_exact_distribution(
    p: StarParams, theta: int, max_k_pad: int = MAX_ENUM_KPAD
) -> dict[int, ExactDistribution]:
    """Exact per-server query distributions by full enumeration.

    Walks every (U, row, col, sigma_U, sigma_V) combination with integer
    weights over the common sample space of size
    C(k_pad, u) * (u+1) * a * u! * (k_pad-u-1)!, so all probabilities come out
    as exact rationals. The hub's server id is p.hub_id. Factorial growth is
    guarded at k_pad <= max_k_pad.
    """
    if p.k_pad > max_k_pad:
        raise SizeLimitError(
            f"star enumeration is limited to k_pad <= {max_k_pad}, got {p.k_pad}"
        )
    if not 1 <= theta <= p.k:
        raise ValueError(f"theta must name a real file in 1..{p.k}")
    k, u = p.k_pad, p.u
    rest_weight = (u + 1) * p.a * math.factorial(u) * math.factorial(k - u - 1)
    total = math.comb(k, u) * rest_weight
    spoke_fetch_counts = {i: 0 for i in range(1, k + 1)}
    null_count = 0
    matrix_counts: dict[tuple, int] = {}
    population = range(1, k + 1)
    n_rows, n_cols = u + 1, p.a
    for u_combo in combinations(population, u):
        for i in u_combo:
            spoke_fetch_counts[i] += rest_weight
        if theta in u_combo:
            null_count += rest_weight
            continue
        v_sorted = tuple(x for x in population if x != theta and x not in u_combo)
        for row in range(1, n_rows + 1):
            for col in range(1, n_cols + 1):
                for sigma_u in permutations(u_combo):
                    for sigma_v in permutations(v_sorted):
                        rows = _matrix_rows(theta, n_rows, n_cols, row, col, sigma_u, sigma_v)
                        matrix_counts[rows] = matrix_counts.get(rows, 0) + 1
    hub_counts = {encode_matrix_rows(rows): c for rows, c in matrix_counts.items()}
    if null_count:
        hub_counts[NULL_ENCODING] = null_count
    dists = {}
    for i in range(1, k + 1):
        fetch = spoke_fetch_counts[i]
        counts = {encode_spoke_query(i): fetch, NULL_ENCODING: total - fetch}
        dists[i] = ExactDistribution(i, theta, counts, total)
    dists[p.hub_id] = ExactDistribution(p.hub_id, theta, hub_counts, total)
    return dists
