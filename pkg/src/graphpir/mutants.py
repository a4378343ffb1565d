"""Deliberately broken protocol variants for exercising the audits.

Each mutant preserves correctness (the client still decodes the right file)
while violating privacy in a specific, realistic way, so a sound audit must
flag it. They reuse the real query machinery, differing only in the single
defect they introduce.
"""

from __future__ import annotations

import math
from functools import partial
from itertools import combinations, permutations
from random import Random
from typing import Callable

from .distributions import NULL_ENCODING, ExactDistribution
from .errors import SizeLimitError
from .general import QueryScheme, _assemble_queries, coin_keys
from .star import (
    MAX_ENUM_KPAD,
    StarParams,
    StarQueryBundle,
    _matrix_rows,
    build_query_matrix,
    encode_hub_query,
    encode_matrix_rows,
    encode_spoke_query,
)

# Mutant 1: the bit flip for the desired edge is applied at the endpoint in
# the EARLIER independent set. Decoding still works (the two endpoint bits
# still differ on exactly the desired edge), but the earlier server's
# downstream subvector is no longer constant, which leaks the desired index.
WRONG_SHIFT_SIDE = QueryScheme(
    "shift-at-upstream-endpoint",
    coin_keys,
    partial(_assemble_queries, group_of=lambda e: e.k, shift_on_later_side=False),
)

# Mutant 2: one coin is reused for all parallel-edge groups of a server
# instead of one coin per group. On multigraphs the desired pair's slots then
# always disagree while every other pair's slots always agree.
_single_group: Callable = lambda e: 1
SHARED_GROUP_COIN = QueryScheme(
    "shared-coin-across-groups",
    partial(coin_keys, group_of=_single_group),
    partial(_assemble_queries, group_of=_single_group, shift_on_later_side=True),
)


def leaky_star_generate_queries(theta: int, p: StarParams, rng: Random) -> StarQueryBundle:
    """Mutant 3: the side-information set is sampled avoiding the desired file.

    A tempting 'optimization' (never waste a spoke fetch on the desired file,
    which would make the hub query unnecessary); it zeroes the desired spoke's
    fetch probability and so reveals the desired index.
    """
    if not 1 <= theta <= p.k:
        raise ValueError(f"theta must name a real file in 1..{p.k}")
    population = [i for i in range(1, p.k_pad + 1) if i != theta]
    u_set = frozenset(rng.sample(population, p.u))
    row = rng.randrange(1, p.u + 2)
    col = rng.randrange(1, p.a + 1)
    sigma_u = sorted(u_set)
    rng.shuffle(sigma_u)
    sigma_v = sorted(set(range(1, p.k_pad + 1)) - u_set - {theta})
    rng.shuffle(sigma_v)
    matrix = build_query_matrix(theta, p, row, col, tuple(sigma_u), tuple(sigma_v))
    return StarQueryBundle(p, u_set, matrix)


def leaky_star_exact_distribution(
    p: StarParams, theta: int, max_k_pad: int = MAX_ENUM_KPAD
) -> dict[int, ExactDistribution]:
    """Exact distributions of the leaky variant, mirroring the honest enumerator."""
    if p.k_pad > max_k_pad:
        raise SizeLimitError(
            f"star enumeration is limited to k_pad <= {max_k_pad}, got {p.k_pad}"
        )
    k, u = p.k_pad, p.u
    rest_weight = (u + 1) * p.a * math.factorial(u) * math.factorial(k - u - 1)
    total = math.comb(k - 1, u) * rest_weight
    spoke_fetch_counts = {i: 0 for i in range(1, k + 1)}
    hub_counts: dict[str, int] = {}
    population = range(1, k + 1)
    n_rows, n_cols = u + 1, p.a
    for u_combo in combinations([i for i in population if i != theta], u):
        for i in u_combo:
            spoke_fetch_counts[i] += rest_weight
        v_sorted = tuple(x for x in population if x != theta and x not in u_combo)
        for row in range(1, n_rows + 1):
            for col in range(1, n_cols + 1):
                for sigma_u in permutations(u_combo):
                    for sigma_v in permutations(v_sorted):
                        rows = _matrix_rows(theta, n_rows, n_cols, row, col, sigma_u, sigma_v)
                        enc = encode_matrix_rows(rows)
                        hub_counts[enc] = hub_counts.get(enc, 0) + 1
    dists = {}
    for i in range(1, k + 1):
        fetch = spoke_fetch_counts[i]
        counts = {encode_spoke_query(i): fetch, NULL_ENCODING: total - fetch}
        dists[i] = ExactDistribution(i, theta, counts, total)
    dists[p.hub_id] = ExactDistribution(p.hub_id, theta, hub_counts, total)
    return dists


def leaky_star_sampler(p: StarParams) -> Callable[[int, Random], dict[int, str]]:
    """Statistical-audit sampler for the leaky variant."""

    def sample(theta: int, rng: Random) -> dict[int, str]:
        bundle = leaky_star_generate_queries(theta, p, rng)
        encodings = {
            i: encode_spoke_query(bundle.spoke_query(i)) for i in range(1, p.k_pad + 1)
        }
        encodings[p.hub_id] = encode_hub_query(bundle.hub_matrix)
        return encodings

    return sample
