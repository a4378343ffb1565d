"""Privacy auditing: exact distribution enumeration and statistical testing.

The privacy requirement is that each server's query distribution does not
depend on which file the client wants. Small instances are checked exactly:
enumerate the whole randomness space per desired index, tally integer counts,
and demand zero total-variation distance between every pair of indices. The
response reveals nothing beyond the query, since it is a deterministic
function of the query and the stored files and the files are independent of
the client's choice, so query-distribution equality certifies the full
condition.

Beyond the enumeration guards, a seeded chi-square two-sample audit compares
empirical query histograms for two desired indices; a pass there is evidence,
not proof.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations as iter_pairs
from random import Random
from typing import Callable, Mapping

from scipy.stats import chi2_contingency

from .distributions import AuditReport, ExactDistribution, UniformityReport, tv_distance
from .errors import SizeLimitError
from .general import (
    HONEST_SCHEME,
    QueryScheme,
    classify_edges,
)
from .graphs import Edge, IndependentPartition, StorageGraph
from .star import StarParams, encode_hub_query, encode_spoke_query, star_exact_distribution
from .star import star_generate_queries

MAX_ENUM_COINS = 20


def enumerate_star(
    p: StarParams, theta: int, max_k_pad: int | None = None
) -> dict[int, ExactDistribution]:
    """Exact star-scheme distributions for one desired file; see star module."""
    if max_k_pad is None:
        return star_exact_distribution(p, theta)
    return star_exact_distribution(p, theta, max_k_pad)


def enumerate_graph(
    g: StorageGraph,
    p: IndependentPartition,
    theta: Edge,
    scheme: QueryScheme = HONEST_SCHEME,
    max_coins: int = MAX_ENUM_COINS,
) -> dict[int, ExactDistribution]:
    """Exact per-server distributions by iterating every coin outcome.

    All 2^c coin assignments are equally likely, so integer tallies over them
    give exact probabilities. Guarded at c <= max_coins.
    """
    keys = scheme.coin_keys(g, p)
    if len(keys) > max_coins:
        raise SizeLimitError(
            f"coin enumeration is limited to {max_coins} coins, got {len(keys)}"
        )
    total = 1 << len(keys)
    counts: dict[int, dict[str, int]] = {n: {} for n in p.vertices_in_order()}
    for outcome in range(total):
        coins = {key: (outcome >> i) & 1 for i, key in enumerate(keys)}
        for n, q in scheme.build(theta, g, p, coins).items():
            enc = q.encode()
            counts[n][enc] = counts[n].get(enc, 0) + 1
    return {n: ExactDistribution(n, theta, c, total) for n, c in counts.items()}


def assert_theta_independence(
    dists_by_theta: Mapping[object, Mapping[int, ExactDistribution]],
) -> AuditReport:
    """Pairwise total-variation distances across desired indices, exact.

    Mismatched supports are not an error; they simply show up as positive
    distance. Passes iff every per-server distance is exactly zero.
    """
    thetas = list(dists_by_theta)
    if not thetas:
        raise ValueError("need at least one desired index")
    servers = set(dists_by_theta[thetas[0]])
    for t in thetas[1:]:
        if set(dists_by_theta[t]) != servers:
            raise ValueError("server sets differ across desired indices")
    max_tv = {n: Fraction(0) for n in servers}
    for t1, t2 in iter_pairs(thetas, 2):
        for n in servers:
            d = tv_distance(dists_by_theta[t1][n], dists_by_theta[t2][n])
            if d > max_tv[n]:
                max_tv[n] = d
    passed = all(d == 0 for d in max_tv.values())
    return AuditReport(mode="exact", passed=passed, max_tv=max_tv)


def per_bit_uniformity(
    g: StorageGraph,
    p: IndependentPartition,
    theta: Edge,
    scheme: QueryScheme = HONEST_SCHEME,
    max_coins: int = MAX_ENUM_COINS,
) -> UniformityReport:
    """Check each query bit is marginally fair and subvectors are independent.

    Enumerates all coin outcomes and verifies, per server: every slot's bit is
    1 in exactly half the outcomes, and the joint distribution of the
    (downstream, upstream) subvector pair factors into the product of its two
    marginals, with exact integer arithmetic.
    """
    keys = scheme.coin_keys(g, p)
    if len(keys) > max_coins:
        raise SizeLimitError(
            f"coin enumeration is limited to {max_coins} coins, got {len(keys)}"
        )
    total = 1 << len(keys)
    slot_ones: dict[tuple[int, int], int] = {}
    joint: dict[int, dict[tuple, int]] = {}
    down_marg: dict[int, dict[tuple, int]] = {}
    up_marg: dict[int, dict[tuple, int]] = {}
    down_len = {n: len(classify_edges(g, p, n)[0]) for n in p.vertices_in_order()}
    for outcome in range(total):
        coins = {key: (outcome >> i) & 1 for i, key in enumerate(keys)}
        for n, q in scheme.build(theta, g, p, coins).items():
            for j, b in enumerate(q.bits):
                if b:
                    slot_ones[(n, j)] = slot_ones.get((n, j), 0) + 1
            dl = down_len[n]
            d_part, u_part = q.bits[:dl], q.bits[dl:]
            nj = joint.setdefault(n, {})
            nj[(d_part, u_part)] = nj.get((d_part, u_part), 0) + 1
            nd = down_marg.setdefault(n, {})
            nd[d_part] = nd.get(d_part, 0) + 1
            nu = up_marg.setdefault(n, {})
            nu[u_part] = nu.get(u_part, 0) + 1
    marginals = {}
    ok = True
    for n in p.vertices_in_order():
        for j in range(g.degree(n)):
            frac = Fraction(slot_ones.get((n, j), 0), total)
            marginals[(n, j)] = frac
            if frac != Fraction(1, 2):
                ok = False
    factorization_ok = {}
    for n in p.vertices_in_order():
        good = True
        for (d_part, u_part), c in joint.get(n, {}).items():
            if c * total != down_marg[n][d_part] * up_marg[n][u_part]:
                good = False
        factorization_ok[n] = good
        if not good:
            ok = False
    return UniformityReport(ok=ok, marginals=marginals, factorization_ok=factorization_ok)


def star_query_sampler(p: StarParams) -> Callable[[int, Random], dict[int, str]]:
    """Sampler producing one canonical query encoding per server (spokes and hub)."""

    def sample(theta: int, rng: Random) -> dict[int, str]:
        bundle = star_generate_queries(theta, p, rng)
        encodings = {
            i: encode_spoke_query(bundle.spoke_query(i)) for i in range(1, p.k_pad + 1)
        }
        encodings[p.hub_id] = encode_hub_query(bundle.hub_matrix)
        return encodings

    return sample


def graph_query_sampler(
    g: StorageGraph, p: IndependentPartition, scheme: QueryScheme = HONEST_SCHEME
) -> Callable[[Edge, Random], dict[int, str]]:
    """Sampler producing one canonical query encoding per partitioned server."""

    keys = scheme.coin_keys(g, p)

    def sample(theta: Edge, rng: Random) -> dict[int, str]:
        coins = {key: rng.getrandbits(1) for key in keys}
        return {n: q.encode() for n, q in scheme.build(theta, g, p, coins).items()}

    return sample


def statistical_audit(
    sampler: Callable[[object, Random], dict[int, str]],
    theta_a: object,
    theta_b: object,
    trials: int,
    significance: float = 0.01,
    seed: int | None = None,
) -> AuditReport:
    """Chi-square two-sample comparison of query histograms for two indices.

    Draws `trials` independent runs per index from seed-derived streams,
    histograms the canonical encodings per server, and tests each server's
    pair of histograms for equality. The significance level is family-wise:
    each server is compared against significance / n_servers (Bonferroni), so
    an honest run does not trip over testing many servers at once. Rejection
    is strong evidence of a privacy defect; a pass is only evidence.
    """
    if seed is None:
        raise ValueError("statistical audit requires an explicit seed for reproducibility")
    if trials < 10_000:
        raise ValueError("statistical audit needs at least 10^4 trials per index")
    master = Random(seed)
    rng_a = Random(master.getrandbits(64))
    rng_b = Random(master.getrandbits(64))
    hist_a: dict[int, dict[str, int]] = {}
    hist_b: dict[int, dict[str, int]] = {}
    for rng, theta, hist in ((rng_a, theta_a, hist_a), (rng_b, theta_b, hist_b)):
        for _ in range(trials):
            for n, enc in sampler(theta, rng).items():
                server_hist = hist.setdefault(n, {})
                server_hist[enc] = server_hist.get(enc, 0) + 1
    if set(hist_a) != set(hist_b):
        raise ValueError("server sets differ between the two indices")
    p_values: dict[int, float] = {}
    for n in hist_a:
        support = sorted(set(hist_a[n]) | set(hist_b[n]))
        table = [
            [hist_a[n].get(enc, 0) for enc in support],
            [hist_b[n].get(enc, 0) for enc in support],
        ]
        if len(support) < 2:
            p_values[n] = 1.0
            continue
        result = chi2_contingency(table, correction=False)
        p_values[n] = float(result.pvalue)
    per_server_level = significance / max(len(p_values), 1)
    passed = all(pv >= per_server_level for pv in p_values.values())
    return AuditReport(
        mode="statistical",
        passed=passed,
        p_values=p_values,
        significance=significance,
        trials=trials,
    )
