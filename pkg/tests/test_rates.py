from fractions import Fraction

import pytest

from graphpir import (
    GraphConfig,
    StarParams,
    baseline_table,
    generate_family,
    greedy_independent_partition,
    make_edge,
    monte_carlo_rate,
    optimize_params,
    queries_from_coins,
    star_expected_download,
    sweep_records,
    download_guarantee,
)
from graphpir.general import coin_keys
from graphpir.rates import (
    build_config,
    check_against_bounds,
    exact_download_of,
    monte_carlo_download,
    rate_le_sqrt_upper,
    record_to_csv_row,
)


def converges_with_retry(config, trials, seed):
    """A 3-sigma check is allowed one reseeded retry; two misses is a failure."""
    rec = monte_carlo_rate(config, trials=trials, seed=seed)
    if not rec.checks["mc_within_3se"]:
        rec = monte_carlo_rate(config, trials=trials, seed=seed + 1)
    assert rec.checks["mc_within_3se"]
    return rec


class TestMonteCarlo:
    def test_star_example_converges(self):
        rec = converges_with_retry(StarParams(9, 9, 2), trials=100_000, seed=7)
        assert rec.exact_download == Fraction(13, 3)
        assert abs(rec.mc_download - 13 / 3) <= 3 * rec.mc_se

    def test_complete_graph_converges(self):
        g = generate_family("complete", 5)
        config = GraphConfig(g, greedy_independent_partition(g))
        rec = converges_with_retry(config, trials=50_000, seed=19)
        assert rec.exact_download == 4

    def test_zero_coin_trace_downloads_one_unit(self, fig3, fig3_partition):
        coins = {key: 0 for key in coin_keys(fig3, fig3_partition)}
        qs = queries_from_coins(make_edge(2, 3), fig3, fig3_partition, coins)
        assert sum(1 for q in qs.values() if not q.is_null) == 1

    def test_deterministic_across_worker_counts(self):
        config = optimize_params(9)
        serial = monte_carlo_download(config, 10_000, seed=3, workers=1)
        parallel = monte_carlo_download(config, 10_000, seed=3, workers=2)
        assert serial == parallel

    def test_u0_download_is_constant(self):
        rec = monte_carlo_rate(StarParams(5, 5, 0), trials=500, seed=0)
        assert rec.mc_download == 5.0 and rec.mc_se == 0.0
        assert rec.checks["mc_within_3se"]


class TestBaselineTable:
    def test_complete_n5_replication_lower(self):
        bounds = {b.name: b for b in baseline_table("complete", 5)}
        assert bounds["xor_replication_lower"].exact == Fraction(16, 75)

    def test_star_n5_upper(self):
        import math

        bounds = {b.name: b for b in baseline_table("star", 5)}
        assert bounds["sqrt_capacity_upper"].value == pytest.approx(1 / (math.sqrt(10) - 1))
        assert bounds["four_star_capacity"].exact == Fraction(5, 12)

    def test_cycle_capacity(self):
        bounds = {b.name: b for b in baseline_table("cycle", 5)}
        assert bounds["cycle_capacity_upper"].exact == Fraction(1, 3)

    def test_multigraph_upper_uses_halving(self):
        bounds = {b.name: b for b in baseline_table("complete-multigraph", 3, r=2)}
        assert bounds["multigraph_upper"].exact == Fraction(1, 3) / (1 - Fraction(2, 3) / 4) == Fraction(2, 5)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            baseline_table("hypercube", 4)

    def test_approximate_entries_not_assertable(self):
        for family, n in [("complete", 6), ("star", 8), ("bipartite", 6)]:
            for b in baseline_table(family, n):
                if b.exact is None and b.kind == "lower":
                    assert not b.assertable


class TestSweeps:
    def test_complete_sweep_rate_column(self):
        records = sweep_records("complete", range(3, 9), trials=256, seed=1)
        for rec, n in zip(records, range(3, 9)):
            assert rec.rate == Fraction(1, n - 1)
            assert rec.checks["rate_le_upper_bounds"]
            assert rec.checks["rate_ge_lower_bounds"]

    def test_bipartite_sweep_meets_four_thirds(self):
        records = sweep_records("bipartite", [4, 6, 8], trials=256, seed=2)
        for rec, n in zip(records, [4, 6, 8]):
            assert rec.rate >= Fraction(4, 3 * n)
            assert rec.checks["rate_le_upper_bounds"]

    def test_star_sweep_meets_guarantee(self):
        for k in range(3, 31):
            params = optimize_params(k)
            rate = 1 / star_expected_download(params)
            assert rate >= 1 / download_guarantee(k)

    def test_cycle_sweep_below_capacity(self):
        records = sweep_records("cycle", range(3, 9), trials=256, seed=3)
        for rec, n in zip(records, range(3, 9)):
            assert rec.rate <= Fraction(2, n + 1)
            assert rec.checks["rate_le_upper_bounds"]

    def test_multigraph_sweep(self):
        records = sweep_records("complete-multigraph", [3, 4], r=2, trials=256, seed=4)
        for rec in records:
            assert rec.checks["rate_le_upper_bounds"]
            assert rec.checks["rate_ge_lower_bounds"]

    def test_csv_row_shape(self):
        from graphpir.rates import CSV_COLUMNS

        records = sweep_records("complete", [4], trials=256, seed=5)
        row = record_to_csv_row(records[0])
        assert len(row) == len(CSV_COLUMNS)


class TestExactChecks:
    def test_sqrt_predicate_matches_floats(self):
        # rate = 2/5 vs 1/(sqrt(10)-1) ~ 0.4625
        assert rate_le_sqrt_upper(Fraction(2, 5), 10)
        assert not rate_le_sqrt_upper(Fraction(1, 2), 10)

    def test_star_equality_case_exact(self):
        # K = 15 attains the guarantee exactly; the comparison must not
        # wobble on floating point.
        rate = 1 / star_expected_download(optimize_params(15))
        assert rate == 1 / download_guarantee(15)
        checks = check_against_bounds(rate, baseline_table("star", 16), "star", 16)
        assert checks["rate_ge_lower_bounds"]

    def test_exact_download_dispatch(self):
        assert exact_download_of(StarParams(9, 9, 2)) == Fraction(13, 3)
        g = generate_family("complete", 4)
        assert exact_download_of(GraphConfig(g, greedy_independent_partition(g))) == 3

    def test_build_config_families(self):
        assert isinstance(build_config("star", 10), StarParams)
        cfg = build_config("complete-multigraph", 3, r=2)
        assert cfg.graph.r == 2
        cfg = build_config("bipartite", 6)
        assert cfg.graph.n_servers == 6
        with pytest.raises(ValueError):
            build_config("bipartite", 5)
