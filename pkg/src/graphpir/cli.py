"""Command-line harness: one `pir` binary wiring every subsystem.

Subcommands:

    pir star run       --k K [--u U] [--theta T] [--seed S] [--l-bits B]
    pir star rate      --k K [--u U] --trials M [--seed S]
    pir star audit     --k K --u U [--max-kpad X]
    pir graph run      --graph SRC [--r R] --theta i,j[,k] [--seed S] [--order ...]
    pir graph rate     --graph SRC [--r R] --trials M [--seed S] [--order ...]
    pir graph download --graph SRC [--r R] [--order ...]
    pir audit star     --k K --u U [--max-kpad X]
    pir audit graph    --graph SRC [--r R] [--order ...] [--max-coins C]
    pir audit stat     --graph SRC --theta-a E --theta-b E --trials M --seed S
    pir rate sweep     --family F --n-min A --n-max B [--r R] --trials M [--seed S]

`--graph` takes an edge-list file path or a family spec like `complete:5`,
`bipartite:3,3`, `star:10`, `cycle:5`, `path:4`. Every randomized command
logs its seed in the output (flag, then the PIR_SEED environment variable,
then 0), so identical configurations reproduce byte-identical output. Exit
status: 0 when all asserted checks pass, 1 otherwise, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from random import Random

from . import audit as audit_mod
from . import general, rates, star
from .errors import ParseError, ProtocolError, SizeLimitError
from .families import FAMILY_NAMES, generate_family
from .graphs import (
    IndependentPartition,
    StorageGraph,
    alpha_first_partition,
    exact_max_independent_set,
    greedy_independent_partition,
    make_edge,
    multigraph_extend,
    parse_edge_list,
)

MAX_EXACT_ALPHA = 24


def _default_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("PIR_SEED")
    return int(env) if env else 0


def load_graph(source: str, r: int = 1) -> StorageGraph:
    """Edge-list file path, or a family spec such as `complete:5`.

    With --r above 1, a simple graph (from file or family) is extended to r
    parallel edges per pair; a file that already lists r parallel edges is
    accepted as-is.
    """
    if ":" in source and not Path(source).exists():
        name, _, arg_text = source.partition(":")
        if name in FAMILY_NAMES:
            params = tuple(int(x) for x in arg_text.split(",") if x)
            g = generate_family(name, *params)
        else:
            raise ParseError(f"unknown graph family {name!r}")
    else:
        g = parse_edge_list(Path(source).read_text(), max_multiplicity=r)
    if r > 1:
        if g.r == 1:
            g = multigraph_extend(g, r)
        elif g.r != r:
            raise ParseError(f"file already carries multiplicity {g.r}, but --r {r} given")
    return g


def parse_theta_edge(text: str):
    parts = [int(x) for x in text.split(",")]
    if len(parts) not in (2, 3):
        raise ParseError(f"theta must be i,j or i,j,k, got {text!r}")
    return make_edge(*parts)


def build_partition(g: StorageGraph, order_text: str | None) -> IndependentPartition:
    if order_text:
        order = [int(x) for x in order_text.split(",")]
        return greedy_independent_partition(g, order)
    if g.n_servers <= MAX_EXACT_ALPHA:
        return alpha_first_partition(g)
    return greedy_independent_partition(g)


def alpha_info(g: StorageGraph, p: IndependentPartition) -> tuple[int, bool]:
    """Independence number: exact when small, else the greedy lower bound |I_1|."""
    if g.n_servers <= MAX_EXACT_ALPHA:
        return len(exact_max_independent_set(g)), True
    return len(p.sets[0]), False


def emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def frac(x: Fraction) -> dict:
    return {"exact": str(x), "float": float(x)}


def _star_params(args) -> star.StarParams:
    if args.u is None:
        return star.optimize_params(args.k)
    return star.StarParams(args.k, star.minimal_padding(args.k, args.u), args.u)


def cmd_star_run(args) -> int:
    params = _star_params(args)
    seed = _default_seed(args.seed)
    master = Random(seed)
    store_rng = Random(master.getrandbits(64))
    query_rng = Random(master.getrandbits(64))
    fs = star.star_file_store(params, store_rng, args.l_bits)
    theta = args.theta if args.theta is not None else query_rng.randint(1, params.k)
    if not 1 <= theta <= params.k:
        raise ParseError(f"theta must be in 1..{params.k}")
    t = star.run_star_transcript(theta, params, fs, query_rng)
    per_server = {str(i): 1 for i in sorted(t.bundle.u_set)}
    if t.hub_payloads is not None:
        per_server["hub"] = params.a
    payload = {
        "command": "star run",
        "seed": seed,
        "l_bits": args.l_bits,
        "params": {
            "k": params.k,
            "k_pad": params.k_pad,
            "u": params.u,
            "a": params.a,
            "n_dummies": params.n_dummies,
        },
        "square_padding_alternative": _square_padding_info(args.k),
        "theta": theta,
        "side_info_set": sorted(t.bundle.u_set),
        "hub_queried": t.hub_payloads is not None,
        "hub_matrix": [list(row) for row in t.bundle.hub_matrix.rows]
        if t.bundle.hub_matrix
        else None,
        "per_server_download_units": per_server,
        "download_units": t.download_units,
        "download_bits": t.download_units * args.l_bits,
        "decoded_matches_store": t.decoded == fs[theta],
        "expected_download": frac(star.star_expected_download(params)),
    }
    emit(payload, args.out)
    return 0 if payload["decoded_matches_store"] else 1


def _square_padding_info(k: int) -> dict:
    alt = star.square_padding_params(k)
    return {
        "k_pad": alt.k_pad,
        "u": alt.u,
        "expected_download": frac(star.star_expected_download(alt)),
    }


def cmd_star_rate(args) -> int:
    params = _star_params(args)
    seed = _default_seed(args.seed)
    rec = rates.monte_carlo_rate(params, args.trials, seed, args.workers, family="star")
    payload = {
        "command": "star rate",
        "seed": seed,
        "params": {"k": params.k, "k_pad": params.k_pad, "u": params.u, "a": params.a},
        "trials": rec.trials,
        "mc_download": rec.mc_download,
        "mc_se": rec.mc_se,
        "expected_download": frac(rec.exact_download),
        "rate": frac(rec.rate),
        "rate_mc": rec.rate_mc,
        "checks": rec.checks,
    }
    emit(payload, args.out)
    return 0 if all(v for v in rec.checks.values() if v is not None) else 1


def cmd_audit_star(args) -> int:
    params = star.StarParams(args.k, star.minimal_padding(args.k, args.u), args.u)
    dists = {
        theta: audit_mod.enumerate_star(params, theta, args.max_kpad)
        for theta in range(1, params.k + 1)
    }
    report = audit_mod.assert_theta_independence(dists)
    payload = {
        "command": "audit star",
        "params": {"k": params.k, "k_pad": params.k_pad, "u": params.u},
        "thetas": params.k,
        "per_server_max_tv": {str(n): str(tv) for n, tv in sorted(report.max_tv.items())},
        "pass": report.passed,
    }
    emit(payload, args.out)
    return 0 if report.passed else 1


def cmd_graph_run(args) -> int:
    g = load_graph(args.graph, args.r)
    p = build_partition(g, args.order)
    theta = parse_theta_edge(args.theta)
    if theta not in g.edges:
        raise ParseError(f"theta {theta} is not a file of the graph")
    seed = _default_seed(args.seed)
    master = Random(seed)
    store_rng = Random(master.getrandbits(64))
    query_rng = Random(master.getrandbits(64))
    fs = general.graph_file_store(g, store_rng, args.l_bits)
    t = general.run_graph_transcript(theta, g, p, fs, query_rng)
    payload = {
        "command": "graph run",
        "seed": seed,
        "l_bits": args.l_bits,
        "graph": {"n_servers": g.n_servers, "n_files": g.n_files, "r": g.r},
        "partition": [list(s) for s in p.sets],
        "theta": list(theta),
        "queries": {
            str(n): "".join(str(b) for b in q.bits) for n, q in sorted(t.queries.items())
        },
        "responding_servers": sorted(t.responses),
        "download_units": t.download_units,
        "download_bits": t.download_units * args.l_bits,
        "decoded_matches_store": t.decoded == fs[theta],
    }
    emit(payload, args.out)
    return 0 if payload["decoded_matches_store"] else 1


def cmd_graph_rate(args) -> int:
    g = load_graph(args.graph, args.r)
    p = build_partition(g, args.order)
    seed = _default_seed(args.seed)
    rec = rates.monte_carlo_rate(
        rates.GraphConfig(g, p), args.trials, seed, args.workers, family="graph"
    )
    payload = {
        "command": "graph rate",
        "seed": seed,
        "graph": {"n_servers": g.n_servers, "n_files": g.n_files, "r": g.r},
        "partition": [list(s) for s in p.sets],
        "trials": rec.trials,
        "mc_download": rec.mc_download,
        "mc_se": rec.mc_se,
        "expected_download": frac(rec.exact_download),
        "rate": frac(rec.rate),
        "rate_mc": rec.rate_mc,
        "checks": rec.checks,
    }
    emit(payload, args.out)
    return 0 if all(v for v in rec.checks.values() if v is not None) else 1


def cmd_graph_download(args) -> int:
    g = load_graph(args.graph, args.r)
    p = build_partition(g, args.order)
    alpha, alpha_exact = alpha_info(g, p)
    report = general.rate_bounds(g, p, alpha, alpha_exact)
    per_server = {}
    for n in sorted(p.vertices_in_order()):
        null_p = general.null_query_probability(n, g, p)
        per_server[str(n)] = {
            "null_probability": str(null_p),
            "non_null_probability": str(1 - null_p),
            "non_null_float": float(1 - null_p),
        }
    payload = {
        "command": "graph download",
        "graph": {"n_servers": g.n_servers, "n_files": g.n_files, "r": g.r},
        "partition": [list(s) for s in p.sets],
        "alpha": {"value": alpha, "exact": alpha_exact},
        "per_server": per_server,
        "exact_D": float(report.download),
        "exact_D_rational": str(report.download),
        "rate": frac(report.rate),
        "bounds": [
            {
                "name": b.name,
                "value": frac(b.value),
                "assertable": b.assertable,
                "satisfied": b.satisfied,
            }
            for b in report.bounds
        ],
        "bound_chain_pass": report.asserted_ok,
    }
    emit(payload, args.out)
    return 0 if report.asserted_ok else 1


def cmd_audit_graph(args) -> int:
    g = load_graph(args.graph, args.r)
    p = build_partition(g, args.order)
    dists = {
        theta: audit_mod.enumerate_graph(g, p, theta, max_coins=args.max_coins)
        for theta in g.edges
    }
    report = audit_mod.assert_theta_independence(dists)
    payload = {
        "command": "audit graph",
        "graph": {"n_servers": g.n_servers, "n_files": g.n_files, "r": g.r},
        "partition": [list(s) for s in p.sets],
        "n_coins": len(general.coin_keys(g, p)),
        "thetas": g.n_files,
        "per_server_max_tv": {str(n): str(tv) for n, tv in sorted(report.max_tv.items())},
        "pass": report.passed,
    }
    emit(payload, args.out)
    return 0 if report.passed else 1


def cmd_audit_stat(args) -> int:
    g = load_graph(args.graph, args.r)
    p = build_partition(g, args.order)
    theta_a = parse_theta_edge(args.theta_a)
    theta_b = parse_theta_edge(args.theta_b)
    for theta in (theta_a, theta_b):
        if theta not in g.edges:
            raise ParseError(f"theta {theta} is not a file of the graph")
    if args.seed is None and "PIR_SEED" not in os.environ:
        raise ParseError("audit stat requires --seed (or PIR_SEED)")
    seed = _default_seed(args.seed)
    sampler = audit_mod.graph_query_sampler(g, p)
    report = audit_mod.statistical_audit(
        sampler, theta_a, theta_b, args.trials, args.significance, seed
    )
    payload = {
        "command": "audit stat",
        "seed": seed,
        "graph": {"n_servers": g.n_servers, "n_files": g.n_files, "r": g.r},
        "theta_a": list(theta_a),
        "theta_b": list(theta_b),
        "trials": report.trials,
        "significance": report.significance,
        "p_values": {str(n): pv for n, pv in sorted(report.p_values.items())},
        "pass": report.passed,
    }
    emit(payload, args.out)
    return 0 if report.passed else 1


def cmd_rate_sweep(args) -> int:
    seed = _default_seed(args.seed)
    n_values = range(args.n_min, args.n_max + 1)
    if args.family in ("bipartite",):
        n_values = [n for n in n_values if n % 2 == 0]
    records = rates.sweep_records(
        args.family, n_values, args.r, args.trials, seed, args.workers
    )
    fmt = args.format
    if fmt is None:
        fmt = "csv" if args.out and args.out.endswith(".csv") else "json"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rates.CSV_COLUMNS)
        for rec in records:
            writer.writerow(rates.record_to_csv_row(rec))
        text = buf.getvalue()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        payload = {
            "command": "rate sweep",
            "family": args.family,
            "seed": seed,
            "trials": args.trials,
            "records": [rates.record_to_dict(rec) for rec in records],
        }
        emit(payload, args.out)
    ok = all(
        v for rec in records for v in rec.checks.values() if v is not None
    )
    return 0 if ok else 1


def _add_common(parser, *, seed=True, out=True, workers=False, l_bits=False):
    if seed:
        parser.add_argument("--seed", type=int, default=None, help="64-bit seed (default: PIR_SEED or 0)")
    if out:
        parser.add_argument("--out", default=None, help="write output to this file instead of stdout")
    if workers:
        parser.add_argument(
            "--workers", type=int, default=os.cpu_count() or 1,
            help="worker processes for independent trials (default: available parallelism)",
        )
    if l_bits:
        parser.add_argument("--l-bits", type=int, default=1, help="payload width in bits")


def _add_graph_source(parser):
    parser.add_argument("--graph", required=True, help="edge-list file or family spec like complete:5")
    parser.add_argument("--r", type=int, default=1, help="replace each edge by r parallel edges")
    parser.add_argument("--order", default=None, help="comma-separated vertex order for the greedy partition")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pir", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    star_p = top.add_parser("star", help="star-graph scheme")
    star_sub = star_p.add_subparsers(dest="cmd", required=True)
    sp = star_sub.add_parser("run", help="one full transcript")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--u", type=int, default=None)
    sp.add_argument("--theta", type=int, default=None)
    _add_common(sp, l_bits=True)
    sp.set_defaults(func=cmd_star_run)
    sp = star_sub.add_parser("rate", help="Monte-Carlo download vs the closed form")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--u", type=int, default=None)
    sp.add_argument("--trials", type=int, required=True)
    _add_common(sp, workers=True)
    sp.set_defaults(func=cmd_star_rate)
    sp = star_sub.add_parser("audit", help="exact privacy enumeration")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--u", type=int, required=True)
    sp.add_argument("--max-kpad", type=int, default=star.MAX_ENUM_KPAD)
    _add_common(sp, seed=False)
    sp.set_defaults(func=cmd_audit_star)

    graph_p = top.add_parser("graph", help="general-graph scheme")
    graph_sub = graph_p.add_subparsers(dest="cmd", required=True)
    gp = graph_sub.add_parser("run", help="one full transcript")
    _add_graph_source(gp)
    gp.add_argument("--theta", required=True, help="desired file as i,j or i,j,k")
    _add_common(gp, l_bits=True)
    gp.set_defaults(func=cmd_graph_run)
    gp = graph_sub.add_parser("rate", help="Monte-Carlo download vs the exact value")
    _add_graph_source(gp)
    gp.add_argument("--trials", type=int, required=True)
    _add_common(gp, workers=True)
    gp.set_defaults(func=cmd_graph_rate)
    gp = graph_sub.add_parser("download", help="exact expected download and bounds")
    _add_graph_source(gp)
    _add_common(gp, seed=False)
    gp.set_defaults(func=cmd_graph_download)

    audit_p = top.add_parser("audit", help="privacy audits")
    audit_sub = audit_p.add_subparsers(dest="cmd", required=True)
    ap = audit_sub.add_parser("star", help="exact star enumeration across all desired files")
    ap.add_argument("--k", type=int, required=True)
    ap.add_argument("--u", type=int, required=True)
    ap.add_argument("--max-kpad", type=int, default=star.MAX_ENUM_KPAD)
    _add_common(ap, seed=False)
    ap.set_defaults(func=cmd_audit_star)
    ap = audit_sub.add_parser("graph", help="exact coin enumeration across all desired files")
    _add_graph_source(ap)
    ap.add_argument("--max-coins", type=int, default=audit_mod.MAX_ENUM_COINS)
    _add_common(ap, seed=False)
    ap.set_defaults(func=cmd_audit_graph)
    ap = audit_sub.add_parser("stat", help="seeded chi-square two-sample audit")
    _add_graph_source(ap)
    ap.add_argument("--theta-a", required=True)
    ap.add_argument("--theta-b", required=True)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--significance", type=float, default=0.01)
    _add_common(ap)
    ap.set_defaults(func=cmd_audit_stat)

    rate_p = top.add_parser("rate", help="experiment sweeps")
    rate_sub = rate_p.add_subparsers(dest="cmd", required=True)
    rp = rate_sub.add_parser("sweep", help="family sweep with bound checks")
    rp.add_argument(
        "--family",
        required=True,
        choices=["complete", "star", "bipartite", "cycle", "complete-multigraph"],
    )
    rp.add_argument("--n-min", type=int, required=True)
    rp.add_argument("--n-max", type=int, required=True)
    rp.add_argument("--r", type=int, default=1)
    rp.add_argument("--trials", type=int, required=True)
    rp.add_argument("--format", choices=["json", "csv"], default=None)
    _add_common(rp, workers=True)
    rp.set_defaults(func=cmd_rate_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ProtocolError, SizeLimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
