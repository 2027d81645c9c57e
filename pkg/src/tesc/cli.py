"""Command-line interface.

Subcommands: ``index`` (offline vicinity-size index), ``test`` (correlation
test between two event files, JSON report), ``simulate`` (synthetic
correlated event pairs), ``bench`` (sampler timing table) and ``gen``
(random benchmark graphs).

Exit codes: 0 = ran to completion (statistical decisions are data, not exit
codes), 2 = usage/config/input error, 1 = runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .engine import TestConfig, evaluate_densities, sweep_levels
from .errors import DegenerateTieError, ParseError, SimulationError, TescError
from .generators import barabasi_albert, watts_strogatz
from .graph import EventSet, Graph, batch_bfs, load_edge_list, load_event_set, load_label_map
from .report import SCHEMA_VERSION, build_report, dump_report
from .sampling import sample_batch_bfs, sample_importance, sample_whole_graph
from .simulate import SimPairSpec, derive_pair_seed, generate_pair
from .stats import kendall_t, tau_b_transaction
from .vicinity import VicinityIndex, build_vicinity_index


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("TESC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    drawn = int(np.random.SeedSequence().entropy % (1 << 63))
    print(f"seed: {drawn}", file=sys.stderr)
    return drawn


def _load_graph(args) -> Graph:
    return load_edge_list(args.graph, node_count=getattr(args, "nodes", None))


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_index(args) -> int:
    graph = _load_graph(args)
    t0 = time.perf_counter()
    index = build_vicinity_index(graph, args.hmax)
    elapsed = time.perf_counter() - t0
    index.save(args.out)
    print(f"nodes: {graph.node_count}")
    for h in range(1, index.h_max + 1):
        print(f"mean |V^({h})|: {index.level(h).mean():.2f}")
    print(f"wall time: {elapsed:.3f}s")
    return 0


def cmd_test(args) -> int:
    if args.sampler == "importance" and not args.index:
        raise UsageError("--sampler importance requires --index")
    graph = _load_graph(args)
    label_map = load_label_map(args.label_map) if args.label_map else None
    a = load_event_set(args.events_a, name="a", node_count=graph.node_count, label_map=label_map)
    b = load_event_set(args.events_b, name="b", node_count=graph.node_count, label_map=label_map)
    if len(a) == 0 or len(b) == 0:
        raise UsageError("event files must contain at least one node")
    index = VicinityIndex.load(args.index) if args.index else None
    if index is not None and index.node_count != graph.node_count:
        raise UsageError(
            f"index covers {index.node_count} nodes but graph has {graph.node_count}"
        )

    seed = _resolve_seed(args.seed)
    cfg = TestConfig(
        n=args.n,
        alpha=args.alpha,
        tail=args.tail,
        sampler=args.sampler,
        batch_k=args.batch_k,
        seed=seed,
        threads=_threads(args.threads),
    )
    outcomes = sweep_levels(graph, a, b, index, cfg, args.h)

    tc = None
    if args.tc:
        try:
            r = tau_b_transaction(a.member_mask(graph.node_count), b.member_mask(graph.node_count))
            tc = {
                "status": "ok",
                "tau_b": r.tau_b,
                "z": r.z,
                "p_one_tailed": r.p_one_tailed,
                "s": r.s,
                "sigma_c_sq": f"{r.sigma_c_sq.numerator}/{r.sigma_c_sq.denominator}",
            }
        except DegenerateTieError as err:
            tc = {"status": "undetermined", "error": str(err)}

    config = {
        "graph": str(args.graph),
        "events_a": str(args.events_a),
        "events_b": str(args.events_b),
        "levels": args.h,
        "n": args.n,
        "sampler": args.sampler,
        "batch_k": args.batch_k,
        "alpha": args.alpha,
        "tail": args.tail,
        "seed": seed,
        "index": str(args.index) if args.index else None,
        "threads": cfg.threads,
        "kernel_backend": BACKEND,
        "version": __version__,
    }
    report = build_report(_echo_argv(args), config, outcomes, tc=tc)
    _emit_json(report, args.out)
    return 0


def cmd_simulate(args) -> int:
    graph = _load_graph(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args.seed)
    polarity = {"pos": "positive", "neg": "negative"}[args.polarity]

    entries = []
    failures = 0
    for i in range(args.pairs):
        pair_seed = derive_pair_seed(seed, polarity, i)
        spec = SimPairSpec(m=args.m, h=args.h, polarity=polarity, noise_p=args.noise, seed=pair_seed)
        entry: dict = {"pair": i, "seed": pair_seed}
        try:
            pair = generate_pair(graph, spec)
            a_file = outdir / f"pair{i:03d}_a.txt"
            b_file = outdir / f"pair{i:03d}_b.txt"
            _write_event_file(a_file, pair.a)
            _write_event_file(b_file, pair.b)
            entry.update(
                {
                    "a_file": a_file.name,
                    "b_file": b_file.name,
                    "size_a": len(pair.a),
                    "size_b": len(pair.b),
                    "fallbacks": pair.fallback_count,
                    "noised": pair.broken_count,
                }
            )
            if polarity == "negative" and args.noise == 0:
                overlap = np.intersect1d(batch_bfs(graph, pair.a.nodes, args.h), pair.b.nodes)
                entry["min_separation_verified"] = bool(overlap.size == 0)
        except (SimulationError, TescError) as err:
            entry["error"] = str(err)
            failures += 1
        entries.append(entry)

    manifest = {
        "schema": "tesc-sim-manifest/1",
        "graph": str(args.graph),
        "polarity": polarity,
        "m": args.m,
        "h": args.h,
        "noise": args.noise,
        "pairs": args.pairs,
        "seed": seed,
        "entries": entries,
    }
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    if args.pairs > 0 and failures == args.pairs:
        print("all pair generations failed", file=sys.stderr)
        return 1
    return 0


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    graph = _load_graph(args)
    for size in args.sizes:
        if size > graph.node_count:
            raise UsageError(f"size {size} exceeds graph node count {graph.node_count}")
        if size < 2:
            raise UsageError("sizes must be >= 2")
    index = VicinityIndex.load(args.index) if args.index else None
    if args.sampler == "importance" and index is None:
        raise UsageError("--sampler importance requires --index")
    seed = _resolve_seed(args.seed)

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        header = ["size", "sampler", "h", "n", "repeats", "sampling_ms_mean", "sampling_ms_min", "sampling_ms_max"]
        if args.full:
            header += ["density_ms_mean", "statistic_ms_mean"]
        print("\t".join(header), file=out)
        rng = np.random.Generator(np.random.PCG64(seed))
        for size in args.sizes:
            times = []
            dens_times = []
            stat_times = []
            for rep in range(args.repeats):
                event_nodes = rng.choice(graph.node_count, size=size, replace=False).astype(np.int32)
                t0 = time.perf_counter()
                if args.sampler == "batch-bfs":
                    sample = sample_batch_bfs(graph, event_nodes, args.h, args.n, int(rng.integers(1 << 62)))
                elif args.sampler == "importance":
                    sample = sample_importance(graph, event_nodes, index, args.h, args.n, args.batch_k, int(rng.integers(1 << 62)))
                else:
                    sample = sample_whole_graph(graph, event_nodes, args.h, args.n, int(rng.integers(1 << 62)))
                times.append((time.perf_counter() - t0) * 1e3)
                if args.full:
                    half = size // 2
                    a = EventSet("a", np.sort(event_nodes[:half]))
                    b = EventSet("b", np.sort(event_nodes[half:]))
                    t1 = time.perf_counter()
                    va, vb = evaluate_densities(graph, sample, a, b)
                    t2 = time.perf_counter()
                    kendall_t(va, vb)
                    t3 = time.perf_counter()
                    dens_times.append((t2 - t1) * 1e3)
                    stat_times.append((t3 - t2) * 1e3)
            row = [
                str(size), args.sampler, str(args.h), str(args.n), str(args.repeats),
                f"{np.mean(times):.3f}", f"{np.min(times):.3f}", f"{np.max(times):.3f}",
            ]
            if args.full:
                row += [f"{np.mean(dens_times):.3f}", f"{np.mean(stat_times):.3f}"]
            print("\t".join(row), file=out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_gen(args) -> int:
    if args.kind == "ws":
        graph = watts_strogatz(args.nodes, args.k, args.beta, args.seed)
    else:
        graph = barabasi_albert(args.nodes, args.m, args.seed)
    u, v = graph.edges()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# generated {args.kind} graph: {graph.node_count} nodes, {graph.edge_count} edges\n")
        chunk = 1 << 16
        for i0 in range(0, u.size, chunk):
            pairs = np.column_stack([u[i0 : i0 + chunk], v[i0 : i0 + chunk]])
            fh.write("\n".join(f"{a} {b}" for a, b in pairs))
            fh.write("\n")
    print(f"wrote {graph.edge_count} edges over {graph.node_count} nodes to {args.out}")
    return 0


def _write_event_file(path: Path, event: EventSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(int(v)) for v in event.nodes))
        fh.write("\n")


def _emit_json(report: dict, out: str) -> None:
    if out == "-":
        dump_report(report, sys.stdout)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            dump_report(report, fh)


def _echo_argv(args) -> list[str]:
    return list(getattr(args, "_argv", sys.argv[1:]))


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tesc",
        description="Two-event structural correlation tests on graphs "
        f"(report schema {SCHEMA_VERSION}, kernels: {BACKEND})",
    )
    parser.add_argument("--version", action="version", version=f"tesc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="precompute the vicinity-size index")
    p.add_argument("--graph", required=True)
    p.add_argument("--nodes", type=int, default=None, help="explicit node count")
    p.add_argument("--hmax", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("test", help="test two event files for structural correlation")
    p.add_argument("--graph", required=True)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--events-a", required=True)
    p.add_argument("--events-b", required=True)
    p.add_argument("--label-map", default=None)
    p.add_argument("--h", type=_int_list, default=[1], help="comma-separated vicinity levels")
    p.add_argument("--n", type=int, default=900)
    p.add_argument("--sampler", choices=["auto", "batch-bfs", "importance", "whole-graph"], default="auto")
    p.add_argument("--batch-k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--tail", choices=["one", "two"], default="one")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--tc", action="store_true", help="also report transaction correlation (tau-b)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="-", help="report path or - for stdout")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="generate synthetic correlated event pairs")
    p.add_argument("--graph", required=True)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--polarity", choices=["pos", "neg"], required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time reference-node sampling")
    p.add_argument("--graph", required=True)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--sampler", choices=["batch-bfs", "importance", "whole-graph"], required=True)
    p.add_argument("--batch-k", type=int, default=None)
    p.add_argument("--n", type=int, default=900)
    p.add_argument("--repeats", type=int, required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--full", action="store_true", help="also time density + statistic phases")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a random benchmark graph")
    p.add_argument("--kind", choices=["ws", "ba"], required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--k", type=int, default=10, help="ws: ring-lattice degree")
    p.add_argument("--beta", type=float, default=0.1, help="ws: rewiring probability")
    p.add_argument("--m", type=int, default=5, help="ba: edges per new node")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except (UsageError, ParseError, FileNotFoundError, IsADirectoryError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except TescError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
