"""Command-line frontend.

Subcommands: ``convert`` (edge list -> binary graph), ``walk`` (run an
application), ``bench`` (sampler microbenchmarks as CSV), ``verify``
(distribution checks with a JSON report). Exit codes: 0 success,
1 verification failure, 2 usage error, 3 I/O or file-format error.

Every subcommand accepts ``--config FILE`` with flat ``key=value`` lines
('#' comments); explicit flags override file values, and the fully
resolved configuration is logged before the run.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import bench as B
from . import engine as E
from . import graph as G
from . import trials as T
from .apps import AppConfig
from .errors import (ConfigError, FormatError, ParseError, ReswalkError,
                     ValidationError)

log = logging.getLogger("reswalk")


def _parse_sizes(text):
    """Comma list of sizes; each item is an int or '2^k'."""
    out = []
    for item in text.split(","):
        item = item.strip()
        out.append(1 << int(item[2:]) if item.startswith("2^") else int(item))
    return out


def _parse_int_list(text):
    return [int(x) for x in text.split(",")]


def _parse_float_list(text):
    return [float(x) for x in text.split(",")]


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key=value", line=lineno)
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def apply_config(parser, namespace_defaults, path):
    """Turn file values into parser defaults so explicit flags still win."""
    raw = read_config_file(path)
    coerced = {}
    actions = {a.dest: a for a in parser._actions}
    for key, val in raw.items():
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            coerced[key] = val.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            coerced[key] = action.type(val)
        else:
            coerced[key] = val
    namespace_defaults.update(coerced)


def load_graph(path):
    """Binary graphs by magic, anything else as a text edge list."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == G.MAGIC:
        return G.load_binary(path)
    with open(path) as fh:
        edges = G.parse_edge_list(fh)
    return G.build_csr(edges)


def graph_nbytes(g):
    total = g.offsets.nbytes + g.targets.nbytes + g.weights.nbytes
    if g.labels is not None:
        total += g.labels.nbytes
    return total


def cmd_convert(args):
    edges = G.parse_edge_list(open(args.input), undirected=args.undirected)
    g = G.build_csr(edges, vertex_count=args.vertex_count)
    if args.gen_weights:
        g = G.synthesize_weights(g, args.seed, args.gen_weights,
                                 mu=args.mu, sigma=args.sigma)
    if args.gen_labels:
        g = G.synthesize_labels(g, args.seed, args.gen_labels)
    G.save_binary(g, args.output)
    log.info("wrote %s: %d vertices, %d edges", args.output,
             g.vertex_count, g.edge_count)
    print(json.dumps({"vertices": g.vertex_count, "edges": g.edge_count,
                      "out": args.output}))
    return 0


def _pick_starts(args, g):
    given = sum(bool(x) for x in
                (args.queries, args.starts, args.all_vertices))
    if given > 1:
        raise ConfigError("--queries, --starts and --all-vertices conflict")
    if args.ppr_hub:
        hub = g.max_degree_vertex()
        count = args.queries or g.vertex_count
        return np.full(count, hub, dtype=np.int64)
    if args.starts:
        return np.loadtxt(args.starts, dtype=np.int64, ndmin=1)
    if args.all_vertices:
        return np.arange(g.vertex_count, dtype=np.int64)
    count = args.queries or g.vertex_count
    rng = np.random.default_rng(args.seed)
    return rng.integers(0, g.vertex_count, count, dtype=np.int64)


def cmd_walk(args):
    g = load_graph(args.graph)
    app = AppConfig(app=args.app, length=args.length,
                    stop_prob=args.stop_prob, a=args.a, b=args.b,
                    schema=tuple(_parse_int_list(args.schema)),
                    weighted=args.weighted).validate()
    eng = E.EngineConfig(workers=args.workers, k_small=args.ks,
                         k_big=args.kb, local_pool=args.local_pool,
                         degree_threshold=args.dt,
                         memory_budget=args.mem_budget,
                         graph_bytes=(args.graph_bytes if args.graph_bytes
                                      else graph_nbytes(g)),
                         replay=args.replay, sampler=args.sampler).validate()
    starts = _pick_starts(args, g)
    if args.out:
        stats = E.write_result_file(args.out, g, starts, app, eng,
                                    seed=args.seed)
    else:
        stats = E.run(g, starts, app, eng, seed=args.seed)
    report = E.throughput_report(stats)
    summary = {
        "queries": stats.queries,
        "batches": stats.batches,
        "elapsed_ms": stats.elapsed_s * 1e3,
        "edges_per_sec": report["edges_per_sec"],
        "steps": stats.steps,
        "steps_per_sec": report["steps_per_sec"],
        "collectives": stats.collectives,
        "completed": stats.completed,
        "out": args.out,
        "app": args.app,
        "seed": args.seed,
    }
    print(json.dumps(summary))
    return 0


def cmd_bench(args):
    samplers = args.sampler.split(",")
    for s in samplers:
        if s not in T.SAMPLERS:
            raise ConfigError(f"unknown sampler {s!r}")
    ks = _parse_int_list(args.k)
    sizes = _parse_sizes(args.sampling_size)
    sigmas = _parse_float_list(args.sigmas) if args.sigmas else [None]
    sweep = args.sigmas is not None and len(sigmas) > 1
    lines = [B.CSV_HEADER + (",sigma" if sweep else "")]
    for sigma in sigmas:
        kind = "lognormal" if sigma is not None else args.weights
        rows = B.bench_grid(samplers, ks, sizes,
                            element_budget=args.budget, kind=kind,
                            sigma=sigma if sigma is not None else 1.0,
                            seed=args.seed, repeats=args.repeats)
        for row in rows:
            lines.append(row.csv() + (f",{sigma:g}" if sweep else ""))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args):
    if args.weights:
        weights = np.array(_parse_float_list(args.weights))
    elif args.gen:
        parts = args.gen.split(":")
        kind = parts[0]
        n = int(parts[1])
        sigma = float(parts[2]) if len(parts) > 2 else 1.0
        weights = B.make_weights(n, kind=kind, sigma=sigma, seed=args.seed)
    else:
        raise ConfigError("verify needs --weights or --gen")
    if args.sampler == "uniform-control":
        # negative control: time a deliberately wrong sampler through the
        # same gate to prove the harness can fail
        res = T.run_trials("uniform-control", weights, args.trials, args.seed,
                           k=args.k)
        from . import stats as S
        expected = S.analytic_dist(weights)
        observed = res.empirical()
        stat, dof = S.chi_square(expected, observed)
        report = T.CellReport(
            sampler=args.sampler, k=args.k, n=len(weights),
            trials=args.trials, tvd=S.tvd(expected, observed.probs()),
            tvd_threshold=S.tvd_threshold(len(weights) + 1, args.trials),
            chi2=stat, dof=dof, chi2_threshold=S.chi_square_threshold(dof),
            passed=bool(stat <= S.chi_square_threshold(dof)))
    else:
        if args.sampler not in T.SAMPLERS:
            raise ConfigError(f"unknown sampler {args.sampler!r}")
        report = T.verify_cell(args.sampler, weights, args.trials, args.seed,
                               k=args.k, max_rounds=args.max_rounds)
    print(json.dumps(report.to_dict()))
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="reswalk",
        description="dynamic graph random walks via reservoir sampling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="edge list -> binary graph")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--config")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--vertex-count", type=int, default=None)
    p.add_argument("--gen-weights", choices=["uniform", "lognormal"])
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gen-labels", type=int, default=0,
                   help="synthesize labels in [0, N)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("walk", help="run a walk application")
    p.add_argument("--config")
    p.add_argument("--graph", required=True)
    p.add_argument("--app", default="deepwalk",
                   choices=["deepwalk", "ppr", "node2vec", "metapath"])
    p.add_argument("--length", type=int, default=80)
    p.add_argument("--stop-prob", type=float, default=0.2)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--schema", default="0,1,2,3,4")
    p.add_argument("--weighted", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--queries", type=int, default=0)
    p.add_argument("--starts", help="file with one start vertex per line")
    p.add_argument("--all-vertices", action="store_true")
    p.add_argument("--ppr-hub", action="store_true",
                   help="start every query at the max-degree vertex")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dt", type=int, default=1024)
    p.add_argument("--local-pool", type=int, default=64)
    p.add_argument("--ks", type=int, default=32)
    p.add_argument("--kb", type=int, default=256)
    p.add_argument("--mem-budget", type=int, default=None)
    p.add_argument("--graph-bytes", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--replay", action="store_true")
    p.add_argument("--sampler", default="auto",
                   choices=["auto", "zprs", "dprs"])
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("bench", help="sampler microbenchmarks (CSV)")
    p.add_argument("--config")
    p.add_argument("--sampler", default="seq,dprs,zprs,its,alias,rjs",
                   help="comma list of methods to measure")
    p.add_argument("--k", default="32,256", help="comma list of lane widths")
    p.add_argument("--sampling-size", default="2^6,2^10,2^14",
                   help="comma list of task sizes; 2^k accepted")
    p.add_argument("--budget", type=int, default=1 << 22,
                   help="elements sampled per cell")
    p.add_argument("--weights", default="uniform",
                   choices=["uniform", "lognormal"])
    p.add_argument("--sigmas", default=None,
                   help="log-normal sigma sweep, e.g. 1,2,3")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="distribution check, JSON verdict")
    p.add_argument("--config")
    p.add_argument("--sampler", required=True)
    p.add_argument("--weights", help="comma-separated weight vector")
    p.add_argument("--gen", help="uniform:N or lognormal:N:SIGMA")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--k", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=10_000)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        defaults = {}
        try:
            apply_config(subparser, defaults, args.config)
        except OSError as exc:
            log.error("cannot read config: %s", exc)
            return 3
        except (ParseError, ConfigError) as exc:
            log.error("%s", exc)
            return 2
        # re-parse with file values as defaults so explicit flags override
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    log.info("resolved config: %s", json.dumps(resolved, default=str))
    try:
        return args.func(args)
    except (ParseError, ValidationError, ConfigError) as exc:
        log.error("%s", exc)
        return 2
    except FormatError as exc:
        log.error("%s", exc)
        return 3
    except OSError as exc:
        log.error("%s", exc)
        return 3
    except ReswalkError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
