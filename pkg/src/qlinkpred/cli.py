"""Command-line entry point: ``qlinkpred <command> [options]``.

Every CSV or edge-list output starts with a ``#`` provenance line holding
the fully resolved options and their hash. Output paths and ``--threads``
are left out of it because they cannot change the results.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from importlib import resources

from . import harness
from .classical import (
    SupportExhaustedError,
    a2_prepare,
    a2_sample_useful,
    a3_prepare,
    a3_sample_useful,
)
from .graph import GraphError, QueryLedger, load_edge_list, write_edge_list
from .metrics import RegimeError, crossover_samples, kmax_scalefree, query_cost_table
from .qlp import decompose, evolve, qlp_sample_useful
from .sampling import EmptySupportError, derive_stream

log = logging.getLogger("qlinkpred")

EXIT_ERROR = 1
EXIT_EXHAUSTED = 3

BUNDLED = {"karate": "karate.edges"}


def _threads(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("QLP_THREADS")
    return int(env) if env else 1


def _open_graph(source: str):
    """Load an edge-list path, or a bundled network given as ``bundled:<name>``."""
    if source.startswith("bundled:"):
        name = source.split(":", 1)[1]
        if name not in BUNDLED:
            raise GraphError(f"no bundled network {name!r}; have {sorted(BUNDLED)}")
        with resources.files("qlinkpred.data").joinpath(BUNDLED[name]).open(encoding="utf-8") as fh:
            return load_edge_list(fh)
    with open(source, encoding="utf-8") as fh:
        return load_edge_list(fh)


def _config(args, drop=("out", "queries", "threads", "func", "verbose")) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _output(path):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


# ------------------------------------------------------------ commands

def cmd_gen(args) -> int:
    g = harness.generate(args.model, args.n, args.kav, args.seed)
    with _output(args.out) as fh:
        write_edge_list(g, fh, [harness.provenance(_config(args))])
    log.info("wrote N=%d |E|=%d", g.node_count, g.edge_count)
    return 0


def cmd_sample(args) -> int:
    g, _ = _open_graph(args.graph)
    ledger = QueryLedger()
    rng = derive_stream(args.seed, 0)
    if args.method == "a2":
        recs = a2_sample_useful(g, ledger, a2_prepare(g, ledger), rng, args.ns, args.attempt_cap)
    elif args.method == "a3":
        recs = a3_sample_useful(g, ledger, a3_prepare(g, ledger), rng, args.ns, args.attempt_cap)
    else:
        recs = qlp_sample_useful(g, evolve(decompose(g), args.t), rng, args.ns, args.attempt_cap)
    cfg = _config(args)
    labels = g.labels
    with _output(args.out) as fh:
        fh.write(f"# {harness.provenance(cfg)}\n")
        fh.write("method,i,j,raw_attempts\n")
        for r in recs:
            fh.write(f"{r.method},{labels[r.i]},{labels[r.j]},{r.raw_attempts}\n")
    row = harness.QueryRow(args.method, args.ns, *ledger.as_tuple(), sum(r.raw_attempts for r in recs))
    if args.queries:
        with _output(args.queries) as fh:
            harness.write_rows(fh, harness.QUERY_FIELDS, [row], cfg)
    else:
        print(",".join(harness.QUERY_FIELDS), file=sys.stderr)
        print(",".join(str(getattr(row, f)) for f in harness.QUERY_FIELDS), file=sys.stderr)
    return 0


def _t_grid(args) -> list[float]:
    if args.t:
        return sorted(set(args.t))
    return harness.log_grid(args.tmin, args.tmax, args.tpoints)


def cmd_xval(args) -> int:
    g, _ = _open_graph(args.graph)
    config = harness.ExperimentConfig(
        network=args.name or os.path.basename(args.graph).removeprefix("bundled:"),
        graph_path=args.graph, t_grid=_t_grid(args), folds=args.folds, seed=args.seed,
    )
    points = harness.sweep_t(config, graph=g, threads=_threads(args.threads))
    cfg = _config(args)
    cfg["resolved_t_grid"] = config.t_grid
    with _output(args.out) as fh:
        harness.write_rows(fh, harness.CURVE_FIELDS, points, cfg)
    if args.spot_check:
        split = harness.kfold_split(g, args.folds, derive_stream(args.seed, 0))[0]
        for method, (exact, est) in harness.baseline_spot_check(split, args.spot_check, args.seed).items():
            print(f"spot check {method}: exact p_C|G={exact} sampled={est}", file=sys.stderr)
    return 0


def cmd_scaling(args) -> int:
    ts = _t_grid(args)
    seeds = list(range(args.seed, args.seed + args.seeds))
    threads = _threads(args.threads)
    rows = []
    for model in args.model:
        if len(args.kav) == 1:
            rows += harness.sweep_size(model, args.n, args.kav[0], ts, seeds, threads)
        else:
            for n in args.n:
                rows += harness.sweep_density(model, n, args.kav, ts, seeds, threads)
    cfg = _config(args)
    cfg["resolved_t_grid"] = ts
    with _output(args.out) as fh:
        harness.write_rows(fh, harness.SCALING_FIELDS, rows, cfg)
    for model in args.model:
        sub = [r for r in rows if r.model == model]
        for t in ts:
            print(f"{model} t={t:g}: relative spread across N = {harness.relative_spread(sub, t):.4f}",
                  file=sys.stderr)
    return 0


def cmd_cost(args) -> int:
    kmax = args.kmax
    if kmax is None:
        if args.gamma is None:
            raise RegimeError("give --kmax or --gamma")
        kmax = kmax_scalefree(args.n, args.gamma)
    elif args.gamma is not None:
        kmax_scalefree(args.n, args.gamma)  # validates the regime
    edges = args.edges if args.edges is not None else args.n * args.kav / 2
    table = query_cost_table(args.n, edges, args.ns, args.pg, kmax, args.t)
    cfg = _config(args)
    cfg.update(resolved_edges=edges, resolved_kmax=kmax)
    print(f"# {harness.provenance(cfg)}")
    print(f"N={args.n:g} |E|={edges:g} n_s={args.ns:g} p_G={args.pg:g} k_max={kmax:g} t={args.t:g}")
    print(f"{'method':<8}{'queries':>16}  note")
    for name in ("A2", "A3", "QLP"):
        est = table[name]
        print(f"{name:<8}{_num(est.queries):>16}  {est.note}")
    print(f"QLP exceeds A2 once n_s > {_num(table.crossover_ns)}")
    if args.gamma is not None:
        print(f"scale-free crossover (gamma={args.gamma:g}): n_s < N^((gamma-2)/(gamma-1)) = "
              f"{_num(crossover_samples(args.n, args.gamma))}")
    return 0


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.10g}"


def cmd_check(args) -> int:
    if args.graph:
        g, _ = _open_graph(args.graph)
    else:
        g = harness.generate(args.model, args.n, args.kav, args.seed)
    rep = harness.distribution_check(args.method, g, args.draws, derive_stream(args.seed, 1), args.t)
    print(f"method={rep.method} N={g.node_count} draws={rep.draws} support={rep.support} "
          f"tv={rep.tv:.5f} exact_sampler_tv={rep.null_tv:.5f} chi2_p={rep.chi2_pvalue:.4g}")
    return 0


# ------------------------------------------------------------ parser

def _positive_int(s: str) -> int:
    v = int(float(s))
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlinkpred", description=__doc__.splitlines()[0],
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def threads(sp):
        sp.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $QLP_THREADS or 1); never changes output")

    g = sub.add_parser("gen", help="generate a synthetic network edge list", formatter_class=fmt)
    g.add_argument("--model", choices=sorted(harness.GENERATORS), required=True)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--kav", type=float, required=True, help="target mean degree")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="draw useful link samples", formatter_class=fmt)
    s.add_argument("--graph", required=True, help="edge-list path or bundled:<name>")
    s.add_argument("--method", choices=["a2", "a3", "qlp"], required=True)
    s.add_argument("--t", type=float, default=1.0, help="walk time (qlp only)")
    s.add_argument("--ns", type=_positive_int, default=10, help="useful samples")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--attempt-cap", type=_positive_int, default=None,
                   help="raw-draw cap (default max(1e6, 1e4*ns))")
    s.add_argument("--out", default="-", help="samples CSV")
    s.add_argument("--queries", default=None, help="queries.csv path (default: stderr)")
    s.set_defaults(func=cmd_sample)

    def grid(sp, tmin):
        sp.add_argument("--t", type=float, nargs="+", default=None, help="explicit walk times")
        sp.add_argument("--tmin", type=float, default=tmin)
        sp.add_argument("--tmax", type=float, default=10.0)
        sp.add_argument("--tpoints", type=_positive_int, default=60, help="log-spaced grid size")

    x = sub.add_parser("xval", help="k-fold precision curves (curves.csv)", formatter_class=fmt)
    x.add_argument("--graph", required=True, help="edge-list path or bundled:<name>")
    x.add_argument("--name", default=None, help="network column value")
    grid(x, harness.MIN_CURVE_T)
    x.add_argument("--folds", type=int, default=10)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--spot-check", type=int, default=0,
                   help="if >0, compare exact and sampled classical precision on fold 0")
    x.add_argument("--out", default="-")
    threads(x)
    x.set_defaults(func=cmd_xval)

    c = sub.add_parser("scaling", help="p_G(t) versus N or k_av (scaling.csv)", formatter_class=fmt)
    c.add_argument("--model", nargs="+", choices=sorted(harness.GENERATORS), required=True)
    c.add_argument("--n", type=_positive_int, nargs="+", required=True)
    c.add_argument("--kav", type=float, nargs="+", default=[10.0])
    grid(c, 0.05)
    c.add_argument("--seeds", type=_positive_int, default=10, help="replicates per cell")
    c.add_argument("--seed", type=int, default=0, help="first replicate seed")
    c.add_argument("--out", default="-")
    threads(c)
    c.set_defaults(func=cmd_scaling)

    q = sub.add_parser("cost", help="query-cost comparison table", formatter_class=fmt)
    q.add_argument("--n", type=float, required=True)
    q.add_argument("--edges", type=float, default=None, help="|E| (default N*kav/2)")
    q.add_argument("--kav", type=float, default=10.0)
    q.add_argument("--ns", type=float, default=1.0)
    q.add_argument("--pg", type=float, default=0.5)
    q.add_argument("--kmax", type=float, default=None, help="default N^(1/(gamma-1))")
    q.add_argument("--t", type=float, default=1.0)
    q.add_argument("--gamma", type=float, default=None)
    q.set_defaults(func=cmd_cost)

    k = sub.add_parser("check", help="TV distance of raw samples to the exact law", formatter_class=fmt)
    k.add_argument("--method", choices=["a2", "a3", "qlp"], required=True)
    k.add_argument("--graph", default=None)
    k.add_argument("--model", choices=sorted(harness.GENERATORS), default="er")
    k.add_argument("--n", type=_positive_int, default=32)
    k.add_argument("--kav", type=float, default=6.0)
    k.add_argument("--t", type=float, default=1.0)
    k.add_argument("--draws", type=_positive_int, default=100000)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SupportExhaustedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (ValueError, GraphError, EmptySupportError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
