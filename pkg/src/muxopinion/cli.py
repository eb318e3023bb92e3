"""Command-line entry point: ``muxopinion <subcommand> ...``.

Data goes to ``--out`` (or stdout) only after the computation succeeded;
diagnostics go to stderr. Exit codes: 0 ok, 1 input, 2 condition violation,
3 numerical failure, 4 capacity.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .analysis import MEASURES, benchmark, canonical_measure, compare_measures
from .dynamics import fixed_point, simulate
from .errors import InputError, MuxOpinionError
from .multiplex import ModelParams, effective_matrix, validate_conditions
from .opinion import (DENSE_CAP, gamma_lower_bound, naive_opinion_centrality,
                      opinion_centrality, raw_opinion_score, solve_romp_numeric)
from .results import CentralityResult
from .toynet import BarrelSpec, alpha_sweep, barrel_params, build_barrel, table1_comparison

log = logging.getLogger("muxopinion")


# --- argument parsing --------------------------------------------------------

def _output_args(p):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _model_args(p, edges=True):
    if edges:
        p.add_argument("--edges", action="append", default=[], metavar="PATH",
                       help="edge list 'source target layer weight' (repeatable)")
        p.add_argument("--layer-file", action="append", default=[], metavar="NAME=PATH",
                       help="per-layer list 'source target [weight]' (repeatable)")
        p.add_argument("--normalize", choices=("strict", "cap", "stochastic"))
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--budget", type=float)
    p.add_argument("--gamma", help="positive number or 'auto'")
    alpha = p.add_mutually_exclusive_group()
    alpha.add_argument("--alpha-uniform", type=float, dest="alpha_hat", metavar="A")
    alpha.add_argument("--alpha-file", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="muxopinion",
                                 description="Opinion-based centrality for multiplex networks.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("opinion", help="regularized opinion centrality")
    _model_args(p)
    p.add_argument("--raw", action="store_true", help="report the raw column influence instead")
    p.add_argument("--max-dense", type=int, default=DENSE_CAP)
    _output_args(p)

    p = sub.add_parser("naive", help="unregularized (single-vertex) opinion centrality")
    _model_args(p)
    _output_args(p)

    p = sub.add_parser("simulate", help="event-driven opinion dynamics")
    _model_args(p)
    p.add_argument("--lambda", dest="lam", required=True,
                   help="external rate: one number for every node, or a comma list in node order")
    p.add_argument("--delta", type=float)
    p.add_argument("--events", type=int, default=1_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--sample-every", type=int, default=1000)
    p.add_argument("--trace-out", metavar="PATH", help="write sampled opinions (event,node,x)")
    p.add_argument("--backend", choices=("numba", "numpy"))
    _output_args(p)

    p = sub.add_parser("barrel", help="barrel toy network")
    p.add_argument("--nodes", type=int, default=12)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--e0", type=float, default=0.1)
    p.add_argument("--e1", type=float, default=0.2)
    p.add_argument("--e2", type=float, default=0.3)
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--gamma", default="1", help="positive number or 'auto' (default 1)")
    p.add_argument("--alpha-uniform", type=float, default=1.0, dest="alpha_hat")
    p.add_argument("--damping", type=float, default=0.8, help="PageRank damping for --check-table1")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--alpha-sweep", metavar="A:B:STEPS")
    mode.add_argument("--check-table1", action="store_true")
    _output_args(p)

    p = sub.add_parser("compare", help="opinion centrality against standard measures")
    _model_args(p)
    p.add_argument("--measures", default=",".join(MEASURES))
    p.add_argument("--top-k", type=int)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--matrix", action="store_true", help="CSV: full Spearman matrix")
    _output_args(p)

    p = sub.add_parser("bench", help="time measures on random multiplex networks")
    p.add_argument("--sizes", default="100,200,400")
    p.add_argument("--measures", default="opinion,pagerank,degree-total")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--mean-degree", type=float, default=8.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-dense", type=int, default=DENSE_CAP)
    _output_args(p)

    p = sub.add_parser("validate", help="check the convergence conditions")
    _model_args(p)
    _output_args(p)
    return ap


# --- helpers -------------------------------------------------------------------

def _parse_gamma(text):
    if text is None:
        return None
    if str(text).strip().lower() == "auto":
        return "auto"
    try:
        g = float(text)
    except ValueError:
        raise InputError(f"--gamma must be a number or 'auto', got {text!r}") from None
    if not g > 0:
        raise InputError(f"--gamma must be > 0, got {text}")
    return g


def _config(args) -> mio.RunConfig:
    cfg = mio.RunConfig()
    if getattr(args, "config", None):
        cfg = mio.parse_config(Path(args.config).read_text())
    return cfg.with_overrides(
        budget=getattr(args, "budget", None),
        gamma=_parse_gamma(getattr(args, "gamma", None)),
        alpha_hat=getattr(args, "alpha_hat", None),
        alpha_file=getattr(args, "alpha_file", None),
        delta=getattr(args, "delta", None),
        seed=getattr(args, "seed", None),
        normalize=getattr(args, "normalize", None),
    )


def _load(args, cfg, **param_kw):
    net = mio.load_network(args.edges, args.layer_file, cfg.normalize)
    if cfg.alpha_mode == "file":
        alpha = mio.parse_alpha_table(Path(cfg.alpha_file).read_text(), net)
    else:
        alpha = np.full((net.n_nodes, net.n_layers), float(cfg.alpha_hat))
    params = ModelParams(alpha=alpha, gamma=cfg.gamma, delta=cfg.delta, **param_kw)
    return net, params


def _parse_lambda(text, n):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"--lambda must be numbers, got {text!r}") from None
    if len(vals) == 1:
        return np.full(n, vals[0])
    if len(vals) != n:
        raise InputError(f"--lambda has {len(vals)} values for {n} nodes")
    return np.asarray(vals)


def _parse_sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--alpha-sweep must be A:B:STEPS, got {text!r}")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"--alpha-sweep must be A:B:STEPS, got {text!r}") from None
    if steps < 1 or not (a > 0 and b > 0):
        raise InputError("--alpha-sweep needs positive endpoints and STEPS >= 1")
    return np.linspace(a, b, steps)


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


# --- subcommands -----------------------------------------------------------

def cmd_opinion(args) -> str:
    cfg = _config(args)
    net, params = _load(args, cfg, budget=cfg.budget)
    eff = effective_matrix(net, params)
    if args.raw:
        res = CentralityResult("raw-opinion", net.node_ids, raw_opinion_score(eff),
                               diagnostics={"Lambda": eff.Lambda})
    elif cfg.utility == "linear":
        res = opinion_centrality(eff, cfg.budget, cfg.gamma, max_dense=args.max_dense)
    else:
        gamma = cfg.gamma
        if gamma == "auto":
            gamma = 2.0 * gamma_lower_bound(eff, cfg.budget, args.max_dense)
        lam = solve_romp_numeric(eff, cfg.budget, gamma, cfg.utility_spec(net))
        res = CentralityResult(f"opinion-{cfg.utility}", net.node_ids, lam, cfg.budget,
                               {"Lambda": eff.Lambda, "gamma": gamma, "utility": cfg.utility})
    return mio.write_report(res, args.format)


def cmd_naive(args) -> str:
    cfg = _config(args)
    net, params = _load(args, cfg, budget=cfg.budget)
    return mio.write_report(naive_opinion_centrality(effective_matrix(net, params), cfg.budget),
                            args.format)


def cmd_simulate(args) -> str:
    cfg = _config(args)
    net = mio.load_network(args.edges, args.layer_file, cfg.normalize)
    lam = _parse_lambda(args.lam, net.n_nodes)
    _, params = _load(args, cfg, lam=lam)
    eff = effective_matrix(net, params)
    target = fixed_point(eff, lam)
    trace = simulate(net, params, args.events, seed=cfg.seed, sample_every=args.sample_every,
                     backend=args.backend)
    trace_text = mio.write_trace(trace) if args.trace_out else None
    rows = [{"node": n, "time_average": a, "fixed_point": t, "abs_diff": abs(a - t)}
            for n, a, t in zip(net.node_ids, trace.time_average.tolist(), target.tolist())]
    if args.format == "json":
        out = mio.dump_json({"events": args.events, "seed": cfg.seed, "delta": cfg.delta,
                             "tail_start": trace.tail_start, "nodes": rows,
                             "max_abs_diff": trace.deviation(target)})
    else:
        out = mio.write_rows(rows, ("node", "time_average", "fixed_point", "abs_diff"))
    if trace_text is not None:
        Path(args.trace_out).write_text(trace_text)
    return out


def cmd_barrel(args) -> str:
    spec = BarrelSpec(args.nodes, args.layers, args.e0, args.e1, args.e2)
    gamma = _parse_gamma(args.gamma)
    if not args.budget > 0:
        raise InputError("--budget must be > 0")
    if args.check_table1:
        rows = table1_comparison(spec, args.alpha_hat, args.budget, args.damping)
        if args.format == "json":
            return mio.dump_json(rows)
        return mio.write_rows(rows, ("node_class", "measure", "computed", "reference",
                                     "derived", "abs_diff"))
    if args.alpha_sweep:
        sweep = alpha_sweep(spec, args.budget, gamma, _parse_sweep(args.alpha_sweep))
        rows = [{"alpha_hat": r.alpha_hat, **r.class_shares, "max_deviation": r.max_deviation}
                for r in sweep]
        if args.format == "json":
            return mio.dump_json(rows)
        return mio.write_rows(rows, ("alpha_hat", "hub1", "hub2", "leaf1", "leaf2",
                                     "max_deviation"))
    net = build_barrel(spec)
    eff = effective_matrix(net, barrel_params(spec, args.alpha_hat, args.budget))
    return mio.write_report(opinion_centrality(eff, args.budget, gamma), args.format)


def cmd_compare(args) -> str:
    cfg = _config(args)
    net, params = _load(args, cfg, budget=cfg.budget)
    rep = compare_measures(net, params, _csv_list(args.measures), top_k=args.top_k,
                           damping=args.damping)
    for note in rep.notices:
        print(f"notice: {note}", file=sys.stderr)
    if args.matrix and args.format == "csv":
        return mio.write_matrix_csv(rep)
    return mio.write_report(rep, args.format)


def cmd_bench(args) -> str:
    try:
        sizes = [int(s) for s in _csv_list(args.sizes)]
    except ValueError:
        raise InputError(f"--sizes must be integers, got {args.sizes!r}") from None
    measures = [canonical_measure(m) for m in _csv_list(args.measures)]
    rows = benchmark(sizes, measures, repetitions=args.reps, n_layers=args.layers,
                     mean_degree=args.mean_degree, seed=args.seed, max_dense=args.max_dense)
    if args.format == "json":
        return mio.dump_json(rows)
    return mio.write_rows(rows, ("size", "measure", "seconds", "status", "repetitions"))


class _ValidationFailed(Exception):
    def __init__(self, text):
        self.text = text


def cmd_validate(args) -> str:
    cfg = _config(args)
    net, params = _load(args, cfg, budget=cfg.budget)
    report = validate_conditions(effective_matrix(net, params))
    doc = report.as_dict()
    if args.format == "json":
        text = mio.dump_json(doc)
    else:
        rows = [{"key": k, "value": ";".join(map(str, v)) if isinstance(v, list) else v}
                for k, v in doc.items()]
        text = mio.write_rows(rows, ("key", "value"))
    if not report.ok:
        raise _ValidationFailed(text)
    return text


COMMANDS = {
    "opinion": cmd_opinion, "naive": cmd_naive, "simulate": cmd_simulate,
    "barrel": cmd_barrel, "compare": cmd_compare, "bench": cmd_bench,
    "validate": cmd_validate,
}


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are input errors
        return 0 if exc.code == 0 else 1
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        text = COMMANDS[args.command](args)
    except _ValidationFailed as exc:
        # the condition report is the data; it is shown on stderr and the run fails
        sys.stderr.write(exc.text)
        print("error: convergence conditions violated", file=sys.stderr)
        return 2
    except MuxOpinionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
