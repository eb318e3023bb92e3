"""Rank correlation, rank differences, measure comparison and timing."""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import (degree_centrality, eigenvector_centrality, hits, katz_centrality,
                        pagerank)
from .errors import CapacityError, InputError, MuxOpinionError
from .multiplex import ModelParams, MultiplexNetwork, aggregate, effective_matrix, random_multiplex
from .opinion import DENSE_CAP, gamma_lower_bound, opinion_centrality
from .results import CentralityResult, fractional_ranks

log = logging.getLogger(__name__)

__all__ = [
    "fractional_ranks", "spearman", "rank_difference", "RankDifference",
    "ComparisonReport", "compare_measures", "benchmark", "MEASURES", "canonical_measure",
]


def spearman(x, y) -> float:
    """Spearman's rho as the Pearson correlation of fractional ranks.

    Handles ties. Returns ``nan`` (undefined) when either input has constant ranks.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("spearman needs two 1-d inputs of equal length")
    if x.size < 2:
        raise InputError("spearman needs at least two observations")
    rx = fractional_ranks(x)
    ry = fractional_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if den == 0:
        return math.nan
    return float(np.clip((dx @ dy) / den, -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class RankDifference:
    """Per-node ``rank_a - rank_b``, ordered by ascending value of measure a."""

    measure_a: str
    measure_b: str
    node_ids: tuple
    deltas: np.ndarray
    normalized: bool

    def as_dict(self) -> dict:
        return dict(zip(self.node_ids, self.deltas.tolist()))


def rank_difference(a: CentralityResult, b: CentralityResult, normalize: bool = False,
                    top_k: int | None = None) -> RankDifference:
    if tuple(a.node_ids) != tuple(b.node_ids):
        raise InputError("rank_difference needs results over the same node set")
    n = len(a)
    delta = a.ranks - b.ranks
    if normalize:
        delta = delta / (n - 1) if n > 1 else np.zeros(n)
    # ascending value of a; stable, so equal values keep first-seen order
    order = np.argsort(a.values, kind="stable")
    if top_k is not None:
        keep = set(np.argsort(a.ranks, kind="stable")[:top_k].tolist())
        order = np.array([i for i in order if i in keep], dtype=int)
    return RankDifference(a.measure, b.measure, tuple(a.node_ids[i] for i in order),
                          delta[order], normalize)


def _opinion(ctx):
    return opinion_centrality(ctx.eff, ctx.R, ctx.gamma, conditions=False)


def _hits(ctx, which):
    if ctx.hits is None:
        ctx.hits = hits(ctx.graph)
    return ctx.hits[0 if which == "hub" else 1]


MEASURES = {
    "opinion": _opinion,
    "degree-total": lambda ctx: degree_centrality(ctx.graph, "total"),
    "degree-in": lambda ctx: degree_centrality(ctx.graph, "in"),
    "degree-out": lambda ctx: degree_centrality(ctx.graph, "out"),
    "pagerank": lambda ctx: pagerank(ctx.graph, damping=ctx.damping),
    "eigenvector": lambda ctx: eigenvector_centrality(ctx.graph),
    "katz": lambda ctx: katz_centrality(ctx.graph),
    "hits-hub": lambda ctx: _hits(ctx, "hub"),
    "hits-authority": lambda ctx: _hits(ctx, "authority"),
}
DIRECTED_ONLY = ("degree-in", "degree-out")
_ALIASES = {
    "degree": "degree-total", "total-degree": "degree-total",
    "in-degree": "degree-in", "indegree": "degree-in",
    "out-degree": "degree-out", "outdegree": "degree-out",
    "hub": "hits-hub", "hubs": "hits-hub", "authority": "hits-authority",
    "authorities": "hits-authority", "eigen": "eigenvector",
}


def canonical_measure(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in MEASURES and key != "gamma-bound":
        raise InputError(f"unknown measure {name!r}; known: {sorted(MEASURES)}")
    return key


class _Context:
    def __init__(self, net, params, damping):
        self.R = params.budget if params.budget is not None else 1.0
        if params.budget is None:
            params = ModelParams(alpha=params.alpha, budget=self.R, gamma=params.gamma,
                                 delta=params.delta)
        self.gamma = params.gamma
        self.eff = effective_matrix(net, params)
        self.graph = aggregate(net, params)
        self.damping = damping
        self.hits = None


@dataclass(eq=False)
class ComparisonReport:
    measures: list
    node_ids: tuple
    results: dict  # measure -> CentralityResult or None when it failed/was skipped
    rho: dict  # (measure_a, measure_b) -> float (nan: undefined)
    rank_differences: dict  # measure -> RankDifference of (measure vs opinion)
    timings: dict  # measure -> seconds
    notices: list = field(default_factory=list)

    def rho_vs_opinion(self) -> dict:
        return {m: self.rho.get((m, "opinion")) for m in self.measures if m != "opinion"}


def compare_measures(net: MultiplexNetwork, params: ModelParams, measures,
                     top_k: int | None = None, damping: float = 0.85) -> ComparisonReport:
    """Compute each measure once, correlate ranks, record timings.

    A measure that fails (e.g. non-convergent eigenvector iteration) is kept
    as an empty column with a notice; it never fails the report.
    """
    names = []
    for m in measures:
        c = canonical_measure(m)
        if c == "gamma-bound":
            raise InputError("gamma-bound is a benchmark-only measure")
        if c not in names:
            names.append(c)
    if "opinion" not in names:
        names.insert(0, "opinion")
    ctx = _Context(net, params, damping)
    undirected = ctx.graph.is_symmetric()
    results, timings, notices = {}, {}, []
    for m in names:
        if undirected and m in DIRECTED_ONLY:
            notices.append(f"{m}: skipped (undirected input)")
            results[m] = None
            continue
        t0 = time.perf_counter()
        try:
            results[m] = MEASURES[m](ctx)
        except MuxOpinionError as exc:
            notices.append(f"{m}: failed ({exc})")
            results[m] = None
        timings[m] = time.perf_counter() - t0

    rho = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ra, rb = results[a], results[b]
            if ra is None or rb is None or len(ra) < 2:
                continue
            rho[(a, b)] = rho[(b, a)] = spearman(ra.values, rb.values)
    diffs = {}
    op = results["opinion"]
    if op is not None:
        for m in names:
            if m != "opinion" and results[m] is not None:
                diffs[m] = rank_difference(results[m], op, normalize=True, top_k=top_k)
    for note in notices:
        log.info(note)
    return ComparisonReport(names, net.node_ids, results, rho, diffs, timings, notices)


def benchmark(sizes, measures, repetitions: int = 3, n_layers: int = 2,
              mean_degree: float = 8.0, seed: int = 0, max_dense: int = DENSE_CAP,
              alpha_hat: float = 1.0, budget: float = 1.0) -> list[dict]:
    """Median wall-clock seconds per measure and size on random multiplex networks.

    Cells that exceed the dense-inverse cap are marked ``capacity``; other
    failures are marked ``error``. Neither aborts the table.
    """
    names = [canonical_measure(m) for m in measures]
    if repetitions < 1:
        raise InputError("repetitions must be >= 1")
    rows = []
    for size in sizes:
        net = random_multiplex(int(size), n_layers, mean_degree, rng=seed)
        params = ModelParams.uniform(net, alpha_hat, budget=budget)
        for m in names:
            times, status = [], "ok"
            for _ in range(repetitions):
                ctx = _Context(net, params, 0.85)
                t0 = time.perf_counter()
                try:
                    if m == "gamma-bound":
                        gamma_lower_bound(ctx.eff, budget, max_dense)
                    elif m == "opinion":
                        opinion_centrality(ctx.eff, budget, "auto", max_dense=max_dense,
                                           conditions=False)
                    else:
                        MEASURES[m](ctx)
                except CapacityError:
                    status = "capacity"
                    break
                except MuxOpinionError:
                    status = "error"
                    break
                times.append(time.perf_counter() - t0)
            rows.append({
                "size": int(size),
                "measure": m,
                "seconds": statistics.median(times) if status == "ok" else None,
                "status": status,
                "repetitions": len(times),
            })
    return rows
