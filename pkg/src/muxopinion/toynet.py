"""Barrel networks: two stars joined at their hubs, replicated over layers.

Node ``1`` and node ``I/2 + 1`` are the hubs; nodes ``2..I/2`` are the leaves
of hub 1 and nodes ``I/2 + 2..I`` the leaves of hub 2 (1-based labels, which
are also the node ids). In layer ``c`` the hubs imitate each other with
weight ``e0[c]`` and each leaf imitates its own hub with ``e1[c]`` or
``e2[c]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .baselines import degree_centrality, pagerank
from .errors import InputError
from .multiplex import ModelParams, MultiplexNetwork, aggregate, effective_matrix
from .opinion import opinion_centrality, raw_opinion_score
from .results import CentralityResult, fractional_ranks

NODE_CLASSES = ("hub1", "hub2", "leaf1", "leaf2")


def _per_layer(v, n_layers, name):
    arr = np.broadcast_to(np.asarray(v, dtype=float), (n_layers,)).copy()
    if np.any(arr < 0) or np.any(arr > 1):
        raise InputError(f"{name} weights must lie in [0, 1]")
    return arr


@dataclass(frozen=True, eq=False)
class BarrelSpec:
    n_nodes: int
    n_layers: int = 1
    e0: object = 0.1
    e1: object = 0.2
    e2: object = 0.3

    def __post_init__(self):
        if self.n_nodes < 4 or self.n_nodes % 2:
            raise InputError(f"barrel needs an even node count >= 4, got {self.n_nodes}")
        if self.n_layers < 1:
            raise InputError("barrel needs at least one layer")
        for name in ("e0", "e1", "e2"):
            object.__setattr__(self, name, _per_layer(getattr(self, name), self.n_layers, name))

    @property
    def hubs(self) -> tuple[int, int]:
        return 0, self.n_nodes // 2

    def class_indices(self) -> dict[str, np.ndarray]:
        h = self.n_nodes // 2
        return {
            "hub1": np.array([0]),
            "hub2": np.array([h]),
            "leaf1": np.arange(1, h),
            "leaf2": np.arange(h + 1, self.n_nodes),
        }


def build_barrel(spec: BarrelSpec) -> MultiplexNetwork:
    n, h = spec.n_nodes, spec.n_nodes // 2
    leaves1 = np.arange(1, h)
    leaves2 = np.arange(h + 1, n)
    mats = []
    for c in range(spec.n_layers):
        src = np.concatenate([[0, h], np.zeros(h - 1, int), np.full(h - 1, h)])
        dst = np.concatenate([[h, 0], leaves1, leaves2])
        w = np.concatenate([[spec.e0[c]] * 2, np.full(h - 1, spec.e1[c]), np.full(h - 1, spec.e2[c])])
        m = sp.csr_matrix((w, (src, dst)), shape=(n, n))
        m.eliminate_zeros()
        mats.append(m)
    return MultiplexNetwork(
        tuple(str(i + 1) for i in range(n)),
        tuple(f"L{c + 1}" for c in range(spec.n_layers)),
        tuple(mats),
        "strict",
    )


def barrel_params(spec: BarrelSpec, alpha_hat: float, R: float) -> ModelParams:
    return ModelParams(alpha=np.full((spec.n_nodes, spec.n_layers), float(alpha_hat)), budget=R)


def edge_effects(spec: BarrelSpec, alpha_hat: float, R: float) -> tuple[float, float, float]:
    """Aggregated weight of each edge type: ``alpha_hat * sum_c e_kc / Lambda``."""
    Lam = R + spec.n_nodes * spec.n_layers * alpha_hat
    return tuple(float(alpha_hat * e.sum() / Lam) for e in (spec.e0, spec.e1, spec.e2))


def table1_closed_forms(e0: float, e1: float, e2: float, n_nodes: int) -> dict:
    """Per-class reference expressions for the barrel, evaluated verbatim.

    Kept verbatim for comparison: the hub opinion denominator reads
    ``(1 - e0)**2`` and the hub out-degree omits the leaf count, both of which
    disagree with :func:`barrel_derived_forms` (suspected errata).
    """
    if e0 == 1:
        raise ZeroDivisionError("reference forms are undefined at e0' = 1")
    I = n_nodes
    pr_hub = 1.0 / (I * (5 - 4 * e0))
    return {
        "hub1": {"opinion": (1 + e0 * (1 + e2) + e1) / (1 - e0) ** 2,
                 "out_degree": e0 + e1, "in_degree": e0, "pagerank": pr_hub},
        "hub2": {"opinion": (1 + e0 * (1 + e1) + e2) / (1 - e0) ** 2,
                 "out_degree": e0 + e2, "in_degree": e0, "pagerank": pr_hub},
        "leaf1": {"opinion": 1.0, "out_degree": 0.0, "in_degree": e1,
                  "pagerank": (-4 * e0 + 4 * e1 + 5) / (5 * I * (5 - 4 * e0))},
        "leaf2": {"opinion": 1.0, "out_degree": 0.0, "in_degree": e2,
                  "pagerank": (-4 * e0 + 4 * e2 + 5) / (5 * I * (5 - 4 * e0))},
        "errata": "reference forms; hub opinion denominator and missing leaf count suspected",
    }


def barrel_derived_forms(e0: float, e1: float, e2: float, n_nodes: int) -> dict:
    """Closed forms derived from the model for any even ``n_nodes``.

    With ``m = I/2 - 1`` leaves per star, the hub column influence solves
    ``s1 = 1 + m e1 + e0 s2``, ``s2 = 1 + m e2 + e0 s1``.
    """
    m = n_nodes // 2 - 1
    d = 1 - e0 * e0
    return {
        "hub1": {"opinion": (1 + m * e1 + e0 * (1 + m * e2)) / d,
                 "out_degree": e0 + m * e1, "in_degree": e0},
        "hub2": {"opinion": (1 + m * e2 + e0 * (1 + m * e1)) / d,
                 "out_degree": e0 + m * e2, "in_degree": e0},
        "leaf1": {"opinion": 1.0, "out_degree": 0.0, "in_degree": e1},
        "leaf2": {"opinion": 1.0, "out_degree": 0.0, "in_degree": e2},
    }


def barrel_measures(spec: BarrelSpec, alpha_hat: float = 1.0, R: float = 1.0,
                    damping: float = 0.8) -> dict:
    """Computed per-class values of raw opinion score, degrees and PageRank."""
    net = build_barrel(spec)
    params = barrel_params(spec, alpha_hat, R)
    s = raw_opinion_score(effective_matrix(net, params))
    g = aggregate(net, params)
    cols = {
        "opinion": s,
        "out_degree": degree_centrality(g, "out").values,
        "in_degree": degree_centrality(g, "in").values,
        "pagerank": pagerank(g, damping=damping).values,
    }
    idx = spec.class_indices()
    return {cls: {k: float(v[idx[cls][0]]) for k, v in cols.items()} for cls in NODE_CLASSES}


def table1_comparison(spec: BarrelSpec, alpha_hat: float = 1.0, R: float = 1.0,
                      damping: float = 0.8) -> list[dict]:
    """Rows ``node_class, measure, computed, reference, derived, abs_diff``.

    ``abs_diff`` is ``|computed - reference|``; PageRank has no derived form.
    """
    e = edge_effects(spec, alpha_hat, R)
    reference = table1_closed_forms(*e, spec.n_nodes)
    derived = barrel_derived_forms(*e, spec.n_nodes)
    computed = barrel_measures(spec, alpha_hat, R, damping)
    rows = []
    for cls in NODE_CLASSES:
        for measure in ("opinion", "out_degree", "in_degree", "pagerank"):
            c = computed[cls][measure]
            p = reference[cls][measure]
            rows.append({
                "node_class": cls,
                "measure": measure,
                "computed": c,
                "reference": p,
                "derived": derived[cls].get(measure),
                "abs_diff": abs(c - p),
            })
    return rows


@dataclass(frozen=True, eq=False)
class SweepRow:
    alpha_hat: float
    result: CentralityResult
    class_shares: dict
    max_deviation: float  # max_j |lam_j - R/I| / R


def alpha_sweep(spec: BarrelSpec, R: float, gamma, alpha_hats) -> list[SweepRow]:
    """Opinion centrality of the barrel for each uniform internal rate."""
    net = build_barrel(spec)
    idx = spec.class_indices()
    rows = []
    for a in alpha_hats:
        a = float(a)
        if not a > 0:
            raise InputError(f"alpha_hat must be > 0, got {a}")
        eff = effective_matrix(net, barrel_params(spec, a, R))
        res = opinion_centrality(eff, R, gamma, conditions=False)
        shares = res.budget_shares
        rows.append(SweepRow(
            alpha_hat=a,
            result=res,
            class_shares={cls: float(shares[idx[cls][0]]) for cls in NODE_CLASSES},
            max_deviation=float(np.max(np.abs(shares - 1.0 / spec.n_nodes))),
        ))
    return rows


def ranks_constant(rows: list[SweepRow]) -> bool:
    if not rows:
        return True
    first = fractional_ranks(rows[0].result.values)
    return all(np.array_equal(first, fractional_ranks(r.result.values)) for r in rows[1:])
