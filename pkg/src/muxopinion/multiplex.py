"""Multiplex network container and the effective influence matrix.

Conventions used throughout the package:

* ``layers[c][i, j]`` is the probability that node ``j`` imitates node ``i``
  in layer ``c`` (influence flows ``i -> j``).
* ``ebar[i, j] = (1 / Lambda) * sum_c alpha[i, c] * layers[c][j, i]`` is the
  rate-weighted share of node ``i``'s opinion update that comes from ``j``.
  The ``1 / Lambda`` factor is folded in, so the rest point solves
  ``(Id - ebar) x = lam / Lambda``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConditionError, InputError, NumericalError

log = logging.getLogger(__name__)

NORMALIZATIONS = ("strict", "cap", "stochastic")

# slack on "sum <= 1" checks; cap/stochastic division can land one ulp above 1
SUM_TOL = 1e-12
DENSE_EIG_MAX = 1500
DIRECT_MAX = 2000  # above this many nodes, solves try GMRES before sparse LU


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiplexNetwork:
    node_ids: tuple
    layer_ids: tuple
    layers: tuple  # of scipy.sparse.csr_matrix, each I x I
    normalization: str = "cap"

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(str(n) for n in self.node_ids))
        object.__setattr__(self, "layer_ids", tuple(str(c) for c in self.layer_ids))
        if len(set(self.node_ids)) != len(self.node_ids):
            raise InputError("duplicate node ids")
        if len(set(self.layer_ids)) != len(self.layer_ids):
            raise InputError("duplicate layer ids")
        if len(self.layers) != len(self.layer_ids):
            raise InputError(
                f"{len(self.layers)} layer matrices for {len(self.layer_ids)} layer ids"
            )
        n = len(self.node_ids)
        mats = []
        for cid, m in zip(self.layer_ids, self.layers):
            m = sp.csr_matrix(m, dtype=float)
            m.sum_duplicates()
            m.eliminate_zeros()
            if m.shape != (n, n):
                raise InputError(f"layer {cid!r} has shape {m.shape}, expected {(n, n)}")
            if m.nnz and (m.data.min() < 0 or m.data.max() > 1 + SUM_TOL):
                raise InputError(f"layer {cid!r} has entries outside [0, 1]")
            if m.diagonal().any():
                raise InputError(f"layer {cid!r} has self-imitation entries")
            mats.append(m)
        object.__setattr__(self, "layers", tuple(mats))
        if self.normalization not in NORMALIZATIONS:
            raise InputError(f"unknown normalization {self.normalization!r}")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_layers(self) -> int:
        return len(self.layer_ids)

    def imitation_sums(self) -> np.ndarray:
        """I x C array: total imitation probability of node i in layer c."""
        out = np.zeros((self.n_nodes, self.n_layers))
        for c, m in enumerate(self.layers):
            out[:, c] = np.asarray(m.sum(axis=0)).ravel()
        return out

    def is_substochastic(self) -> bool:
        return bool(np.all(self.imitation_sums() <= 1 + SUM_TOL))

    def dense_layers(self) -> np.ndarray:
        """C x I x I dense copy. Only for small networks."""
        return np.stack([m.toarray() for m in self.layers]) if self.layers else np.zeros(
            (0, self.n_nodes, self.n_nodes)
        )


def build_network(
    edges: Iterable,
    normalize: str = "cap",
    node_ids: Sequence | None = None,
    layer_ids: Sequence | None = None,
) -> MultiplexNetwork:
    """Build a network from ``(source, target, layer, weight)`` records.

    An edge ``(u, v, c, w)`` means "v imitates u with probability w in layer c".
    Nodes and layers are indexed in first-seen order (after any ids passed in
    ``node_ids`` / ``layer_ids``). Duplicate ``(u, v, c)`` triples are summed.

    normalize:
        ``strict`` rejects any node/layer whose imitation weights sum above 1;
        ``cap`` rescales such a node/layer to sum exactly 1 and leaves the
        others untouched; ``stochastic`` rescales every nonzero node/layer.
    """
    if normalize not in NORMALIZATIONS:
        raise InputError(f"unknown normalization {normalize!r}")
    nodes: dict[str, int] = {}
    layers: dict[str, int] = {}
    for n in node_ids or ():
        nodes.setdefault(str(n), len(nodes))
    for c in layer_ids or ():
        layers.setdefault(str(c), len(layers))

    src, dst, lay, wts = [], [], [], []
    for rec in edges:
        u, v, c, w = rec[:4]
        u, v, c = str(u), str(v), str(c)
        w = float(w)
        where = f" (line {rec.line})" if getattr(rec, "line", None) else ""
        if not np.isfinite(w) or w < 0:
            raise InputError(f"negative or non-finite weight {w} on edge {u}->{v} [{c}]{where}")
        if u == v:
            raise InputError(f"self-loop on node {u!r} in layer {c!r}{where}")
        src.append(nodes.setdefault(u, len(nodes)))
        dst.append(nodes.setdefault(v, len(nodes)))
        lay.append(layers.setdefault(c, len(layers)))
        wts.append(w)

    n = len(nodes)
    src, dst, lay, wts = map(np.asarray, (src, dst, lay, wts))
    node_list = list(nodes)
    layer_list = list(layers)
    mats = []
    for c, cid in enumerate(layer_list):
        sel = lay == c
        m = sp.csr_matrix((wts[sel].astype(float), (src[sel], dst[sel])), shape=(n, n))
        m.sum_duplicates()
        m.eliminate_zeros()
        sums = np.asarray(m.sum(axis=0)).ravel()
        if normalize == "strict":
            bad = np.flatnonzero(sums > 1 + SUM_TOL)
            if bad.size:
                j = bad[0]
                raise ConditionError(
                    f"node {node_list[j]!r} layer {cid!r}: imitation sum {sums[j]:.12g} > 1"
                )
        else:
            if normalize == "cap":
                scale = np.where(sums > 1, sums, 1.0)
            else:
                scale = np.where(sums > 0, sums, 1.0)
            m = sp.csr_matrix(m @ sp.diags(1.0 / scale))
        mats.append(m)
    return MultiplexNetwork(tuple(node_list), tuple(layer_list), tuple(mats), normalize)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Rates and control parameters of the opinion model.

    ``lam`` (explicit external rates) is used by the dynamics; ``budget`` is
    used when the external rates are the optimization unknown. When both are
    set, ``lam`` defines the total rate.
    """

    alpha: np.ndarray
    lam: np.ndarray | None = None
    budget: float | None = None
    gamma: float | str = "auto"
    delta: float = 0.001
    x0: np.ndarray | None = None

    def __post_init__(self):
        alpha = np.atleast_2d(np.asarray(self.alpha, dtype=float))
        if np.any(~np.isfinite(alpha)) or np.any(alpha < 0):
            raise InputError("alpha must be finite and nonnegative")
        object.__setattr__(self, "alpha", _frozen(alpha))
        if self.lam is not None:
            lam = np.asarray(self.lam, dtype=float).ravel()
            if np.any(~np.isfinite(lam)) or np.any(lam < 0):
                raise InputError("lambda must be finite and nonnegative")
            object.__setattr__(self, "lam", _frozen(lam))
        if self.budget is not None and not self.budget > 0:
            raise InputError(f"budget must be > 0, got {self.budget}")
        if self.gamma != "auto" and not float(self.gamma) >= 0:
            raise InputError(f"gamma must be >= 0 or 'auto', got {self.gamma}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.x0 is not None:
            x0 = np.asarray(self.x0, dtype=float).ravel()
            if np.any(x0 < 0) or np.any(x0 > 1):
                raise InputError("initial opinions must lie in [0, 1]")
            object.__setattr__(self, "x0", _frozen(x0))

    @classmethod
    def uniform(cls, net: MultiplexNetwork, alpha_hat: float = 1.0, **kw) -> "ModelParams":
        return cls(alpha=np.full((net.n_nodes, net.n_layers), float(alpha_hat)), **kw)

    def total_rate(self) -> float:
        ext = self.lam.sum() if self.lam is not None else (self.budget or 0.0)
        return float(ext + self.alpha.sum())


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    ebar: sp.csr_matrix
    Lambda: float
    node_ids: tuple = ()
    row_sums: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "row_sums", _frozen(np.asarray(self.ebar.sum(axis=1)).ravel()))

    @property
    def n(self) -> int:
        return self.ebar.shape[0]

    def dense(self) -> np.ndarray:
        return self.ebar.toarray()

    @cached_property
    def system(self) -> sp.csc_matrix:
        """The matrix ``Id - ebar`` in CSC form."""
        return sp.csc_matrix(sp.identity(self.n, format="csc") - self.ebar)

    @cached_property
    def lu(self):
        try:
            return spla.splu(self.system)
        except RuntimeError as exc:
            raise NumericalError(f"Id - ebar is singular: {exc}") from exc

    @cached_property
    def condition_bound(self) -> float:
        """Upper bound ``(1 + r) / (1 - r)`` on the infinity-norm condition
        number, where ``r < 1`` is the largest row sum of ``ebar``."""
        r = float(self.row_sums.max()) if self.n else 0.0
        return (1 + r) / (1 - r) if r < 1 else math.inf

    def solve(self, b, trans: bool = False) -> np.ndarray:
        """Solve ``(Id - ebar) x = b`` (or the transposed system).

        Small systems use the sparse LU factorization. Above ``DIRECT_MAX``
        nodes GMRES is tried first, since LU fill-in grows quickly on random
        sparse graphs; the LU path remains the fallback.
        """
        b = np.asarray(b, dtype=float)
        if self.n > DIRECT_MAX:
            A = self.system.T.tocsr() if trans else self.system
            x, info = spla.gmres(A, b, x0=b.copy(), rtol=1e-14, atol=0.0, restart=50,
                                 maxiter=200)
            scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
            if info == 0 and float(np.max(np.abs(A @ x - b))) <= 1e-12 * scale:
                return x
        return self.lu.solve(b, trans="T" if trans else "N")

    @cached_property
    def condition_estimate(self) -> float:
        """1-norm condition number estimate of ``Id - ebar``."""
        n = self.n
        if n == 0:
            return 1.0
        if n <= 4:
            return float(np.linalg.cond(self.system.toarray(), 1))
        lu = self.lu
        inv = spla.LinearOperator(
            (n, n),
            matvec=lambda v: lu.solve(np.asarray(v, dtype=float).ravel()),
            rmatvec=lambda v: lu.solve(np.asarray(v, dtype=float).ravel(), trans="T"),
            dtype=float,
        )
        return float(spla.norm(self.system, 1) * spla.onenormest(inv))


def effective_matrix(net: MultiplexNetwork, params: ModelParams) -> EffectiveMatrix:
    alpha = params.alpha
    if alpha.shape != (net.n_nodes, net.n_layers):
        raise InputError(f"alpha has shape {alpha.shape}, expected {(net.n_nodes, net.n_layers)}")
    if params.lam is not None and params.lam.shape != (net.n_nodes,):
        raise InputError(f"lambda has length {params.lam.size}, expected {net.n_nodes}")
    Lam = params.total_rate()
    if not Lam > 0:
        raise InputError("total rate Lambda is zero")
    n = net.n_nodes
    acc = sp.csr_matrix((n, n))
    for c, m in enumerate(net.layers):
        acc = acc + sp.diags(alpha[:, c]) @ m.T
    ebar = sp.csr_matrix(acc / Lam)
    ebar.sum_duplicates()
    ebar.eliminate_zeros()
    return EffectiveMatrix(ebar, Lam, net.node_ids)


@dataclass(frozen=True)
class ConditionReport:
    max_row_sum: float
    row_sum_ok: bool
    offending_rows: tuple
    sym_top_eigenvalue: float
    sym_ok: bool
    # literal reading: the symmetric part of ebar itself has only negative eigenvalues
    sym_negative: bool

    @property
    def ok(self) -> bool:
        return self.row_sum_ok and self.sym_ok

    def as_dict(self) -> dict:
        return {
            "max_row_sum": self.max_row_sum,
            "row_sum_ok": self.row_sum_ok,
            "offending_rows": list(self.offending_rows),
            "sym_top_eigenvalue": self.sym_top_eigenvalue,
            "sym_ok": self.sym_ok,
            "sym_negative": self.sym_negative,
            "verdict": "pass" if self.ok else "fail",
        }


def _top_sym_eigenvalue(ebar: sp.csr_matrix, max_iters: int) -> float:
    n = ebar.shape[0]
    if n == 0:
        return 0.0
    sym = 0.5 * (ebar + ebar.T)
    if n <= DENSE_EIG_MAX:
        return float(np.linalg.eigvalsh(sym.toarray())[-1])
    if sym.nnz == 0:
        return 0.0
    try:
        vals = spla.eigsh(sym, k=1, which="LA", maxiter=max_iters, tol=1e-10,
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NumericalError(
            "symmetric-part eigenvalue iteration did not converge",
            iterations=max_iters,
            partial=list(exc.eigenvalues),
        ) from exc
    return float(vals[-1])


def validate_conditions(eff: EffectiveMatrix, max_iters: int = 5000) -> ConditionReport:
    """Check the two stability conditions on the effective matrix.

    (a) every row sum of ebar is strictly below 1, and
    (b) the largest eigenvalue of ``(ebar + ebar.T) / 2`` is below 1, i.e. the
    symmetric part of ``ebar - Id`` is negative definite.
    """
    rows = np.asarray(eff.row_sums)
    bad = tuple(int(i) for i in np.flatnonzero(rows >= 1))
    top = _top_sym_eigenvalue(eff.ebar, max_iters)
    return ConditionReport(
        max_row_sum=float(rows.max()) if rows.size else 0.0,
        row_sum_ok=not bad,
        offending_rows=bad,
        sym_top_eigenvalue=top,
        sym_ok=top < 1,
        sym_negative=top < 0,
    )


def require_conditions(eff: EffectiveMatrix) -> None:
    """Cheap precondition guard: rows of ebar must sum below 1."""
    bad = np.flatnonzero(np.asarray(eff.row_sums) >= 1)
    if bad.size:
        i = int(bad[0])
        name = eff.node_ids[i] if eff.node_ids else i
        raise ConditionError(f"row {i} (node {name!r}) of ebar sums to {eff.row_sums[i]:.12g} >= 1")


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Single-layer weighted digraph; ``weights[i, j]`` is the influence i -> j."""

    weights: sp.csr_matrix
    node_ids: tuple = ()

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        d = self.weights - self.weights.T
        return d.nnz == 0 or float(abs(d).max()) <= tol

    @classmethod
    def from_dense(cls, w, node_ids=()) -> "WeightedDigraph":
        w = np.asarray(w, dtype=float)
        if np.any(w < 0):
            raise InputError("negative weights")
        if np.any(np.diag(w)):
            raise InputError("aggregated graph must have a zero diagonal")
        ids = tuple(node_ids) or tuple(str(i + 1) for i in range(w.shape[0]))
        return cls(sp.csr_matrix(w), ids)


def aggregate(net: MultiplexNetwork, params: ModelParams) -> WeightedDigraph:
    """Collapse layers: weight(i -> j) = (1/Lambda) * sum_c alpha[j, c] * E_c[i, j]."""
    eff = effective_matrix(net, params)
    return WeightedDigraph(sp.csr_matrix(eff.ebar.T), net.node_ids)


def random_multiplex(
    n: int,
    n_layers: int,
    mean_degree: float = 8.0,
    rng: np.random.Generator | int | None = None,
    normalize: str = "cap",
) -> MultiplexNetwork:
    """Erdos-Renyi style multiplex: each layer has about ``n * mean_degree``
    directed edges with uniform weights, then normalized (``cap`` by default)."""
    rng = np.random.default_rng(rng)
    node_ids = [str(i) for i in range(n)]
    layer_ids = [f"L{c + 1}" for c in range(n_layers)]
    if n < 2:
        mats = [sp.csr_matrix((n, n)) for _ in layer_ids]
        return MultiplexNetwork(tuple(node_ids), tuple(layer_ids), tuple(mats), normalize)
    mats = []
    p = min(1.0, mean_degree / (n - 1))
    for _ in range(n_layers):
        m = rng.binomial(n * (n - 1), p)
        src = rng.integers(0, n, size=m)
        off = rng.integers(1, n, size=m)
        dst = (src + off) % n
        w = rng.uniform(0, 1, size=m)
        mat = sp.csr_matrix((w, (src, dst)), shape=(n, n))
        mat.sum_duplicates()
        sums = np.asarray(mat.sum(axis=0)).ravel()
        if normalize == "stochastic":
            scale = np.where(sums > 0, sums, 1.0)
        else:
            scale = np.where(sums > 1, sums, 1.0)
        mats.append(sp.csr_matrix(mat @ sp.diags(1.0 / scale)))
    return MultiplexNetwork(tuple(node_ids), tuple(layer_ids), tuple(mats), normalize)
