"""Standard single-layer centralities on the aggregated influence graph.

``g.weights[i, j]`` is the influence of i on j. In-based measures (eigenvector,
Katz, authorities) accumulate over incoming influence, i.e. use ``W.T``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InputError, NumericalError
from .multiplex import WeightedDigraph
from .results import CentralityResult

DENSE_SVD_MAX = 1500


def _result(name, g, values, **diag):
    return CentralityResult(name, g.node_ids, values, diagnostics=diag)


def degree_centrality(g: WeightedDigraph, mode: str = "total") -> CentralityResult:
    W = g.weights
    out_deg = np.asarray(W.sum(axis=1)).ravel()
    in_deg = np.asarray(W.sum(axis=0)).ravel()
    if mode == "out":
        vals = out_deg
    elif mode == "in":
        vals = in_deg
    elif mode == "total":
        vals = in_deg + out_deg
    else:
        raise InputError(f"unknown degree mode {mode!r}")
    return _result(f"degree-{mode}", g, vals)


def pagerank(g: WeightedDigraph, damping: float = 0.85, tol: float = 1e-10,
             max_iters: int = 10_000) -> CentralityResult:
    """Power iteration on the out-weight-normalized walk; dangling mass is spread uniformly."""
    if not 0 < damping < 1:
        raise InputError(f"damping must lie in (0, 1), got {damping}")
    n = g.n
    if n == 0:
        return _result("pagerank", g, np.zeros(0), iterations=0)
    W = g.weights
    out_deg = np.asarray(W.sum(axis=1)).ravel()
    dangling = out_deg == 0
    # divide entries by their row sum; forming 1/out_deg overflows on subnormal degrees
    P = sp.csr_matrix(W, copy=True)
    P.eliminate_zeros()
    P.data = P.data / np.repeat(out_deg, np.diff(P.indptr))
    PT = sp.csr_matrix(P.T)
    r = np.full(n, 1.0 / n)
    for it in range(1, max_iters + 1):
        new = damping * (PT @ r + r[dangling].sum() / n) + (1 - damping) / n
        new /= new.sum()
        err = float(np.abs(new - r).sum())
        r = new
        if err <= tol:
            return _result("pagerank", g, r, iterations=it, damping=damping)
    raise NumericalError(f"pagerank did not converge in {max_iters} iterations", last=r, residual=err)


def eigenvector_centrality(g: WeightedDigraph, tol: float = 1e-10,
                           max_iters: int = 10_000) -> CentralityResult:
    """Dominant eigenvector of ``W.T``, found by power iteration on ``Id + W.T``.

    The shift leaves eigenvectors unchanged and removes the oscillation of
    bipartite graphs (eigenvalues +r and -r).
    """
    W = g.weights
    if W.nnz == 0 or not np.any(W.data):
        raise InputError("eigenvector centrality is undefined on a graph without edges")
    WT = sp.csr_matrix(W.T)
    n = g.n
    x = np.full(n, 1.0 / np.sqrt(n))
    for it in range(1, max_iters + 1):
        new = x + WT @ x
        new /= np.linalg.norm(new)
        err = float(np.abs(new - x).sum())
        x = new
        if err <= n * tol:
            return _result("eigenvector", g, x, iterations=it)
    raise NumericalError(
        f"eigenvector iteration did not converge in {max_iters} iterations "
        "(no unique dominant eigenvalue?)", last=x, residual=err)


def katz_spectral_bound(g: WeightedDigraph) -> float:
    W = g.weights
    if W.nnz == 0:
        return 0.0
    return float(min(abs(W).sum(axis=1).max(), abs(W).sum(axis=0).max()))


def katz_centrality(g: WeightedDigraph, attenuation: float | None = None,
                    tol: float = 1e-10) -> CentralityResult:
    """Solve ``(Id - b W.T) x = 1``; ``b`` defaults to half the admissible maximum."""
    bound = katz_spectral_bound(g)
    if attenuation is None:
        attenuation = 0.5 / bound if bound > 0 else 1.0
    b = float(attenuation)
    if not b > 0:
        raise InputError("attenuation must be > 0")
    if b * bound >= 1:
        raise InputError(
            f"attenuation {b:.6g} too large: b * {bound:.6g} >= 1 (series may diverge)")
    n = g.n
    A = sp.csc_matrix(sp.identity(n) - b * g.weights.T)
    ones = np.ones(n)
    try:
        x = spla.splu(A).solve(ones)
    except RuntimeError as exc:
        raise NumericalError(f"katz system is singular: {exc}") from exc
    res = float(np.max(np.abs(A @ x - ones))) if n else 0.0
    if res > max(tol, 1e-10):
        raise NumericalError(f"katz solve residual {res:.3g}", residual=res)
    return _result("katz", g, x, attenuation=b)


def hits(g: WeightedDigraph, tol: float = 1e-10,
         max_iters: int = 10_000) -> tuple[CentralityResult, CentralityResult]:
    """Alternating iteration ``a ~ W.T h``, ``h ~ W a``; both unit L2 norm."""
    W = g.weights
    if W.nnz == 0 or not np.any(W.data):
        raise InputError("HITS is undefined on a graph without edges")
    W = sp.csr_matrix(W)
    WT = sp.csr_matrix(W.T)
    n = g.n
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    for it in range(1, max_iters + 1):
        a_new = WT @ h
        a_new /= np.linalg.norm(a_new)
        h_new = W @ a_new
        h_new /= np.linalg.norm(h_new)
        err = float(np.abs(a_new - a).sum() + np.abs(h_new - h).sum())
        a, h = a_new, h_new
        if err <= n * tol:
            return (_result("hits-hub", g, h, iterations=it),
                    _result("hits-authority", g, a, iterations=it))
    # slow power iteration means a small spectral gap; solve for the singular pair directly
    h, a, gap = _top_singular_pair(W)
    if gap <= 1e-9:
        raise NumericalError(f"HITS did not converge in {max_iters} iterations; "
                             "the dominant singular value is degenerate", residual=err)
    return (_result("hits-hub", g, h, iterations=max_iters, method="svd"),
            _result("hits-authority", g, a, iterations=max_iters, method="svd"))


def _top_singular_pair(W):
    """Leading singular vectors of ``W`` (nonnegative) and the relative gap to the next value."""
    n = W.shape[0]
    if n <= DENSE_SVD_MAX:
        u, s, vt = np.linalg.svd(W.toarray())
    else:
        u, s, vt = spla.svds(W.astype(float), k=2, which="LM")
        order = np.argsort(s)[::-1]
        u, s, vt = u[:, order], s[order], vt[order]
    h, a = np.abs(u[:, 0]), np.abs(vt[0])
    gap = (s[0] - s[1]) / s[0] if len(s) > 1 else 1.0
    return h / np.linalg.norm(h), a / np.linalg.norm(a), float(gap)
