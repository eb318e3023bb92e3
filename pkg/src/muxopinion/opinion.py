"""Opinion centrality: optimal allocation of an external-influence budget.

Everything is phrased in terms of the column influence
``s[j] = sum_i inv(Id - ebar)[i, j]``, the marginal gain in total stationary
opinion per unit of external rate spent on node ``j`` (times ``Lambda``).
With the linear utility and an L2 penalty ``gamma / 2 * |lam|^2`` the optimal
allocation over ``{lam >= 0, sum(lam) = R}`` is, whenever it is interior,

    lam[j] = R / I + (s[j] - mean(s)) / (gamma * Lambda).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import check_conditioning, check_residual
from .errors import CapacityError, InputError, NumericalError
from .multiplex import EffectiveMatrix, require_conditions, validate_conditions
from .results import CentralityResult, tie_groups

log = logging.getLogger(__name__)

DENSE_CAP = 4000
UTILITY_KINDS = ("linear", "weighted-min", "cobb-douglas")


@dataclass(frozen=True, eq=False)
class UtilitySpec:
    kind: str = "linear"
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise InputError(f"unknown utility {self.kind!r}; expected one of {UTILITY_KINDS}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if np.any(~(w > 0)):
                raise InputError("utility weights must be > 0")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    def weights_for(self, n: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(n)
        if self.weights.size != n:
            raise InputError(f"{self.weights.size} utility weights for {n} nodes")
        return np.asarray(self.weights)


def evaluate_utility(x, spec: UtilitySpec | None = None) -> float:
    """Sum of opinions, weighted minimum ``min w_i x_i``, or ``prod x_i ** w_i``."""
    spec = spec or UtilitySpec()
    x = np.asarray(x, dtype=float)
    if spec.kind == "linear":
        return float(x.sum())
    w = spec.weights_for(x.size)
    if spec.kind == "weighted-min":
        return float(np.min(w * x))
    if np.any(x <= 0):
        return 0.0
    return float(np.prod(x**w))


def column_influence(eff: EffectiveMatrix) -> np.ndarray:
    """Column sums of ``inv(Id - ebar)``, from one transposed solve."""
    require_conditions(eff)
    check_conditioning(eff)
    ones = np.ones(eff.n)
    s = eff.solve(ones, trans=True)
    check_residual(eff.system.T, s, ones, "column influence")
    return s


def raw_opinion_score(eff: EffectiveMatrix) -> np.ndarray:
    """Unnormalized opinion score: same fractional ranks as the opinion centrality."""
    return column_influence(eff)


def _dense_inverse(eff: EffectiveMatrix, max_dense: int) -> np.ndarray:
    if eff.n > max_dense:
        raise CapacityError(
            f"dense inverse of a {eff.n}-node system exceeds the cap of {max_dense}; "
            "use gamma='auto' (cheap bound) instead"
        )
    require_conditions(eff)
    check_conditioning(eff)
    return np.linalg.solve(eff.system.toarray(), np.eye(eff.n))


def gamma_lower_bound(eff: EffectiveMatrix, R: float, max_dense: int = DENSE_CAP) -> float:
    """Smallest regularization weight for which the closed form is guaranteed positive.

    ``I**2 * (max(a) - min(a)) / (Lambda * R)`` over the entries of
    ``a = -inv(Id - ebar)``. Needs the dense inverse: O(I^3) time, O(I^2) memory.
    """
    if not R > 0:
        raise InputError("budget R must be > 0")
    M = _dense_inverse(eff, max_dense)
    spread = float(M.max() - M.min()) if M.size else 0.0
    return eff.n**2 * spread / (eff.Lambda * R)


def _cheap_bound(eff: EffectiveMatrix, R: float, s: np.ndarray) -> float:
    # every entry of inv(Id - ebar) lies in [0, max column sum]
    return eff.n**2 * (1.0 + float(s.max())) / (eff.Lambda * R)


def opinion_centrality(eff: EffectiveMatrix, R: float, gamma="auto",
                       max_dense: int = DENSE_CAP, conditions: bool = True) -> CentralityResult:
    """Budget allocation maximizing total stationary opinion minus an L2 penalty.

    ``gamma='auto'`` uses twice the positivity bound; above ``max_dense`` nodes
    it uses twice a cheap upper bound on it instead. An explicit ``gamma``
    below the bound is allowed: negative entries are flagged, not rejected.
    """
    if not R > 0:
        raise InputError("budget R must be > 0")
    if gamma != "auto":
        gamma = float(gamma)
        if not gamma > 0:
            raise InputError(f"gamma must be > 0, got {gamma}")
    s = column_influence(eff)
    n = eff.n

    bound = None
    if n <= max_dense:
        bound = gamma_lower_bound(eff, R, max_dense)
    if gamma == "auto":
        if bound is not None:
            gamma, gamma_source = 2.0 * bound, "2x positivity bound"
        else:
            gamma, gamma_source = 2.0 * _cheap_bound(eff, R, s), "2x cheap upper bound"
        if gamma == 0:
            # single node: the allocation is R whatever gamma is
            gamma, gamma_source = 1.0, "default (bound is zero)"
    else:
        gamma_source = "user"

    values = R / n + (s - s.mean()) / (gamma * eff.Lambda)
    if bound is not None:
        exceeds = gamma > bound
    else:
        exceeds = True if gamma > _cheap_bound(eff, R, s) else None
    negative = bool(np.any(values < 0))
    if negative:
        log.warning("opinion centrality has negative entries (gamma %.6g below the positivity bound)", gamma)
    diagnostics = {
        "Lambda": eff.Lambda,
        "gamma": gamma,
        "gamma_source": gamma_source,
        "gamma_bound": bound,
        "gamma_exceeds_bound": exceeds,
        "negative_entries": negative,
        "ties": tie_groups(values),
    }
    if conditions:
        diagnostics["conditions"] = validate_conditions(eff).as_dict()
    return CentralityResult("opinion", eff.node_ids or _ids(n), values, R, diagnostics)


def _ids(n):
    return tuple(str(i + 1) for i in range(n))


def naive_opinion_centrality(eff: EffectiveMatrix, R: float) -> CentralityResult:
    """Unregularized optimum: the whole budget on the node with the largest column influence.

    Ties (within 1e-12 relative) are reported and broken towards the lowest index.
    """
    if not R > 0:
        raise InputError("budget R must be > 0")
    s = column_influence(eff)
    top = float(s.max())
    tied = [int(i) for i in np.flatnonzero(np.isclose(s, top, rtol=1e-12, atol=0))]
    winner = tied[0]
    if len(tied) > 1:
        ids = eff.node_ids or _ids(eff.n)
        log.warning("naive opinion centrality: argmax tied between %s", [ids[i] for i in tied])
    values = np.zeros(eff.n)
    values[winner] = R
    diagnostics = {
        "Lambda": eff.Lambda,
        "column_influence": s.tolist(),
        "argmax": winner,
        "argmax_ties": tied if len(tied) > 1 else [],
    }
    return CentralityResult("naive-opinion", eff.node_ids or _ids(eff.n), values, R, diagnostics)


def project_simplex(v, R: float = 1.0) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = R}`` (sort-based)."""
    v = np.asarray(v, dtype=float)
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - R
    k = np.arange(1, n + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def solve_romp_numeric(eff: EffectiveMatrix, R: float, gamma: float, utility: UtilitySpec | None = None,
                       tol: float = 1e-8, max_iters: int = 200_000, start=None,
                       max_dense: int = 2000) -> np.ndarray:
    """Projected-gradient ascent for the regularized budget problem.

    Maximizes ``U(x*(lam)) - gamma/2 * |lam|^2`` over ``{lam >= 0, sum = R}``
    where ``x*(lam) = inv(Id - ebar) lam / Lambda`` comes from a dense solve
    (independent of :func:`column_influence`). Smooth utilities stop when the
    projected-gradient norm is at most ``tol`` and raise :class:`NumericalError`
    after ``max_iters``. The weighted-min utility is non-smooth: it runs a
    diminishing-step subgradient method and returns the best iterate found.
    """
    utility = utility or UtilitySpec()
    gamma = float(gamma)
    if not R > 0:
        raise InputError("budget R must be > 0")
    if gamma < 0:
        raise InputError("gamma must be >= 0")
    if not tol > 0:
        raise InputError("tol must be > 0")
    n = eff.n
    J = _dense_inverse(eff, max_dense) / eff.Lambda  # x*(lam) = J @ lam
    w = utility.weights_for(n)

    def objective(lam):
        return evaluate_utility(J @ lam, utility) - 0.5 * gamma * float(lam @ lam)

    def gradient(lam):
        x = J @ lam
        if utility.kind == "linear":
            gx = np.ones(n)
        elif utility.kind == "weighted-min":
            gx = np.zeros(n)
            gx[int(np.argmin(w * x))] = w[int(np.argmin(w * x))]
        else:
            xs = np.maximum(x, 1e-300)
            gx = evaluate_utility(x, utility) * w / xs
        return J.T @ gx - gamma * lam

    lam = np.full(n, R / n) if start is None else project_simplex(start, R)
    L = gamma + float(J.sum(axis=0).max())
    step = 1.0 / L if L > 0 else 1.0
    f = objective(lam)

    if utility.kind == "weighted-min":
        best, fbest = lam, f
        for it in range(max_iters):
            t = step / math.sqrt(it + 1)
            new = project_simplex(lam + t * gradient(lam), R)
            moved = float(np.linalg.norm(new - lam))
            lam = new
            f = objective(lam)
            if f > fbest:
                best, fbest = lam, f
            if moved <= tol * t:
                break
        return best

    gnorm = math.inf
    for it in range(max_iters):
        cand = project_simplex(lam + step * gradient(lam), R)
        gnorm = float(np.linalg.norm(cand - lam)) / step
        if gnorm <= tol:
            return cand
        fc = objective(cand)
        if fc < f - 1e-14 * max(1.0, abs(f)) and step * L > 1e-12:
            step *= 0.5
            continue
        lam, f = cand, fc
    raise NumericalError(
        f"projected gradient did not converge in {max_iters} iterations (residual {gnorm:.3g})",
        last_iterate=lam,
        residual=gnorm,
    )
