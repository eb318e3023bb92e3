"""Opinion dynamics: rest point, event-driven simulation, mean-field ODE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from ._linalg import check_conditioning, check_residual
from .errors import ConditionError, InputError, NumericalError
from .multiplex import EffectiveMatrix, ModelParams, MultiplexNetwork, require_conditions

CHUNK = 1 << 16


def fixed_point(eff: EffectiveMatrix, lam) -> np.ndarray:
    """Stationary opinion profile: the solution of ``(Id - ebar) x = lam / Lambda``."""
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.shape != (eff.n,):
        raise InputError(f"lambda has length {lam.size}, expected {eff.n}")
    require_conditions(eff)
    check_conditioning(eff)
    b = lam / eff.Lambda
    x = eff.solve(b)
    check_residual(eff.system, x, b, "fixed point")
    return x


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    node_ids: tuple
    events: int
    sample_events: np.ndarray  # event index k of each stored profile, starting at 0
    samples: np.ndarray  # one row per sample_events entry
    time_average: np.ndarray  # mean of x(k) over k in (events // 2, events]
    tail_start: int
    event_nodes: np.ndarray | None = None  # per event, node index (if recorded)
    event_layers: np.ndarray | None = None  # per event, layer index or -1 for external

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]

    def deviation(self, target) -> float:
        return float(np.max(np.abs(self.time_average - np.asarray(target))))


def _event_table(net: MultiplexNetwork, params: ModelParams):
    """Flatten events: o < I is an external hit on node o, o = I + i*C + c is
    node i imitating in layer c."""
    n, C = net.n_nodes, net.n_layers
    probs = np.concatenate([params.lam, params.alpha.ravel()])
    node_of = np.concatenate([np.arange(n), np.repeat(np.arange(n), C)]).astype(np.int64)
    # row i of E_c^T lists the nodes i imitates in layer c, with weights e_{jic};
    # stacked layer-major, then reordered so row i*C + c is (node i, layer c)
    if C:
        stacked = sp.vstack([sp.csr_matrix(m.T) for m in net.layers], format="csr")
        order = (np.arange(C)[None, :] * n + np.arange(n)[:, None]).ravel()
        imit = sp.csr_matrix(stacked[order])
        imit.sort_indices()
    else:
        imit = sp.csr_matrix((0, n))
    ptr = np.concatenate([np.zeros(n, dtype=np.int64), imit.indptr.astype(np.int64)])
    return probs, node_of, ptr, imit.indices.astype(np.int64), imit.data.astype(float)


def simulate(
    net: MultiplexNetwork,
    params: ModelParams,
    events: int,
    seed: int = 0,
    sample_every: int = 1000,
    record_events: bool = False,
    backend: str | None = None,
) -> SimulationTrace:
    """Run the discrete event chain for ``events`` steps.

    Every event draws one outcome from a single categorical distribution:
    external hit on node i with probability ``lam[i] / Lambda`` or node i
    imitating in layer c with probability ``alpha[i, c] / Lambda``. The
    selected node moves by ``delta`` towards 1 (external) or towards the
    weighted opinion of those it imitates; all other nodes decay by
    ``1 - delta``.

    The random stream is ``numpy.random.default_rng(seed)`` (PCG64), consumed
    as one ``random()`` double per event, mapped to an outcome by inverse CDF.
    """
    if params.lam is None:
        raise InputError("simulation needs explicit external rates (lam)")
    if params.lam.shape != (net.n_nodes,):
        raise InputError(f"lambda has length {params.lam.size}, expected {net.n_nodes}")
    if params.alpha.shape != (net.n_nodes, net.n_layers):
        raise InputError("alpha shape does not match the network")
    if events < 1:
        raise InputError("event count must be >= 1")
    if sample_every < 1:
        raise InputError("sample_every must be >= 1")
    if not net.is_substochastic():
        raise ConditionError("simulation requires imitation sums <= 1 for every node and layer")
    Lam = params.total_rate()
    if not Lam > 0:
        raise InputError("total rate Lambda is zero")

    advance, _ = _kernels.get_kernels(backend)
    n = net.n_nodes
    probs, node_of, ptr, idx, wts = _event_table(net, params)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    last = int(np.flatnonzero(probs > 0)[-1])

    x = np.zeros(n) if params.x0 is None else np.array(params.x0, dtype=float)
    if x.shape != (n,):
        raise InputError(f"x0 has length {x.size}, expected {n}")
    n_rows = 1 + events // sample_every + (1 if events % sample_every else 0)
    samples = np.empty((n_rows, n))
    sample_k = np.empty(n_rows, dtype=np.int64)
    samples[0] = x
    sample_k[0] = 0
    written = 1
    tail_start = events // 2
    tail_sum = np.zeros(n)
    rng = np.random.default_rng(seed)
    recorded = []

    done = 0
    while done < events:
        m = min(CHUNK, events - done)
        outcomes = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), last)
        written = advance(x, outcomes, n, node_of, ptr, idx, wts, float(params.delta), done,
                          sample_every, tail_start, tail_sum, samples, sample_k, written)
        if record_events:
            recorded.append(outcomes)
        done += m
    if events % sample_every:
        samples[written] = x
        sample_k[written] = events
        written += 1

    ev_nodes = ev_layers = None
    if record_events:
        outs = np.concatenate(recorded)
        ev_nodes = node_of[outs]
        ev_layers = np.where(outs < n, -1, (outs - n) % max(net.n_layers, 1))
    return SimulationTrace(
        node_ids=net.node_ids,
        events=events,
        sample_events=sample_k[:written],
        samples=samples[:written],
        time_average=tail_sum / (events - tail_start),
        tail_start=tail_start,
        event_nodes=ev_nodes,
        event_layers=ev_layers,
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_ode(eff: EffectiveMatrix, lam, x0=None, t_end: float = 100.0, dt: float = 0.01,
                  n_records: int = 100, backend: str | None = None) -> Trajectory:
    """Explicit Euler integration of ``dx/dt = lam/Lambda + ebar x - x``."""
    if not dt > 0:
        raise InputError("dt must be > 0")
    if not t_end >= 0:
        raise InputError("t_end must be >= 0")
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.shape != (eff.n,):
        raise InputError(f"lambda has length {lam.size}, expected {eff.n}")
    require_conditions(eff)
    _, euler = _kernels.get_kernels(backend)
    x = np.zeros(eff.n) if x0 is None else np.asarray(x0, dtype=float).copy()
    forcing = lam / eff.Lambda
    A = eff.ebar
    n_steps = int(round(t_end / dt))
    marks = np.unique(np.linspace(0, n_steps, min(n_records, n_steps) + 1).round().astype(int))
    times, states = [0.0], [x.copy()]
    for prev, nxt in zip(marks[:-1], marks[1:]):
        x = euler(x, A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data, forcing,
                  float(dt), int(nxt - prev))
        if not np.all(np.isfinite(x)):
            raise NumericalError("Euler integration diverged", step=int(nxt), state=x)
        times.append(nxt * dt)
        states.append(x.copy())
    return Trajectory(np.asarray(times), np.asarray(states))
