"""Hot loops of the event simulator and the Euler integrator.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy version
with the same signature and semantics. The numba path is used when numba
imports and ``MUXOPINION_DISABLE_NUMBA`` is unset (or ``0``); set it to ``1``
to force the numpy path. ``get_kernels(backend)`` selects explicitly.
"""

import os

import numpy as np

from .errors import InputError

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAS_NUMBA = False

_flag = os.environ.get("MUXOPINION_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")
DEFAULT_BACKEND = "numba" if HAS_NUMBA and not NUMBA_DISABLED else "numpy"


def advance_events_py(x, outcomes, n_ext, node_of, ptr, idx, wts, delta, k0,
                      sample_every, tail_start, tail_sum, samples, sample_k, n_written):
    """Apply a block of events to ``x`` in place.

    ``outcomes[t]`` is the drawn event for event number ``k0 + t + 1``. Event
    ``o < n_ext`` is an external hit (target 1); otherwise node ``node_of[o]``
    moves towards ``sum(wts * x[idx])`` over ``ptr[o]:ptr[o + 1]``. Every node
    first decays by ``1 - delta``.
    Returns the updated count of rows written to ``samples``.
    """
    keep = 1.0 - delta
    for t in range(outcomes.shape[0]):
        o = outcomes[t]
        if o < n_ext:
            target = 1.0
        else:
            a, b = ptr[o], ptr[o + 1]
            target = float(np.dot(wts[a:b], x[idx[a:b]]))
        i = node_of[o]
        x *= keep
        x[i] += delta * target
        k = k0 + t + 1
        if k > tail_start:
            tail_sum += x
        if k % sample_every == 0:
            samples[n_written] = x
            sample_k[n_written] = k
            n_written += 1
    return n_written


def euler_py(x, indptr, indices, data, forcing, dt, n_steps):
    """Explicit Euler for ``dx/dt = forcing + A x - x`` with A in CSR form.

    Returns the final state; ``x`` is not modified. Stops early (returning the
    non-finite state) on divergence.
    """
    import scipy.sparse as sp

    n = x.shape[0]
    A = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    x = x.copy()
    for _ in range(n_steps):
        x = x + dt * (forcing + A @ x - x)
        if not np.all(np.isfinite(x)):
            break
    return x


if HAS_NUMBA:

    @njit(cache=True)
    def advance_events_nb(x, outcomes, n_ext, node_of, ptr, idx, wts, delta, k0,
                          sample_every, tail_start, tail_sum, samples, sample_k, n_written):
        keep = 1.0 - delta
        n = x.shape[0]
        for t in range(outcomes.shape[0]):
            o = outcomes[t]
            target = 1.0
            if o >= n_ext:
                target = 0.0
                for p in range(ptr[o], ptr[o + 1]):
                    target += wts[p] * x[idx[p]]
            i = node_of[o]
            for j in range(n):
                x[j] *= keep
            x[i] += delta * target
            k = k0 + t + 1
            if k > tail_start:
                for j in range(n):
                    tail_sum[j] += x[j]
            if k % sample_every == 0:
                for j in range(n):
                    samples[n_written, j] = x[j]
                sample_k[n_written] = k
                n_written += 1
        return n_written

    @njit(cache=True)
    def euler_nb(x, indptr, indices, data, forcing, dt, n_steps):
        n = x.shape[0]
        cur = x.copy()
        nxt = np.empty(n)
        for _ in range(n_steps):
            finite = True
            for i in range(n):
                acc = 0.0
                for p in range(indptr[i], indptr[i + 1]):
                    acc += data[p] * cur[indices[p]]
                v = cur[i] + dt * (forcing[i] + acc - cur[i])
                nxt[i] = v
                if not np.isfinite(v):
                    finite = False
            cur, nxt = nxt, cur
            if not finite:
                break
        return cur


_KERNELS = {"numpy": (advance_events_py, euler_py)}
if HAS_NUMBA:
    _KERNELS["numba"] = (advance_events_nb, euler_nb)


def get_kernels(backend=None):
    """Return ``(advance_events, euler)`` for ``backend`` ('numba' / 'numpy')."""
    backend = backend or DEFAULT_BACKEND
    if backend not in _KERNELS:
        raise InputError(f"backend {backend!r} unavailable; have {sorted(_KERNELS)}")
    return _KERNELS[backend]


def available_backends():
    return sorted(_KERNELS)
