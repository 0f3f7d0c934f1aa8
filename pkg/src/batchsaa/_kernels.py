"""
Hot inner loops for the box-constrained QP solver.

Each kernel has a numba implementation and a pure-numpy implementation
running the same iteration. The numba path is used when numba imports and
the environment variable ``BATCHSAA_NUMBA`` is not set to a false value
(``0``, ``false``, ``no``, ``off``). The numba kernels are compiled with
``nogil=True`` so replication-level threads run them concurrently.
"""

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        return decorator


def _numba_requested() -> bool:
    flag = os.environ.get("BATCHSAA_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = NUMBA_AVAILABLE and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------


def power_iteration_numpy(Q, iters):
    n = Q.shape[0]
    v = np.ones(n) / np.sqrt(n)
    for _ in range(iters):
        w = Q @ v
        norm = np.sqrt(w @ w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(v @ (Q @ v))


def box_qp_numpy(Q, c, lower, upper, x0, lipschitz, tol, max_iter):
    """Accelerated projected gradient for min c'x + x'Qx/2 over a box.

    Returns ``(x, iterations, residual)`` where residual is the infinity
    norm of ``x - clip(x - grad)``, zero exactly at a KKT point.
    """
    x = np.minimum(np.maximum(x0, lower), upper)
    g = Q @ x + c
    res = np.max(np.abs(x - np.minimum(np.maximum(x - g, lower), upper)))
    if res <= tol:
        return x, 0, res
    y = x.copy()
    t = 1.0
    for k in range(1, max_iter + 1):
        gy = Q @ y + c
        x_new = np.minimum(np.maximum(y - gy / lipschitz, lower), upper)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        # restart momentum when the gradient-mapping step opposes progress
        if (y - x_new) @ (x_new - x) > 0.0:
            t_new = 1.0
            y = x_new.copy()
        else:
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x = x_new
        t = t_new
        g = Q @ x + c
        res = np.max(np.abs(x - np.minimum(np.maximum(x - g, lower), upper)))
        if res <= tol:
            return x, k, res
    return x, max_iter, res


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _matvec_add(Q, v, c, out):
    n = Q.shape[0]
    for i in range(n):
        acc = c[i]
        for j in range(n):
            acc += Q[i, j] * v[j]
        out[i] = acc


@njit(cache=True, nogil=True)
def _clip(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


@njit(cache=True, nogil=True)
def _residual(x, g, lower, upper):
    res = 0.0
    for i in range(x.shape[0]):
        r = abs(x[i] - _clip(x[i] - g[i], lower[i], upper[i]))
        if r > res:
            res = r
    return res


@njit(cache=True, nogil=True)
def power_iteration_numba(Q, iters):
    n = Q.shape[0]
    v = np.empty(n)
    w = np.empty(n)
    zero = np.zeros(n)
    for i in range(n):
        v[i] = 1.0 / np.sqrt(n)
    for _ in range(iters):
        _matvec_add(Q, v, zero, w)
        norm = 0.0
        for i in range(n):
            norm += w[i] * w[i]
        norm = np.sqrt(norm)
        if norm == 0.0:
            return 0.0
        for i in range(n):
            v[i] = w[i] / norm
    _matvec_add(Q, v, zero, w)
    rq = 0.0
    for i in range(n):
        rq += v[i] * w[i]
    return rq


@njit(cache=True, nogil=True)
def box_qp_numba(Q, c, lower, upper, x0, lipschitz, tol, max_iter):
    n = Q.shape[0]
    x = np.empty(n)
    for i in range(n):
        x[i] = _clip(x0[i], lower[i], upper[i])
    g = np.empty(n)
    _matvec_add(Q, x, c, g)
    res = _residual(x, g, lower, upper)
    if res <= tol:
        return x, 0, res
    y = x.copy()
    x_new = np.empty(n)
    gy = np.empty(n)
    t = 1.0
    for k in range(1, max_iter + 1):
        _matvec_add(Q, y, c, gy)
        for i in range(n):
            x_new[i] = _clip(y[i] - gy[i] / lipschitz, lower[i], upper[i])
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        restart = 0.0
        for i in range(n):
            restart += (y[i] - x_new[i]) * (x_new[i] - x[i])
        if restart > 0.0:
            t_new = 1.0
            for i in range(n):
                y[i] = x_new[i]
        else:
            beta = (t - 1.0) / t_new
            for i in range(n):
                y[i] = x_new[i] + beta * (x_new[i] - x[i])
        for i in range(n):
            x[i] = x_new[i]
        t = t_new
        _matvec_add(Q, x, c, g)
        res = _residual(x, g, lower, upper)
        if res <= tol:
            return x, k, res
    return x, max_iter, res


if USE_NUMBA:
    power_iteration = power_iteration_numba
    box_qp = box_qp_numba
else:
    power_iteration = power_iteration_numpy
    box_qp = box_qp_numpy
