"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The compiled path is used when numba imports cleanly and the environment
variable ``OPAA_NO_NUMBA`` is unset (any of ``1``/``true``/``yes`` selects
the numpy fallback). Both implementations of every kernel stay importable
(``*_numpy`` and, when available, ``*_numba``) so the benchmark suite can
compare them; the unsuffixed module-level names dispatch to the active
backend.

All kernels accumulate in a fixed, input-defined order: for identical
inputs they return identical bits, which the deterministic grid reduction
in :mod:`opaa.core` relies on.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "decode_linear_indices",
    "weight_products",
    "shell_partial_sums",
    "tridiag_ql",
]

_EPS = 2.220446049250313e-16
_MAX_QL_SWEEPS = 50


def _numba_requested() -> bool:
    return os.environ.get("OPAA_NO_NUMBA", "").strip().lower() not in (
        "1",
        "true",
        "yes",
    )


# --- pure-numpy implementations -------------------------------------------


def decode_linear_indices_numpy(start, stop, order, dim):
    """Decode linear grid indices [start, stop) into 0-based coordinates.

    Odometer order with the last coordinate fastest: linear index
    ``t = (((j_1 * order) + j_2) * order + ...) + j_dim`` for 0-based
    ``j_k``. Returns an int64 array of shape ``(stop - start, dim)``.
    """
    t = np.arange(start, stop, dtype=np.int64)
    out = np.empty((t.size, dim), dtype=np.int64)
    for k in range(dim - 1, -1, -1):
        out[:, k] = t % order
        t = t // order
    return out


def weight_products_numpy(idx, w1d):
    """Per-point products of 1-D weights gathered by coordinate index."""
    out = w1d[idx[:, 0]].copy()
    for k in range(1, idx.shape[1]):
        out *= w1d[idx[:, k]]
    return out


def shell_partial_sums_numpy(idx, g, table, taus):
    """Partial sums sum_t g[t] * prod_k table[taus[j, k], idx[t, k]].

    ``g`` carries the per-point integrand (weight product times lifted
    target value); one output entry per row of ``taus``.
    """
    out = np.empty(taus.shape[0])
    for j in range(taus.shape[0]):
        vals = g * table[taus[j, 0], idx[:, 0]]
        for k in range(1, idx.shape[1]):
            vals *= table[taus[j, k], idx[:, k]]
        out[j] = vals.sum()
    return out


def tridiag_ql_numpy(diag, off):
    d = diag.astype(np.float64).copy()
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = off
    z = np.zeros(n)
    z[0] = 1.0
    if not _tridiag_ql_sweeps(d, e, z):
        raise RuntimeError("tridiagonal QL failed to converge in 50 sweeps")
    return d, z


def _tridiag_ql_sweeps(d, e, z):
    """Implicit-shift QL sweeps for a symmetric tridiagonal matrix.

    ``d`` holds the diagonal and is overwritten with eigenvalues, ``e`` the
    subdiagonal in its first n-1 slots, and ``z`` a row of the identity that
    accumulates the first component of every eigenvector. Shared verbatim by
    both backends so their results agree bit for bit.
    """
    n = d.shape[0]
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= _EPS * dd:
                    m = mm
                    break
            if m == l:
                break
            if sweeps == _MAX_QL_SWEEPS:
                return False
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # rotation annihilated early; drop the shift and restart
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


# --- numba fast path --------------------------------------------------------

NUMBA_AVAILABLE = False
if _numba_requested():
    try:
        import numba as nb

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:
    _njit = nb.njit(cache=True, nogil=True)

    @_njit
    def decode_linear_indices_numba(start, stop, order, dim):
        count = stop - start
        out = np.empty((count, dim), dtype=np.int64)
        for row in range(count):
            t = start + row
            for k in range(dim - 1, -1, -1):
                out[row, k] = t % order
                t //= order
        return out

    @_njit
    def weight_products_numba(idx, w1d):
        m, n = idx.shape
        out = np.empty(m)
        for t in range(m):
            p = w1d[idx[t, 0]]
            for k in range(1, n):
                p *= w1d[idx[t, k]]
            out[t] = p
        return out

    @_njit
    def shell_partial_sums_numba(idx, g, table, taus):
        m, n = idx.shape
        out = np.empty(taus.shape[0])
        for j in range(taus.shape[0]):
            acc = 0.0
            for t in range(m):
                p = g[t]
                for k in range(n):
                    p *= table[taus[j, k], idx[t, k]]
                acc += p
            out[j] = acc
        return out

    _tridiag_ql_sweeps_numba = _njit(_tridiag_ql_sweeps)

    def tridiag_ql_numba(diag, off):
        d = diag.astype(np.float64).copy()
        n = d.shape[0]
        e = np.zeros(n)
        e[: n - 1] = off
        z = np.zeros(n)
        z[0] = 1.0
        if not _tridiag_ql_sweeps_numba(d, e, z):
            raise RuntimeError("tridiagonal QL failed to converge in 50 sweeps")
        return d, z

    decode_linear_indices = decode_linear_indices_numba
    weight_products = weight_products_numba
    shell_partial_sums = shell_partial_sums_numba
    tridiag_ql = tridiag_ql_numba
    BACKEND = "numba"
else:
    decode_linear_indices = decode_linear_indices_numpy
    weight_products = weight_products_numpy
    shell_partial_sums = shell_partial_sums_numpy
    tridiag_ql = tridiag_ql_numpy
    BACKEND = "numpy"
