"""Hot inner kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``RIDG_NUMBA=0`` to force the
numpy implementations (or when numba is not installed).
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - import guard
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    # the bundled TBB is often too old; prefer OpenMP or the builtin queue
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("RIDG_NUMBA", "1").lower() not in ("0", "false", "no", "off")


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# periodic stencil:  out[i] = sum_o  mats[o] @ src[i + offsets[o]]
# --------------------------------------------------------------------------


def stencil_apply_numpy(src, offsets, mats):
    """Apply a block stencil with periodic wraparound.

    ``src`` has shape ``grid + (m_in,)``, ``offsets`` is ``(K, d)`` and ``mats``
    is ``(K, m_out, m_in)``.
    """
    d = src.ndim - 1
    out = np.zeros(src.shape[:-1] + (mats.shape[1],))
    axes = tuple(range(d))
    for off, mat in zip(offsets, mats):
        shifted = np.roll(src, shift=tuple(-int(o) for o in off), axis=axes) if np.any(off) else src
        out += shifted @ mat.T
    return out


if HAVE_NUMBA:

    @njit(parallel=True, cache=True, fastmath=True)
    def _stencil_apply_3d(src, offsets, mats, out):  # pragma: no cover - compiled
        n0, n1, n2, m_in = src.shape
        n_off, m_out, _ = mats.shape
        for i in prange(n0):
            for j in range(n1):
                for k in range(n2):
                    for r in range(m_out):
                        out[i, j, k, r] = 0.0
                    for o in range(n_off):
                        ii = (i + offsets[o, 0]) % n0
                        jj = (j + offsets[o, 1]) % n1
                        kk = (k + offsets[o, 2]) % n2
                        for r in range(m_out):
                            s = 0.0
                            for c in range(m_in):
                                s += mats[o, r, c] * src[ii, jj, kk, c]
                            out[i, j, k, r] += s
        return out


def stencil_apply_numba(src, offsets, mats):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    d = src.ndim - 1
    grid = src.shape[:-1]
    pad = tuple(grid) + (1,) * (3 - d)
    off3 = np.zeros((len(offsets), 3), dtype=np.int64)
    off3[:, :d] = offsets
    out = np.empty(pad + (mats.shape[1],))
    _stencil_apply_3d(np.ascontiguousarray(src, dtype=float).reshape(pad + (src.shape[-1],)), off3,
                      np.ascontiguousarray(mats, dtype=float), out)
    return out.reshape(tuple(grid) + (mats.shape[1],))


def _parallel_available() -> bool:
    return HAVE_NUMBA and numba.get_num_threads() > 1


def stencil_apply(src, offsets, mats):
    offsets = np.asarray(offsets, dtype=np.int64).reshape(len(mats), -1)
    mats = np.asarray(mats, dtype=float)
    # on a single thread the BLAS-backed roll+matmul path is faster
    if USE_NUMBA and _parallel_available():
        return stencil_apply_numba(src, offsets, mats)
    return stencil_apply_numpy(src, offsets, mats)


# --------------------------------------------------------------------------
# Rusanov flux for the Burgers flux f(q) = q^2 / 2 with frozen-speed partials
# --------------------------------------------------------------------------


def burgers_rusanov_numpy(ql, qr):
    lam = np.maximum(np.maximum(np.abs(ql), np.abs(qr)), np.abs(0.5 * (ql + qr)))
    flux = 0.25 * (ql * ql + qr * qr) - 0.5 * lam * (qr - ql)
    return flux, 0.5 * ql + 0.5 * lam, 0.5 * qr - 0.5 * lam


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _burgers_rusanov_flat(ql, qr):  # pragma: no cover - compiled
        n = ql.size
        flux = np.empty(n)
        dl = np.empty(n)
        dr = np.empty(n)
        for i in prange(n):
            a = ql[i]
            b = qr[i]
            lam = max(abs(a), abs(b), abs(0.5 * (a + b)))
            flux[i] = 0.25 * (a * a + b * b) - 0.5 * lam * (b - a)
            dl[i] = 0.5 * a + 0.5 * lam
            dr[i] = 0.5 * b - 0.5 * lam
        return flux, dl, dr


def burgers_rusanov_numba(ql, qr):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    shape = np.broadcast_shapes(np.shape(ql), np.shape(qr))
    a = np.ascontiguousarray(np.broadcast_to(ql, shape), dtype=float).ravel()
    b = np.ascontiguousarray(np.broadcast_to(qr, shape), dtype=float).ravel()
    f, dl, dr = _burgers_rusanov_flat(a, b)
    return f.reshape(shape), dl.reshape(shape), dr.reshape(shape)


def burgers_rusanov(ql, qr):
    """Rusanov flux and frozen-speed partials ``(F, dF/dql, dF/dqr)`` for Burgers."""
    if USE_NUMBA:
        return burgers_rusanov_numba(ql, qr)
    return burgers_rusanov_numpy(ql, qr)
