"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is. Set ``INFOLAG_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_kernels = _pykernels

if not os.environ.get("INFOLAG_PURE_PYTHON"):
    try:
        from . import _ckernels as _kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _kernels = _pykernels


def _cols(x):
    return np.ascontiguousarray(np.asarray(x).T, dtype=np.uint8)


def clogc_table(n):
    """``c * ln(c)`` for c = 0..n, with the 0 * ln 0 = 0 convention."""
    c = np.arange(n + 1, dtype=np.float64)
    out = np.zeros(n + 1)
    out[1:] = c[1:] * np.log(c[1:])
    return out


def pair_counts(a_sym, b_sym, q, kernels=None):
    """Joint count tables of shape (n_a, n_b, q, q) for symbol matrices (T, n)."""
    k = kernels or _kernels
    return k.pair_counts(_cols(a_sym), _cols(b_sym), int(q))


def joint_exceedances(a_sym, b_sym, q, perms, j_obs, tol, kernels=None):
    """Per-pair count of row permutations of ``a_sym`` whose joint term reaches ``j_obs``."""
    k = kernels or _kernels
    a_cols, b_cols = _cols(a_sym), _cols(b_sym)
    u = np.zeros((a_cols.shape[0], b_cols.shape[0]), dtype=np.int64)
    k.joint_exceedances(
        a_cols,
        b_cols,
        int(q),
        np.ascontiguousarray(perms, dtype=np.intp),
        clogc_table(a_cols.shape[1]),
        np.ascontiguousarray(j_obs, dtype=np.float64),
        float(tol),
        u,
    )
    return u


def pearson_exceedances(az, bz, perms, c_obs, tol):
    """Up/down exceedance counts of row-permuted correlations; returns (U, D).

    This is a small dense GEMM per permutation, where BLAS beats a
    hand-written loop, so both backends share the numpy path.
    """
    az = np.ascontiguousarray(az, dtype=np.float64)
    bz = np.ascontiguousarray(bz, dtype=np.float64)
    u = np.zeros((az.shape[1], bz.shape[1]), dtype=np.int64)
    d = np.zeros_like(u)
    _pykernels.pearson_exceedances(az, bz, np.ascontiguousarray(perms, dtype=np.intp),
                                   np.ascontiguousarray(c_obs, dtype=np.float64), float(tol), u, d)
    return u, d


def lz76_complexity(seq, kernels=None):
    k = kernels or _kernels
    return int(k.lz76_complexity(np.ascontiguousarray(seq, dtype=np.int64)))
