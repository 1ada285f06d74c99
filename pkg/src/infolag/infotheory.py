"""Plug-in entropy and mutual information, and Lempel-Ziv entropy rate.

All quantities are in bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .exceptions import InsufficientDataError

MI_CLAMP = 1e-12
LZ_RELIABLE_N = 100


@dataclass
class ContingencyTable:
    counts: np.ndarray

    @property
    def n(self):
        return int(self.counts.sum())


@dataclass
class EntropyRate:
    value: float
    n: int
    q: int
    complexity: int

    @property
    def reliable(self):
        return self.n >= LZ_RELIABLE_N


def _symbols(s):
    values = np.asarray(getattr(s, "values", s))
    if values.ndim != 1:
        raise ValueError("expected a one-dimensional symbol sequence")
    if values.size and (values.min() < 0 or not np.issubdtype(values.dtype, np.integer)):
        raise ValueError("symbols must be non-negative integers")
    return values.astype(np.int64, copy=False)


def _alphabet(s, values):
    q = getattr(s, "q", None)
    return int(q) if q is not None else int(values.max()) + 1 if values.size else 0


def entropy_of_counts(counts):
    counts = np.asarray(counts, dtype=np.float64).ravel()
    n = counts.sum()
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def plugin_entropy(s):
    """Entropy of the empirical symbol distribution."""
    values = _symbols(s)
    if values.size == 0:
        raise InsufficientDataError("entropy of an empty series is undefined")
    return entropy_of_counts(np.bincount(values))


def contingency(x, y):
    xv, yv = _symbols(x), _symbols(y)
    if xv.shape != yv.shape:
        raise ValueError(f"length mismatch: {xv.size} vs {yv.size}")
    q = max(_alphabet(x, xv), _alphabet(y, yv), 1)
    counts = np.bincount(xv * q + yv, minlength=q * q).reshape(q, q)
    return ContingencyTable(counts)


def mutual_information(x, y):
    """``H(x) + H(y) - H(x, y)`` with the joint entropy taken over paired symbols."""
    xv, yv = _symbols(x), _symbols(y)
    if xv.shape != yv.shape:
        raise ValueError(f"length mismatch: {xv.size} vs {yv.size}")
    if xv.size == 0:
        raise InsufficientDataError("mutual information of empty series is undefined")
    qy = max(_alphabet(y, yv), 1)
    mi = plugin_entropy(xv) + plugin_entropy(yv) - plugin_entropy(xv * qy + yv)
    if -MI_CLAMP < mi < 0:
        mi = 0.0
    return mi


def joint_term(counts):
    """``sum c ln c`` over the last two axes of a stack of count tables."""
    counts = np.asarray(counts)
    return _backend.clogc_table(int(counts.max(initial=0)))[counts].sum(axis=(-2, -1))


def mi_from_counts(counts):
    """Plug-in MI in bits for a stack of (..., q, q) joint count tables."""
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.sum(axis=(-2, -1))
    table = _backend.clogc_table(int(n.max(initial=1)))
    joint = table[counts].sum(axis=(-2, -1))
    rows = table[counts.sum(axis=-1)].sum(axis=-1)
    cols = table[counts.sum(axis=-2)].sum(axis=-1)
    nats = (joint - rows - cols) / n + np.log(n)
    mi = nats / math.log(2)
    return np.where((mi < 0) & (mi > -MI_CLAMP), 0.0, mi)


def mi_matrix(a_sym, b_sym, q):
    """MI between every column of ``a_sym`` and every column of ``b_sym``.

    Returns ``(mi, counts)`` where ``mi[m, n]`` is in bits and ``counts`` are
    the (n_a, n_b, q, q) joint tables.
    """
    counts = _backend.pair_counts(np.asarray(a_sym), np.asarray(b_sym), q)
    return mi_from_counts(counts), counts


def lz76_complexity(s):
    return _backend.lz76_complexity(_symbols(s))


def lz_entropy_rate(s):
    """Lempel-Ziv (1976) entropy-rate estimate ``C * log2(n) / n``.

    Estimates for n < 100 are returned but flagged via ``reliable``.
    Values are not clipped at ``log2(q)``.
    """
    values = _symbols(s)
    n = values.size
    if n < 2:
        raise InsufficientDataError("entropy rate needs at least 2 symbols")
    c = _backend.lz76_complexity(values)
    return EntropyRate(c * math.log2(n) / n, n, _alphabet(s, values), c)
