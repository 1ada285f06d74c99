"""Equal-population quantile symbolization."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientDataError


@dataclass
class SymbolSeries:
    values: np.ndarray
    q: int

    @property
    def n(self):
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass
class SymbolMatrix:
    """Symbols with rows = time and one independently binned column per asset."""

    values: np.ndarray
    q: int

    def column(self, j):
        return SymbolSeries(self.values[:, j], self.q)

    @property
    def shape(self):
        return self.values.shape


def _stable_bins(x, q, axis=0):
    n = x.shape[axis]
    order = np.argsort(x, axis=axis, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(n).reshape([-1 if i == axis else 1 for i in range(x.ndim)]), axis=axis)
    return (ranks * q // n).astype(np.uint8)


def quantile_symbolize(x, q=4):
    """Map ``x`` to ``q`` equally populated bins.

    A value's bin is ``floor(rank * q / n)`` where ties are ranked by
    position, so bin sizes never differ by more than one and the lower
    bins absorb the remainder.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    _check(x.shape[0], q)
    return SymbolSeries(_stable_bins(x, q), int(q))


def symbolize_matrix(a, q=4):
    """Symbolize every column of ``a`` against its own quantiles."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a (rows, columns) matrix")
    _check(a.shape[0], q)
    return SymbolMatrix(_stable_bins(a, q, axis=0), int(q))


def _check(n, q):
    if not 2 <= q <= 255:
        raise ValueError(f"bin count must be in [2, 255], got {q}")
    if n < q:
        raise InsufficientDataError(f"{n} observations cannot fill {q} bins")
