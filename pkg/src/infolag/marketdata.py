"""Price ingestion, log returns and lag-aligned return matrices."""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import EmptyInputError, InsufficientDataError, ParseError

log = logging.getLogger(__name__)


@dataclass
class PriceMatrix:
    """Prices with rows = timestamps and columns = symbols.

    ``day_index`` labels the trading day of every row. Symbols that were
    dropped at ingest because of missing cells are listed in ``dropped``.
    """

    symbols: list
    timestamps: list
    day_index: np.ndarray
    prices: np.ndarray
    dropped: list = field(default_factory=list)

    def __post_init__(self):
        self.symbols = [str(s) for s in self.symbols]
        self.timestamps = list(self.timestamps)
        self.day_index = np.asarray(self.day_index, dtype=np.int64)
        self.prices = np.asarray(self.prices, dtype=np.float64)
        n_rows = len(self.timestamps)
        if self.prices.shape != (n_rows, len(self.symbols)):
            raise ValueError(
                f"prices shape {self.prices.shape} does not match "
                f"{n_rows} timestamps x {len(self.symbols)} symbols"
            )
        if self.day_index.shape != (n_rows,):
            raise ValueError("day_index must have one label per row")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise ValueError("prices must be finite and strictly positive")
        if np.any(np.diff(self.day_index) < 0):
            raise ValueError("day_index must be non-decreasing")
        keys = _sort_keys(self.timestamps)
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("timestamps must be strictly increasing")

    @property
    def n_rows(self):
        return self.prices.shape[0]


@dataclass
class ReturnMatrix:
    """Within-day log returns over ``tau`` data steps."""

    symbols: list
    day_index: np.ndarray
    returns: np.ndarray
    tau: int = 1
    timestamps: list = None

    def __post_init__(self):
        self.day_index = np.asarray(self.day_index, dtype=np.int64)
        self.returns = np.asarray(self.returns, dtype=np.float64)
        if self.returns.ndim != 2 or self.returns.shape[1] != len(self.symbols):
            raise ValueError("returns must be a (rows, symbols) matrix")
        if self.day_index.shape != (self.returns.shape[0],):
            raise ValueError("day_index must have one label per row")

    @classmethod
    def from_array(cls, returns, symbols=None, day_index=None, tau=1):
        """Wrap a bare (rows, symbols) array; all rows are one day by default."""
        returns = np.asarray(returns, dtype=np.float64)
        if returns.ndim == 1:
            returns = returns[:, None]
        if symbols is None:
            symbols = [f"S{i:02d}" for i in range(returns.shape[1])]
        if day_index is None:
            day_index = np.zeros(returns.shape[0], dtype=np.int64)
        return cls(list(symbols), day_index, returns, tau)

    @property
    def n_rows(self):
        return self.returns.shape[0]

    def day_lengths(self):
        _, counts = np.unique(self.day_index, return_counts=True)
        return counts


@dataclass
class LaggedPair:
    """Row-aligned matrices: ``B[i]`` is ``lam`` steps after ``A[i]`` in the same day."""

    A: np.ndarray
    B: np.ndarray
    lam: int
    symbols: list
    a_rows: np.ndarray
    b_rows: np.ndarray
    day_index: np.ndarray

    @property
    def T(self):
        return self.A.shape[0]


def _sort_keys(timestamps):
    try:
        return [float(t) for t in timestamps]
    except (TypeError, ValueError):
        return [str(t) for t in timestamps]


def _parse_day(value, line):
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"day label {value!r} is not an integer", line) from None


def _parse_price(value, line, symbol):
    value = value.strip()
    if value == "":
        return np.nan
    try:
        price = float(value)
    except ValueError:
        raise ParseError(f"price {value!r} for {symbol} is not a number", line) from None
    if not np.isfinite(price) or price <= 0:
        raise ParseError(f"non-positive or non-finite price {value!r} for symbol {symbol}", line)
    return price


def _read_wide(reader):
    header = next(reader, None)
    if header is None:
        raise EmptyInputError("empty CSV file")
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0] != "timestamp":
        raise ParseError("wide header must be 'timestamp[,day],SYM1,...'", 1)
    # without a day column all rows belong to one trading day
    has_day = header[1] == "day"
    first = 2 if has_day else 1
    symbols = header[first:]
    if not symbols:
        raise ParseError("no symbol columns in header", 1)
    if len(set(symbols)) != len(symbols):
        raise ParseError("duplicate symbol columns in header", 1)
    timestamps, days, rows = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
        timestamps.append(row[0].strip())
        days.append(_parse_day(row[1], line) if has_day else 0)
        rows.append([_parse_price(v, line, s) for v, s in zip(row[first:], symbols)])
    return symbols, timestamps, days, np.array(rows, dtype=np.float64).reshape(len(rows), len(symbols))


def _read_long(reader):
    header = next(reader, None)
    if header is None:
        raise EmptyInputError("empty CSV file")
    header = [h.strip() for h in header]
    if header not in (["timestamp", "day", "symbol", "price"], ["timestamp", "symbol", "price"]):
        raise ParseError("long header must be 'timestamp[,day],symbol,price'", 1)
    width = len(header)
    cells = {}
    day_of = {}
    symbols = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} fields, got {len(row)}", line)
        if width == 4:
            ts, day, sym = row[0].strip(), _parse_day(row[1], line), row[2].strip()
        else:
            ts, day, sym = row[0].strip(), 0, row[1].strip()
        price = _parse_price(row[-1], line, sym)
        if day_of.setdefault(ts, day) != day:
            raise ParseError(f"timestamp {ts} carries two day labels", line)
        if (ts, sym) in cells:
            raise ParseError(f"duplicate entry for timestamp {ts}, symbol {sym}", line)
        cells[(ts, sym)] = price
        if sym not in symbols:
            symbols.append(sym)
    keys = _sort_keys(list(day_of))
    timestamps = [t for _, t in sorted(zip(keys, day_of))]
    prices = np.full((len(timestamps), len(symbols)), np.nan)
    for i, ts in enumerate(timestamps):
        for j, sym in enumerate(symbols):
            prices[i, j] = cells.get((ts, sym), np.nan)
    return symbols, timestamps, [day_of[t] for t in timestamps], prices


def ingest_csv(path, format="wide"):
    """Read a price CSV into a :class:`PriceMatrix`.

    Symbols with any missing cell are dropped (and logged); every remaining
    symbol has a price at every timestamp.
    """
    path = Path(path)
    if format not in ("wide", "long"):
        raise ValueError(f"unknown CSV format {format!r}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        symbols, timestamps, days, prices = (_read_wide if format == "wide" else _read_long)(reader)
    if not timestamps:
        raise EmptyInputError(f"{path}: no data rows")
    complete = ~np.isnan(prices).any(axis=0)
    dropped = [s for s, ok in zip(symbols, complete) if not ok]
    if dropped:
        log.warning("dropping symbols with incomplete data: %s", ", ".join(dropped))
    if not complete.any():
        raise EmptyInputError(f"{path}: every symbol has missing data")
    try:
        return PriceMatrix(
            [s for s, ok in zip(symbols, complete) if ok],
            timestamps,
            days,
            prices[:, complete],
            dropped,
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _day_slices(day_index):
    bounds = np.flatnonzero(np.diff(day_index)) + 1
    starts = np.concatenate([[0], bounds])
    stops = np.concatenate([bounds, [len(day_index)]])
    return list(zip(starts.tolist(), stops.tolist()))


def log_returns(p, tau=1):
    """Log returns ``ln p(t) - ln p(t - tau)`` taken within each trading day.

    The first ``tau`` rows of every day have no in-day predecessor and
    produce no return.
    """
    tau = int(tau)
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    logp = np.log(p.prices)
    out, days, stamps = [], [], []
    for start, stop in _day_slices(p.day_index):
        if stop - start <= tau:
            raise InsufficientDataError(
                f"trading day {p.day_index[start]} has {stop - start} rows, needs more than tau={tau}"
            )
        out.append(logp[start + tau:stop] - logp[start:stop - tau])
        days.append(p.day_index[start + tau:stop])
        stamps.extend(p.timestamps[start + tau:stop])
    return ReturnMatrix(list(p.symbols), np.concatenate(days), np.vstack(out), tau, stamps)


def build_lagged_pair(r, lam):
    """Split returns into leader rows ``A`` and follower rows ``B`` ``lam`` steps later.

    Within a day of ``d`` rows, A takes rows ``0..d-lam-1`` and B rows
    ``lam..d-1``; days with ``d <= lam`` contribute nothing.
    """
    lam = int(lam)
    if lam < 0:
        raise ValueError("lag must be non-negative")
    a_rows, b_rows = [], []
    for start, stop in _day_slices(r.day_index):
        if stop - start > lam:
            a_rows.append(np.arange(start, stop - lam))
            b_rows.append(np.arange(start + lam, stop))
    if not a_rows:
        raise InsufficientDataError(f"every trading day is shorter than lag+1 = {lam + 1} rows")
    a_rows = np.concatenate(a_rows)
    b_rows = np.concatenate(b_rows)
    return LaggedPair(
        r.returns[a_rows],
        r.returns[b_rows],
        lam,
        list(r.symbols),
        a_rows,
        b_rows,
        r.day_index[a_rows],
    )
