"""Synthetic markets with planted lead-lag couplings.

Returns are unit-variance Gaussian innovations plus an optional common
factor; a coupling adds ``strength * f(source[t - lag])`` to the target
return at ``t``, with ``f`` the identity (linear) or ``x**2 - E[x**2]``
(quadratic, uncorrelated with the source by construction).
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .marketdata import PriceMatrix

KINDS = ("linear", "quadratic")


@dataclass(frozen=True)
class Coupling:
    source: int
    target: int
    lag: int
    strength: float
    kind: str = "linear"


@dataclass
class SynthSpec:
    n_assets: int
    n_steps: int
    day_length: int | None = None
    seed: int = 0
    couplings: list = field(default_factory=list)
    common_factor_loading: float | list = 0.0
    symbols: list | None = None
    start_price: float = 100.0

    def __post_init__(self):
        if self.n_assets < 1:
            raise ValueError("n_assets must be positive")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.day_length is not None and self.day_length < 2:
            raise ValueError("day_length must be at least 2 price rows")
        if self.symbols is None:
            width = max(2, len(str(self.n_assets - 1)))
            self.symbols = [f"S{i:0{width}d}" for i in range(self.n_assets)]
        if len(self.symbols) != self.n_assets:
            raise ValueError("need one symbol per asset")
        self.couplings = [self._coupling(c) for c in self.couplings]

    def _coupling(self, c):
        if isinstance(c, dict):
            c = Coupling(self._index(c["source"]), self._index(c["target"]), int(c["lag"]),
                         float(c["strength"]), c.get("kind", "linear"))
        if c.kind not in KINDS:
            raise ValueError(f"unknown coupling kind {c.kind!r}")
        if c.lag < 1:
            raise ValueError("coupling lags must be >= 1")
        if not math.isfinite(c.strength):
            raise ValueError("coupling strength must be finite")
        if not (0 <= c.source < self.n_assets and 0 <= c.target < self.n_assets):
            raise ValueError(f"coupling {c} refers to an unknown asset")
        if c.source == c.target:
            raise ValueError(f"self-coupling of asset {self.symbols[c.source]} is not allowed")
        return c

    def _index(self, ref):
        if isinstance(ref, str):
            try:
                return self.symbols.index(ref)
            except ValueError:
                raise ValueError(f"unknown symbol {ref!r} in coupling") from None
        return int(ref)

    def loadings(self):
        return np.broadcast_to(np.asarray(self.common_factor_loading, dtype=np.float64), (self.n_assets,))

    @classmethod
    def from_dict(cls, d):
        known = {"n_assets", "n_steps", "day_length", "seed", "couplings", "common_factor_loading",
                 "symbols", "start_price"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown synth spec keys: {sorted(extra)}")
        return cls(**d)


def _second_moments(spec):
    # Stationary E[r^2] per asset; exact for sources that are Gaussian.
    base = 1.0 + spec.loadings() ** 2
    var = base.copy()
    for _ in range(500):
        new = base.copy()
        for c in spec.couplings:
            v = var[c.source]
            new[c.target] += c.strength ** 2 * (v if c.kind == "linear" else 2.0 * v * v)
        if not np.all(np.isfinite(new)) or new.max() > 1e12:
            raise ValueError("couplings are explosive")
        if np.allclose(new, var, rtol=1e-12, atol=0):
            break
        var = new
    return var


def simulate_returns(spec):
    """(n_steps, n_assets) return matrix for ``spec``."""
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((spec.n_steps, spec.n_assets))
    factor = rng.standard_normal(spec.n_steps)
    r = noise + factor[:, None] * spec.loadings()[None, :]
    active = [c for c in spec.couplings if c.strength != 0.0]
    if not active:
        return r
    ex2 = _second_moments(spec)
    src = np.array([c.source for c in active])
    tgt = np.array([c.target for c in active])
    lag = np.array([c.lag for c in active])
    gain = np.array([c.strength for c in active])
    quad = np.array([c.kind == "quadratic" for c in active])
    center = np.where(quad, ex2[src], 0.0)
    for t in range(int(lag.min()), spec.n_steps):
        live = lag <= t
        x = r[t - lag[live], src[live]]
        drive = gain[live] * np.where(quad[live], x * x - center[live], x)
        np.add.at(r[t], tgt[live], drive)
    return r


def _to_prices(spec, r):
    logp = np.log(spec.start_price) + np.concatenate([np.zeros((1, spec.n_assets)), np.cumsum(r, axis=0)])
    rows = logp.shape[0]
    day_length = spec.day_length or rows
    days = np.arange(rows) // day_length
    return PriceMatrix(list(spec.symbols), [str(i) for i in range(rows)], days, np.exp(logp))


def gen_iid(spec):
    """Independent Gaussian random-walk log prices (with the optional common factor)."""
    if spec.couplings:
        raise ValueError("gen_iid takes a spec without couplings; use gen_coupled")
    return _to_prices(spec, simulate_returns(spec))


def gen_coupled(spec):
    """Prices plus the planted ground-truth edge list."""
    truth = [
        {"source": spec.symbols[c.source], "target": spec.symbols[c.target], "lag": c.lag,
         "strength": c.strength, "kind": c.kind}
        for c in spec.couplings
    ]
    return _to_prices(spec, simulate_returns(spec)), truth


def load_spec(path):
    with Path(path).open() as fh:
        return SynthSpec.from_dict(json.load(fh))


def write_prices_csv(prices, path):
    """Wide CSV: ``timestamp,day,SYM1,...``."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "day", *prices.symbols])
        for ts, day, row in zip(prices.timestamps, prices.day_index, prices.prices):
            w.writerow([ts, int(day), *(repr(float(v)) for v in row)])


def write_truth_json(truth, spec, path):
    doc = {"seed": spec.seed, "n_assets": spec.n_assets, "n_steps": spec.n_steps, "edges": truth}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
