"""Entropy-rate comparison between validated and non-validated pairs."""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InsufficientDataError
from .inference import networks_for, score_pairs
from .infotheory import lz_entropy_rate
from .marketdata import build_lagged_pair
from .symbolize import quantile_symbolize

PERM_CHUNK = 256


@dataclass
class GroupComparison:
    group_a: np.ndarray
    group_b: np.ndarray
    grid: np.ndarray
    kde_a: np.ndarray
    kde_b: np.ndarray
    perm_p: float
    n_permutations: int
    seed: int
    band_lo: np.ndarray | None = None
    band_hi: np.ndarray | None = None

    def summary(self):
        return {
            "n_validated": int(self.group_a.size),
            "n_nonvalidated": int(self.group_b.size),
            "mean_validated": float(self.group_a.mean()),
            "mean_nonvalidated": float(self.group_b.mean()),
            "perm_p": float(self.perm_p),
            "n_permutations": int(self.n_permutations),
            "seed": int(self.seed),
        }


def pair_entropy_rate(x, y):
    """Mean of the two series' Lempel-Ziv entropy rates."""
    hx = lz_entropy_rate(x).value
    hy = lz_entropy_rate(y).value
    return 0.5 * (hx + hy)


def silverman_bandwidth(values):
    """``0.9 * min(sd, IQR / 1.34) * n**(-1/5)``; falls back to sd when the IQR is 0."""
    v = np.asarray(values, dtype=np.float64)
    sd = v.std(ddof=1)
    if not sd > 0:
        raise ValueError("zero-variance sample: pass an explicit bandwidth")
    q75, q25 = np.percentile(v, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    return 0.9 * spread * v.size ** -0.2


def default_grid(values, bandwidth, n_points=512, pad=4.0):
    v = np.asarray(values, dtype=np.float64)
    return np.linspace(v.min() - pad * bandwidth, v.max() + pad * bandwidth, n_points)


def kde(values, grid=None, bandwidth="auto"):
    """Gaussian kernel density of ``values`` evaluated on ``grid``.

    Returns ``(grid, density)``. The default grid spans the data range
    padded by four bandwidths.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 2:
        raise InsufficientDataError("kernel density needs at least 2 values")
    h = silverman_bandwidth(v) if bandwidth == "auto" else float(bandwidth)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    grid = default_grid(v, h) if grid is None else np.asarray(grid, dtype=np.float64)
    return grid, _density(v, grid, h)


def _density(v, grid, h):
    z = (grid[:, None] - v[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (v.size * h * np.sqrt(2 * np.pi))


def _chunk_perms(seed, chunk, n):
    rng = np.random.default_rng([int(seed), int(chunk)])
    return rng.permuted(np.tile(np.arange(n), (PERM_CHUNK, 1)), axis=1)


def _perm_batches(seed, n_permutations, n):
    for chunk in range((n_permutations + PERM_CHUNK - 1) // PERM_CHUNK):
        k = min(PERM_CHUNK, n_permutations - chunk * PERM_CHUNK)
        yield _chunk_perms(seed, chunk, n)[:k]


def permutation_test(group_a, group_b, n_permutations=9999, seed=0):
    """Two-sided permutation p-value for a difference in means.

    ``p = (1 + #{|perm stat| >= |observed|}) / (n_permutations + 1)``. The
    pooled sample is put in sorted order before relabeling, which makes the
    result exactly invariant under swapping the groups.
    """
    a = np.asarray(group_a, dtype=np.float64).ravel()
    b = np.asarray(group_b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("both groups must be nonempty")
    if n_permutations < 100:
        raise ValueError("use at least 100 permutations")
    pooled = np.sort(np.concatenate([a, b]), kind="stable")
    n, k = pooled.size, min(a.size, b.size)
    total = pooled.sum()
    observed = abs(a.mean() - b.mean())
    cut = observed - 1e-12 * max(1.0, observed)
    hits = 0
    for perms in _perm_batches(seed, n_permutations, n):
        s = pooled[perms[:, :k]].sum(axis=1)
        stat = np.abs(s / k - (total - s) / (n - k))
        hits += int(np.count_nonzero(stat >= cut))
    return (1 + hits) / (n_permutations + 1)


def permutation_band(group_a, group_b, grid, bandwidth, n_curves=199, seed=0, levels=(2.5, 97.5)):
    """Pointwise percentile envelope of KDE curves of randomly relabeled group A."""
    a = np.asarray(group_a, dtype=np.float64).ravel()
    pooled = np.concatenate([a, np.asarray(group_b, dtype=np.float64).ravel()])
    curves = []
    for perms in _perm_batches(int(seed) + 1, n_curves, pooled.size):
        for perm in perms:
            curves.append(_density(pooled[perm[:a.size]], grid, bandwidth))
    lo, hi = np.percentile(np.array(curves), levels, axis=0)
    return lo, hi


def compare_groups(group_a, group_b, n_permutations=9999, seed=0, band=True, n_points=512):
    a = np.asarray(group_a, dtype=np.float64).ravel()
    b = np.asarray(group_b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError(f"both groups must be nonempty, got {a.size} and {b.size}")
    both = np.concatenate([a, b])
    h = silverman_bandwidth(both)
    grid = default_grid(both, h, n_points)
    # a group too small or flat for its own bandwidth borrows the pooled one
    ha = silverman_bandwidth(a) if a.size > 1 and a.std() > 0 else h
    hb = silverman_bandwidth(b) if b.size > 1 and b.std() > 0 else h
    ka = _density(a, grid, ha)
    kb = _density(b, grid, hb)
    lo = hi = None
    if band:
        lo, hi = permutation_band(a, b, grid, ha, seed=seed)
    p = permutation_test(a, b, n_permutations, seed)
    return GroupComparison(a, b, grid, ka, kb, p, n_permutations, seed, lo, hi)


def asset_entropy_rates(R, q=4):
    """LZ entropy rate of each asset's quantile-symbolized return series."""
    return np.array([lz_entropy_rate(quantile_symbolize(R.returns[:, j], q)).value
                     for j in range(R.returns.shape[1])])


def entropy_rate_comparison(R, lam, q=4, p=0.01, correction="fdr", n_permutations=9999, seed=0, band=True):
    """Split ordered pairs at lag ``lam`` into validated / non-validated and compare.

    A pair's value is the mean entropy rate of its two assets.
    """
    table = score_pairs(build_lagged_pair(R, lam), q)
    net = networks_for(table, p, (correction,))[correction]
    rates = asset_entropy_rates(R, q)
    edges = net.edge_set()
    idx = {s: i for i, s in enumerate(table.symbols)}
    validated, other = [], []
    for src in table.symbols:
        for dst in table.symbols:
            if src == dst:
                continue
            value = 0.5 * (rates[idx[src]] + rates[idx[dst]])
            (validated if (src, dst) in edges else other).append(value)
    return compare_groups(validated, other, n_permutations, seed, band)


def write_comparison(gc, csv_path, json_path=None):
    with Path(csv_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid", "density_validated", "density_nonvalidated", "band_lo", "band_hi"])
        for i, x in enumerate(gc.grid):
            lo = "" if gc.band_lo is None else repr(float(gc.band_lo[i]))
            hi = "" if gc.band_hi is None else repr(float(gc.band_hi[i]))
            w.writerow([repr(float(x)), repr(float(gc.kde_a[i])), repr(float(gc.kde_b[i])), lo, hi])
    if json_path is not None:
        Path(json_path).write_text(json.dumps(gc.summary(), indent=2, sort_keys=True) + "\n")
