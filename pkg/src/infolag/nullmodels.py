"""Null distributions for lagged dependence statistics.

Plug-in MI between independent variables is approximately
``Gamma(shape=(qx-1)(qy-1)/2, scale=1/(N ln 2))``; shuffling the leader
rows gives an empirical alternative for both MI and Pearson correlation.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .exceptions import InsufficientDataError, NumericalError
from .infotheory import joint_term, mi_matrix
from .symbolize import symbolize_matrix

_EPS = np.finfo(np.float64).eps
_TINY = 1e-300
_MAX_ITER = 100_000
SHUFFLE_CHUNK = 64


@dataclass(frozen=True)
class GammaNull:
    alpha: float
    beta: float
    N: int


@dataclass
class SurrogateCounts:
    """Shuffle exceedance counts.

    ``U[m, n]`` counts realizations with surrogate statistic >= observed;
    ``D`` (Pearson only) counts surrogate <= observed. Ties go to both.
    """

    U: np.ndarray
    D: np.ndarray | None
    n_shuffles: int
    seed: int
    statistic: str
    observed: np.ndarray
    mode: str = "rows"

    def pvalues(self):
        """One-tailed p-values ``U/n`` (``D/n`` for negative correlations)."""
        if self.D is None:
            return self.U / self.n_shuffles
        return np.where(self.observed >= 0, self.U, self.D) / self.n_shuffles


@dataclass
class LaggedCorrMatrix:
    C: np.ndarray
    lam: int
    T: int


def gamma_null(qx, qy, N):
    if qx < 2 or qy < 2:
        raise ValueError(f"alphabet sizes must be >= 2, got {qx} and {qy}")
    if N < 1:
        raise ValueError(f"sample size must be >= 1, got {N}")
    return GammaNull((qx - 1) * (qy - 1) / 2.0, 1.0 / (N * math.log(2)), int(N))


def regularized_gamma(a, x):
    """Regularized incomplete gamma functions ``(P(a, x), Q(a, x))``.

    Series expansion below ``x = a + 1``, Lentz continued fraction above;
    whichever tail is computed directly keeps full relative precision.
    """
    if a <= 0:
        raise ValueError("shape must be positive")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("x must be non-negative")
    p = np.zeros_like(x)
    q = np.ones_like(x)
    lga = math.lgamma(a)

    pos = x > 0
    lo = pos & (x < a + 1)
    hi = pos & ~lo
    with np.errstate(divide="ignore", under="ignore", over="ignore"):
        if lo.any():
            xs = x[lo]
            term = np.full_like(xs, 1.0 / a)
            total = term.copy()
            ap = a
            for _ in range(_MAX_ITER):
                ap += 1.0
                term *= xs / ap
                total += term
                if np.all(np.abs(term) < np.abs(total) * _EPS / 4):
                    break
            else:
                raise NumericalError(f"gamma series did not converge for a={a}, x in [{xs.min()}, {xs.max()}]")
            p[lo] = total * np.exp(a * np.log(xs) - xs - lga)
            q[lo] = 1.0 - p[lo]
        if hi.any():
            xs = x[hi]
            b = xs + 1.0 - a
            c = np.full_like(xs, 1.0 / _TINY)
            d = 1.0 / b
            h = d.copy()
            done = np.zeros(xs.shape, dtype=bool)
            for i in range(1, _MAX_ITER):
                an = -i * (i - a)
                b = b + 2.0
                d = an * d + b
                d = np.where(np.abs(d) < _TINY, _TINY, d)
                c = b + an / c
                c = np.where(np.abs(c) < _TINY, _TINY, c)
                d = 1.0 / d
                delta = d * c
                h = np.where(done, h, h * delta)
                done |= np.abs(delta - 1.0) < 4 * _EPS
                if done.all():
                    break
            else:
                raise NumericalError(f"gamma continued fraction did not converge for a={a}")
            q[hi] = np.exp(a * np.log(xs) - xs - lga) * h
            p[hi] = 1.0 - q[hi]
    if scalar:
        return float(p[0]), float(q[0])
    return p, q


def _solve_standard(a, prob, upper):
    """y with P(a, y) = prob (or Q(a, y) = upper when ``upper`` is not None)."""

    def resid(y):
        pp, qq = regularized_gamma(a, y)
        # positive when y is above the root
        return (upper - qq) if upper is not None else (pp - prob)

    lo = hi = max(a, 1.0)
    while resid(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericalError(f"could not bracket gamma quantile: a={a}, prob={prob}, upper={upper}")
    while resid(lo) > 0:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    for _ in range(2000):
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if resid(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 2.0 * _EPS * hi:
            break
    y = 0.5 * (lo + hi)
    pp, qq = regularized_gamma(a, y)
    err = abs(qq - upper) if upper is not None else abs(pp - prob)
    if err > 1e-12:
        raise NumericalError(
            f"gamma quantile inaccurate: a={a}, prob={prob}, upper={upper}, y={y}, residual={err:.3e}"
        )
    return y


def gamma_quantile(g, prob):
    """x such that the null CDF ``P(alpha, x / beta)`` equals ``prob``."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {prob}")
    if prob > 0.5:
        return g.beta * _solve_standard(g.alpha, prob, 1.0 - prob)
    return g.beta * _solve_standard(g.alpha, prob, None)


def gamma_isf(g, upper):
    """x with upper-tail probability ``upper``; precise for tiny tails."""
    if not 0.0 < upper < 1.0:
        raise ValueError(f"tail probability must lie in (0, 1), got {upper}")
    return g.beta * _solve_standard(g.alpha, 1.0 - upper, upper)


def mi_pvalue(g, observed_mi):
    """Upper-tail probability of ``observed_mi`` under the Gamma null."""
    obs = np.asarray(observed_mi, dtype=np.float64)
    if np.any(obs < 0):
        raise ValueError("observed MI must be non-negative")
    _, q = regularized_gamma(g.alpha, obs / g.beta)
    return q


def _standardize(x, symbols, which):
    mu = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        raise ValueError(f"correlation undefined: column {symbols[bad[0]]} of {which} is constant")
    return (x - mu) / sd


def lagged_pearson(pair):
    """Pearson correlation of every A column with every B column."""
    T = pair.T
    if T < 3:
        raise InsufficientDataError(f"need at least 3 aligned rows, got {T}")
    az = _standardize(pair.A, pair.symbols, "A")
    bz = _standardize(pair.B, pair.symbols, "B")
    C = np.clip(az.T @ bz / (T - 1), -1.0, 1.0)
    return LaggedCorrMatrix(C, pair.lam, T)


def chunk_permutations(seed, chunk, T):
    """Row permutations for realizations ``chunk*64 .. chunk*64+63``."""
    rng = np.random.default_rng([int(seed), int(chunk)])
    return rng.permuted(np.tile(np.arange(T, dtype=np.intp), (SHUFFLE_CHUNK, 1)), axis=1)


def _realization_perms(seed, n_shuffles, T):
    for chunk in range((n_shuffles + SHUFFLE_CHUNK - 1) // SHUFFLE_CHUNK):
        k = min(SHUFFLE_CHUNK, n_shuffles - chunk * SHUFFLE_CHUNK)
        yield lambda c=chunk, k=k: chunk_permutations(seed, c, T)[:k]


def _column_perms(seed, r, T, N):
    rng = np.random.default_rng([int(seed), 1, int(r)])
    return rng.permuted(np.tile(np.arange(T, dtype=np.intp), (N, 1)), axis=1)


def shuffle_surrogates(pair, statistic="mi", n_shuffles=1000, seed=0, q=4, mode="rows",
                       permutations=None, n_jobs=1):
    """Count how often row-shuffled surrogates reach the observed statistic.

    Whole rows of A are permuted (B fixed), which preserves the
    cross-sectional structure of A. ``mode="columns"`` permutes each A
    column independently instead. Realization ``r`` draws its permutation
    from a stream keyed on ``(seed, r // 64)``, so results do not depend on
    ``n_jobs``. ``permutations`` overrides the random draws (shape
    ``(n_shuffles, T)``).
    """
    if statistic not in ("mi", "pearson"):
        raise ValueError(f"unknown statistic {statistic!r}")
    if mode not in ("rows", "columns"):
        raise ValueError(f"unknown shuffle mode {mode!r}")
    T = pair.T
    if permutations is not None:
        permutations = np.asarray(permutations, dtype=np.intp)
        if permutations.ndim != 2 or permutations.shape[1] != T:
            raise ValueError("permutations must have shape (n_shuffles, T)")
        n_shuffles = permutations.shape[0]
        tasks = [lambda p=permutations[i:i + SHUFFLE_CHUNK]: p for i in range(0, n_shuffles, SHUFFLE_CHUNK)]
    else:
        tasks = list(_realization_perms(seed, n_shuffles, T))
    if n_shuffles < 1:
        raise ValueError("need at least one shuffle")

    if statistic == "mi":
        a_sym = symbolize_matrix(pair.A, q).values
        b_sym = symbolize_matrix(pair.B, q).values
        observed, counts = mi_matrix(a_sym, b_sym, q)
        j_obs = joint_term(counts)
        tol = 1e-10 * (T * math.log(T) + 1.0)
        if mode == "columns":
            U = _mi_columns(a_sym, b_sym, q, j_obs, tol, seed, n_shuffles)
        else:
            def run(task):
                return _backend.joint_exceedances(a_sym, b_sym, q, task(), j_obs, tol)

            U = _merge(run, tasks, n_jobs)
        return SurrogateCounts(U, None, n_shuffles, seed, "mi", observed, mode)

    corr = lagged_pearson(pair)
    az = _standardize(pair.A, pair.symbols, "A")
    bz = _standardize(pair.B, pair.symbols, "B")
    tol = 1e-12
    if mode == "columns":
        U, D = _pearson_columns(az, bz, corr.C, tol, seed, n_shuffles)
    else:
        def run(task):
            return np.stack(_backend.pearson_exceedances(az, bz, task(), corr.C, tol))

        U, D = _merge(run, tasks, n_jobs)
    return SurrogateCounts(U, D, n_shuffles, seed, "pearson", corr.C, mode)


def _merge(run, tasks, n_jobs):
    if n_jobs == 1 or len(tasks) == 1:
        parts = map(run, tasks)
        total = next(parts).astype(np.int64)
        for part in parts:
            total += part
        return total
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return sum(pool.map(run, tasks)).astype(np.int64)


def _mi_columns(a_sym, b_sym, q, j_obs, tol, seed, n_shuffles):
    T, N = a_sym.shape
    U = np.zeros(j_obs.shape, dtype=np.int64)
    cols = np.arange(N)
    for r in range(n_shuffles):
        perm = _column_perms(seed, r, T, N)
        shuffled = a_sym[perm.T, cols]
        U += joint_term(_backend.pair_counts(shuffled, b_sym, q)) >= j_obs - tol
    return U


def _pearson_columns(az, bz, C, tol, seed, n_shuffles):
    T, N = az.shape
    U = np.zeros(C.shape, dtype=np.int64)
    D = np.zeros(C.shape, dtype=np.int64)
    cols = np.arange(N)
    for r in range(n_shuffles):
        perm = _column_perms(seed, r, T, N)
        ct = az[perm.T, cols].T @ bz / (T - 1)
        U += ct >= C - tol
        D += ct <= C + tol
    return U, D
