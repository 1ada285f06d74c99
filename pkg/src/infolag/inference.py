"""Pair scoring, multiple-testing corrections and validated networks."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfolagError, InsufficientDataError
from .marketdata import build_lagged_pair
from .nullmodels import gamma_null, lagged_pearson, mi_pvalue, shuffle_surrogates
from .infotheory import mi_matrix
from .symbolize import symbolize_matrix

log = logging.getLogger(__name__)

CORRECTIONS = ("bonferroni", "fdr", "none")


@dataclass(frozen=True)
class PairScore:
    source: str
    target: str
    lam: int
    statistic: float
    p_value: float
    null_desc: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass
class ScoreTable:
    """Statistic and p-value for every ordered pair at one lag.

    Row index is the leader (A column), column index the follower (B column).
    """

    symbols: list
    lam: int
    T: int
    statistic: np.ndarray
    p_values: np.ndarray
    kind: str
    method: str
    null: object = None

    def pairs(self, include_self=False):
        out = []
        for m, src in enumerate(self.symbols):
            for n, dst in enumerate(self.symbols):
                if m == n and not include_self:
                    continue
                out.append(PairScore(src, dst, self.lam, float(self.statistic[m, n]),
                                     float(self.p_values[m, n]), self._null_desc(m, n)))
        return out

    def _null_desc(self, m, n):
        null = self.null
        if null is None:
            return {}
        if hasattr(null, "alpha"):
            return {"alpha": null.alpha, "beta": null.beta, "N": null.N}
        desc = {"U": int(null.U[m, n]), "n_shuffles": null.n_shuffles, "seed": null.seed}
        if null.D is not None:
            desc["D"] = int(null.D[m, n])
        return desc


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    statistic: float
    p_value: float


@dataclass
class DirectedNetwork:
    nodes: list
    edges: list
    correction: str
    p_nominal: float
    lam: int | None = None
    n_tests: int | None = None

    def edge_set(self):
        return {(e.source, e.target) for e in self.edges}

    def __len__(self):
        return len(self.edges)


@dataclass
class LagSweepResult:
    lambdas: list
    link_counts: dict
    self_counts: list = field(default_factory=list)
    networks: dict = field(default_factory=dict)

    def rows(self):
        for i, lam in enumerate(self.lambdas):
            yield lam, {c: counts[i] for c, counts in self.link_counts.items()}


def n_tests_for(n_assets, include_self=True):
    """Number of hypotheses in an all-ordered-pairs scan: N**2, or N(N-1)."""
    return n_assets * n_assets if include_self else n_assets * (n_assets - 1)


def bonferroni_threshold(p, n_tests):
    if not 0 < p < 1:
        raise ValueError(f"nominal p must lie in (0, 1), got {p}")
    if n_tests < 1:
        raise ValueError("n_tests must be positive")
    return p / n_tests


def fdr_select(p_values, p, n_tests):
    """Indices accepted by the step-up FDR rule.

    With p-values sorted ascending, ``k`` is the largest rank such that
    ``p_(k) < k * p / n_tests``; the ``k`` smallest p-values are accepted.
    """
    pv = np.asarray(p_values, dtype=np.float64)
    if n_tests < pv.size:
        raise ValueError("n_tests must be at least the number of p-values")
    if pv.size == 0:
        return np.array([], dtype=np.intp)
    order = np.argsort(pv, kind="stable")
    ranks = np.arange(1, pv.size + 1)
    passing = np.flatnonzero(pv[order] < ranks * p / n_tests)
    if passing.size == 0:
        return np.array([], dtype=np.intp)
    return np.sort(order[:passing[-1] + 1])


def validate_links(scores, p=0.01, correction="bonferroni", n_tests=None, nodes=None):
    """Keep the ordered pairs whose p-value survives the correction.

    Self-pairs never become edges. ``n_tests`` defaults to N**2 for N
    nodes. All comparisons are strict, so the Bonferroni network is always
    contained in the FDR network built from the same scores.
    """
    if correction not in CORRECTIONS:
        raise ValueError(f"unknown correction {correction!r}")
    scores = sorted((s for s in scores if s.source != s.target), key=lambda s: (s.source, s.target))
    if nodes is None:
        nodes = sorted({s.source for s in scores} | {s.target for s in scores})
    nodes = list(nodes)
    if n_tests is None:
        n_tests = n_tests_for(len(nodes))
    lams = {s.lam for s in scores}
    lam = lams.pop() if len(lams) == 1 else None

    pv = np.array([s.p_value for s in scores], dtype=np.float64)
    if correction == "fdr":
        keep = fdr_select(pv, p, n_tests)
    else:
        threshold = p if correction == "none" else bonferroni_threshold(p, n_tests)
        keep = np.flatnonzero(pv < threshold)
    edges = [Edge(scores[i].source, scores[i].target, scores[i].statistic, scores[i].p_value) for i in keep]
    return DirectedNetwork(nodes, edges, correction, p, lam, n_tests)


def is_subnetwork(a, b):
    if set(a.nodes) != set(b.nodes):
        raise ValueError("networks are defined on different node sets")
    return a.edge_set() <= b.edge_set()


def score_pairs(pair, q=4, method="gamma", statistic="mi", n_shuffles=1000, seed=0, n_jobs=1):
    """Score every ordered (leader, follower) pair of a :class:`LaggedPair`.

    ``method="gamma"`` uses the analytic null for MI with N = T;
    ``method="shuffle"`` uses row-shuffled surrogates (MI or Pearson).
    """
    if method == "gamma":
        if statistic != "mi":
            raise ValueError("the Gamma null applies to MI only; use method='shuffle' for Pearson")
        a_sym = symbolize_matrix(pair.A, q)
        b_sym = symbolize_matrix(pair.B, q)
        mi, _ = mi_matrix(a_sym.values, b_sym.values, q)
        null = gamma_null(q, q, pair.T)
        return ScoreTable(list(pair.symbols), pair.lam, pair.T, mi, mi_pvalue(null, mi), "mi", "gamma", null)
    if method == "shuffle":
        counts = shuffle_surrogates(pair, statistic, n_shuffles, seed, q=q, n_jobs=n_jobs)
        return ScoreTable(list(pair.symbols), pair.lam, pair.T, counts.observed, counts.pvalues(),
                          statistic, "shuffle", counts)
    raise ValueError(f"unknown method {method!r}")


def pearson_table(pair):
    """Lagged correlations without p-values (all ones), for reporting only."""
    C = lagged_pearson(pair).C
    return ScoreTable(list(pair.symbols), pair.lam, pair.T, C, np.ones_like(C), "pearson", "none")


def derive_seed(seed, *keys):
    """Independent 63-bit seed for a sub-task keyed on ``keys``."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int(state[0]) << 31 ^ int(state[1])


def networks_for(table, p=0.01, corrections=("bonferroni", "fdr"), n_tests=None):
    """Validated networks per correction, checking Bonferroni within FDR."""
    pairs = table.pairs()
    nets = {c: validate_links(pairs, p, c, n_tests, nodes=table.symbols) for c in corrections}
    if "bonferroni" in nets and "fdr" in nets and not is_subnetwork(nets["bonferroni"], nets["fdr"]):
        raise InfolagError(f"Bonferroni network is not contained in the FDR network at lag {table.lam}")
    return nets


def lag_sweep(R, lambdas, q=4, p=0.01, corrections=("bonferroni", "fdr"), method="gamma",
              statistic="mi", n_shuffles=1000, seed=0, n_tests=None, n_jobs=1, keep_networks=False):
    """Validated-link counts as a function of the lag.

    For every lag: build the lagged pair, symbolize, score all ordered
    pairs, validate and count. Lags the data cannot support are skipped
    with a warning.
    """
    lambdas = [int(lam) for lam in lambdas]
    if not lambdas:
        raise ValueError("no lags given")
    if any(lam < 0 for lam in lambdas):
        raise ValueError("lags must be non-negative")
    done, counts, self_counts, networks = [], {c: [] for c in corrections}, [], {}
    for lam in lambdas:
        try:
            pair = build_lagged_pair(R, lam)
            table = score_pairs(pair, q, method, statistic, n_shuffles, derive_seed(seed, lam), n_jobs)
        except InsufficientDataError as exc:
            log.warning("skipping lag %d: %s", lam, exc)
            continue
        nets = networks_for(table, p, corrections, n_tests)
        done.append(lam)
        for c in corrections:
            counts[c].append(len(nets[c]))
        n_assets = len(table.symbols)
        cut = bonferroni_threshold(p, n_tests or n_tests_for(n_assets))
        self_counts.append(int(np.sum(np.diag(table.p_values) < cut)) if lam > 0 else 0)
        if keep_networks:
            networks[lam] = (table, nets)
    return LagSweepResult(done, counts, self_counts, networks)
