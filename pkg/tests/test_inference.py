import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infolag.exceptions import InfolagError
from infolag.inference import (
    DirectedNetwork,
    PairScore,
    bonferroni_threshold,
    fdr_select,
    is_subnetwork,
    lag_sweep,
    n_tests_for,
    networks_for,
    score_pairs,
    validate_links,
)
from infolag.marketdata import ReturnMatrix, build_lagged_pair, log_returns
from infolag.synth import SynthSpec, gen_coupled, gen_iid


def test_bonferroni_examples():
    assert bonferroni_threshold(0.01, n_tests_for(100)) == pytest.approx(1e-6, rel=1e-15)
    assert bonferroni_threshold(0.01, 1) == 0.01
    assert bonferroni_threshold(0.05, n_tests_for(10)) == pytest.approx(5e-4)
    assert n_tests_for(10, include_self=False) == 90
    with pytest.raises(ValueError):
        bonferroni_threshold(0.01, 0)


def test_fdr_examples():
    assert fdr_select([1e-9], 0.01, 10_000).tolist() == [0]
    assert fdr_select([0.5, 0.6], 0.01, 4).tolist() == []
    assert fdr_select([1e-7, 2e-6, 0.9], 0.01, 10_000).tolist() == [0]
    assert fdr_select([2e-6, 0.9, 1e-7], 0.01, 10_000).tolist() == [2]
    assert fdr_select([], 0.01, 4).tolist() == []


def fdr_oracle(pv, p, n_tests):
    pv = list(pv)
    order = sorted(range(len(pv)), key=lambda i: (pv[i], i))
    k = 0
    for rank, i in enumerate(order, 1):
        if pv[i] < rank * p / n_tests:
            k = rank
    return sorted(order[:k])


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=0, max_size=50), st.sampled_from([0.01, 0.05, 0.2]))
def test_fdr_matches_oracle(pv, p):
    n_tests = max(len(pv), 1) + 3
    assert fdr_select(pv, p, n_tests).tolist() == fdr_oracle(pv, p, n_tests)


def _scores(pmat, lam=1):
    syms = [f"S{i}" for i in range(pmat.shape[0])]
    return [PairScore(a, b, lam, 0.0, float(pmat[i, j]))
            for i, a in enumerate(syms) for j, b in enumerate(syms)], syms


def test_validate_links_examples():
    scores, syms = _scores(np.ones((4, 4)))
    for c in ("bonferroni", "fdr"):
        assert len(validate_links(scores, 0.01, c)) == 0
    pm = np.ones((4, 4))
    pm[1, 2] = 0.0
    scores, syms = _scores(pm)
    for c in ("bonferroni", "fdr"):
        net = validate_links(scores, 0.01, c)
        assert net.edge_set() == {("S1", "S2")}
        assert net.nodes == syms and net.n_tests == 16 and net.lam == 1
    with pytest.raises(ValueError):
        validate_links(scores, 0.01, "holm")


def test_self_pairs_never_edges():
    scores, _ = _scores(np.zeros((3, 3)))
    net = validate_links(scores, 0.01, "bonferroni")
    assert all(e.source != e.target for e in net.edges)
    assert len(net) == 6


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1e-3), min_size=25, max_size=25), st.randoms(use_true_random=False))
def test_network_properties(pv, rnd):
    scores, syms = _scores(np.array(pv).reshape(5, 5))
    bon = validate_links(scores, 0.01, "bonferroni")
    fdr = validate_links(scores, 0.01, "fdr")
    assert is_subnetwork(bon, fdr)
    shuffled = list(scores)
    rnd.shuffle(shuffled)
    assert validate_links(shuffled, 0.01, "fdr") == fdr
    for c in ("bonferroni", "fdr"):
        assert validate_links(scores, 0.001, c).edge_set() <= validate_links(scores, 0.01, c).edge_set()
        threshold = bonferroni_threshold(0.01, 25)
        if c == "bonferroni":
            assert all(e.p_value < threshold for e in bon.edges)


def test_is_subnetwork():
    full = DirectedNetwork(["A", "B"], [], "fdr", 0.01)
    scores, _ = _scores(np.zeros((2, 2)))
    net = validate_links(scores, 0.01, "fdr", nodes=["S0", "S1"])
    empty = DirectedNetwork(["S0", "S1"], [], "bonferroni", 0.01)
    assert is_subnetwork(empty, net)
    assert is_subnetwork(net, net)
    with pytest.raises(ValueError):
        is_subnetwork(full, net)


def test_score_pairs_gamma_iid():
    R = log_returns(gen_iid(SynthSpec(8, 2000, seed=3)))
    table = score_pairs(build_lagged_pair(R, 1))
    assert table.statistic.shape == (8, 8) and table.T == 1999
    assert table.null.N == 1999 and table.null.alpha == 4.5
    nets = networks_for(table)
    assert len(nets["bonferroni"]) == 0
    with pytest.raises(ValueError):
        score_pairs(build_lagged_pair(R, 1), method="gamma", statistic="pearson")


def test_planted_lag3_direction():
    spec = SynthSpec(6, 3000, seed=8, couplings=[{"source": 1, "target": 4, "lag": 3, "strength": 0.8}])
    prices, _ = gen_coupled(spec)
    R = log_returns(prices)
    res = lag_sweep(R, range(6), keep_networks=True)
    assert res.link_counts["bonferroni"][3] >= 1
    edges = res.networks[3][1]["bonferroni"].edge_set()
    assert ("S01", "S04") in edges and ("S04", "S01") not in edges
    assert [c for lam, c in enumerate(res.link_counts["bonferroni"]) if lam != 3] == [0] * 5


def test_lag_sweep_skips_infeasible_lags(caplog):
    R = ReturnMatrix.from_array(np.random.default_rng(0).standard_normal((40, 3)),
                                day_index=np.repeat([0, 1], 20))
    with caplog.at_level("WARNING"):
        res = lag_sweep(R, [0, 1, 25])
    assert res.lambdas == [0, 1]
    assert "25" in caplog.text
    with pytest.raises(ValueError):
        lag_sweep(R, [])


def test_lag_sweep_shuffle_is_deterministic():
    R = log_returns(gen_iid(SynthSpec(4, 400, seed=1)))
    a = lag_sweep(R, [1, 2], method="shuffle", statistic="pearson", n_shuffles=200, seed=4, keep_networks=True)
    b = lag_sweep(R, [1, 2], method="shuffle", statistic="pearson", n_shuffles=200, seed=4, keep_networks=True)
    for lam in (1, 2):
        np.testing.assert_array_equal(a.networks[lam][0].p_values, b.networks[lam][0].p_values)


def test_networks_for_detects_violation(monkeypatch):
    scores, _ = _scores(np.zeros((2, 2)))
    import infolag.inference as inf

    monkeypatch.setattr(inf, "is_subnetwork", lambda a, b: False)
    R = ReturnMatrix.from_array(np.random.default_rng(0).standard_normal((50, 2)))
    with pytest.raises(InfolagError):
        networks_for(score_pairs(build_lagged_pair(R, 1)))
