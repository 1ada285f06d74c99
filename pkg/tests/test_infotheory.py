import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infolag.exceptions import InsufficientDataError
from infolag.infotheory import (
    contingency,
    lz_entropy_rate,
    mi_from_counts,
    mi_matrix,
    mutual_information,
    plugin_entropy,
)
from infolag.symbolize import SymbolSeries


def mi_double_sum(counts):
    # direct sum over cells of p(a,b) log2(p(a,b) / (p(a) p(b)))
    c = np.asarray(counts, dtype=float)
    n = c.sum()
    pa = c.sum(axis=1) / n
    pb = c.sum(axis=0) / n
    total = 0.0
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            if c[i, j]:
                pij = c[i, j] / n
                total += pij * math.log2(pij / (pa[i] * pb[j]))
    return total


def test_entropy_examples():
    assert plugin_entropy([0, 1, 2, 3]) == 2.0
    assert plugin_entropy([0, 0, 0, 0]) == 0.0
    assert plugin_entropy([0, 0, 1, 1, 1, 1]) == pytest.approx(math.log2(3) - 2 / 3, abs=1e-15)
    assert plugin_entropy([0, 0, 1, 1, 1, 1]) == pytest.approx(0.918296, abs=1e-6)
    with pytest.raises(InsufficientDataError):
        plugin_entropy([])


def test_mi_examples():
    x = [0, 1, 2, 3, 0, 1, 2, 3]
    assert mutual_information(x, x) == pytest.approx(2.0, abs=1e-15)
    assert mutual_information([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0
    x, y = [0, 0, 0, 1, 1, 1], [0, 0, 1, 0, 1, 1]
    np.testing.assert_array_equal(contingency(x, y).counts, [[2, 1], [1, 2]])
    # frozen from the double-sum oracle: (2/3) log2(4/3) + (1/3) log2(2/3)
    assert mutual_information(x, y) == pytest.approx(0.0817041659455, abs=1e-12)
    assert mi_double_sum([[2, 1], [1, 2]]) == pytest.approx(0.0817041659455, abs=1e-12)
    with pytest.raises(ValueError, match="length"):
        mutual_information([0, 1], [0, 1, 1])


def test_contingency_examples(rng):
    np.testing.assert_array_equal(contingency([0, 1], [1, 0]).counts, [[0, 1], [1, 0]])
    t = contingency(SymbolSeries(np.array([0, 0], np.uint8), 4), SymbolSeries(np.array([0, 0], np.uint8), 4))
    assert t.counts.shape == (4, 4) and t.counts[0, 0] == 2 and t.n == 2
    x = rng.integers(0, 4, 1000)
    y = rng.integers(0, 4, 1000)
    c = contingency(x, y).counts
    np.testing.assert_array_equal(c.sum(axis=1), np.bincount(x, minlength=4))
    np.testing.assert_array_equal(c.sum(axis=0), np.bincount(y, minlength=4))


sym = st.lists(st.integers(0, 7), min_size=1, max_size=200)


@settings(max_examples=200)
@given(st.data())
def test_mi_exact_properties(data):
    xs = data.draw(sym)
    ys = data.draw(st.lists(st.integers(0, 7), min_size=len(xs), max_size=len(xs)))
    x, y = np.array(xs), np.array(ys)
    q = 8
    ixy = mutual_information(SymbolSeries(x.astype(np.uint8), q), SymbolSeries(y.astype(np.uint8), q))
    iyx = mutual_information(SymbolSeries(y.astype(np.uint8), q), SymbolSeries(x.astype(np.uint8), q))
    assert ixy >= 0
    assert ixy == pytest.approx(iyx, abs=1e-12)
    assert mutual_information(x, x) == pytest.approx(plugin_entropy(x), abs=1e-12)
    assert ixy == pytest.approx(mi_double_sum(contingency(x, y).counts), abs=1e-12)
    assert ixy == pytest.approx(float(mi_from_counts(contingency(x, y).counts)), abs=1e-12)
    h = plugin_entropy(x)
    assert 0 <= h <= math.log2(q) + 1e-12


def test_mi_matrix_matches_pairwise(rng):
    a = rng.integers(0, 4, (500, 6))
    b = rng.integers(0, 4, (500, 5))
    mi, counts = mi_matrix(a, b, 4)
    for m in range(6):
        for n in range(5):
            assert mi[m, n] == pytest.approx(mutual_information(a[:, m], b[:, n]), abs=1e-12)
            np.testing.assert_array_equal(counts[m, n], contingency(
                SymbolSeries(a[:, m].astype(np.uint8), 4), SymbolSeries(b[:, n].astype(np.uint8), 4)).counts)


def test_plugin_entropy_biased_downward():
    rng = np.random.default_rng(3)
    p = np.array([0.4, 0.3, 0.2, 0.1])
    true_h = float(-(p * np.log2(p)).sum())
    est = [plugin_entropy(rng.choice(4, size=30, p=p)) for _ in range(2000)]
    assert np.mean(est) - true_h <= 0


def test_lz_entropy_rate_examples():
    rng = np.random.default_rng(11)
    assert lz_entropy_rate(np.zeros(10_000, int)).value <= 0.02
    assert lz_entropy_rate(np.arange(10_000) % 2).value <= 0.05
    h = lz_entropy_rate(rng.integers(0, 4, 50_000)).value
    assert 1.80 <= h <= 2.05
    short = lz_entropy_rate([0, 1, 1, 0, 2])
    assert not short.reliable
    with pytest.raises(InsufficientDataError):
        lz_entropy_rate([1])


def test_lz_entropy_rate_relabeling_invariant(rng):
    s = rng.integers(0, 4, 3000)
    relabel = np.array([2, 0, 3, 1])
    assert lz_entropy_rate(s).value == lz_entropy_rate(relabel[s]).value
