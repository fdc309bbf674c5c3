from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binomtest, chisquare

from phylolevel import NetworkClass, canonical_form, count, parameters, refined_counts, validate
from phylolevel.oracle import generate_all
from phylolevel.sampler import preprocess, sample, sample_many

CLASSES = list(NetworkClass)


def test_preprocess_rooted1_small():
    t = preprocess("rooted1", 2)
    assert t.by_tag(1) == {"0a": 1, "0b": 0, "1a": 0, "1b": 0}
    assert t.by_tag(2) == {"0a": 0, "0b": 1, "1a": 2, "1b": 0}


def test_preprocess_rooted2_total():
    assert preprocess("rooted2", 2).total(2) == 18


@pytest.mark.parametrize("cls", CLASSES)
def test_preprocess_matches_count(cls):
    t = preprocess(cls, 25)
    assert all(t.total(n) == count(cls, n) for n in range(1, 26))


def test_preprocess_rejects_zero():
    with pytest.raises(ValueError):
        preprocess("rooted1", 0)


def test_single_leaf():
    net = sample("rooted1", 1, 123)
    assert net.taxa == ["1"] and not net.edges


def test_deterministic():
    assert sample("rooted2", 8, 42) == sample("rooted2", 8, 42)
    assert sample_many("unrooted2", 6, 5, 1) == sample_many("unrooted2", 6, 5, 1)


def test_beyond_table():
    t = preprocess("rooted1", 5)
    with pytest.raises(ValueError):
        sample("rooted1", 6, 0, table=t)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CLASSES), st.integers(1, 14), st.integers(0, 2**64 - 1))
def test_samples_validate(cls, n, seed):
    net = sample(cls, n, seed)
    v = validate(net)
    assert v.ok and v.level <= cls.level
    assert len(net.leaves) == cls.leaves(n)
    assert sorted(net.taxa, key=int) == [str(i) for i in range(1, cls.leaves(n) + 1)]


def test_rooted1_two_leaves_each_third():
    N = 30000
    nets = generate_all("rooted1", 2)
    h = Counter(canonical_form(x) for x in sample_many("rooted1", 2, N, 0))
    for x in nets:
        assert binomtest(h[canonical_form(x)], N, 1 / 3).pvalue > 0.001


def test_unrooted2_three_leaves_uniform():
    N = 30000
    certs = sorted(canonical_form(x) for x in generate_all("unrooted2", 2))
    h = Counter(canonical_form(x) for x in sample_many("unrooted2", 2, N, 5))
    assert set(h) == set(certs)
    assert chisquare([h[c] for c in certs]).pvalue > 0.001


def test_mean_blob_count_n12():
    n, N = 12, 4000
    table = refined_counts("rooted2", n)
    mean = table.mean_k()
    second = Fraction(sum(k * k * c for (k, _), c in table.entries.items()), table.total)
    sd = float(second - mean**2) ** 0.5
    ks = [parameters(x).k for x in sample_many("rooted2", n, N, 3)]
    assert abs(sum(ks) / N - float(mean)) < 5 * sd / N**0.5
