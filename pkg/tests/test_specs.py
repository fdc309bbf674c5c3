from collections import defaultdict
from fractions import Fraction

import pytest
import sympy

from phylolevel import NetworkClass, validate
from phylolevel.classes import TERMS
from phylolevel.graph import ROOT_LABEL
from phylolevel.specs import (
    EMPTY,
    GENERATORS,
    ROOTED_2B,
    Planted,
    assemble,
    case_tags,
    derived_terms,
    finish,
    templates,
)

CLASSES = list(NetworkClass)


def _expr(terms):
    x, y, C = sympy.symbols("x y C")
    return sum(
        sympy.Rational(w.numerator, w.denominator) * x**a * y**b * C**p / (1 - y * C) ** q
        for (a, b, p, q), w in terms
    )


@pytest.mark.parametrize("cls", CLASSES)
def test_symmetry_weights_rebuild_term_lists(cls):
    # the same function, though sequence slots may split into different monomials
    derived = _expr(derived_terms(cls).items())
    printed = _expr(((a, b, p, q), w) for w, a, b, p, q in TERMS[cls])
    assert sympy.cancel(derived - printed) == 0


@pytest.mark.parametrize("cls", CLASSES)
def test_weights_positive(cls):
    assert all(t.weight > 0 for t in templates(cls))


def test_rooted1_tag_weights():
    acc = defaultdict(Fraction)
    for t in templates("rooted1"):
        acc[t.tag] += t.weight
    assert dict(acc) == {"0b": Fraction(1, 2), "1a": 1, "1b": Fraction(1, 2)}


def test_rooted2_2b_weights_by_used_arcs():
    # the two parallel arcs make the 2b generator the only one with a swap symmetry
    acc = defaultdict(Fraction)
    for t in templates("rooted2"):
        if t.generator is ROOTED_2B:
            acc[sum(s != EMPTY for s in t.pattern)] += t.weight
    assert [acc[k] for k in sorted(acc)] == [1, Fraction(7, 2), Fraction(9, 2), Fraction(5, 2), Fraction(1, 2)]


def test_case_tags():
    assert case_tags("rooted1") == ["0a", "0b", "1a", "1b"]
    assert case_tags("rooted2") == ["0a", "0b", "1a", "1b", "2a", "2b", "2c", "2d"]
    tags = case_tags("unrooted2")
    assert tags[:4] == ["0a", "0b", "1", "2-1"] and len(tags) == 16


@pytest.mark.parametrize("cls", CLASSES)
def test_every_template_builds_a_valid_network(cls):
    leaf_no = iter(range(1, 1000))

    def leaf():
        return Planted.leaf(str(next(leaf_no)), cls.rooted)

    for t in templates(cls):
        seqs = []
        for s in t.pattern:
            seqs.append({"0": 0, "1": 1, "+": 1, "S": 2}[s] * [None])
        seqs = [[leaf() for _ in q] for q in seqs]
        pend = [leaf() for _ in t.generator.pendants]
        net = finish(assemble(t.generator, seqs, pend), ROOT_LABEL)
        v = validate(net)
        assert v.ok and v.level == t.generator.level, (t.tag, t.pattern, v)


@pytest.mark.parametrize("cls", CLASSES)
def test_generators_match_class_level(cls):
    assert max(g.level for g in GENERATORS[cls]) == cls.level
