import pytest

from phylolevel import NetworkClass, canonical_form, count, validate
from phylolevel.oracle import ResourceError, generate_all, generate_tagged, verify_counts

from conftest import KNOWN_COUNTS


@pytest.mark.parametrize(
    "cls, n, expected",
    [("rooted1", 2, 3), ("unrooted2", 2, 6), ("rooted2", 2, 18), ("unrooted1", 3, 15)],
)
def test_small_lists(cls, n, expected):
    nets = generate_all(cls, n)
    assert len(nets) == expected == KNOWN_COUNTS[NetworkClass.parse(cls)][NetworkClass.parse(cls).leaves(n) - 1]
    assert len({canonical_form(x) for x in nets}) == expected


@pytest.mark.parametrize("cls", list(NetworkClass))
def test_lists_validate_at_level(cls):
    n = 3 if cls is not NetworkClass.ROOTED2 else 2
    for net in generate_all(cls, n):
        v = validate(net)
        assert v.ok and v.level <= cls.level
        assert len(net.leaves) == cls.leaves(n)


def test_labels():
    for net in generate_all("unrooted1", 3):
        assert sorted(net.taxa, key=int) == ["1", "2", "3", "4"]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_level2_lists_contain_level1(n):
    big = {canonical_form(x) for x in generate_all("rooted2", n)}
    small = {canonical_form(x) for x in generate_all("rooted1", n)}
    assert small <= big
    level1_in_big = sum(validate(x).level <= 1 for x in generate_all("rooted2", n))
    assert level1_in_big == len(small)


def test_cap():
    with pytest.raises(ResourceError):
        generate_all("rooted2", 4)


@pytest.mark.parametrize("cls, n_max", [("rooted1", 4), ("unrooted1", 4), ("rooted2", 3), ("unrooted2", 3)])
def test_verify_counts(cls, n_max):
    rep = verify_counts(cls, n_max)
    assert rep["ok"], rep
    assert [r["oracle"] for r in rep["rows"]] == [count(cls, n) for n in range(1, n_max + 1)]


def test_case_attribution():
    tags = {}
    for tag, _ in generate_tagged("rooted1", 2):
        tags[tag] = tags.get(tag, 0) + 1
    assert tags == {"0b": 1, "1a": 2}
