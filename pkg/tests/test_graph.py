import itertools
import json
import random

import networkx as nx
import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phylolevel import (
    Network,
    NetworkError,
    blob_decomposition,
    canonical_form,
    isomorphic,
    parameters,
    root_at,
    rootings,
    sample,
    to_dot,
    unroot,
    validate,
)
from phylolevel.graph import (
    ROOTED,
    UNROOTED,
    _orientation_frame,
    _sink_candidates,
    _sourced_orientations,
    bridges,
    from_dot,
    sink_candidates,
)
from phylolevel.oracle import generate_all, generate_pointed

from conftest import cherry


def to_nx(net):
    g = (nx.MultiDiGraph if net.rooted else nx.MultiGraph)()
    for v in net.vertices:
        g.add_node(v, label=net.label_of.get(v, ""))
    g.add_edges_from(net.edges)
    return g


def nx_isomorphic(a, b):
    return a.kind == b.kind and nx.is_isomorphic(
        to_nx(a), to_nx(b), node_match=lambda x, y: x["label"] == y["label"]
    )


def permuted(net, seed):
    rng = random.Random(seed)
    ids = list(net.vertices)
    new = ids[:]
    rng.shuffle(new)
    m = dict(zip(ids, [v + 1000 for v in new]))
    return Network.make(net.kind, [(m[a], m[b]) for a, b in net.edges], {m[v]: l for v, l in net.labels})


# ---------------------------------------------------------------------------
# validation and parameters


def test_single_leaf():
    net = Network.make(ROOTED, [], {0: "a"})
    v = validate(net)
    assert v.ok and v.level == 0


def test_example_level(example_rooted):
    v = validate(example_rooted)
    assert v.ok and v.level == 2


def test_blob_with_one_outgoing_cut_arc():
    # r, a, b, c form one blob whose only exit is c -> w
    edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6)]
    v = validate(Network.make(ROOTED, edges, {5: "1", 6: "2"}))
    assert not v.ok


def test_degree_violation():
    v = validate(Network.make(ROOTED, [(0, 1), (0, 2), (0, 3)], {1: "1", 2: "2", 3: "3"}))
    assert not v.ok


def test_unrooted_small_blob_violation():
    # a 4-cycle with only two pendant leaves leaves degree-2 vertices
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (2, 5)]
    assert not validate(Network.make(UNROOTED, edges, {4: "1", 5: "2"})).ok


def test_parameters_tree():
    assert tuple(parameters(cherry())) == (0, 0)


def test_parameters_triangle():
    # root -> a, root -> b, a -> b; leaves under a and b
    net = Network.make(ROOTED, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4)], {3: "1", 4: "2"})
    assert tuple(parameters(net)) == (1, 3)


def test_parameters_example_network(example_rooted):
    # triangle root/a/b has 3 arcs; the blob e..j has 7 arcs on 6 vertices
    assert tuple(parameters(example_rooted)) == (2, 10)


def test_parameters_rejects_invalid():
    with pytest.raises(NetworkError):
        parameters(Network.make(ROOTED, [(0, 1), (0, 2), (0, 3)], {1: "1", 2: "2", 3: "3"}))


@pytest.mark.parametrize("cls, n", [("rooted1", 4), ("unrooted1", 4), ("rooted2", 3), ("unrooted2", 3)])
def test_bridges_match_networkx(cls, n):
    for net in generate_all(cls, n)[:400]:
        g = nx.Graph()
        g.add_edges_from(net.edges)
        want = {frozenset(e) for e in nx.bridges(g)}
        got = {frozenset(net.edges[i]) for i in bridges(net)}
        assert got == want


def _min_removals_to_forest(edges):
    for r in range(len(edges) + 1):
        for drop in itertools.combinations(range(len(edges)), r):
            g = nx.MultiGraph()
            g.add_edges_from(e for i, e in enumerate(edges) if i not in drop)
            if nx.is_forest(g):
                return r
    raise AssertionError


@pytest.mark.parametrize("cls, n", [("unrooted2", 3), ("unrooted1", 4)])
def test_blob_level_is_cycle_rank(cls, n):
    for net in generate_all(cls, n):
        dec = blob_decomposition(net)
        for b, blob in enumerate(dec.blobs):
            edges = [net.edges[i] for i in dec.blob_edges[b]]
            if len(blob) > 1 and len(edges) <= 8:
                rank = len(edges) - len(blob) + 1
                assert dec.levels[b] == rank == _min_removals_to_forest(edges)


# ---------------------------------------------------------------------------
# unrooting and rooting


def test_unroot_cherry():
    star = unroot(cherry())
    assert star.kind == UNROOTED and sorted(star.taxa) == ["#", "1", "2"]
    assert len(star.vertices) == 4 and validate(star).level == 0


def test_unroot_example_network(example_rooted, example_unrooted):
    got = unroot(example_rooted)
    assert isomorphic(got, example_unrooted) and nx_isomorphic(got, example_unrooted)
    assert validate(got).level == 2


def test_unroot_level1_two_leaves():
    rooted = generate_all("rooted1", 2)
    assert len(rooted) == 3
    images = {canonical_form(unroot(x)) for x in rooted}
    assert images == {canonical_form(x) for x in generate_pointed("unrooted1", 2)}
    assert len(images) == 2


@pytest.mark.parametrize("cls", ["rooted1", "rooted2"])
def test_unroot_preserves_level(cls):
    for x in generate_all(cls, 3):
        y = unroot(x)
        assert validate(y).ok and validate(y).level == validate(x).level
        assert len(y.vertices) == len(x.vertices) + 1 and len(y.leaves) == len(x.leaves) + 1


def test_root_star():
    assert isomorphic(root_at(unroot(cherry()), "#"), cherry())


def _own_sinks(x):
    """Each blob's bottom vertex (no arcs leaving it inside the blob)."""
    dec = blob_decomposition(x)
    out = {}
    for b, blob in enumerate(dec.blobs):
        if len(blob) > 1:
            inner = {x.edges[i] for i in dec.blob_edges[b]}
            (t,) = [v for v in blob if not any(a == v for a, _ in inner)]
            out.update({v: t for v in blob})
    return out


@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_trip_level1_with_own_sinks(n):
    for x in generate_all("rooted1", n):
        assert isomorphic(root_at(unroot(x), "#", _own_sinks(x)), x)


@pytest.mark.parametrize("cls, n", [("rooted1", 3), ("rooted2", 2), ("rooted2", 3)])
def test_round_trip_among_rootings(cls, n):
    for x in generate_all(cls, n):
        certs = {canonical_form(r) for r in rootings(unroot(x))}
        assert canonical_form(x) in certs


@pytest.mark.parametrize("cls, n", [("unrooted1", 4), ("unrooted2", 3)])
def test_unroot_inverts_root_at(cls, n):
    for y in generate_pointed(cls, n):
        r = root_at(y)
        assert validate(r).ok and isomorphic(unroot(r), y)


def test_two_bottom_reticulations_not_reached_by_root_at():
    # both reticulations of this blob sit at the bottom; a single-sink
    # orientation cannot give it back, but the full preimage contains it
    x = Network.make(
        ROOTED, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5), (4, 6)], {5: "1", 6: "2"}
    )
    y = unroot(x)
    (cands,) = sink_candidates(y).values()
    reached = {canonical_form(root_at(y, "#", lambda blob, c, t=t: t)) for t in cands}
    assert canonical_form(x) not in reached
    assert canonical_form(x) in {canonical_form(r) for r in rootings(y)}


def test_rootings_are_valid():
    for y in generate_pointed("unrooted2", 3):
        for r in rootings(y):
            v = validate(r)
            assert v.ok and v.level <= 2
            assert isomorphic(unroot(r), y)


def test_sink_choices_give_distinct_networks():
    # a 4-cycle 0-1-2-3 carrying the leaves #, 1, 2, 3
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 5), (2, 6), (3, 7)]
    net = Network.make(UNROOTED, edges, {4: "#", 5: "1", 6: "2", 7: "3"})
    (cands,) = sink_candidates(net).values()
    assert len(cands) >= 2
    outs = [root_at(net, "#", {v: t for v in range(4)}) for t in cands]
    assert len({canonical_form(o) for o in outs}) == len(cands)
    assert all(validate(o).ok for o in outs)


def test_invalid_sink_rejected():
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 5), (2, 6), (3, 7)]
    net = Network.make(UNROOTED, edges, {4: "#", 5: "1", 6: "2", 7: "3"})
    with pytest.raises(NetworkError):
        root_at(net, "#", {v: 0 for v in range(4)})


def test_root_default_sinks_valid(example_unrooted):
    r = root_at(example_unrooted)
    assert validate(r).ok and validate(r).level == 2


# ---------------------------------------------------------------------------
# canonical form


def test_canonical_cherry_orders():
    a = Network.make(ROOTED, [(0, 1), (0, 2)], {1: "1", 2: "2"})
    b = Network.make(ROOTED, [(9, 4), (9, 3)], {3: "2", 4: "1"})
    assert canonical_form(a) == canonical_form(b)


def test_canonical_unrooted_three_leaves_distinct():
    nets = generate_all("unrooted1", 2)
    assert len({canonical_form(x) for x in nets}) == 2


def test_canonical_relabel_changes():
    net = generate_all("rooted1", 3)[5]
    swapped = net.relabel_taxa({"1": "2", "2": "1"})
    assert (canonical_form(swapped) == canonical_form(net)) == nx_isomorphic(swapped, net)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["rooted1", "rooted2", "unrooted1", "unrooted2"]), st.integers(0, 10**6), st.integers(0, 10**6))
def test_canonical_agrees_with_networkx(cls, s1, s2):
    n = 3 if cls != "unrooted1" else 4
    a, b = sample(cls, n, s1), sample(cls, n, s2)
    assert (canonical_form(a) == canonical_form(b)) == nx_isomorphic(a, b)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["rooted1", "rooted2", "unrooted2"]), st.integers(0, 10**6))
def test_canonical_ignores_vertex_ids(cls, seed):
    net = sample(cls, 5, seed)
    assert canonical_form(permuted(net, seed)) == canonical_form(net)


# ---------------------------------------------------------------------------
# DOT and JSON


def test_dot_single_leaf():
    text = to_dot(Network.make(ROOTED, [], {0: "a"}))
    assert '"a"' in text and "->" not in text


def test_dot_cherry():
    text = to_dot(cherry())
    assert text.startswith("digraph") and len(text.strip().splitlines()) == 4
    assert text.count("->") == 2


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["rooted1", "rooted2", "unrooted1", "unrooted2"]), st.integers(0, 10**6))
def test_dot_parses_and_round_trips(cls, seed):
    net = sample(cls, 5, seed)
    text = to_dot(net)
    assert to_dot(net) == text
    (g,) = pydot.graph_from_dot_data(text)
    assert len(g.get_edges()) == len(net.edges)
    assert isomorphic(from_dot(text), net)


def test_json_round_trip():
    net = sample("rooted2", 4, 11)
    data = json.loads(json.dumps(net.to_json()))
    assert set(data) == {"kind", "vertices", "edges", "labels"}
    assert Network.from_json(data) == net


def _bipolar(net, s, t):
    """Rooted networks from every blob orientation with source s and sink t."""
    lv, dec, index, arcs, entry = _orientation_frame(net, "#")
    (b,) = [b for b, blob in enumerate(dec.blobs) if len(blob) > 1]
    edges = [net.edges[i] for i in dec.blob_edges[b]]
    out = []
    for o in _sourced_orientations(edges, s):
        if {v for v in dec.blobs[b] if not any(a == v for a, _ in o)} == {t}:
            out.append(Network.make(
                ROOTED, [(a, c) for a, c in arcs + o if a != lv],
                {v: l for v, l in net.labels if v != lv}, [v for v in net.vertices if v != lv],
            ))
    return out


def test_level1_source_and_sink_fix_orientation():
    for y in generate_pointed("unrooted1", 3):
        lv, dec, index, _, entry = _orientation_frame(y, "#")
        for b, blob in enumerate(dec.blobs):
            if len(blob) > 1:
                for t in _sink_candidates(y, dec, index, b, entry[b]):
                    edges = [y.edges[i] for i in dec.blob_edges[b]]
                    n = sum(
                        1 for o in _sourced_orientations(edges, entry[b])
                        if {v for v in blob if not any(a == v for a, _ in o)} == {t}
                    )
                    assert n == 1


def test_level2_st_numbering_matters():
    edges = [(0, 1), (0, 3), (0, 9), (1, 2), (1, 5), (2, 3), (2, 5), (3, 4), (5, 6), (6, 7), (6, 8)]
    y = Network.make(UNROOTED, edges, {4: "1", 7: "2", 8: "3", 9: "#"})
    nets = _bipolar(y, 0, 5)
    assert len(nets) == 2 and all(validate(x).ok for x in nets)
    assert not isomorphic(*nets)
    assert all(isomorphic(unroot(x), y) for x in nets)
    assert canonical_form(root_at(y, "#", {v: 5 for v in (0, 1, 2, 3, 5)})) in {canonical_form(x) for x in nets}
