"""Combinatorial specifications: generators, slot patterns and their weights.

A network of a class is planted at a top vertex.  Besides the single leaf, the
top vertex either is a tree vertex with two pendant sub-networks, or lies in a
blob described by a *generator*: a small multigraph whose edges may be
subdivided by sequences of pendant sub-networks ("edge slots") and whose
vertices may carry one pendant sub-network each ("pendant slots").

Symmetry is handled generically.  Automorphisms of each generator (fixing the
top vertex) are found by brute force.  A *pattern* records, per edge slot, how
many pendants it carries in coarse terms: ``0``, ``+`` (at least one) or, when
the slot can be reversed by an automorphism or finer case tags are needed,
``1`` (exactly one) and ``S`` (at least two).  Each orbit of valid patterns
contributes ``|Stab_x| / |Stab(P)|`` times its product of slot factors, where
``Stab_x`` is the stabiliser of any instantiation of ``P``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from .classes import NetworkClass, _as_class
from .graph import ROOT_LABEL, ROOTED, UNROOTED, Network

EMPTY, ONE, PLUS, MANY = "0", "1", "+", "S"
MIN_PENDANTS = {EMPTY: 0, ONE: 1, PLUS: 1, MANY: 2}


@dataclass(frozen=True)
class Automorphism:
    vertex_map: tuple[tuple[int, int], ...]
    edge_map: tuple[int, ...]
    reversed: tuple[bool, ...]
    pendant_map: tuple[int, ...]


@dataclass(frozen=True)
class Generator:
    name: str
    directed: bool
    level: int
    top: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    pendants: tuple[int, ...]
    fine: bool = False  # use the {0, 1, S} alphabet on every edge slot

    @cached_property
    def automorphisms(self) -> tuple[Automorphism, ...]:
        out = []
        others = [v for v in self.vertices if v != self.top]
        for perm in itertools.permutations(others):
            vm = dict(zip(others, perm))
            vm[self.top] = self.top
            edge_opts = []
            for (u, v) in self.edges:
                opts = []
                for j, (a, b) in enumerate(self.edges):
                    if self.directed:
                        if (a, b) == (vm[u], vm[v]):
                            opts.append((j, False))
                    elif {a, b} == {vm[u], vm[v]}:
                        if a == b:
                            opts.extend([(j, False), (j, True)])
                        else:
                            opts.append((j, a != vm[u]))
                edge_opts.append(opts)
            pend_opts = [[j for j, q in enumerate(self.pendants) if q == vm[p]] for p in self.pendants]
            for ech in itertools.product(*edge_opts):
                emap = tuple(j for j, _ in ech)
                if len(set(emap)) != len(emap):
                    continue
                for pch in itertools.product(*pend_opts):
                    if len(set(pch)) != len(pch):
                        continue
                    out.append(Automorphism(tuple(sorted(vm.items())), emap, tuple(r for _, r in ech), tuple(pch)))
        return tuple(out)

    @cached_property
    def alphabets(self) -> tuple[tuple[str, ...], ...]:
        rev = [any(g.reversed[i] for g in self.automorphisms) for i in range(len(self.edges))]
        return tuple((EMPTY, ONE, MANY) if (self.fine or r) else (EMPTY, PLUS) for r in rev)

    def act(self, g: Automorphism, pattern: Sequence[str]) -> tuple[str, ...]:
        out = [EMPTY] * len(pattern)
        for i, s in enumerate(pattern):
            out[g.edge_map[i]] = s
        return tuple(out)

    def valid(self, pattern: Sequence[str]) -> bool:
        """Whether every instantiation of ``pattern`` is a legal blob."""
        if self.level == 0:
            return True
        seen: dict[frozenset, list[str]] = defaultdict(list)
        for (u, v), s in zip(self.edges, pattern):
            if u == v and s != MANY:
                return False  # a loop needs two pendants to avoid a double edge
            key = (u, v) if self.directed else frozenset((u, v))
            seen[key].append(s)
        if any(group.count(EMPTY) > 1 for group in seen.values()):
            return False
        pendants = len(self.pendants) + sum(MIN_PENDANTS[s] for s in pattern)
        # rooted blobs need two outgoing cut arcs, unrooted ones three cut edges
        return pendants >= 2 if self.directed else pendants + 1 >= 3

    def instantiation_stabiliser(self, pattern: Sequence[str]) -> int:
        n = 0
        for g in self.automorphisms:
            if any(g.pendant_map[i] != i for i in range(len(self.pendants))):
                continue
            ok = True
            for i, s in enumerate(pattern):
                if s == EMPTY:
                    continue
                if g.edge_map[i] != i or (g.reversed[i] and s != ONE):
                    ok = False
                    break
            n += ok
        return n

    def pattern_stabiliser(self, pattern: Sequence[str]) -> int:
        p = tuple(pattern)
        return sum(1 for g in self.automorphisms if self.act(g, p) == p)


@dataclass(frozen=True)
class Template:
    """One orbit of slot patterns of a generator with its exact weight."""

    tag: str
    generator: Generator
    pattern: tuple[str, ...]
    weight: Fraction

    @property
    def monomial(self) -> tuple[int, int, int, int]:
        """``(a, b, p, q)`` for ``x^a y^b C^p / (1 - yC)^q``."""
        g = self.generator
        extra = sum(MIN_PENDANTS[s] for s in self.pattern)
        a = 1 if g.level else 0
        b = len(g.edges) + extra if g.level else 0
        p = len(g.pendants) + extra
        q = sum(1 for s in self.pattern if s in (PLUS, MANY))
        return a, b, p, q

    @property
    def term(self) -> tuple[Fraction, int, int, int, int]:
        return (self.weight,) + self.monomial


def _tag(cls: NetworkClass, gen: Generator, pattern: Sequence[str]) -> str:
    if gen.level == 0:
        return "0b"
    if cls.rooted:
        if gen.level == 1:
            return "1a" if EMPTY in pattern else "1b"
        return gen.name
    if gen.level == 1:
        return "1"
    used = [s for s in pattern if s != EMPTY]
    if len(used) == 1:
        return "2-1"
    return f"2-{len(used)}{'ABCDE'[used.count(MANY)]}"


def case_tag(cls, gen: Generator, lengths: Sequence[int]) -> str:
    """Case tag of a raw instantiation given its edge-slot sequence lengths."""
    cls = _as_class(cls)
    pattern = []
    for alpha, k in zip(gen.alphabets, lengths):
        if k == 0:
            pattern.append(EMPTY)
        elif PLUS in alpha:
            pattern.append(PLUS)
        else:
            pattern.append(ONE if k == 1 else MANY)
    return _tag(cls, gen, pattern)


# ---------------------------------------------------------------------------
# the generators
# ---------------------------------------------------------------------------

TREE_ROOTED = Generator("0b", True, 0, 0, (0,), (), (0, 0))
TREE_UNROOTED = Generator("0b", False, 0, 0, (0,), (), (0, 0))
CYCLE_ROOTED = Generator("1", True, 1, 0, (0, 1), ((0, 1), (0, 1)), (1,))
CYCLE_UNROOTED = Generator("1", False, 1, 0, (0,), ((0, 0),), ())
ROOTED_2A = Generator("2a", True, 2, 1, (1, 2, 3, 4), ((1, 2), (1, 3), (2, 3), (2, 4), (3, 4)), (4,))
ROOTED_2B = Generator("2b", True, 2, 1, (1, 2, 3, 4), ((1, 2), (1, 4), (3, 4), (2, 3), (2, 3)), (4,))
ROOTED_2C = Generator("2c", True, 2, 1, (1, 2, 3, 4, 5), ((1, 2), (1, 3), (2, 4), (2, 5), (4, 3), (4, 5)), (3, 5))
ROOTED_2D = Generator("2d", True, 2, 1, (1, 2, 3, 4, 5), ((1, 2), (1, 3), (2, 4), (3, 4), (2, 5), (3, 5)), (4, 5))
# v is the top; a and b are joined by two parallel edges
THETA = Generator("2", False, 2, 0, (0, 1, 2), ((0, 1), (0, 2), (1, 2), (1, 2)), (), fine=True)

GENERATORS: dict[NetworkClass, tuple[Generator, ...]] = {
    NetworkClass.ROOTED1: (TREE_ROOTED, CYCLE_ROOTED),
    NetworkClass.ROOTED2: (TREE_ROOTED, CYCLE_ROOTED, ROOTED_2A, ROOTED_2B, ROOTED_2C, ROOTED_2D),
    NetworkClass.UNROOTED1: (TREE_UNROOTED, CYCLE_UNROOTED),
    NetworkClass.UNROOTED2: (TREE_UNROOTED, CYCLE_UNROOTED, THETA),
}


@lru_cache(maxsize=None)
def templates(cls) -> tuple[Template, ...]:
    """All pattern orbits of every generator of the class, with weights."""
    cls = _as_class(cls)
    out = []
    for gen in GENERATORS[cls]:
        seen = set()
        for pattern in itertools.product(*gen.alphabets):
            if pattern in seen or not gen.valid(pattern):
                continue
            orbit = {gen.act(g, pattern) for g in gen.automorphisms}
            seen |= orbit
            rep = min(orbit)
            w = Fraction(gen.instantiation_stabiliser(rep), gen.pattern_stabiliser(rep))
            out.append(Template(_tag(cls, gen, rep), gen, rep, w))
    return tuple(out)


def derived_terms(cls) -> dict[tuple[int, int, int, int], Fraction]:
    """Collated ``(a, b, p, q) -> weight`` map of the derived functional equation."""
    acc: dict[tuple[int, int, int, int], Fraction] = defaultdict(Fraction)
    for t in templates(cls):
        acc[t.monomial] += t.weight
    return dict(acc)


def case_tags(cls) -> list[str]:
    cls = _as_class(cls)
    tags = ["0a"]
    for t in templates(cls):
        if t.tag not in tags:
            tags.append(t.tag)
    return tags


# ---------------------------------------------------------------------------
# building networks from generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Planted:
    """A network hanging from its top vertex (the root, or the neighbour of ``#``)."""

    directed: bool
    size: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[tuple[int, str], ...]
    top: int

    @classmethod
    def leaf(cls, label: str, directed: bool) -> Planted:
        return cls(directed, 1, (), ((0, label),), 0)

    def relabel(self, mapping) -> Planted:
        return Planted(self.directed, self.size, self.edges, tuple((v, mapping[l]) for v, l in self.labels), self.top)

    @property
    def taxa(self) -> list[str]:
        return [l for _, l in self.labels]


def assemble(gen: Generator, edge_contents: Sequence[Sequence[Planted]], pendant_contents: Sequence[Planted]) -> Planted:
    """Glue sub-networks into a generator: subdivide edges, hang pendants."""
    vmap = {v: i for i, v in enumerate(gen.vertices)}
    nxt = len(gen.vertices)
    edges: list[tuple[int, int]] = []
    labels: list[tuple[int, str]] = []

    def attach(sub: Planted) -> int:
        nonlocal nxt
        off = nxt
        nxt += sub.size
        edges.extend((a + off, b + off) for a, b in sub.edges)
        labels.extend((v + off, l) for v, l in sub.labels)
        return sub.top + off

    for (u, v), seq in zip(gen.edges, edge_contents):
        prev = vmap[u]
        for sub in seq:
            w = nxt
            nxt += 1
            edges.append((prev, w))
            edges.append((w, attach(sub)))
            prev = w
        edges.append((prev, vmap[v]))
    for p, sub in zip(gen.pendants, pendant_contents):
        edges.append((vmap[p], attach(sub)))
    return Planted(gen.directed, nxt, tuple(edges), tuple(labels), vmap[gen.top])


def finish(planted: Planted, extra_label: str = ROOT_LABEL) -> Network:
    """Rooted: the network itself.  Unrooted: attach the leaf ``extra_label`` at the top."""
    if planted.directed:
        return Network.make(ROOTED, planted.edges, dict(planted.labels), range(planted.size))
    labels = dict(planted.labels)
    labels[planted.size] = extra_label
    return Network.make(UNROOTED, planted.edges + ((planted.top, planted.size),), labels, range(planted.size + 1))


__all__ = [
    "EMPTY",
    "ONE",
    "PLUS",
    "MANY",
    "Automorphism",
    "Generator",
    "Template",
    "GENERATORS",
    "templates",
    "derived_terms",
    "case_tag",
    "case_tags",
    "Planted",
    "assemble",
    "finish",
]
