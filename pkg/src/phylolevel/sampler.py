"""Exact uniform random generation by the recursive method.

Every choice (template, sizes of the parts, sequence lengths) is drawn with
probability proportional to an exact integer count using
``random.Random.randrange``; no floating point enters the sampling path.
Within a template all raw instantiations are equally likely, and each network
has the same number of raw instantiations, so the output is uniform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, lcm

from .classes import NetworkClass, _as_class
from .graph import ROOT_LABEL, Network
from .specs import EMPTY, MANY, ONE, PLUS, Planted, Template, assemble, finish, templates

# factor kinds: one sub-network, or a sequence of at least ``a`` of them
_ONE = ("one", 1)


def _convolve(f: list[int], g: list[int], N: int) -> list[int]:
    out = [0] * (N + 1)
    for n in range(N + 1):
        s = 0
        for k in range(n + 1):
            if f[k] and g[n - k]:
                s += comb(n, k) * f[k] * g[n - k]
        out[n] = s
    return out


@dataclass
class WeightTable:
    cls: NetworkClass
    max_n: int
    weights: dict[tuple[str, int], int]
    counts: list[int] = field(repr=False)
    powers: list[list[int]] = field(repr=False)
    templates: tuple[Template, ...] = field(repr=False)
    scaled: list[int] = field(repr=False)
    denominator: int = field(repr=False)
    factors: list[list[tuple[str, int]]] = field(repr=False)
    suffix: list[list[list[int]]] = field(repr=False)

    def total(self, n: int) -> int:
        return sum(c for (_, m), c in self.weights.items() if m == n)

    def by_tag(self, n: int) -> dict[str, int]:
        return {tag: c for (tag, m), c in self.weights.items() if m == n}

    def seq(self, a: int, m: int) -> int:
        """Labelled sequences of at least ``a`` sub-networks with ``m`` labels in total."""
        return sum(self.powers[l][m] for l in range(a, m + 1))


def _factors(t: Template) -> list[tuple[str, int]]:
    out = [_ONE] * len(t.generator.pendants)
    for s in t.pattern:
        if s == ONE:
            out.append(_ONE)
        elif s == PLUS:
            out.append(("seq", 1))
        elif s == MANY:
            out.append(("seq", 2))
    return out


def preprocess(cls, max_n: int) -> WeightTable:
    """Exact per-case counts ``(case_tag, n) -> count`` for ``n <= max_n``."""
    return _preprocess(_as_class(cls), max_n)


@lru_cache(maxsize=None)
def _preprocess(cls: NetworkClass, max_n: int) -> WeightTable:
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    N = max_n
    ts = templates(cls)
    D = lcm(*(t.weight.denominator for t in ts))
    scaled = [int(t.weight * D) for t in ts]
    facs = [_factors(t) for t in ts]
    C = [0] * (N + 1)
    C[1] = 1
    # powers[l][m]: ordered l-tuples of sub-networks on m labels
    powers = [[1] + [0] * N] + [[0] * (N + 1) for _ in range(N)]
    weights: dict[tuple[str, int], Fraction] = {("0a", 1): Fraction(1)}

    def factor_array(kind, a, n):
        # a single sub-network never fills all n labels, but a sequence of
        # two or more can, and those only involve smaller sizes
        if kind == "one":
            return C[:n] + [0] * (N + 1 - n)
        arr = [sum(powers[l][m] for l in range(a, m + 1)) if m < n else 0 for m in range(N + 1)]
        if n <= N:
            arr[n] = sum(powers[l][n] for l in range(max(a, 2), n + 1))
        return arr

    def refresh_powers(m, lmin=1):
        for l in range(lmin, N + 1):
            powers[l][m] = sum(comb(m, k) * C[k] * powers[l - 1][m - k] for k in range(1, m + 1))

    refresh_powers(1)
    for n in range(2, N + 1):
        refresh_powers(n, 2)
        total = Fraction(0)
        for t, fs in zip(ts, facs):
            prod = [1] + [0] * N
            for kind, a in fs:
                prod = _convolve(prod, factor_array(kind, a, n), N)
            v = t.weight * prod[n]
            if v:
                weights[(t.tag, n)] = weights.get((t.tag, n), Fraction(0)) + v
                total += v
        if total.denominator != 1:
            raise ArithmeticError("non-integral class count")
        C[n] = int(total)
        refresh_powers(n)
    for tag in {t.tag for t in ts} | {"0a"}:
        for n in range(1, N + 1):
            weights.setdefault((tag, n), Fraction(0))
    if any(w.denominator != 1 for w in weights.values()):
        raise ArithmeticError("non-integral case count")
    # suffix products of each template's factors with the full arrays
    suffix = []
    for fs in facs:
        arrs = [factor_array(kind, a, N + 1) for kind, a in fs]
        suf = [[1] + [0] * N]
        for arr in reversed(arrs):
            suf.append(_convolve(arr, suf[-1], N))
        suffix.append(suf[::-1])
    return WeightTable(
        cls, N, {k: int(v) for k, v in sorted(weights.items())}, C, powers, ts, scaled, D, facs, suffix
    )


def _pick(rng: random.Random, weights: list[int]) -> int:
    total = sum(weights)
    if total <= 0:
        raise ArithmeticError("nothing to sample from")
    r = rng.randrange(total)
    for i, w in enumerate(weights):
        if r < w:
            return i
        r -= w
    raise AssertionError("unreachable")


class _Sampler:
    def __init__(self, table: WeightTable, rng: random.Random):
        self.t, self.rng = table, rng
        self.directed = table.cls.rooted

    def planted(self, labels: list[str]) -> Planted:
        n = len(labels)
        if n == 1:
            return Planted.leaf(labels[0], self.directed)
        T = self.t
        choice = _pick(self.rng, [w * suf[0][n] for w, suf in zip(T.scaled, T.suffix)])
        tmpl, fs, suf = T.templates[choice], T.factors[choice], T.suffix[choice]
        # sizes of the factors, left to right
        sizes, rest = [], n
        for i, (kind, a) in enumerate(fs):
            arr = [T.counts[s] if kind == "one" else T.seq(a, s) for s in range(rest + 1)]
            s = _pick(self.rng, [comb(rest, s) * arr[s] * suf[i + 1][rest - s] for s in range(rest + 1)])
            sizes.append(s)
            rest -= s
        self.rng.shuffle(labels)
        parts, at = [], 0
        for (kind, a), s in zip(fs, sizes):
            block = labels[at : at + s]
            at += s
            parts.append(self.planted(block) if kind == "one" else self.sequence(block, a))
        npend = len(tmpl.generator.pendants)
        pend, seqs, it = parts[:npend], [], iter(parts[npend:])
        for s in tmpl.pattern:
            if s == EMPTY:
                seqs.append([])
            elif s == ONE:
                seqs.append([next(it)])
            else:
                seqs.append(next(it))
        return assemble(tmpl.generator, seqs, pend)

    def sequence(self, labels: list[str], a: int) -> list[Planted]:
        T, m = self.t, len(labels)
        lengths = list(range(a, m + 1))
        l = lengths[_pick(self.rng, [T.powers[l][m] for l in lengths])]
        sizes, rest = [], m
        for left in range(l, 0, -1):
            s = _pick(
                self.rng,
                [comb(rest, s) * T.counts[s] * T.powers[left - 1][rest - s] if s <= rest else 0 for s in range(rest + 1)],
            )
            sizes.append(s)
            rest -= s
        out, at = [], 0
        for s in sizes:
            out.append(self.planted(labels[at : at + s]))
            at += s
        return out


def _draw(table: WeightTable, n_index: int, rng: random.Random) -> Network:
    labels = [str(i + 1) for i in range(n_index)]
    pl = _Sampler(table, rng).planted(labels)
    net = finish(pl, ROOT_LABEL)
    if not table.cls.rooted:
        net = net.relabel_taxa({ROOT_LABEL: str(n_index + 1)})
    return net


def sample(cls, n_index: int, seed: int, table: WeightTable | None = None) -> Network:
    """One uniformly random network at series index ``n_index``.

    The random stream is ``random.Random(seed)``; equal seeds give equal output.
    Leaves are labelled ``"1".."N"`` like :func:`phylolevel.oracle.generate_all`.
    """
    cls = _as_class(cls)
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    if table is None:
        table = preprocess(cls, n_index)
    elif table.cls is not cls:
        raise ValueError("weight table belongs to another class")
    if n_index > table.max_n:
        raise ValueError(f"n_index {n_index} exceeds the table's max_n {table.max_n}")
    return _draw(table, n_index, random.Random(seed))


def sample_many(cls, n_index: int, count: int, seed: int, table: WeightTable | None = None) -> list[Network]:
    """``count`` independent samples drawn from a single stream seeded by ``seed``."""
    cls = _as_class(cls)
    if table is None:
        table = preprocess(cls, n_index)
    if n_index > table.max_n:
        raise ValueError(f"n_index {n_index} exceeds the table's max_n {table.max_n}")
    rng = random.Random(seed)
    return [_draw(table, n_index, rng) for _ in range(count)]


__all__ = ["WeightTable", "preprocess", "sample", "sample_many"]
