"""Exhaustive generation of every network of a class at small sizes.

Each generator is instantiated with every ordered sequence (of any length) of
sub-networks on each edge slot and every sub-network on each pendant slot.
Raw instantiations are filtered by :func:`~phylolevel.graph.validate` and
deduplicated by canonical form.  No symmetry weights are used, so the result
is an independent check on the counting side.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .classes import NetworkClass, _as_class, count, refined_counts
from .graph import ROOT_LABEL, Network, canonical_form, parameters, validate
from .specs import GENERATORS, Planted, assemble, case_tag, finish

DEFAULT_CAPS = {
    NetworkClass.ROOTED1: 5,
    NetworkClass.UNROOTED1: 5,
    NetworkClass.ROOTED2: 3,
    NetworkClass.UNROOTED2: 4,
}
LARGE_CAPS = {NetworkClass.ROOTED2: 4}


class ResourceError(RuntimeError):
    """Requested size exceeds the generation cap."""


@dataclass(frozen=True)
class Generated:
    planted: Planted
    tag: str
    network: Network


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _ordered_partitions(labels: tuple[str, ...], blocks: int) -> Iterator[list[tuple[str, ...]]]:
    """All ways to split ``labels`` into ``blocks`` ordered nonempty blocks."""
    for assign in itertools.product(range(blocks), repeat=len(labels)):
        if len(set(assign)) != blocks:
            continue
        out: list[list[str]] = [[] for _ in range(blocks)]
        for lab, b in zip(labels, assign):
            out[b].append(lab)
        yield [tuple(b) for b in out]


def _finish(cls: NetworkClass, planted: Planted) -> Network:
    return finish(planted, ROOT_LABEL)


@lru_cache(maxsize=None)
def _planted(cls: NetworkClass, n: int) -> tuple[Generated, ...]:
    """All planted networks on labels ``"0".."n-1"``, deduplicated."""
    directed = cls.rooted
    labels = tuple(str(i) for i in range(n))
    if n == 1:
        leaf = Planted.leaf("0", directed)
        return (Generated(leaf, "0a", _finish(cls, leaf)),)
    found: dict[str, Generated] = {}
    for gen in GENERATORS[cls]:
        P, E = len(gen.pendants), len(gen.edges)
        # a single sub-network would carry all n labels; such a top has
        # fewer than two children and validate() rejects it anyway
        for j in range(max(P, 2), n + 1):
            for lengths in _compositions(j - P, E):
                tag = case_tag(cls, gen, lengths)
                for blocks in _ordered_partitions(labels, j):
                    choices = []
                    for block in blocks:
                        subs = _planted(cls, len(block))
                        mapping = {str(i): lab for i, lab in enumerate(block)}
                        choices.append([g.planted.relabel(mapping) for g in subs])
                    for combo in itertools.product(*choices):
                        pend = combo[:P]
                        seqs, at = [], P
                        for k in lengths:
                            seqs.append(combo[at : at + k])
                            at += k
                        pl = assemble(gen, seqs, pend)
                        net = _finish(cls, pl)
                        cert = canonical_form(net)
                        if cert in found:
                            continue
                        v = validate(net)
                        if v.violations or v.level > cls.level:
                            continue
                        found[cert] = Generated(pl, tag, net)
    return tuple(found[c] for c in sorted(found))


def _check_cap(cls: NetworkClass, n_index: int, allow_large: bool) -> None:
    cap = DEFAULT_CAPS[cls]
    if allow_large:
        cap = max(cap, LARGE_CAPS.get(cls, cap))
    if n_index > cap:
        raise ResourceError(f"{cls.value}: n_index {n_index} exceeds generation cap {cap}")


def _public_labels(cls: NetworkClass, n_index: int) -> dict[str, str]:
    m = {str(i): str(i + 1) for i in range(n_index)}
    if not cls.rooted:
        m[ROOT_LABEL] = str(n_index + 1)
    return m


def generate_tagged(cls, n_index: int, allow_large: bool = False) -> list[tuple[str, Network]]:
    """``(case_tag, network)`` for every network at series index ``n_index``."""
    cls = _as_class(cls)
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    _check_cap(cls, n_index, allow_large)
    mapping = _public_labels(cls, n_index)
    return [(g.tag, g.network.relabel_taxa(mapping)) for g in _planted(cls, n_index)]


def generate_all(cls, n_index: int, allow_large: bool = False) -> list[Network]:
    """Every network of the class at series index ``n_index``, up to isomorphism.

    Leaves are labelled ``"1"`` to ``"N"`` where ``N`` is the number of leaves;
    for unrooted classes the leaf that served as the fictitious root gets ``N``.
    """
    return [net for _, net in generate_tagged(cls, n_index, allow_large)]


def generate_pointed(cls, n_index: int, allow_large: bool = False) -> list[Network]:
    """Like :func:`generate_all` but unrooted networks keep the leaf ``#``."""
    cls = _as_class(cls)
    _check_cap(cls, n_index, allow_large)
    mapping = {str(i): str(i + 1) for i in range(n_index)}
    return [g.network.relabel_taxa(mapping) for g in _planted(cls, n_index)]


def verify_counts(cls, n_max: int, allow_large: bool = False) -> dict:
    """Compare the oracle with exact counts, refined tables and per-case weights."""
    from .sampler import preprocess

    cls = _as_class(cls)
    _check_cap(cls, n_max, allow_large)
    table = preprocess(cls, n_max)
    rows = []
    for n in range(1, n_max + 1):
        tagged = generate_tagged(cls, n, allow_large)
        nets = [net for _, net in tagged]
        certs = {canonical_form(net) for net in nets}
        hist = Counter(tuple(parameters(net)) for net in nets)
        cases = Counter(tag for tag, _ in tagged)
        expected_cases = {tag: c for (tag, m), c in table.weights.items() if m == n and c}
        refined = refined_counts(cls, n).entries
        exact = count(cls, n)
        row = {
            "n_index": n,
            "leaves": cls.leaves(n),
            "oracle": len(nets),
            "count": exact,
            "duplicate_free": len(certs) == len(nets),
            "count_match": len(nets) == exact,
            "refined_match": dict(hist) == refined,
            "case_match": dict(cases) == expected_cases,
            "cases": dict(sorted(cases.items())),
        }
        row["ok"] = row["duplicate_free"] and row["count_match"] and row["refined_match"] and row["case_match"]
        rows.append(row)
    return {"class": cls.value, "n_max": n_max, "rows": rows, "ok": all(r["ok"] for r in rows)}


__all__ = [
    "DEFAULT_CAPS",
    "ResourceError",
    "generate_all",
    "generate_tagged",
    "generate_pointed",
    "verify_counts",
    "canonical_form",
]
