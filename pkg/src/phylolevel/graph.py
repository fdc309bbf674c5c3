"""Leaf-labelled phylogenetic networks as plain graph values.

A :class:`Network` is immutable.  Rooted networks store arcs ``(tail, head)``;
unrooted networks store edges as ``(min, max)`` pairs.  Parallel edges are kept
as repeated entries so that :func:`validate` can report them.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple

ROOTED = "rooted"
UNROOTED = "unrooted"
ROOT_LABEL = "#"


class NetworkError(ValueError):
    """Operation called on a network that does not satisfy its precondition."""


@dataclass(frozen=True)
class Network:
    kind: str
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    labels: tuple[tuple[int, str], ...]

    @classmethod
    def make(
        cls,
        kind: str,
        edges: Iterable[tuple[int, int]],
        labels: Mapping[int, str],
        vertices: Iterable[int] | None = None,
    ) -> Network:
        if kind not in (ROOTED, UNROOTED):
            raise ValueError(f"unknown network kind {kind!r}")
        es = [tuple(e) for e in edges]
        if kind == UNROOTED:
            es = [(min(e), max(e)) for e in es]
        vs = set(vertices or ())
        vs.update(v for e in es for v in e)
        vs.update(labels)
        return cls(kind, tuple(sorted(vs)), tuple(sorted(es)), tuple(sorted((v, str(l)) for v, l in labels.items())))

    # -- views -------------------------------------------------------------

    @property
    def rooted(self) -> bool:
        return self.kind == ROOTED

    @cached_property
    def label_of(self) -> dict[int, str]:
        return dict(self.labels)

    @cached_property
    def vertex_of(self) -> dict[str, int]:
        return {l: v for v, l in self.labels}

    @cached_property
    def out_nbrs(self) -> dict[int, list[int]]:
        d: dict[int, list[int]] = {v: [] for v in self.vertices}
        for t, h in self.edges:
            d[t].append(h)
            if not self.rooted:
                d[h].append(t)
        return d

    @cached_property
    def in_nbrs(self) -> dict[int, list[int]]:
        d: dict[int, list[int]] = {v: [] for v in self.vertices}
        if self.rooted:
            for t, h in self.edges:
                d[h].append(t)
        return d

    def neighbours(self, v: int) -> list[int]:
        return self.out_nbrs[v] + self.in_nbrs[v] if self.rooted else self.out_nbrs[v]

    def degree(self, v: int) -> int:
        return len(self.out_nbrs[v]) + len(self.in_nbrs[v])

    @property
    def leaves(self) -> list[int]:
        return [v for v, _ in self.labels]

    @property
    def taxa(self) -> list[str]:
        return sorted(l for _, l in self.labels)

    @property
    def root(self) -> int | None:
        if not self.rooted:
            return None
        roots = [v for v in self.vertices if not self.in_nbrs[v]]
        return roots[0] if len(roots) == 1 else None

    def relabel_taxa(self, mapping: Mapping[str, str]) -> Network:
        return Network.make(self.kind, self.edges, {v: mapping.get(l, l) for v, l in self.labels}, self.vertices)

    def compact(self) -> Network:
        """Renumber vertices ``0..V-1`` in current order."""
        ix = {v: i for i, v in enumerate(self.vertices)}
        return Network.make(
            self.kind,
            ((ix[a], ix[b]) for a, b in self.edges),
            {ix[v]: l for v, l in self.labels},
            range(len(self.vertices)),
        )

    # -- interchange -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "labels": {str(v): l for v, l in self.labels},
        }

    @classmethod
    def from_json(cls, data: Mapping | str) -> Network:
        if isinstance(data, str):
            data = json.loads(data)
        return cls.make(
            data["kind"],
            (tuple(e) for e in data["edges"]),
            {int(v): l for v, l in data["labels"].items()},
            data.get("vertices"),
        )


# ---------------------------------------------------------------------------
# blobs
# ---------------------------------------------------------------------------


def bridges(net: Network) -> set[int]:
    """Indices (into ``net.edges``) of cut edges, ignoring orientation.

    Iterative low-link DFS on the underlying multigraph; parallel edges are
    distinguished by index so a doubled edge is never a bridge.
    """
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for i, (a, b) in enumerate(net.edges):
        adj[a].append((b, i))
        adj[b].append((a, i))
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    out: set[int] = set()
    timer = 0
    for start in net.vertices:
        if start in disc:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack = [(start, -1, iter(adj[start]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for w, i in it:
                if i == via:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, i, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        out.add(via)
    return out


@dataclass(frozen=True)
class BlobDecomposition:
    blobs: list[frozenset[int]]
    bridges: frozenset[int]
    blob_edges: list[tuple[int, ...]] = field(repr=False)
    levels: list[int]

    def blob_of(self, v: int) -> int:
        for i, b in enumerate(self.blobs):
            if v in b:
                return i
        raise KeyError(v)


def blob_decomposition(net: Network) -> BlobDecomposition:
    """Bridgeless components, each with its edge indices and level."""
    cut = bridges(net)
    parent = {v: v for v in net.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, (a, b) in enumerate(net.edges):
        if i not in cut:
            parent[find(a)] = find(b)
    groups: dict[int, set[int]] = defaultdict(set)
    for v in net.vertices:
        groups[find(v)].add(v)
    blobs = sorted((frozenset(g) for g in groups.values()), key=min)
    index = {v: i for i, b in enumerate(blobs) for v in b}
    blob_edges: list[list[int]] = [[] for _ in blobs]
    for i, (a, b) in enumerate(net.edges):
        if i not in cut and index[a] == index[b]:
            blob_edges[index[a]].append(i)
    levels = []
    for b, es in zip(blobs, blob_edges):
        if net.rooted:
            levels.append(sum(1 for v in b if len(net.in_nbrs[v]) >= 2))
        else:
            levels.append(len(es) - len(b) + 1 if es else 0)
    return BlobDecomposition(blobs, frozenset(cut), [tuple(e) for e in blob_edges], levels)


# ---------------------------------------------------------------------------
# validation and parameters
# ---------------------------------------------------------------------------


class Validation(NamedTuple):
    level: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _connected(net: Network) -> bool:
    if not net.vertices:
        return False
    seen = {net.vertices[0]}
    todo = [net.vertices[0]]
    while todo:
        v = todo.pop()
        for w in net.neighbours(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(net.vertices)


def _acyclic(net: Network) -> bool:
    indeg = {v: len(net.in_nbrs[v]) for v in net.vertices}
    todo = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while todo:
        v = todo.pop()
        seen += 1
        for w in net.out_nbrs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                todo.append(w)
    return seen == len(net.vertices)


def validate(net: Network) -> Validation:
    """Check the structural definition for the network's kind; never raises."""
    bad: list[str] = []
    if not net.vertices:
        return Validation(0, ["empty network"])
    labelled = set(net.label_of)
    if len(set(net.label_of.values())) != len(net.labels):
        bad.append("leaf labels are not distinct")
    if any(a == b for a, b in net.edges):
        bad.append("loop edge")
    if len(set(net.edges)) != len(net.edges):
        bad.append("multiple edges")
    if len(net.vertices) == 1:
        if labelled != set(net.vertices):
            bad.append("single vertex must be a labelled leaf")
        return Validation(0, bad)
    if not _connected(net):
        bad.append("not connected")
    if net.rooted:
        roots = [v for v in net.vertices if not net.in_nbrs[v]]
        if len(roots) != 1:
            bad.append(f"expected exactly one root, found {len(roots)}")
        for v in net.vertices:
            d = (len(net.in_nbrs[v]), len(net.out_nbrs[v]))
            if d not in ((0, 2), (1, 0), (1, 2), (2, 1)):
                bad.append(f"vertex {v} has (in, out) degree {d}")
            if (d == (1, 0)) != (v in labelled):
                bad.append(f"vertex {v}: leaves and labelled vertices differ")
        if not _acyclic(net):
            bad.append("contains a directed cycle")
    else:
        for v in net.vertices:
            d = net.degree(v)
            if d not in (1, 3):
                bad.append(f"vertex {v} has degree {d}")
            if (d == 1) != (v in labelled):
                bad.append(f"vertex {v}: leaves and labelled vertices differ")
    dec = blob_decomposition(net)
    index = {v: i for i, b in enumerate(dec.blobs) for v in b}
    outgoing = [0] * len(dec.blobs)
    incident = [0] * len(dec.blobs)
    for i in dec.bridges:
        a, b = net.edges[i]
        outgoing[index[a]] += 1
        incident[index[a]] += 1
        incident[index[b]] += 1
    for i, b in enumerate(dec.blobs):
        if len(b) < 2:
            continue
        if net.rooted and outgoing[i] < 2:
            bad.append(f"blob {sorted(b)} has fewer than two outgoing cut arcs")
        if not net.rooted and incident[i] < 3:
            bad.append(f"blob {sorted(b)} has fewer than three incident cut edges")
    return Validation(max(dec.levels, default=0), bad)


class Parameters(NamedTuple):
    k: int
    m: int


def parameters(net: Network) -> Parameters:
    """``k`` = blobs of level >= 1, ``m`` = edges inside those blobs."""
    v = validate(net)
    if v.violations:
        raise NetworkError("invalid network: " + "; ".join(v.violations))
    dec = blob_decomposition(net)
    k = m = 0
    for lvl, es in zip(dec.levels, dec.blob_edges):
        if lvl >= 1:
            k += 1
            m += len(es)
    return Parameters(k, m)


# ---------------------------------------------------------------------------
# unrooting and rooting
# ---------------------------------------------------------------------------


def unroot(net: Network, label: str = ROOT_LABEL) -> Network:
    """Attach a leaf ``label`` to the root and forget arc directions."""
    if not net.rooted:
        raise NetworkError("unroot expects a rooted network")
    v = validate(net)
    if v.violations:
        raise NetworkError("invalid network: " + "; ".join(v.violations))
    if label in net.vertex_of:
        raise NetworkError(f"label {label!r} already used")
    root = net.root if len(net.vertices) > 1 else net.vertices[0]
    new = max(net.vertices) + 1
    labels = dict(net.labels)
    labels[new] = label
    return Network.make(UNROOTED, list(net.edges) + [(root, new)], labels)


SinkChoice = Callable[[frozenset, list], int]


def _orientation_frame(net: Network, leaf: str):
    """Shared setup for rooting: root vertex, blob data and cut-edge directions."""
    if net.rooted:
        raise NetworkError("root_at expects an unrooted network")
    v = validate(net)
    if v.violations:
        raise NetworkError("invalid network: " + "; ".join(v.violations))
    if leaf not in net.vertex_of:
        raise NetworkError(f"no leaf labelled {leaf!r}")
    lv = net.vertex_of[leaf]
    dec = blob_decomposition(net)
    index = {v: i for i, b in enumerate(dec.blobs) for v in b}
    # orient cut edges away from the chosen leaf, record blob entry points
    arcs: list[tuple[int, int]] = []
    entry: dict[int, int] = {index[lv]: lv}
    seen = {lv}
    todo = deque([lv])
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for i, (a, b) in enumerate(net.edges):
        adj[a].append((b, i))
        adj[b].append((a, i))
    blob_seen = {index[lv]}
    while todo:
        v = todo.popleft()
        for w, i in sorted(adj[v]):
            if i in dec.bridges and w not in seen:
                arcs.append((v, w))
                if index[w] not in blob_seen:
                    blob_seen.add(index[w])
                    entry[index[w]] = w
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return lv, dec, index, arcs, entry


def _sink_candidates(net: Network, dec: BlobDecomposition, index, b: int, s: int) -> list[int]:
    blob = dec.blobs[b]
    return sorted(
        v for v in blob if v != s and any(index[w] != b for w in net.neighbours(v))
    )


def _st_order(blob_adj: dict[int, list[int]], s: int, t: int) -> list[int]:
    """Vertex order of an st-numbering built by ear insertion (smallest ids first)."""
    # initial s-t path by BFS
    prev = {s: None}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in sorted(blob_adj[v]):
            if w not in prev:
                prev[w] = v
                q.append(w)
    path = [t]
    while path[-1] != s:
        path.append(prev[path[-1]])
    order = path[::-1]
    placed = set(order)
    while len(placed) < len(blob_adj):
        pos = {v: i for i, v in enumerate(order)}
        ear = None
        for a in order:
            for x in sorted(blob_adj[a]):
                if x in placed:
                    continue
                # walk through unplaced vertices to some placed vertex other than a
                back = {x: a}
                q = deque([x])
                end = None
                while q and end is None:
                    v = q.popleft()
                    for w in sorted(blob_adj[v]):
                        if w in placed and w != a:
                            end = (v, w)
                            break
                        if w not in placed and w not in back:
                            back[w] = v
                            q.append(w)
                if end is None:
                    continue
                v, b = end
                inner = [v]
                while inner[-1] != x:
                    inner.append(back[inner[-1]])
                inner.reverse()
                ear = (a, inner, b)
                break
            if ear:
                break
        if ear is None:
            raise NetworkError("blob is not biconnected")
        a, inner, b = ear
        if pos[a] < pos[b]:
            at = pos[a] + 1
            order[at:at] = inner
        else:
            at = pos[b] + 1
            order[at:at] = inner[::-1]
        placed.update(inner)
    return order


def root_at(net: Network, leaf: str = ROOT_LABEL, sink_choices: SinkChoice | Mapping | None = None) -> Network:
    """Root an unrooted network at ``leaf`` (which is removed).

    ``sink_choices`` picks the sink of every blob: a callable
    ``(blob_vertices, candidates) -> vertex``, a mapping from any blob vertex
    to its sink, or ``None`` for the smallest candidate.  Within a blob the
    arcs follow an st-numbering from the entry vertex to the sink.  At level 1
    the source and sink fix the orientation; at level 2 another st-numbering
    may give a different network, and the one used here is deterministic.
    """
    lv, dec, index, arcs, entry = _orientation_frame(net, leaf)
    if len(net.vertices) == 2:
        other = next(v for v in net.vertices if v != lv)
        return Network.make(ROOTED, (), {other: net.label_of[other]})
    out = list(arcs)
    for b, blob in enumerate(dec.blobs):
        if len(blob) < 2:
            continue
        s = entry[b]
        cands = _sink_candidates(net, dec, index, b, s)
        t = _pick_sink(sink_choices, blob, cands)
        blob_adj = {v: [] for v in blob}
        for i in dec.blob_edges[b]:
            x, y = net.edges[i]
            blob_adj[x].append(y)
            blob_adj[y].append(x)
        order = _st_order(blob_adj, s, t)
        pos = {v: i for i, v in enumerate(order)}
        for i in dec.blob_edges[b]:
            x, y = net.edges[i]
            out.append((x, y) if pos[x] < pos[y] else (y, x))
    out = [(a, b) for a, b in out if a != lv]
    labels = {v: l for v, l in net.labels if v != lv}
    return Network.make(ROOTED, out, labels, [v for v in net.vertices if v != lv])


def _pick_sink(choice, blob, cands) -> int:
    if not cands:
        raise NetworkError("blob has no candidate sink")
    if choice is None:
        t = cands[0]
    elif callable(choice):
        t = choice(blob, list(cands))
    else:
        picks = {choice[v] for v in blob if v in choice}
        if len(picks) != 1:
            raise NetworkError(f"no unique sink choice for blob {sorted(blob)}")
        t = picks.pop()
    if t not in cands:
        raise NetworkError(f"invalid sink {t} for blob {sorted(blob)}; candidates {cands}")
    return t


def sink_candidates(net: Network, leaf: str = ROOT_LABEL) -> dict[frozenset, list[int]]:
    """Admissible sinks per nontrivial blob when rooting at ``leaf``."""
    lv, dec, index, _, entry = _orientation_frame(net, leaf)
    return {
        blob: _sink_candidates(net, dec, index, b, entry[b])
        for b, blob in enumerate(dec.blobs)
        if len(blob) > 1
    }


def _sourced_orientations(blob_edges: list[tuple[int, int]], s: int):
    """Acyclic orientations of a blob in which ``s`` is the only source."""
    verts = sorted({v for e in blob_edges for v in e})
    for bits in itertools.product((0, 1), repeat=len(blob_edges)):
        arcs = [(a, b) if f == 0 else (b, a) for (a, b), f in zip(blob_edges, bits)]
        indeg = dict.fromkeys(verts, 0)
        for _, b in arcs:
            indeg[b] += 1
        if [v for v in verts if indeg[v] == 0] != [s]:
            continue
        succ = defaultdict(list)
        for a, b in arcs:
            succ[a].append(b)
        todo, seen = [s], 0
        while todo:
            v = todo.pop()
            seen += 1
            for w in succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    todo.append(w)
        if seen == len(verts):
            yield arcs


def rootings(net: Network, leaf: str = ROOT_LABEL) -> list[Network]:
    """Every rooted network whose unrooting (with ``leaf`` as the extra leaf) is ``net``.

    This is the full preimage of :func:`unroot`, which is larger than what
    :func:`root_at` reaches: a blob may have several bottom vertices, which
    no single-sink orientation produces.  Results are distinct up to
    leaf-labelled isomorphism.
    """
    lv, dec, index, arcs, entry = _orientation_frame(net, leaf)
    if len(net.vertices) == 2:
        return [root_at(net, leaf)]
    per_blob = []
    for b, blob in enumerate(dec.blobs):
        if len(blob) < 2:
            continue
        s = entry[b]
        edges = [net.edges[i] for i in dec.blob_edges[b]]
        per_blob.append(list(_sourced_orientations(edges, s)))
    labels = {v: l for v, l in net.labels if v != lv}
    verts = [v for v in net.vertices if v != lv]
    base = [(a, b) for a, b in arcs if a != lv]
    seen: dict[str, Network] = {}
    for combo in itertools.product(*per_blob):
        out = base + [a for part in combo for a in part]
        r = Network.make(ROOTED, out, labels, verts)
        if validate(r).ok:
            seen.setdefault(canonical_form(r), r)
    return list(seen.values())


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


def _refine(net: Network, colors: dict[int, int]) -> dict[int, int]:
    while True:
        sig = {
            v: (
                colors[v],
                tuple(sorted(colors[w] for w in net.out_nbrs[v])),
                tuple(sorted(colors[w] for w in net.in_nbrs[v])),
            )
            for v in net.vertices
        }
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in net.vertices}
        if len(ranks) == len(set(colors.values())):
            return new
        colors = new


def _certificate(net: Network, colors: dict[int, int]) -> str:
    if net.rooted:
        es = sorted((colors[a], colors[b]) for a, b in net.edges)
    else:
        es = sorted(tuple(sorted((colors[a], colors[b]))) for a, b in net.edges)
    ls = sorted((colors[v], l) for v, l in net.labels)
    return json.dumps([net.kind, len(net.vertices), es, ls], separators=(",", ":"))


def canonical_form(net: Network) -> str:
    """Certificate string, equal exactly for leaf-labelled isomorphic networks."""
    init = {
        v: (net.label_of.get(v, ""), len(net.in_nbrs[v]), len(net.out_nbrs[v]))
        for v in net.vertices
    }
    ranks = {s: i for i, s in enumerate(sorted(set(init.values())))}
    start = {v: ranks[init[v]] for v in net.vertices}

    def search(colors):
        colors = _refine(net, colors)
        cells: dict[int, list[int]] = defaultdict(list)
        for v, c in colors.items():
            cells[c].append(v)
        if len(cells) == len(net.vertices):
            return _certificate(net, colors)
        target = min(c for c, vs in cells.items() if len(vs) > 1)
        best = None
        for v in cells[target]:
            split = {u: 2 * c + (0 if u == v else 1) for u, c in colors.items()}
            cert = search(split)
            if best is None or cert < best:
                best = cert
        return best

    return search(start)


def isomorphic(a: Network, b: Network) -> bool:
    return canonical_form(a) == canonical_form(b)


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(net: Network, name: str = "N") -> str:
    """DOT text; leaves are named by their label, internal vertices ``_v<id>``."""
    arrow = "->" if net.rooted else "--"
    head = "digraph" if net.rooted else "graph"

    def node(v):
        return _dot_id(net.label_of[v]) if v in net.label_of else _dot_id(f"_v{v}")

    lines = [f"{head} {name} {{"]
    if not net.edges:
        lines.extend(f"  {node(v)};" for v in net.vertices)
    for a, b in net.edges:
        lines.append(f"  {node(a)} {arrow} {node(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_dot(text: str) -> Network:
    """Parse the subset of DOT written by :func:`to_dot`."""
    import re

    header = re.match(r"\s*(digraph|graph)\b", text)
    if not header:
        raise ValueError("not a DOT graph")
    kind = ROOTED if header.group(1) == "digraph" else UNROOTED
    token = r'"((?:[^"\\]|\\.)*)"'
    ids: dict[str, int] = {}
    labels: dict[int, str] = {}

    def vid(raw: str) -> int:
        name = re.sub(r"\\(.)", r"\1", raw)
        if name not in ids:
            ids[name] = len(ids)
            if not name.startswith("_v"):
                labels[ids[name]] = name
        return ids[name]

    edges = []
    body = text[text.index("{") + 1 : text.rindex("}")]
    for stmt in body.split(";"):
        stmt = stmt.strip()
        if not stmt:
            continue
        parts = re.findall(token, stmt)
        if len(parts) == 2:
            edges.append((vid(parts[0]), vid(parts[1])))
        elif len(parts) == 1:
            vid(parts[0])
        else:
            raise ValueError(f"cannot parse statement {stmt!r}")
    return Network.make(kind, edges, labels, range(len(ids)))


__all__ = [
    "ROOTED",
    "UNROOTED",
    "ROOT_LABEL",
    "Network",
    "NetworkError",
    "BlobDecomposition",
    "Validation",
    "Parameters",
    "bridges",
    "blob_decomposition",
    "validate",
    "parameters",
    "unroot",
    "root_at",
    "rootings",
    "sink_candidates",
    "canonical_form",
    "isomorphic",
    "to_dot",
    "from_dot",
]
