"""Graphs of groups with cyclic edge groups, A-paths and fundamental groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .fpc_words import FpcGroup, FpcWord, IDENTITY, WordError, word_from_json, word_to_json
from .graph_core import Graph, GraphError


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class GraphOfGroups:
    """Vertex groups are free products of cyclic groups; edge groups are cyclic.

    ``edge_order[e]`` is 0 for an infinite cyclic edge group and 1 for a trivial
    one.  ``boundary[e]`` is the image of the edge generator in the vertex
    group at ``alpha(e)``; the generator is shared by ``e`` and its inverse.
    """

    graph: Graph
    vertex_group: Mapping[str, FpcGroup]
    edge_order: Mapping[str, int]
    boundary: Mapping[str, FpcWord]

    def __post_init__(self) -> None:
        g = self.graph
        for v in g.vertices:
            if v not in self.vertex_group:
                raise GraphError(f"vertex {v!r} has no group")
        for e in g.edges:
            n = self.edge_order.get(e)
            if n is None or e not in self.boundary:
                raise GraphError(f"edge {e!r} lacks group data")
            if self.edge_order[g.inv(e)] != n:
                raise GraphError(f"edge {e!r} and its inverse carry different groups")
            A = self.vertex_group[g.alpha(e)]
            w = A.check(self.boundary[e])
            if n == 1:
                if w:
                    raise GraphError(f"trivial edge group at {e!r} needs identity boundary word")
            elif A.order_of(w) != n:
                raise GraphError(f"boundary word at {e!r} is not injective on the edge group")

    @classmethod
    def trivial_edges(cls, graph: Graph, vertex_group: Mapping[str, FpcGroup]) -> "GraphOfGroups":
        return cls(graph, dict(vertex_group), {e: 1 for e in graph.edges},
                   {e: IDENTITY for e in graph.edges})

    def group(self, v: str) -> FpcGroup:
        return self.vertex_group[v]

    def bm(self, e: str) -> FpcWord:
        return self.boundary[e]

    def has_trivial_edges(self) -> bool:
        return all(n == 1 for n in self.edge_order.values())

    def subgraph(self, removed: Iterable[str]) -> "GraphOfGroups":
        rem = set(removed)
        g = self.graph.without_pairs(rem)
        return GraphOfGroups(g, self.vertex_group,
                             {e: n for e, n in self.edge_order.items() if e not in rem},
                             {e: w for e, w in self.boundary.items() if e not in rem})

    def component(self, v: str) -> "GraphOfGroups":
        """The sub-graph of groups carried by the component containing ``v``."""
        comp = next(c for c in self.graph.components() if v in c)
        keep = set(comp)
        verts = tuple(x for x in self.graph.vertices if x in keep)
        edges = {e: d for e, d in self.graph.edges.items() if d[1] in keep}
        return GraphOfGroups(Graph(verts, edges), {x: self.vertex_group[x] for x in verts},
                             {e: self.edge_order[e] for e in edges},
                             {e: self.boundary[e] for e in edges})

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "vertex_groups": {v: self.vertex_group[v].to_json() for v in self.graph.vertices},
            "edge_orders": {e: self.edge_order[e] for e in sorted(self.graph.edges)},
            "boundary": {e: word_to_json(self.boundary[e]) for e in sorted(self.graph.edges)},
        }

    @classmethod
    def from_json(cls, data) -> "GraphOfGroups":
        g = Graph.from_json(data["graph"])
        vg = {v: FpcGroup.from_json(x) for v, x in data["vertex_groups"].items()}
        eo = data.get("edge_orders") or {e: 1 for e in g.edges}
        bd = data.get("boundary") or {}
        return cls(g, vg, {e: int(eo[e]) for e in g.edges},
                   {e: word_from_json(bd.get(e, [])) for e in g.edges})

    def to_dot(self) -> str:
        lines = ["graph G {"]
        for v in self.graph.vertices:
            A = self.vertex_group[v]
            lab = "*".join(f"Z{p}" if p else "Z" for p in A.orders) or "1"
            lines.append(f'  "{v}" [label="{v}: {lab}"];')
        for e, ie in self.graph.edge_pairs():
            n = self.edge_order[e]
            lab = e if n == 1 else f"{e}: {'Z' if n == 0 else 'Z' + str(n)}"
            lines.append(f'  "{self.graph.alpha(e)}" -- "{self.graph.omega(e)}" [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class APath:
    """``a_0, e_1, a_1, ..., e_k, a_k`` starting at ``start``."""

    start: str
    elements: tuple[FpcWord, ...]
    edges: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.elements) != len(self.edges) + 1:
            raise PathError("a path with k edges carries k+1 elements")

    @property
    def length(self) -> int:
        return len(self.edges)

    def end(self, gog: GraphOfGroups) -> str:
        return gog.graph.omega(self.edges[-1]) if self.edges else self.start

    def vertices(self, gog: GraphOfGroups) -> list[str]:
        return [self.start] + [gog.graph.omega(e) for e in self.edges]

    def to_json(self) -> dict:
        return {"start": self.start, "elements": [word_to_json(a) for a in self.elements],
                "edges": list(self.edges)}

    @classmethod
    def from_json(cls, data) -> "APath":
        return cls(data["start"], tuple(word_from_json(a) for a in data["elements"]),
                   tuple(data.get("edges", [])))


def vertex_path(v: str, a: FpcWord = IDENTITY) -> APath:
    return APath(v, (a,), ())


def edge_path(gog: GraphOfGroups, edges: Sequence[str], start: str | None = None) -> APath:
    """Path along ``edges`` with identity elements."""
    if start is None:
        if not edges:
            raise PathError("start vertex required for an empty edge list")
        start = gog.graph.alpha(edges[0])
    return APath(start, (IDENTITY,) * (len(edges) + 1), tuple(edges))


def check_path(gog: GraphOfGroups, p: APath) -> None:
    g = gog.graph
    if not g.has_vertex(p.start):
        raise PathError(f"unknown start vertex {p.start!r}")
    v = p.start
    for i, e in enumerate(p.edges):
        if e not in g.edges:
            raise PathError(f"unknown edge {e!r}")
        if g.alpha(e) != v:
            raise PathError(f"edge {e!r} does not start at {v!r}")
        try:
            gog.group(v).check(p.elements[i])
        except WordError as exc:
            raise PathError(f"element {i}: {exc}") from None
        v = g.omega(e)
    try:
        gog.group(v).check(p.elements[-1])
    except WordError as exc:
        raise PathError(f"last element: {exc}") from None


def concat(gog: GraphOfGroups, *paths: APath) -> APath:
    out = paths[0]
    for q in paths[1:]:
        end = out.end(gog)
        if end != q.start:
            raise PathError(f"cannot concatenate: {end!r} != {q.start!r}")
        A = gog.group(end)
        mid = A.mul(out.elements[-1], q.elements[0])
        out = APath(out.start, out.elements[:-1] + (mid,) + q.elements[1:], out.edges + q.edges)
    return out


def inverse_path(gog: GraphOfGroups, p: APath) -> APath:
    g = gog.graph
    verts = p.vertices(gog)
    els = tuple(gog.group(v).inv(a) for v, a in zip(reversed(verts), reversed(p.elements)))
    return APath(verts[-1], els, tuple(g.inv(e) for e in reversed(p.edges)))


def path_power(gog: GraphOfGroups, p: APath, n: int) -> APath:
    if n == 0:
        return vertex_path(p.start)
    q = p if n > 0 else inverse_path(gog, p)
    out = q
    for _ in range(abs(n) - 1):
        out = concat(gog, out, q)
    return out


def backtrack_exponent(gog: GraphOfGroups, e_in: str, b: FpcWord, e_out: str) -> int | None:
    """For ``e_in, b, e_out`` with ``e_out = inv(e_in)``: ``n`` with ``b = bm(e_out)^n``."""
    g = gog.graph
    if e_out != g.inv(e_in):
        return None
    if gog.edge_order[e_out] == 1:
        return 0 if not b else None
    return gog.group(g.alpha(e_out)).is_power_of(b, gog.bm(e_out))


def reduce(gog: GraphOfGroups, p: APath) -> APath:
    """Remove every backtracking ``e, w_e(c), e^-1`` by the elementary equivalence."""
    g = gog.graph
    els: list[FpcWord] = [p.elements[0]]
    eds: list[str] = []
    for e, a in zip(p.edges, p.elements[1:]):
        if eds:
            n = backtrack_exponent(gog, eds[-1], els[-1], e)
            if n is not None:
                last = eds.pop()
                els.pop()
                A = gog.group(g.alpha(last))
                corr = A.power(gog.bm(last), n) if n else IDENTITY
                els[-1] = A.mul(els[-1], corr, a)
                continue
        eds.append(e)
        els.append(a)
    return APath(p.start, tuple(els), tuple(eds))


def is_reduced(gog: GraphOfGroups, p: APath) -> bool:
    for i in range(1, p.length):
        if backtrack_exponent(gog, p.edges[i - 1], p.elements[i], p.edges[i]) is not None:
            return False
    return True


def normalize(gog: GraphOfGroups, p: APath) -> APath:
    """Reduced path with coset representatives pushed left to right."""
    q = reduce(gog, p)
    g = gog.graph
    els = list(q.elements)
    for i, e in enumerate(q.edges):
        if gog.edge_order[e] == 1:
            continue
        A = gog.group(g.alpha(e))
        rep, n = A.coset_min_rep(els[i], gog.bm(e))
        if n:
            els[i] = rep
            B = gog.group(g.omega(e))
            els[i + 1] = B.mul(B.power(gog.bm(g.inv(e)), -n), els[i + 1])
    return APath(q.start, tuple(els), q.edges)


def equivalent(gog: GraphOfGroups, p: APath, q: APath) -> bool:
    return normalize(gog, p) == normalize(gog, q)


@dataclass(frozen=True)
class Pi1Element:
    """Element of the fundamental group, stored as a normalized loop."""

    base: str
    path: APath
    gog: GraphOfGroups = field(compare=False, hash=False, repr=False)

    def __mul__(self, other: "Pi1Element") -> "Pi1Element":
        return pi1_mul(self, other)

    def inverse(self) -> "Pi1Element":
        return pi1_inv(self)

    def is_identity(self) -> bool:
        return self.path.length == 0 and not self.path.elements[0]

    def __pow__(self, n: int) -> "Pi1Element":
        return pi1_from_path(self.gog, path_power(self.gog, self.path, n))


def pi1_from_path(gog: GraphOfGroups, p: APath) -> Pi1Element:
    if p.end(gog) != p.start:
        raise PathError("path is not closed")
    return Pi1Element(p.start, normalize(gog, p), gog)


def pi1_identity(gog: GraphOfGroups, base: str) -> Pi1Element:
    return Pi1Element(base, vertex_path(base), gog)


def pi1_mul(x: Pi1Element, y: Pi1Element) -> Pi1Element:
    if x.base != y.base:
        raise PathError("base vertices differ")
    return pi1_from_path(x.gog, concat(x.gog, x.path, y.path))


def pi1_inv(x: Pi1Element) -> Pi1Element:
    return pi1_from_path(x.gog, inverse_path(x.gog, x.path))


def pi1_eq(x: Pi1Element, y: Pi1Element) -> bool:
    return x.base == y.base and x.path == y.path


def tree_paths(gog: GraphOfGroups, root: str) -> dict[str, APath]:
    """Identity-labelled spanning-tree paths from ``root`` to each reachable vertex."""
    parent = gog.graph.spanning_tree(root)
    return {v: edge_path(gog, gog.graph.tree_path(parent, v), root) for v in parent}


def change_base(x: Pi1Element, new_base: str) -> Pi1Element:
    """Conjugate into ``pi1(gog, new_base)`` along the spanning-tree path."""
    gog = x.gog
    t = tree_paths(gog, new_base)[x.base]
    return pi1_from_path(gog, concat(gog, t, x.path, inverse_path(gog, t)))


class TreeSplitting:
    """Free-product decomposition of pi1 for trivial edge groups.

    Collapsing a spanning tree gives one factor per vertex-group factor
    (conjugated along tree paths) and one infinite cyclic factor per edge
    pair outside the tree.
    """

    def __init__(self, gog: GraphOfGroups, base: str, avoid: Iterable[str] = ()):
        if not gog.has_trivial_edges():
            raise PathError("spanning-tree splitting needs trivial edge groups")
        self.gog = gog
        self.base = base
        g = gog.graph
        parent = g.spanning_tree(base, avoid)
        if len(parent) != len(g.vertices):
            raise PathError("graph of groups is not connected" if not avoid
                            else "avoided edges disconnect the graph")
        self.parent = parent
        tree_edges = {e for e in parent.values() if e is not None}
        tree_edges |= {g.inv(e) for e in tree_edges}
        self.tree_edges = frozenset(tree_edges)
        self.paths = {v: edge_path(gog, g.tree_path(parent, v), base) for v in g.vertices}
        orders: list[int] = []
        names: list[str] = []
        self.vertex_offset: dict[str, int] = {}
        self.basis: list[tuple] = []
        for v in g.vertices:
            A = gog.group(v)
            self.vertex_offset[v] = len(orders)
            for i, p in enumerate(A.orders):
                orders.append(p)
                names.append(f"{v}.{A.factor_name(i)}")
                self.basis.append(("vertex", v, i))
        self.loop_index: dict[str, tuple[int, int]] = {}
        for e, ie in g.edge_pairs():
            if e in tree_edges:
                continue
            k = len(orders)
            orders.append(0)
            names.append(f"y.{e}")
            self.basis.append(("edge", e))
            self.loop_index[e] = (k, 1)
            self.loop_index[ie] = (k, -1)
        self.group = FpcGroup(tuple(orders), tuple(names))

    @property
    def rank(self) -> int:
        return self.group.rank

    @property
    def torsion(self) -> int:
        return sum(1 for p in self.group.orders if p)

    def path_word(self, p: APath) -> FpcWord:
        """Word of the loop ``T_start p T_end^-1`` (exact, any path)."""
        g = self.gog.graph
        letters: list[tuple[int, int]] = []
        v = p.start
        for i, a in enumerate(p.elements):
            off = self.vertex_offset[v]
            letters.extend((f + off, ex) for f, ex in a)
            if i < p.length:
                e = p.edges[i]
                if e in self.loop_index:
                    letters.append(self.loop_index[e])
                v = g.omega(e)
        return self.group.normalize(letters)

    def to_word(self, x: Pi1Element) -> FpcWord:
        if x.base != self.base:
            raise PathError("element is based elsewhere")
        return self.path_word(x.path)

    def generator_loop(self, k: int) -> APath:
        gog = self.gog
        kind = self.basis[k]
        if kind[0] == "vertex":
            _, v, i = kind
            t = self.paths[v]
            return concat(gog, t, vertex_path(v, ((i, 1),)), inverse_path(gog, t))
        e = kind[1]
        g = gog.graph
        return concat(gog, self.paths[g.alpha(e)], edge_path(gog, [e]),
                      inverse_path(gog, self.paths[g.omega(e)]))

    def generator(self, k: int) -> Pi1Element:
        return pi1_from_path(self.gog, self.generator_loop(k))

    def from_word(self, w: FpcWord) -> Pi1Element:
        gog = self.gog
        p = vertex_path(self.base)
        for f, ex in w:
            p = concat(gog, p, path_power(gog, self.generator_loop(f), ex))
        return pi1_from_path(gog, p)
