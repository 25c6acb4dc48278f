"""Finite graphs with a fixed-point-free edge involution and no loops."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """A multigraph where every edge ``e`` has a reverse ``inv(e)``.

    ``edges`` maps an edge id to ``(inverse id, source vertex, target vertex)``.
    Both orientations of a pair are stored explicitly.
    """

    vertices: tuple[str, ...]
    edges: Mapping[str, tuple[str, str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        for e, (ie, a, b) in self.edges.items():
            if a not in vs or b not in vs:
                raise GraphError(f"edge {e!r} has an unknown endpoint")
            if a == b:
                raise GraphError(f"edge {e!r} is a loop")
            if ie == e:
                raise GraphError(f"edge {e!r} is its own inverse")
            if ie not in self.edges:
                raise GraphError(f"inverse {ie!r} of edge {e!r} is missing")
            rie, ra, rb = self.edges[ie]
            if rie != e or ra != b or rb != a:
                raise GraphError(f"edge {e!r} and {ie!r} are not mutually inverse")

    # -- construction helpers
    @classmethod
    def build(cls, vertices: Iterable[str],
              pairs: Iterable[tuple[str, str, str, str]]) -> "Graph":
        """Build from ``(edge, inverse, from, to)`` tuples, one per pair."""
        edges: dict[str, tuple[str, str, str]] = {}
        for e, ie, a, b in pairs:
            if e in edges or ie in edges:
                raise GraphError(f"duplicate edge id in pair {e!r}/{ie!r}")
            edges[e] = (ie, a, b)
            edges[ie] = (e, b, a)
        return cls(tuple(vertices), edges)

    def alpha(self, e: str) -> str:
        return self._edge(e)[1]

    def omega(self, e: str) -> str:
        return self._edge(e)[2]

    def inv(self, e: str) -> str:
        return self._edge(e)[0]

    def _edge(self, e: str) -> tuple[str, str, str]:
        try:
            return self.edges[e]
        except KeyError:
            raise GraphError(f"unknown edge {e!r}") from None

    def has_vertex(self, v: str) -> bool:
        return v in self.vertices

    def star(self, v: str) -> list[str]:
        if v not in self.vertices:
            raise GraphError(f"unknown vertex {v!r}")
        return sorted(e for e, (_, a, _) in self.edges.items() if a == v)

    def edge_pairs(self) -> list[tuple[str, str]]:
        """One representative per pair, as ``(e, inv e)`` with ``e < inv e``."""
        return sorted((e, ie) for e, (ie, _, _) in self.edges.items() if e < ie)

    def components(self) -> list[list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for _, (_, a, b) in self.edges.items():
            adj[a].append(b)
        seen: set[str] = set()
        comps = []
        for v in self.vertices:
            if v in seen:
                continue
            stack, comp = [v], []
            seen.add(v)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def first_betti(self) -> int:
        return len(self.edges) // 2 - len(self.vertices) + len(self.components())

    def without_pairs(self, removed: Iterable[str]) -> "Graph":
        rem = set(removed)
        for e in rem:
            if self.inv(e) not in rem:
                raise GraphError(f"removed set not closed under inverse at {e!r}")
        return Graph(self.vertices, {e: d for e, d in self.edges.items() if e not in rem})

    def spanning_tree(self, root: str, avoid: Iterable[str] = ()) -> dict[str, str | None]:
        """BFS tree of the component of ``root``: vertex -> edge entering it.

        Edges in ``avoid`` (and their inverses) are never used.
        """
        if root not in self.vertices:
            raise GraphError(f"unknown vertex {root!r}")
        banned = set(avoid)
        banned |= {self.inv(e) for e in banned}
        parent: dict[str, str | None] = {root: None}
        queue = [root]
        stars = {v: [] for v in self.vertices}
        for e in sorted(self.edges):
            if e not in banned:
                stars[self.edges[e][1]].append(e)
        while queue:
            nxt = []
            for v in queue:
                for e in stars[v]:
                    w = self.edges[e][2]
                    if w not in parent:
                        parent[w] = e
                        nxt.append(w)
            queue = nxt
        return parent

    def tree_path(self, parent: Mapping[str, str | None], v: str) -> list[str]:
        """Edges of the tree path from the root to ``v``."""
        out = []
        while parent[v] is not None:
            e = parent[v]
            out.append(e)
            v = self.alpha(e)
        return out[::-1]

    # -- serialization
    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "inv": ie, "from": a, "to": b}
                      for e, (ie, a, b) in sorted(self.edges.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        edges = {}
        for item in data.get("edges", []):
            edges[item["id"]] = (item["inv"], item["from"], item["to"])
        return cls(tuple(data["vertices"]), edges)
