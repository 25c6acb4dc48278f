"""Morphisms of graphs of groups, foldedness and complexity measures."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping

from .fpc_words import FpcGroup, FpcHom, FpcWord, IDENTITY, word_from_json, word_to_json
from .graph_of_groups import (APath, GraphOfGroups, PathError, Pi1Element, TreeSplitting,
                              check_path, pi1_from_path)


class MorphismError(ValueError):
    pass


@dataclass(frozen=True)
class GGMorphism:
    source: GraphOfGroups
    target: GraphOfGroups
    vmap: Mapping[str, str]
    emap: Mapping[str, str]
    vertex_hom: Mapping[str, FpcHom]
    edge_hom: Mapping[str, int]
    o: Mapping[str, FpcWord]
    t: Mapping[str, FpcWord]

    def hom(self, u: str) -> FpcHom:
        return self.vertex_hom[u]

    def edges_over(self, e: str) -> list[str]:
        return sorted(f for f, x in self.emap.items() if x == e)

    def vertices_over(self, v: str) -> list[str]:
        return [u for u in self.source.graph.vertices if self.vmap[u] == v]

    def replace(self, **kw) -> "GGMorphism":
        data = dict(source=self.source, target=self.target, vmap=self.vmap, emap=self.emap,
                    vertex_hom=self.vertex_hom, edge_hom=self.edge_hom, o=self.o, t=self.t)
        data.update(kw)
        return GGMorphism(**data)

    def to_json(self) -> dict:
        S = self.source.graph
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "vmap": {u: self.vmap[u] for u in S.vertices},
            "emap": {f: self.emap[f] for f in sorted(S.edges)},
            "vertex_homs": {u: [word_to_json(w) for w in self.vertex_hom[u].images]
                            for u in S.vertices},
            "edge_homs": {f: self.edge_hom[f] for f in sorted(S.edges)},
            "o": {f: word_to_json(self.o[f]) for f in sorted(S.edges)},
            "t": {f: word_to_json(self.t[f]) for f in sorted(S.edges)},
        }

    @classmethod
    def from_json(cls, data) -> "GGMorphism":
        src = GraphOfGroups.from_json(data["source"])
        tgt = GraphOfGroups.from_json(data["target"])
        vmap = dict(data["vmap"])
        emap = dict(data["emap"])
        vh = {u: FpcHom(src.group(u), tgt.group(vmap[u]),
                        tuple(word_from_json(w) for w in data["vertex_homs"][u]))
              for u in src.graph.vertices}
        eh = {f: int(data.get("edge_homs", {}).get(f, 0)) for f in src.graph.edges}
        o = {f: word_from_json(data["o"].get(f, [])) for f in src.graph.edges}
        if "t" in data:
            t = {f: word_from_json(data["t"].get(f, [])) for f in src.graph.edges}
        else:
            t = {f: tgt.group(vmap[src.graph.omega(f)]).inv(o[src.graph.inv(f)])
                 for f in src.graph.edges}
        return cls(src, tgt, vmap, emap, vh, eh, o, t)


def make_morphism(source: GraphOfGroups, target: GraphOfGroups, vmap: Mapping[str, str],
                  emap: Mapping[str, str], vertex_hom: Mapping[str, FpcHom],
                  o: Mapping[str, FpcWord], edge_hom: Mapping[str, int] | None = None) -> GGMorphism:
    """Build a morphism from ``o`` alone, deriving ``t_f = o_{f^-1}^-1``."""
    S = source.graph
    t = {f: target.group(vmap[S.omega(f)]).inv(o[S.inv(f)]) for f in S.edges}
    eh = dict(edge_hom) if edge_hom is not None else {f: 0 for f in S.edges}
    return GGMorphism(source, target, dict(vmap), dict(emap), dict(vertex_hom), eh, dict(o), t)


def check_morphism(m: GGMorphism) -> list[str]:
    out: list[str] = []
    S, T = m.source.graph, m.target.graph
    for u in S.vertices:
        v = m.vmap.get(u)
        if v is None or not T.has_vertex(v):
            out.append(f"vertex {u}: image missing")
            continue
        h = m.vertex_hom.get(u)
        if h is None or h.source != m.source.group(u) or h.target != m.target.group(v):
            out.append(f"vertex {u}: homomorphism has wrong domain or codomain")
    if out:
        return out
    for f in sorted(S.edges):
        e = m.emap.get(f)
        if e is None or e not in T.edges:
            out.append(f"edge {f}: image missing")
            continue
        if m.vmap[S.alpha(f)] != T.alpha(e) or m.vmap[S.omega(f)] != T.omega(e):
            out.append(f"edge {f}: graph map does not commute with endpoints")
        if m.emap.get(S.inv(f)) != T.inv(e):
            out.append(f"edge {f}: graph map does not commute with inversion")
        if m.edge_hom[f] != m.edge_hom[S.inv(f)]:
            out.append(f"edge {f}: edge homomorphism differs from its inverse edge")
    if out:
        return out
    for f in sorted(S.edges):
        e = m.emap[f]
        A = m.target.group(T.alpha(e))
        Aw = m.target.group(T.omega(e))
        if m.t[f] != Aw.inv(m.o[S.inv(f)]):
            out.append(f"edge {f}: t_f^-1 != o_(f^-1)")
        k = m.edge_hom[f]
        nb, na = m.source.edge_order[f], m.target.edge_order[e]
        if nb != 1 and na != 1:
            if (na == 0 and nb != 0 and k != 0) or (na and nb and (k * nb) % na):
                out.append(f"edge {f}: edge homomorphism is not well defined")
        lhs = m.vertex_hom[S.alpha(f)](m.source.bm(f))
        img = A.power(m.target.bm(e), k) if nb != 1 else IDENTITY
        rhs = A.conj(m.o[f], img)
        if lhs != rhs:
            out.append(f"edge {f}: boundary condition (5) fails")
    return out


def induced_image(m: GGMorphism, q: APath) -> APath:
    S = m.source.graph
    T = m.target.graph
    verts = q.vertices(m.source)
    k = q.length
    els = []
    for i, b in enumerate(q.elements):
        v = m.vmap[verts[i]]
        A = m.target.group(v)
        parts = []
        if i > 0:
            parts.append(m.t[q.edges[i - 1]])
        parts.append(m.vertex_hom[verts[i]](b))
        if i < k:
            parts.append(m.o[q.edges[i]])
        els.append(A.mul(*parts) if len(parts) > 1 else parts[0])
    return APath(m.vmap[q.start], tuple(els), tuple(m.emap[f] for f in q.edges))


def induced_hom(m: GGMorphism, x: Pi1Element) -> Pi1Element:
    return pi1_from_path(m.target, induced_image(m, x.path))


def identity_morphism(gog: GraphOfGroups) -> GGMorphism:
    g = gog.graph
    return GGMorphism(gog, gog, {v: v for v in g.vertices}, {e: e for e in g.edges},
                      {v: FpcHom.identity(gog.group(v)) for v in g.vertices},
                      {e: 1 if gog.edge_order[e] != 1 else 0 for e in g.edges},
                      {e: IDENTITY for e in g.edges}, {e: IDENTITY for e in g.edges})


def inclusion(sub: GraphOfGroups, gog: GraphOfGroups) -> GGMorphism:
    g = sub.graph
    return GGMorphism(sub, gog, {v: v for v in g.vertices}, {e: e for e in g.edges},
                      {v: FpcHom.identity(gog.group(v)) for v in g.vertices},
                      {e: 1 if gog.edge_order[e] != 1 else 0 for e in g.edges},
                      {e: IDENTITY for e in g.edges}, {e: IDENTITY for e in g.edges})


def compose(outer: GGMorphism, inner: GGMorphism) -> GGMorphism:
    """``outer o inner``."""
    if inner.target.graph != outer.source.graph:
        raise MorphismError("inner target is not the outer source")
    S = inner.source.graph
    M = inner.target.graph
    vmap = {u: outer.vmap[inner.vmap[u]] for u in S.vertices}
    emap = {f: outer.emap[inner.emap[f]] for f in S.edges}
    vh = {u: outer.vertex_hom[inner.vmap[u]].compose(inner.vertex_hom[u]) for u in S.vertices}
    eh = {f: inner.edge_hom[f] * outer.edge_hom[inner.emap[f]] for f in S.edges}
    o, t = {}, {}
    for f in S.edges:
        g = inner.emap[f]
        A = outer.target.group(outer.vmap[M.alpha(g)])
        B = outer.target.group(outer.vmap[M.omega(g)])
        o[f] = A.mul(outer.vertex_hom[M.alpha(g)](inner.o[f]), outer.o[g])
        t[f] = B.mul(outer.t[g], outer.vertex_hom[M.omega(g)](inner.t[f]))
    return GGMorphism(inner.source, outer.target, vmap, emap, vh, eh, o, t)


def restrict(m: GGMorphism, sub: GraphOfGroups) -> GGMorphism:
    return compose(m, inclusion(sub, m.source))


# ----------------------------------------------------------------- foldedness

@dataclass(frozen=True)
class Violation:
    kind: str  # "F0", "F1" or "F2"
    data: Mapping = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **{k: _jsonable(v) for k, v in self.data.items()}}


def _jsonable(v):
    if isinstance(v, tuple) and all(isinstance(x, tuple) and len(x) == 2 for x in v):
        return word_to_json(v)
    return v


@dataclass(frozen=True)
class FoldVerdict:
    status: str  # "folded", "not_folded" or "unknown"
    violations: tuple[Violation, ...] = ()
    undecided: tuple[str, ...] = ()

    @property
    def folded(self) -> bool | None:
        return {"folded": True, "not_folded": False}.get(self.status)

    def first(self, kind: str | None = None) -> Violation | None:
        for v in self.violations:
            if kind is None or v.kind == kind:
                return v
        return None

    def to_json(self) -> dict:
        return {"status": self.status, "violations": [v.to_json() for v in self.violations],
                "undecided": list(self.undecided)}


def f1_witness(m: GGMorphism, f1: str, f2: str, window: int = 12) -> tuple[bool | None, tuple | None]:
    """Decide ``o_f2 in phi_x(B_x) o_f1 alpha_e(A_e)``; witness ``(b, n)``."""
    S, T = m.source.graph, m.target.graph
    x = S.alpha(f1)
    e = m.emap[f1]
    A = m.target.group(T.alpha(e))
    h = m.vertex_hom[x]
    o1, o2 = m.o[f1], m.o[f2]
    if m.target.edge_order[e] == 1:
        ok, b = h.preimage(A.mul(o2, A.inv(o1)))
        return ok, ((b, 0) if ok else None)
    y = m.target.bm(e)
    if m.source.group(x).rank == 0:
        n = A.is_power_of(A.mul(A.inv(o1), o2), y)
        return (True, (IDENTITY, n)) if n is not None else (False, None)
    order = A.order_of(y)
    exps = range(order) if order else sorted(range(-window, window + 1), key=lambda n: (abs(n), n))
    unknown = False
    for n in exps:
        ok, b = h.preimage(A.mul(o2, A.power(y, -n), A.inv(o1)))
        if ok:
            return True, (b, n)
        if ok is None:
            unknown = True
    if order and not unknown:
        return False, None
    return None, None


def is_folded(m: GGMorphism, window: int = 12) -> FoldVerdict:
    S, T = m.source.graph, m.target.graph
    viol: list[Violation] = []
    undecided: list[str] = []
    injective: dict[str, bool | None] = {}
    for u in S.vertices:
        ok, w = m.vertex_hom[u].is_injective()
        injective[u] = ok
        if ok is False:
            viol.append(Violation("F0", {"vertex": u, "kernel": w}))
        elif ok is None:
            undecided.append(f"F0 at {u}")
    for u in S.vertices:
        st = S.star(u)
        for i, f1 in enumerate(st):
            for f2 in st[i + 1:]:
                if m.emap[f1] != m.emap[f2]:
                    continue
                ok, wit = f1_witness(m, f1, f2, window)
                if ok:
                    b, n = wit
                    viol.append(Violation("F1", {"f1": f1, "f2": f2, "b": b, "c": n}))
                elif ok is None:
                    undecided.append(f"F1 at {f1},{f2}")
    for f in sorted(S.edges):
        e = m.emap[f]
        na = m.target.edge_order[e]
        if na == 1 or injective[S.alpha(f)] is not True:
            continue
        A = m.target.group(T.alpha(e))
        h = m.vertex_hom[S.alpha(f)]
        y = m.target.bm(e)
        k = m.edge_hom[f] if m.source.edge_order[f] != 1 else 0
        if na:
            cands = [n for n in range(1, na) if n % gcd(k, na)]
            exact = True
        elif k:
            cands = [n for n in range(1, abs(k))]
            exact = True
        else:
            cands = list(range(1, window + 1))
            exact = False
        found = False
        for n in cands:
            ok, b = h.preimage(A.conj(m.o[f], A.power(y, n)))
            if ok:
                viol.append(Violation("F2", {"edge": f, "n": n, "b": b}))
                found = True
                break
            if ok is None:
                exact = False
        if not found and not exact:
            undecided.append(f"F2 at {f}")
    if viol:
        return FoldVerdict("not_folded", tuple(viol), tuple(undecided))
    if undecided:
        return FoldVerdict("unknown", (), tuple(undecided))
    return FoldVerdict("folded")


def _image_set(h: FpcHom) -> set[FpcWord]:
    T = h.target
    out = {IDENTITY}
    frontier = [IDENTITY]
    gens = [T.normalize(w) for w in h.images]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = T.mul(x, g)
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return out


def locally_surjective(m: GGMorphism, x: str) -> tuple[bool, dict]:
    """Check local surjectivity at ``x``; needs a finite target vertex group."""
    S, T = m.source.graph, m.target.graph
    v = m.vmap[x]
    A = m.target.group(v)
    if not A.is_finite():
        raise MorphismError("local surjectivity is only decided for finite target vertex groups")
    img = _image_set(m.vertex_hom[x])
    full = set(A.elements())
    report = {}
    ok = True
    for e in T.star(v):
        edge_sub = {A.power(m.target.bm(e), n) for n in range(max(1, A.cardinality()))}
        covered: set[FpcWord] = set()
        cosets = []
        for f in S.star(x):
            if m.emap[f] != e:
                continue
            c = {A.mul(a, m.o[f], z) for a in img for z in edge_sub}
            cosets.append((f, len(c)))
            covered |= c
        report[e] = {"cosets": cosets, "covered": len(covered), "order": len(full)}
        if covered != full:
            ok = False
    return ok, report


# ----------------------------------------------------------------- complexity

@dataclass(frozen=True)
class ComplexityReport:
    rank: int | None
    torsion: int | None
    edge_count: int
    nontrivial_edge_pairs: int
    c_E: Fraction | None

    @property
    def c(self) -> tuple | None:
        if self.rank is None:
            return None
        return (self.rank, self.rank - self.torsion, self.edge_count)

    @property
    def d(self) -> tuple:
        return (self.nontrivial_edge_pairs, self.c_E)

    def to_json(self) -> dict:
        ce = self.c_E
        return {"rank": self.rank, "torsion": self.torsion, "edge_count": self.edge_count,
                "c": list(self.c) if self.c else None,
                "nontrivial_edge_pairs": self.nontrivial_edge_pairs,
                "c_E": None if ce is None else (int(ce) if ce.denominator == 1 else str(ce))}


def edge_index(m: GGMorphism, f: str) -> int | None:
    """``|A_phi(f) : phi_f(B_f)|``; ``None`` for infinite index."""
    e = m.emap[f]
    na = m.target.edge_order[e]
    k = m.edge_hom[f] if m.source.edge_order[f] != 1 else 0
    if na == 1:
        return 1
    if na:
        return gcd(k, na)
    return abs(k) if k else None


def complexity(m: GGMorphism | GraphOfGroups, base: str | None = None) -> ComplexityReport:
    gog = m.source if isinstance(m, GGMorphism) else m
    g = gog.graph
    rank = torsion = None
    if gog.has_trivial_edges() and g.is_connected() and g.vertices:
        sp = TreeSplitting(gog, base or g.vertices[0])
        rank, torsion = sp.rank, sp.torsion
    pairs = sum(1 for e, _ in g.edge_pairs() if gog.edge_order[e] != 1)
    ce: Fraction | None = Fraction(0)
    if isinstance(m, GGMorphism):
        for f in g.edges:
            if gog.edge_order[f] == 1:
                continue
            idx = edge_index(m, f)
            if idx is None:
                ce = None
                break
            ce += Fraction(idx, 2)
    return ComplexityReport(rank, torsion, len(g.edges), pairs, ce)


def complexity_less(a: ComplexityReport, b: ComplexityReport, which: str = "c") -> bool:
    return (a.c < b.c) if which == "c" else (a.d < b.d)
