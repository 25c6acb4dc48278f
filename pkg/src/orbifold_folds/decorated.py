"""Decorated morphisms over the graph of groups of a small orientable orbifold.

The target graph of groups has two vertices ``v1``, ``v2`` carrying the cone
groups and one edge pair ``e_i``/``E_i`` per boundary component.  Membership
questions in its fundamental group are answered in the free product of cyclic
groups obtained by collapsing the edge ``e1`` (a spanning tree).

Indices of decorated paths (``j``) are 1-based throughout the public API.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .fpc_words import FpcGroup, FpcHom, FpcWord, IDENTITY, word_from_json, word_to_json
from .gg_morphism import GGMorphism, _image_set, check_morphism, f1_witness, induced_image, make_morphism
from .graph_core import Graph
from .graph_of_groups import (APath, GraphOfGroups, PathError, TreeSplitting, check_path, concat,
                              inverse_path, path_power, pi1_from_path, reduce, vertex_path)
from .moves import PathMap, a2_inverse, elementary_fold_iiia, fold, move_a2
from .orbifolds import OrbifoldSpec, is_small, presentation

V1, V2 = "v1", "v2"

PathFn = Callable[[APath], APath]


class DecoratedError(ValueError):
    pass


# ------------------------------------------------------------------ target graph of groups

@dataclass(frozen=True, eq=False)
class SmallOrbGraph:
    spec: OrbifoldSpec
    gog: GraphOfGroups
    boundary_paths: tuple[APath, ...]
    theta: Mapping[str, APath]
    splitting: TreeSplitting = field(repr=False)

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def group(self) -> FpcGroup:
        return self.splitting.group

    def index(self, d: int) -> int:
        return (d - 1) % self.q + 1

    def edge(self, d: int, sign: int = 1) -> str:
        k = self.index(d)
        return f"e{k}" if sign > 0 else f"E{k}"

    @staticmethod
    def edge_index(e: str) -> tuple[int, int]:
        return int(e[1:]), (1 if e[0] == "e" else -1)

    @staticmethod
    def epsilon(i: int) -> int:
        return 1 if i == 1 else 0

    def order(self, v: str) -> int:
        A = self.gog.group(v)
        return A.orders[0] if A.rank else 1

    def s_power(self, v: str, k: int) -> FpcWord:
        A = self.gog.group(v)
        return A.normalize(((0, k),)) if A.rank else IDENTITY

    def s_exponent(self, v: str, a: FpcWord) -> int:
        return a[0][1] if a else 0

    def c(self, i: int) -> APath:
        return self.boundary_paths[self.index(i) - 1]

    def word(self, p: APath) -> FpcWord:
        return self.splitting.path_word(p)

    def t_word(self, i: int) -> FpcWord:
        return self.word(self.c(i))

    def format(self, w: FpcWord) -> str:
        return self.group.format(w)

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "gog": self.gog.to_json(),
                "boundary_paths": [c.to_json() for c in self.boundary_paths],
                "theta": {k: v.to_json() for k, v in sorted(self.theta.items())},
                "basis": list(self.group.names)}


def build_AO(spec: OrbifoldSpec) -> SmallOrbGraph:
    """The two-vertex graph of groups of a small orientable orbifold."""
    if not spec.orientable or not is_small(spec):
        raise DecoratedError(f"{spec.label()} is not a small orientable orbifold")
    q = spec.q
    orders = list(spec.cone_orders) + [1] * (2 - spec.r)
    groups = {v: FpcGroup((p,), ("s",)) if p > 1 else FpcGroup(()) for v, p in zip((V1, V2), orders)}
    pairs = [(f"e{i}", f"E{i}", V1, V2) for i in range(1, q + 1)]
    gog = GraphOfGroups.trivial_edges(Graph.build((V1, V2), pairs), groups)
    s1 = ((0, 1),) if orders[0] > 1 else IDENTITY
    s2 = ((0, 1),) if orders[1] > 1 else IDENTITY
    cs = []
    for i in range(1, q + 1):
        eps = 1 if i == 1 else 0
        cs.append(APath(V1, (s1 if eps else IDENTITY, s2 if eps else IDENTITY, IDENTITY),
                        (f"e{i}", f"E{i % q + 1}")))
    theta = {f"t{i}": cs[i - 1] for i in range(1, q + 1)}
    if spec.r >= 1:
        theta["s1"] = vertex_path(V1, s1)
    if spec.r >= 2:
        theta["s2"] = APath(V1, (IDENTITY, s2, IDENTITY), ("e1", "E1"))
    return SmallOrbGraph(spec, gog, tuple(cs), theta, TreeSplitting(gog, V1))


def check_theta(sg: SmallOrbGraph) -> list[str]:
    """Relators of the orbifold presentation die under theta, by two routes."""
    errs = []
    G = sg.group
    gog = sg.gog
    pres = presentation(sg.spec)
    for rel in pres.relators:
        w = IDENTITY
        p = vertex_path(V1)
        for name, e in rel:
            w = G.mul(w, G.power(sg.word(sg.theta[name]), e))
            p = concat(gog, p, path_power(gog, sg.theta[name], e))
        text = pres.format_word(rel)
        if w:
            errs.append(f"relator {text} survives in the free-product route")
        if not pi1_from_path(gog, p).is_identity():
            errs.append(f"relator {text} survives in the normal-form route")
    last = sg.boundary_paths[-1]
    if last.edges != (f"e{sg.q}", "E1"):
        errs.append("last boundary path does not wrap around to e1")
    return errs


# ------------------------------------------------------------------ decorated morphisms

@dataclass(frozen=True)
class BoundaryDecomposition:
    i: int
    z: int
    a: FpcWord
    shift: int

    def to_json(self) -> dict:
        return {"i": self.i, "z": self.z, "a": word_to_json(self.a), "shift": self.shift}


@dataclass(frozen=True, eq=False)
class DecoratedMorphism:
    sg: SmallOrbGraph
    morphism: GGMorphism
    base: str
    paths: tuple[APath, ...]
    gammas: tuple[APath, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def source(self) -> GraphOfGroups:
        return self.morphism.source

    @property
    def n(self) -> int:
        return len(self.paths)

    def decomposition(self, j: int) -> BoundaryDecomposition:
        if j not in self._cache:
            self._cache[j] = decompose_boundary_image(self.sg, self, j)
        return self._cache[j]

    def replace(self, **kw) -> "DecoratedMorphism":
        data = dict(sg=self.sg, morphism=self.morphism, base=self.base, paths=self.paths,
                    gammas=self.gammas)
        data.update(kw)
        return make_dm(**data)

    def to_json(self) -> dict:
        return {"orbifold": self.sg.spec.to_json(), "morphism": self.morphism.to_json(),
                "base": self.base, "paths": [p.to_json() for p in self.paths],
                "gammas": [g.to_json() for g in self.gammas]}

    @classmethod
    def from_json(cls, data) -> "DecoratedMorphism":
        sg = build_AO(OrbifoldSpec.from_json(data["orbifold"]))
        m = GGMorphism.from_json(data["morphism"])
        paths = tuple(APath.from_json(p) for p in data["paths"])
        gammas = data.get("gammas")
        if gammas is None:
            gam = tuple(vertex_path(data["base"]) for _ in paths)
        else:
            gam = tuple(APath.from_json(g) for g in gammas)
        return make_dm(sg, m, data["base"], paths, gam)


def validate_dm(sg: SmallOrbGraph, m: GGMorphism, base: str, paths: Sequence[APath],
                gammas: Sequence[APath]) -> list[str]:
    errs = list(check_morphism(m))
    if errs:
        return errs
    if m.target != sg.gog:
        return ["morphism does not target the orbifold graph of groups"]
    if not m.source.has_trivial_edges():
        errs.append("source edge groups must be trivial")
    if not m.source.graph.has_vertex(base) or m.vmap[base] != V1:
        errs.append("base vertex must map to v1")
    if len(paths) != len(gammas):
        errs.append("one connecting path per decorated path is required")
    if errs:
        return errs
    for j, (p, g) in enumerate(zip(paths, gammas), 1):
        try:
            check_path(m.source, p)
            check_path(m.source, g)
        except PathError as exc:
            errs.append(f"path {j}: {exc}")
            continue
        if p.end(m.source) != p.start:
            errs.append(f"path {j} is not closed")
        if g.start != base or g.end(m.source) != p.start:
            errs.append(f"connecting path {j} must run from the base to the start of path {j}")
    return errs


def make_dm(sg: SmallOrbGraph, morphism: GGMorphism, base: str, paths: Sequence[APath],
            gammas: Sequence[APath] | None = None) -> DecoratedMorphism:
    if gammas is None:
        gammas = [vertex_path(base) for _ in paths]
    errs = validate_dm(sg, morphism, base, paths, gammas)
    if errs:
        raise DecoratedError("; ".join(errs))
    dm = DecoratedMorphism(sg, morphism, base, tuple(paths), tuple(gammas))
    for j in range(1, dm.n + 1):
        dm.decomposition(j)
    return dm


def rotate(gog: GraphOfGroups, p: APath, s: int) -> tuple[APath, APath]:
    """Cyclic permutation ``p2 p1`` of the closed path ``p = p1 p2`` cut after ``s`` edges."""
    if p.end(gog) != p.start:
        raise PathError("path is not closed")
    if s == 0:
        return p, vertex_path(p.start)
    p1 = APath(p.start, p.elements[:s] + (IDENTITY,), p.edges[:s])
    mid = gog.graph.omega(p.edges[s - 1])
    p2 = APath(mid, p.elements[s:], p.edges[s:])
    return concat(gog, p2, p1), p1


def match_boundary_pattern(sg: SmallOrbGraph, Q: APath) -> tuple[int, int, FpcWord] | None:
    """``(i, z, a)`` with ``Q = a c_i^z a^-1`` as sequences, or ``None``."""
    k = Q.length
    if k == 0 or k % 2 or Q.start != V1 or Q.edges[0][0] != "e":
        return None
    i = int(Q.edges[0][1:])
    up, down = sg.edge(i), sg.edge(i + 1, -1)
    for m, e in enumerate(Q.edges):
        if e != (down if m % 2 else up):
            return None
    eps = sg.epsilon(i)
    s1e, s2e = sg.s_power(V1, eps), sg.s_power(V2, eps)
    for m in range(1, k):
        if Q.elements[m] != (s2e if m % 2 else s1e):
            return None
    A1 = sg.gog.group(V1)
    a = A1.mul(Q.elements[0], A1.inv(s1e))
    if Q.elements[k] != A1.inv(a):
        return None
    return i, k // 2, a


def decompose_boundary_image(sg: SmallOrbGraph, dm: DecoratedMorphism, j: int) -> BoundaryDecomposition:
    p = dm.paths[j - 1]
    for s in range(p.length):
        q, _ = rotate(dm.source, p, s)
        hit = match_boundary_pattern(sg, induced_image(dm.morphism, q))
        if hit is not None:
            return BoundaryDecomposition(hit[0], hit[1], hit[2], s)
    raise DecoratedError(f"path {j} maps to no conjugate of a boundary power")


def redecorate(dm: DecoratedMorphism, j: int, shift: int) -> DecoratedMorphism:
    """Replace ``p_j = p1 p2`` by ``p2 p1`` and ``gamma_j`` by ``gamma_j p1``."""
    p = dm.paths[j - 1]
    q, p1 = rotate(dm.source, p, shift)
    paths = list(dm.paths)
    gammas = list(dm.gammas)
    paths[j - 1] = q
    gammas[j - 1] = concat(dm.source, dm.gammas[j - 1], p1)
    return dm.replace(paths=tuple(paths), gammas=tuple(gammas))


def avoid_start(dm: DecoratedMorphism, u: str) -> DecoratedMorphism:
    """Redecorate so that no decorated path starts at ``u``."""
    out = dm
    for j, p in enumerate(dm.paths, 1):
        if p.start != u:
            continue
        verts = p.vertices(dm.source)
        s = next((s for s in range(1, p.length) if verts[s] != u), None)
        if s is None:
            raise DecoratedError(f"path {j} never leaves {u}")
        out = redecorate(out, j, s)
    return out


# ------------------------------------------------------------------ decorated groups

@dataclass(frozen=True)
class Peripheral:
    word: FpcWord
    o: FpcWord
    i: int
    z: int


@dataclass(frozen=True, eq=False)
class DecoratedGroup:
    """``group`` with ``eta`` into the orbifold group and typed peripheral subgroups."""

    sg: SmallOrbGraph
    group: FpcGroup
    eta: FpcHom
    peripherals: tuple[Peripheral, ...]
    complement: tuple[int, ...] | None = None
    splitting: TreeSplitting | None = field(default=None, repr=False)
    coords: FpcHom | None = field(default=None, repr=False)

    def word_of(self, p: APath) -> FpcWord:
        """Word of a loop at the base point in this group's basis."""
        if self.splitting is None:
            raise DecoratedError("decorated group carries no splitting")
        w = self.splitting.path_word(p)
        return self.coords(w) if self.coords is not None else w

    def peripheral_image(self, j: int) -> FpcWord:
        P = self.peripherals[j - 1]
        G = self.sg.group
        return G.conj(P.o, G.power(self.sg.t_word(P.i), P.z))

    def check(self) -> list[str]:
        errs = []
        for j, P in enumerate(self.peripherals, 1):
            img = self.eta(P.word)
            if not img:
                errs.append(f"peripheral {j} has trivial image")
            if img != self.peripheral_image(j):
                errs.append(f"peripheral {j}: image differs from o c^z o^-1")
        return errs

    def to_json(self) -> dict:
        G, T = self.group, self.sg.group
        return {
            "basis": list(G.names),
            "orders": list(G.orders),
            "eta": {G.factor_name(k): T.format(w) for k, w in enumerate(self.eta.images)},
            "peripherals": [{"word": G.format(P.word), "o": T.format(P.o), "i": P.i, "z": P.z}
                            for P in self.peripherals],
            "complement": None if self.complement is None else [G.factor_name(k) for k in self.complement],
        }


def _peripheral(dm: DecoratedMorphism, split: TreeSplitting, j: int) -> Peripheral:
    sg, B = dm.sg, dm.source
    d = dm.decomposition(j)
    p, g = dm.paths[j - 1], dm.gammas[j - 1]
    _, p1 = rotate(B, p, d.shift)
    word = split.path_word(concat(B, g, p, inverse_path(B, g)))
    img = induced_image(dm.morphism, concat(B, g, p1))
    o = sg.word(concat(sg.gog, img, vertex_path(V1, d.a)))
    return Peripheral(word, o, d.i, d.z)


def induced_decorated_group(sg: SmallOrbGraph, dm: DecoratedMorphism, collapse: bool = False) -> DecoratedGroup:
    """Decorated group of ``dm`` on the spanning-tree basis of ``pi1(B, u1)``.

    With ``collapse`` the basis is changed to the complement of a collapsing
    order plus one free generator per decorated path.
    """
    if not collapse:
        split = TreeSplitting(dm.source, dm.base)
        imgs = tuple(sg.word(induced_image(dm.morphism, split.generator_loop(k)))
                     for k in range(split.rank))
        eta = FpcHom(split.group, sg.group, imgs)
        per = tuple(_peripheral(dm, split, j) for j in range(1, dm.n + 1))
        return DecoratedGroup(sg, split.group, eta, per, None, split)
    order = collapsing_order(dm)
    if order is None:
        raise DecoratedError("decorated morphism is not collapsible")
    return _collapsed_group(sg, dm, order)


def _collapsed_group(sg: SmallOrbGraph, dm: DecoratedMorphism, order: "CollapsingOrder") -> DecoratedGroup:
    B = dm.source
    split = TreeSplitting(B, dm.base, avoid=order.edges)
    G = split.group
    n = len(order.edges)
    ys = [split.loop_index[f] for f in order.edges]  # (factor, sign)
    yset = {k for k, _ in ys}
    comp = [k for k in range(G.rank) if k not in yset]
    names = [G.factor_name(k) for k in comp] + [f"h{order.nu[k]}" for k in range(n)]
    H = FpcGroup(tuple(G.orders[k] for k in comp) + (0,) * n, tuple(names))
    cidx = {k: i for i, k in enumerate(comp)}
    W = [split.path_word(dm.paths[order.nu[k] - 1]) for k in range(n)]
    psi: dict[int, FpcWord] = {k: ((cidx[k], 1),) for k in comp}
    for k in reversed(range(n)):
        yk, sign = ys[k]
        w = W[k]
        pos = [t for t, (f, _) in enumerate(w) if f == yk]
        if len(pos) != 1 or abs(w[pos[0]][1]) != 1:
            raise DecoratedError("collapsing order does not isolate its edge")
        t = pos[0]
        A, Bw = w[:t], w[t + 1:]
        e = w[t][1]
        to_h = lambda x: H.normalize(l for f, ex in x for l in H.power(psi[f], ex))
        core = H.mul(H.inv(to_h(A)), ((len(comp) + k, 1),), H.inv(to_h(Bw)))
        psi[yk] = core if e == 1 else H.inv(core)
    fwd = FpcHom(G, H, tuple(psi[k] for k in range(G.rank)))
    back = FpcHom(H, G, tuple(((k, 1),) for k in comp) + tuple(W))
    if any(fwd(back.images[k]) != ((k, 1),) for k in range(H.rank)):
        raise DecoratedError("collapsed basis change is not invertible")
    imgs = tuple(sg.word(induced_image(dm.morphism, split.generator_loop(k))) for k in range(G.rank))
    eta = FpcHom(G, sg.group, imgs).compose(back)
    per = []
    for j in range(1, dm.n + 1):
        P = _peripheral(dm, split, j)
        per.append(Peripheral(fwd(P.word), P.o, P.i, P.z))
    return DecoratedGroup(sg, H, eta, tuple(per), tuple(range(len(comp))), split, fwd)


# ------------------------------------------------------------------ crossings, squares, collapsibility

def crossings(dm: DecoratedMorphism, j: int) -> dict[str, int]:
    out: dict[str, int] = {}
    for e in dm.paths[j - 1].edges:
        out[e] = out.get(e, 0) + 1
    return out


def pair_crossings(dm: DecoratedMorphism, j: int) -> dict[str, int]:
    """Crossings per edge pair, keyed by the smaller edge id of the pair."""
    S = dm.source.graph
    out: dict[str, int] = {}
    for e in dm.paths[j - 1].edges:
        key = min(e, S.inv(e))
        out[key] = out.get(key, 0) + 1
    return out


@dataclass(frozen=True)
class SquareFold:
    kind: str  # "peripheral" (two paths) or "self" (one path twice)
    edge: str
    paths: tuple[int, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "edge": self.edge, "paths": list(self.paths)}


def folds_squares(dm: DecoratedMorphism) -> SquareFold | None:
    cr = [crossings(dm, j) for j in range(1, dm.n + 1)]
    for j in range(dm.n):
        for k in range(j + 1, dm.n):
            if dm.decomposition(j + 1).i != dm.decomposition(k + 1).i:
                continue
            common = sorted(set(cr[j]) & set(cr[k]))
            if common:
                return SquareFold("peripheral", common[0], (j + 1, k + 1))
    for j in range(dm.n):
        twice = sorted(e for e, c in cr[j].items() if c >= 2)
        if twice:
            return SquareFold("self", twice[0], (j + 1,))
    return None


@dataclass(frozen=True)
class CollapsingOrder:
    edges: tuple[str, ...]
    nu: tuple[int, ...]

    def to_json(self) -> dict:
        return {"edges": list(self.edges), "nu": list(self.nu)}


def collapsing_order(dm: DecoratedMorphism, max_paths: int = 16) -> CollapsingOrder | None:
    """Backtracking over removal orders, memoized on the set of remaining paths."""
    if dm.n > max_paths:
        raise DecoratedError(f"collapsibility search is capped at {max_paths} paths")
    pc = {j: pair_crossings(dm, j) for j in range(1, dm.n + 1)}
    S = dm.source.graph
    dead: set[frozenset[int]] = set()

    def private(j: int, rest: frozenset[int]) -> list[str]:
        return [key for key in sorted(pc[j])
                if pc[j][key] == 1 and not any(key in pc[k] for k in rest if k != j)]

    def search(rest: frozenset[int]) -> list[tuple[int, str]] | None:
        if not rest:
            return []
        if rest in dead:
            return None
        for j in sorted(rest):
            keys = private(j, rest)
            if not keys:
                continue
            tail = search(rest - {j})
            if tail is not None:
                return [(j, keys[0])] + tail
        dead.add(rest)
        return None

    found = search(frozenset(range(1, dm.n + 1)))
    if found is None:
        return None
    edges, nu = [], []
    for j, key in found:
        edges.append(next(e for e in dm.paths[j - 1].edges if e in (key, S.inv(key))))
        nu.append(j)
    return CollapsingOrder(tuple(edges), tuple(nu))


def verify_collapsing_order(dm: DecoratedMorphism, order: CollapsingOrder) -> list[str]:
    errs = []
    S = dm.source.graph
    if sorted(order.nu) != list(range(1, dm.n + 1)):
        return ["nu is not a bijection onto the decorated paths"]
    pairs = [frozenset((f, S.inv(f))) for f in order.edges]
    if len(set(pairs)) != len(pairs):
        errs.append("an edge pair is used twice")
    for k, (f, j) in enumerate(zip(order.edges, order.nu)):
        earlier = set().union(*pairs[:k]) if k else set()
        es = dm.paths[j - 1].edges
        if sum(1 for e in es if e in pairs[k]) != 1 or f not in es:
            errs.append(f"path {j} does not cross {f} exactly once")
        if any(e in earlier for e in es):
            errs.append(f"path {j} crosses an earlier removed edge")
    return errs


@dataclass(frozen=True)
class TameReport:
    tame: bool
    reasons: Mapping[str, object]

    def __bool__(self) -> bool:
        return self.tame

    def to_json(self) -> dict:
        return {"tame": self.tame, "reasons": dict(self.reasons)}


def is_tame(sg: SmallOrbGraph, dm: DecoratedMorphism) -> TameReport:
    reasons: dict[str, object] = {}
    for u in dm.source.graph.vertices:
        ok, w = dm.morphism.vertex_hom[u].is_injective()
        if ok is not True:
            reasons["vertex_injective"] = {"vertex": u, "kernel": None if w is None else word_to_json(w),
                                           "decided": ok is not None}
            break
    if collapsing_order(dm) is None:
        reasons["collapsible"] = "no collapsing order exists"
    sq = folds_squares(dm)
    if sq is not None:
        reasons["folds_squares"] = sq.to_json()
    return TameReport(not reasons, reasons)


# ------------------------------------------------------------------ local graphs

@dataclass(frozen=True)
class Component:
    kind: str  # "circle" or "interval"
    nodes: tuple[str, ...]
    labels: tuple[tuple[int, FpcWord], ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "nodes": list(self.nodes),
                "labels": [[j, word_to_json(b)] for j, b in self.labels]}


@dataclass(frozen=True)
class LocalGraph:
    vertex: str
    nodes: tuple[str, ...]
    edges: Mapping[str, tuple[str, int, FpcWord]]

    def predecessor(self, g: str) -> str | None:
        for f, (h, _, _) in self.edges.items():
            if h == g:
                return f
        return None

    def components(self) -> list[Component]:
        pred = {g: f for f, (g, _, _) in self.edges.items()}
        seen: set[str] = set()
        out = []
        for start in self.nodes:
            if start in seen or start in pred:
                continue
            nodes, labels = [start], []
            x = start
            while x in self.edges:
                g, j, b = self.edges[x]
                labels.append((j, b))
                nodes.append(g)
                x = g
            seen.update(nodes)
            out.append(Component("interval", tuple(nodes), tuple(labels)))
        for start in self.nodes:
            if start in seen:
                continue
            nodes, labels = [start], []
            x = start
            while True:
                g, j, b = self.edges[x]
                labels.append((j, b))
                if g == start:
                    break
                nodes.append(g)
                x = g
            seen.update(nodes)
            out.append(Component("circle", tuple(nodes), tuple(labels)))
        return out

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "nodes": list(self.nodes),
                "edges": [{"from": f, "to": g, "label": [j, word_to_json(b)]}
                          for f, (g, j, b) in sorted(self.edges.items())],
                "components": [c.to_json() for c in self.components()]}

    def to_dot(self, group: FpcGroup | None = None) -> str:
        fmt = group.format if group is not None else (lambda w: str(list(w)) if w else "1")
        lines = [f'digraph "local_{self.vertex}" {{']
        for f in self.nodes:
            lines.append(f'  "{f}";')
        for f, (g, j, b) in sorted(self.edges.items()):
            lines.append(f'  "{f}" -> "{g}" [label="({j},{fmt(b)})"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def transitions(dm: DecoratedMorphism) -> Iterator[tuple[int, str, str, FpcWord, str]]:
    """Every ``(j, vertex, incoming edge, element, outgoing edge)`` of the cyclic paths."""
    S = dm.source.graph
    for j, p in enumerate(dm.paths, 1):
        k = p.length
        for t in range(k):
            e_in = p.edges[t - 1]
            if t == 0:
                b = dm.source.group(p.start).mul(p.elements[k], p.elements[0])
            else:
                b = p.elements[t]
            yield j, S.alpha(p.edges[t]), e_in, b, p.edges[t]


def local_graph(dm: DecoratedMorphism, u: str) -> LocalGraph:
    sq = folds_squares(dm)
    if sq is not None:
        raise DecoratedError(f"local graph undefined: decorated morphism folds squares ({sq.kind} at {sq.edge})")
    S = dm.source.graph
    edges: dict[str, tuple[str, int, FpcWord]] = {}
    targets: set[str] = set()
    for j, v, e_in, b, e_out in transitions(dm):
        if v != u:
            continue
        f = S.inv(e_in)
        if f in edges or e_out in targets:
            raise DecoratedError(f"local graph at {u} has a branching node at {f}")
        edges[f] = (e_out, j, b)
        targets.add(e_out)
    return LocalGraph(u, tuple(S.star(u)), edges)


def check_local_path_formulas(dm: DecoratedMorphism, u: str, nodes: Sequence[str],
                              labels: Sequence[tuple[int, FpcWord]] | None = None) -> list[str]:
    """Check the o-formula, the image-edge formula and the index recursion along a path."""
    sg, m = dm.sg, dm.morphism
    lg = None
    if labels is None:
        lg = local_graph(dm, u)
        labels = []
        for f, g in zip(nodes, nodes[1:]):
            if f not in lg.edges or lg.edges[f][0] != g:
                return [f"{f} -> {g} is not an edge of the local graph"]
            labels.append(lg.edges[f][1:])
    v = m.vmap[u]
    A = sg.gog.group(v)
    h = m.vertex_hom[u]
    sign = 1 if v == V1 else -1
    errs = []
    l = len(labels)
    if len(nodes) != l + 1:
        return ["a path with l edges has l + 1 nodes"]
    if l == 0:
        return []
    i1 = dm.decomposition(labels[0][0]).i
    i0 = i1 + 1 if sign == 1 else i1
    if m.emap[nodes[0]] != sg.edge(i0, sign):
        errs.append(f"image of {nodes[0]} is {m.emap[nodes[0]]}, expected {sg.edge(i0, sign)}")
    bprod = IDENTITY
    esum = 0
    B = dm.source.group(u)
    for t in range(1, l + 1):
        j, b = labels[t - 1]
        it = dm.decomposition(j).i
        if sg.index(it) != sg.index(i1 - sign * (t - 1)):
            errs.append(f"index of path {j} at step {t} breaks the recursion")
        bprod = B.mul(bprod, b)
        esum += sg.epsilon(it)
        want = A.mul(A.inv(h(bprod)), m.o[nodes[0]], sg.s_power(v, esum))
        if m.o[nodes[t]] != want:
            errs.append(f"o of {nodes[t]} violates the product formula")
        if m.emap[nodes[t]] != sg.edge(i0 - sign * t, sign):
            errs.append(f"image of {nodes[t]} violates the edge formula")
    return errs


def check_circle(dm: DecoratedMorphism, u: str, comp: Component) -> list[str]:
    """Divisibility, the label product ``s_v^k`` and the coset covering on a circle."""
    if comp.kind != "circle":
        return ["component is not a circle"]
    sg, m = dm.sg, dm.morphism
    nodes = list(comp.nodes) + [comp.nodes[0]]
    errs = check_local_path_formulas(dm, u, nodes, comp.labels)
    l = len(comp.labels)
    if l % sg.q:
        return errs + [f"circle length {l} is not divisible by {sg.q}"]
    k = l // sg.q
    v = m.vmap[u]
    A = sg.gog.group(v)
    B = dm.source.group(u)
    h = m.vertex_hom[u]
    bprod = B.mul(*[b for _, b in comp.labels]) if comp.labels else IDENTITY
    if h(bprod) != sg.s_power(v, k):
        errs.append("product of labels does not map to s_v^k")
    esum = sum(sg.epsilon(dm.decomposition(j).i) for j, _ in comp.labels)
    if esum != k:
        errs.append(f"epsilon sum {esum} differs from {k}")
    image = _image_set(h)
    if sg.s_power(v, k) not in image:
        errs.append("s_v^k is not in the vertex image")
    full = set(A.elements())
    for e in sorted(sg.gog.graph.star(v)):
        over = [f for f in comp.nodes if m.emap[f] == e]
        if len(over) != k:
            errs.append(f"{len(over)} circle nodes over {e}, expected {k}")
        cover = {A.mul(x, m.o[f]) for x in image for f in over}
        if cover != full:
            errs.append(f"cosets over {e} do not cover the vertex group")
    return errs


# ------------------------------------------------------------------ moves on decorated morphisms

@dataclass(frozen=True)
class DmMove:
    dm: DecoratedMorphism
    forward: PathFn
    backward: PathFn
    steps: tuple[str, ...] = ()


def _transport(dm: DecoratedMorphism, morphism: GGMorphism, base: str, fn: PathFn) -> DecoratedMorphism:
    return make_dm(dm.sg, morphism, base, [fn(p) for p in dm.paths], [fn(g) for g in dm.gammas])


def dm_a2(dm: DecoratedMorphism, f: str, b: FpcWord) -> DmMove:
    new, sig = move_a2(dm.morphism, f, b)
    inv = a2_inverse(dm.morphism, f, b, new.source)
    fwd = lambda p: induced_image(sig, p)
    return DmMove(_transport(dm, new, dm.base, fwd), fwd, inv.apply, ("A2",))


def dm_fold(dm: DecoratedMorphism, f1: str, f2: str, witness: tuple[FpcWord, int] | None = None,
            counter: int = 0) -> DmMove:
    res = fold(dm.morphism, f1, f2, witness, counter, base=dm.base)
    fwd = lambda p: induced_image(res.sigma, p)
    return DmMove(_transport(dm, res.morphism, res.sigma.vmap[dm.base], fwd), fwd,
                  res.inverse.apply, res.steps)


def chain(*fns: PathFn) -> PathFn:
    def run(p: APath) -> APath:
        for fn in fns:
            p = fn(p)
        return p
    return run


# ------------------------------------------------------------------ projections and isomorphisms

@dataclass(frozen=True)
class ProjectionWitness:
    sigma: FpcHom
    surjection: tuple[FpcWord, ...]
    tau: tuple[int, ...]
    h: tuple[FpcWord, ...]
    z: tuple[int, ...]

    def to_json(self) -> dict:
        return {"sigma": [word_to_json(w) for w in self.sigma.images],
                "surjection": [word_to_json(w) for w in self.surjection],
                "tau": list(self.tau), "h": [word_to_json(w) for w in self.h], "z": list(self.z)}


@dataclass(frozen=True)
class ProjectionReport:
    ok: bool
    failures: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_projection(dgA: DecoratedGroup, dgB: DecoratedGroup, wit: ProjectionWitness) -> ProjectionReport:
    """Check a supplied witness that ``dgA`` projects onto ``dgB``; never searches."""
    n, m = len(dgA.peripherals), len(dgB.peripherals)
    if len(wit.tau) != n or len(wit.h) != n or len(wit.z) != n:
        raise DecoratedError("witness needs tau, h and z for every peripheral subgroup")
    if len(wit.surjection) != dgB.group.rank:
        raise DecoratedError("witness needs a preimage for every target basis element")
    G, H, T = dgA.group, dgB.group, dgA.sg.group
    sigma = wit.sigma
    fails: list[str] = []
    if sigma.source != G or sigma.target != H:
        return ProjectionReport(False, ("sigma has the wrong domain or codomain",))
    for k in range(G.rank):
        if dgB.eta(sigma.images[k]) != dgA.eta.images[k]:
            fails.append(f"lambda o sigma differs from eta on {G.factor_name(k)}")
    for k in range(H.rank):
        if sigma(G.check(wit.surjection[k])) != ((k, 1),):
            fails.append(f"surjectivity certificate fails for {H.factor_name(k)}")
    if n != m or sorted(wit.tau) != list(range(1, m + 1)):
        fails.append("tau is not a bijection")
        return ProjectionReport(False, tuple(fails))
    for j in range(n):
        P, Q = dgA.peripherals[j], dgB.peripherals[wit.tau[j] - 1]
        h = H.check(wit.h[j])
        if P.i != Q.i:
            fails.append(f"(i) boundary index of peripheral {j + 1} differs")
        x = sigma(P.word)
        if x != H.conj(h, Q.word) and x != H.conj(h, H.inv(Q.word)):
            fails.append(f"(ii) sigma does not conjugate peripheral {j + 1} onto its partner")
        rhs = T.mul(dgB.eta(h), Q.o, T.power(dgA.sg.t_word(P.i), wit.z[j]))
        if P.o != rhs:
            fails.append(f"(iii) types of peripheral {j + 1} do not match")
    return ProjectionReport(not fails, tuple(fails))


def find_projection_witness(dgA: DecoratedGroup, dgB: DecoratedGroup, sigma: FpcHom,
                            surjection: Sequence[FpcWord]) -> ProjectionWitness | None:
    """Complete ``sigma`` and a surjectivity certificate to a full witness."""
    H, T = dgB.group, dgA.sg.group
    n = len(dgA.peripherals)
    if n != len(dgB.peripherals):
        return None
    options: list[list[tuple[int, FpcWord, int]]] = []
    for P in dgA.peripherals:
        x = sigma(P.word)
        opts = []
        for k, Q in enumerate(dgB.peripherals, 1):
            if Q.i != P.i:
                continue
            for y in (Q.word, H.inv(Q.word)):
                h = H.conjugator(x, y)
                if h is None:
                    continue
                r = T.mul(T.inv(Q.o), T.inv(dgB.eta(h)), P.o)
                z = T.is_power_of(r, dgA.sg.t_word(P.i))
                if z is not None:
                    opts.append((k, h, z))
                    break
        options.append(opts)
    chosen: list[tuple[int, FpcWord, int]] = []

    def assign(j: int) -> bool:
        if j == n:
            return True
        for opt in options[j]:
            if any(opt[0] == c[0] for c in chosen):
                continue
            chosen.append(opt)
            if assign(j + 1):
                return True
            chosen.pop()
        return False

    if not assign(0):
        return None
    return ProjectionWitness(sigma, tuple(surjection), tuple(c[0] for c in chosen),
                             tuple(c[1] for c in chosen), tuple(c[2] for c in chosen))


def path_hom(src: TreeSplitting, dst: TreeSplitting, fn: PathFn) -> FpcHom:
    """Homomorphism of spanning-tree bases induced by a map of based loops."""
    imgs = []
    for k in range(src.rank):
        q = fn(src.generator_loop(k))
        if q.start != dst.base or q.end(dst.gog) != dst.base:
            raise DecoratedError("path map does not preserve base points")
        imgs.append(dst.path_word(q))
    return FpcHom(src.group, dst.group, tuple(imgs))


@dataclass(frozen=True)
class IsoWitness:
    source: DecoratedGroup
    target: DecoratedGroup
    forward: ProjectionWitness | None
    backward: ProjectionWitness | None

    @property
    def ok(self) -> bool:
        if self.forward is None or self.backward is None:
            return False
        return bool(verify_projection(self.source, self.target, self.forward)) and \
            bool(verify_projection(self.target, self.source, self.backward))

    def to_json(self) -> dict:
        return {"verified": self.ok,
                "forward": None if self.forward is None else self.forward.to_json(),
                "backward": None if self.backward is None else self.backward.to_json()}


def iso_witness(dmA: DecoratedMorphism, dmB: DecoratedMorphism, forward: PathFn, backward: PathFn) -> IsoWitness:
    """Projection witnesses both ways from mutually inverse loop maps."""
    dgA = induced_decorated_group(dmA.sg, dmA)
    dgB = induced_decorated_group(dmB.sg, dmB)
    sig = path_hom(dgA.splitting, dgB.splitting, forward)
    rho = path_hom(dgB.splitting, dgA.splitting, backward)
    wf = find_projection_witness(dgA, dgB, sig, rho.images)
    wb = find_projection_witness(dgB, dgA, rho, sig.images)
    return IsoWitness(dgA, dgB, wf, wb)


def identity_witness(dg: DecoratedGroup) -> ProjectionWitness:
    G = dg.group
    gens = tuple(((k, 1),) for k in range(G.rank))
    n = len(dg.peripherals)
    return ProjectionWitness(FpcHom.identity(G), gens, tuple(range(1, n + 1)), (IDENTITY,) * n, (0,) * n)


@dataclass(frozen=True)
class FoldA2Square:
    a2_first: DecoratedMorphism
    fold_first: DecoratedMorphism
    witness: IsoWitness
    same_morphism: bool


def fold_a2_square(dm: DecoratedMorphism, f1: str, f2: str, g: str, b: FpcWord) -> FoldA2Square:
    """Run A2 at ``g`` then the fold of ``(f1, f2)``, and the fold then A2 at ``g``.

    The element ``b`` is transported through the fold before the second A2.
    """
    S = dm.source.graph
    if g in (f1, f2, S.inv(f1), S.inv(f2)):
        raise DecoratedError("the A2 edge must differ from the folded edges")
    m1 = dm_a2(dm, g, b)
    ok, wit = f1_witness(m1.dm.morphism, f1, f2)
    if not ok:
        raise DecoratedError("edges are not foldable")
    m2 = dm_fold(m1.dm, f1, f2, wit)
    m3 = dm_fold(dm, f1, f2)
    moved = m3.forward(vertex_path(S.alpha(g), b))
    if moved.edges:
        raise DecoratedError("fold does not carry the A2 element to a vertex element")
    m4 = dm_a2(m3.dm, g, moved.elements[0])
    fwd_a, back_a = chain(m1.forward, m2.forward), chain(m2.backward, m1.backward)
    fwd_b, back_b = chain(m3.forward, m4.forward), chain(m4.backward, m3.backward)
    wit2 = iso_witness(m2.dm, m4.dm, chain(back_a, fwd_b), chain(back_b, fwd_a))
    x, y = m2.dm.morphism, m4.dm.morphism
    same = (x.source == y.source and dict(x.o) == dict(y.o) and dict(x.emap) == dict(y.emap)
            and all(x.vertex_hom[u].images == y.vertex_hom[u].images for u in x.source.graph.vertices))
    return FoldA2Square(m2.dm, m4.dm, wit2, same)


# ------------------------------------------------------------------ S-trivialization

@dataclass(frozen=True)
class STrivialResult:
    dm: DecoratedMorphism
    witness: IsoWitness
    moves: tuple[tuple[str, FpcWord], ...]


def make_s_trivial(dm: DecoratedMorphism, u: str, component: Component) -> STrivialResult:
    """Redecorate away from ``u`` and apply A2 moves so the interval labels become trivial."""
    if component.kind != "interval":
        raise DecoratedError("only interval components can be trivialized")
    B = dm.source.group(u)
    cur = avoid_start(dm, u)
    moved = []
    fwd_fns: list[PathFn] = []
    back_fns: list[PathFn] = []
    lg = local_graph(cur, u)
    nodes = component.nodes
    labels = [lg.edges[f][1:] for f in nodes[:-1]]
    prod = IDENTITY
    for t in range(1, len(nodes)):
        prod = B.mul(prod, labels[t - 1][1])
        if not prod:
            continue
        mv = dm_a2(cur, nodes[t], prod)
        cur = mv.dm
        fwd_fns.append(mv.forward)
        back_fns.append(mv.backward)
        moved.append((nodes[t], prod))
    lg2 = local_graph(cur, u)
    for f in nodes[:-1]:
        if lg2.edges[f][2]:
            raise DecoratedError(f"label at {f} is still nontrivial")
    wit = iso_witness(dm, cur, chain(*fwd_fns), chain(*reversed(back_fns)))
    return STrivialResult(cur, wit, tuple(moved))


# ------------------------------------------------------------------ almost orbifold covers

@dataclass(frozen=True)
class AlmostCoverDescriptor:
    exceptional: str
    circle: tuple[str, ...]
    b_u: int
    circle_lengths: Mapping[str, int]
    local_degrees: Mapping[str, int]
    k_u: int
    d: int
    degree: int
    boundary: tuple[tuple[int, int], ...]
    cone_orders: Mapping[str, int]
    exceptional_order: int
    special: bool
    boundary_count: int
    identification: Mapping[str, object]

    def to_json(self) -> dict:
        return {"exceptional": self.exceptional, "circle": list(self.circle), "b_u": self.b_u,
                "circle_lengths": dict(sorted(self.circle_lengths.items())),
                "local_degrees": dict(sorted(self.local_degrees.items())),
                "k_u": self.k_u, "d": self.d, "degree": self.degree,
                "boundary": [list(x) for x in self.boundary],
                "cone_orders": dict(sorted(self.cone_orders.items())),
                "exceptional_order": self.exceptional_order, "special": self.special,
                "boundary_count": self.boundary_count, "identification": dict(self.identification)}


def is_special(k_u: int, order: int) -> bool:
    """``order == 0`` stands for an infinite group, where the bound always holds."""
    return order == 0 or k_u <= order


def extract_almost_cover(sg: SmallOrbGraph, dm: DecoratedMorphism, u: str) -> AlmostCoverDescriptor:
    m = dm.morphism
    S = dm.source.graph
    q = sg.q
    lengths: dict[str, int] = {}
    circles: dict[str, Component] = {}
    for w in S.vertices:
        comps = local_graph(dm, w).components()
        if len(comps) != 1 or comps[0].kind != "circle" or len(comps[0].nodes) != len(S.star(w)):
            raise DecoratedError(f"(a) local graph at {w} is not a single circle")
        circles[w] = comps[0]
        lengths[w] = len(comps[0].nodes)
        errs = check_circle(dm, w, comps[0])
        if errs:
            raise DecoratedError(f"(a) circle at {w}: {errs[0]}")
    for w in S.vertices:
        if w == u:
            continue
        ok, _ = m.vertex_hom[w].is_injective()
        if ok is not True:
            raise DecoratedError(f"(b) vertex homomorphism at {w} is not injective")
        st = S.star(w)
        for a in range(len(st)):
            for b in range(a + 1, len(st)):
                if m.emap[st[a]] == m.emap[st[b]] and f1_witness(m, st[a], st[b])[0] is not False:
                    raise DecoratedError(f"(b) edges {st[a]} and {st[b]} at {w} can be folded")
    v = m.vmap[u]
    N = sg.order(v)
    Bu = dm.source.group(u)
    inf = [k for k, p in enumerate(Bu.orders) if p == 0]
    fin = [k for k, p in enumerate(Bu.orders) if p]
    if len(inf) != 1 or len(fin) > 1:
        raise DecoratedError("(c.1) vertex group at the exceptional vertex has the wrong shape")
    kb = inf[0]
    hu = m.vertex_hom[u]
    if fin:
        mo = Bu.orders[fin[0]]
        if N % mo or hu.images[fin[0]] != sg.s_power(v, N // mo):
            raise DecoratedError("(c.1) finite factor is not the subgroup generated by a power of s_v")
        d = N // mo
    else:
        d = N
    comp = circles[u]
    marked = [t for t, (_, b) in enumerate(comp.labels) if b]
    if len(marked) != 1 or comp.labels[marked[0]][1] != ((kb, 1),):
        raise DecoratedError("(c.2) labels at the exceptional vertex are not trivial except one b_u")
    t0 = (marked[0] + 1) % len(comp.nodes)
    circle = comp.nodes[t0:] + comp.nodes[:t0]
    l_u = lengths[u]
    if l_u % q:
        raise DecoratedError("(c.3) circle length at the exceptional vertex is not divisible by q")
    k_u = l_u // q
    if hu.images[kb] != sg.s_power(v, k_u):
        raise DecoratedError("(c.3) b_u does not map to s_v^k_u")
    degs = {w: lengths[w] // q for w in S.vertices}
    for w in S.vertices:
        if w == u:
            continue
        img = _image_set(m.vertex_hom[w])
        index = sg.order(m.vmap[w]) // len(img)
        if degs[w] != index:
            raise DecoratedError(f"local degree at {w} differs from the index of its vertex group")
    d1 = sum(k for w, k in degs.items() if m.vmap[w] == V1)
    d2 = sum(k for w, k in degs.items() if m.vmap[w] == V2)
    fibres = {e: len(m.edges_over(e)) for e in sorted(sg.gog.graph.edges)}
    if d1 != d2 or any(c != d1 for c in fibres.values()):
        raise DecoratedError("degree is not constant over vertices and edges")
    cones = {w: dm.source.group(w).cardinality() for w in S.vertices
             if w != u and dm.source.group(w).is_finite() and dm.source.group(w).cardinality() > 1}
    boundary = tuple((dm.decomposition(j).i, dm.decomposition(j).z) for j in range(1, dm.n + 1))
    split = TreeSplitting(dm.source, dm.base)
    torsion = sorted(p for p in split.group.orders if p)
    expected = sorted(list(cones.values()) + ([N // d] if N // d > 1 else []))
    ident = {"torsion_orders": torsion, "expected_torsion_orders": expected,
             "free_rank": split.rank - split.torsion, "adjoined_order": N // d,
             "matches": torsion == expected}
    return AlmostCoverDescriptor(u, tuple(circle), kb, lengths, degs, k_u, d, d1, boundary, cones,
                                 N, is_special(k_u, N), dm.n + 1, ident)


def _fresh(S: Graph, name: str) -> str:
    while name in S.edges:
        name += "'"
    return name


@dataclass(frozen=True)
class AdjoinResult:
    dm: DecoratedMorphism
    new_edge: str
    witness: IsoWitness
    iiia_generator: FpcWord


def adjoin_unfold(sg: SmallOrbGraph, dm: DecoratedMorphism, u: str, counter: int = 0) -> AdjoinResult:
    """Unfold the first circle edge at the exceptional vertex and drop ``b_u``."""
    desc = extract_almost_cover(sg, dm, u)
    if not 1 <= desc.d < desc.k_u:
        raise DecoratedError(f"adjoin-unfold needs 1 <= d < k_u (d={desc.d}, k_u={desc.k_u})")
    dm0 = avoid_start(dm, u)
    m = dm0.morphism
    src = dm0.source
    S = src.graph
    f1 = desc.circle[0]
    F1 = S.inv(f1)
    w = S.omega(f1)
    new = _fresh(S, f1 + "'")
    newi = _fresh(S, F1 + "'")
    Bu = src.group(u)
    kb = desc.b_u
    keep = [k for k in range(Bu.rank) if k != kb]
    Bn = FpcGroup(tuple(Bu.orders[k] for k in keep), tuple(Bu.factor_name(k) for k in keep))
    edges = dict(S.edges)
    edges[new] = (newi, u, w)
    edges[newi] = (new, w, u)
    G2 = Graph(S.vertices, edges)
    vg = dict(src.vertex_group)
    vg[u] = Bn
    nsrc = GraphOfGroups.trivial_edges(G2, vg)
    v = m.vmap[u]
    A = sg.gog.group(v)
    hu = m.vertex_hom[u]
    vh = dict(m.vertex_hom)
    vh[u] = FpcHom(Bn, A, tuple(hu.images[k] for k in keep))
    emap = dict(m.emap)
    emap[new], emap[newi] = m.emap[f1], m.emap[F1]
    o = dict(m.o)
    o[new] = A.mul(hu.images[kb], m.o[f1])
    o[newi] = m.o[F1]
    nm = make_morphism(nsrc, sg.gog, m.vmap, emap, vh, o)
    fmap = {u: [keep.index(k) if k in keep else None for k in range(Bu.rank)]}
    loop = APath(u, (IDENTITY,) * 3, (new, F1))
    to_new = PathMap(src, nsrc, {x: x for x in S.vertices}, {u: {kb: loop}}, {}, fmap)
    fwd = lambda p: reduce(nsrc, to_new.apply(p))
    ndm = make_dm(sg, nm, dm0.base, [fwd(p) for p in dm0.paths], [fwd(g) for g in dm0.gammas])
    # IIIA on the inverse edges folds the new edge back and recreates b_u
    res = elementary_fold_iiia(nm, F1, newi, counter)
    kx = res.morphism.source.group(u).rank - 1
    rename = PathMap(res.morphism.source, src, {x: x for x in S.vertices},
                     {u: {kx: APath(u, (((kb, -1),),), ())}}, {}, {u: keep + [None]})
    unrename = PathMap(src, res.morphism.source, {x: x for x in S.vertices},
                       {u: {kb: APath(u, (((kx, -1),),), ())}}, {},
                       {u: [keep.index(k) if k in keep else None for k in range(Bu.rank)]})
    back = chain(lambda p: induced_image(res.sigma, p), rename.apply)
    forward = chain(unrename.apply, res.inverse.apply)
    wit = iso_witness(dm0, ndm, forward, back)
    return AdjoinResult(ndm, new, wit, res.morphism.vertex_hom[u].images[kx])


def fold_after_adjoin(res: AdjoinResult, u: str) -> tuple[DmMove, tuple[str, str]]:
    """Fold the first circle edge with a later edge in its coset, as in the construction."""
    dm = res.dm
    m = dm.morphism
    lg = local_graph(dm, u)
    comp = next(c for c in lg.components() if res.new_edge in c.nodes)
    nodes = comp.nodes
    f1 = nodes[0]
    for g in nodes[1:]:
        if g != f1 and m.emap[g] == m.emap[f1]:
            ok, wit = f1_witness(m, f1, g)
            if ok:
                return dm_fold(dm, f1, g, wit), (f1, g)
    raise DecoratedError("no foldable partner for the first circle edge")


# ------------------------------------------------------------------ peripheral folding and relations

@dataclass(frozen=True)
class PeripheralFoldWitness:
    k: int
    l: int
    g: FpcWord
    z: int

    def to_json(self) -> dict:
        return {"k": self.k, "l": self.l, "g": word_to_json(self.g), "z": self.z}


@dataclass(frozen=True)
class PeripheralSearch:
    witness: PeripheralFoldWitness | None
    searched: int

    @property
    def verdict(self) -> str:
        return "found" if self.witness else "not_found"


def words_over(G: FpcGroup, factors: Sequence[int], max_len: int, max_exp: int = 2) -> Iterator[FpcWord]:
    """Reduced words in the given factors up to ``max_len`` syllables."""
    letters = []
    for f in factors:
        p = G.orders[f]
        exps = range(1, p) if p else [e for k in range(1, max_exp + 1) for e in (k, -k)]
        letters += [(f, e) for e in exps]
    yield IDENTITY
    frontier: list[FpcWord] = [IDENTITY]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for f, e in letters:
                if w and w[-1][0] == f:
                    continue
                x = w + ((f, e),)
                nxt.append(x)
                yield x
        frontier = nxt


def folds_peripheral_subgroups(dg: DecoratedGroup, max_norm: int = 3) -> PeripheralSearch:
    """Bounded search for ``o_l = eta(g) o_k t_i^z`` with ``g`` in the complement."""
    if dg.complement is None:
        raise DecoratedError("peripheral folding needs the collapsed basis")
    T = dg.sg.group
    G = dg.group
    count = 0
    for g in words_over(G, dg.complement, max_norm):
        eg = dg.eta(g)
        for k, Pk in enumerate(dg.peripherals, 1):
            for l, Pl in enumerate(dg.peripherals, 1):
                if k == l or Pk.i != Pl.i:
                    continue
                count += 1
                r = T.mul(T.inv(Pk.o), T.inv(eg), Pl.o)
                z = T.is_power_of(r, dg.sg.t_word(Pk.i))
                if z is not None:
                    return PeripheralSearch(PeripheralFoldWitness(k, l, g, z), count)
    return PeripheralSearch(None, count)


def has_obvious_relation(dg: DecoratedGroup, k: int, z_prime: int, word: FpcWord) -> bool:
    """Verify ``o c^z' o^-1 = eta(word)`` with ``word`` in the complement, then test ``0 < z' < z_k``."""
    if dg.complement is None:
        raise DecoratedError("obvious relations need the collapsed basis")
    G = dg.group
    word = G.check(word)
    comp = set(dg.complement)
    if any(f not in comp for f, _ in word):
        raise DecoratedError("witness word leaves the complement")
    P = dg.peripherals[k - 1]
    T = dg.sg.group
    if dg.eta(word) != T.conj(P.o, T.power(dg.sg.t_word(P.i), z_prime)):
        raise DecoratedError("witness word does not express the claimed power")
    return 0 < z_prime < P.z


# ------------------------------------------------------------------ constructions

def _hom(B: FpcGroup, A: FpcGroup, imgs: Sequence[FpcWord]) -> FpcHom:
    return FpcHom(B, A, tuple(imgs))


def example_d2_22() -> DecoratedMorphism:
    """Three parallel edges over ``e1`` carrying two decorated paths over D2(2,2)."""
    sg = build_AO(OrbifoldSpec(True, 0, 1, (2, 2)))
    triv = FpcGroup(())
    pairs = [(f"f{k}", f"F{k}", "u1", "u2") for k in (1, 2, 3)]
    B = GraphOfGroups.trivial_edges(Graph.build(("u1", "u2"), pairs), {"u1": triv, "u2": triv})
    s = ((0, 1),)
    o = {"f1": s, "f2": IDENTITY, "f3": s}
    t = {"f1": s, "f2": IDENTITY, "f3": s}
    A2 = sg.gog.group(V2)
    for k in (1, 2, 3):
        o[f"F{k}"] = A2.inv(t[f"f{k}"])
    vh = {"u1": _hom(triv, sg.gog.group(V1), ()), "u2": _hom(triv, A2, ())}
    emap = {f"f{k}": "e1" for k in (1, 2, 3)} | {f"F{k}": "E1" for k in (1, 2, 3)}
    m = make_morphism(B, sg.gog, {"u1": V1, "u2": V2}, emap, vh, o)
    one = (IDENTITY,) * 3
    paths = [APath("u1", one, ("f1", "F2")), APath("u1", one, ("f2", "F3"))]
    return make_dm(sg, m, "u1", paths)


def degree_one_cover(spec: OrbifoldSpec) -> DecoratedMorphism:
    """A copy of the orbifold graph of groups with the v2 cone replaced by a free ``b_u``."""
    sg = build_AO(spec)
    q = sg.q
    A1, A2 = sg.gog.group(V1), sg.gog.group(V2)
    Bw = A1
    Bu = FpcGroup((0,), ("b",))
    pairs = [(f"g{i}", f"G{i}", "w", "u") for i in range(1, q + 1)]
    B = GraphOfGroups.trivial_edges(Graph.build(("w", "u"), pairs), {"w": Bw, "u": Bu})
    vh = {"w": FpcHom.identity(A1), "u": _hom(Bu, A2, (sg.s_power(V2, 1),))}
    emap = {f"g{i}": f"e{i}" for i in range(1, q + 1)} | {f"G{i}": f"E{i}" for i in range(1, q + 1)}
    o = {e: IDENTITY for e in emap}
    m = make_morphism(B, sg.gog, {"w": V1, "u": V2}, emap, vh, o)
    paths = []
    for i in range(1, q + 1):
        eps = sg.epsilon(i)
        a0 = sg.s_power(V1, eps) if eps else IDENTITY
        mid = ((0, 1),) if eps else IDENTITY
        paths.append(APath("w", (a0, mid, IDENTITY), (f"g{i}", f"G{i % q + 1}")))
    return make_dm(sg, m, "w", paths)


def degree_two_d2_34() -> DecoratedMorphism:
    """Degree-two almost cover of D2(3,4) with ``k_u = 2`` and ``d = 1``."""
    sg = build_AO(OrbifoldSpec(True, 0, 1, (3, 4)))
    A1, A2 = sg.gog.group(V1), sg.gog.group(V2)
    Bu = FpcGroup((0, 4), ("b", "c"))
    pairs = [("f1", "F1", "w1", "u"), ("f2", "F2", "w2", "u")]
    B = GraphOfGroups.trivial_edges(Graph.build(("w1", "w2", "u"), pairs),
                                    {"w1": A1, "w2": A1, "u": Bu})
    vh = {"w1": FpcHom.identity(A1), "w2": FpcHom.identity(A1),
          "u": _hom(Bu, A2, (sg.s_power(V2, 2), sg.s_power(V2, 1)))}
    emap = {"f1": "e1", "f2": "e1", "F1": "E1", "F2": "E1"}
    o = {"f1": IDENTITY, "f2": IDENTITY, "F1": IDENTITY, "F2": A2.inv(sg.s_power(V2, 3))}
    m = make_morphism(B, sg.gog, {"w1": V1, "w2": V1, "u": V2}, emap, vh, o)
    s = ((0, 1),)
    p = APath("w1", (s, IDENTITY, s, ((0, 1),), IDENTITY), ("f1", "F2", "f2", "F1"))
    return make_dm(sg, m, "w1", [p])


@dataclass(frozen=True)
class LoopSpec:
    i: int
    z: int
    a: FpcWord = IDENTITY


def lollipop_wedge(sg: SmallOrbGraph, loops: Sequence[LoopSpec], rng: random.Random | None = None,
                   pendant_prob: float = 0.0, subgroup_prob: float = 0.0,
                   stick_prob: float = 0.0) -> DecoratedMorphism:
    """Wedge of loops at ``u1``, loop ``j`` mapping onto ``a c_i^z a^-1``.

    Without ``rng`` every choice is trivial.  With it, interior vertices may get
    cyclic subgroups of the cone groups, elements and edge data are random,
    loops may hang off sticks, and for one boundary component a loop may take
    pendant excursions through full cone groups.
    """
    A = sg.gog
    verts = ["u1"]
    vmap = {"u1": V1}
    groups: dict[str, FpcGroup] = {"u1": FpcGroup(())}
    imgs: dict[str, tuple[FpcWord, ...]] = {"u1": ()}
    pairs: list[tuple[str, str, str, str]] = []
    emap: dict[str, str] = {}
    ends: dict[str, tuple[str, str]] = {}
    o: dict[str, FpcWord] = {}
    inv: dict[str, str] = {}
    paths, gammas = [], []

    def coin(p: float) -> bool:
        return rng is not None and p > 0 and rng.random() < p

    def rand_el(v: str) -> FpcWord:
        Av = A.group(v)
        if rng is None or not Av.rank:
            return IDENTITY
        return rng.choice(Av.elements())

    def add_vertex(name: str, v: str, kind: str) -> None:
        N = sg.order(v)
        verts.append(name)
        vmap[name] = v
        if kind == "full" and N > 1:
            groups[name] = FpcGroup((N,), ("c",))
            imgs[name] = (sg.s_power(v, 1),)
        elif kind == "sub" and N > 1:
            divs = [m for m in range(2, N + 1) if N % m == 0]
            mo = rng.choice(divs) if rng is not None else N
            groups[name] = FpcGroup((mo,), ("c",))
            imgs[name] = (sg.s_power(v, N // mo),)
        else:
            groups[name] = FpcGroup(())
            imgs[name] = ()

    def add_edge(name: str, x: str, y: str, target: str) -> str:
        iname = name.replace("g", "G", 1) if name.startswith("g") else name.upper()
        pairs.append((name, iname, x, y))
        emap[name] = target
        emap[iname] = A.graph.inv(target)
        ends[name], ends[iname] = (x, y), (y, x)
        inv[name], inv[iname] = iname, name
        return name

    def phi(x: str, b: FpcWord) -> FpcWord:
        Av = A.group(vmap[x])
        out = IDENTITY
        for f, e in b:
            out = Av.mul(out, Av.power(imgs[x][f], e))
        return out

    def rand_b(x: str) -> FpcWord:
        G = groups[x]
        if rng is None or not G.rank:
            return IDENTITY
        return rng.choice(G.elements())

    for j, L in enumerate(loops, 1):
        i, z, a = sg.index(L.i), L.z, L.a
        eps = sg.epsilon(i)
        start = "u1"
        gamma = vertex_path("u1")
        if coin(stick_prob):
            mid, w = f"m{j}", f"w{j}"
            add_vertex(mid, V2, "sub" if coin(subgroup_prob) else "triv")
            add_vertex(w, V1, "triv")
            k1, k2 = (rng.randint(1, sg.q), rng.randint(1, sg.q))
            h1 = add_edge(f"h{j}a", "u1", mid, sg.edge(k1))
            h2 = add_edge(f"h{j}b", mid, w, sg.edge(k2, -1))
            for e in (h1, inv[h1], h2, inv[h2]):
                o[e] = rand_el(A.graph.alpha(emap[e]))
            gamma = APath("u1", (IDENTITY, rand_b(mid), IDENTITY), (h1, h2))
            start = w
        plan: list[str] = []
        step = 1
        while step <= 2 * z:
            if step == 2 * z:
                plan.append("close")
                step += 1
            elif step >= 2 and step + 1 <= 2 * z - 1 and sg.q == 1 and coin(pendant_prob):
                plan += ["out", "back"]
                step += 2
            else:
                plan.append("new")
                step += 1
        cur, prev = start, None
        elements: list[FpcWord] = []
        edges: list[str] = []
        for step, kind in enumerate(plan, 1):
            tgt = sg.edge(i) if step % 2 else sg.edge(i + 1, -1)
            tv = A.graph.alpha(tgt)
            Av = A.group(tv)
            r = sg.s_power(tv, eps)
            if kind == "back":
                h = inv[prev]
                b = ((0, sg.s_exponent(tv, r)),) if r else IDENTITY
                o[h] = rand_el(tv)
                elements.append(b)
            else:
                nxt = start if kind == "close" else f"x{j}.{step}"
                if kind != "close":
                    add_vertex(nxt, A.graph.omega(tgt),
                               "full" if kind == "out" else ("sub" if coin(subgroup_prob) else "triv"))
                h = add_edge(f"g{j}.{step}", cur, nxt, tgt)
                if step == 1:
                    b = IDENTITY
                    o[h] = Av.mul(a, sg.s_power(V1, eps))
                else:
                    b = rand_b(cur)
                    back_edge = inv[prev]
                    if back_edge in o:
                        t_in = Av.inv(o[back_edge])
                    else:
                        t_in = rand_el(tv)
                        o[back_edge] = Av.inv(t_in)
                    o[h] = Av.mul(Av.inv(phi(cur, b)), Av.inv(t_in), r)
                elements.append(b)
            edges.append(h)
            prev = h
            cur = ends[h][1]
        o[inv[prev]] = a
        elements.append(IDENTITY)
        paths.append(APath(start, tuple(elements), tuple(edges)))
        gammas.append(gamma)
    G = Graph.build(verts, pairs)
    src = GraphOfGroups.trivial_edges(G, groups)
    vh = {x: FpcHom(groups[x], A.group(vmap[x]), imgs[x]) for x in verts}
    full_o = {e: o.get(e, IDENTITY) for e in G.edges}
    m = make_morphism(src, A, vmap, emap, vh, full_o)
    return make_dm(sg, m, "u1", paths, gammas)
