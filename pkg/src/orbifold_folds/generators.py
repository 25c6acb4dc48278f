"""Seeded random instances for the property tests and the scenario harness."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from math import gcd
from typing import Any, Iterator, Mapping

from .decorated import (DecoratedError, DecoratedMorphism, LoopSpec, build_AO, dm_a2, dm_fold,
                        is_tame, lollipop_wedge)
from .fpc_words import FpcGroup, FpcHom, FpcWord, IDENTITY
from .gg_morphism import GGMorphism, f1_witness, identity_morphism, is_folded, make_morphism
from .graph_core import Graph
from .graph_of_groups import APath, GraphOfGroups, concat, inverse_path, tree_paths
from .moves import MoveError, fold, prepare_fold, vertex_morphism
from .orbifolds import OrbifoldSpec, is_small

SEED_ENV = "ORBIFOLD_FOLDS_SEED"
DEFAULT_SEED = 1729


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


def make_rng(seed: int | None = None) -> random.Random:
    return random.Random(default_seed() if seed is None else seed)


# ------------------------------------------------------------------ groups and words

def random_fpc_group(rng: random.Random, max_rank: int = 2, orders: tuple[int, ...] = (0, 2, 3, 4),
                     allow_trivial: bool = True) -> FpcGroup:
    lo = 0 if allow_trivial else 1
    return FpcGroup(tuple(rng.choice(orders) for _ in range(rng.randint(lo, max_rank))))


def random_word(rng: random.Random, G: FpcGroup, max_len: int = 3, max_exp: int = 3) -> FpcWord:
    if not G.rank:
        return IDENTITY
    letters = []
    for _ in range(rng.randint(0, max_len)):
        f = rng.randrange(G.rank)
        e = rng.choice([k for k in range(-max_exp, max_exp + 1) if k])
        letters.append((f, e))
    return G.normalize(letters)


# ------------------------------------------------------------------ graphs of groups

def _edge_group_choice(rng: random.Random, A: FpcGroup, B: FpcGroup) -> tuple[int, FpcWord, FpcWord] | None:
    """A cyclic edge group with boundary words at both ends, or ``None``."""
    opts: list[tuple[int, FpcWord, FpcWord]] = []
    infA = [f for f, p in enumerate(A.orders) if p == 0]
    infB = [f for f, p in enumerate(B.orders) if p == 0]
    if infA and infB:
        opts.append((0, ((rng.choice(infA), 1),), ((rng.choice(infB), rng.choice((1, -1))),)))
    for fa, pa in enumerate(A.orders):
        for fb, pb in enumerate(B.orders):
            g = gcd(pa, pb) if pa and pb else 0
            if g > 1:
                n = rng.choice([d for d in range(2, g + 1) if g % d == 0])
                opts.append((n, ((fa, pa // n),), ((fb, pb // n),)))
    if not opts:
        return None
    n, wa, wb = rng.choice(opts)
    c = random_word(rng, A, 1)
    return n, A.conj(c, wa), wb


def random_gog(rng: random.Random, n_vertices: int | None = None, extra_edges: int | None = None,
               trivial_edges: bool = True, max_rank: int = 2) -> GraphOfGroups:
    n = n_vertices if n_vertices is not None else rng.randint(1, 4)
    verts = [f"v{k}" for k in range(n)]
    groups = {v: random_fpc_group(rng, max_rank, allow_trivial=trivial_edges) for v in verts}
    ends = [(verts[rng.randrange(k)], verts[k]) for k in range(1, n)]
    extra = extra_edges if extra_edges is not None else rng.randint(0 if n > 2 else 1, 2)
    if n >= 2:
        for _ in range(extra):
            a, b = rng.sample(verts, 2)
            ends.append((a, b))
    pairs = [(f"a{k}", f"A{k}", a, b) for k, (a, b) in enumerate(ends)]
    graph = Graph.build(verts, pairs)
    if trivial_edges:
        return GraphOfGroups.trivial_edges(graph, groups)
    eo = {e: 1 for e in graph.edges}
    bd = {e: IDENTITY for e in graph.edges}
    for e, ie, a, b in pairs:
        if rng.random() < 0.8:
            pick = _edge_group_choice(rng, groups[a], groups[b])
            if pick is not None:
                n_e, wa, wb = pick
                eo[e] = eo[ie] = n_e
                bd[e], bd[ie] = wa, wb
    return GraphOfGroups(graph, groups, eo, bd)


def random_apath(rng: random.Random, gog: GraphOfGroups, length: int, start: str | None = None,
                 closed: bool = False, max_len: int = 2) -> APath:
    g = gog.graph
    v0 = start if start is not None else rng.choice(g.vertices)
    v = v0
    elements = [random_word(rng, gog.group(v), max_len)]
    edges: list[str] = []
    for _ in range(length):
        st = g.star(v)
        if not st:
            break
        e = rng.choice(st)
        edges.append(e)
        v = g.omega(e)
        elements.append(random_word(rng, gog.group(v), max_len))
    p = APath(v0, tuple(elements), tuple(edges))
    if closed and edges:
        back = tree_paths(gog, p.start)
        p = concat(gog, p, inverse_path(gog, back[v]))
    return p


# ------------------------------------------------------------------ morphisms

def wedge_morphism(rng: random.Random, target: GraphOfGroups, n_loops: int = 2, max_len: int = 4,
                   base: str | None = None) -> tuple[GGMorphism, str]:
    """Subdivided wedge of random closed paths at ``base``; trivial source groups."""
    T = target.graph
    if not T.edges:
        raise ValueError("wedge needs a target with at least one edge")
    if base is None:
        base = rng.choice([v for v in T.vertices if T.star(v)])
    return _wedge(rng, target, n_loops, max_len, base)


def _wedge(rng, target, n_loops, max_len, v0, attempts=20):
    T = target.graph
    triv = FpcGroup(())
    verts, vmap = ["x0"], {"x0": v0}
    pairs, emap, o = [], {}, {}
    for l in range(n_loops):
        q = random_apath(rng, target, rng.randint(1, max_len), v0, closed=True)
        if not q.edges:
            continue
        cur = "x0"
        L = q.length
        for k, e in enumerate(q.edges):
            nxt = "x0" if k == L - 1 else f"x{l}.{k + 1}"
            if nxt != "x0":
                verts.append(nxt)
                vmap[nxt] = T.omega(e)
            name = f"f{l}.{k}"
            pairs.append((name, name.upper(), cur, nxt))
            emap[name], emap[name.upper()] = e, T.inv(e)
            o[name] = q.elements[k]
            o[name.upper()] = target.group(T.omega(e)).inv(q.elements[L]) if k == L - 1 else IDENTITY
            cur = nxt
        if cur != "x0":
            raise AssertionError("wedge loop did not close")
    if not pairs:
        if attempts <= 0 or not T.star(v0):
            raise ValueError(f"no closed path of positive length at {v0!r}")
        return _wedge(rng, target, n_loops, max_len, v0, attempts - 1)
    S = Graph.build(verts, pairs)
    src = GraphOfGroups.trivial_edges(S, {v: triv for v in verts})
    vh = {v: _trivial_hom(triv, target.group(vmap[v])) for v in verts}
    return make_morphism(src, target, vmap, emap, vh, o), "x0"


def _trivial_hom(B: FpcGroup, A: FpcGroup) -> FpcHom:
    return FpcHom(B, A, ())


def fold_until_folded(m: GGMorphism, max_steps: int = 80, base: str | None = None) -> GGMorphism | None:
    """Fold F1 violations and quotient F0 kernels until folded; ``None`` if stuck."""
    counter = 0
    for _ in range(max_steps):
        verdict = is_folded(m)
        if verdict.folded:
            return m
        if verdict.folded is None:
            return None
        try:
            v = verdict.first("F0")
            if v is not None:
                m = vertex_morphism(m, v.data["vertex"]).morphism
                continue
            v = verdict.first("F1")
            if v is None:
                return None
            res = fold(m, v.data["f1"], v.data["f2"], (v.data["b"], v.data["c"]), counter, base)
            counter += 1
            if base is not None:
                base = res.sigma.vmap[base]
            m = res.morphism
        except (MoveError, ValueError):
            return None
    return None


def random_folded_morphism(rng: random.Random, target: GraphOfGroups | None = None,
                           tries: int = 40) -> GGMorphism:
    for _ in range(tries):
        T = target if target is not None else random_gog(rng, max_rank=2)
        try:
            m, _ = wedge_morphism(rng, T, rng.randint(1, 3), 4)
        except ValueError:
            continue
        out = fold_until_folded(m)
        if out is not None:
            return out
    raise RuntimeError("could not generate a folded morphism")


# ------------------------------------------------------------------ orbifolds and decorated morphisms

def small_orientable_specs(max_q: int = 4, max_p: int = 7) -> Iterator[OrbifoldSpec]:
    for q in range(1, max_q + 1):
        for r in range(0, 3):
            if r == 0:
                cands = [()]
            elif r == 1:
                cands = [(p,) for p in range(2, max_p + 1)]
            else:
                cands = [(p1, p2) for p1 in range(2, max_p + 1) for p2 in range(p1, max_p + 1)]
            for cones in cands:
                spec = OrbifoldSpec(True, 0, q, cones)
                if is_small(spec):
                    yield spec


def random_small_spec(rng: random.Random, max_q: int = 3, max_p: int = 6) -> OrbifoldSpec:
    while True:
        q = rng.randint(1, max_q)
        r = rng.randint(0, 2)
        spec = OrbifoldSpec(True, 0, q, tuple(sorted(rng.randint(2, max_p) for _ in range(r))))
        if is_small(spec):
            return spec


def random_tame_dm(rng: random.Random, spec: OrbifoldSpec | None = None, max_loops: int = 3,
                   max_z: int = 3, extra_moves: int = 3) -> DecoratedMorphism:
    """Lollipop wedge followed by random A2 moves and tameness-preserving folds."""
    spec = spec if spec is not None else random_small_spec(rng)
    sg = build_AO(spec)
    A1 = sg.gog.group("v1")
    loops = [LoopSpec(rng.randint(1, sg.q), rng.randint(1, max_z), rng.choice(A1.elements()))
             for _ in range(rng.randint(1, max_loops))]
    dm = lollipop_wedge(sg, loops, rng, pendant_prob=0.4, subgroup_prob=0.4, stick_prob=0.3)
    for _ in range(extra_moves):
        S = dm.source.graph
        if rng.random() < 0.5:
            cands = [f for f in sorted(S.edges) if dm.source.group(S.alpha(f)).rank]
            if cands:
                f = rng.choice(cands)
                b = rng.choice(dm.source.group(S.alpha(f)).elements()[1:])
                dm = dm_a2(dm, f, b).dm
            continue
        pairs = []
        m = dm.morphism
        for u in S.vertices:
            st = S.star(u)
            for i, f1 in enumerate(st):
                for f2 in st[i + 1:]:
                    if m.emap[f1] == m.emap[f2] and S.omega(f1) != S.omega(f2):
                        pairs.append((f1, f2))
        rng.shuffle(pairs)
        for f1, f2 in pairs[:4]:
            ok, wit = f1_witness(m, f1, f2)
            if not ok:
                continue
            try:
                cand = dm_fold(dm, f1, f2, wit).dm
            except (MoveError, DecoratedError):
                continue
            if is_tame(sg, cand):
                dm = cand
                break
    return dm


def fold_a2_instance(rng: random.Random, tries: int = 60):
    """A tame decorated morphism with a foldable pair and a separate A2 edge."""
    for _ in range(tries):
        dm = random_tame_dm(rng, extra_moves=1)
        S = dm.source.graph
        m = dm.morphism
        pairs = []
        for u in S.vertices:
            st = S.star(u)
            for i, f1 in enumerate(st):
                for f2 in st[i + 1:]:
                    if m.emap[f1] == m.emap[f2] and S.omega(f1) != S.omega(f2) \
                            and f1_witness(m, f1, f2)[0]:
                        pairs.append((f1, f2))
        if not pairs:
            continue
        f1, f2 = rng.choice(pairs)
        banned = {f1, f2, S.inv(f1), S.inv(f2)}
        gs = [g for g in sorted(S.edges) if g not in banned and dm.source.group(S.alpha(g)).rank]
        if not gs:
            continue
        g = rng.choice(gs)
        b = rng.choice(dm.source.group(S.alpha(g)).elements()[1:])
        return dm, f1, f2, g, b
    raise RuntimeError("no fold/A2 instance found")


# ------------------------------------------------------------------ move instances

MOVE_KINDS = ("a0", "a1", "a2", "ia", "iiia", "vertex", "fold", "unfold")


@dataclass(frozen=True)
class MoveInstance:
    kind: str
    morphism: GGMorphism
    args: Mapping[str, Any]
    base: str


def _f1_pairs(m: GGMorphism, kind: str | None = None) -> list[tuple[str, str, tuple]]:
    S = m.source.graph
    out = []
    for u in S.vertices:
        st = S.star(u)
        for i, f1 in enumerate(st):
            for f2 in st[i + 1:]:
                if m.emap[f1] != m.emap[f2] or f1 == S.inv(f2):
                    continue
                same = S.omega(f1) == S.omega(f2)
                if kind == "ia" and same or kind == "iiia" and not same:
                    continue
                ok, wit = f1_witness(m, f1, f2)
                if ok:
                    out.append((f1, f2, wit))
    return out


def _base_avoiding(rng: random.Random, S: Graph, avoid: set[str]) -> str:
    rest = [v for v in S.vertices if v not in avoid]
    return rng.choice(rest) if rest else S.vertices[0]


def _kernel_instance(rng: random.Random) -> GGMorphism:
    """Identity morphism with an extra factor at one vertex mapping trivially."""
    T = random_gog(rng, trivial_edges=False)
    u = rng.choice(T.graph.vertices)
    Bu = T.group(u)
    extra = rng.choice((0, 2, 3))
    B2 = FpcGroup(Bu.orders + (extra,))
    vg = dict(T.vertex_group)
    vg[u] = B2
    src = GraphOfGroups(T.graph, vg, T.edge_order, T.boundary)
    vh = {v: FpcHom.identity(T.group(v)) for v in T.graph.vertices}
    vh[u] = FpcHom(B2, Bu, tuple(((i, 1),) for i in range(Bu.rank)) + (IDENTITY,))
    m = identity_morphism(T)
    return m.replace(source=src, vertex_hom=vh)


def _unfold_instance(rng: random.Random) -> tuple[GGMorphism, dict]:
    """Star at ``u`` whose edge groups are conjugates of unit powers of free factors."""
    n_edges = rng.randint(1, 3)
    comp = [rng.choice((0, 2, 3)) for _ in range(rng.randint(0, 2))]
    orders_e = [rng.choice((0, 2, 3)) for _ in range(n_edges)]
    Bu = FpcGroup(tuple(comp) + tuple(orders_e))
    verts = ["u"] + [f"w{k}" for k in range(n_edges)]
    groups = {"u": Bu}
    pairs = []
    eo, bd = {}, {}
    factor = {}
    for k, n in enumerate(orders_e):
        w = f"w{k}"
        groups[w] = FpcGroup((n,) + tuple(rng.choice((0, 2)) for _ in range(rng.randint(0, 1))))
        f, fi = f"g{k}", f"G{k}"
        pairs.append((f, fi, "u", w))
        units = [1, -1] if n in (0, 2) else [1, 2]
        e = rng.choice(units) if n != 2 else 1
        C = FpcGroup(tuple(comp)) if comp else None
        b = random_word(rng, C, 2) if C is not None else IDENTITY
        kk = len(comp) + k
        eo[f] = eo[fi] = n if n else 0
        bd[f] = Bu.conj(b, Bu.normalize(((kk, e),)))
        bd[fi] = ((0, 1),)
        factor[f] = [kk, [list(x) for x in b], e]
    if n_edges >= 1 and rng.random() < 0.5:
        verts.append("z")
        groups["z"] = FpcGroup(())
        pairs.append(("h", "H", "u", "z"))
        eo["h"] = eo["H"] = 1
        bd["h"] = bd["H"] = IDENTITY
    G = Graph.build(verts, pairs)
    T = GraphOfGroups(G, groups, eo, bd)
    g = rng.choice(sorted(factor))
    return identity_morphism(T), {"edge": g, "complement": list(range(len(comp))), "edge_factor": factor}


def move_instance(rng: random.Random, kind: str, tries: int = 200) -> MoveInstance:
    """A random morphism together with arguments on which ``kind`` applies."""
    for _ in range(tries):
        try:
            inst = _move_instance(rng, kind)
        except (ValueError, MoveError, RuntimeError):
            continue
        if inst is not None:
            return inst
    raise RuntimeError(f"no instance found for move {kind}")


def _move_instance(rng: random.Random, kind: str) -> MoveInstance | None:
    if kind not in MOVE_KINDS:
        raise KeyError(kind)
    if kind == "a0":
        m = random_folded_morphism(rng) if rng.random() < 0.5 else \
            wedge_morphism(rng, random_gog(rng, trivial_edges=False), 2, 4)[0]
        S = m.source.graph
        u = rng.choice(S.vertices)
        g = random_word(rng, m.target.group(m.vmap[u]), 3)
        if not g:
            return None
        return MoveInstance(kind, m, {"vertex": u, "g": g}, _base_avoiding(rng, S, {u}))
    if kind == "a1":
        m, base = wedge_morphism(rng, random_gog(rng, trivial_edges=False), 2, 4)
        cands = [f for f in sorted(m.source.graph.edges) if m.target.edge_order[m.emap[f]] != 1]
        if not cands:
            return None
        c = rng.choice([k for k in range(-3, 4) if k])
        return MoveInstance(kind, m, {"edge": rng.choice(cands), "c": c}, base)
    if kind == "a2":
        T = random_gog(rng, trivial_edges=False)
        m = identity_morphism(T) if rng.random() < 0.5 else random_tame_dm(rng).morphism
        S = m.source.graph
        cands = [f for f in sorted(S.edges) if m.source.group(S.alpha(f)).rank]
        if not cands:
            return None
        f = rng.choice(cands)
        b = random_word(rng, m.source.group(S.alpha(f)), 3)
        if not b:
            return None
        return MoveInstance(kind, m, {"edge": f, "b": b}, rng.choice(S.vertices))
    if kind in ("ia", "iiia", "fold"):
        T = random_gog(rng, trivial_edges=rng.random() < 0.6)
        m, base = wedge_morphism(rng, T, rng.randint(2, 3), 4)
        pairs = _f1_pairs(m, None if kind == "fold" else kind)
        if not pairs:
            return None
        f1, f2, wit = rng.choice(pairs)
        if kind == "fold":
            return MoveInstance(kind, m, {"f1": f1, "f2": f2, "witness": wit}, base)
        try:
            prep = prepare_fold(m, f1, f2, wit, base)
        except MoveError:
            return None
        return MoveInstance(kind, prep.morphism, {"f1": prep.f1, "f2": prep.f2}, base)
    if kind == "vertex":
        m = _kernel_instance(rng)
        verdict = is_folded(m)
        v = verdict.first("F0")
        if v is None:
            return None
        return MoveInstance(kind, m, {"vertex": v.data["vertex"]}, m.source.graph.vertices[0])
    if kind == "unfold":
        m, args = _unfold_instance(rng)
        return MoveInstance(kind, m, args, "u")
    return None
