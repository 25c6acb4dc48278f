from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from orbifold_folds.fpc_words import FpcGroup, FpcHom, IDENTITY, word_from_json
from orbifold_folds.generators import MOVE_KINDS, move_instance, random_gog, wedge_morphism
from orbifold_folds.gg_morphism import (check_morphism, complexity, identity_morphism, induced_image,
                                        is_folded, make_morphism)
from orbifold_folds.graph_core import Graph
from orbifold_folds.graph_of_groups import APath, GraphOfGroups, TreeSplitting, pi1_from_path
from orbifold_folds.moves import (MoveError, UnfoldWitness, check_inverse, check_sigma_relation,
                                  elementary_fold_ia, elementary_fold_iiia, fold, move_a0, move_a1,
                                  move_a2, prepare_fold, sigma_image, test_loops as loops_at, unfold,
                                  vertex_morphism)


def same_pi1_images(old, new, base, conj=None) -> bool:
    A = old.target.group(old.vmap[base])
    for q in loops_at(old.source, base):
        x = induced_image(old, q)
        if conj:
            x = APath(x.start, (A.mul(conj, x.elements[0]),) + x.elements[1:-1]
                      + (A.mul(x.elements[-1], A.inv(conj)),), x.edges) if x.edges else \
                APath(x.start, (A.conj(conj, x.elements[0]),), ())
        if pi1_from_path(old.target, x) != pi1_from_path(old.target, induced_image(new, q)):
            return False
    return True


def _wedge(seed, trivial=False):
    rng = random.Random(seed)
    return wedge_morphism(rng, random_gog(rng, n_vertices=rng.randint(2, 3), trivial_edges=trivial), 2, 4)


# -- auxiliary moves

def test_a0_examples():
    m, base = _wedge(1)
    S = m.source.graph
    u = next(v for v in S.vertices if v != base)
    assert move_a0(m, u, IDENTITY) == m
    A = m.target.group(m.vmap[u])
    g = A.gen(0) if A.rank else IDENTITY
    m2 = move_a0(m, u, g)
    assert move_a0(m2, u, A.inv(g)) == m
    assert check_morphism(m2) == []
    assert same_pi1_images(m, m2, base)


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_a0_at_base_conjugates(seed):
    m, base = _wedge(seed)
    A = m.target.group(m.vmap[base])
    if not A.rank:
        return
    g = A.gen(0)
    assert same_pi1_images(m, move_a0(m, base, g), base, conj=g)


def test_a1_examples():
    for seed in range(40):
        m, base = _wedge(seed)
        cands = [f for f in sorted(m.source.graph.edges) if m.target.edge_order[m.emap[f]] != 1]
        if cands:
            break
    f = cands[0]
    assert move_a1(m, f, 0) == m
    m2 = move_a1(m, f, 2)
    assert move_a1(m2, f, -2) == m
    assert check_morphism(m2) == []
    assert same_pi1_images(m, m2, base)


def _two_edges():
    g = Graph.build(["x", "y"], [("f", "F", "x", "y"), ("h", "H", "x", "y")])
    src = GraphOfGroups.trivial_edges(g, {"x": FpcGroup((0,)), "y": FpcGroup(())})
    return identity_morphism(src)


def test_a2_examples():
    m = _two_edges()
    new, sig = move_a2(m, "f", IDENTITY)
    assert new == m and sig == identity_morphism(m.source)
    b = ((0, 1),)
    new, sig = move_a2(m, "f", b)
    p = APath("x", (IDENTITY,) * 4, ("f", "H", "f"))
    img = sigma_image(sig, p)
    binv = ((0, -1),)
    assert img.elements[0] == binv and img.elements[2] == binv
    assert check_sigma_relation(m, new, sig, "x") == []


# -- elementary folds

def test_ia_pendant_example():
    T = GraphOfGroups.trivial_edges(Graph.build(["v", "w"], [("e", "E", "v", "w")]),
                                    {"v": FpcGroup(()), "w": FpcGroup((2, 3))})
    S = Graph.build(["x", "y1", "y2"], [("f1", "F1", "x", "y1"), ("f2", "F2", "x", "y2")])
    src = GraphOfGroups.trivial_edges(S, {"x": FpcGroup(()), "y1": FpcGroup((2,)), "y2": FpcGroup((3,))})
    A = T.group("w")
    hom = {"x": FpcHom(src.group("x"), T.group("v"), ()),
           "y1": FpcHom(src.group("y1"), A, (((0, 1),),)),
           "y2": FpcHom(src.group("y2"), A, (((1, 1),),))}
    m = make_morphism(src, T, {"x": "v", "y1": "w", "y2": "w"},
                      {"f1": "e", "F1": "E", "f2": "e", "F2": "E"}, hom, {e: IDENTITY for e in S.edges})
    r = elementary_fold_ia(m, "f1", "f2")
    G = r.morphism.source
    assert len(G.graph.edges) == 2 and G.group("y1").orders == (2, 3)
    assert check_sigma_relation(m, r.morphism, r.sigma, "x") == []
    assert check_inverse(r.sigma, r.inverse, "x") == []
    with pytest.raises(MoveError):
        elementary_fold_iiia(m, "f1", "f2")


def _ranks(gog, base):
    sp = TreeSplitting(gog, base)
    return sp.rank, sp.torsion


@given(st.integers(0, 10**6))
@settings(max_examples=40)
def test_elementary_folds_preserve_rank(seed):
    rng = random.Random(seed)
    inst = move_instance(rng, rng.choice(["ia", "iiia"]))
    m = inst.morphism
    if not m.source.has_trivial_edges():
        return
    fn = elementary_fold_ia if inst.kind == "ia" else elementary_fold_iiia
    r = fn(m, inst.args["f1"], inst.args["f2"])
    assert _ranks(m.source, inst.base) == _ranks(r.morphism.source, r.sigma.vmap[inst.base])
    b0 = m.source.graph.first_betti()
    b1 = r.morphism.source.graph.first_betti()
    if inst.kind == "iiia":
        z = m.source.graph.omega(inst.args["f1"])
        assert b1 == b0 - 1
        assert r.morphism.source.group(z).rank == m.source.group(z).rank + 1
    else:
        assert b1 == b0


def test_iiia_with_equal_t_is_not_vertex_injective():
    T = GraphOfGroups.trivial_edges(Graph.build(["v", "w"], [("e", "E", "v", "w")]),
                                    {"v": FpcGroup(()), "w": FpcGroup((2,))})
    S = Graph.build(["x", "y"], [("f1", "F1", "x", "y"), ("f2", "F2", "x", "y")])
    triv = FpcGroup(())
    src = GraphOfGroups.trivial_edges(S, {"x": triv, "y": triv})
    hom = {"x": FpcHom(triv, T.group("v"), ()), "y": FpcHom(triv, T.group("w"), ())}
    m = make_morphism(src, T, {"x": "v", "y": "w"}, {"f1": "e", "F1": "E", "f2": "e", "F2": "E"},
                      hom, {e: IDENTITY for e in S.edges})
    r = elementary_fold_iiia(m, "f1", "f2", counter=7)
    B = r.morphism.source.group("y")
    assert B.orders == (0,) and B.factor_name(0) == "b7"
    assert is_folded(r.morphism).first("F0") is not None
    with pytest.raises(MoveError):
        elementary_fold_ia(m, "f1", "f2")


# -- vertex morphism

def _single(B: FpcGroup, A: FpcGroup, images):
    src = GraphOfGroups.trivial_edges(Graph(("u",)), {"u": B})
    tgt = GraphOfGroups.trivial_edges(Graph(("v",)), {"v": A})
    return make_morphism(src, tgt, {"u": "v"}, {}, {"u": FpcHom(B, A, images)}, {})


def test_vertex_morphism_examples():
    m = _single(FpcGroup((0, 2)), FpcGroup((0, 2)), (((0, 1),), ((1, 1),)))
    r = vertex_morphism(m, "u")
    assert r.morphism.source.group("u").orders == (0, 2)
    m = _single(FpcGroup((4,)), FpcGroup((2,)), (((0, 1),),))
    assert vertex_morphism(m, "u").morphism.source.group("u").orders == (2,)
    m = _single(FpcGroup((0, 2)), FpcGroup((2,)), (IDENTITY, ((0, 1),)))
    r = vertex_morphism(m, "u")
    assert r.morphism.source.group("u").orders == (2,)
    assert complexity(r.morphism).rank == complexity(m).rank - 1
    assert check_sigma_relation(m, r.morphism, r.sigma, "u") == []


def test_vertex_morphism_rejects_unsupported_kernels():
    F2 = FpcGroup((0, 0))
    m = _single(F2, FpcGroup((0,)), (((0, 1),), ((0, 1),)))
    with pytest.raises(MoveError):
        vertex_morphism(m, "u")


# -- composite fold

def test_fold_on_two_loop_wedge():
    T = GraphOfGroups.trivial_edges(Graph.build(["v", "w"], [("e", "E", "v", "w"), ("h", "H", "v", "w")]),
                                    {"v": FpcGroup((2,)), "w": FpcGroup((0,))})
    S = Graph.build(["c", "x1", "x2"], [("f1", "F1", "c", "x1"), ("g1", "G1", "x1", "c"),
                                        ("f2", "F2", "c", "x2"), ("g2", "G2", "x2", "c")])
    triv = FpcGroup(())
    src = GraphOfGroups.trivial_edges(S, {v: triv for v in S.vertices})
    vmap = {"c": "v", "x1": "w", "x2": "w"}
    emap = {"f1": "e", "F1": "E", "f2": "e", "F2": "E", "g1": "H", "G1": "h", "g2": "H", "G2": "h"}
    o = {e: IDENTITY for e in S.edges}
    o["f2"] = ((0, 1),)
    o["G1"] = ((0, 1),)
    hom = {u: FpcHom(triv, T.group(vmap[u]), ()) for u in S.vertices}
    m = make_morphism(src, T, vmap, emap, hom, o)
    assert is_folded(m).first("F1") is None  # each pair differs by s, outside the trivial image
    o["f2"] = IDENTITY
    m = make_morphism(src, T, vmap, emap, hom, o)
    v = is_folded(m).first("F1")
    assert v is not None
    r = fold(m, v.data["f1"], v.data["f2"], (v.data["b"], v.data["c"]), 0, "c")
    assert len(r.morphism.source.graph.edges) == len(S.edges) - 2
    assert check_sigma_relation(m, r.morphism, r.sigma, "c", exact=False) == []
    assert check_inverse(r.sigma, r.inverse, "c") == []


def test_prepare_fold_swaps_at_base():
    rng = random.Random(0)
    hits = 0
    for _ in range(60):
        inst = move_instance(rng, "fold")
        m, a = inst.morphism, inst.args
        S = m.source.graph
        if S.omega(a["f1"]) == S.omega(a["f2"]):
            continue
        prep = prepare_fold(m, a["f1"], a["f2"], a["witness"], inst.base)
        assert S.omega(prep.f2) != inst.base
        assert prep.morphism.o[prep.f1] == prep.morphism.o[prep.f2]
        assert prep.morphism.t[prep.f1] == prep.morphism.t[prep.f2]
        hits += 1
    assert hits > 5


# -- unfold

def _unfold_case(n_comp: int):
    comp = (0,) * n_comp
    B = FpcGroup(comp + (3,))
    g = Graph.build(["u", "w"], [("g", "G", "u", "w")])
    src = GraphOfGroups(g, {"u": B, "w": FpcGroup((3,))}, {"g": 3, "G": 3},
                        {"g": ((n_comp, 1),), "G": ((0, 1),)})
    return identity_morphism(src), UnfoldWitness(tuple(range(n_comp)), {"g": (n_comp, IDENTITY, 1)})


def test_unfold_trivializes_vertex_group():
    m, wit = _unfold_case(0)
    r = unfold(m, "g", wit)
    assert r.morphism.source.group("u").rank == 0
    assert complexity(r.morphism).d[0] == complexity(m).d[0] - 1
    assert check_sigma_relation(m, r.morphism, r.sigma, "u", r.exact, "backward") == []


def test_unfold_rejects_bad_witness():
    m, _ = _unfold_case(1)
    with pytest.raises(MoveError):
        unfold(m, "g", UnfoldWitness((), {"g": (1, IDENTITY, 1)}))
    with pytest.raises(MoveError):
        unfold(m, "g", UnfoldWitness((0,), {"g": (1, ((0, 1),), 1)}))


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_unfold_relation_on_generated_instances(seed):
    inst = move_instance(random.Random(seed), "unfold")
    a = inst.args
    wit = UnfoldWitness(tuple(a["complement"]),
                        {f: (k, word_from_json(b), e) for f, (k, b, e) in a["edge_factor"].items()})
    r = unfold(inst.morphism, a["edge"], wit)
    assert check_sigma_relation(inst.morphism, r.morphism, r.sigma, "u", r.exact, "backward") == []
    assert complexity(r.morphism).d[0] == complexity(inst.morphism).d[0] - 1


def test_move_instances_cover_every_kind():
    rng = random.Random(1)
    for kind in MOVE_KINDS:
        inst = move_instance(rng, kind)
        assert inst.kind == kind and check_morphism(inst.morphism) == []
