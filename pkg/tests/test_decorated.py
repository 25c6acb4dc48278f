from __future__ import annotations

import dataclasses
import itertools
import random

import pytest

from orbifold_folds.decorated import (
    DecoratedError,
    LoopSpec,
    V1,
    V2,
    adjoin_unfold,
    build_AO,
    check_circle,
    check_local_path_formulas,
    check_theta,
    collapsing_order,
    degree_one_cover,
    degree_two_d2_34,
    example_d2_22,
    extract_almost_cover,
    fold_after_adjoin,
    folds_peripheral_subgroups,
    folds_squares,
    has_obvious_relation,
    identity_witness,
    induced_decorated_group,
    is_special,
    is_tame,
    iso_witness,
    local_graph,
    lollipop_wedge,
    make_dm,
    make_s_trivial,
    redecorate,
    verify_collapsing_order,
    verify_projection,
)
from orbifold_folds.fpc_words import FpcGroup, FpcHom
from orbifold_folds.generators import make_rng, random_tame_dm
from orbifold_folds.gg_morphism import make_morphism
from orbifold_folds.graph_core import Graph
from orbifold_folds.graph_of_groups import APath, GraphOfGroups, TreeSplitting, concat
from orbifold_folds.orbifolds import OrbifoldSpec

from oracles import brute_collapsible

D2_22 = OrbifoldSpec(True, 0, 1, (2, 2))


def test_pants_graph():
    sg = build_AO(OrbifoldSpec(True, 0, 3, (2, 3)))
    assert len(sg.gog.graph.edges) == 6
    assert sg.gog.group(V1).orders == (2,) and sg.gog.group(V2).orders == (3,)
    assert sg.c(3).edges == ("e3", "E1")
    assert sg.c(4) == sg.c(1)
    assert not check_theta(sg)


def test_disk_boundary_path():
    sg = build_AO(OrbifoldSpec(True, 0, 1, (3, 4)))
    c1 = sg.c(1)
    assert c1 == APath(V1, (((0, 1),), ((0, 1),), ()), ("e1", "E1"))
    assert not check_theta(sg)


def test_build_rejects_large():
    with pytest.raises(DecoratedError):
        build_AO(OrbifoldSpec(True, 1, 1))
    with pytest.raises(DecoratedError):
        build_AO(OrbifoldSpec(False, 1, 1))


def test_example_decompositions_and_types():
    dm = example_d2_22()
    d1, d2 = dm.decomposition(1), dm.decomposition(2)
    assert (d1.i, d1.z, d1.a, d1.shift) == (1, 1, (), 0)
    # s^-1 = s in Z2
    assert (d2.i, d2.z, d2.a, d2.shift) == (1, 1, ((0, 1),), 0)
    dg = induced_decorated_group(dm.sg, dm)
    assert not dg.check()
    s_inv = dm.sg.word(APath(V1, (((0, 1),),), ()))
    assert [(P.o, P.i, P.z) for P in dg.peripherals] == [((), 1, 1), (s_inv, 1, 1)]


def test_doubled_path():
    dm = example_d2_22()
    p = concat(dm.source, dm.paths[0], dm.paths[0])
    d = make_dm(dm.sg, dm.morphism, "u1", [p])
    assert d.decomposition(1).z == 2
    sq = folds_squares(d)
    assert sq.kind == "self" and sq.paths == (1,)
    assert collapsing_order(d) is None
    rep = is_tame(d.sg, d)
    assert not rep and "folds_squares" in rep.reasons and "collapsible" in rep.reasons


def test_peripheral_square_fold():
    dm = example_d2_22()
    d = make_dm(dm.sg, dm.morphism, "u1", [dm.paths[0], dm.paths[0]])
    sq = folds_squares(d)
    assert sq.kind == "peripheral" and sq.paths == (1, 2)


def test_example_local_graph():
    dm = example_d2_22()
    assert folds_squares(dm) is None
    lg = local_graph(dm, "u1")
    assert dict(lg.edges) == {"f3": ("f2", 2, ()), "f2": ("f1", 1, ())}
    assert [c.kind for c in lg.components()] == ["interval"]
    for u in ("u1", "u2"):
        for c in local_graph(dm, u).components():
            assert not check_local_path_formulas(dm, u, c.nodes)
    dot = lg.to_dot(dm.sg.group)
    assert '"f3" -> "f2" [label="(2,1)"]' in dot


def test_undecorated_vertices_are_isolated():
    dm = example_d2_22()
    d = make_dm(dm.sg, dm.morphism, "u1", [])
    lg = local_graph(d, "u1")
    assert not lg.edges
    assert all(c.kind == "interval" and len(c.nodes) == 1 for c in lg.components())
    order = collapsing_order(d)
    assert order is not None and order.edges == () and order.nu == ()


def test_wrong_local_path_is_reported():
    dm = example_d2_22()
    assert check_local_path_formulas(dm, "u1", ["f1", "f2"])


def test_redecoration_is_isomorphic():
    dm = example_d2_22()
    r = redecorate(dm, 1, 1)
    assert r.paths[0].start == "u2"
    assert r.decomposition(1).shift == 1
    w = iso_witness(dm, r, lambda p: p, lambda p: p)
    assert w.ok
    assert verify_projection(w.source, w.target, w.forward)


def test_projection_identity_and_wrong_tau():
    dm = example_d2_22()
    dg = induced_decorated_group(dm.sg, dm)
    wit = identity_witness(dg)
    assert verify_projection(dg, dg, wit)
    bad = verify_projection(dg, dg, dataclasses.replace(wit, tau=(2, 1)))
    assert not bad
    assert any(f.startswith("(ii)") for f in bad.failures)
    with pytest.raises(DecoratedError):
        verify_projection(dg, dg, dataclasses.replace(wit, tau=(1,)))


def test_example_collapsing_order():
    dm = example_d2_22()
    order = collapsing_order(dm)
    assert order is not None
    assert not verify_collapsing_order(dm, order)
    assert bool(is_tame(dm.sg, dm))


def _example_paths():
    dm = example_d2_22()
    B = dm.source
    def valid(p):
        try:
            make_dm(dm.sg, dm.morphism, "u1", [p])
        except DecoratedError:
            return False
        return True

    singles = [p for a, b in itertools.permutations((1, 2, 3), 2)
               if valid(p := APath("u1", ((),) * 3, (f"f{a}", f"F{b}")))]
    doubles = [pq for p in singles for q in singles if valid(pq := concat(B, p, q))]
    return dm, singles + doubles


def test_collapsing_order_against_brute_force():
    dm, pool = _example_paths()
    inv = dict((e, dm.source.graph.inv(e)) for e in dm.source.graph.edges)
    rng = random.Random(11)
    seen = {True: 0, False: 0}
    for _ in range(150):
        paths = rng.sample(pool, rng.randint(1, 4))
        d = make_dm(dm.sg, dm.morphism, "u1", paths)
        order = collapsing_order(d)
        want = brute_collapsible([p.edges for p in paths], inv)
        assert (order is not None) == want
        if order is not None:
            assert not verify_collapsing_order(d, order)
        seen[want] += 1
    assert seen[True] and seen[False]


def test_collapsing_rank_formula():
    rng = make_rng(5)
    for _ in range(15):
        dm = random_tame_dm(rng)
        order = collapsing_order(dm)
        S = dm.source
        full = TreeSplitting(S, dm.base).rank
        rest = S.subgraph(set(order.edges) | {S.graph.inv(f) for f in order.edges})
        assert full == TreeSplitting(rest.component(dm.base), dm.base).rank + len(order.edges)


def _f0_dm():
    # the example with a free group at u1 mapping onto Z2: the kernel makes u1 fail injectivity
    sg = build_AO(D2_22)
    Z = FpcGroup((0,), ("b",))
    triv = FpcGroup(())
    pairs = [("f1", "F1", "u1", "u2"), ("f2", "F2", "u1", "u2")]
    B = GraphOfGroups.trivial_edges(Graph.build(("u1", "u2"), pairs), {"u1": Z, "u2": triv})
    s = ((0, 1),)
    m = make_morphism(B, sg.gog, {"u1": V1, "u2": V2},
                      {"f1": "e1", "f2": "e1", "F1": "E1", "F2": "E1"},
                      {"u1": FpcHom(Z, sg.gog.group(V1), (s,)), "u2": FpcHom(triv, sg.gog.group(V2), ())},
                      {"f1": s, "F1": s, "f2": (), "F2": ()})
    return make_dm(sg, m, "u1", [APath("u1", ((),) * 3, ("f1", "F2"))])


def test_tameness_reports_f0():
    d = _f0_dm()
    rep = is_tame(d.sg, d)
    assert not rep
    assert rep.reasons["vertex_injective"]["vertex"] == "u1"


def test_s_trivialization_on_generated_intervals():
    rng = make_rng(21)
    done = 0
    longest = 0
    for _ in range(40):
        dm = random_tame_dm(rng)
        for u in dm.source.graph.vertices:
            for c in local_graph(dm, u).components():
                if c.kind != "interval" or len(c.nodes) < 2:
                    continue
                r = make_s_trivial(dm, u, c)
                lg = local_graph(r.dm, u)
                assert all(not lg.edges[f][2] for f in c.nodes[:-1])
                assert r.witness.ok
                done += 1
                if any(b for _, b in c.labels):
                    longest = max(longest, len(c.nodes))
    assert done > 20
    assert longest >= 3


def test_s_trivial_rejects_circle():
    dm = degree_two_d2_34()
    comp = local_graph(dm, "u").components()[0]
    assert comp.kind == "circle"
    with pytest.raises(DecoratedError):
        make_s_trivial(dm, "u", comp)


def test_special_flag():
    assert is_special(2, 4) and is_special(4, 4)
    assert not is_special(5, 4)
    assert is_special(9, 0)


@pytest.mark.parametrize("spec", [OrbifoldSpec(True, 0, 1, (2, 3)), OrbifoldSpec(True, 0, 2, (3, 5)),
                                  OrbifoldSpec(True, 0, 3, (2, 2)), OrbifoldSpec(True, 0, 2, (4,))])
def test_degree_one_descriptor(spec):
    dm = degree_one_cover(spec)
    d = extract_almost_cover(dm.sg, dm, "u")
    N = dm.sg.order(V2)
    assert set(d.circle_lengths.values()) == {spec.q}
    assert (d.k_u, d.d, d.degree) == (1, N, 1)
    assert d.special and d.boundary_count == spec.q + 1
    assert d.identification["matches"]
    for w in dm.source.graph.vertices:
        for c in local_graph(dm, w).components():
            assert not check_circle(dm, w, c)
    with pytest.raises(DecoratedError, match="1 <= d < k_u"):
        adjoin_unfold(dm.sg, dm, "u")


def test_degree_two_descriptor_and_adjoin():
    dm = degree_two_d2_34()
    d = extract_almost_cover(dm.sg, dm, "u")
    assert (d.circle_lengths["u"], d.k_u, d.d, d.degree) == (2, 2, 1, 2)
    assert d.boundary == ((1, 2),) and d.boundary_count == 2
    assert d.special
    assert d.identification["matches"]
    res = adjoin_unfold(dm.sg, dm, "u")
    assert res.dm.source.group("u").rank == dm.source.group("u").rank - 1
    w = res.witness
    assert verify_projection(w.source, w.target, w.forward)
    assert verify_projection(w.target, w.source, w.backward)
    mv, pair = fold_after_adjoin(res, "u")
    assert folds_squares(mv.dm) is not None


def test_extract_rejects_non_circles():
    dm = example_d2_22()
    with pytest.raises(DecoratedError, match=r"\(a\)"):
        extract_almost_cover(dm.sg, dm, "u1")


def test_peripheral_folding():
    sg = build_AO(OrbifoldSpec(True, 0, 1, (2, 3)))
    same = lollipop_wedge(sg, [LoopSpec(1, 1), LoopSpec(1, 1)])
    res = folds_peripheral_subgroups(induced_decorated_group(sg, same, collapse=True))
    assert res.verdict == "found"
    assert res.witness.g == () and res.witness.z == 0
    dm = example_d2_22()
    res = folds_peripheral_subgroups(induced_decorated_group(dm.sg, dm, collapse=True))
    assert res.verdict == "not_found" and res.searched > 0
    with pytest.raises(DecoratedError):
        folds_peripheral_subgroups(induced_decorated_group(dm.sg, dm))


def test_obvious_relation():
    sg = build_AO(OrbifoldSpec(True, 0, 1, (2, 3)))
    two = lollipop_wedge(sg, [LoopSpec(1, 2), LoopSpec(1, 1)])
    one = make_dm(sg, two.morphism, "u1", [two.paths[0]])
    dg = induced_decorated_group(sg, one, collapse=True)
    assert dg.peripherals[0].z == 2
    y = dg.complement[0]
    # the undecorated loop runs around c_1 backwards
    assert has_obvious_relation(dg, 1, 1, ((y, -1),))
    with pytest.raises(DecoratedError, match="does not express"):
        has_obvious_relation(dg, 1, 2, ((y, -1),))
    with pytest.raises(DecoratedError, match="complement"):
        has_obvious_relation(dg, 1, 1, ((1, 1),))
    assert not has_obvious_relation(dg, 1, 2, ((y, -2),))


def test_dm_json_round_trip():
    import json

    from orbifold_folds.decorated import DecoratedMorphism
    dm = example_d2_22()
    back = DecoratedMorphism.from_json(json.loads(json.dumps(dm.to_json())))
    assert back.paths == dm.paths and back.base == dm.base
    assert [back.decomposition(j) for j in (1, 2)] == [dm.decomposition(j) for j in (1, 2)]
