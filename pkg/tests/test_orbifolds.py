from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from orbifold_folds.fpc_words import FpcGroup
from orbifold_folds.generators import small_orientable_specs
from orbifold_folds.nielsen import NielsenTuple, equivalent_bounded
from orbifold_folds.orbifolds import (
    OrbifoldError,
    OrbifoldSpec,
    admissible_selections,
    is_small,
    is_sufficiently_large,
    presentation,
    standard_tuple,
)


def _fmt(pres):
    return [pres.format_word(r) for r in pres.relators]


def test_torus_two_cone_points():
    n = 2
    pres = presentation(OrbifoldSpec(True, 1, 0, (2 * n + 1, 2 * n)))
    assert pres.generators == ("a1", "b1", "s1", "s2")
    assert _fmt(pres) == ["s1^5", "s2^4", "a1b1a1^-1b1^-1s1s2"]
    assert pres.model is None
    with pytest.raises(OrbifoldError):
        pres.evaluate((("a1", 1),))


def test_disk_two_cone_points():
    pres = presentation(OrbifoldSpec(True, 0, 1, (3, 5)))
    assert pres.generators == ("t1", "s1", "s2")
    assert _fmt(pres) == ["s1^3", "s2^5", "s1s2t1^-1"]
    assert pres.check_relators()
    assert pres.substitution["t1"] == ((0, 1), (1, 1))


def test_moebius_band():
    pres = presentation(OrbifoldSpec(False, 1, 1))
    assert pres.generators == ("a1", "t1")
    assert _fmt(pres) == ["a1^2t1^-1"]
    assert pres.check_relators()


def test_nonorientable_relator_shape():
    pres = presentation(OrbifoldSpec(False, 3, 2, (2,)))
    assert _fmt(pres)[-1] == "a1^2a2^2a3^2s1t2^-1t1^-1"
    assert pres.check_relators()


@given(st.booleans(), st.integers(0, 2), st.integers(1, 3), st.lists(st.integers(2, 6), max_size=3))
def test_long_relation_dies_in_model(orientable, genus, q, cones):
    if not orientable:
        genus += 1
    pres = presentation(OrbifoldSpec(orientable, genus, q, tuple(cones)))
    assert pres.check_relators()
    # rank of the free-product model: all but the last boundary generator
    assert pres.model.rank == len(pres.generators) - 1


def test_every_small_spec_presents():
    specs = list(small_orientable_specs())
    assert specs
    for spec in specs:
        assert presentation(spec).check_relators(), spec.label()


def test_small_and_large():
    assert is_small(OrbifoldSpec(True, 0, 3, (2, 3)))
    assert is_small(OrbifoldSpec(True, 0, 1, (2, 3)))
    assert not is_small(OrbifoldSpec(True, 0, 1, (2,)))
    assert is_small(OrbifoldSpec(False, 1, 1))
    assert not is_small(OrbifoldSpec(True, 1, 1))
    assert not is_small(OrbifoldSpec(True, 0, 2, (2, 2, 2)))
    assert not is_sufficiently_large(OrbifoldSpec(True, 0, 0, (2, 2, 2)))
    assert is_sufficiently_large(OrbifoldSpec(True, 0, 0, (2, 2, 2, 2)))
    assert is_sufficiently_large(OrbifoldSpec(True, 1, 0, (2, 2)))
    assert not is_sufficiently_large(OrbifoldSpec(False, 1, 0, (3,)))
    assert is_sufficiently_large(OrbifoldSpec(False, 1, 0, (3, 3)))
    assert not is_sufficiently_large(OrbifoldSpec(True, 2, 1))


def test_standard_tuple_closed_genus_two():
    spec = OrbifoldSpec(True, 2, 0)
    assert standard_tuple(spec) == ((("a1", 1),), (("b1", 1),), (("a2", 1),), (("b2", 1),))
    assert admissible_selections(spec) == [((), ())]


def test_standard_tuple_constraints():
    spec = OrbifoldSpec(True, 0, 1, (3, 5))
    assert admissible_selections(spec) == [((), (1, 2)), ((1,), (1,)), ((1,), (2,))]
    assert standard_tuple(spec, (), (1, 2), (2, 3)) == ((("s1", 2),), (("s2", 3),))
    with pytest.raises(OrbifoldError, match="not a positive unit"):
        standard_tuple(spec, (), (1, 2), (3, 1))
    with pytest.raises(OrbifoldError, match="total size"):
        standard_tuple(spec, (), (1,), (1,))
    with pytest.raises(OrbifoldError, match="strictly increasing"):
        standard_tuple(spec, (), (2, 1), (1, 1))
    with pytest.raises(OrbifoldError, match="one exponent"):
        standard_tuple(spec, (1,), (1,), ())


@pytest.mark.parametrize("spec", [OrbifoldSpec(True, 0, 1, (3, 5)), OrbifoldSpec(True, 0, 2, (2, 3)),
                                  OrbifoldSpec(True, 0, 2, (3,))])
def test_standard_tuples_generate_model(spec):
    pres = presentation(spec)
    G = pres.model
    for js, is_ in admissible_selections(spec):
        nus = [1] * len(is_)
        if is_:
            nus[0] = 2 if spec.cone_orders[is_[0] - 1] % 2 else 1
        tup = standard_tuple(spec, js, is_, nus)
        ent = tuple(pres.evaluate(w) for w in tup)
        # a slot cannot be powered by itself, so the basis keeps the chosen unit exponent;
        # it still generates since the exponent is prime to the cone order
        exps = [1] * G.rank
        if is_:
            exps[G.names.index(f"s{is_[0]}")] = nus[0]
        basis = NielsenTuple(G, tuple(((k, e),) for k, e in enumerate(exps)))
        res = equivalent_bounded(NielsenTuple(G, ent), basis, max_states=50_000)
        assert res.verdict == "equivalent", (spec.label(), js, is_)


def test_invalid_specs():
    with pytest.raises(OrbifoldError):
        OrbifoldSpec(False, 0)
    with pytest.raises(OrbifoldError):
        OrbifoldSpec(True, 0, 0, (1,))
    with pytest.raises(OrbifoldError):
        OrbifoldSpec(True, -1)


def test_labels_and_json():
    assert OrbifoldSpec(True, 1, 0, (5, 4)).label() == "T2(5,4)"
    assert OrbifoldSpec(True, 0, 1, (2, 2)).label() == "D2(2,2)"
    assert OrbifoldSpec(True, 0, 3, (2, 3)).label() == "P(2,3)"
    assert OrbifoldSpec(False, 1, 1).label() == "Mob"
    for spec in [OrbifoldSpec(True, 1, 0, (5, 4)), OrbifoldSpec(False, 2, 1, (3,))]:
        d = json.loads(json.dumps(spec.to_json()))
        assert OrbifoldSpec.from_json(d) == spec
    js = presentation(OrbifoldSpec(True, 0, 1, (2, 3))).to_json()
    assert js["relators"][-1] == "s1s2t1^-1"
    assert FpcGroup.from_json(js["model"]).orders == (2, 3)
