from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from orbifold_folds.decorated import is_tame
from orbifold_folds.generators import (
    MOVE_KINDS,
    default_seed,
    make_rng,
    move_instance,
    random_apath,
    random_folded_morphism,
    random_gog,
    random_small_spec,
    random_tame_dm,
    small_orientable_specs,
    wedge_morphism,
)
from orbifold_folds.gg_morphism import check_morphism, is_folded
from orbifold_folds.graph_of_groups import GraphOfGroups, check_path
from orbifold_folds.orbifolds import OrbifoldSpec, is_small

seeds = st.integers(0, 10**6)


def test_seed_env(monkeypatch):
    monkeypatch.delenv("ORBIFOLD_FOLDS_SEED", raising=False)
    base = default_seed()
    monkeypatch.setenv("ORBIFOLD_FOLDS_SEED", "99")
    assert default_seed() == 99
    assert make_rng().random() == random.Random(99).random()
    monkeypatch.setenv("ORBIFOLD_FOLDS_SEED", "")
    assert default_seed() == base


@given(seeds)
@settings(max_examples=30)
def test_gog_and_paths_valid_and_deterministic(seed):
    g1 = random_gog(random.Random(seed))
    g2 = random_gog(random.Random(seed))
    assert g1.to_json() == g2.to_json()
    assert GraphOfGroups.from_json(g1.to_json()).to_json() == g1.to_json()
    rng = random.Random(seed)
    p = random_apath(rng, g1, 4)
    check_path(g1, p)
    q = random_apath(rng, g1, 3, closed=True)
    check_path(g1, q)
    assert q.end(g1) == q.start


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_folded_morphisms(seed):
    m = random_folded_morphism(random.Random(seed))
    assert check_morphism(m) == []
    assert is_folded(m).folded is True
    assert random_folded_morphism(random.Random(seed)).to_json() == m.to_json()


def test_wedge_needs_edges():
    lonely = random_gog(random.Random(0), n_vertices=1, extra_edges=0)
    with pytest.raises(ValueError):
        wedge_morphism(random.Random(0), lonely)


def test_small_specs():
    specs = list(small_orientable_specs(4, 7))
    assert len(set(specs)) == len(specs)
    assert all(is_small(s) and s.orientable and s.genus == 0 for s in specs)
    assert OrbifoldSpec(True, 0, 1, (2, 3)) in specs
    assert OrbifoldSpec(True, 0, 3) in specs
    assert OrbifoldSpec(True, 0, 1, (2,)) not in specs
    rng = make_rng(3)
    assert all(is_small(random_small_spec(rng)) for _ in range(20))


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_tame_dms(seed):
    dm = random_tame_dm(random.Random(seed))
    assert is_tame(dm.sg, dm).tame
    assert random_tame_dm(random.Random(seed)).to_json() == dm.to_json()


@pytest.mark.parametrize("kind", MOVE_KINDS)
def test_move_instance_each_kind(kind):
    a = move_instance(make_rng(11), kind)
    b = move_instance(make_rng(11), kind)
    assert a.kind == kind and check_morphism(a.morphism) == []
    assert a.morphism.to_json() == b.morphism.to_json() and a.args == b.args
    with pytest.raises(KeyError):
        move_instance(make_rng(0), "nope")
