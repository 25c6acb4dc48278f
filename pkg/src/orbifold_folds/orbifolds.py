"""Compact 2-orbifolds without reflector curves and their group presentations."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .fpc_words import FpcGroup, FpcWord

# a presentation word: list of (generator name, exponent)
NamedWord = tuple[tuple[str, int], ...]


class OrbifoldError(ValueError):
    pass


@dataclass(frozen=True)
class OrbifoldSpec:
    orientable: bool
    genus: int
    boundary_count: int = 0
    cone_orders: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "cone_orders", tuple(int(p) for p in self.cone_orders))
        if self.genus < 0 or self.boundary_count < 0:
            raise OrbifoldError("genus and boundary count must be nonnegative")
        if not self.orientable and self.genus < 1:
            raise OrbifoldError("a non-orientable surface has genus at least 1")
        if any(p < 2 for p in self.cone_orders):
            raise OrbifoldError("cone orders must be at least 2")

    @property
    def closed(self) -> bool:
        return self.boundary_count == 0

    @property
    def q(self) -> int:
        return self.boundary_count

    @property
    def r(self) -> int:
        return len(self.cone_orders)

    def surface_generators(self) -> list[str]:
        if self.orientable:
            out = []
            for i in range(1, self.genus + 1):
                out += [f"a{i}", f"b{i}"]
            return out
        return [f"a{i}" for i in range(1, self.genus + 1)]

    def surface_word(self) -> NamedWord:
        gens = self.surface_generators()
        out: list[tuple[str, int]] = []
        if self.orientable:
            for i in range(0, len(gens), 2):
                a, b = gens[i], gens[i + 1]
                out += [(a, 1), (b, 1), (a, -1), (b, -1)]
        else:
            out = [(a, 2) for a in gens]
        return tuple(out)

    def label(self) -> str:
        if self.orientable:
            base = {0: "S2", 1: "T2"}.get(self.genus, f"Sigma{self.genus}")
        else:
            base = {1: "RP2", 2: "K"}.get(self.genus, f"N{self.genus}")
        if self.orientable and self.genus == 0 and self.q:
            base = {1: "D2", 2: "A", 3: "P"}.get(self.q, f"S2-{self.q}")
        elif self.q:
            base += f"-{self.q}"
        if not self.orientable and self.genus == 1 and self.q == 1:
            base = "Mob"
        return base + ("(" + ",".join(map(str, self.cone_orders)) + ")" if self.cone_orders else "")

    def to_json(self) -> dict:
        return {"orientable": self.orientable, "genus": self.genus,
                "boundary_count": self.boundary_count, "cone_orders": list(self.cone_orders)}

    @classmethod
    def from_json(cls, d) -> "OrbifoldSpec":
        return cls(bool(d["orientable"]), int(d["genus"]), int(d.get("boundary_count", 0)),
                   tuple(d.get("cone_orders", ())))


@dataclass(frozen=True)
class OrbifoldPresentation:
    spec: OrbifoldSpec
    generators: tuple[str, ...]
    relators: tuple[NamedWord, ...]
    model: FpcGroup | None = None
    substitution: dict = field(default_factory=dict, compare=False, hash=False)

    def evaluate(self, w: Sequence[tuple[str, int]]) -> FpcWord:
        """Evaluate a word in the free-product model (bounded orbifolds only)."""
        if self.model is None:
            raise OrbifoldError("closed orbifold groups have no free-product model here")
        G = self.model
        out: FpcWord = ()
        for name, e in w:
            out = G.mul(out, G.power(self.substitution[name], e))
        return out

    def check_relators(self) -> bool:
        return all(not self.evaluate(r) for r in self.relators)

    def format_word(self, w: NamedWord) -> str:
        return "".join(n if e == 1 else f"{n}^{e}" for n, e in w) or "1"

    def to_json(self) -> dict:
        out = {"spec": self.spec.to_json(), "generators": list(self.generators),
               "relators": [self.format_word(r) for r in self.relators]}
        if self.model is not None:
            out["model"] = self.model.to_json()
            out["substitution"] = {k: [[f, e] for f, e in v] for k, v in self.substitution.items()}
        return out


def presentation(spec: OrbifoldSpec) -> OrbifoldPresentation:
    surf = spec.surface_generators()
    ts = [f"t{j}" for j in range(1, spec.q + 1)]
    ss = [f"s{i}" for i in range(1, spec.r + 1)]
    gens = tuple(surf + ts + ss)
    rels: list[NamedWord] = [((s, p),) for s, p in zip(ss, spec.cone_orders)]
    long = list(spec.surface_word()) + [(s, 1) for s in ss] + [(t, -1) for t in reversed(ts)]
    rels.append(tuple(long))
    if spec.closed:
        return OrbifoldPresentation(spec, gens, tuple(rels))
    free = surf + ts[:-1]
    orders = [0] * len(free) + list(spec.cone_orders)
    G = FpcGroup(tuple(orders), tuple(free + ss))
    sub: dict[str, FpcWord] = {}
    for i, n in enumerate(free + ss):
        sub[n] = ((i, 1),)
    prefix: FpcWord = ()
    for t in ts[:-1]:
        prefix = G.mul(prefix, sub[t])
    rhs: FpcWord = ()
    for n, e in list(spec.surface_word()) + [(s, 1) for s in ss]:
        rhs = G.mul(rhs, G.power(sub[n], e))
    sub[ts[-1]] = G.mul(G.inv(prefix), rhs)
    return OrbifoldPresentation(spec, gens, tuple(rels), G, sub)


def is_small(spec: OrbifoldSpec) -> bool:
    if spec.orientable and spec.genus == 0 and spec.q >= 1 and spec.r <= 2:
        return spec.q >= 2 or spec.r == 2
    return (not spec.orientable) and spec.genus == 1 and spec.q == 1 and spec.r == 0


def is_moebius(spec: OrbifoldSpec) -> bool:
    return (not spec.orientable) and spec.genus == 1 and spec.q == 1 and spec.r == 0


def is_sufficiently_large(spec: OrbifoldSpec) -> bool:
    if not spec.closed:
        return False
    if spec.orientable and spec.genus == 0:
        return spec.r >= 4
    if not spec.orientable and spec.genus == 1:
        return spec.r >= 2
    return True


def _selection_size(spec: OrbifoldSpec) -> int:
    # a closed surface without cone points keeps just its surface generators
    return max(spec.q + spec.r - 1, 0)


def standard_tuple(spec: OrbifoldSpec, boundary_indices: Sequence[int] = (),
                   cone_indices: Sequence[int] = (), exponents: Sequence[int] = ()) -> tuple[NamedWord, ...]:
    """Standard generating tuple; indices are 1-based as in the usual notation."""
    js, is_, nus = list(boundary_indices), list(cone_indices), list(exponents)
    if len(js) + len(is_) != _selection_size(spec):
        raise OrbifoldError("boundary and cone selections must have total size q + r - 1")
    if js != sorted(set(js)) or any(not 1 <= j <= spec.q for j in js):
        raise OrbifoldError("boundary indices must be strictly increasing within 1..q")
    if is_ != sorted(set(is_)) or any(not 1 <= i <= spec.r for i in is_):
        raise OrbifoldError("cone indices must be strictly increasing within 1..r")
    if len(nus) != len(is_):
        raise OrbifoldError("one exponent per selected cone point is required")
    for i, nu in zip(is_, nus):
        if nu < 1 or gcd(nu, spec.cone_orders[i - 1]) != 1:
            raise OrbifoldError(f"exponent {nu} is not a positive unit modulo {spec.cone_orders[i - 1]}")
    out: list[NamedWord] = [((a, 1),) for a in spec.surface_generators()]
    out += [((f"t{j}", 1),) for j in js]
    out += [((f"s{i}", nu),) for i, nu in zip(is_, nus)]
    return tuple(out)


def admissible_selections(spec: OrbifoldSpec) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All index selections satisfying the size and ordering constraints."""
    from itertools import combinations
    n = _selection_size(spec)
    out = []
    for qq in range(0, spec.q + 1):
        rr = n - qq
        if not 0 <= rr <= spec.r:
            continue
        for js in combinations(range(1, spec.q + 1), qq):
            for is_ in combinations(range(1, spec.r + 1), rr):
                out.append((js, is_))
    return out
