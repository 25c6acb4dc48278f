"""Arithmetic in free products of cyclic groups.

An element is stored in normal form as a tuple of syllables
``(factor, exponent)``: adjacent syllables lie in different factors, no
exponent is zero, and exponents in a finite factor of order ``p`` are kept in
``1..p-1``.  Factor order ``0`` means infinite cyclic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator, Sequence

FpcWord = tuple[tuple[int, int], ...]

IDENTITY: FpcWord = ()


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class FpcGroup:
    orders: tuple[int, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "orders", tuple(int(p) for p in self.orders))
        for p in self.orders:
            if p < 0 or p == 1:
                raise WordError(f"invalid factor order {p}")
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != len(self.orders):
                raise WordError("names and orders differ in length")
            if len(set(self.names)) != len(self.names):
                raise WordError("duplicate factor names")

    @property
    def rank(self) -> int:
        return len(self.orders)

    def factor_name(self, i: int) -> str:
        return self.names[i] if self.names is not None else f"x{i + 1}"

    def is_finite(self) -> bool:
        return len(self.orders) == 0 or (len(self.orders) == 1 and self.orders[0] > 0)

    def cardinality(self) -> int:
        """Group order, 0 when infinite."""
        if not self.orders:
            return 1
        return self.orders[0] if self.is_finite() else 0

    def gen(self, i: int, e: int = 1) -> FpcWord:
        return self.normalize(((i, e),))

    # -- normal forms
    def _norm_exp(self, f: int, e: int) -> int:
        p = self.orders[f]
        return e % p if p else e

    def normalize(self, letters: Iterable[tuple[int, int]]) -> FpcWord:
        stack: list[tuple[int, int]] = []
        n = len(self.orders)
        for f, e in letters:
            if not 0 <= f < n:
                raise WordError(f"factor index {f} out of range")
            e = self._norm_exp(f, int(e))
            if e == 0:
                continue
            if stack and stack[-1][0] == f:
                e = self._norm_exp(f, stack[-1][1] + e)
                stack.pop()
                if e:
                    stack.append((f, e))
            else:
                stack.append((f, e))
        return tuple(stack)

    def check(self, w: Sequence[tuple[int, int]]) -> FpcWord:
        """Validate a word that claims to be in normal form."""
        w = tuple((int(f), int(e)) for f, e in w)
        if self.normalize(w) != w:
            raise WordError(f"word {list(w)} is not in normal form")
        return w

    def mul(self, *words: FpcWord) -> FpcWord:
        if len(words) == 2:
            a, b = words
            if not a:
                return b
            if not b:
                return a
        return self.normalize(itertools.chain.from_iterable(words))

    def inv(self, w: FpcWord) -> FpcWord:
        return tuple((f, self._norm_exp(f, -e)) for f, e in reversed(w))

    def conj(self, g: FpcWord, w: FpcWord) -> FpcWord:
        return self.mul(g, w, self.inv(g))

    def cyclic_split(self, w: FpcWord) -> tuple[FpcWord, FpcWord]:
        """Return ``(u, r)`` with ``w = u r u^-1`` and ``r`` cyclically reduced."""
        u: list[tuple[int, int]] = []
        r = list(w)
        while len(r) >= 2 and r[0][0] == r[-1][0]:
            f = r[0][0]
            e1, e2 = r[0][1], r[-1][1]
            u.append((f, e1))
            mid = r[1:-1]
            tot = self._norm_exp(f, e1 + e2)
            r = mid + ([(f, tot)] if tot else [])
        return tuple(u), tuple(r)

    def power(self, w: FpcWord, n: int) -> FpcWord:
        if n == 0 or not w:
            return IDENTITY
        u, r = self.cyclic_split(w)
        if len(r) == 1:
            f, e = r[0]
            core = self.normalize(((f, e * n),))
        else:
            rr = r if n > 0 else self.inv(r)
            core = rr * abs(n)
        return self.mul(u, core, self.inv(u))

    def order_of(self, w: FpcWord) -> int:
        _, r = self.cyclic_split(w)
        if not r:
            return 1
        if len(r) == 1:
            f, e = r[0]
            p = self.orders[f]
            return p // gcd(p, e) if p else 0
        return 0

    def is_power_of(self, w: FpcWord, t: FpcWord) -> int | None:
        """Exact solver for ``w = t^n``; returns ``n`` or ``None``."""
        if not t:
            if not w:
                return 0
            raise WordError("cannot take powers of the identity")
        if not w:
            return 0
        u, r = self.cyclic_split(t)
        x = self.mul(self.inv(u), w, u)
        if len(r) == 1:
            f, e = r[0]
            if len(x) != 1 or x[0][0] != f:
                return None
            target = x[0][1]
            p = self.orders[f]
            if p:
                for n in range(1, p):
                    if (e * n - target) % p == 0:
                        return n
                return None
            return target // e if target % e == 0 else None
        if len(x) % len(r):
            return None
        k = len(x) // len(r)
        if x == r * k:
            return k
        if x == self.inv(r) * k:
            return -k
        return None

    def word_key(self, w: FpcWord) -> tuple:
        weight = sum(abs(e) if self.orders[f] == 0 else 1 for f, e in w)
        return (len(w), weight, w)

    def coset_min_rep(self, w: FpcWord, t: FpcWord) -> tuple[FpcWord, int]:
        """Minimal element of the coset ``w<t>`` and the exponent used."""
        if not t:
            raise WordError("cyclic subgroup generator must be nontrivial")
        u, r = self.cyclic_split(t)
        order = self.order_of(t)
        if order:
            cands: Iterable[int] = range(order)
        elif len(r) == 1:
            f, e = r[0]
            y = self.mul(w, u)
            m = y[-1][1] if y and y[-1][0] == f else 0
            lo = (-m) // e if e > 0 else -((-m) // -e) - 1
            cands = sorted({0, 1, -1, lo - 1, lo, lo + 1, lo + 2})
        else:
            bound = (2 * len(w) + 2 * len(u)) // len(r) + 1
            cands = range(-bound, bound + 1)
        best = None
        for n in cands:
            cand = self.mul(w, self.power(t, n))
            key = (self.word_key(cand), abs(n), n)
            if best is None or key < best[0]:
                best = (key, cand, n)
        assert best is not None
        return best[1], best[2]

    def conjugator(self, w: FpcWord, y: FpcWord) -> FpcWord | None:
        """Some ``h`` with ``w = h y h^-1``, or ``None`` if not conjugate."""
        u1, r1 = self.cyclic_split(w)
        u2, r2 = self.cyclic_split(y)
        if len(r1) != len(r2):
            return None
        c: FpcWord | None = None
        if len(r1) <= 1:
            if r1 == r2:
                c = IDENTITY
        else:
            n = len(r2)
            for k in range(n):
                if r2[k:] + r2[:k] == r1:
                    c = self.inv(r2[:k])
                    break
        if c is None:
            return None
        return self.mul(u1, c, self.inv(u2))

    def elements(self) -> list[FpcWord]:
        """All elements of a finite group."""
        if not self.is_finite():
            raise WordError("group is infinite")
        if not self.orders:
            return [IDENTITY]
        return [IDENTITY] + [((0, e),) for e in range(1, self.orders[0])]

    def words_up_to(self, max_len: int, max_exp: int = 2) -> Iterator[FpcWord]:
        """Enumerate normal-form words by syllable length (deterministic)."""
        letters = []
        for f, p in enumerate(self.orders):
            exps = range(1, p) if p else [e for k in range(1, max_exp + 1) for e in (k, -k)]
            letters.extend((f, e) for e in exps)
        layer: list[FpcWord] = [IDENTITY]
        yield IDENTITY
        for _ in range(max_len):
            nxt = []
            for w in layer:
                for f, e in letters:
                    if w and w[-1][0] == f:
                        continue
                    nw = w + ((f, e),)
                    nxt.append(nw)
                    yield nw
            layer = nxt

    def format(self, w: FpcWord) -> str:
        if not w:
            return "1"
        return "*".join(self.factor_name(f) + ("" if e == 1 else f"^{e}") for f, e in w)

    def to_json(self) -> dict:
        out: dict = {"orders": list(self.orders)}
        if self.names is not None:
            out["names"] = list(self.names)
        return out

    @classmethod
    def from_json(cls, data) -> "FpcGroup":
        return cls(tuple(data["orders"]), tuple(data["names"]) if data.get("names") is not None else None)

    def free_product(self, other: "FpcGroup") -> "FpcGroup":
        names = None
        if self.names is not None and other.names is not None:
            names = self.names + other.names
        return FpcGroup(self.orders + other.orders, names)


def word_to_json(w: FpcWord) -> list[list[int]]:
    return [[f, e] for f, e in w]


def word_from_json(data) -> FpcWord:
    return tuple((int(f), int(e)) for f, e in data)


def shift_word(w: FpcWord, offset: int) -> FpcWord:
    return tuple((f + offset, e) for f, e in w)


@dataclass(frozen=True)
class FpcHom:
    """Homomorphism determined by the images of the source factor generators."""

    source: FpcGroup
    target: FpcGroup
    images: tuple[FpcWord, ...]

    def __post_init__(self) -> None:
        imgs = tuple(self.target.check(w) for w in self.images)
        object.__setattr__(self, "images", imgs)
        if len(imgs) != self.source.rank:
            raise WordError("one image per source factor is required")
        for i, (p, w) in enumerate(zip(self.source.orders, imgs)):
            if p:
                q = self.target.order_of(w)
                if q == 0 or p % q:
                    raise WordError(f"image of factor {i} has order {q}, not dividing {p}")

    def __call__(self, w: FpcWord) -> FpcWord:
        parts = [self.target.power(self.images[f], e) for f, e in w]
        return self.target.normalize(itertools.chain.from_iterable(parts))

    def compose(self, inner: "FpcHom") -> "FpcHom":
        """``self o inner``."""
        return FpcHom(inner.source, self.target, tuple(self(w) for w in inner.images))

    def conjugated(self, g: FpcWord) -> "FpcHom":
        return FpcHom(self.source, self.target, tuple(self.target.conj(g, w) for w in self.images))

    @classmethod
    def identity(cls, g: FpcGroup) -> "FpcHom":
        return cls(g, g, tuple(g.gen(i) for i in range(g.rank)))

    # -- structure
    def _syllabic(self) -> tuple[FpcWord, list[tuple[int, int]]] | None:
        """Common conjugator ``u`` and syllables when each image is ``u s u^-1``."""
        tg = self.target
        conj = None
        syl = []
        for w in self.images:
            u, r = tg.cyclic_split(w)
            if len(r) != 1:
                return None
            if conj is None:
                conj = u
            elif u != conj:
                return None
            syl.append(r[0])
        if conj is None:
            conj = IDENTITY
        return conj, syl

    def is_injective(self, search_len: int = 4) -> tuple[bool | None, FpcWord | None]:
        """Three-valued injectivity test with a kernel witness when false."""
        src, tg = self.source, self.target
        for i, (p, w) in enumerate(zip(src.orders, self.images)):
            q = tg.order_of(w)
            if p and q != p:
                return False, ((i, q),)
            if not p and q:
                return False, ((i, q),)
        if src.rank == 0:
            return True, None
        if tg.is_finite():
            if src.rank == 1:
                return True, None
            a, b = ((0, 1),), ((1, 1),)
            wit = src.mul(a, b, src.inv(a), src.inv(b))
            return False, wit
        sy = self._syllabic()
        if sy is not None:
            _, syl = sy
            facs = [f for f, _ in syl]
            if len(set(facs)) == len(facs):
                ok = all(tg.orders[f] != 0 or p == 0 for (f, _), p in zip(syl, src.orders))
                if ok:
                    return True, None
        for w in src.words_up_to(search_len):
            if w and not self(w):
                return False, w
        return None, None

    def preimage(self, w: FpcWord, search_len: int = 5) -> tuple[bool | None, FpcWord | None]:
        """Decide whether ``w`` lies in the image; returns a preimage when it does."""
        src, tg = self.source, self.target
        if not w:
            return True, IDENTITY
        if src.rank == 0:
            return False, None
        if tg.is_finite():
            seen = {IDENTITY: IDENTITY}
            frontier = [IDENTITY]
            gens = [((i, 1),) for i in range(src.rank)] + [((i, -1),) for i in range(src.rank)]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in gens:
                        pre = src.mul(seen[x], src.normalize(g))
                        y = self(pre)
                        if y not in seen:
                            seen[y] = pre
                            nxt.append(y)
                frontier = nxt
            return (True, seen[w]) if w in seen else (False, None)
        if src.rank == 1:
            n = tg.is_power_of(w, self.images[0]) if self.images[0] else None
            if n is None:
                return False, None
            return True, src.normalize(((0, n),))
        sy = self._syllabic()
        if sy is not None:
            u, syl = sy
            facs = [f for f, _ in syl]
            if len(set(facs)) == len(facs):
                x = tg.mul(tg.inv(u), w, u)
                pre = []
                for f, e in x:
                    if f not in facs:
                        return False, None
                    k = facs.index(f)
                    g = tg.normalize(((f, syl[k][1]),))
                    n = tg.is_power_of(((f, e),), g)
                    if n is None:
                        return False, None
                    pre.append((k, n))
                return True, src.normalize(pre)
        for cand in src.words_up_to(search_len):
            if self(cand) == w:
                return True, cand
        return None, None

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(),
                "images": [word_to_json(w) for w in self.images]}

    @classmethod
    def from_json(cls, data) -> "FpcHom":
        return cls(FpcGroup.from_json(data["source"]), FpcGroup.from_json(data["target"]),
                   tuple(word_from_json(w) for w in data["images"]))
