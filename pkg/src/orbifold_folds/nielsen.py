"""Nielsen transformations on tuples and a bounded equivalence search."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .fpc_words import FpcGroup, FpcWord


class NielsenError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    """``T1(i)``: invert; ``T2(i, j)``: swap; ``T3(i, j)``: ``g_i <- g_i g_j``.  1-based."""

    kind: str
    i: int
    j: int = 0

    def to_json(self) -> dict:
        out = {"move": self.kind, "i": self.i}
        if self.kind != "T1":
            out["j"] = self.j
        return out

    @classmethod
    def from_json(cls, d) -> "Move":
        return cls(d["move"], int(d["i"]), int(d.get("j", 0)))

    def __str__(self) -> str:
        return f"{self.kind}({self.i})" if self.kind == "T1" else f"{self.kind}({self.i},{self.j})"


@dataclass(frozen=True)
class NielsenTuple:
    group: FpcGroup
    entries: tuple[FpcWord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.group.normalize(w) for w in self.entries))

    @property
    def norm(self) -> int:
        return sum(len(w) for w in self.entries)

    def key(self) -> tuple:
        return canonical_key(self.group, self.entries)

    def to_json(self) -> dict:
        return {"group": self.group.to_json(),
                "entries": [[[f, e] for f, e in w] for w in self.entries]}

    @classmethod
    def from_json(cls, d) -> "NielsenTuple":
        G = FpcGroup.from_json(d["group"])
        return cls(G, tuple(tuple((int(f), int(e)) for f, e in w) for w in d["entries"]))


def apply(t: NielsenTuple, move: Move) -> NielsenTuple:
    return NielsenTuple(t.group, _apply(t.group, t.entries, move))


def _apply(G: FpcGroup, ent: Sequence[FpcWord], mv: Move) -> tuple[FpcWord, ...]:
    n = len(ent)
    i, j = mv.i - 1, mv.j - 1
    if not 0 <= i < n:
        raise NielsenError(f"index {mv.i} out of range")
    out = list(ent)
    if mv.kind == "T1":
        out[i] = G.inv(out[i])
    elif mv.kind in ("T2", "T3"):
        if not 0 <= j < n or i == j:
            raise NielsenError(f"{mv.kind} needs two distinct valid indices")
        if mv.kind == "T2":
            out[i], out[j] = out[j], out[i]
        else:
            out[i] = G.mul(out[i], out[j])
    else:
        raise NielsenError(f"unknown move {mv.kind}")
    return tuple(out)


def replay(t: NielsenTuple, trace: Iterable[Move]) -> NielsenTuple:
    ent = t.entries
    for mv in trace:
        ent = _apply(t.group, ent, mv)
    return NielsenTuple(t.group, ent)


def inverse_trace(trace: Sequence[Move]) -> list[Move]:
    out: list[Move] = []
    for mv in reversed(trace):
        if mv.kind == "T3":
            out += [Move("T1", mv.j), Move("T3", mv.i, mv.j), Move("T1", mv.j)]
        else:
            out.append(mv)
    return out


def _canon(G: FpcGroup, w: FpcWord) -> tuple:
    return min(G.word_key(w), G.word_key(G.inv(w)))


def canonical_key(G: FpcGroup, entries: Sequence[FpcWord]) -> tuple:
    """Invariant under inverting and permuting entries."""
    return tuple(sorted(_canon(G, w) for w in entries))


def _neighbour_moves(n: int) -> list[list[Move]]:
    ops = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            ops.append([Move("T3", i, j)])                                   # g_i g_j
            ops.append([Move("T1", i), Move("T3", i, j)])                    # ~ g_j^-1 g_i
            ops.append([Move("T1", j), Move("T3", i, j), Move("T1", j)])     # g_i g_j^-1
            ops.append([Move("T1", i), Move("T1", j), Move("T3", i, j), Move("T1", j)])  # ~ g_j g_i
    return ops


def _fixup(G: FpcGroup, src: Sequence[FpcWord], dst: Sequence[FpcWord]) -> list[Move]:
    """T1/T2 moves turning ``src`` into ``dst`` (same canonical key)."""
    cur = list(src)
    out: list[Move] = []
    for k in range(len(dst)):
        want = dst[k]
        m = next((x for x in range(k, len(cur)) if cur[x] == want), None)
        if m is None:
            m = next(x for x in range(k, len(cur)) if cur[x] == G.inv(want))
        if m != k:
            out.append(Move("T2", k + 1, m + 1))
            cur[k], cur[m] = cur[m], cur[k]
        if cur[k] != want:
            out.append(Move("T1", k + 1))
            cur[k] = G.inv(cur[k])
    return out


@dataclass(frozen=True)
class SearchResult:
    verdict: str  # "equivalent" or "unknown"
    trace: tuple[Move, ...] = ()
    states: int = 0

    @property
    def depth(self) -> int:
        return len(self.trace)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "trace": [m.to_json() for m in self.trace],
                "depth": self.depth, "states": self.states}


class _Side:
    def __init__(self, G: FpcGroup, start: tuple[FpcWord, ...]):
        self.G = G
        k = canonical_key(G, start)
        self.info: dict[tuple, tuple] = {k: (start, None, ())}
        self.frontier = [k]

    def path(self, key: tuple) -> list[Move]:
        moves: list[Move] = []
        while True:
            _, parent, mv = self.info[key]
            if parent is None:
                break
            moves = list(mv) + moves
            key = parent
        return moves

    def expand(self, ops, max_norm: int) -> list[tuple]:
        new = []
        for key in self.frontier:
            rep = self.info[key][0]
            for op in ops:
                ent = rep
                for mv in op:
                    ent = _apply(self.G, ent, mv)
                if sum(len(w) for w in ent) > max_norm:
                    continue
                k2 = canonical_key(self.G, ent)
                if k2 not in self.info:
                    self.info[k2] = (ent, key, tuple(op))
                    new.append(k2)
        self.frontier = new
        return new


def equivalent_bounded(a: NielsenTuple, b: NielsenTuple, max_norm: int | None = None,
                       max_states: int = 10**6) -> SearchResult:
    if a.group != b.group or len(a.entries) != len(b.entries):
        raise NielsenError("tuples must have the same ambient group and size")
    G = a.group
    if max_norm is None:
        max_norm = max(a.norm, b.norm) + 8
    ops = _neighbour_moves(len(a.entries))
    fa, fb = _Side(G, a.entries), _Side(G, b.entries)
    meet = a.key() if a.key() == b.key() else None
    while meet is None:
        if len(fa.info) + len(fb.info) > max_states:
            break
        side, other = (fa, fb) if len(fa.frontier) <= len(fb.frontier) else (fb, fa)
        if not side.frontier:
            break
        new = side.expand(ops, max_norm)
        hits = [k for k in new if k in other.info]
        if hits:
            meet = min(hits)
    states = len(fa.info) + len(fb.info)
    if meet is None:
        return SearchResult("unknown", (), states)
    ra, rb = fa.info[meet][0], fb.info[meet][0]
    trace = fa.path(meet) + _fixup(G, ra, rb) + inverse_trace(fb.path(meet))
    if replay(a, trace).entries != b.entries:
        raise AssertionError("internal error: trace does not replay")
    return SearchResult("equivalent", tuple(trace), states)


def is_reducible_witness(t: NielsenTuple, max_norm: int | None = None,
                         max_states: int = 10**6) -> SearchResult:
    """Search for a trace ending with the identity in the last slot."""
    G = t.group
    n = len(t.entries)
    if max_norm is None:
        max_norm = t.norm + 8
    side = _Side(G, t.entries)
    ops = _neighbour_moves(n)
    hit = t.key() if any(not w for w in t.entries) else None
    while hit is None and side.frontier and len(side.info) <= max_states:
        new = side.expand(ops, max_norm)
        cands = [k for k in new if any(not w for w in side.info[k][0])]
        if cands:
            hit = min(cands)
    if hit is None:
        return SearchResult("unknown", (), len(side.info))
    rep = side.info[hit][0]
    trace = side.path(hit)
    pos = max(i for i, w in enumerate(rep) if not w)
    if pos != n - 1:
        trace.append(Move("T2", pos + 1, n))
    res = replay(t, trace)
    if res.entries[-1]:
        raise AssertionError("internal error: reduction trace is wrong")
    return SearchResult("equivalent", tuple(trace), len(side.info))
