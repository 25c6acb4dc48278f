"""Command line front end: load and check objects, apply moves, replay scenarios.

Exit codes: 0 pass, 1 a check failed, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import jsonschema

from . import decorated as dec
from .fpc_words import FpcGroup, WordError, word_from_json, word_to_json
from .generators import (default_seed, fold_a2_instance, make_rng, random_tame_dm,
                         small_orientable_specs)
from .gg_morphism import GGMorphism, check_morphism, is_folded
from .graph_core import GraphError
from .graph_of_groups import (APath, GraphOfGroups, PathError, TreeSplitting, check_path, normalize,
                              reduce, vertex_path)
from .moves import (MoveError, UnfoldWitness, check_inverse, check_sigma_relation, elementary_fold_ia,
                    elementary_fold_iiia, fold, move_a0, move_a1, move_a2, unfold, vertex_morphism)
from .nielsen import NielsenError, NielsenTuple, equivalent_bounded, is_reducible_witness, replay
from .orbifolds import OrbifoldError, OrbifoldSpec, presentation

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ schemas

_WORD = {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                    "minItems": 2, "maxItems": 2}}
_GROUP = {"type": "object", "required": ["orders"],
          "properties": {"orders": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                         "names": {"type": ["array", "null"], "items": {"type": "string"}}}}
_GRAPH = {"type": "object", "required": ["vertices"],
          "properties": {"vertices": {"type": "array", "items": {"type": "string"}},
                         "edges": {"type": "array", "items": {
                             "type": "object", "required": ["id", "inv", "from", "to"],
                             "properties": {k: {"type": "string"} for k in ("id", "inv", "from", "to")}}}}}
_GOG = {"type": "object", "required": ["graph", "vertex_groups"],
        "properties": {"graph": _GRAPH,
                       "vertex_groups": {"type": "object", "additionalProperties": _GROUP},
                       "edge_orders": {"type": "object", "additionalProperties": {"type": "integer"}},
                       "boundary": {"type": "object", "additionalProperties": _WORD}}}
_PATH = {"type": "object", "required": ["start", "elements"],
         "properties": {"start": {"type": "string"}, "elements": {"type": "array", "items": _WORD},
                        "edges": {"type": "array", "items": {"type": "string"}}}}
_MORPHISM = {"type": "object", "required": ["source", "target", "vmap", "emap", "vertex_homs", "o"],
             "properties": {"source": _GOG, "target": _GOG,
                            "vmap": {"type": "object", "additionalProperties": {"type": "string"}},
                            "emap": {"type": "object", "additionalProperties": {"type": "string"}},
                            "vertex_homs": {"type": "object",
                                            "additionalProperties": {"type": "array", "items": _WORD}},
                            "edge_homs": {"type": "object", "additionalProperties": {"type": "integer"}},
                            "o": {"type": "object", "additionalProperties": _WORD},
                            "t": {"type": "object", "additionalProperties": _WORD}}}
_SPEC = {"type": "object", "required": ["orientable", "genus"],
         "properties": {"orientable": {"type": "boolean"}, "genus": {"type": "integer", "minimum": 0},
                        "boundary_count": {"type": "integer", "minimum": 0},
                        "cone_orders": {"type": "array", "items": {"type": "integer", "minimum": 2}}}}
_DM = {"type": "object", "required": ["orbifold", "morphism", "base", "paths"],
       "properties": {"orbifold": _SPEC, "morphism": _MORPHISM, "base": {"type": "string"},
                      "paths": {"type": "array", "items": _PATH},
                      "gammas": {"type": "array", "items": _PATH}}}
_NIELSEN = {"type": "object", "required": ["group", "entries"],
            "properties": {"group": _GROUP, "entries": {"type": "array", "items": _WORD}}}
_GOG_PATH = {"type": "object", "required": ["gog", "path"], "properties": {"gog": _GOG, "path": _PATH}}

SCHEMAS: dict[str, dict] = {"gog": _GOG, "path": _PATH, "morphism": _MORPHISM, "orbifold": _SPEC,
                            "dm": _DM, "nielsen": _NIELSEN, "gog-path": _GOG_PATH}
LOADERS: dict[str, Callable[[Any], Any]] = {
    "gog": GraphOfGroups.from_json,
    "path": APath.from_json,
    "morphism": GGMorphism.from_json,
    "orbifold": OrbifoldSpec.from_json,
    "dm": dec.DecoratedMorphism.from_json,
    "nielsen": NielsenTuple.from_json,
    "gog-path": lambda d: (GraphOfGroups.from_json(d["gog"]), APath.from_json(d["path"])),
}
_SEMANTIC = (GraphError, PathError, WordError, MoveError, OrbifoldError, NielsenError,
             dec.DecoratedError, KeyError, ValueError)


class SchemaError(Exception):
    def __init__(self, kind: str, pointer: str, message: str):
        super().__init__(f"{kind} schema error at {pointer or '/'}: {message}")
        self.pointer = pointer


def load(data: Any, kind: str) -> Any:
    """Validate ``data`` against the schema for ``kind`` and build the object."""
    try:
        jsonschema.validate(data, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        pointer = "".join(f"/{p}" for p in exc.absolute_path)
        raise SchemaError(kind, pointer, exc.message) from None
    try:
        return LOADERS[kind](data)
    except _SEMANTIC as exc:
        raise SchemaError(kind, "", f"{type(exc).__name__}: {exc}") from None


def save(obj: Any) -> dict:
    return obj.to_json()


def dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def export_dot(obj: Any) -> str:
    if isinstance(obj, GraphOfGroups):
        return obj.to_dot()
    if isinstance(obj, dec.LocalGraph):
        return obj.to_dot()
    if isinstance(obj, dec.DecoratedMorphism):
        return obj.source.to_dot()
    raise UsageError(f"no DOT export for {type(obj).__name__}")


# ------------------------------------------------------------------ scenarios

@dataclass
class Report:
    name: str
    seed: int
    assertions: list[tuple[str, bool, Any]] = field(default_factory=list)

    def check(self, label: str, ok: bool, detail: Any = None) -> None:
        self.assertions.append((label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.assertions)

    def to_json(self) -> dict:
        return {"scenario": self.name, "seed": self.seed, "pass": self.passed,
                "assertions": [{"name": n, "pass": ok, "detail": d} for n, ok, d in self.assertions]}

    def to_text(self) -> str:
        lines = [f"scenario {self.name} (seed {self.seed})"]
        for n, ok, d in self.assertions:
            lines.append(f"{'PASS' if ok else 'FAIL'} {n}" + ("" if d is None else f"  {json.dumps(d, sort_keys=True)}"))
        lines.append(f"{'PASS' if self.passed else 'FAIL'} {sum(ok for _, ok, _ in self.assertions)}/{len(self.assertions)}")
        return "\n".join(lines) + "\n"


def _scn_d2_local_graph(rep: Report) -> None:
    dm = dec.example_d2_22()
    sg = dm.sg
    dg = dec.induced_decorated_group(sg, dm)
    G = sg.gog.group(dec.V1)
    types = [(sg.format(P.o), P.i) for P in dg.peripherals]
    rep.check("decorated group is consistent", not dg.check(), dg.check() or None)
    rep.check("type of path 1 is (1, 1)", dg.peripherals[0].o == () and dg.peripherals[0].i == 1, types[0])
    s_inv = sg.word(vertex_path(dec.V1, G.inv(((0, 1),))))
    rep.check("type of path 2 is (s_v1^-1, 1)", dg.peripherals[1].o == s_inv and dg.peripherals[1].i == 1, types[1])
    lg = dec.local_graph(dm, "u1")
    edges = {f: (g, j, word_to_json(b)) for f, (g, j, b) in lg.edges.items()}
    rep.check("local graph at u1 is f3->f2 (2,1), f2->f1 (1,1)",
              edges == {"f3": ("f2", 2, []), "f2": ("f1", 1, [])}, {k: list(v) for k, v in sorted(edges.items())})
    rep.check("local graph at u1 is one interval",
              [c.kind for c in lg.components()] == ["interval"])
    rep.check("example is tame", bool(dec.is_tame(sg, dm)))
    dgc = dec.induced_decorated_group(sg, dm, collapse=True)
    rep.check("peripheral subgroups do not fold at the default bound",
              dec.folds_peripheral_subgroups(dgc).witness is None)
    for u in ("u1", "u2"):
        for c in dec.local_graph(dm, u).components():
            errs = dec.check_local_path_formulas(dm, u, c.nodes)
            rep.check(f"path formulas along {'-'.join(c.nodes)}", not errs, errs or None)


def _scn_fold_commutes_a2(rep: Report, count: int = 12) -> None:
    rng = make_rng(rep.seed)
    for k in range(count):
        dm, f1, f2, g, b = fold_a2_instance(rng)
        res = dec.fold_a2_square(dm, f1, f2, g, b)
        rep.check(f"instance {k}: fold({f1},{f2}) and A2 at {g} commute up to verified isomorphism",
                  res.witness.ok)
        rep.check(f"instance {k}: both orders give the same morphism", res.same_morphism)


def _scn_degree_one(rep: Report) -> None:
    for spec in [OrbifoldSpec(True, 0, 1, (2, 3)), OrbifoldSpec(True, 0, 2, (3, 5)),
                 OrbifoldSpec(True, 0, 3, (2, 2)), OrbifoldSpec(True, 0, 4, (4, 7))]:
        dm = dec.degree_one_cover(spec)
        label = spec.label()
        try:
            d = dec.extract_almost_cover(dm.sg, dm, "u")
        except dec.DecoratedError as exc:
            rep.check(f"{label}: extraction", False, str(exc))
            continue
        N = dm.sg.order(dec.V2)
        rep.check(f"{label}: every circle has length q", set(d.circle_lengths.values()) == {spec.q})
        rep.check(f"{label}: k_u = 1 and d = |A_v|", d.k_u == 1 and d.d == N, [d.k_u, d.d])
        rep.check(f"{label}: degree one", d.degree == 1)
        rep.check(f"{label}: special", d.special == (d.k_u <= N) and d.special)
        rep.check(f"{label}: boundary count q + 1", d.boundary_count == spec.q + 1)
        rep.check(f"{label}: structural identification", d.identification["matches"])


def _scn_degree_two(rep: Report) -> None:
    dm = dec.degree_two_d2_34()
    d = dec.extract_almost_cover(dm.sg, dm, "u")
    rep.check("l_u = 2, k_u = 2, d = 1", (d.circle_lengths["u"], d.k_u, d.d) == (2, 2, 1))
    rep.check("degree two", d.degree == 2)
    rep.check("special since k_u <= 4", d.special)
    rep.check("boundary count n + 1 = 2", d.boundary_count == 2)
    res = dec.adjoin_unfold(dm.sg, dm, "u")
    rep.check("adjoin-unfold witness verifies both ways", res.witness.ok)
    mv, pair = dec.fold_after_adjoin(res, "u")
    sq = dec.folds_squares(mv.dm)
    rep.check(f"fold of {pair[0]} with {pair[1]} folds squares", sq is not None, None if sq is None else sq.to_json())


def _scn_theta(rep: Report) -> None:
    for spec in small_orientable_specs(4, 7):
        sg = dec.build_AO(spec)
        errs = dec.check_theta(sg)
        rep.check(f"{spec.label()}: theta kills the relators", not errs, errs or None)


def _scn_nielsen(rep: Report) -> None:
    G = FpcGroup((2, 0), ("s", "t"))
    s, t = ((0, 1),), ((1, 1),)
    cases = [("(st, t) ~ (s, t)", [G.mul(s, t), t], [s, t], 3),
             ("(t, s) ~ (s, t)", [t, s], [s, t], 2),
             ("(s, t^-1) ~ (s, t)", [s, G.inv(t)], [s, t], 2)]
    for label, a, b, depth in cases:
        A, B = NielsenTuple(G, tuple(a)), NielsenTuple(G, tuple(b))
        res = equivalent_bounded(A, B, max_norm=6)
        ok = res.verdict == "equivalent" and res.depth <= depth and replay(A, res.trace).entries == B.entries
        rep.check(f"{label} at depth <= {depth}", ok, [str(m) for m in res.trace])


def _scn_local_lemmas(rep: Report, count: int = 20) -> None:
    rng = make_rng(rep.seed)
    for k in range(count):
        dm = random_tame_dm(rng)
        bad = []
        for u in dm.source.graph.vertices:
            for c in dec.local_graph(dm, u).components():
                if c.kind == "circle":
                    bad += dec.check_circle(dm, u, c)
                elif len(c.nodes) > 1:
                    r = dec.make_s_trivial(dm, u, c)
                    if not r.witness.ok:
                        bad.append(f"S-trivialization witness at {u}")
        rep.check(f"instance {k} ({dm.sg.spec.label()}, {dm.n} paths)", not bad, bad or None)


SCENARIOS: dict[str, Callable[[Report], None]] = {
    "d2-2-2-local-graph": _scn_d2_local_graph,
    "fold-commutes-a2": _scn_fold_commutes_a2,
    "degree-one-cover": _scn_degree_one,
    "degree-two-adjoin": _scn_degree_two,
    "theta-relators": _scn_theta,
    "nielsen-z2-z": _scn_nielsen,
    "local-graph-lemmas": _scn_local_lemmas,
}


def run_scenario(name: str, seed: int | None = None) -> Report:
    if name not in SCENARIOS:
        raise UsageError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    rep = Report(name, default_seed() if seed is None else seed)
    SCENARIOS[name](rep)
    return rep


# ------------------------------------------------------------------ command handlers

def _read_json(args, attr: str = "input") -> Any:
    src = getattr(args, attr, None)
    try:
        text = sys.stdin.read() if src in (None, "-") else open(src, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {src}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {src or 'stdin'}: {exc}") from None


def _emit(args, text: str) -> None:
    if getattr(args, "out", None) in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_orbifold(args) -> int:
    data = json.loads(args.spec) if args.spec else _read_json(args)
    spec = load(data, "orbifold")
    if args.action == "present":
        _emit(args, dumps(presentation(spec).to_json()))
        return EXIT_PASS
    sg = dec.build_AO(spec)
    errs = dec.check_theta(sg)
    _emit(args, dumps({"graph": sg.to_json(), "theta_check": errs or "pass"}))
    return EXIT_FAIL if errs else EXIT_PASS


def cmd_gog(args) -> int:
    data = _read_json(args)
    if args.action == "reduce":
        gog, p = load(data, "gog-path")
        check_path(gog, p)
        out = {"reduced": reduce(gog, p).to_json(), "normal_form": normalize(gog, p).to_json()}
        _emit(args, dumps(out))
        return EXIT_PASS
    gog = load(data, "gog")
    if args.action == "dot":
        _emit(args, export_dot(gog))
        return EXIT_PASS
    base = args.base or gog.graph.vertices[0]
    out: dict[str, Any] = {"vertices": len(gog.graph.vertices), "edge_pairs": len(gog.graph.edge_pairs()),
                           "connected": gog.graph.is_connected()}
    if gog.has_trivial_edges() and out["connected"]:
        split = TreeSplitting(gog, base)
        out.update({"rank": split.rank, "torsion": split.torsion, "basis": list(split.group.names),
                    "orders": list(split.group.orders)})
    _emit(args, dumps(out))
    return EXIT_PASS


def _move_args(args) -> dict:
    try:
        return json.loads(args.args) if args.args else {}
    except json.JSONDecodeError as exc:
        raise UsageError(f"--args is not valid JSON: {exc}") from None


def _need(opts: dict, *keys: str) -> list:
    missing = [k for k in keys if k not in opts]
    if missing:
        raise UsageError(f"--args is missing {', '.join(missing)}")
    return [opts[k] for k in keys]


def cmd_fold(args) -> int:
    m = load(_read_json(args), "morphism")
    if args.action == "check":
        errs = check_morphism(m)
        if errs:
            _emit(args, dumps({"valid": False, "errors": errs}))
            return EXIT_FAIL
        v = is_folded(m, args.window)
        _emit(args, dumps({"valid": True, "verdict": v.to_json()}))
        return EXIT_FAIL if args.require_folded and v.folded is not True else EXIT_PASS
    opts = _move_args(args)
    mv = args.move
    trace: list[GGMorphism] = []
    relation: list[str] = []
    base = opts.get("base", m.source.graph.vertices[0])
    if mv == "a0":
        u, g = _need(opts, "vertex", "g")
        new = move_a0(m, u, word_from_json(g))
    elif mv == "a1":
        f, c = _need(opts, "edge", "c")
        new = move_a1(m, f, int(c))
    elif mv == "a2":
        f, b = _need(opts, "edge", "b")
        new, sig = move_a2(m, f, word_from_json(b))
        relation = check_sigma_relation(m, new, sig, base)
    else:
        if mv in ("ia", "iiia", "fold"):
            f1, f2 = _need(opts, "f1", "f2")
            counter = int(opts.get("counter", 0))
            if mv == "ia":
                res = elementary_fold_ia(m, f1, f2)
            elif mv == "iiia":
                res = elementary_fold_iiia(m, f1, f2, counter)
            else:
                wit = opts.get("witness")
                w = (word_from_json(wit[0]), int(wit[1])) if wit is not None else None
                res = fold(m, f1, f2, w, counter, base)
        elif mv == "vertex":
            (u,) = _need(opts, "vertex")
            res = vertex_morphism(m, u)
        else:
            g, comp, ef = _need(opts, "edge", "complement", "edge_factor")
            wit = UnfoldWitness(tuple(comp), {f: (int(k), word_from_json(b), int(e)) for f, (k, b, e) in ef.items()})
            res = unfold(m, g, wit)
        new = res.morphism
        trace = list(res.intermediates)
        if mv == "unfold":
            relation = check_sigma_relation(m, new, res.sigma, base, res.exact, "backward")
        else:
            relation = check_sigma_relation(m, new, res.sigma, base, res.exact)
            if res.inverse is not None:
                relation += check_inverse(res.sigma, res.inverse, base)
    out: dict[str, Any] = {"move": mv, "morphism": new.to_json(), "relation_check": relation or "pass"}
    if args.trace:
        out["trace"] = [x.to_json() for x in trace + [new]]
    _emit(args, dumps(out))
    return EXIT_FAIL if relation else EXIT_PASS


def cmd_nielsen(args) -> int:
    if args.action == "search":
        if not args.a or not args.b:
            raise UsageError("nielsen search needs --a and --b")
        A = load(_read_json(args, "a"), "nielsen")
        B = load(_read_json(args, "b"), "nielsen")
        res = equivalent_bounded(A, B, args.max_norm)
    else:
        A = load(_read_json(args), "nielsen")
        res = is_reducible_witness(A, args.max_norm)
    _emit(args, dumps(res.to_json()))
    return EXIT_PASS if res.verdict == "equivalent" else EXIT_FAIL


EXAMPLES: dict[str, Callable[[], dec.DecoratedMorphism]] = {
    "d2-2-2": dec.example_d2_22,
    "degree-two-d2-3-4": dec.degree_two_d2_34,
    "degree-one-a-3-5": lambda: dec.degree_one_cover(OrbifoldSpec(True, 0, 2, (3, 5))),
}


def cmd_decorated(args) -> int:
    if args.example:
        dm = EXAMPLES[args.example]()
    else:
        dm = load(_read_json(args), "dm")
    sg = dm.sg
    act = args.action
    if act == "dump":
        _emit(args, dumps(dm.to_json()))
        return EXIT_PASS
    if act == "check":
        out: dict[str, Any] = {"decompositions": [dm.decomposition(j).to_json() for j in range(1, dm.n + 1)]}
        dg = dec.induced_decorated_group(sg, dm)
        errs = ["decorated group: " + e for e in dg.check()]
        out["decorated_group"] = dg.to_json()
        sq = dec.folds_squares(dm)
        out["folds_squares"] = None if sq is None else sq.to_json()
        if sq is None:
            for u in dm.source.graph.vertices:
                for c in dec.local_graph(dm, u).components():
                    nodes = c.nodes + ((c.nodes[0],) if c.kind == "circle" else ())
                    labels = c.labels if c.kind == "circle" else None
                    errs += [f"{u}: {e}" for e in dec.check_local_path_formulas(dm, u, nodes, labels)]
                    if c.kind == "circle":
                        errs += [f"{u}: {e}" for e in dec.check_circle(dm, u, c)]
        out["errors"] = errs
        _emit(args, dumps(out))
        return EXIT_FAIL if errs else EXIT_PASS
    if act == "tame":
        rep = dec.is_tame(sg, dm)
        _emit(args, dumps(rep.to_json()))
        return EXIT_PASS if rep.tame else EXIT_FAIL
    if not args.vertex:
        raise UsageError(f"decorated {act} needs --vertex")
    if act == "local-graph":
        lg = dec.local_graph(dm, args.vertex)
        _emit(args, lg.to_dot(sg.gog.group(dm.morphism.vmap[args.vertex])) if args.dot else dumps(lg.to_json()))
        return EXIT_PASS
    if act == "extract-cover":
        try:
            d = dec.extract_almost_cover(sg, dm, args.vertex)
        except dec.DecoratedError as exc:
            _emit(args, dumps({"error": str(exc)}))
            return EXIT_FAIL
        _emit(args, dumps(d.to_json()))
        return EXIT_PASS
    try:
        res = dec.adjoin_unfold(sg, dm, args.vertex)
    except dec.DecoratedError as exc:
        _emit(args, dumps({"error": str(exc)}))
        return EXIT_FAIL
    mv, pair = dec.fold_after_adjoin(res, args.vertex)
    sq = dec.folds_squares(mv.dm)
    out = {"adjoined": res.dm.to_json(), "new_edge": res.new_edge, "witness": res.witness.to_json(),
           "fold": list(pair), "folded": mv.dm.to_json(), "folds_squares": None if sq is None else sq.to_json()}
    _emit(args, dumps(out))
    return EXIT_PASS if res.witness.ok and sq is not None else EXIT_FAIL


def cmd_scenario(args) -> int:
    if args.list or not args.name:
        _emit(args, "\n".join(sorted(SCENARIOS)) + "\n")
        return EXIT_PASS
    rep = run_scenario(args.name, args.seed)
    _emit(args, dumps(rep.to_json()) if args.format == "json" else rep.to_text())
    return EXIT_PASS if rep.passed else EXIT_FAIL


# ------------------------------------------------------------------ parser

def _io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", help="input JSON file (default: stdin)")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orbifold-folds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbifold", help="presentations and the small-orbifold graph of groups")
    p.add_argument("action", choices=["present", "graph"])
    p.add_argument("--spec", help="orbifold spec as inline JSON")
    _io(p)
    p.set_defaults(func=cmd_orbifold)

    p = sub.add_parser("gog", help="graphs of groups: splitting, DOT, path reduction")
    p.add_argument("action", choices=["check", "dot", "reduce"])
    p.add_argument("--base")
    _io(p)
    p.set_defaults(func=cmd_gog)

    p = sub.add_parser("fold", help="folding verdicts and moves on morphisms")
    p.add_argument("action", choices=["check", "apply"])
    p.add_argument("--move", choices=["a0", "a1", "a2", "ia", "iiia", "vertex", "fold", "unfold"])
    p.add_argument("--args", help="move arguments as inline JSON")
    p.add_argument("--trace", action="store_true", help="emit each intermediate morphism")
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--require-folded", action="store_true")
    _io(p)
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("nielsen", help="bounded Nielsen equivalence search")
    p.add_argument("action", choices=["search", "reducible"])
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--max-norm", type=int)
    _io(p)
    p.set_defaults(func=cmd_nielsen)

    p = sub.add_parser("decorated", help="decorated morphisms over small orbifolds")
    p.add_argument("action", choices=["check", "local-graph", "extract-cover", "adjoin-unfold", "tame", "dump"])
    p.add_argument("--vertex")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--example", choices=sorted(EXAMPLES))
    _io(p)
    p.set_defaults(func=cmd_decorated)

    p = sub.add_parser("scenario", help="replay a named scenario")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scenario)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    if args.command == "fold" and args.action == "apply" and not args.move:
        sys.stderr.write("error: fold apply needs --move\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (SchemaError, UsageError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (MoveError, PathError, WordError, dec.DecoratedError, NielsenError, OrbifoldError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
