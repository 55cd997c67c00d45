"""Shape grammars (hyperedge replacement), membership parsing, and static
type checking of programs: frame contents, typed variables, and predicate
call signatures.

A shape type T of fixed arity owns ordered alternatives; each alternative is
a graph over terminal edges, frame edges, and typed variable edges acting as
nonterminals. A graph belongs to T iff it can be derived from a single
T-nonterminal, which parse() decides by memoized top-down cover search.
"""
from __future__ import annotations

from typing import Optional

from .graph import CALL, DCALL, FRAME, Graph, GraphError, VARIABLE, ARG_LABEL
from .report import Report
from .subst import instantiate

# the designated predicate-call shape; call graphs are checked structurally
PI = "π"


class UnknownParameter(GraphError):
    pass


class ShapeType:
    def __init__(self, name: str, arity: int, type_params: list[str],
                 alternatives: list[Graph]):
        self.name = name
        self.arity = arity
        self.type_params = type_params
        self.alternatives = alternatives

    def __repr__(self) -> str:
        params = f"<{','.join(self.type_params)}>" if self.type_params else ""
        return f"ShapeType({self.name}{params}({self.arity}), {len(self.alternatives)} alts)"


class ShapeGrammar:
    def __init__(self) -> None:
        self.types: dict[str, ShapeType] = {}

    def declare(self, t: ShapeType) -> None:
        if t.name in self.types:
            raise GraphError(f"shape {t.name} declared twice")
        self.types[t.name] = t

    def copy(self) -> "ShapeGrammar":
        out = ShapeGrammar()
        out.types = dict(self.types)
        return out


# -- type expressions -------------------------------------------------------

def parse_type_expr(text: str) -> tuple[str, list[str]]:
    """Split 'L<I,J>' into ('L', ['I', 'J']); arguments keep their own text."""
    text = text.strip()
    if "<" not in text:
        return text, []
    if not text.endswith(">"):
        raise GraphError(f"malformed type expression {text!r}")
    head, rest = text.split("<", 1)
    body = rest[:-1]
    args, depth, start = [], 0, 0
    for i, c in enumerate(body):
        if c == "<":
            depth += 1
        elif c == ">":
            depth -= 1
        elif c == "," and depth == 0:
            args.append(body[start:i].strip())
            start = i + 1
    args.append(body[start:].strip())
    return head.strip(), args


def mangle(name: str, args: list[str]) -> str:
    return name if not args else f"{name}<{','.join(args)}>"


def subst_type(expr: str, sub: dict[str, str]) -> str:
    name, args = parse_type_expr(expr)
    if not args:
        return sub.get(name, name)
    if name in sub:
        raise GraphError(f"type parameter {name} used with arguments")
    return mangle(name, [subst_type(a, sub) for a in args])


def _subst_graph_types(g: Graph, sub: dict[str, str]) -> Graph:
    out = g.copy()
    for _, lvl in out.walk():
        for e in lvl.edges.values():
            if e.var_type is not None:
                e.var_type = subst_type(e.var_type, sub)
    return out


def monomorphize(g: ShapeGrammar, t: ShapeType, args: dict[str, str]) -> ShapeGrammar:
    """Grammar extended with t instantiated at args under its mangled name."""
    missing = [p for p in t.type_params if p not in args]
    if missing:
        raise UnknownParameter(f"no argument for parameter(s) {', '.join(missing)}")
    out = g.copy()
    _ensure(out, mangle(t.name, [args[p] for p in t.type_params]))
    return out


def _ensure(grammar: ShapeGrammar, expr: str) -> str:
    """Instantiate expr's type into grammar if needed; returns the key."""
    name, args = parse_type_expr(expr)
    key = mangle(name, args)
    if key in grammar.types:
        return key
    if name not in grammar.types:
        raise GraphError(f"unknown shape type {name}")
    base = grammar.types[name]
    if len(args) != len(base.type_params):
        raise UnknownParameter(
            f"{name} takes {len(base.type_params)} type argument(s), got {len(args)}")
    sub = dict(zip(base.type_params, args))
    alts = [_subst_graph_types(a, sub) for a in base.alternatives]
    grammar.types[key] = ShapeType(key, base.arity, [], alts)
    return key


# -- derivations --------------------------------------------------------------

class Derivation:
    def __init__(self, type_name: str, alt_index: int,
                 children: dict[str, "Derivation"]):
        self.type_name = type_name
        self.alt_index = alt_index
        self.children = children

    def replay(self, grammar: ShapeGrammar) -> Graph:
        """Rebuild a graph from the derivation. Gluing the result into the
        parsed piece's boundary (points positionally) reproduces the piece up
        to ≅; when the boundary repeats nodes the gluing supplies the merge.
        """
        alt = grammar.types[self.type_name].alternatives[self.alt_index]
        sub = {name: d.replay(grammar) for name, d in self.children.items()}
        return instantiate(alt, sub)

    def pretty(self, indent: int = 0) -> str:
        lines = [f"{'  ' * indent}{self.type_name} alt {self.alt_index}"]
        for name in sorted(self.children):
            lines.append(f"{'  ' * (indent + 1)}{name}:")
            lines.append(self.children[name].pretty(indent + 2))
        return "\n".join(lines)


def parse(grammar: ShapeGrammar, type_expr: str, graph: Graph,
          max_nodes: Optional[int] = None) -> Optional[Derivation]:
    """Derivation of graph from a single type_expr nonterminal, or None.

    Alternatives are tried in declaration order; subproblems are memoized on
    (type, boundary, element sets); an active-set guard stops self-recursion.
    max_nodes rejects pieces larger than the cutoff outright.
    """
    memo: dict[tuple, Optional[Derivation]] = {}
    active: set[tuple] = set()

    def derive(piece: Graph, expr: str, where: str) -> Optional[Derivation]:
        key = (expr, where, tuple(piece.points),
               frozenset(piece.edges), frozenset(piece.nodes))
        if key in memo:
            return memo[key]
        if key in active:
            return None
        if max_nodes is not None and len(piece.nodes) > max_nodes:
            return None
        tkey = _ensure(grammar, expr)
        st = grammar.types[tkey]
        if len(piece.points) != st.arity:
            memo[key] = None
            return None
        active.add(key)
        found: Optional[Derivation] = None
        for i, alt in enumerate(st.alternatives):
            for res in _cover_matches(piece, alt):
                children: dict[str, Derivation] = {}
                good = True
                vtypes = _var_types(alt)
                for name, (sub_piece, sig) in sorted(res.pieces.items()):
                    vt = vtypes.get(name)
                    if vt is None:
                        good = False
                        break
                    child = derive(sub_piece, vt, where + sig[1])
                    if child is None:
                        good = False
                        break
                    children[name] = child
                if good:
                    found = Derivation(tkey, i, children)
                    break
            if found is not None:
                break
        active.discard(key)
        memo[key] = found
        return found

    return derive(graph, type_expr, "")


def _cover_matches(piece: Graph, alt: Graph):
    from .rules import _level_matches
    return _level_matches(piece, alt, True, None, False, "")


def _var_types(alt: Graph) -> dict[str, str]:
    out: dict[str, str] = {}
    for _, lvl in alt.walk():
        for e in lvl.edges.values():
            if e.kind == VARIABLE:
                out[e.label] = e.var_type
    return out


def is_call_shaped(g: Graph) -> bool:
    """A predicate-call graph: call/dcall edges plus argument frames only."""
    calls = 0
    for e in g.edges.values():
        if e.kind in (CALL, DCALL):
            calls += 1
        elif e.kind == FRAME and e.label == ARG_LABEL:
            pass
        else:
            return False
    return calls > 0


# -- signatures and program checking ------------------------------------------

class ParamSpec:
    """Ordered parameter names; at most one is a splat absorbing any run."""

    def __init__(self, names: list[str], splat: Optional[int] = None):
        self.names = names
        self.splat = splat  # index of the splat parameter, if any

    @property
    def variadic(self) -> bool:
        return self.splat is not None

    def arity_ok(self, k: int) -> bool:
        if self.splat is None:
            return k == len(self.names)
        return k >= len(self.names) - 1

    def describe(self) -> str:
        parts = [n + ("..." if i == self.splat else "")
                 for i, n in enumerate(self.names)]
        return f"({', '.join(parts)})"

    def bind(self, atts: list[int]) -> Optional[dict[str, list[int]]]:
        """Map parameter names to attachment runs; None on arity mismatch."""
        if not self.arity_ok(len(atts)):
            return None
        if self.splat is None:
            return {n: [a] for n, a in zip(self.names, atts)}
        i = self.splat
        run = len(atts) - (len(self.names) - 1)
        out = {n: [a] for n, a in zip(self.names[:i], atts[:i])}
        out[self.names[i]] = list(atts[i:i + run])
        out.update({n: [a] for n, a in zip(self.names[i + 1:], atts[i + run:])})
        return out


class Signature:
    """Structural constraints on a predicate's call sites."""

    def __init__(self, name: str, params: ParamSpec,
                 constraints: list[tuple] = ()):  # ("frame", label, [params]) | ("parg", param)
        self.name = name
        self.params = params
        self.constraints = list(constraints)


def check_call(sig: Signature, edge, level: Graph, where: str, rep: Report) -> None:
    bound = sig.params.bind(list(edge.attachments))
    if bound is None:
        rep.error("arity-wrong call",
                  f"{where}: {sig.name} takes {sig.params.describe()} but is "
                  f"called with {len(edge.attachments)} argument(s)")
        return
    level_points = set(level.points)
    for c in sig.constraints:
        if c[0] == "frame":
            _, label, pnames = c
            nodes = [n for p in pnames for n in bound.get(p, [])]
            if all(n in level_points for n in nodes):
                continue
            if any(e.kind == FRAME and e.label == label
                   and all(n in e.attachments for n in nodes)
                   for e in level.edges.values()):
                continue
            rep.error("missing frame argument",
                      f"{where}: call of {sig.name} needs a {label} frame on "
                      f"({', '.join(pnames)})")
        elif c[0] == "parg":
            _, pname = c
            nodes = bound.get(pname, [])
            for n in nodes:
                if n in level_points:
                    continue
                if any(e.kind == FRAME and e.label == ARG_LABEL and n in e.attachments
                       for e in level.edges.values()):
                    continue
                rep.error("missing predicate argument",
                          f"{where}: call of {sig.name} needs an argument "
                          f"frame on {pname}")


def check_calls_in_graph(program, g: Graph, where: str, rep: Report) -> None:
    for path, lvl in g.walk():
        for e in lvl.edges_sorted():
            if e.kind not in (CALL, DCALL):
                continue
            if any(lvl.nodes[a].seq for a in e.attachments):
                continue  # splatted sites have dynamic arity
            spot = f"{where}{path}" if path else where
            sig = program.signature_of(e.label)
            if sig is None:
                rep.error("unknown predicate",
                          f"{spot}: call of undeclared predicate {e.label}")
                continue
            check_call(sig, e, lvl, spot, rep)


def check_frames_in_graph(program, g: Graph, where: str, rep: Report,
                          grammar: Optional[ShapeGrammar] = None) -> None:
    if grammar is None:
        grammar = program.shapes
    for path, lvl in g.walk():
        for e in lvl.edges_sorted():
            if e.kind != FRAME or e.label == ARG_LABEL:
                continue
            cls = program.classes.get(e.label)
            if cls is None or cls.content_type is None:
                continue
            c = e.contents
            if c.has_meta():
                continue
            if any(x.kind == VARIABLE
                   for _, sub in c.walk() for x in sub.edges.values()):
                continue
            if parse(grammar, cls.content_type, c) is None:
                spot = f"{where}{path}" if path else where
                rep.error("frame contents not of declared shape",
                          f"{spot}: contents of {e.label} frame e{e.id} do not "
                          f"parse as {cls.content_type}")


def check_program(program, grammar: Optional[ShapeGrammar] = None) -> Report:
    """Static typing of a program: every literal frame's contents parse as
    the owning class's content type (contents mentioning variables or pending
    calls are dynamic and skipped), and every call site satisfies the named
    predicate's signature."""
    rep = Report()
    if grammar is None:
        grammar = program.shapes
    for pred in program.predicates.values():
        for rule in pred.rules:
            sides = [("pattern", rule.pattern), ("premise", rule.premise),
                     ("replacement", rule.replacement)]
            for side, g in sides:
                if g is None:
                    continue
                where = f"{pred.name}/{rule.name}/{side}: "
                check_frames_in_graph(program, g, where, rep, grammar)
                if side != "pattern":
                    check_calls_in_graph(program, g, where, rep)
                else:
                    # the pattern's own p-edge is its declaration form; check
                    # every other call it mentions
                    for path, lvl in g.walk():
                        for e in lvl.edges_sorted():
                            if e.kind not in (CALL, DCALL):
                                continue
                            if path == "" and e.label == pred.name:
                                continue
                            if any(lvl.nodes[a].seq for a in e.attachments):
                                continue
                            sig = program.signature_of(e.label)
                            spot = f"{where}{path}"
                            if sig is None:
                                rep.error("unknown predicate",
                                          f"{spot}: call of undeclared predicate {e.label}")
                            else:
                                check_call(sig, e, lvl, spot, rep)
    for name, g in program.named_graphs.items():
        where = f"graph {name}: "
        check_frames_in_graph(program, g, where, rep, grammar)
        check_calls_in_graph(program, g, where, rep)
    return rep
