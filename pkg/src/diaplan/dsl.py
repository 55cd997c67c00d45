"""Textual front-end: parse program and graph files, print graphs, export DOT.

Declarations: `shape`, `pred`, `class`, `sig`, and `graph`. Graph bodies list
`node`, `edge`, `frame`, `var`, `uvar`, `call`, `dcall`, and `points` items.
A trailing `...` marks a splat (a node standing for a sequence). Rule sides
share interface nodes by name; the parser computes the common point sequence.
Comments run from `#` to end of line.
"""
from __future__ import annotations

from typing import Optional

from .graph import (ARG_LABEL, CALL, DCALL, FRAME, Graph, PLAIN, VARIABLE)
from .program import ClassDecl, Predicate, Program
from .rules import Rule
from .shapes import ParamSpec, ShapeType, Signature, parse_type_expr

KEYWORDS = {"shape", "pred", "class", "sig", "graph", "rule", "pattern", "if",
            "otherwise", "fail", "succeed", "raise", "node", "edge", "frame",
            "var", "uvar", "call", "dcall", "points", "content", "public",
            "private"}


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class DuplicateDeclaration(ParseError):
    pass


class UnresolvedName(ParseError):
    pass


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind  # "name" | "int" | "sym" | "eof"
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r})"


_SYMBOLS = ("::=", "...", "=>", "{", "}", "(", ")", ";", ",", ":", "<", ">",
            "|", "=")


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_" or c == "@":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            out.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for s in _SYMBOLS:
            if text.startswith(s, i):
                out.append(Token("sym", s, line, col))
                i += len(s)
                col += len(s)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    out.append(Token("eof", "", line, col))
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Block:
    """A parsed graph body plus its name table."""

    def __init__(self, graph: Graph, names: dict[str, int]):
        self.graph = graph
        self.names = names


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at_sym(self, s: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == s

    def at_name(self, s: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == "name" and (s is None or t.text == s)

    def eat_sym(self, s: str) -> Token:
        t = self.next()
        if t.kind != "sym" or t.text != s:
            raise ParseError(f"expected {s!r}, found {t.text!r}", t.line, t.col)
        return t

    def eat_name(self, s: Optional[str] = None) -> Token:
        t = self.next()
        if t.kind != "name" or (s is not None and t.text != s):
            want = s or "a name"
            raise ParseError(f"expected {want!r}, found {t.text!r}", t.line, t.col)
        return t

    def eat_int(self) -> int:
        t = self.next()
        if t.kind != "int":
            raise ParseError(f"expected a number, found {t.text!r}", t.line, t.col)
        return int(t.text)

    # -- type expressions ----------------------------------------------------

    def type_expr(self) -> str:
        name = self.eat_name().text
        if not self.at_sym("<"):
            return name
        self.eat_sym("<")
        args = [self.type_expr()]
        while self.at_sym(","):
            self.eat_sym(",")
            args.append(self.type_expr())
        self.eat_sym(">")
        return f"{name}<{','.join(args)}>"

    # -- graph bodies ----------------------------------------------------------

    def arg_list(self, block: _Block, auto: Optional[set[str]]) -> list[int]:
        args: list[int] = []
        if not self.at_sym(")"):
            while True:
                args.append(self.node_ref(block, auto))
                if self.at_sym(","):
                    self.eat_sym(",")
                    continue
                break
        return args

    def node_ref(self, block: _Block, auto: Optional[set[str]]) -> int:
        t = self.eat_name()
        splat = False
        if self.at_sym("..."):
            self.eat_sym("...")
            splat = True
        name = t.text
        if name in block.names:
            nid = block.names[name]
            if block.graph.nodes[nid].seq != splat:
                raise ParseError(f"node {name} used both plain and as a splat",
                                 t.line, t.col)
            return nid
        if splat or (auto is not None and name in auto):
            nid = block.graph.add_node(name, seq=splat)
            block.names[name] = nid
            return nid
        raise ParseError(f"undeclared node {name!r}", t.line, t.col)

    def graph_block(self, auto: Optional[set[str]] = None) -> _Block:
        self.eat_sym("{")
        block = _Block(Graph(), {})
        g = block.graph
        while not self.at_sym("}"):
            t = self.eat_name()
            kw = t.text
            if kw == "node":
                while self.at_name():
                    nt = self.eat_name()
                    splat = False
                    if self.at_sym("..."):
                        self.eat_sym("...")
                        splat = True
                    if nt.text in block.names:
                        raise ParseError(f"node {nt.text} declared twice",
                                         nt.line, nt.col)
                    block.names[nt.text] = g.add_node(nt.text, seq=splat)
                self.eat_sym(";")
            elif kw == "edge":
                label = ""
                if self.at_name():
                    label = self.eat_name().text
                self.eat_sym("(")
                args = self.arg_list(block, auto)
                self.eat_sym(")")
                self.eat_sym(";")
                # capitalized labels are variable edges (pictorial shorthand)
                if label[:1].isupper():
                    g.add_edge(label, VARIABLE, args)
                else:
                    g.add_edge(label, PLAIN, args)
            elif kw in ("call", "dcall"):
                label = self.eat_name().text
                self.eat_sym("(")
                args = self.arg_list(block, auto)
                self.eat_sym(")")
                self.eat_sym(";")
                g.add_edge(label, CALL if kw == "call" else DCALL, args)
            elif kw == "var":
                label = self.eat_name().text
                var_type = None
                if self.at_sym(":"):
                    self.eat_sym(":")
                    var_type = self.type_expr()
                self.eat_sym("(")
                args = self.arg_list(block, auto)
                self.eat_sym(")")
                self.eat_sym(";")
                g.add_edge(label, VARIABLE, args, var_type=var_type)
            elif kw == "uvar":
                label = self.eat_name().text
                self.eat_sym("(")
                args = self.arg_list(block, auto)
                self.eat_sym(")")
                self.eat_sym(";")
                g.add_edge(label, VARIABLE, args, undisguise=True)
            elif kw == "frame":
                first = self.eat_name()
                if self.at_sym(":"):
                    self.eat_sym(":")
                    label = self.eat_name().text
                else:
                    label = first.text
                self.eat_sym("(")
                args = self.arg_list(block, auto)
                self.eat_sym(")")
                self.eat_sym("=")
                contents = self.graph_block()
                self.eat_sym(";")
                g.add_edge(label, FRAME, args, contents=contents.graph)
            elif kw == "points":
                pts: list[int] = []
                while self.at_name():
                    pts.append(self.node_ref(block, auto))
                self.eat_sym(";")
                g.set_points(g.points + pts)
            else:
                raise ParseError(f"unknown graph item {kw!r}", t.line, t.col)
        self.eat_sym("}")
        return block

    # -- declarations ----------------------------------------------------------

    def param_spec(self) -> ParamSpec:
        self.eat_sym("(")
        names: list[str] = []
        splat: Optional[int] = None
        if not self.at_sym(")"):
            while True:
                t = self.eat_name()
                if self.at_sym("..."):
                    self.eat_sym("...")
                    if splat is not None:
                        raise ParseError("only one splat parameter is allowed",
                                         t.line, t.col)
                    splat = len(names)
                names.append(t.text)
                if self.at_sym(","):
                    self.eat_sym(",")
                    continue
                break
        self.eat_sym(")")
        return ParamSpec(names, splat)

    def rule_decl(self, index: int, pred_name: Optional[str]) -> Rule:
        t0 = self.eat_name("rule")
        name = f"r{index}"
        if self.at_name() and self.peek().text != "pattern":
            name = self.eat_name().text
        self.eat_sym("{")
        self.eat_name("pattern")
        pat = self.graph_block()
        premise: Optional[_Block] = None
        if self.at_name("if"):
            self.eat_name("if")
            premise = self.graph_block(auto=set(pat.names))
        self.eat_sym("=>")
        fails = False
        succeeds = False
        repl: Optional[_Block] = None
        if self.at_name("fail"):
            self.eat_name("fail")
            fails = True
        elif self.at_name("succeed"):
            self.eat_name("succeed")
            succeeds = True
        else:
            repl = self.graph_block(auto=set(pat.names))
        self.eat_sym("}")

        if pred_name is not None:
            hits = [e for e in pat.graph.edges_sorted()
                    if e.kind == CALL and e.label == pred_name]
            if len(hits) != 1:
                raise ParseError(
                    f"rule {name}: pattern needs exactly one {pred_name} call",
                    t0.line, t0.col)
        return _assemble_rule(name, pat, premise, repl, fails, succeeds,
                              t0.line, t0.col)

    def shape_decl(self, prog: Program) -> None:
        t0 = self.eat_name("shape")
        name = self.eat_name().text
        params: list[str] = []
        if self.at_sym("<"):
            self.eat_sym("<")
            params.append(self.eat_name().text)
            while self.at_sym(","):
                self.eat_sym(",")
                params.append(self.eat_name().text)
            self.eat_sym(">")
        self.eat_sym("(")
        arity = self.eat_int()
        self.eat_sym(")")
        self.eat_sym("::=")
        alts = [self.graph_block().graph]
        while self.at_sym("|"):
            self.eat_sym("|")
            alts.append(self.graph_block().graph)
        if self.at_sym(";"):
            self.eat_sym(";")
        for i, alt in enumerate(alts):
            if len(alt.points) != arity:
                raise ParseError(
                    f"shape {name}: alternative {i + 1} has {len(alt.points)} "
                    f"points, expected {arity}", t0.line, t0.col)
        if name in prog.shapes.types:
            raise DuplicateDeclaration(f"shape {name} declared twice",
                                       t0.line, t0.col)
        prog.shapes.declare(ShapeType(name, arity, params, alts))

    def pred_decl(self, prog: Program) -> None:
        t0 = self.eat_name("pred")
        name = self.eat_name().text
        if name in prog.predicates:
            raise DuplicateDeclaration(f"pred {name} declared twice",
                                       t0.line, t0.col)
        params = self.param_spec()
        self.eat_sym("{")
        rules: list[Rule] = []
        while self.at_name("rule"):
            rules.append(self.rule_decl(len(rules) + 1, name))
        self.eat_sym("}")
        self.eat_name("otherwise")
        t = self.eat_name()
        if t.text not in ("fail", "succeed", "raise"):
            raise ParseError(f"unknown otherwise marker {t.text!r}", t.line, t.col)
        prog.predicates[name] = Predicate(name, params, rules, t.text)

    def class_decl(self, prog: Program) -> None:
        t0 = self.eat_name("class")
        name = self.eat_name().text
        if name in prog.classes:
            raise DuplicateDeclaration(f"class {name} declared twice",
                                       t0.line, t0.col)
        self.eat_sym("{")
        content: Optional[str] = None
        methods: dict[str, str] = {}
        while not self.at_sym("}"):
            t = self.eat_name()
            if t.text == "content":
                if content is not None:
                    raise ParseError("content declared twice", t.line, t.col)
                content = self.type_expr()
                self.eat_sym(";")
            elif t.text in ("public", "private"):
                while True:
                    m = self.eat_name().text
                    if m in methods:
                        raise DuplicateDeclaration(
                            f"method {m} listed twice", t.line, t.col)
                    methods[m] = t.text
                    if self.at_sym(","):
                        self.eat_sym(",")
                        continue
                    break
                self.eat_sym(";")
            else:
                raise ParseError(f"unknown class item {t.text!r}", t.line, t.col)
        self.eat_sym("}")
        prog.classes[name] = ClassDecl(name, content, methods)

    def sig_decl(self, prog: Program) -> None:
        t0 = self.eat_name("sig")
        name = self.eat_name().text
        if name in prog.signatures:
            raise DuplicateDeclaration(f"sig {name} declared twice",
                                       t0.line, t0.col)
        params = self.param_spec()
        self.eat_sym("{")
        constraints: list[tuple] = []
        while not self.at_sym("}"):
            t = self.eat_name()
            if t.text == "frame":
                label = self.eat_name().text
                self.eat_sym("(")
                names = [self.eat_name().text]
                while self.at_sym(","):
                    self.eat_sym(",")
                    names.append(self.eat_name().text)
                self.eat_sym(")")
                self.eat_sym(";")
                constraints.append(("frame", label, names))
            elif t.text == "parg":
                p = self.eat_name().text
                self.eat_sym(";")
                constraints.append(("parg", p))
            else:
                raise ParseError(f"unknown signature item {t.text!r}",
                                 t.line, t.col)
        self.eat_sym("}")
        for c in constraints:
            for p in (c[2] if c[0] == "frame" else [c[1]]):
                if p not in params.names:
                    raise UnresolvedName(f"sig {name}: unknown parameter {p}",
                                         t0.line, t0.col)
        prog.signatures[name] = Signature(name, params, constraints)

    def graph_decl(self, prog: Program) -> None:
        t0 = self.eat_name("graph")
        name = self.eat_name().text
        if name in prog.named_graphs:
            raise DuplicateDeclaration(f"graph {name} declared twice",
                                       t0.line, t0.col)
        arity: Optional[int] = None
        if self.at_sym("("):
            self.eat_sym("(")
            arity = self.eat_int()
            self.eat_sym(")")
        block = self.graph_block()
        if arity is not None and len(block.graph.points) != arity:
            raise ParseError(
                f"graph {name} declares {arity} points but lists "
                f"{len(block.graph.points)}", t0.line, t0.col)
        prog.named_graphs[name] = block.graph

    def program(self, base: Optional[Program] = None) -> Program:
        prog = base if base is not None else Program()
        while not self.peek().kind == "eof":
            t = self.peek()
            if t.kind != "name":
                raise ParseError(f"expected a declaration, found {t.text!r}",
                                 t.line, t.col)
            if t.text == "shape":
                self.shape_decl(prog)
            elif t.text == "pred":
                self.pred_decl(prog)
            elif t.text == "class":
                self.class_decl(prog)
            elif t.text == "sig":
                self.sig_decl(prog)
            elif t.text == "graph":
                self.graph_decl(prog)
            else:
                raise ParseError(f"unknown declaration {t.text!r}", t.line, t.col)
        return prog


def _assemble_rule(name: str, pat: _Block, premise: Optional[_Block],
                   repl: Optional[_Block], fails: bool, succeeds: bool,
                   line: int, col: int) -> Rule:
    """Compute the shared interface and set the point sequences of all sides.

    The interface is the pattern nodes referenced by name in the premise or
    replacement, in pattern declaration order; `succeed` keeps every pattern
    node. Interface nodes missing from a side are added as isolated nodes.
    """
    pat_order = sorted(pat.names.values())
    id_to_name = {v: k for k, v in pat.names.items()}
    if succeeds:
        iface = [id_to_name[i] for i in pat_order]
    else:
        used: set[str] = set()
        if premise is not None:
            used |= set(premise.names)
        if repl is not None:
            used |= set(repl.names)
        iface = [id_to_name[i] for i in pat_order if id_to_name[i] in used]
    pat.graph.set_points([pat.names[n] for n in iface])

    def side_points(block: _Block) -> None:
        for n in iface:
            if n not in block.names:
                seq = pat.graph.nodes[pat.names[n]].seq
                block.names[n] = block.graph.add_node(n, seq=seq)
        block.graph.set_points([block.names[n] for n in iface])

    premise_graph = None
    if premise is not None:
        side_points(premise)
        premise_graph = premise.graph
    replacement = None
    if succeeds:
        repl = _Block(Graph(), {})
        side_points(repl)
        replacement = repl.graph
    elif repl is not None:
        side_points(repl)
        replacement = repl.graph
    return Rule(name, pat.graph, replacement, premise=premise_graph, fails=fails)


def parse_program(text: str, base: Optional[Program] = None) -> Program:
    """Parse declarations into a Program (extending base when given) and
    resolve names: class methods, predicate calls, and shape references."""
    prog = Parser(text).program(base.copy() if base is not None else None)
    prog.link()
    _resolve(prog)
    return prog


def _resolve(prog: Program) -> None:
    for cls in prog.classes.values():
        for m in cls.methods:
            if m not in prog.predicates:
                raise UnresolvedName(f"class {cls.name}: unknown method {m}")
        if cls.content_type is not None:
            head, _ = parse_type_expr(cls.content_type)
            if head not in prog.shapes.types:
                raise UnresolvedName(
                    f"class {cls.name}: unknown content shape {head}")

    def check_graph(g: Graph, where: str) -> None:
        for _, lvl in g.walk():
            for e in lvl.edges.values():
                if e.kind in (CALL, DCALL) and e.label not in prog.predicates:
                    raise UnresolvedName(
                        f"{where}: call of undeclared predicate {e.label}")
                if e.kind == VARIABLE and e.var_type is not None:
                    head, _ = parse_type_expr(e.var_type)
                    if head not in prog.shapes.types and head != "π":
                        raise UnresolvedName(
                            f"{where}: unknown shape type {head}")

    for pred in prog.predicates.values():
        for rule in pred.rules:
            for side, g in (("pattern", rule.pattern), ("premise", rule.premise),
                            ("replacement", rule.replacement)):
                if g is not None:
                    check_graph(g, f"{pred.name}/{rule.name}/{side}")
    for gname, g in prog.named_graphs.items():
        check_graph(g, f"graph {gname}")


def parse_graph(text: str) -> Graph:
    """Parse one graph: either `graph NAME [(arity)] { ... }` or `{ ... }`."""
    p = Parser(text)
    if p.at_name("graph"):
        p.eat_name("graph")
        p.eat_name()
        if p.at_sym("("):
            p.eat_sym("(")
            p.eat_int()
            p.eat_sym(")")
        block = p.graph_block()
    else:
        block = p.graph_block()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"unexpected trailing {t.text!r}", t.line, t.col)
    return block.graph


def parse_rule(text: str, name: str = "r1") -> Rule:
    """Parse one bare `rule { ... }` declaration (no predicate context)."""
    p = Parser(text)
    rule = p.rule_decl(1, None)
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"unexpected trailing {t.text!r}", t.line, t.col)
    return rule


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _ident_ok(name: str) -> bool:
    return (name != "" and (name[0].isalpha() or name[0] == "_")
            and all(c.isalnum() or c == "_" for c in name)
            and name not in KEYWORDS)


def _node_names(g: Graph) -> dict[int, str]:
    out: dict[int, str] = {}
    taken: set[str] = set()
    for nid in sorted(g.nodes):
        name = g.nodes[nid].name
        if not _ident_ok(name) or name in taken:
            base = name if _ident_ok(name) else f"n{nid}"
            name = base
            k = 2
            while name in taken:
                name = f"{base}_{k}"
                k += 1
        taken.add(name)
        out[nid] = name
    return out


def _print_items(g: Graph, indent: int) -> list[str]:
    pad = "  " * indent
    names = _node_names(g)
    lines: list[str] = []
    plain_nodes = [names[i] for i in sorted(g.nodes) if not g.nodes[i].seq]
    seq_nodes = [names[i] for i in sorted(g.nodes) if g.nodes[i].seq]
    if plain_nodes:
        lines.append(f"{pad}node {' '.join(plain_nodes)};")
    for s in seq_nodes:
        lines.append(f"{pad}node {s}...;")

    def ref(nid: int) -> str:
        return names[nid] + ("..." if g.nodes[nid].seq else "")

    def args(e) -> str:
        return ", ".join(ref(a) for a in e.attachments)

    for e in g.edges_sorted():
        if e.kind == PLAIN:
            head = f"edge {e.label}" if e.label else "edge "
            lines.append(f"{pad}{head}({args(e)});")
        elif e.kind == CALL:
            lines.append(f"{pad}call {e.label}({args(e)});")
        elif e.kind == DCALL:
            lines.append(f"{pad}dcall {e.label}({args(e)});")
        elif e.kind == VARIABLE:
            if e.undisguise:
                lines.append(f"{pad}uvar {e.label}({args(e)});")
            elif e.var_type:
                lines.append(f"{pad}var {e.label}: {e.var_type}({args(e)});")
            else:
                lines.append(f"{pad}var {e.label}({args(e)});")
        else:
            lines.append(f"{pad}frame f{e.id}: {e.label}({args(e)}) = {{")
            lines.extend(_print_items(e.contents, indent + 1))
            lines.append(f"{pad}}};")
    if g.points:
        lines.append(f"{pad}points {' '.join(ref(p) for p in g.points)};")
    return lines


def print_graph(g: Graph, name: str = "g") -> str:
    """Deterministic text form; re-parsing yields an isomorphic graph."""
    lines = [f"graph {name} {{"]
    lines.extend(_print_items(g, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def export_dot(g: Graph) -> str:
    """Graphviz text: frames as nested clusters, points as filled circles,
    unlabeled binary edges as plain lines, other edges as connector boxes."""
    lines = ["graph diaplan {", "  compound=true;"]

    def emit(lvl: Graph, prefix: str, indent: int) -> None:
        pad = "  " * indent
        pts = set(lvl.points)
        for nid in sorted(lvl.nodes):
            n = lvl.nodes[nid]
            style = ', style=filled, fillcolor=black, fontcolor=white' if nid in pts else ""
            lines.append(f'{pad}{prefix}n{nid} [shape=circle, label="{n.name}"{style}];')
        for e in lvl.edges_sorted():
            ename = f"{prefix}e{e.id}"
            if e.kind == PLAIN and e.label == "" and len(e.attachments) == 2:
                a, b = e.attachments
                lines.append(f"{pad}{prefix}n{a} -- {prefix}n{b};")
            elif e.kind == FRAME:
                lines.append(f"{pad}subgraph cluster_{ename} {{")
                lines.append(f'{pad}  label="{e.label}";')
                emit(e.contents, f"{ename}_", indent + 1)
                anchor = f"{ename}_anchor"
                lines.append(f'{pad}  {anchor} [shape=point, style=invis];')
                lines.append(f"{pad}}}")
                for k, a in enumerate(e.attachments, 1):
                    lines.append(
                        f'{pad}{anchor} -- {prefix}n{a} [label="{k}", '
                        f"ltail=cluster_{ename}];")
            else:
                if e.kind == CALL:
                    shape = "[shape=oval"
                elif e.kind == DCALL:
                    shape = "[shape=oval, peripheries=2"
                else:
                    shape = "[shape=box, style=dashed" if e.kind == VARIABLE \
                        else "[shape=box"
                lines.append(f'{pad}{ename} {shape}, label="{e.label}"];')
                for k, a in enumerate(e.attachments, 1):
                    lines.append(f'{pad}{ename} -- {prefix}n{a} [label="{k}"];')

    emit(g, "", 1)
    lines.append("}")
    return "\n".join(lines) + "\n"
