"""Rule pattern matching (context + substitution) and rule application.

A match of pattern P in host G is a context C and substitution sigma with
G isomorphic to C[P sigma]. The non-variable part of P embeds injectively;
nodes touching only variable edges may collide. Uncovered host elements are
partitioned into variable pieces and (at the top level only) the context.
"""
from __future__ import annotations

import itertools
from typing import Iterator, Optional

from .graph import CALL, Edge, Graph, Node, PLAIN, VARIABLE, isomorphic
from .report import Report
from .subst import Context, Substitution, copy_into, expand_splats, instantiate

# engine replacement marker: the rule applies, then immediately fails
FAIL_MARKER = "fail"


class Rule:
    def __init__(self, name: str, pattern: Graph, replacement: Optional[Graph],
                 premise: Optional[Graph] = None, fails: bool = False):
        self.name = name
        self.pattern = pattern
        self.premise = premise
        # replacement None is only legal together with fails=True
        self.replacement = replacement
        self.fails = fails

    def p_edge(self, pred: str) -> Optional[Edge]:
        """The unique call edge of the pattern naming pred, if present."""
        hits = [e for e in self.pattern.edges_sorted()
                if e.kind == CALL and e.label == pred]
        return hits[0] if len(hits) == 1 else None

    def __repr__(self) -> str:
        return f"Rule({self.name!r})"


def check_rule(r: Rule) -> Report:
    """Left-linearity and variable scoping."""
    from .subst import variables_of
    rep = Report()
    pat_vars = variables_of(r.pattern)
    pat_names = {name for name, _ in pat_vars}
    for (name, _), count in pat_vars.items():
        if count > 1:
            rep.error("non-linear pattern",
                      f"rule {r.name}: variable {name} occurs {count} times in the pattern")
    sides = [("replacement", r.replacement), ("premise", r.premise)]
    for side, g in sides:
        if g is None:
            continue
        seen = variables_of(g)
        for (name, _), count in seen.items():
            if name not in pat_names:
                rep.error(f"unbound variable in {side}",
                          f"rule {r.name}: variable {name} of the {side} does not occur in the pattern")
        if side == "replacement":
            for (name, _), count in seen.items():
                if count > 1:
                    rep.info("variable duplicated in replacement",
                             f"rule {r.name}: variable {name} is copied {count} times")
    return rep


class Match:
    def __init__(self, context: Context, substitution: Substitution,
                 seq: dict[str, tuple[int, ...]], node_map: dict[int, int],
                 edge_map: dict[int, int], signature: tuple):
        self.context = context
        self.substitution = substitution
        self.seq = seq            # splat name -> host node tuple (top level)
        self.node_map = node_map  # top-level pattern node -> host node
        self.edge_map = edge_map  # top-level pattern edge -> host edge
        self.signature = signature

    def splat_sizes(self) -> dict[str, int]:
        return {name: len(nodes) for name, nodes in self.seq.items()}

    def summary(self) -> str:
        parts = []
        for pe in sorted(self.edge_map):
            parts.append(f"e{self.edge_map[pe]}")
        for name in sorted(self.substitution):
            g = self.substitution[name]
            parts.append(f"{name}:{len(g.nodes)}n{len(g.edges)}e")
        return ",".join(parts) if parts else "-"

    def __repr__(self) -> str:
        return f"Match({self.summary()})"


def certify(host: Graph, pattern: Graph, m: Match) -> bool:
    """Soundness certificate: plug(context, pattern sigma) isomorphic to host."""
    pat = expand_splats(pattern, m.splat_sizes(), m.substitution)
    inst = instantiate(pat, m.substitution)
    rebuilt = plug_graph(m.context, inst)
    return isomorphic(rebuilt, host) is not None


def plug_graph(c: Context, g: Graph) -> Graph:
    from .subst import plug
    return plug(c, g)


# ---------------------------------------------------------------------------
# cover partitions (shared with the shape parser)
# ---------------------------------------------------------------------------

class Component:
    """A block of uncovered host elements that must share one owner."""

    def __init__(self, edges: set[int], nodes: set[int], touchpoints: set[int]):
        self.edges = edges
        self.nodes = nodes          # uncovered (internal) nodes
        self.touchpoints = touchpoints  # covered nodes the block's edges touch

    def key(self) -> tuple:
        return (min(self.edges) if self.edges else -1, min(self.nodes, default=-1))


def components(g: Graph, free_edges: set[int], free_nodes: set[int]) -> list[Component]:
    """Group free elements glued via free nodes; sorted deterministically."""
    parent: dict[tuple, tuple] = {}

    def find(x: tuple) -> tuple:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    def union(a: tuple, b: tuple) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    items = [("e", i) for i in sorted(free_edges)] + [("n", i) for i in sorted(free_nodes)]
    for i in free_edges:
        for a in g.edges[i].attachments:
            if a in free_nodes:
                union(("e", i), ("n", a))
    groups: dict[tuple, list[tuple]] = {}
    for it in items:
        groups.setdefault(find(it), []).append(it)
    out = []
    for members in groups.values():
        edges = {i for k, i in members if k == "e"}
        nodes = {i for k, i in members if k == "n"}
        touch = {a for i in edges for a in g.edges[i].attachments if a not in free_nodes}
        out.append(Component(edges, nodes, touch))
    out.sort(key=Component.key)
    return out


def owner_assignments(comps: list[Component],
                      owners: list[tuple[str, set[int]]]) -> Iterator[list[int]]:
    """Owners are (tag, allowed touchpoint set); yield owner index per component."""
    choices = []
    for c in comps:
        legal = [k for k, (_, allowed) in enumerate(owners) if c.touchpoints <= allowed]
        if not legal:
            return
        choices.append(legal)
    yield from itertools.product(*choices)


def extract_piece(g: Graph, boundary: list[int], edges: set[int], nodes: set[int]) -> Graph:
    """Subgraph with host ids preserved; points = boundary order."""
    out = Graph()
    out._next = g._next
    for nid in sorted(set(boundary) | nodes):
        n = g.nodes[nid]
        out.nodes[nid] = Node(n.id, n.name, n.seq)
    for eid in sorted(edges):
        e = g.edges[eid]
        out.edges[eid] = Edge(e.id, e.label, e.kind, list(e.attachments),
                              e.contents.copy() if e.contents is not None else None,
                              e.undisguise, e.var_type)
    out.points = list(boundary)
    return out


# ---------------------------------------------------------------------------
# embedding enumeration
# ---------------------------------------------------------------------------

class _LevelResult:
    def __init__(self) -> None:
        self.node_map: dict[int, int] = {}
        self.edge_map: dict[int, int] = {}
        self.seq: dict[str, tuple[int, ...]] = {}
        # var name -> (piece graph, dedup signature)
        self.pieces: dict[str, tuple[Graph, tuple]] = {}
        self.context_edges: set[int] = set()
        self.context_nodes: set[int] = set()
        self.hole: tuple[int, ...] = ()


def _expand_attachments(pg: Graph, atts: list[int], nmap: dict[int, int],
                        seq: dict[str, tuple[int, ...]]) -> Optional[list[int]]:
    """Pattern attachment list to host node list via nmap and splat bindings."""
    out: list[int] = []
    for a in atts:
        n = pg.nodes[a]
        if n.seq:
            if n.name not in seq:
                return None
            out.extend(seq[n.name])
        else:
            if a not in nmap:
                return None
            out.append(nmap[a])
    return out


def _bind_seq_run(pg: Graph, pat_atts: list[int], host_atts: list[int],
                  nmap: dict[int, int], seq: dict[str, tuple[int, ...]],
                  hard: set[int], used_hard: dict[int, int]) -> Optional[list]:
    """Unify a pattern attachment list (at most one splat) with host nodes.

    Returns an undo list of (kind, key) records, or None on failure.
    """
    undo: list = []

    def fail() -> None:
        for kind, key in reversed(undo):
            if kind == "n":
                h = nmap.pop(key)
                if used_hard.get(h) == key:
                    del used_hard[h]
            else:
                del seq[key]

    splats = [i for i, a in enumerate(pat_atts) if pg.nodes[a].seq]
    if len(splats) > 1:
        fail()
        return None
    if splats:
        i = splats[0]
        run = len(host_atts) - (len(pat_atts) - 1)
        if run < 0:
            fail()
            return None
        name = pg.nodes[pat_atts[i]].name
        value = tuple(host_atts[i:i + run])
        if name in seq:
            if seq[name] != value:
                fail()
                return None
        else:
            seq[name] = value
            undo.append(("s", name))
        pairs = list(zip(pat_atts[:i], host_atts[:i]))
        pairs += list(zip(pat_atts[i + 1:], host_atts[i + run:]))
    else:
        if len(pat_atts) != len(host_atts):
            fail()
            return None
        pairs = list(zip(pat_atts, host_atts))
    for p, h in pairs:
        if p in nmap:
            if nmap[p] != h:
                fail()
                return None
            continue
        if p in hard:
            owner = used_hard.get(h)
            if owner is not None and owner != p:
                fail()
                return None
            used_hard[h] = p
        nmap[p] = h
        undo.append(("n", p))
    return undo


def _level_matches(hg: Graph, pg: Graph, forced_points: bool,
                   pin: Optional[tuple[int, int]], allow_context: bool,
                   path: str) -> Iterator[_LevelResult]:
    """All ways to match pattern level pg against host level hg.

    forced_points: map pg.points to hg.points positionally (frame contents).
    pin: (pattern edge id, host edge id) the embedding must include.
    allow_context: uncovered elements may go to a context (top level).
    """
    hard_edges = [e for e in pg.edges_sorted() if e.kind != VARIABLE]
    var_edges = [e for e in pg.edges_sorted() if e.kind == VARIABLE]
    hard_nodes = {a for e in hard_edges for a in e.attachments}

    label_count: dict[tuple, int] = {}
    for e in hg.edges.values():
        k = (e.label, e.kind)
        label_count[k] = label_count.get(k, 0) + 1

    order = sorted(hard_edges,
                   key=lambda e: (0 if pin and e.id == pin[0] else 1,
                                  label_count.get((e.label, e.kind), 0), e.id))

    nmap: dict[int, int] = {}
    seq: dict[str, tuple[int, ...]] = {}
    used_hard: dict[int, int] = {}  # host node -> hard pattern node claiming it
    used_edges: dict[int, int] = {}
    edge_map: dict[int, int] = {}

    if forced_points:
        undo = _bind_seq_run(pg, list(pg.points), list(hg.points),
                             nmap, seq, hard_nodes, used_hard)
        if undo is None:
            return

    def host_candidates(pe: Edge) -> list[Edge]:
        if pin and pe.id == pin[0]:
            he = hg.edges.get(pin[1])
            return [he] if he is not None else []
        return [e for e in hg.edges_sorted() if e.id not in used_edges]

    def attachment_options(pe: Edge, he: Edge) -> list[list[int]]:
        opts = [list(he.attachments)]
        if (pe.kind == PLAIN and pe.label == "" and len(he.attachments) == 2
                and he.attachments[0] != he.attachments[1]):
            opts.append([he.attachments[1], he.attachments[0]])
        return opts

    def embed(k: int) -> Iterator[None]:
        if k == len(order):
            yield from free_nodes_stage()
            return
        pe = order[k]
        for he in host_candidates(pe):
            if he.label != pe.label or he.kind != pe.kind:
                continue
            for host_atts in attachment_options(pe, he):
                undo = _bind_seq_run(pg, list(pe.attachments), host_atts,
                                     nmap, seq, hard_nodes, used_hard)
                if undo is None:
                    continue
                used_edges[he.id] = pe.id
                edge_map[pe.id] = he.id
                if pe.contents is not None and he.contents is not None:
                    subs = _level_matches(he.contents, pe.contents, True, None,
                                          False, f"{path}e{he.id}/")
                    for sub in subs:
                        if any(n in frame_pieces for n in sub.pieces):
                            continue
                        frame_pieces.update(sub.pieces)
                        yield from embed(k + 1)
                        for n in sub.pieces:
                            del frame_pieces[n]
                elif pe.contents is None:
                    yield from embed(k + 1)
                del used_edges[he.id]
                del edge_map[pe.id]
                for kind, key in reversed(undo):
                    if kind == "n":
                        h = nmap.pop(key)
                        if used_hard.get(h) == key:
                            del used_hard[h]
                    else:
                        del seq[key]

    frame_pieces: dict[str, tuple[Graph, tuple]] = {}

    def free_nodes_stage() -> Iterator[None]:
        free = [n.id for n in pg.nodes.values()
                if n.id not in nmap and not n.seq]
        bad_seq = [n for n in pg.nodes.values() if n.seq and n.name not in seq]
        if bad_seq:
            return
        domains = [sorted(hg.nodes) for _ in free]

        def assign(i: int) -> Iterator[None]:
            if i == len(free):
                yield None
                return
            for h in domains[i]:
                nmap[free[i]] = h
                yield from assign(i + 1)
                del nmap[free[i]]

        yield from assign(0)

    for _ in embed(0):
        # partition uncovered elements among variable pieces and the context
        covered_edges = set(used_edges)
        covered_nodes = set(nmap.values()) | {h for t in seq.values() for h in t}
        free_edges = set(hg.edges) - covered_edges
        free_nodes = set(hg.nodes) - covered_nodes
        comps = components(hg, free_edges, free_nodes)

        owners: list[tuple[str, set[int]]] = []
        var_bounds: list[list[int]] = []
        ok = True
        for ve in var_edges:
            atts = _expand_attachments(pg, ve.attachments, nmap, seq)
            if atts is None:
                ok = False
                break
            var_bounds.append(atts)
            owners.append((ve.label, set(atts)))
        if not ok:
            continue
        point_images = _expand_attachments(pg, list(pg.points), nmap, seq)
        if point_images is None:
            continue
        if allow_context:
            owners.append(("", set(point_images)))
        for pick in owner_assignments(comps, owners):
            res = _LevelResult()
            res.node_map = dict(nmap)
            res.edge_map = dict(edge_map)
            res.seq = dict(seq)
            res.pieces = dict(frame_pieces)
            piece_sets: list[tuple[set[int], set[int]]] = [
                (set(), set()) for _ in owners]
            for c, o in zip(comps, pick):
                piece_sets[o][0].update(c.edges)
                piece_sets[o][1].update(c.nodes)
            bad = False
            for i, ve in enumerate(var_edges):
                edges_i, nodes_i = piece_sets[i]
                piece = extract_piece(hg, var_bounds[i], edges_i, nodes_i)
                sig = (ve.label, path, tuple(sorted(edges_i)),
                       tuple(sorted(piece.nodes)), tuple(piece.points))
                if ve.label in res.pieces:
                    bad = True
                    break
                res.pieces[ve.label] = (piece, sig)
            if bad:
                continue
            if allow_context:
                ctx_edges, ctx_nodes = piece_sets[len(var_edges)]
                res.context_edges = ctx_edges
                res.context_nodes = ctx_nodes | set(point_images)
                res.hole = tuple(point_images)
            else:
                assigned_e = set().union(*(s[0] for s in piece_sets)) if piece_sets else set()
                assigned_n = set().union(*(s[1] for s in piece_sets)) if piece_sets else set()
                if assigned_e != free_edges or assigned_n != free_nodes:
                    continue
            yield res


def _build_context(host: Graph, res: _LevelResult, hole_name: str) -> Context:
    ctx = host.copy()
    keep_edges = res.context_edges
    keep_nodes = res.context_nodes
    for eid in list(ctx.edges):
        if eid not in keep_edges:
            ctx.remove_edge(eid)
    for nid in list(ctx.nodes):
        if nid not in keep_nodes:
            ctx.remove_node(nid)
    ctx.add_edge(hole_name, VARIABLE, list(res.hole))
    return Context(ctx)


def enumerate_matches(host: Graph, pattern: Graph, *,
                      anchor: Optional[tuple[int, int]] = None,
                      var_types: Optional[dict[str, str]] = None,
                      grammar=None) -> list[Match]:
    """All matches of pattern in host, deduplicated and in deterministic order.

    anchor pins (pattern edge id, host edge id). var_types + grammar restrict
    typed variable pieces to graphs of the declared shape.
    """
    out: list[Match] = []
    seen: set[tuple] = set()
    hole_name = "Hole"
    taken = {e.label for _, g in pattern.walk() for e in g.edges.values()
             if e.kind == VARIABLE}
    while hole_name in taken:
        hole_name += "_"
    for res in _level_matches(host, pattern, False, anchor, True, ""):
        if not _pieces_typed_ok(res, var_types, grammar):
            continue
        sig = (tuple(sorted(res.context_edges)), tuple(sorted(res.context_nodes)),
               res.hole,
               tuple(sorted(sig for _, sig in res.pieces.values())),
               tuple(sorted(res.seq.items())))
        if sig in seen:
            continue
        sigma = {name: g for name, (g, _) in res.pieces.items()}
        m = Match(_build_context(host, res, hole_name), sigma, res.seq,
                  res.node_map, res.edge_map, sig)
        if not certify(host, pattern, m):
            continue
        seen.add(sig)
        out.append(m)
    return out


def _pieces_typed_ok(res: _LevelResult, var_types: Optional[dict[str, str]],
                     grammar) -> bool:
    if not var_types:
        return True
    from . import shapes
    for name, (piece, _) in res.pieces.items():
        t = var_types.get(name)
        if t is None:
            continue
        if t == shapes.PI:
            if not shapes.is_call_shaped(piece):
                return False
        elif grammar is not None:
            if piece.has_meta() or shapes.parse(grammar, t, piece) is None:
                return False
    return True


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

def premise_union(a: Graph, r: Graph) -> Graph:
    """Disjoint union identifying the k-th points of a and r."""
    from .graph import ArityMismatch
    if len(a.points) != len(r.points):
        raise ArityMismatch(
            f"premise has {len(a.points)} points, replacement {len(r.points)}")
    out = a.copy()
    nmap, _ = copy_into(out, r)
    for pa, pr in zip(list(out.points), [nmap[p] for p in r.points]):
        if pa != pr:
            out.merge_nodes(pa, pr)
    return out


def rewrite(body: Graph,
            m: Match) -> tuple[Graph, dict[int, int], dict[int, list[int]]]:
    """Build C[body sigma]: glue the instantiated body into the match context.

    Returns the rewritten graph, a map from surviving body edge ids to
    result ids, and per body variable edge the result ids of the edges its
    binding expanded to (binding declaration order).
    """
    from .subst import _instantiate_level
    body2 = expand_splats(body, m.splat_sizes(), m.substitution)
    inst = body2.copy()
    expansions = _instantiate_level(inst, m.substitution)
    result = m.context.graph.copy()
    hole = m.context.hole_edge
    nmap, emap = copy_into(result, inst)
    result.remove_edge(hole.id)

    rep: dict[int, int] = {}

    def find(x: int) -> int:
        while x in rep:
            x = rep[x]
        return x

    for p, a in zip(inst.points, hole.attachments):
        x, y = find(nmap[p]), find(a)
        if x == y:
            continue
        # the context side survives so host node ids stay stable
        result.merge_nodes(y, x)
        rep[x] = y

    body_map = {e.id: emap[e.id] for e in body2.edges_sorted() if e.id in emap}
    exp_map = {var_id: [emap[c] for c in copied if c in emap]
               for var_id, copied in expansions.items()}
    return result, body_map, exp_map


def apply(host: Graph, r: Rule, m: Match) -> Graph:
    """Apply rule r at match m; the result is C[R sigma]."""
    if r.replacement is None:
        raise ValueError("cannot apply a fail-marker rule structurally")
    result, _, _ = rewrite(r.replacement, m)
    return result
