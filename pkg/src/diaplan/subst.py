"""Substitutions, instantiation, and contexts with hole plugging."""
from __future__ import annotations

from collections import Counter
from typing import Optional

from .graph import (ArityMismatch, CALL, DCALL, FRAME, Graph, GraphError,
                    VARIABLE, copy_into)

# A substitution maps variable names to pointed graphs.
Substitution = dict[str, Graph]


def variables_of(g: Graph) -> Counter:
    """Multiset of (name, attachment count) over variable edges at all depths."""
    out: Counter = Counter()
    for _, lvl in g.walk():
        for e in lvl.edges_sorted():
            if e.kind == VARIABLE:
                out[(e.label, len(e.attachments))] += 1
    return out


def expand_splats(g: Graph, lengths: dict[str, int],
                  s: Optional[Substitution] = None) -> Graph:
    """Replace each splat node with a run of fresh plain nodes.

    lengths maps splat node names to their expansion size. Sizes missing
    there are inferred from s: a bound variable edge with one splat among its
    attachments fixes the splat's size from the binding's point count.
    Recurses into frame contents (each level resolves names independently).
    """
    out = g.copy()
    _expand_level(out, dict(lengths), s or {})
    return out


def _expand_level(lvl: Graph, lengths: dict[str, int], s: Substitution) -> None:
    seq_nodes = {n.id: n.name for n in lvl.nodes.values() if n.seq}
    if seq_nodes:
        for e in lvl.edges_sorted():
            if e.kind != VARIABLE or e.label not in s:
                continue
            splats = [a for a in e.attachments if a in seq_nodes]
            if len(splats) == 1:
                name = seq_nodes[splats[0]]
                size = len(s[e.label].points) - (len(e.attachments) - 1)
                if size < 0:
                    raise ArityMismatch(
                        f"binding for {e.label} has too few points for its attachments")
                if lengths.setdefault(name, size) != size:
                    raise ArityMismatch(f"conflicting sizes for splat {name}")
        runs: dict[int, list[int]] = {}
        for nid, name in seq_nodes.items():
            if name not in lengths:
                raise GraphError(f"cannot infer size of splat {name}")
            runs[nid] = [lvl.add_node(f"{name}{k}") for k in range(lengths[name])]
        for e in lvl.edges.values():
            e.attachments = [b for a in e.attachments
                             for b in (runs[a] if a in runs else [a])]
        lvl.points = [b for p in lvl.points
                      for b in (runs[p] if p in runs else [p])]
        for nid in runs:
            lvl.remove_node(nid)
    for e in lvl.edges_sorted():
        if e.contents is not None:
            _expand_level(e.contents, dict(lengths), s)


def instantiate(g: Graph, s: Substitution) -> Graph:
    """Replace every bound variable edge of g (at any depth) with a fresh
    copy of its binding, gluing the copy's points to the edge's attachments
    positionally. Unbound variables remain; over-wide substitutions are fine.
    """
    out = g.copy()
    _instantiate_level(out, s)
    return out


def _instantiate_level(lvl: Graph, s: Substitution) -> dict[int, list[int]]:
    """Returns, per replaced variable edge id, the ids of the edges copied in
    for it, in the binding's declaration order."""
    expansions: dict[int, list[int]] = {}
    var_ids = [e.id for e in lvl.edges_sorted() if e.kind == VARIABLE and e.label in s]
    frame_ids = [e.id for e in lvl.edges_sorted() if e.kind == FRAME]
    for eid in var_ids:
        e = lvl.edges[eid]
        binding = s[e.label]
        if len(binding.points) != len(e.attachments):
            raise ArityMismatch(
                f"variable {e.label} has {len(e.attachments)} attachments but its "
                f"binding has {len(binding.points)} points")
        old_nodes = set(lvl.nodes)
        nmap, emap = copy_into(lvl, binding)
        expansions[eid] = [emap[k] for k in sorted(emap)]
        lvl.remove_edge(eid)

        rep: dict[int, int] = {}

        def find(x: int) -> int:
            while x in rep:
                x = rep[x]
            return x

        for p, a in zip(binding.points, e.attachments):
            x, y = find(nmap[p]), find(a)
            if x == y:
                continue
            # prefer keeping a pre-existing node so outer ids stay stable
            if x in old_nodes and y not in old_nodes:
                keep, drop = x, y
            elif y in old_nodes and x not in old_nodes:
                keep, drop = y, x
            else:
                keep, drop = min(x, y), max(x, y)
            lvl.merge_nodes(keep, drop)
            rep[drop] = keep
        if e.undisguise:
            for ceid in emap.values():
                ce = lvl.edges.get(ceid)
                if ce is not None and ce.kind == DCALL:
                    ce.kind = CALL
    for fid in frame_ids:
        _instantiate_level(lvl.edges[fid].contents, s)
    return expansions


class Context:
    """A graph with exactly one variable edge, the hole, at any depth."""

    def __init__(self, graph: Graph):
        holes = [(lvl, e) for _, lvl in graph.walk()
                 for e in lvl.edges_sorted() if e.kind == VARIABLE]
        if len(holes) != 1:
            raise GraphError(f"a context needs exactly one hole, found {len(holes)}")
        self.graph = graph
        self.hole_level, self.hole_edge = holes[0]

    @property
    def hole_name(self) -> str:
        return self.hole_edge.label

    @property
    def hole_arity(self) -> int:
        return len(self.hole_edge.attachments)


def plug(c: Context, g: Graph) -> Graph:
    """C[g]: instantiate the context's hole with g."""
    if c.hole_arity != len(g.points):
        raise ArityMismatch(
            f"hole arity {c.hole_arity} != point count {len(g.points)}")
    return instantiate(c.graph, {c.hole_name: g})
