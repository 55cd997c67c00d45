"""Hierarchical pointed hypergraphs.

A graph holds nodes, hyperedges with ordered attachments, and an ordered
sequence of interface nodes (points, repetition allowed). Frame edges carry a
nested contents graph; edges never cross frame boundaries. Node and edge ids
share one counter per graph level; contents graphs have their own id spaces.
"""
from __future__ import annotations

from typing import Iterator, Optional

PLAIN = "plain"
FRAME = "frame"
VARIABLE = "variable"
CALL = "call"
DCALL = "dcall"

KINDS = (PLAIN, FRAME, VARIABLE, CALL, DCALL)

ARG_LABEL = "@arg"


class GraphError(Exception):
    pass


class ArityMismatch(GraphError):
    pass


class WrongKind(GraphError):
    pass


class Node:
    __slots__ = ("id", "name", "seq")

    def __init__(self, id: int, name: str, seq: bool = False):
        self.id = id
        self.name = name
        # seq marks a splat placeholder standing for a node sequence
        self.seq = seq

    def __repr__(self) -> str:
        return f"Node({self.id}, {self.name!r}{', seq' if self.seq else ''})"


class Edge:
    __slots__ = ("id", "label", "kind", "attachments", "contents", "undisguise", "var_type")

    def __init__(self, id: int, label: str, kind: str, attachments: list[int],
                 contents: Optional["Graph"] = None, undisguise: bool = False,
                 var_type: Optional[str] = None):
        self.id = id
        self.label = label
        self.kind = kind
        self.attachments = attachments
        self.contents = contents
        # undisguise: variable occurrence whose instantiation turns the copied
        # root-level disguised calls into callable ones
        self.undisguise = undisguise
        # var_type: declared shape type of a variable edge, if any
        self.var_type = var_type

    def is_frame(self) -> bool:
        return self.kind == FRAME

    def __repr__(self) -> str:
        return f"Edge({self.id}, {self.label!r}, {self.kind}, {self.attachments})"


class Graph:
    def __init__(self) -> None:
        self.nodes: dict[int, Node] = {}
        self.edges: dict[int, Edge] = {}
        self.points: list[int] = []
        self._next = 0

    # -- construction -----------------------------------------------------

    def _alloc(self) -> int:
        i = self._next
        self._next += 1
        return i

    def add_node(self, name: Optional[str] = None, seq: bool = False) -> int:
        i = self._alloc()
        self.nodes[i] = Node(i, name if name is not None else f"n{i}", seq)
        return i

    def add_edge(self, label: str, kind: str = PLAIN, attachments: tuple[int, ...] | list[int] = (),
                 contents: Optional["Graph"] = None, undisguise: bool = False,
                 var_type: Optional[str] = None) -> int:
        if kind not in KINDS:
            raise WrongKind(f"unknown edge kind {kind!r}")
        if (contents is not None) != (kind == FRAME):
            raise WrongKind("contents present iff the edge is a frame")
        i = self._alloc()
        self.edges[i] = Edge(i, label, kind, list(attachments), contents, undisguise, var_type)
        return i

    def set_points(self, points: list[int] | tuple[int, ...]) -> None:
        self.points = list(points)

    # -- access ------------------------------------------------------------

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def edge_ids(self) -> list[int]:
        return sorted(self.edges)

    def edges_sorted(self) -> list[Edge]:
        return [self.edges[i] for i in sorted(self.edges)]

    def incident(self, nid: int) -> list[int]:
        return [e.id for e in self.edges_sorted() if nid in e.attachments]

    def node_name(self, nid: int) -> str:
        return self.nodes[nid].name

    # -- mutation ----------------------------------------------------------

    def remove_edge(self, eid: int) -> None:
        del self.edges[eid]

    def remove_node(self, nid: int) -> None:
        del self.nodes[nid]
        if nid in self.points:
            self.points = [p for p in self.points if p != nid]

    def merge_nodes(self, keep: int, drop: int) -> None:
        """Redirect every reference of drop to keep and delete drop."""
        if keep == drop:
            return
        for e in self.edges.values():
            e.attachments = [keep if a == drop else a for a in e.attachments]
        self.points = [keep if p == drop else p for p in self.points]
        del self.nodes[drop]

    # -- copying -----------------------------------------------------------

    def copy(self) -> "Graph":
        """Deep copy preserving ids (snapshot)."""
        g = Graph()
        g._next = self._next
        g.points = list(self.points)
        for i, n in self.nodes.items():
            g.nodes[i] = Node(n.id, n.name, n.seq)
        for i, e in self.edges.items():
            g.edges[i] = Edge(e.id, e.label, e.kind, list(e.attachments),
                              e.contents.copy() if e.contents is not None else None,
                              e.undisguise, e.var_type)
        return g

    # -- traversal ---------------------------------------------------------

    def walk(self, path: str = "") -> Iterator[tuple[str, "Graph"]]:
        """Yield (path, graph) for this level and every frame contents below."""
        yield path, self
        for e in self.edges_sorted():
            if e.contents is not None:
                yield from e.contents.walk(f"{path}frame e{e.id}/")

    def has_meta(self) -> bool:
        """True if any call or disguised call exists at any depth."""
        for _, g in self.walk():
            for e in g.edges.values():
                if e.kind in (CALL, DCALL):
                    return True
        return False

    def __repr__(self) -> str:
        return (f"Graph(nodes={sorted(self.nodes)}, edges={[repr(e) for e in self.edges_sorted()]}, "
                f"points={self.points})")


def copy_into(target: Graph, src: Graph) -> tuple[dict[int, int], dict[int, int]]:
    """Copy src's elements into target with fresh target-level ids.

    Contents graphs are freshly renumbered too. Returns (node map, edge map)
    for src's own level.
    """
    nmap: dict[int, int] = {}
    emap: dict[int, int] = {}
    for n in (src.nodes[i] for i in sorted(src.nodes)):
        nmap[n.id] = target.add_node(n.name, n.seq)
    for e in src.edges_sorted():
        contents = fresh_copy(e.contents) if e.contents is not None else None
        emap[e.id] = target.add_edge(e.label, e.kind, [nmap[a] for a in e.attachments],
                                     contents, e.undisguise, e.var_type)
    return nmap, emap


def fresh_copy(g: Graph) -> Graph:
    """Isomorphic copy sharing no ids with g (ids continue past g's counter)."""
    out = Graph()
    out._next = g._next
    nmap, _ = copy_into(out, g)
    out.points = [nmap[p] for p in g.points]
    return out


def validate(g: Graph, path: str = "") -> "Report":
    """Structural validity report; no errors means valid."""
    from .report import Report
    rep = Report()
    for i, p in enumerate(g.points):
        if p not in g.nodes:
            rep.error("invalid graph", f"{path}point {i + 1} refers to missing node {p}")
    for e in g.edges_sorted():
        where = f"{path}edge e{e.id} ({e.label!r})"
        for a in e.attachments:
            if a not in g.nodes:
                rep.error("invalid graph", f"{where}: cross-frame or dangling attachment {a}")
        if e.kind == FRAME and e.contents is None:
            rep.error("invalid graph", f"{where}: frame without contents")
        if e.kind != FRAME and e.contents is not None:
            rep.error("invalid graph", f"{where}: contents on a non-frame edge")
        if e.kind == VARIABLE:
            if not e.label[:1].isupper():
                rep.error("invalid graph", f"{where}: variable name must be capitalized")
        elif e.kind in (PLAIN, CALL, DCALL):
            if e.label[:1].isupper():
                rep.error("invalid graph", f"{where}: ordinary label may not be capitalized")
        if e.contents is not None:
            rep.extend(validate(e.contents, f"{path}frame e{e.id}/"))
    return rep


class Isomorphism:
    def __init__(self, node_map: dict[int, int], edge_map: dict[int, int],
                 contents: dict[int, "Isomorphism"]):
        self.node_map = node_map
        self.edge_map = edge_map
        self.contents = contents

    def __repr__(self) -> str:
        return f"Isomorphism(nodes={self.node_map}, edges={self.edge_map})"


def _edge_sig(e: Edge) -> tuple:
    return (e.label, e.kind, len(e.attachments), e.undisguise)


def _orientations(e: Edge) -> list[list[int]]:
    # unlabeled binary plain edges are orientation-insensitive
    if e.kind == PLAIN and e.label == "" and len(e.attachments) == 2:
        fwd = list(e.attachments)
        rev = [e.attachments[1], e.attachments[0]]
        return [fwd, rev] if fwd != rev else [fwd]
    return [list(e.attachments)]


def isomorphic(g: Graph, h: Graph) -> Optional[Isomorphism]:
    """Bijection on nodes and edges preserving labels, kinds, attachment
    order (up to flipping unlabeled binaries), points positionally, and
    frame contents recursively; None if there is none."""
    if len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return None
    if len(g.points) != len(h.points):
        return None
    gsigs = sorted(_edge_sig(e) for e in g.edges.values())
    hsigs = sorted(_edge_sig(e) for e in h.edges.values())
    if gsigs != hsigs:
        return None

    node_map: dict[int, int] = {}
    used_nodes: set[int] = set()

    def assign(a: int, b: int) -> Optional[list[int]]:
        """Try node mapping a->b; return list of newly mapped g-nodes or None."""
        if a in node_map:
            return [] if node_map[a] == b else None
        if b in used_nodes:
            return None
        if g.nodes[a].seq != h.nodes[b].seq:
            return None
        node_map[a] = b
        used_nodes.add(b)
        return [a]

    def retract(added: list[int]) -> None:
        for a in added:
            used_nodes.discard(node_map.pop(a))

    # points are forced positionally
    added0: list[int] = []
    for gp, hp in zip(g.points, h.points):
        got = assign(gp, hp)
        if got is None:
            retract(added0)
            return None
        added0.extend(got)

    gedges = g.edges_sorted()
    edge_map: dict[int, int] = {}
    contents_iso: dict[int, Isomorphism] = {}
    used_edges: set[int] = set()

    def match_edges(k: int) -> bool:
        if k == len(gedges):
            return True
        ge = gedges[k]
        for he in h.edges_sorted():
            if he.id in used_edges or _edge_sig(he) != _edge_sig(ge):
                continue
            for hatt in _orientations(he):
                added: list[int] = []
                ok = True
                for a, b in zip(ge.attachments, hatt):
                    got = assign(a, b)
                    if got is None:
                        ok = False
                        break
                    added.extend(got)
                sub = None
                if ok and ge.contents is not None:
                    sub = isomorphic(ge.contents, he.contents)
                    ok = sub is not None
                if ok:
                    edge_map[ge.id] = he.id
                    used_edges.add(he.id)
                    if sub is not None:
                        contents_iso[ge.id] = sub
                    if match_edges(k + 1):
                        return True
                    used_edges.discard(he.id)
                    del edge_map[ge.id]
                    contents_iso.pop(ge.id, None)
                retract(added)
        return False

    if not match_edges(0):
        retract(added0)
        return None

    # remaining nodes are unconstrained; map them in (seq, id) order
    rest_g = sorted((n for n in g.nodes if n not in node_map),
                    key=lambda n: (g.nodes[n].seq, n))
    rest_h = sorted((n for n in h.nodes if n not in used_nodes),
                    key=lambda n: (h.nodes[n].seq, n))
    for a, b in zip(rest_g, rest_h):
        if g.nodes[a].seq != h.nodes[b].seq:
            retract(added0)
            return None
        node_map[a] = b
        used_nodes.add(b)
    return Isomorphism(dict(node_map), edge_map, contents_iso)
