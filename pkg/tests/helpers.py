"""Shared builders and brute-force oracles for the test suite.

The matching oracle here deliberately avoids the production matcher's
component machinery: it enumerates raw element ownership exhaustively and
filters with the definitional soundness certificate. Agreement between the
two is what the matching tests assert.
"""
import itertools
from importlib import resources

from diaplan import (
    CALL, DCALL, FRAME, PLAIN, VARIABLE,
    Graph, Node, Edge, isomorphic, instantiate, plug, Context,
    load_program, parse_graph,
)


# ---------------------------------------------------------------------------
# small builders
# ---------------------------------------------------------------------------

# pass/fail lines from the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def named(g: Graph) -> dict[str, int]:
    """Node name -> id for every node of g's top level."""
    return {g.nodes[i].name: i for i in sorted(g.nodes)}

def attach_call(g: Graph, pred: str, node_names: list[str]) -> int:
    """Add a pending call edge over the named top-level nodes."""
    by_name = named(g)
    return g.add_edge(pred, CALL, [by_name[n] for n in node_names])

def single_node_graph(points: bool = True) -> Graph:
    g = Graph()
    n = g.add_node("x")
    if points:
        g.set_points([n])
    return g

def edge_graph(label: str = "", points: bool = True) -> Graph:
    g = Graph()
    a, b = g.add_node("a"), g.add_node("b")
    g.add_edge(label, PLAIN, [a, b])
    if points:
        g.set_points([a, b])
    return g

def triangle_graph(label: str = "") -> Graph:
    g = Graph()
    ns = [g.add_node(f"t{i}") for i in range(3)]
    for i in range(3):
        g.add_edge(label, PLAIN, [ns[i], ns[(i + 1) % 3]])
    return g

def empty_list_contents() -> Graph:
    g = Graph()
    n = g.add_node("n")
    g.set_points([n, n])
    return g

def battery() -> list[Graph]:
    """Small patterns spanning the matcher's cases: pointed and pointless
    nodes, labeled edges, partial interfaces, and variable pieces."""
    p1 = single_node_graph()
    p2 = single_node_graph(points=False)
    p3 = Graph()
    x, y = p3.add_node(), p3.add_node()
    p3.add_edge("a", PLAIN, [x, y])
    p3.set_points([x, y])
    p4 = p3.copy()
    p4.set_points([sorted(p4.nodes)[0]])
    p5 = Graph()
    x, y, z = p5.add_node(), p5.add_node(), p5.add_node()
    p5.add_edge("a", PLAIN, [x, y])
    p5.add_edge("b", PLAIN, [y, z])
    p5.set_points([x, z])
    p6 = Graph()
    x = p6.add_node()
    p6.add_edge("X", VARIABLE, [x])
    p6.set_points([x])
    p7 = Graph()
    x, y = p7.add_node(), p7.add_node()
    p7.add_edge("a", PLAIN, [x, y])
    p7.add_edge("X", VARIABLE, [y])
    p7.set_points([x])
    return [p1, p2, p3, p4, p5, p6, p7]


def data_path(name: str) -> str:
    return str(resources.files("diaplan.data") / name)

def load_list():
    return load_program(data_path("list.dp"))

def load_coloring():
    return load_program(data_path("coloring.dp"))

def load_normtask() -> Graph:
    with open(data_path("normtask.dp")) as f:
        return parse_graph(f.read())


def disguised_arg(host: Graph, inner: str, arity: int) -> int:
    """Fresh handle node carrying an @arg frame with one disguised call."""
    h = host.add_node()
    g = Graph()
    ids = [g.add_node() for _ in range(arity)]
    g.add_edge(inner, DCALL, ids)
    g.set_points(ids)
    host.add_edge(ARG, FRAME, [h], contents=g)
    return h

ARG = "@arg"

def combinator_call(host: Graph, comb: str, args: list[str],
                    inners: list[str]) -> int:
    """Attach comb(args..., handles...) with one @arg per inner predicate."""
    by_name = named(host)
    handles = [disguised_arg(host, inner, len(args)) for inner in inners]
    return host.add_edge(comb, CALL,
                         [by_name[a] for a in args] + handles)


def list_host(n_items: int, kinds: list[int] | None = None) -> Graph:
    """Two outer nodes spanned by a List frame with an n-item chain."""
    g = Graph()
    l, r = g.add_node("l"), g.add_node("r")
    g.add_edge("List", FRAME, [l, r], contents=list_contents(n_items, kinds))
    g.set_points([l, r])
    return g


# ---------------------------------------------------------------------------
# flat-graph corpus, one representative per isomorphism class
# ---------------------------------------------------------------------------

def flat_corpus(max_nodes: int = 4, max_edges: int = 4,
                labels: tuple[str, ...] = ("a", "b")) -> list[Graph]:
    """All flat pointless graphs with <= max_nodes nodes and <= max_edges
    labeled binary edges (loops allowed, no parallel duplicates), up to
    isomorphism. Canonical form: minimum sorted slot tuple over all node
    permutations."""
    out: list[Graph] = []
    for n in range(max_nodes + 1):
        slots = [(lbl, u, v) for lbl in labels
                 for u in range(n) for v in range(n)]
        index = {s: i for i, s in enumerate(slots)}
        perm_maps = []
        for perm in itertools.permutations(range(n)):
            perm_maps.append([index[(lbl, perm[u], perm[v])]
                              for (lbl, u, v) in slots])
        seen: set[tuple] = set()
        for k in range(min(max_edges, len(slots)) + 1):
            for combo in itertools.combinations(range(len(slots)), k):
                key = min(tuple(sorted(pm[i] for i in combo))
                          for pm in perm_maps) if n else ()
                if (n, key) in seen:
                    continue
                seen.add((n, key))
                g = Graph()
                ids = [g.add_node(f"v{i}") for i in range(n)]
                for i in combo:
                    lbl, u, v = slots[i]
                    g.add_edge(lbl, PLAIN, [ids[u], ids[v]])
                out.append(g)
    return out


# ---------------------------------------------------------------------------
# brute-force split-enumeration matching oracle (flat graphs only)
# ---------------------------------------------------------------------------

def _hard_embeddings(host: Graph, hard_edges: list) -> list[tuple[dict, dict]]:
    """All injective maps of the hard pattern edges into host edges,
    with both orientations for unlabeled binary plain edges."""
    results: list[tuple[dict, dict]] = []
    host_edges = host.edges_sorted()

    def extend(i: int, emap: dict, nmap: dict) -> None:
        if i == len(hard_edges):
            results.append((dict(emap), dict(nmap)))
            return
        pe = hard_edges[i]
        for he in host_edges:
            if he.id in emap.values():
                continue
            if he.label != pe.label or he.kind != pe.kind:
                continue
            if len(he.attachments) != len(pe.attachments):
                continue
            orders = [he.attachments]
            if (pe.kind == PLAIN and pe.label == "" and
                    len(pe.attachments) == 2 and
                    he.attachments[0] != he.attachments[1]):
                orders.append(list(reversed(he.attachments)))
            for atts in orders:
                trial = dict(nmap)
                ok = True
                for pa, ha in zip(pe.attachments, atts):
                    if trial.setdefault(pa, ha) != ha:
                        ok = False
                        break
                if ok and len(set(trial.values())) == len(trial):
                    emap[pe.id] = he.id
                    extend(i + 1, emap, trial)
                    del emap[pe.id]

    extend(0, {}, {})
    return results


def _extract(host: Graph, boundary: list[int], edges: set[int],
             interior: set[int]) -> Graph:
    g = Graph()
    g._next = host._next
    for nid in sorted(set(boundary) | interior):
        n = host.nodes[nid]
        g.nodes[nid] = Node(n.id, n.name, n.seq)
    for eid in sorted(edges):
        e = host.edges[eid]
        g.edges[eid] = Edge(e.id, e.label, e.kind, list(e.attachments))
    g.points = list(boundary)
    return g


def oracle_splits(host: Graph, pattern: Graph,
                  certify: bool = True) -> list[tuple]:
    """Distinct legal splits of host into context + instantiated pattern.

    A split fixes an injective image for the hard part, images for the
    remaining pattern nodes, an owner (context or one variable) for every
    uncovered host edge, and a piece for each variable. Legality is checked
    structurally; with certify=True each surviving split is additionally
    verified against the definition: plug(context, pattern sigma) must be
    isomorphic to the host.
    """
    assert all(e.kind != FRAME for e in pattern.edges.values())
    assert all(not n.seq for n in pattern.nodes.values())
    hard_edges = [e for e in pattern.edges_sorted() if e.kind != VARIABLE]
    var_edges = [e for e in pattern.edges_sorted() if e.kind == VARIABLE]
    hard_nodes = {a for e in hard_edges for a in e.attachments}
    soft_nodes = [n for n in sorted(pattern.nodes) if n not in hard_nodes]
    host_nodes = sorted(host.nodes)
    incident = {n: set() for n in host_nodes}
    for e in host.edges.values():
        for a in e.attachments:
            incident[a].add(e.id)

    if soft_nodes and not host_nodes:
        return []
    splits: dict[tuple, tuple] = {}
    for emap, base in _hard_embeddings(host, hard_edges):
        for soft_img in itertools.product(host_nodes, repeat=len(soft_nodes)):
            nmap = dict(base)
            for pn, hn in zip(soft_nodes, soft_img):
                nmap[pn] = hn
            covered = set(nmap.values())
            interface = [nmap[p] for p in pattern.points]
            bounds = [[nmap[a] for a in ve.attachments] for ve in var_edges]
            unc_edges = [e for e in host.edges_sorted()
                         if e.id not in emap.values()]
            # owner index: 0 = context, i + 1 = var_edges[i]
            for owners in itertools.product(range(len(var_edges) + 1),
                                            repeat=len(unc_edges)):
                piece_edges = [set() for _ in var_edges]
                ctx_edges = set()
                node_owner: dict[int, int] = {}
                ok = True
                for e, o in zip(unc_edges, owners):
                    if o == 0:
                        ctx_edges.add(e.id)
                        for a in e.attachments:
                            if a in covered and a not in interface:
                                ok = False
                    else:
                        piece_edges[o - 1].add(e.id)
                        for a in e.attachments:
                            if a in covered:
                                if a not in bounds[o - 1]:
                                    ok = False
                            elif node_owner.setdefault(a, o) != o:
                                ok = False
                    if not ok:
                        break
                if ok:
                    for n, o in node_owner.items():
                        if not incident[n] <= piece_edges[o - 1]:
                            ok = False
                            break
                if not ok:
                    continue
                for p in host.points:
                    if p in covered and p not in interface:
                        ok = False
                    if p in node_owner:
                        ok = False
                if not ok:
                    continue
                free = [n for n in host_nodes
                        if n not in covered and n not in node_owner
                        and not incident[n] and n not in host.points]
                for free_pick in itertools.product(
                        range(len(var_edges) + 1), repeat=len(free)):
                    interiors = [set() for _ in var_edges]
                    for n, o in node_owner.items():
                        interiors[o - 1].add(n)
                    for n, o in zip(free, free_pick):
                        if o:
                            interiors[o - 1].add(n)
                    ctx_nodes = {n for n in host_nodes if n not in covered
                                 and n not in node_owner
                                 and n not in {f for f, o in zip(free, free_pick) if o}}
                    key = (tuple(sorted(ctx_edges)),
                           tuple(sorted(ctx_nodes | set(interface))),
                           tuple(interface),
                           tuple(sorted(
                               (ve.label, tuple(sorted(pe)),
                                tuple(sorted(iv | set(b))), tuple(b))
                               for ve, pe, iv, b in
                               zip(var_edges, piece_edges, interiors, bounds))))
                    if key in splits:
                        continue
                    splits[key] = (dict(nmap), dict(emap),
                                   [set(s) for s in piece_edges],
                                   [set(s) for s in interiors],
                                   set(ctx_edges), set(ctx_nodes))
    out = []
    for key, (nmap, emap, pieces, interiors, ctx_edges, ctx_nodes) in splits.items():
        if certify and not _certify_split(host, pattern, var_edges, nmap,
                                          pieces, interiors, ctx_edges,
                                          ctx_nodes):
            continue
        out.append(key)
    return out


def _certify_split(host, pattern, var_edges, nmap, pieces, interiors,
                   ctx_edges, ctx_nodes):
    interface = [nmap[p] for p in pattern.points]
    sigma = {}
    for ve, pe, iv in zip(var_edges, pieces, interiors):
        sigma[ve.label] = _extract(host, [nmap[a] for a in ve.attachments],
                                   pe, iv)
    ctx = _extract(host, interface, ctx_edges,
                   ctx_nodes - set(interface))
    ctx.points = [p for p in host.points]
    hole = "Hole"
    while any(e.label == hole for e in pattern.edges.values()):
        hole += "_"
    ctx.add_edge(hole, VARIABLE, interface)
    rebuilt = plug(Context(ctx), instantiate(pattern, sigma))
    return isomorphic(rebuilt, host) is not None


def oracle_match_count(host: Graph, pattern: Graph,
                       certify: bool = True) -> int:
    return len(oracle_splits(host, pattern, certify))


# ---------------------------------------------------------------------------
# list-shape fixtures
# ---------------------------------------------------------------------------

def item_contents(kind: int = 0) -> Graph:
    """An I-shaped graph: 3 parallel edges, a triangle, or K4 minus an edge."""
    g = Graph()
    if kind == 0:
        u, v = g.add_node("u"), g.add_node("v")
        for _ in range(3):
            g.add_edge("", PLAIN, [u, v])
    elif kind == 1:
        u, v, w = g.add_node("u"), g.add_node("v"), g.add_node("w")
        for a, b in [(u, v), (v, w), (w, u)]:
            g.add_edge("", PLAIN, [a, b])
    else:
        u, v, w, z = (g.add_node(n) for n in "uvwz")
        for a, b in [(u, w), (u, z), (v, w), (v, z), (w, z)]:
            g.add_edge("", PLAIN, [a, b])
    ids = sorted(g.nodes)
    g.set_points(ids[:2])
    return g


def list_contents(n_items: int, kinds: list[int] | None = None) -> Graph:
    """A chain of n_items item frames between the two contents points."""
    g = Graph()
    if n_items == 0:
        n = g.add_node("n")
        g.set_points([n, n])
        return g
    ns = [g.add_node(f"m{i}") for i in range(n_items + 1)]
    for i in range(n_items):
        kind = kinds[i] if kinds else 0
        g.add_edge("Item", FRAME, [ns[i], ns[i + 1]],
                   contents=item_contents(kind))
    g.set_points([ns[0], ns[-1]])
    return g


def list_mutants() -> dict[str, Graph]:
    """Hand-built near-lists, each rejected by the list shape."""
    broken = Graph()
    ns = [broken.add_node(f"m{i}") for i in range(4)]
    broken.add_edge("Item", FRAME, [ns[0], ns[1]], contents=item_contents())
    broken.add_edge("Item", FRAME, [ns[2], ns[3]], contents=item_contents())
    broken.set_points([ns[0], ns[3]])

    extra = list_contents(1)
    ids = sorted(extra.nodes)
    extra.add_edge("", PLAIN, [ids[0], ids[1]])

    wrong_label = list_contents(1)
    [e for e in wrong_label.edges.values() if e.kind == FRAME][0].label = "Box"

    wrong_points = list_contents(1)
    wrong_points.set_points(wrong_points.points + wrong_points.points[:1])

    outside = Graph()
    a, b = outside.add_node("a"), outside.add_node("b")
    for _ in range(3):
        outside.add_edge("", PLAIN, [a, b])
    outside.set_points([a, b])

    return {
        "broken chain": broken,
        "extra edge": extra,
        "wrong frame label": wrong_label,
        "wrong point count": wrong_points,
        "item outside frame": outside,
    }


# ---------------------------------------------------------------------------
# coloring oracles
# ---------------------------------------------------------------------------

def color_assignment_exists(n: int, edges: list[tuple[int, int]],
                            palette: int) -> bool:
    """Brute force: some assignment of palette colors to n nodes makes all
    edge endpoints differ."""
    for colors in itertools.product(range(palette), repeat=n):
        if all(colors[u] != colors[v] for u, v in edges if u != v):
            return True
    return n == 0


def box_contents(g: Graph) -> Graph:
    """Contents of the single GraphBox frame at g's top level."""
    frames = [e for e in g.edges.values()
              if e.kind == FRAME and e.label == "GraphBox"]
    assert len(frames) == 1
    return frames[0].contents


def check_coloring(contents: Graph, palette: set[str]) -> None:
    """Every node wears exactly one palette color, no eps marks remain,
    and adjacent nodes differ."""
    marks: dict[int, list[str]] = {n: [] for n in contents.nodes}
    adj: list[tuple[int, int]] = []
    for e in contents.edges.values():
        if e.kind != PLAIN:
            continue
        if len(e.attachments) == 1:
            marks[e.attachments[0]].append(e.label)
        elif e.label == "":
            adj.append((e.attachments[0], e.attachments[1]))
    for n, ms in marks.items():
        assert ms != [] and len(ms) == 1, f"node {n} wears {ms}"
        assert ms[0] in palette, f"node {n} wears {ms[0]}"
        assert ms[0] != "eps"
    for u, v in adj:
        assert marks[u][0] != marks[v][0], "adjacent nodes share a color"


def coloring_host(n: int, edges: list[tuple[int, int]]) -> Graph:
    """A GraphBox host with n eps-marked nodes and the given adjacency."""
    inner = Graph()
    ids = [inner.add_node(f"n{i + 1}") for i in range(n)]
    for u, v in edges:
        inner.add_edge("", PLAIN, [ids[u], ids[v]])
    for i in ids:
        inner.add_edge("eps", PLAIN, [i])
    g = Graph()
    x, y = g.add_node("x"), g.add_node("y")
    g.add_edge("GraphBox", FRAME, [x, y], contents=inner)
    g.set_points([x, y])
    return g


def restrict_palette(prog, colors: set[str]):
    """Program copy whose addColor predicate keeps only the given rules."""
    out = prog.copy()
    ac = out.predicates["addColor"]
    from diaplan import Predicate
    out.predicates["addColor"] = Predicate(
        ac.name, ac.params, [r for r in ac.rules if r.name in colors],
        ac.otherwise, ac.owner, ac.visibility)
    return out
