"""Tree-decomposition dynamic programming over fully-colorful subgraphs.

A subgraph picking exactly one vertex per color is structurally its own
color hierarchy, so a nice tree decomposition of the undirected
hierarchy doubles as one of the subgraph.  For each of the at most
2^(n - |C|) fully-colorful selections, a DP over bag tripartitions
(L1 = roots, L2 = members with their parent already charged,
L3 = excluded) computes the best partial solution per nice-decomposition
node; the overall optimum is the best root entry over all selections.

Two tables are kept per node: T (forgotten vertices may participate) and
D (bag vertices only).  D is filled like T except at forgets, where the
forgotten vertex is forced out.  At a join the two children's D tables
coincide, which is asserted at runtime.  The T join enumerates which
side parents each L2 vertex, so no arc is ever charged twice:
``T_i[L1, L2, L3] = max over P of T_j[L1 u (L2 \\ P), P, L3]
+ T_k[L1 u P, L2 \\ P, L3]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import GuardExceededError, InvalidInstanceError, McaError
from .instance import (
    ColorHierarchy,
    Instance,
    Solution,
    color_hierarchy,
    prune_unreachable,
)
from .dpcolors import _lift

NEG_INF = float("-inf")
LC_MAX = 16
WIDTH_MAX = 10
D_TOL = 1e-9


# ---------------------------------------------------------------------------
# tree decompositions


@dataclass
class TreeDecomposition:
    bags: list[frozenset[int]]
    edges: list[tuple[int, int]]

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


def hierarchy_undirected(hier: ColorHierarchy) -> dict[int, set[int]]:
    """U(H): undirected adjacency over the used colors."""
    adj: dict[int, set[int]] = {c: set() for c in sorted(hier.used)}
    for c, d in hier.arcs:
        adj[c].add(d)
        adj[d].add(c)
    return adj


def _elimination_width(adj: dict[int, set[int]], order: list[int]) -> int:
    g = {v: set(ns) for v, ns in adj.items()}
    width = 0
    for v in order:
        nbrs = g[v]
        width = max(width, len(nbrs))
        for a in nbrs:
            g[a].update(nbrs - {a})
            g[a].discard(v)
        del g[v]
    return width


def _min_fill_order(adj: dict[int, set[int]]) -> list[int]:
    g = {v: set(ns) for v, ns in adj.items()}
    order = []
    while g:
        best_v, best_key = None, None
        for v in sorted(g):
            nbrs = sorted(g[v])
            fill = 0
            for i, a in enumerate(nbrs):
                for b in nbrs[i + 1 :]:
                    if b not in g[a]:
                        fill += 1
            key = (fill, len(nbrs), v)
            if best_key is None or key < best_key:
                best_v, best_key = v, key
        order.append(best_v)
        nbrs = g[best_v]
        for a in nbrs:
            g[a].update(nbrs - {a})
            g[a].discard(best_v)
        del g[best_v]
    return order


def _td_from_order(adj: dict[int, set[int]], order: list[int]) -> TreeDecomposition:
    """Standard elimination-order construction; one bag per vertex."""
    g = {v: set(ns) for v, ns in adj.items()}
    position = {v: i for i, v in enumerate(order)}
    bags: list[frozenset[int]] = []
    edges: list[tuple[int, int]] = []
    bag_of: dict[int, int] = {}
    for v in order:
        nbrs = g[v]
        bags.append(frozenset({v} | nbrs))
        bag_of[v] = len(bags) - 1
        for a in nbrs:
            g[a].update(nbrs - {a})
            g[a].discard(v)
        del g[v]
    for v in order:
        later = [u for u in bags[bag_of[v]] if u != v and position[u] > position[v]]
        if later:
            parent = min(later, key=lambda u: position[u])
            edges.append((bag_of[v], bag_of[parent]))
    # link components through their last-eliminated bags
    roots = _component_roots(len(bags), edges)
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    return TreeDecomposition(bags=bags, edges=edges)


def _component_roots(nbags: int, edges: list[tuple[int, int]]) -> list[int]:
    parent = list(range(nbags))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return sorted({find(i) for i in range(nbags)})


def validate_tree_decomposition(td: TreeDecomposition, adj: dict[int, set[int]]) -> None:
    """Check coverage, edge containment and connectivity; raise on failure."""
    nodes = set(adj)
    if set().union(*td.bags) != nodes:
        raise McaError("tree decomposition does not cover every vertex")
    for u in adj:
        for v in adj[u]:
            if not any(u in b and v in b for b in td.bags):
                raise McaError(f"edge ({u},{v}) is in no bag")
    nbr: list[set[int]] = [set() for _ in td.bags]
    for a, b in td.edges:
        nbr[a].add(b)
        nbr[b].add(a)
    if len(td.edges) != len(td.bags) - 1:
        raise McaError("decomposition tree is not a tree")
    for v in nodes:
        holding = [i for i, b in enumerate(td.bags) if v in b]
        seen = {holding[0]}
        stack = [holding[0]]
        while stack:
            i = stack.pop()
            for j in nbr[i]:
                if j not in seen and v in td.bags[j]:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != len(holding):
            raise McaError(f"bags containing {v} are not connected")


def decompose(adj: dict[int, set[int]], exact: bool = False) -> TreeDecomposition:
    """Tree decomposition via a min-fill elimination ordering.

    With ``exact=True`` (tiny graphs only, <= 9 vertices) every
    elimination order is tried and a minimum-width one is used;
    elimination orders realize the true treewidth.
    """
    if not adj:
        raise McaError("cannot decompose an empty graph")
    if exact:
        if len(adj) > 9:
            raise GuardExceededError("exact decomposition is limited to 9 vertices")
        best_order, best_w = None, None
        for perm in itertools.permutations(sorted(adj)):
            w = _elimination_width(adj, list(perm))
            if best_w is None or w < best_w:
                best_order, best_w = list(perm), w
        order = best_order
    else:
        order = _min_fill_order(adj)
    td = _td_from_order(adj, order)
    validate_tree_decomposition(td, adj)
    return td


# ---------------------------------------------------------------------------
# nice decompositions


@dataclass
class NiceNode:
    kind: str  # "leaf" | "introduce" | "forget" | "join"
    bag: tuple[int, ...]
    color: int | None = None  # introduced / forgotten color
    children: list["NiceNode"] = field(default_factory=list)


@dataclass
class NiceDecomposition:
    root: NiceNode

    def postorder(self) -> list[NiceNode]:
        out: list[NiceNode] = []
        stack: list[tuple[NiceNode, bool]] = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
            else:
                stack.append((node, True))
                for ch in node.children:
                    stack.append((ch, False))
        return out

    @property
    def width(self) -> int:
        return max(len(n.bag) for n in self.postorder()) - 1


def _leaf_chain(bag: frozenset[int]) -> NiceNode:
    elems = sorted(bag)
    node = NiceNode("leaf", (elems[0],))
    for e in elems[1:]:
        node = NiceNode("introduce", tuple(sorted(set(node.bag) | {e})), e, [node])
    return node


def _bridge(node: NiceNode, target: frozenset[int]) -> NiceNode:
    """Forget/introduce chain lifting ``node`` to the bag ``target``."""
    have = set(node.bag)
    for e in sorted(have - target):
        have.discard(e)
        node = NiceNode("forget", tuple(sorted(have)), e, [node])
    for e in sorted(target - have):
        have.add(e)
        node = NiceNode("introduce", tuple(sorted(have)), e, [node])
    return node


def make_nice(td: TreeDecomposition, root_color: int) -> NiceDecomposition:
    """Normalize to leaf/introduce/forget/join form, rooted at {root_color}."""
    root_ix = next(i for i, b in enumerate(td.bags) if root_color in b)
    nbr: list[set[int]] = [set() for _ in td.bags]
    for a, b in td.edges:
        nbr[a].add(b)
        nbr[b].add(a)

    def build(ix: int, parent: int) -> NiceNode:
        kids = [
            _bridge(build(ch, ix), td.bags[ix]) for ch in sorted(nbr[ix]) if ch != parent
        ]
        if not kids:
            return _leaf_chain(td.bags[ix])
        node = kids[0]
        for other in kids[1:]:
            node = NiceNode("join", tuple(sorted(td.bags[ix])), None, [node, other])
        return node

    top = build(root_ix, -1)
    top = _bridge(top, frozenset({root_color}))
    nd = NiceDecomposition(root=top)
    validate_nice(nd)
    return nd


def validate_nice(nd: NiceDecomposition) -> None:
    for node in nd.postorder():
        bag = set(node.bag)
        if node.kind == "leaf":
            if node.children or len(bag) != 1:
                raise McaError("leaf nodes must be childless singletons")
        elif node.kind == "join":
            if len(node.children) != 2 or any(
                set(ch.bag) != bag for ch in node.children
            ):
                raise McaError("join nodes need two children with identical bags")
        elif node.kind == "introduce":
            (ch,) = node.children
            if set(ch.bag) | {node.color} != bag or node.color in ch.bag:
                raise McaError("introduce node bag mismatch")
        elif node.kind == "forget":
            (ch,) = node.children
            if bag | {node.color} != set(ch.bag) or node.color in bag:
                raise McaError("forget node bag mismatch")
        else:
            raise McaError(f"unknown node kind {node.kind}")


# ---------------------------------------------------------------------------
# fully-colorful selections


@dataclass(frozen=True)
class ColorfulSelection:
    """One vertex per color, pruned to the part reachable from the root."""

    vertex_of: dict[int, int]  # present colors only
    present: frozenset[int]
    picks: tuple[tuple[int, int], ...]  # the full pre-pruning choice


def enumerate_fully_colorful(inst: Instance):
    """Yield every fully-colorful selection (root fixed for its color).

    The number of selections is the product of the color multiplicities
    over the non-root colors; each selection is restricted to the
    vertices reachable from the root inside the chosen subgraph, so some
    colors may come out absent.
    """
    root_color = inst.colors[inst.root]
    other = [c for c in inst.used_colors if c != root_color]
    pools = [inst.vertices_of_color[c] for c in other]
    for combo in itertools.product(*pools):
        chosen = {root_color: inst.root}
        chosen.update(zip(other, combo))
        vertset = set(chosen.values())
        seen = {inst.root}
        stack = [inst.root]
        while stack:
            u = stack.pop()
            for v, _ in inst.out[u]:
                if v in vertset and v not in seen:
                    seen.add(v)
                    stack.append(v)
        vertex_of = {c: v for c, v in chosen.items() if v in seen}
        yield ColorfulSelection(
            vertex_of=vertex_of,
            present=frozenset(vertex_of),
            picks=tuple(sorted(chosen.items())),
        )


# ---------------------------------------------------------------------------
# the per-selection DP


_POW3 = [3**i for i in range(16)]


def _digits(code: int, b: int) -> tuple[int, ...]:
    out = []
    for _ in range(b):
        out.append(code % 3)
        code //= 3
    return tuple(out)


def solve_selection(
    sel: ColorfulSelection,
    nd: NiceDecomposition,
    inst: Instance,
    counters: dict | None = None,
    want_arcs: bool = True,
) -> tuple[float, frozenset[tuple[int, int]]]:
    """Evaluate one fully-colorful selection over the nice decomposition.

    Returns the best solution weight (>= 0) and its arc set.  Raises if
    a root-bag mismatch indicates the decomposition does not belong to
    this instance.
    """
    vertex_of = sel.vertex_of
    arc_w = inst.arc_weight

    def wcc(ca: int, cb: int) -> float:
        ua, ub = vertex_of.get(ca), vertex_of.get(cb)
        if ua is None or ub is None:
            return NEG_INF
        return arc_w.get((ua, ub), NEG_INF)

    nodes = nd.postorder()
    T: dict[int, list[float]] = {}
    D: dict[int, list[float]] = {}
    back: dict[int, list[tuple | None]] = {}

    max_tri = 0
    max_terms = 0
    join_checks = 0
    join_mismatch = 0

    for ni, node in enumerate(nodes):
        node._ix = ni  # type: ignore[attr-defined]
        bag = node.bag
        b = len(bag)
        ncodes = _POW3[b]
        max_tri = max(max_tri, ncodes)
        t = [NEG_INF] * ncodes
        d = [NEG_INF] * ncodes
        bk: list[tuple | None] = [None] * ncodes

        if node.kind == "leaf":
            c = bag[0]
            ok = c in vertex_of
            t[0] = 0.0 if ok else NEG_INF  # L1: a root, present colors only
            t[1] = NEG_INF  # L2: no parent candidate in a singleton bag
            t[2] = 0.0  # L3: excluded
            d[0], d[1], d[2] = t[0], t[1], t[2]

        elif node.kind == "introduce":
            ch = node.children[0]
            ct, cd = T[ch._ix], D[ch._ix]  # type: ignore[attr-defined]
            p = bag.index(node.color)
            vstar = node.color
            present = vstar in vertex_of
            w_to = [wcc(vstar, bag[q]) for q in range(b)]
            w_from = [wcc(bag[q], vstar) for q in range(b)]
            # child code of "digits with position p deleted", per parent code
            below = _POW3[p]
            terms = 0
            for code in range(ncodes):
                dv = code // below % 3
                low = code % below
                high = code // (below * 3)
                base_child = high * below + low  # v* removed, other digits kept
                if dv == 2:
                    t[code] = ct[base_child]
                    d[code] = cd[base_child]
                    bk[code] = ("C", base_child)
                    continue
                if not present:
                    continue  # stays -inf: absent colors cannot join the solution
                digs = _digits(code, b)
                l2pos = [q for q in range(b) if q != p and digs[q] == 1]
                parents = [q for q in range(b) if q != p and digs[q] <= 1]
                bt = bd = NEG_INF
                bbk: tuple | None = None
                nsub = 1 << len(l2pos)
                for smask in range(nsub):
                    terms += 1
                    spos = [l2pos[i] for i in range(len(l2pos)) if smask >> i & 1]
                    wsum = 0.0
                    for q in spos:
                        wsum += w_to[q]
                    if wsum == NEG_INF:
                        continue
                    ccode = base_child
                    for q in spos:
                        # digit 1 -> 0 at a position after deleting p
                        ccode -= _POW3[q if q < p else q - 1]
                    if dv == 0:
                        cand_t = wsum + ct[ccode]
                        cand_d = wsum + cd[ccode]
                        if cand_t > bt:
                            bt, bbk = cand_t, ("A", tuple(spos), ccode)
                        bd = max(bd, cand_d)
                    else:
                        bu, bupos = NEG_INF, None
                        for q in parents:
                            if q in spos:
                                continue
                            wu = w_from[q]
                            if wu > bu:
                                bu, bupos = wu, q
                        if bu == NEG_INF:
                            continue
                        cand_t = bu + wsum + ct[ccode]
                        cand_d = bu + wsum + cd[ccode]
                        if cand_t > bt:
                            bt, bbk = cand_t, ("B", tuple(spos), ccode, bupos)
                        bd = max(bd, cand_d)
                t[code] = bt
                d[code] = bd
                bk[code] = bbk
            max_terms = max(max_terms, terms)

        elif node.kind == "forget":
            ch = node.children[0]
            ct, cd = T[ch._ix], D[ch._ix]  # type: ignore[attr-defined]
            cbag = ch.bag
            pf = cbag.index(node.color)
            below = _POW3[pf]
            for code in range(ncodes):
                low = code % below
                high = code // below
                as_l2 = high * below * 3 + 1 * below + low
                as_l3 = high * below * 3 + 2 * below + low
                if ct[as_l2] >= ct[as_l3]:
                    t[code] = ct[as_l2]
                    bk[code] = ("F", as_l2)
                else:
                    t[code] = ct[as_l3]
                    bk[code] = ("F", as_l3)
                d[code] = cd[as_l3]

        else:  # join
            chj, chk = node.children
            tj, tk = T[chj._ix], T[chk._ix]  # type: ignore[attr-defined]
            dj, dk = D[chj._ix], D[chk._ix]  # type: ignore[attr-defined]
            terms = 0
            for code in range(ncodes):
                digs = _digits(code, b)
                l2pos = [q for q in range(b) if digs[q] == 1]
                bt = NEG_INF
                bbk: tuple | None = None
                nsub = 1 << len(l2pos)
                for pmask in range(nsub):
                    terms += 1
                    jcode = code
                    kcode = code
                    for i, q in enumerate(l2pos):
                        if pmask >> i & 1:
                            kcode -= _POW3[q]  # parented on side j, root on side k
                        else:
                            jcode -= _POW3[q]
                    cand = tj[jcode] + tk[kcode]
                    if cand > bt:
                        bt, bbk = cand, ("J", jcode, kcode)
                t[code] = bt
                bk[code] = bbk
                join_checks += 1
                if not (dj[code] == dk[code] or abs(dj[code] - dk[code]) <= D_TOL):
                    join_mismatch += 1
                d[code] = dj[code]
            max_terms = max(max_terms, terms)

        # D never exceeds T
        for code in range(ncodes):
            if d[code] > t[code] + D_TOL:
                raise McaError("internal: D exceeded T at a node")
        T[ni], D[ni], back[ni] = t, d, bk

    root = nodes[-1]
    if len(root.bag) != 1:
        raise McaError("nice decomposition root bag is not a singleton")
    answer = T[root._ix][0]  # type: ignore[attr-defined]

    if counters is not None:
        counters["tw_max_tripartitions_per_bag"] = max(
            counters.get("tw_max_tripartitions_per_bag", 0), max_tri
        )
        counters["tw_max_terms_per_bag"] = max(
            counters.get("tw_max_terms_per_bag", 0), max_terms
        )
        counters["tw_join_checks"] = counters.get("tw_join_checks", 0) + join_checks
        counters["tw_join_mismatches"] = counters.get("tw_join_mismatches", 0) + join_mismatch

    if join_mismatch:
        raise McaError("join-node consistency violated: D_j != D_k")

    arcs: set[tuple[int, int]] = set()
    if want_arcs and answer > NEG_INF:
        stack: list[tuple[NiceNode, int]] = [(root, 0)]
        while stack:
            node, code = stack.pop()
            move = back[node._ix][code]  # type: ignore[attr-defined]
            if node.kind == "leaf" or move is None:
                continue
            if node.kind == "introduce":
                if move[0] == "C":
                    stack.append((node.children[0], move[1]))
                else:
                    spos, ccode = move[1], move[2]
                    for q in spos:
                        arcs.add((vertex_of[node.color], vertex_of[node.bag[q]]))
                    if move[0] == "B":
                        arcs.add((vertex_of[node.bag[move[3]]], vertex_of[node.color]))
                    stack.append((node.children[0], ccode))
            elif node.kind == "forget":
                stack.append((node.children[0], move[1]))
            else:
                stack.append((node.children[0], move[1]))
                stack.append((node.children[1], move[2]))
    return answer, frozenset(arcs)


# ---------------------------------------------------------------------------
# the solver


def solve_treewidth(
    inst: Instance,
    max_lc: int = LC_MAX,
    max_width: int = WIDTH_MAX,
    exact_width: bool = False,
    counters: dict | None = None,
) -> Solution:
    """Exact optimum in O*(2^lc * 4^width): best selection DP value."""
    work = prune_unreachable(inst)
    hier = color_hierarchy(work)
    lc = work.n - len(work.used_colors)
    if lc > max_lc:
        raise GuardExceededError(f"treewidth guard: lc={lc} exceeds {max_lc}")
    td = decompose(hierarchy_undirected(hier), exact=exact_width)
    if td.width > max_width:
        raise GuardExceededError(f"treewidth guard: width={td.width} exceeds {max_width}")
    nd = make_nice(td, work.colors[work.root])

    best_w = 0.0
    best_arcs: frozenset[tuple[int, int]] = frozenset()
    count = 0
    for sel in enumerate_fully_colorful(work):
        count += 1
        w, arcs = solve_selection(sel, nd, work, counters=counters)
        if w > best_w:
            best_w, best_arcs = w, arcs
    if counters is not None:
        counters["tw_selections"] = count
        counters["tw_width"] = td.width
        counters["tw_lc"] = lc

    verts = {work.root}
    for u, v in best_arcs:
        verts.add(u)
        verts.add(v)
    return _lift(inst, work, best_arcs, verts, best_w)
