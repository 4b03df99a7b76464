"""Data model for rooted vertex-colored arc-weighted DAG instances.

An instance of the Maximum Colorful Arborescence (MCA) problem is a DAG
``G = (V, A)`` rooted in a vertex ``r``, with a coloring ``col : V -> C``
such that the induced color hierarchy graph ``H(G)`` is itself a DAG, and
a finite real weight on every arc.  ``H(G)`` has the colors as vertices
and an arc ``(c, c')`` whenever ``G`` has an arc from a vertex of color
``c`` to a vertex of color ``c'``.

This module owns parsing, validation, normalization (pruning to the part
reachable from the root), solution verification and instance statistics.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

from .errors import InvalidInstanceError, ParseError, SolutionError

#: absolute tolerance used whenever two solver weights are compared
WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Instance:
    """Immutable MCA instance over dense 0-based vertex and color ids.

    ``colors[v]`` is the color of vertex ``v``.  ``pruned`` marks working
    instances produced by reductions, where some color ids may have lost
    all of their vertices (fresh parsed instances use every color).
    """

    n: int
    colors: tuple[int, ...]
    arcs: tuple[tuple[int, int, float], ...]
    root: int
    color_count: int
    pruned: bool = False

    @property
    def m(self) -> int:
        return len(self.arcs)

    @cached_property
    def out(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """out[v] = tuple of (head, weight) pairs, in arc file order."""
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.arcs:
            adj[u].append((v, w))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def inn(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """inn[v] = tuple of (tail, weight) pairs, in arc file order."""
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.arcs:
            adj[v].append((u, w))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def arc_weight(self) -> dict[tuple[int, int], float]:
        return {(u, v): w for u, v, w in self.arcs}

    @cached_property
    def vertices_of_color(self) -> tuple[tuple[int, ...], ...]:
        byc: list[list[int]] = [[] for _ in range(self.color_count)]
        for v, c in enumerate(self.colors):
            byc[c].append(v)
        return tuple(tuple(g) for g in byc)

    @cached_property
    def used_colors(self) -> tuple[int, ...]:
        return tuple(c for c in range(self.color_count) if self.vertices_of_color[c])


@dataclass(frozen=True)
class ColorHierarchy:
    """The color hierarchy graph H(G) plus derived structure.

    ``difficult`` is the set of colors with indegree at least two.
    ``child_order[v]`` is the fixed ordering of the distinct colors of
    vertex ``v``'s out-neighbors (ascending color id, so runs are
    reproducible).
    """

    color_count: int
    arcs: frozenset[tuple[int, int]]
    difficult: frozenset[int]
    child_order: tuple[tuple[int, ...], ...]
    used: frozenset[int]

    @cached_property
    def out(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {c: [] for c in range(self.color_count)}
        for c, d in sorted(self.arcs):
            adj[c].append(d)
        return {c: tuple(v) for c, v in adj.items()}

    @cached_property
    def inn(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {c: [] for c in range(self.color_count)}
        for c, d in sorted(self.arcs):
            adj[d].append(c)
        return {c: tuple(v) for c, v in adj.items()}

    def reachable_from(self, c: int) -> frozenset[int]:
        """Color set of H+(c): colors reachable from c, including c."""
        seen = {c}
        stack = [c]
        while stack:
            x = stack.pop()
            for y in self.out[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return frozenset(seen)


@dataclass(frozen=True)
class Solution:
    """A colorful arborescence rooted at the instance root."""

    arcs: frozenset[tuple[int, int]]
    vertices: frozenset[int]
    weight: float

    def to_json_dict(self) -> dict:
        return {
            "weight": self.weight,
            "arcs": sorted(list(a) for a in self.arcs),
            "vertices": sorted(self.vertices),
        }


@dataclass(frozen=True)
class Stats:
    """Structural parameters of an instance.

    ``nhs`` counts difficult colors (indegree >= 2 in the hierarchy),
    ``lc`` is the excess of vertices over used colors, ``ht_upper`` a
    heuristic upper bound on the treewidth of the undirected hierarchy.
    """

    n: int
    m: int
    color_count: int
    nhs: int
    lc: int
    ht_upper: int
    fully_colorful_count: int
    is_arb_hierarchy: bool
    max_child_colors: int

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "colors": self.color_count,
            "nhs": self.nhs,
            "lc": self.lc,
            "ht_upper": self.ht_upper,
            "fully_colorful_count": self.fully_colorful_count,
            "is_arb_hierarchy": self.is_arb_hierarchy,
            "max_child_colors": self.max_child_colors,
        }


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    def add(self, msg: str) -> None:
        self.problems.append(msg)

    @property
    def ok(self) -> bool:
        return not self.problems


# ---------------------------------------------------------------------------
# parsing and serialization


def parse_instance(text: str) -> Instance:
    """Parse the ``mca 1`` text format into an :class:`Instance`.

    Raises :class:`ParseError` with a line number on syntax errors,
    dangling vertex/color ids, duplicate arcs, self-loops and non-finite
    weights.  Acyclicity is *not* checked here; see :func:`validate`.
    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append((lineno, line.split()))
    if not records:
        raise ParseError("empty file")

    it = iter(records)

    lineno, tok = next(it)
    if tok != ["mca", "1"]:
        raise ParseError("expected header 'mca 1'", lineno)

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise ParseError(f"unexpected end of file, expected {what}") from None

    lineno, tok = take("'n <int> m <int> colors <int>'")
    if len(tok) != 6 or tok[0] != "n" or tok[2] != "m" or tok[4] != "colors":
        raise ParseError("expected 'n <int> m <int> colors <int>'", lineno)
    try:
        n, m, color_count = int(tok[1]), int(tok[3]), int(tok[5])
    except ValueError:
        raise ParseError("counts must be integers", lineno) from None
    if n < 1 or m < 0 or color_count < 1:
        raise ParseError("need n >= 1, m >= 0, colors >= 1", lineno)

    lineno, tok = take("'root <vertex-id>'")
    if len(tok) != 2 or tok[0] != "root":
        raise ParseError("expected 'root <vertex-id>'", lineno)
    try:
        root = int(tok[1])
    except ValueError:
        raise ParseError("root id must be an integer", lineno) from None
    if not 0 <= root < n:
        raise ParseError(f"root {root} out of range [0, {n})", lineno)

    colors: list[int | None] = [None] * n
    for _ in range(n):
        lineno, tok = take("a 'v <id> <color-id>' record")
        if len(tok) != 3 or tok[0] != "v":
            raise ParseError("expected 'v <id> <color-id>'", lineno)
        try:
            vid, cid = int(tok[1]), int(tok[2])
        except ValueError:
            raise ParseError("vertex record fields must be integers", lineno) from None
        if not 0 <= vid < n:
            raise ParseError(f"vertex id {vid} out of range [0, {n})", lineno)
        if not 0 <= cid < color_count:
            raise ParseError(f"color id {cid} out of range [0, {color_count})", lineno)
        if colors[vid] is not None:
            raise ParseError(f"duplicate vertex record for id {vid}", lineno)
        colors[vid] = cid

    arcs: list[tuple[int, int, float]] = []
    seen_arcs: set[tuple[int, int]] = set()
    for _ in range(m):
        lineno, tok = take("an 'a <src> <dst> <weight>' record")
        if len(tok) != 4 or tok[0] != "a":
            raise ParseError("expected 'a <src> <dst> <weight>'", lineno)
        try:
            u, v = int(tok[1]), int(tok[2])
            w = float(tok[3])
        except ValueError:
            raise ParseError("arc record must be two ints and a decimal", lineno) from None
        if not 0 <= u < n or not 0 <= v < n:
            raise ParseError(f"arc ({u},{v}) references an unknown vertex", lineno)
        if u == v:
            raise ParseError(f"self-loop ({u},{v}) is forbidden", lineno)
        if (u, v) in seen_arcs:
            raise ParseError(f"duplicate arc ({u},{v})", lineno)
        if not math.isfinite(w):
            raise ParseError(f"non-finite weight on arc ({u},{v})", lineno)
        seen_arcs.add((u, v))
        arcs.append((u, v, w))

    for lineno, tok in it:
        raise ParseError(f"trailing record {tok[0]!r}", lineno)

    return Instance(
        n=n,
        colors=tuple(colors),  # type: ignore[arg-type]
        arcs=tuple(arcs),
        root=root,
        color_count=color_count,
    )


def write_instance(inst: Instance) -> str:
    """Serialize an instance into the text format (round-trips bit-exactly)."""
    lines = ["mca 1", f"n {inst.n} m {inst.m} colors {inst.color_count}", f"root {inst.root}"]
    lines.extend(f"v {v} {c}" for v, c in enumerate(inst.colors))
    lines.extend(f"a {u} {v} {w!r}" for u, v, w in inst.arcs)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structural operations


def _kahn(num: int, out_adj) -> list[int] | None:
    """Kahn's algorithm with ascending-id tie-breaking; None if cyclic."""
    indeg = [0] * num
    for u in range(num):
        for v in out_adj(u):
            indeg[v] += 1
    heap = [u for u in range(num) if indeg[u] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in out_adj(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return order if len(order) == num else None


def topological_order(obj: Instance | ColorHierarchy) -> tuple[int, ...]:
    """Deterministic topological order of an instance or a color hierarchy.

    Every arc goes forward in the returned order; ties are broken by
    ascending id.  Raises :class:`InvalidInstanceError` on a cycle.
    """
    if isinstance(obj, Instance):
        order = _kahn(obj.n, lambda u: [v for v, _ in obj.out[u]])
        what = "G"
    else:
        order = _kahn(obj.color_count, lambda c: obj.out[c])
        what = "H(G)"
    if order is None:
        raise InvalidInstanceError(f"{what} contains a cycle")
    return tuple(order)


def color_hierarchy(inst: Instance) -> ColorHierarchy:
    """Build H(G) with the difficult-color set and per-vertex child orders.

    Raises :class:`InvalidInstanceError` if the hierarchy is cyclic
    (which includes the same-color arc case, a self-loop in H).
    """
    harcs = set()
    for u, v, _ in inst.arcs:
        cu, cv = inst.colors[u], inst.colors[v]
        if cu == cv:
            raise InvalidInstanceError(
                f"arc ({u},{v}) joins two vertices of color {cu}: H(G) has a self-loop"
            )
        harcs.add((cu, cv))

    indeg: dict[int, int] = {}
    for _, d in harcs:
        indeg[d] = indeg.get(d, 0) + 1
    difficult = frozenset(c for c, k in indeg.items() if k >= 2)

    child_order = tuple(
        tuple(sorted({inst.colors[x] for x, _ in inst.out[v]})) for v in range(inst.n)
    )
    hier = ColorHierarchy(
        color_count=inst.color_count,
        arcs=frozenset(harcs),
        difficult=difficult,
        child_order=child_order,
        used=frozenset(inst.used_colors),
    )
    topological_order(hier)  # raises if cyclic
    return hier


def validate(inst: Instance) -> ValidationReport:
    """Check the semantic invariants; every problem becomes a report entry.

    An empty report means the instance is a valid MCA instance: G is a
    DAG, H(G) is a DAG, and (unless the instance is flagged as pruned)
    every color id is used by at least one vertex.
    """
    report = ValidationReport()
    if _kahn(inst.n, lambda u: [v for v, _ in inst.out[u]]) is None:
        report.add("G is cyclic")
    for u, v, w in inst.arcs:
        if not math.isfinite(w):
            report.add(f"arc ({u},{v}) has a non-finite weight")
    try:
        color_hierarchy(inst)
    except InvalidInstanceError:
        report.add("H(G) is cyclic")
    if not inst.pruned:
        unused = [c for c in range(inst.color_count) if not inst.vertices_of_color[c]]
        if unused:
            report.add(f"unused colors: {unused}")
    return report


def reachable_from_root(inst: Instance) -> frozenset[int]:
    seen = {inst.root}
    stack = [inst.root]
    while stack:
        u = stack.pop()
        for v, _ in inst.out[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def prune_unreachable(inst: Instance) -> Instance:
    """Restrict the instance to the vertices reachable from the root.

    Vertex ids are renumbered densely (order preserved); color ids are
    kept as-is, so colors may become unused.  The result is flagged as
    pruned.  The optimum weight is unchanged: solutions are rooted at r.
    """
    keep = reachable_from_root(inst)
    if len(keep) == inst.n and inst.pruned:
        return inst
    old_ids = sorted(keep)
    remap = {old: new for new, old in enumerate(old_ids)}
    return Instance(
        n=len(old_ids),
        colors=tuple(inst.colors[v] for v in old_ids),
        arcs=tuple(
            (remap[u], remap[v], w) for u, v, w in inst.arcs if u in keep and v in keep
        ),
        root=remap[inst.root],
        color_count=inst.color_count,
        pruned=True,
    )


def renumber_colors(inst: Instance) -> Instance:
    """Densify color ids (order preserving); used when writing reduced
    instances to files, where unused color ids would fail validation."""
    used = inst.used_colors
    remap = {c: i for i, c in enumerate(used)}
    return Instance(
        n=inst.n,
        colors=tuple(remap[c] for c in inst.colors),
        arcs=inst.arcs,
        root=inst.root,
        color_count=len(used),
        pruned=inst.pruned,
    )


def verify_solution(inst: Instance, sol: Solution) -> float:
    """Check the output contract and return the recomputed weight.

    Verifies that the arcs are instance arcs among the claimed vertices,
    that they form an arborescence rooted at r, that no color repeats,
    and that the stored weight matches the arc-weight sum.  Each violated
    property raises :class:`SolutionError` with its own diagnostic.
    """
    if inst.root not in sol.vertices:
        raise SolutionError("solution does not contain the root")
    for v in sol.vertices:
        if not 0 <= v < inst.n:
            raise SolutionError(f"vertex {v} is not an instance vertex")
    parents: dict[int, int] = {}
    total = 0.0
    for u, v in sol.arcs:
        if (u, v) not in inst.arc_weight:
            raise SolutionError(f"arc ({u},{v}) is not an instance arc")
        if u not in sol.vertices or v not in sol.vertices:
            raise SolutionError(f"arc ({u},{v}) has an endpoint outside the vertex set")
        if v in parents:
            raise SolutionError(f"not an arborescence: vertex {v} has two incoming arcs")
        parents[v] = u
        total += inst.arc_weight[(u, v)]
    if inst.root in parents:
        raise SolutionError("not an arborescence: the root has an incoming arc")
    for v in sol.vertices:
        if v != inst.root and v not in parents:
            raise SolutionError(f"not an arborescence: vertex {v} is disconnected from the root")
    # parent chains in a DAG cannot cycle, so parent coverage implies reachability
    seen_colors: set[int] = set()
    for v in sol.vertices:
        c = inst.colors[v]
        if c in seen_colors:
            raise SolutionError(f"not colorful: color {c} appears twice")
        seen_colors.add(c)
    if abs(total - sol.weight) > WEIGHT_TOL:
        raise SolutionError(f"stored weight {sol.weight} != recomputed {total}")
    return total


def stats(inst: Instance) -> Stats:
    """Compute the structural parameter summary of a valid instance."""
    from .poly import is_arb_hierarchy
    from .treewidth import decompose, hierarchy_undirected

    hier = color_hierarchy(inst)
    used = inst.used_colors
    nhs = len(hier.difficult)
    lc = inst.n - len(used)
    product = 1
    for c in used:
        product *= len(inst.vertices_of_color[c])
    arb, _ = is_arb_hierarchy(hier)
    td = decompose(hierarchy_undirected(hier))
    max_child = max((len(co) for co in hier.child_order), default=0)
    return Stats(
        n=inst.n,
        m=inst.m,
        color_count=len(used),
        nhs=nhs,
        lc=lc,
        ht_upper=td.width,
        fully_colorful_count=product,
        is_arb_hierarchy=arb,
        max_child_colors=max_child,
    )
