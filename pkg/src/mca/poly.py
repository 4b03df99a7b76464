"""Polynomial-time solving for arborescence-shaped color hierarchies.

When every color below a root color has exactly one in-neighbor in the
hierarchy, the color subtrees hanging off distinct child colors are
disjoint, so colorfulness is automatic and a bottom-up sum of per-color
best branches solves the problem exactly.  The autonomous-color detector
here is the applicability test of the first kernelization rule.
"""

from __future__ import annotations

from .errors import InvalidInstanceError
from .instance import ColorHierarchy, Instance, Solution, topological_order


def is_arb_hierarchy(hier: ColorHierarchy) -> tuple[bool, int | None]:
    """True iff exactly one used color has indegree 0 and the rest indegree 1.

    Returns the root color when true.  Only used colors count: pruned
    instances may carry color ids with no remaining vertices.
    """
    root = None
    for c in sorted(hier.used):
        deg = len([p for p in hier.inn[c] if p in hier.used])
        if deg == 0:
            if root is not None:
                return False, None
            root = c
        elif deg != 1:
            return False, None
    if root is None:
        return False, None
    return True, root


def _subtree_indegree_one(hier: ColorHierarchy, c: int) -> bool:
    """Every color of H+(c) except c has exactly one in-neighbor in all of H.

    This is the conjunction of "H+(c) is an arborescence" (one in-neighbor
    inside the subgraph) and "no arc enters H+(c) \\ {c} from outside":
    members are reachable from c, so their single in-neighbor lies inside.
    """
    for cc in hier.reachable_from(c):
        if cc != c and len(hier.inn[cc]) != 1:
            return False
    return True


def autonomous_colors(inst: Instance, hier: ColorHierarchy) -> set[int]:
    """Colors whose reachable hierarchy is an arborescence with no side entry.

    Arcs into the color itself are permitted; that is what makes the
    reweighting step of the first reduction rule applicable at all.
    """
    return {c for c in sorted(hier.used) if _subtree_indegree_one(hier, c)}


def solve_arb_hierarchy(
    inst: Instance,
    sub_root: int,
    hier: ColorHierarchy | None = None,
    counters: dict | None = None,
) -> Solution:
    """Best colorful arborescence rooted at ``sub_root``, in O(n * m) time.

    Requires the hierarchy below ``col(sub_root)`` to be arborescent and
    free of side entries (see :func:`autonomous_colors`); raises
    :class:`InvalidInstanceError` otherwise.  Bottom-up over a topological
    order, each vertex sums the best nonnegative branch per child color.
    """
    from .instance import color_hierarchy

    if hier is None:
        hier = color_hierarchy(inst)
    c0 = inst.colors[sub_root]
    if not _subtree_indegree_one(hier, c0):
        raise InvalidInstanceError(f"hierarchy not arborescent below color {c0}")

    reach = {sub_root}
    stack = [sub_root]
    while stack:
        u = stack.pop()
        for v, _ in inst.out[u]:
            if v not in reach:
                reach.add(v)
                stack.append(v)

    best: dict[int, float] = {}
    chosen: dict[int, list[int]] = {}
    ops = 0
    for u in reversed(topological_order(inst)):
        if u not in reach:
            continue
        per_color: dict[int, tuple[float, int]] = {}
        for x, w in inst.out[u]:
            ops += 1
            cand = w + best[x]
            cx = inst.colors[x]
            if cx not in per_color or cand > per_color[cx][0]:
                per_color[cx] = (cand, x)
        total = 0.0
        picks = []
        for cx in sorted(per_color):
            val, x = per_color[cx]
            if val > 0:
                total += val
                picks.append(x)
        best[u] = total
        chosen[u] = picks
    if counters is not None:
        counters["arbhier_ops"] = counters.get("arbhier_ops", 0) + ops

    arcs = set()
    verts = {sub_root}
    stack = [sub_root]
    while stack:
        u = stack.pop()
        for x in chosen[u]:
            arcs.add((u, x))
            verts.add(x)
            stack.append(x)
    return Solution(arcs=frozenset(arcs), vertices=frozenset(verts), weight=best[sub_root])
