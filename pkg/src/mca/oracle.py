"""Brute-force exact solver used as ground truth for every other solver.

The oracle enumerates vertex subsets, not arc subsets: on a DAG, once a
subset S containing the root is fixed, the best arborescence spanning S
is obtained by independently giving every non-root vertex its heaviest
incoming arc from inside S.  Choosing one in-arc per vertex cannot create
a cycle in a DAG, and every parent chain terminates at the root, so the
per-vertex argmax is globally optimal for S.  This yields an
O(2^n * m) procedure that is deliberately naive and easy to trust.
"""

from __future__ import annotations

from .errors import GuardExceededError, McaError
from .instance import Instance, Solution, reachable_from_root

ORACLE_MAX_N = 22


def best_arborescence_on_set(inst: Instance, subset) -> float | None:
    """Best arborescence weight spanning exactly ``subset``, or None.

    ``subset`` must contain the root.  Returns None (infeasible) when
    some non-root member has no in-neighbor inside the subset.
    """
    S = frozenset(subset)
    if inst.root not in S:
        raise McaError("subset must contain the root")
    total = 0.0
    for v in S:
        if v == inst.root:
            continue
        best = None
        for u, w in inst.inn[v]:
            if u in S and (best is None or w > best):
                best = w
        if best is None:
            return None
        total += best
    return total


def brute_force_solve(inst: Instance, max_n: int = ORACLE_MAX_N) -> Solution:
    """Exact optimum by enumerating every colorful vertex subset containing r.

    Guarded to ``n <= max_n``.  The result weight is always >= 0 because
    the single-vertex solution {r} is feasible.
    """
    if inst.n > max_n:
        raise GuardExceededError(f"oracle guard: n={inst.n} exceeds {max_n}")

    # only vertices reachable from r can belong to a feasible subset
    reach = sorted(reachable_from_root(inst) - {inst.root})
    root = inst.root
    colors = inst.colors
    inn = inst.inn
    root_color_bit = 1 << colors[root]

    best_weight = 0.0
    best_members: tuple[int, ...] = ()

    k = len(reach)
    for mask in range(1 << k):
        members = [reach[i] for i in range(k) if mask >> i & 1]
        color_mask = root_color_bit
        colorful = True
        for v in members:
            bit = 1 << colors[v]
            if color_mask & bit:
                colorful = False
                break
            color_mask |= bit
        if not colorful:
            continue
        sset = set(members)
        sset.add(root)
        total = 0.0
        feasible = True
        for v in members:
            best = None
            for u, w in inn[v]:
                if u in sset and (best is None or w > best):
                    best = w
            if best is None:
                feasible = False
                break
            total += best
        if feasible and total > best_weight:
            best_weight = total
            best_members = tuple(members)

    arcs = set()
    sset = set(best_members) | {root}
    for v in best_members:
        best_u, best_w = None, None
        for u, w in inn[v]:
            if u in sset and (best_w is None or w > best_w):
                best_u, best_w = u, w
        arcs.add((best_u, v))
    return Solution(arcs=frozenset(arcs), vertices=frozenset(sset), weight=best_weight)
