"""Dynamic program over subsets of difficult colors: O*(3^nhs) time.

A color is *difficult* when it has indegree at least two in the color
hierarchy.  Distinct child colors of a common color can only share
descendant colors through a difficult color, so it suffices to budget
subsets of difficult colors instead of subsets of all colors.

Two tables are filled per vertex v, walking the graph from the last to
the first vertex of a topological order:

* ``B[v, X', i]``: best colorful arborescence rooted at v whose single
  v-arc (if any) goes to a child of the i-th child color of v, with the
  difficult colors used below (ignoring col(v)) inside X'.
* ``A[v, X', i]``: same but v may use children of the first i child
  colors; obtained by splitting X' between ``A[v, X'', i-1]`` and
  ``B[v, X' \\ X'', i]`` over all submasks X''.

The answer is ``A[r, X, deg(r)]``.  Enumerating submasks of every subset
gives the 3^nhs time bound; live tables stay within O*(2^nhs) entries.
"""

from __future__ import annotations

import time

from .errors import GuardExceededError, SolverTimeout
from .instance import Instance, Solution, color_hierarchy, prune_unreachable, topological_order
from .dpcolors import _lift

DIFFICULT_MAX = 24


def difficult_set(hier) -> frozenset[int]:
    """Colors of indegree at least two in the hierarchy."""
    return hier.difficult


def solve_difficult_dp(
    inst: Instance,
    max_difficult: int = DIFFICULT_MAX,
    counters: dict | None = None,
    deadline: float | None = None,
) -> Solution:
    """Exact optimum parameterized by the number of difficult colors.

    Guarded to ``nhs <= max_difficult``.  ``counters`` (optional dict)
    receives ``difficult_visits`` (submask-split loop iterations) and
    ``difficult_peak_entries`` (peak live A+B table entries).
    """
    work = prune_unreachable(inst)
    hier = color_hierarchy(work)
    X = sorted(hier.difficult)
    nhs = len(X)
    if nhs > max_difficult:
        raise GuardExceededError(f"difficult-DP guard: nhs={nhs} exceeds {max_difficult}")

    xbit = {c: 1 << i for i, c in enumerate(X)}
    nmasks = 1 << nhs
    child_order = hier.child_order
    order = topological_order(work)

    # A[v][mask] = list over i of values; stored for every processed vertex
    A: dict[int, list[list[float]]] = {}
    Aback: dict[int, list[list[tuple | None]]] = {}

    # group out-neighbors of v by child color for the B computation
    def groups(v: int) -> list[list[tuple[int, float]]]:
        per: dict[int, list[tuple[int, float]]] = {c: [] for c in child_order[v]}
        for u, w in work.out[v]:
            per[work.colors[u]].append((u, w))
        return [per[c] for c in child_order[v]]

    visits = 0
    peak_entries = 0
    live_entries = 0

    for v in reversed(order):
        if deadline is not None and time.monotonic() > deadline:
            raise SolverTimeout("difficult-DP exceeded its deadline")
        deg = len(child_order[v])
        grp = groups(v)

        # B[mask][i] for i in 1..deg (index i-1); transient for this vertex
        B: list[list[float]] = [[0.0] * deg for _ in range(nmasks)]
        Bback: list[list[int | None]] = [[None] * deg for _ in range(nmasks)]
        for i in range(1, deg + 1):
            ci = child_order[v][i - 1]
            ci_bit = xbit.get(ci)
            for mask in range(nmasks):
                if ci_bit is None:
                    pass  # not difficult: full budget passes through
                elif mask & ci_bit:
                    pass  # difficult and allowed by the budget
                else:
                    # difficult but outside the budget: subtree must stay empty
                    continue
                sub_mask = mask if ci_bit is None else mask ^ ci_bit
                best = 0.0
                arg: int | None = None
                for u, w in grp[i - 1]:
                    cand = w + A[u][sub_mask][len(child_order[u])]
                    if cand > best:
                        best, arg = cand, u
                B[mask][i - 1] = best
                Bback[mask][i - 1] = arg

        Av: list[list[float]] = [[0.0] * (deg + 1) for _ in range(nmasks)]
        Avb: list[list[tuple | None]] = [[None] * (deg + 1) for _ in range(nmasks)]
        for i in range(1, deg + 1):
            for mask in range(nmasks):
                best = None
                arg = None
                sub = mask  # X'' walks over every submask of X', including X' and 0
                while True:
                    visits += 1
                    cand = Av[sub][i - 1] + B[mask ^ sub][i - 1]
                    if best is None or cand > best:
                        best, arg = cand, (sub, Bback[mask ^ sub][i - 1])
                    if sub == 0:
                        break
                    sub = (sub - 1) & mask
                Av[mask][i] = best
                Avb[mask][i] = arg
        A[v] = Av
        Aback[v] = Avb
        live_entries += nmasks * (deg + 1)
        peak_entries = max(peak_entries, live_entries + nmasks * max(deg, 1))

    if counters is not None:
        counters["difficult_visits"] = visits
        counters["difficult_peak_entries"] = peak_entries
        counters["difficult_nhs"] = nhs
        counters["difficult_max_i"] = max((len(c) for c in child_order), default=0)

    # traceback from A[r, X, deg(r)]
    arcs: set[tuple[int, int]] = set()
    verts = {work.root}

    def walk(v: int, mask: int, i: int) -> None:
        while i > 0:
            split = Aback[v][mask][i]
            assert split is not None
            sub, u = split
            bmask = mask ^ sub
            if u is not None:
                arcs.add((v, u))
                verts.add(u)
                cu = work.colors[u]
                umask = bmask ^ xbit[cu] if cu in xbit else bmask
                walk(u, umask, len(child_order[u]))
            mask, i = sub, i - 1

    full = nmasks - 1
    walk(work.root, full, len(child_order[work.root]))
    weight = A[work.root][full][len(child_order[work.root])]
    return _lift(inst, work, arcs, verts, weight)
