"""Reference dynamic program over color subsets, O*(3^|C|) time.

This is the classical baseline: W[v, S] is the best weight of a colorful
arborescence rooted at v whose colors all lie in S (with col(v) in S).
A tree either extends by a single arc into the remaining color budget or
splits at v into two child forests over disjoint budgets; enumerating
submasks of every S gives the 3^|C| bound.
"""

from __future__ import annotations

import time

from .errors import GuardExceededError, SolverTimeout
from .instance import Instance, Solution, prune_unreachable, reachable_from_root, topological_order

COLORS_MAX = 20


def _masks_of_popcount(size: int, k: int):
    """All k-bit masks with ``size`` set bits, ascending (Gosper's hack)."""
    if size == 0:
        yield 0
        return
    mask = (1 << size) - 1
    limit = 1 << k
    while mask < limit:
        yield mask
        lo = mask & -mask
        ripple = mask + lo
        mask = ripple | (((mask ^ ripple) >> 2) // lo)


def solve_colors_dp(
    inst: Instance,
    max_colors: int = COLORS_MAX,
    counters: dict | None = None,
    deadline: float | None = None,
) -> Solution:
    """Exact optimum by subset DP over colors; guarded to |C| <= max_colors.

    ``deadline`` (a ``time.monotonic()`` timestamp) makes the fill abort
    with :class:`SolverTimeout`; the bench harness and the scaling tests
    rely on that.  Tables are filled by increasing subset popcount so
    both recurrence cases read only completed entries.  Result >= 0.
    """
    work = prune_unreachable(inst)
    used = work.used_colors
    k = len(used)
    if k > max_colors:
        raise GuardExceededError(f"colors-DP guard: |C|={k} exceeds {max_colors}")

    bit = {c: i for i, c in enumerate(used)}
    cbit = [1 << bit[c] for c in work.colors]
    order = topological_order(work)
    full = (1 << k) - 1

    # per-vertex mask -> (value, traceback); storage grows with the fill so
    # a deadline abort on a large instance cannot exhaust memory first
    W: list[dict[int, float]] = [dict() for _ in range(work.n)]
    back: list[dict[int, tuple | None]] = [dict() for _ in range(work.n)]

    inner = 0
    rev = tuple(reversed(order))
    for size in range(1, k + 1):
        for mask in _masks_of_popcount(size, k):
            if deadline is not None and time.monotonic() > deadline:
                raise SolverTimeout("colors-DP exceeded its deadline")
            for v in rev:
                cb = cbit[v]
                if not mask & cb:
                    continue
                best = 0.0
                arg: tuple | None = None
                rest = mask ^ cb
                Wu = W
                for u, w in work.out[v]:
                    inner += 1
                    if rest & cbit[u]:
                        cand = w + Wu[u][rest]
                        if cand > best:
                            best, arg = cand, ("arc", u)
                Wv = W[v]
                sub = (rest - 1) & rest
                while sub > 0:
                    inner += 1
                    cand = Wv[sub | cb] + Wv[(rest ^ sub) | cb]
                    if cand > best:
                        best, arg = cand, ("split", sub | cb, (rest ^ sub) | cb)
                    sub = (sub - 1) & rest
                Wv[mask] = best
                back[v][mask] = arg

    if counters is not None:
        counters["colors_inner"] = inner
        counters["colors_table_entries"] = sum(len(d) for d in W)

    arcs: set[tuple[int, int]] = set()
    verts = {work.root}
    stack: list[tuple[int, int]] = [(work.root, full)]
    while stack:
        v, mask = stack.pop()
        arg = back[v][mask]
        if arg is None:
            continue
        if arg[0] == "arc":
            u = arg[1]
            arcs.add((v, u))
            verts.add(u)
            stack.append((u, mask ^ cbit[v]))
        else:
            stack.append((v, arg[1]))
            stack.append((v, arg[2]))

    weight = W[work.root][full]
    return _lift(inst, work, arcs, verts, weight)


def _lift(inst: Instance, work: Instance, arcs, verts, weight) -> Solution:
    """Map a solution on the internally pruned instance back to the input ids."""
    if work is inst:
        return Solution(frozenset(arcs), frozenset(verts), weight)
    old_ids = sorted(reachable_from_root(inst))
    return Solution(
        arcs=frozenset((old_ids[u], old_ids[v]) for u, v in arcs),
        vertices=frozenset(old_ids[v] for v in verts),
        weight=weight,
    )
