"""Data reduction rules and the exhaustive kernelization driver.

Three weight-preserving rewrites shrink an instance until none applies:

1. *Autonomous color collapse*: if every color reachable from c (other
   than c itself) has exactly one in-neighbor in the hierarchy, the best
   subtree below each c-vertex has a fixed value; credit it on the
   vertex's incoming arcs and drop everything below.  The root's own
   color is excluded: the root has no incoming arc to carry the credit.
2. *Chain contraction*: a color c2 whose unique in-neighbor is c1, whose
   unique out-neighbor is c3, and which is in turn c3's unique
   in-neighbor, can be cut out.  Direct arcs (v1, v3) weighted by the
   best v1->v3 path replace the two-hop routes, and a fresh stub vertex
   of color c3 stands in for "use a c2-vertex but nothing below it".
3. *Unique in-neighbor trim*: a solution leaving at most ``l`` vertices
   out must use at least two of any ``l+2`` unique-colored in-neighbors
   of a vertex, so only the ``l+1`` heaviest such arcs can matter.

Every application is recorded in a replayable log: applying the recorded
edits to the pre-application instance reproduces the output bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import McaError
from .instance import (
    ColorHierarchy,
    Instance,
    color_hierarchy,
    prune_unreachable,
    reachable_from_root,
    topological_order,
)
from .poly import _subtree_indegree_one, solve_arb_hierarchy

NEG_INF = float("-inf")


@dataclass
class ReductionLog:
    entries: list[dict] = field(default_factory=list)

    def add(self, rule, **details) -> None:
        self.entries.append({"rule": rule, "details": details})

    def applications(self) -> int:
        """Rule applications, not counting reachability prunes."""
        return sum(1 for e in self.entries if e["rule"] != "prune")

    def to_json_list(self) -> list[dict]:
        return self.entries


# ---------------------------------------------------------------------------
# longest paths


def max_weight_dists(inst: Instance, src: int) -> list[float]:
    """Maximum path weight from src to every vertex (-inf if unreachable)."""
    dist = [NEG_INF] * inst.n
    dist[src] = 0.0
    for u in topological_order(inst):
        du = dist[u]
        if du == NEG_INF:
            continue
        for v, w in inst.out[u]:
            if du + w > dist[v]:
                dist[v] = du + w
    return dist


def max_weight_path(inst: Instance, v1: int, v3: int) -> float | None:
    """pi(v1, v3): weight of the heaviest directed path, None if unreachable."""
    d = max_weight_dists(inst, v1)[v3]
    return None if d == NEG_INF else d


# ---------------------------------------------------------------------------
# rule 1: autonomous color collapse


def _autonomous_candidates(inst: Instance, hier: ColorHierarchy) -> list[int]:
    out = []
    root_color = inst.colors[inst.root]
    for c in sorted(hier.used):
        if c == root_color:
            continue  # no incoming arc can carry w(T_v) for the root itself
        if hier.out[c] and _subtree_indegree_one(hier, c):
            out.append(c)
    return out


def apply_rule_autonomous(inst: Instance) -> tuple[Instance, dict] | None:
    """Collapse the first applicable autonomous color, or None.

    Requires the instance to be pruned to the root-reachable part.
    """
    hier = color_hierarchy(inst)
    cands = _autonomous_candidates(inst, hier)
    if not cands:
        return None
    c = cands[0]

    vc = list(inst.vertices_of_color[c])
    tv = {v: solve_arb_hierarchy(inst, v, hier).weight for v in vc}
    doomed: set[int] = set()
    for v in vc:
        stack = [v]
        while stack:
            u = stack.pop()
            for x, _ in inst.out[u]:
                if x not in doomed:
                    doomed.add(x)
                    stack.append(x)
    doomed -= set(vc)

    kept = [v for v in range(inst.n) if v not in doomed]
    remap = {old: new for new, old in enumerate(kept)}
    vc_set = set(vc)
    arcs = []
    reweighted = []
    for u, v, w in inst.arcs:
        if u in doomed or v in doomed:
            continue
        if v in vc_set:
            reweighted.append([u, v, tv[v]])
            w = w + tv[v]
        arcs.append((remap[u], remap[v], w))
    new = Instance(
        n=len(kept),
        colors=tuple(inst.colors[v] for v in kept),
        arcs=tuple(arcs),
        root=remap[inst.root],
        color_count=inst.color_count,
        pruned=True,
    )
    entry = {
        "rule": 1,
        "details": {
            "color": c,
            "subtree_weights": {str(v): tv[v] for v in vc},
            "reweighted_arcs": reweighted,
            "removed_vertices": sorted(doomed),
        },
    }
    return new, entry


# ---------------------------------------------------------------------------
# rule 2: chain contraction


def _chain_triples(inst: Instance, hier: ColorHierarchy) -> list[tuple[int, int, int]]:
    triples = []
    for c2 in sorted(hier.used):
        if len(hier.inn[c2]) == 1 and len(hier.out[c2]) == 1:
            c1, c3 = hier.inn[c2][0], hier.out[c2][0]
            if len(hier.inn[c3]) == 1:
                triples.append((c1, c2, c3))
    return triples


def apply_rule_chain(inst: Instance, budget: int) -> tuple[Instance, dict] | None:
    """Contract the first applicable chain triple (c1, c2, c3), or None.

    The stub vertex is skipped when adding it would push the multiplicity
    of c3 beyond ``budget + 1``: a solution leaving at most ``budget``
    vertices out must then already contain a c3-vertex, whose parent is
    the solution's c2-vertex, so the stub could never be chosen anyway.
    """
    hier = color_hierarchy(inst)
    triples = _chain_triples(inst, hier)
    if not triples:
        return None
    c1, c2, c3 = triples[0]

    v1s = list(inst.vertices_of_color[c1])
    v2s = set(inst.vertices_of_color[c2])
    v3s = list(inst.vertices_of_color[c3])

    pi_arcs: list[tuple[int, int, float]] = []
    stub_arcs: list[tuple[int, float]] = []
    for v1 in v1s:
        dist = max_weight_dists(inst, v1)
        for v3 in v3s:
            if dist[v3] != NEG_INF:
                assert (v1, v3) not in inst.arc_weight, "H forbids existing (c1,c3) arcs"
                pi_arcs.append((v1, v3, dist[v3]))
        stub_w = max((w for y, w in inst.out[v1] if y in v2s), default=None)
        if stub_w is not None:
            stub_arcs.append((v1, stub_w))

    add_stub = bool(stub_arcs) and len(v3s) + 1 <= budget + 1

    kept = [v for v in range(inst.n) if v not in v2s]
    remap = {old: new for new, old in enumerate(kept)}
    arcs = [
        (remap[u], remap[v], w) for u, v, w in inst.arcs if u not in v2s and v not in v2s
    ]
    arcs.extend((remap[u], remap[v], w) for u, v, w in pi_arcs)
    colors = [inst.colors[v] for v in kept]
    vstar = None
    if add_stub:
        vstar = len(kept)
        colors.append(c3)
        arcs.extend((remap[u], vstar, w) for u, w in stub_arcs)
    new = Instance(
        n=len(colors),
        colors=tuple(colors),
        arcs=tuple(arcs),
        root=remap[inst.root],
        color_count=inst.color_count,
        pruned=True,
    )
    entry = {
        "rule": 2,
        "details": {
            "triple": [c1, c2, c3],
            "path_arcs": [[u, v, w] for u, v, w in pi_arcs],
            "stub_vertex": vstar,
            "stub_arcs": [[u, w] for u, w in stub_arcs] if add_stub else [],
            "removed_vertices": sorted(v2s),
        },
    }
    return new, entry


# ---------------------------------------------------------------------------
# rule 3: unique in-neighbor trim


def _unique_colors(inst: Instance) -> set[int]:
    return {c for c in inst.used_colors if len(inst.vertices_of_color[c]) == 1}


def apply_rule_unique_inarcs(inst: Instance, budget: int) -> tuple[Instance, dict] | None:
    """Trim excess unique-colored in-arcs of the first overloaded vertex."""
    unique = _unique_colors(inst)
    for v in range(inst.n):
        uarcs = [(w, u) for u, w in inst.inn[v] if inst.colors[u] in unique]
        if len(uarcs) > budget + 1:
            # delete the least-weighted; equal weights drop the larger source id
            uarcs.sort(key=lambda t: (t[0], -t[1]))
            doomed = {(u, v) for w, u in uarcs[: len(uarcs) - budget - 1]}
            arcs = tuple(a for a in inst.arcs if (a[0], a[1]) not in doomed)
            new = Instance(
                n=inst.n,
                colors=inst.colors,
                arcs=arcs,
                root=inst.root,
                color_count=inst.color_count,
                pruned=True,
            )
            entry = {
                "rule": 3,
                "details": {"vertex": v, "deleted_arcs": sorted(doomed)},
            }
            return new, entry
    return None


# ---------------------------------------------------------------------------
# the driver


def _prune_logged(inst: Instance, log: ReductionLog) -> Instance:
    keep = reachable_from_root(inst)
    removed = sorted(set(range(inst.n)) - keep)
    new = prune_unreachable(inst)
    if removed:
        log.add("prune", removed_vertices=removed)
    return new


def kernelize(inst: Instance, budget: int) -> tuple[Instance, ReductionLog]:
    """Apply rules 1-3 to exhaustion, re-pruning after every application.

    All three rules are re-checked after each application, in the fixed
    order 1, 2, 3; each application strictly shrinks (colors, n, m)
    lexicographically, so the loop terminates.
    """
    if budget < 0:
        raise McaError("budget must be >= 0")
    log = ReductionLog()
    work = _prune_logged(inst, log)
    while True:
        applied = apply_rule_autonomous(work)
        if applied is None:
            applied = apply_rule_chain(work, budget)
        if applied is None:
            applied = apply_rule_unique_inarcs(work, budget)
        if applied is None:
            break
        work, entry = applied
        log.entries.append(entry)
        work = _prune_logged(work, log)
    return work, log


def replay_log(inst: Instance, log: ReductionLog) -> Instance:
    """Mechanically re-apply recorded edits; must reproduce the kernel."""
    work = inst
    for e in log.entries:
        rule, d = e["rule"], e["details"]
        if rule == "prune":
            work = _drop_vertices(work, set(d["removed_vertices"]))
        elif rule == 1:
            tv = {int(k): v for k, v in d["subtree_weights"].items()}
            arcs = []
            for u, v, w in work.arcs:
                if v in tv:
                    w = w + tv[v]
                arcs.append((u, v, w))
            work = Instance(work.n, work.colors, tuple(arcs), work.root, work.color_count, True)
            work = _drop_vertices(work, set(d["removed_vertices"]))
        elif rule == 2:
            removed = set(d["removed_vertices"])
            kept = [v for v in range(work.n) if v not in removed]
            remap = {old: new for new, old in enumerate(kept)}
            arcs = [
                (remap[u], remap[v], w)
                for u, v, w in work.arcs
                if u not in removed and v not in removed
            ]
            arcs.extend((remap[u], remap[v], w) for u, v, w in d["path_arcs"])
            colors = [work.colors[v] for v in kept]
            if d["stub_vertex"] is not None:
                vstar = len(kept)
                colors.append(d["triple"][2])
                arcs.extend((remap[u], vstar, w) for u, w in d["stub_arcs"])
            work = Instance(
                len(colors), tuple(colors), tuple(arcs), remap[work.root],
                work.color_count, True,
            )
        elif rule == 3:
            doomed = {(u, v) for u, v in d["deleted_arcs"]}
            arcs = tuple(a for a in work.arcs if (a[0], a[1]) not in doomed)
            work = Instance(work.n, work.colors, arcs, work.root, work.color_count, True)
        else:
            raise McaError(f"unknown log rule {rule!r}")
    return work


def _drop_vertices(inst: Instance, removed: set[int]) -> Instance:
    kept = [v for v in range(inst.n) if v not in removed]
    remap = {old: new for new, old in enumerate(kept)}
    return Instance(
        n=len(kept),
        colors=tuple(inst.colors[v] for v in kept),
        arcs=tuple(
            (remap[u], remap[v], w)
            for u, v, w in inst.arcs
            if u not in removed and v not in removed
        ),
        root=remap[inst.root],
        color_count=inst.color_count,
        pruned=True,
    )


# ---------------------------------------------------------------------------
# structural bound certification


@dataclass
class BoundReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, ok, detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def check_kernel_bounds(inst: Instance, budget: int, size_constant: int = 4) -> BoundReport:
    """Certify the structural guarantees of a kernelized instance.

    Checks that no rule applies, that every color has multiplicity at
    most l+1 and hierarchy indegree at most (l+1)^2 + l, and that the
    vertex count fits in ``size_constant * nhs * (l+1)^2 + l + 1`` (the
    +1 keeps the root of a fully collapsed instance inside the budget).
    """
    rep = BoundReport()
    hier = color_hierarchy(inst)
    irreducible = (
        apply_rule_autonomous(inst) is None
        and apply_rule_chain(inst, budget) is None
        and apply_rule_unique_inarcs(inst, budget) is None
    )
    rep.add("no_rule_applicable", irreducible)

    cap = (budget + 1) ** 2 + budget
    bad = {c: len(hier.inn[c]) for c in hier.used if len(hier.inn[c]) > cap}
    rep.add("color_indegree", not bad, f"cap {cap}, offenders {bad}" if bad else "")

    fat = {
        c: len(inst.vertices_of_color[c])
        for c in inst.used_colors
        if len(inst.vertices_of_color[c]) > budget + 1
    }
    rep.add("color_multiplicity", not fat, f"cap {budget + 1}, offenders {fat}" if fat else "")

    nhs = len(hier.difficult)
    size_cap = size_constant * nhs * (budget + 1) ** 2 + budget + 1
    rep.add("vertex_count", inst.n <= size_cap, f"n={inst.n}, cap={size_cap}")
    return rep
