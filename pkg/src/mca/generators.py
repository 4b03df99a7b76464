"""Instance generators: random DAGs and set-cover-based fixtures.

The random generator keeps the color hierarchy acyclic by ranking colors
and orienting every arc from a lower to a higher color rank; the tree
mode additionally gives every non-root color a single fixed parent
color, which forces an arborescent hierarchy.  A diamonds knob plants
independent indegree-2 colors for stressing the difficult-color solver.

The set-cover constructions build three-level instances whose optimum
encodes the minimum (colorful) cover size, and the composition combines
instances over a shared color set so that the composed optimum is the
best component optimum.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import McaError, ParseError
from .instance import Instance, color_hierarchy


@dataclass(frozen=True)
class SetCoverInstance:
    universe: int
    sets: tuple[frozenset[int], ...]
    k: int
    set_colors: tuple[int, ...] | None = None  # multicolored variant

    def __post_init__(self):
        if self.universe < 1 or not self.sets:
            raise McaError("need a nonempty universe and at least one set")
        for s in self.sets:
            if not s or not all(0 <= e < self.universe for e in s):
                raise McaError("every set must be a nonempty subset of the universe")
        if self.set_colors is not None and len(self.set_colors) != len(self.sets):
            raise McaError("need one color per set")


def parse_set_cover(text: str) -> SetCoverInstance:
    """Parse the set-cover text format.

    Lines (``#`` comments allowed): ``setcover 1``, ``universe <q>``,
    one ``set [color=<c>] <elem> ...`` per set, and ``k <int>``.
    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append((lineno, line.split()))
    if not records or records[0][1] != ["setcover", "1"]:
        raise ParseError("expected header 'setcover 1'", records[0][0] if records else None)
    universe = None
    k = None
    sets: list[frozenset[int]] = []
    colors: list[int | None] = []
    for lineno, tok in records[1:]:
        if tok[0] == "universe" and len(tok) == 2:
            universe = int(tok[1])
        elif tok[0] == "set" and len(tok) >= 2:
            elems = tok[1:]
            color = None
            if elems[0].startswith("color="):
                color = int(elems[0][6:])
                elems = elems[1:]
            try:
                sets.append(frozenset(int(e) for e in elems))
            except ValueError:
                raise ParseError("set elements must be integers", lineno) from None
            colors.append(color)
        elif tok[0] == "k" and len(tok) == 2:
            k = int(tok[1])
        else:
            raise ParseError(f"unrecognized record {tok[0]!r}", lineno)
    if universe is None or k is None or not sets:
        raise ParseError("file needs universe, at least one set, and k")
    has_colors = [c for c in colors if c is not None]
    if has_colors and len(has_colors) != len(colors):
        raise ParseError("either all sets carry colors or none do")
    return SetCoverInstance(
        universe=universe,
        sets=tuple(sets),
        k=k,
        set_colors=tuple(colors) if has_colors else None,  # type: ignore[arg-type]
    )


def write_set_cover(sc: SetCoverInstance) -> str:
    lines = ["setcover 1", f"universe {sc.universe}"]
    for i, s in enumerate(sc.sets):
        prefix = f"color={sc.set_colors[i]} " if sc.set_colors is not None else ""
        lines.append("set " + prefix + " ".join(str(e) for e in sorted(s)))
    lines.append(f"k {sc.k}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# random instances


def gen_random(
    n: int,
    colors: int,
    arc_density: float,
    weight_range: tuple[int, int] = (-5, 5),
    seed: int = 0,
    diamonds: int = 0,
    hierarchy: str = "layered",
) -> Instance:
    """Random valid instance; reproducible per seed.

    Color ids double as ranks: arcs only run from a lower to a higher
    color id, so the color hierarchy is a DAG by construction.  The root
    is vertex 0 and the only vertex of color 0.  ``hierarchy="tree"``
    restricts each color's incoming arcs to a single parent color
    (arborescent hierarchy); ``diamonds`` appends that many independent
    indegree-2 colors (three colors and three vertices each).

    Every vertex is given at least one incoming arc from an allowed
    lower color, so the whole instance is reachable from the root.
    """
    if colors > n:
        raise McaError("colors must not exceed n")
    if not 0 < arc_density <= 1:
        raise McaError("arc_density must be in (0, 1]")
    if colors < 2 and n > 1:
        raise McaError("need at least 2 colors for n > 1")
    if hierarchy not in ("layered", "tree"):
        raise McaError("hierarchy must be 'layered' or 'tree'")
    lo, hi = weight_range
    if lo > hi:
        raise McaError("empty weight range")
    rng = random.Random(seed)

    # one vertex per color first (vertex id i gets color i), extras random
    vcolors = list(range(colors))
    vcolors += [rng.randrange(1, colors) for _ in range(n - colors)]

    parent_color = None
    if hierarchy == "tree":
        parent_color = {c: rng.randrange(0, c) for c in range(1, colors)}

    by_color: dict[int, list[int]] = {c: [] for c in range(colors)}
    for v, c in enumerate(vcolors):
        by_color[c].append(v)

    arcs: list[tuple[int, int, float]] = []
    present: set[tuple[int, int]] = set()

    def add(u, v):
        if (u, v) not in present:
            present.add((u, v))
            arcs.append((u, v, float(rng.randint(lo, hi))))

    for v in range(1, n):
        cv = vcolors[v]
        if hierarchy == "tree":
            sources = by_color[parent_color[cv]]
        else:
            sources = [u for u in range(n) if vcolors[u] < cv]
        add(rng.choice(sources), v)  # guarantees reachability
        for u in sources:
            if rng.random() < arc_density:
                add(u, v)

    color_count = colors
    for _ in range(diamonds):
        ca, cb, cz = color_count, color_count + 1, color_count + 2
        color_count += 3
        a, bvert, z = len(vcolors), len(vcolors) + 1, len(vcolors) + 2
        vcolors += [ca, cb, cz]
        for v in (a, bvert):
            arcs.append((0, v, float(rng.randint(lo, hi))))
        arcs.append((a, z, float(rng.randint(lo, hi))))
        arcs.append((bvert, z, float(rng.randint(lo, hi))))

    inst = Instance(
        n=len(vcolors),
        colors=tuple(vcolors),
        arcs=tuple(arcs),
        root=0,
        color_count=color_count,
    )
    color_hierarchy(inst)  # generator contract: always valid
    return inst


# ---------------------------------------------------------------------------
# set-cover reductions


def _three_level(sc: SetCoverInstance, level2_colors: list[int]) -> tuple[Instance, float]:
    p, q = len(sc.sets), sc.universe
    n = 1 + p + q
    colors = [0] + level2_colors + list(
        range(max(level2_colors) + 1, max(level2_colors) + 1 + q)
    )
    arcs: list[tuple[int, int, float]] = []
    for i in range(p):
        arcs.append((0, 1 + i, -1.0))
    for i, s in enumerate(sc.sets):
        for j in sorted(s):
            arcs.append((1 + i, 1 + p + j, float(p)))
    inst = Instance(
        n=n,
        colors=tuple(colors),
        arcs=tuple(arcs),
        root=0,
        color_count=max(colors) + 1,
    )
    return inst, float(p * q - sc.k)


def reduce_set_cover(sc: SetCoverInstance) -> tuple[Instance, float]:
    """Three-level instance: root, one vertex per set, one per element.

    Arcs of weight -1 reach every set vertex and arcs of weight p join a
    set to each element it contains; all colors are distinct.  A size-k
    cover exists exactly when some colorful arborescence weighs p*q - k.
    """
    if sc.set_colors is not None:
        raise McaError("use reduce_multicolored_set_cover for colored families")
    return _three_level(sc, list(range(1, len(sc.sets) + 1)))


def reduce_multicolored_set_cover(sc: SetCoverInstance) -> tuple[Instance, float]:
    """Same construction, but set vertices share a color iff their sets do."""
    if sc.set_colors is None:
        raise McaError("set colors are required for the multicolored variant")
    palette = sorted(set(sc.set_colors))
    remap = {c: 1 + i for i, c in enumerate(palette)}
    return _three_level(sc, [remap[c] for c in sc.set_colors])


# ---------------------------------------------------------------------------
# OR-composition


def or_compose(instances: list[Instance]) -> Instance:
    """Combine instances over one shared color set behind a fresh root.

    A new root (fresh color) reaches a per-component gateway (all
    gateways share a second fresh color) which reaches the component
    root through zero-weight arcs.  Colorfulness then confines any
    solution to a single component, so the composed optimum is the best
    component optimum.
    """
    if not instances:
        raise McaError("need at least one instance")
    shared = instances[0].color_count
    if any(g.color_count != shared for g in instances):
        raise McaError("instances must share one color set")
    c_root, c_gate = shared, shared + 1
    colors: list[int] = [c_root] + [c_gate] * len(instances)
    arcs: list[tuple[int, int, float]] = []
    for i in range(len(instances)):
        arcs.append((0, 1 + i, 0.0))
    offset = 1 + len(instances)
    for i, g in enumerate(instances):
        arcs.append((1 + i, offset + g.root, 0.0))
        colors.extend(g.colors)
        arcs.extend((offset + u, offset + v, w) for u, v, w in g.arcs)
        offset += g.n
    composed = Instance(
        n=len(colors),
        colors=tuple(colors),
        arcs=tuple(arcs),
        root=0,
        color_count=shared + 2,
    )
    color_hierarchy(composed)  # shared color sets must admit a common order
    return composed


# ---------------------------------------------------------------------------
# random set-cover families


def gen_random_set_cover(
    q: int, p: int, seed: int = 0, colored: bool = False, palette: int | None = None
) -> SetCoverInstance:
    """Random family of p nonempty subsets of a q-element universe.

    ``k`` is set to the exhaustively computed minimum (colorful) cover
    size when the universe is coverable, and to p otherwise, so the
    target weight p*q - k is meaningful in tests.
    """
    rng = random.Random(seed)
    sets = []
    for _ in range(p):
        size = rng.randint(1, q)
        sets.append(frozenset(rng.sample(range(q), size)))
    set_colors = None
    if colored:
        palette = palette or max(1, p - 1)
        set_colors = tuple(rng.randrange(palette) for _ in range(p))
    kmin = min_cover_size(q, sets, set_colors)
    return SetCoverInstance(
        universe=q,
        sets=tuple(sets),
        k=kmin if kmin is not None else p,
        set_colors=set_colors,
    )


def min_cover_size(q: int, sets, set_colors=None) -> int | None:
    """Exhaustive minimum (colorful) cover size; None when uncoverable."""
    p = len(sets)
    best = None
    for mask in range(1, 1 << p):
        chosen = [i for i in range(p) if mask >> i & 1]
        if set_colors is not None:
            used = [set_colors[i] for i in chosen]
            if len(set(used)) != len(used):
                continue
        covered: set[int] = set()
        for i in chosen:
            covered |= sets[i]
        if len(covered) == q and (best is None or len(chosen) < best):
            best = len(chosen)
    return best


def cover_of_size_exists(q: int, sets, k: int, set_colors=None) -> bool:
    """Exhaustive check for a (colorful) cover of size exactly k."""
    p = len(sets)
    for mask in range(1 << p):
        if mask.bit_count() != k:
            continue
        chosen = [i for i in range(p) if mask >> i & 1]
        if set_colors is not None:
            used = [set_colors[i] for i in chosen]
            if len(set(used)) != len(used):
                continue
        covered: set[int] = set()
        for i in chosen:
            covered |= sets[i]
        if len(covered) == q:
            return True
    return False
