"""Hardness-style instance generators.

Multicolored-clique encodings into diamond patterns, cycle patterns for
strong connectivity, zero-cost lifts that undo terminal identification,
and subdivided bidirected expander-like instances. These double as a
correctness corpus for the solvers: each construction carries a known
target cost or an external equivalence to check oracles against.
"""

import random
from dataclasses import dataclass

from .classify import identify_terminals
from .graphs import (
    Pattern,
    SizeGuardError,
    WeightedDigraph,
    transitive_closure,
)

# exhaustive clique search stays cheap only for this many parts
CLIQUE_SEARCH_GUARD = 4

REDUCTION_KINDS = ("pure-diamond", "flawed-diamond", "cycle", "closure-lift")


class MccInstance:
    """A multicolored clique instance: vertices split into parts, edges
    only between distinct parts, sought is one vertex per part with all
    pairs adjacent."""

    __slots__ = ("parts", "edges", "_part_of", "_adjacent")

    def __init__(self, parts, edges):
        self.parts = tuple(tuple(p) for p in parts)
        if len(self.parts) < 2:
            raise ValueError("need at least two parts")
        part_of = {}
        for i, part in enumerate(self.parts):
            for v in part:
                if v in part_of:
                    raise ValueError(f"vertex in more than one part: {v!r}")
                part_of[v] = i
        norm = []
        seen = set()
        for u, v in edges:
            if u not in part_of or v not in part_of:
                raise ValueError(f"edge endpoint outside the parts: {(u, v)!r}")
            if part_of[u] == part_of[v]:
                raise ValueError(f"edge inside a part: {(u, v)!r}")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge: {(u, v)!r}")
            seen.add(key)
            norm.append((u, v))
        self.edges = tuple(norm)
        self._part_of = part_of
        self._adjacent = seen

    @property
    def num_parts(self):
        return len(self.parts)

    def part_of(self, v):
        return self._part_of[v]

    def adjacent(self, u, v) -> bool:
        return frozenset((u, v)) in self._adjacent


def has_clique(mcc: MccInstance) -> bool:
    """Whether one vertex per part can be chosen pairwise adjacent, by
    exhaustive search."""
    k = mcc.num_parts
    if k > CLIQUE_SEARCH_GUARD:
        raise SizeGuardError(
            f"clique search limited to {CLIQUE_SEARCH_GUARD} parts, got {k}"
        )

    def extend(i, chosen):
        if i == k:
            return True
        for v in mcc.parts[i]:
            if all(mcc.adjacent(v, w) for w in chosen):
                if extend(i + 1, chosen + [v]):
                    return True
        return False

    return extend(0, [])


@dataclass(frozen=True)
class ReductionOutput:
    instance: tuple  # (WeightedDigraph, Pattern)
    target_cost: int
    kind: str

    def __post_init__(self):
        if self.kind not in REDUCTION_KINDS:
            raise ValueError(f"unknown reduction kind: {self.kind!r}")

    @property
    def graph(self) -> WeightedDigraph:
        return self.instance[0]

    @property
    def pattern(self) -> Pattern:
        return self.instance[1]


def _check_orientation(orientation):
    if orientation not in ("out", "in"):
        raise ValueError(f"orientation must be 'out' or 'in': {orientation!r}")


def _reverse_instance(graph, pattern):
    rg = WeightedDigraph(graph.vertices, [(h, t, c) for t, h, c in graph.edges])
    rp = Pattern(pattern.terminals, [(t, s) for s, t in pattern.demands])
    return rg, rp


def _copy_name(w, j):
    return f"w:{w}:{j}"


def _diamond_graph(mcc: MccInstance):
    """The clique-selection graph: picking a part vertex pays for its row
    of copies, picking a cross edge pays for its two copy hooks; both
    roots reach every leaf exactly when the picks form a clique."""
    k = mcc.num_parts
    leaves = [
        f"l:{i}:{j}"
        for i in range(1, k + 1)
        for j in range(1, k + 1)
        if i != j
    ]
    ys = [f"y:{i}" for i in range(1, k + 1)]
    copies = [
        _copy_name(w, j)
        for part in mcc.parts
        for w in part
        for j in range(0, k + 1)
        if j != mcc.part_of(w) + 1
    ]
    zs = [
        f"z:{i}:{j}"
        for i in range(1, k + 1)
        for j in range(i + 1, k + 1)
    ]
    zes = [f"ze:{idx}" for idx in range(len(mcc.edges))]
    vertices = ["r1", "r2", *leaves, *ys, *copies, *zs, *zes]

    edges = []
    for i in range(1, k + 1):
        edges.append(("r1", f"y:{i}", 1))
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            edges.append(("r2", f"z:{i}:{j}", 1))
    for i, part in enumerate(mcc.parts, start=1):
        for w in part:
            edges.append((f"y:{i}", _copy_name(w, 0), 1))
    for idx, (u, v) in enumerate(mcc.edges):
        i, j = sorted((mcc.part_of(u) + 1, mcc.part_of(v) + 1))
        edges.append((f"z:{i}:{j}", f"ze:{idx}", 1))
    for i, part in enumerate(mcc.parts, start=1):
        for w in part:
            for j in range(1, k + 1):
                if j == i:
                    continue
                edges.append((_copy_name(w, 0), _copy_name(w, j), 1))
                edges.append((_copy_name(w, j), f"l:{i}:{j}", 1))
    for idx, (u, v) in enumerate(mcc.edges):
        if mcc.part_of(u) > mcc.part_of(v):
            u, v = v, u
        i, j = mcc.part_of(u) + 1, mcc.part_of(v) + 1
        edges.append((f"ze:{idx}", _copy_name(u, j), 1))
        edges.append((f"ze:{idx}", _copy_name(v, i), 1))

    graph = WeightedDigraph(vertices, edges)
    return graph, leaves


def mcc_to_pure_diamond(mcc: MccInstance, orientation="out") -> ReductionOutput:
    """Encode multicolored clique as a pure diamond instance; a clique of
    one vertex per part exists exactly when the optimum meets the target."""
    _check_orientation(orientation)
    k = mcc.num_parts
    graph, leaves = _diamond_graph(mcc)
    demands = [(r, leaf) for r in ("r1", "r2") for leaf in leaves]
    pattern = Pattern(["r1", "r2", *leaves], demands)
    if orientation == "in":
        graph, pattern = _reverse_instance(graph, pattern)
    return ReductionOutput(
        (graph, pattern), 4 * k * k - 2 * k, "pure-diamond"
    )


def mcc_to_flawed_diamond(mcc: MccInstance, orientation="out") -> ReductionOutput:
    """Pure diamond instance plus an apex terminal wired to both roots;
    its two unit edges are unavoidable, shifting the target by two."""
    _check_orientation(orientation)
    k = mcc.num_parts
    graph, leaves = _diamond_graph(mcc)
    vertices = list(graph.vertices) + ["x"]
    edges = list(graph.edges) + [("x", "r1", 1), ("x", "r2", 1)]
    graph = WeightedDigraph(vertices, edges)
    demands = [(r, leaf) for r in ("r1", "r2") for leaf in leaves]
    demands += [("x", "r1"), ("x", "r2")]
    pattern = Pattern(["r1", "r2", *leaves, "x"], demands)
    if orientation == "in":
        graph, pattern = _reverse_instance(graph, pattern)
    return ReductionOutput(
        (graph, pattern), 4 * k * k - 2 * k + 2, "flawed-diamond"
    )


def cycle_pattern_instance(graph: WeightedDigraph, terminals):
    """Pattern demanding a directed cycle through the terminals in the
    given order; solving it is exactly strongly connecting them."""
    terms = tuple(terminals)
    if len(terms) < 2:
        raise ValueError("need at least two terminals")
    for v in terms:
        if not graph.has_vertex(v):
            raise ValueError(f"terminal missing from graph: {v!r}")
    if len(set(terms)) != len(terms):
        raise ValueError("duplicate terminal")
    demands = [
        (terms[i], terms[(i + 1) % len(terms)]) for i in range(len(terms))
    ]
    return graph, Pattern(terms, demands)


def closure_lift(instance, pattern: Pattern, identification):
    """Undo a terminal identification: anchor each class at its image
    vertex with a zero-cost cycle, so optima of the lifted instance match
    the collapsed one.

    `instance` is the collapsed (graph, pattern) pair; `identification`
    maps every terminal of `pattern` onto a terminal of the collapsed
    pattern. Collapsing `pattern` along it must reproduce the collapsed
    pattern up to transitive closure.
    """
    graph2, pattern2 = instance
    ident = dict(identification)
    if set(ident) != set(pattern.terminals):
        raise ValueError("identification must map exactly the pattern terminals")
    images = set(ident.values())
    for t in images:
        if t not in set(pattern2.terminals):
            raise ValueError(f"identification image is not a terminal: {t!r}")
        if not graph2.has_vertex(t):
            raise ValueError(f"identification image missing from graph: {t!r}")

    classes = []
    members_of = {}
    for t in pattern2.terminals:
        members = tuple(v for v in pattern.terminals if ident[v] == t)
        members_of[t] = members
        if members:
            classes.append(members)
    collapsed = identify_terminals(pattern, classes)
    renamed = Pattern(
        [ident[cls[0]] for cls in collapsed.terminals],
        [(ident[a[0]], ident[b[0]]) for a, b in collapsed.demands],
    )
    lhs = transitive_closure(renamed)
    rhs = transitive_closure(pattern2)
    if set(lhs.terminals) != set(rhs.terminals) or set(lhs.demands) != set(
        rhs.demands
    ):
        raise ValueError(
            "identification does not collapse the pattern onto the instance's"
        )

    vertices = list(graph2.vertices)
    edges = list(graph2.edges)
    present = set(vertices)
    for t in pattern2.terminals:
        fresh = [v for v in members_of[t] if v != t]
        for v in fresh:
            if v in present:
                raise ValueError(f"lifted vertex name already taken: {v!r}")
            present.add(v)
        vertices.extend(fresh)
        ring = [t] + fresh if t not in members_of[t] else list(members_of[t])
        if len(ring) >= 2:
            for a, b in zip(ring, ring[1:] + ring[:1]):
                edges.append((a, b, 0))
    return WeightedDigraph(vertices, edges), pattern


def _random_cubic_graph(d, rng):
    """Connected simple 3-regular graph by rejection-sampled stub pairing."""
    stubs = [v for v in range(d) for _ in range(3)]
    for _ in range(10000):
        rng.shuffle(stubs)
        pairs = list(zip(stubs[0::2], stubs[1::2]))
        seen = set()
        ok = True
        for u, v in pairs:
            if u == v or frozenset((u, v)) in seen:
                ok = False
                break
            seen.add(frozenset((u, v)))
        if not ok:
            continue
        reached = {0}
        frontier = [0]
        adj = {v: [] for v in range(d)}
        for u, v in pairs:
            adj[u].append(v)
            adj[v].append(u)
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in reached:
                    reached.add(w)
                    frontier.append(w)
        if len(reached) == d:
            return sorted(tuple(sorted(p)) for p in pairs)
    raise RuntimeError("could not sample a connected cubic graph")


def expander_like_instance(d: int, seed):
    """Bidirect a random cubic graph and put a terminal on every arc; the
    cycle pattern through all terminals forces any solution to keep the
    entire graph. Randomness stands in for expansion, so no expansion
    bound is claimed."""
    if d < 4 or d % 2:
        raise ValueError("need an even vertex count of at least 4")
    rng = random.Random(seed)
    base = _random_cubic_graph(d, rng)
    arcs = sorted({(u, v) for u, v in base} | {(v, u) for u, v in base})
    vertices = [f"u{i}" for i in range(d)]
    terminals = []
    edges = []
    for u, v in arcs:
        t = f"t:{u}:{v}"
        terminals.append(t)
        vertices.append(t)
        edges.append((f"u{u}", t, 1))
        edges.append((t, f"u{v}", 1))
    demands = [
        (terminals[i], terminals[(i + 1) % len(terminals)])
        for i in range(len(terminals))
    ]
    return WeightedDigraph(vertices, edges), Pattern(terminals, demands)
