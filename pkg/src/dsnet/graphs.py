"""Directed-graph data model and the primitive algorithms everything else uses.

The types here are plain immutable values: an arc-weighted digraph, a demand
pattern over terminal vertices, an edge-subset "network" inside a host graph,
a linear vertex layout, and the acyclic multigraph of strongly connected
components. Operations are pure functions; nothing mutates after construction.
"""

from __future__ import annotations

import warnings
from collections import Counter

MAX_COST = 1 << 40

# exact isomorphism search is only attempted on tiny patterns
ISO_VERTEX_GUARD = 12


class SizeGuardError(ValueError):
    """An exact routine was asked to run beyond its instance-size guard."""


def ident_key(v):
    """Sort key for vertex identifiers that tolerates mixed int/str labels."""
    if isinstance(v, int) and not isinstance(v, bool):
        return (0, v, "")
    return (1, 0, str(v))


def edge_sort_key(edge):
    """Lexicographic (tail, head) order on an edge pair or costed triple."""
    return (ident_key(edge[0]), ident_key(edge[1]))


class WeightedDigraph:
    """An arc-weighted digraph with opaque, hashable vertex identifiers.

    Costs are nonnegative integers (scale rational data before building the
    graph); zero is allowed. Self-loops and parallel edges are rejected, so an
    edge is identified by its (tail, head) pair.
    """

    __slots__ = ("vertices", "edges", "_index", "_edge_pos", "_succ", "_pred")

    def __init__(self, vertices, edges):
        self.vertices = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self.vertices)}
        if len(self._index) != len(self.vertices):
            raise ValueError("duplicate vertex identifiers")
        norm = []
        pos = {}
        for edge in edges:
            tail, head, cost = edge
            if tail not in self._index or head not in self._index:
                raise ValueError(f"edge endpoint missing from vertex list: {(tail, head)!r}")
            if tail == head:
                raise ValueError(f"self-loop not allowed: {tail!r}")
            if isinstance(cost, bool) or not isinstance(cost, int):
                raise ValueError(f"edge cost must be an integer, got {cost!r}")
            if cost < 0 or cost > MAX_COST:
                raise ValueError(f"edge cost out of range: {cost}")
            if (tail, head) in pos:
                raise ValueError(f"parallel edge not allowed: {(tail, head)!r}")
            pos[(tail, head)] = len(norm)
            norm.append((tail, head, cost))
        self.edges = tuple(norm)
        self._edge_pos = pos
        succ = {v: [] for v in self.vertices}
        pred = {v: [] for v in self.vertices}
        for tail, head, _ in self.edges:
            succ[tail].append(head)
            pred[head].append(tail)
        self._succ = {v: tuple(ws) for v, ws in succ.items()}
        self._pred = {v: tuple(ws) for v, ws in pred.items()}

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def index(self, v):
        return self._index[v]

    def has_vertex(self, v) -> bool:
        return v in self._index

    def has_edge(self, tail, head) -> bool:
        return (tail, head) in self._edge_pos

    def cost(self, tail, head) -> int:
        return self.edges[self._edge_pos[(tail, head)]][2]

    def edge_position(self, tail, head) -> int:
        return self._edge_pos[(tail, head)]

    def successors(self, v):
        return self._succ[v]

    def predecessors(self, v):
        return self._pred[v]

    def successor_map(self):
        return self._succ

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def __repr__(self):
        return f"WeightedDigraph({self.num_vertices} vertices, {self.num_edges} edges)"


class Pattern:
    """An unweighted demand graph: each demand (s, t) asks for an s -> t path.

    Terminals appearing in no demand are stripped at construction with a
    warning since they constrain nothing.
    """

    __slots__ = ("terminals", "demands", "_index", "_succ", "_pred")

    def __init__(self, terminals, demands):
        terms = tuple(terminals)
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate terminals")
        term_set = set(terms)
        seen = set()
        norm = []
        for s, t in demands:
            if s == t:
                raise ValueError(f"self-loop demand not allowed: {s!r}")
            if s not in term_set or t not in term_set:
                raise ValueError(f"demand endpoint is not a terminal: {(s, t)!r}")
            if (s, t) in seen:
                raise ValueError(f"duplicate demand: {(s, t)!r}")
            seen.add((s, t))
            norm.append((s, t))
        used = {v for d in norm for v in d}
        if used != term_set:
            dropped = sorted(term_set - used, key=ident_key)
            warnings.warn(f"stripping isolated terminals {dropped}", stacklevel=2)
            terms = tuple(v for v in terms if v in used)
        self.terminals = terms
        self.demands = tuple(norm)
        self._index = {v: i for i, v in enumerate(terms)}
        succ = {v: [] for v in terms}
        pred = {v: [] for v in terms}
        for s, t in self.demands:
            succ[s].append(t)
            pred[t].append(s)
        self._succ = {v: tuple(ws) for v, ws in succ.items()}
        self._pred = {v: tuple(ws) for v, ws in pred.items()}

    @property
    def num_terminals(self) -> int:
        return len(self.terminals)

    @property
    def num_demands(self) -> int:
        return len(self.demands)

    def index(self, v):
        return self._index[v]

    def has_demand(self, s, t) -> bool:
        return t in self._succ.get(s, ())

    def successors(self, v):
        return self._succ[v]

    def predecessors(self, v):
        return self._pred[v]

    def successor_map(self):
        return self._succ

    def out_degree(self, v) -> int:
        return len(self._succ[v])

    def in_degree(self, v) -> int:
        return len(self._pred[v])

    def reversed(self) -> "Pattern":
        return Pattern(self.terminals, [(t, s) for s, t in self.demands])

    def demand_set(self):
        return frozenset(self.demands)

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.terminals == other.terminals and self.demand_set() == other.demand_set()

    def __hash__(self):
        return hash((self.terminals, self.demand_set()))

    def __repr__(self):
        return f"Pattern({self.num_terminals} terminals, {self.num_demands} demands)"


class SolutionNetwork:
    """A subset of a host graph's edges, viewed as a candidate solution."""

    __slots__ = ("host", "edges", "cost")

    def __init__(self, host: WeightedDigraph, edges):
        pairs = set()
        for edge in edges:
            tail, head = edge[0], edge[1]
            if not host.has_edge(tail, head):
                raise ValueError(f"edge not in host graph: {(tail, head)!r}")
            pairs.add((tail, head))
        self.host = host
        # canonical order: host edge positions
        self.edges = tuple(sorted(pairs, key=lambda e: host.edge_position(e[0], e[1])))
        self.cost = sum(host.cost(t, h) for t, h in self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def vertex_set(self):
        return frozenset(v for e in self.edges for v in e)

    def contains(self, tail, head) -> bool:
        return (tail, head) in set(self.edges)

    def successor_map(self):
        succ = {v: [] for v in self.host.vertices}
        for tail, head in self.edges:
            succ[tail].append(head)
        return {v: tuple(ws) for v, ws in succ.items()}

    def without(self, tail, head) -> "SolutionNetwork":
        return SolutionNetwork(self.host, [e for e in self.edges if e != (tail, head)])

    def costed_edges(self):
        return tuple((t, h, self.host.cost(t, h)) for t, h in self.edges)

    def __eq__(self, other):
        if not isinstance(other, SolutionNetwork):
            return NotImplemented
        return self.host == other.host and self.edges == other.edges

    def __hash__(self):
        return hash((self.host, self.edges))

    def __repr__(self):
        return f"SolutionNetwork({self.num_edges} edges, cost {self.cost})"


class Layout:
    """A linear order of vertices; position numbering starts at 1."""

    __slots__ = ("order", "_pos")

    def __init__(self, order):
        self.order = tuple(order)
        self._pos = {v: i + 1 for i, v in enumerate(self.order)}
        if len(self._pos) != len(self.order):
            raise ValueError("layout repeats a vertex")

    def position(self, v) -> int:
        return self._pos[v]

    def __len__(self):
        return len(self.order)

    def __repr__(self):
        return f"Layout({list(self.order)!r})"


class CondensationGraph:
    """Acyclic multigraph of strongly connected components.

    Components are numbered 0..c-1 along a topological order, so every arc
    goes from a lower id to a higher one. Arc multiplicities count the
    original edges crossing between the two components.
    """

    __slots__ = ("components", "arcs", "component_of")

    def __init__(self, components, arcs, component_of):
        self.components = tuple(tuple(c) for c in components)
        self.arcs = tuple(arcs)
        self.component_of = dict(component_of)
        for a, b, mult in self.arcs:
            if a >= b:
                raise ValueError("condensation arcs must go forward in the component order")
            if mult <= 0:
                raise ValueError("arc multiplicity must be positive")

    @property
    def num_components(self) -> int:
        return len(self.components)

    def multiplicities(self):
        """Arc list as (tail id, head id, multiplicity) triples."""
        return self.arcs

    def max_component_size(self) -> int:
        return max((len(c) for c in self.components), default=0)

    def __repr__(self):
        return f"CondensationGraph({self.num_components} components, {len(self.arcs)} arcs)"


def _successor_map(graph):
    if isinstance(graph, (WeightedDigraph, Pattern, SolutionNetwork)):
        return graph.successor_map()
    raise TypeError(f"not a graph-like object: {graph!r}")


def reachable(graph, s):
    """All vertices reachable from s by a directed path, s included."""
    succ = _successor_map(graph)
    if s not in succ:
        raise ValueError(f"unknown vertex: {s!r}")
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def reachable_sets(graph):
    """Reachability set of every vertex, as a dict."""
    succ = _successor_map(graph)
    return {v: reachable(graph, v) for v in succ}


def scc_condensation(graph):
    """Strongly connected components and their acyclic multigraph.

    Returns (condensation, component_of). Parallel crossing edges are kept as
    arc multiplicities; intra-component edges vanish. Component ids follow a
    topological order of the condensation.
    """
    succ = _successor_map(graph)
    verts = list(succ)
    # Tarjan, iterative so deep graphs cannot blow the recursion limit
    index_of = {}
    low = {}
    on_stack = set()
    stack = []
    comp_of = {}
    pop_order = []  # components in completion order, which is reverse topological
    counter = 0
    for root in verts:
        if root in index_of:
            continue
        work = [(root, iter(succ[root]))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index_of:
                    index_of[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index_of[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                pop_order.append(comp)
    total = len(pop_order)
    components = [None] * total
    for pop_idx, comp in enumerate(pop_order):
        cid = total - 1 - pop_idx
        order = {v: i for i, v in enumerate(verts)}
        components[cid] = tuple(sorted(comp, key=order.get))
        for v in comp:
            comp_of[v] = cid
    mult = Counter()
    for v in verts:
        for w in succ[v]:
            a, b = comp_of[v], comp_of[w]
            if a != b:
                mult[(a, b)] += 1
    arcs = tuple((a, b, m) for (a, b), m in sorted(mult.items()))
    return CondensationGraph(components, arcs, comp_of), dict(comp_of)


def transitive_closure(pattern: Pattern) -> Pattern:
    """Pattern with a demand (s, t) whenever t is reachable from s, s != t."""
    demands = []
    for s in pattern.terminals:
        reach = reachable(pattern, s)
        for t in pattern.terminals:
            if t != s and t in reach:
                demands.append((s, t))
    return Pattern(pattern.terminals, demands)


def _adjacency_masks(pattern: Pattern):
    n = pattern.num_terminals
    out = [0] * n
    for s, t in pattern.demands:
        out[pattern.index(s)] |= 1 << pattern.index(t)
    return out


def _refine_signatures(out_masks, n):
    # start from degree pairs, then fold in neighbor signatures a few rounds
    in_masks = [0] * n
    for v in range(n):
        m = out_masks[v]
        while m:
            w = (m & -m).bit_length() - 1
            in_masks[w] |= 1 << v
            m &= m - 1
    sig = [(out_masks[v].bit_count(), in_masks[v].bit_count()) for v in range(n)]
    for _ in range(2):
        nxt = []
        for v in range(n):
            outs = sorted(sig[w] for w in _bits(out_masks[v]))
            ins = sorted(sig[w] for w in _bits(in_masks[v]))
            nxt.append((sig[v], tuple(outs), tuple(ins)))
        sig = nxt
    return sig


def _bits(mask):
    while mask:
        yield (mask & -mask).bit_length() - 1
        mask &= mask - 1


def _isomorphic_digraphs(out_a, out_b, n) -> bool:
    sig_a = _refine_signatures(out_a, n)
    sig_b = _refine_signatures(out_b, n)
    if sorted(sig_a) != sorted(sig_b):
        return False
    candidates = []
    for v in range(n):
        cands = [w for w in range(n) if sig_b[w] == sig_a[v]]
        if not cands:
            return False
        candidates.append(cands)
    order = sorted(range(n), key=lambda v: len(candidates[v]))
    mapping = [-1] * n
    used = [False] * n

    def extend(pos) -> bool:
        if pos == n:
            return True
        v = order[pos]
        for w in candidates[v]:
            if used[w]:
                continue
            ok = True
            for prev in order[:pos]:
                pw = mapping[prev]
                if ((out_a[v] >> prev) & 1) != ((out_b[w] >> pw) & 1):
                    ok = False
                    break
                if ((out_a[prev] >> v) & 1) != ((out_b[pw] >> w) & 1):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used[w] = True
            if extend(pos + 1):
                return True
            mapping[v] = -1
            used[w] = False
        return False

    return extend(0)


def transitively_equivalent(first: Pattern, second: Pattern) -> bool:
    """Whether two patterns have isomorphic transitive closures.

    Exact unlabeled-digraph isomorphism, so both patterns must stay within
    the small-instance guard.
    """
    for p in (first, second):
        if p.num_terminals > ISO_VERTEX_GUARD:
            raise SizeGuardError(
                f"isomorphism search limited to {ISO_VERTEX_GUARD} vertices, got {p.num_terminals}"
            )
    ca = transitive_closure(first)
    cb = transitive_closure(second)
    if ca.num_terminals != cb.num_terminals or ca.num_demands != cb.num_demands:
        return False
    return _isomorphic_digraphs(
        _adjacency_masks(ca), _adjacency_masks(cb), ca.num_terminals
    )


def feasible(network: SolutionNetwork, pattern: Pattern) -> bool:
    """Whether the network carries an s -> t path for every demand."""
    host = network.host
    for v in pattern.terminals:
        if not host.has_vertex(v):
            raise ValueError(f"terminal missing from host graph: {v!r}")
    succ = network.successor_map()
    by_source = {}
    for s, t in pattern.demands:
        by_source.setdefault(s, []).append(t)
    for s, targets in by_source.items():
        seen = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        for t in targets:
            if t not in seen:
                return False
    return True


def _feasible_adj(succ, pattern) -> bool:
    for s, t in pattern.demands:
        seen = {s}
        stack = [s]
        found = False
        while stack:
            v = stack.pop()
            if v == t:
                found = True
                break
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if not found:
            return False
    return True


def minimalize(network: SolutionNetwork, pattern: Pattern) -> SolutionNetwork:
    """Greedily delete removable edges until none remains.

    Deterministic: candidates are examined in decreasing-cost order, ties
    broken by (tail, head) identifier order. The result is feasible and
    inclusion-minimal; it need not be a minimum-cost solution.
    """
    if not feasible(network, pattern):
        raise ValueError("cannot minimalize an infeasible network")
    host = network.host
    succ = {v: set() for v in host.vertices}
    for tail, head in network.edges:
        succ[tail].add(head)
    queue = sorted(
        network.costed_edges(),
        key=lambda e: (-e[2], ident_key(e[0]), ident_key(e[1])),
    )
    for tail, head, _ in queue:
        succ[tail].discard(head)
        if not _feasible_adj(succ, pattern):
            succ[tail].add(head)
    kept = [(t, h) for t in host.vertices for h in succ[t]]
    return SolutionNetwork(host, kept)
