"""Layout search, tree decompositions, and the structural split of minimal
solution networks into a small core plus attached arborescences.

Cutwidth and treewidth are computed exactly by subset dynamic programs, so
both carry hard vertex-count guards. Treewidth is always taken over the
underlying undirected graph.
"""

from dataclasses import dataclass

from .classify import CaterpillarCertificate, validate_certificate
from .graphs import (
    CondensationGraph,
    Layout,
    Pattern,
    SizeGuardError,
    SolutionNetwork,
    WeightedDigraph,
    edge_sort_key,
    feasible,
    ident_key,
    minimalize,
    scc_condensation,
)
from .solver import _lex_shortest_path, fixed_path_family

CUTWIDTH_VERTEX_GUARD = 16
TREEWIDTH_VERTEX_GUARD = 14


@dataclass(frozen=True)
class CutwidthResult:
    value: int
    layout: Layout
    exact: bool = True


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple  # frozensets of vertices
    edges: tuple  # (i, j) bag index pairs with i < j
    width: int


@dataclass(frozen=True)
class CoreDecomposition:
    core: SolutionNetwork
    core_pattern: Pattern
    forest: tuple  # (root, sorted edge tuple) per attached arborescence
    orientation: str


# ------------------------------------------------------------ graph views


def _graph_view(graph):
    """Vertex tuple plus directed edge pair list; parallel edges repeat."""
    if isinstance(graph, WeightedDigraph):
        return graph.vertices, [(t, h) for t, h, _ in graph.edges]
    if isinstance(graph, SolutionNetwork):
        verts = tuple(sorted(graph.vertex_set(), key=ident_key))
        return verts, list(graph.edges)
    if isinstance(graph, Pattern):
        return tuple(graph.terminals), list(graph.demands)
    if isinstance(graph, CondensationGraph):
        verts = tuple(range(graph.num_components))
        pairs = []
        for a, b, mult in graph.arcs:
            pairs.extend([(a, b)] * mult)
        return verts, pairs
    raise TypeError(f"not a graph-like object: {graph!r}")


# ----------------------------------------------------------------- layouts


def cutwidth_of_layout(graph, layout):
    """Largest number of edges crossing any prefix cut of the layout."""
    verts, pairs = _graph_view(graph)
    order = list(layout.order if isinstance(layout, Layout) else layout)
    if len(order) != len(verts) or set(order) != set(verts):
        raise ValueError("layout must list every vertex exactly once")
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    if n <= 1:
        return 0
    diff = [0] * n
    for t, h in pairs:
        a, b = pos[t], pos[h]
        if a == b:
            continue
        lo, hi = (a, b) if a < b else (b, a)
        diff[lo] += 1
        diff[hi] -= 1
    best = run = 0
    for i in range(n - 1):
        run += diff[i]
        if run > best:
            best = run
    return best


def cutwidth_exact(graph):
    """Minimum cutwidth and a witnessing layout, by subset DP."""
    verts, pairs = _graph_view(graph)
    n = len(verts)
    if n > CUTWIDTH_VERTEX_GUARD:
        raise SizeGuardError(
            f"exact cutwidth limited to {CUTWIDTH_VERTEX_GUARD} vertices, got {n}"
        )
    if n == 0:
        return CutwidthResult(0, Layout(()))
    idx = {v: i for i, v in enumerate(verts)}
    adj = [{} for _ in range(n)]  # undirected multiplicity counts
    deg = [0] * n
    for t, h in pairs:
        a, b = idx[t], idx[h]
        if a == b:
            continue
        adj[a][b] = adj[a].get(b, 0) + 1
        adj[b][a] = adj[b].get(a, 0) + 1
        deg[a] += 1
        deg[b] += 1

    full = (1 << n) - 1
    cut = [0] * (full + 1)
    for mask in range(1, full + 1):
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        inner = 0
        for u, count in adj[v].items():
            if rest >> u & 1:
                inner += count
        cut[mask] = cut[rest] + deg[v] - 2 * inner

    # candidate order fixed by vertex identity so ties break the same way
    # on every run
    cand = sorted(range(n), key=lambda i: ident_key(verts[i]))
    dp = [0] * (full + 1)
    pick = [0] * (full + 1)
    for mask in range(1, full + 1):
        best = None
        chosen = -1
        for v in cand:
            if not mask >> v & 1:
                continue
            prev = dp[mask ^ (1 << v)]
            if best is None or prev < best:
                best = prev
                chosen = v
        dp[mask] = best if best > cut[mask] else cut[mask]
        pick[mask] = chosen

    order = []
    mask = full
    while mask:
        v = pick[mask]
        order.append(verts[v])
        mask ^= 1 << v
    order.reverse()
    layout = Layout(order)
    assert cutwidth_of_layout(graph, layout) == dp[full]
    return CutwidthResult(dp[full], layout)


def composed_layout(graph):
    """Layout concatenating per-component layouts along a topological order
    of the condensation; its cutwidth is at most the condensation layout's
    plus the worst component's.

    Components are not laid out by their inner cutwidth alone: a cut inside
    a component's block is also crossed by arcs entering the component whose
    head comes after the cut and by arcs leaving it whose tail comes before,
    so the component layout minimizes inner cut plus those boundary terms.
    """
    verts, pairs = _graph_view(graph)
    keep = set(verts)
    cond, comp_of = scc_condensation(graph)
    order = []
    for comp in cond.components:
        # solution networks condense over all host vertices; stick to the
        # vertices the graph view reports
        members = {v for v in comp if v in keep}
        if not members:
            continue
        inner = [(t, h) for t, h in pairs if t in members and h in members]
        into = {v: 0 for v in members}
        out = {v: 0 for v in members}
        for t, h in pairs:
            if h in members and t not in members:
                into[h] += 1
            elif t in members and h not in members:
                out[t] += 1
        order.extend(_component_block_layout(members, inner, into, out))
    return Layout(order)


def _component_block_layout(members, inner, into, out):
    """Order one component to minimize the largest inner cut including the
    boundary arcs still dangling across it, by subset DP."""
    verts = sorted(members, key=ident_key)
    n = len(verts)
    if n > CUTWIDTH_VERTEX_GUARD:
        raise SizeGuardError(
            f"component layout limited to {CUTWIDTH_VERTEX_GUARD} vertices, got {n}"
        )
    if n == 1:
        return list(verts)
    idx = {v: i for i, v in enumerate(verts)}
    adj = [{} for _ in range(n)]
    deg = [0] * n
    for t, h in inner:
        a, b = idx[t], idx[h]
        if a == b:
            continue
        adj[a][b] = adj[a].get(b, 0) + 1
        adj[b][a] = adj[b].get(a, 0) + 1
        deg[a] += 1
        deg[b] += 1
    total_into = sum(into.values())
    # boundary(S) = arcs out of placed vertices + arcs into unplaced ones
    shift = [out[v] - into[v] for v in verts]

    full = (1 << n) - 1
    cut = [0] * (full + 1)
    bound = [total_into] * (full + 1)
    for mask in range(1, full + 1):
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        through = 0
        for u, count in adj[v].items():
            if rest >> u & 1:
                through += count
        cut[mask] = cut[rest] + deg[v] - 2 * through
        bound[mask] = bound[rest] + shift[v]

    cand = sorted(range(n), key=lambda i: ident_key(verts[i]))
    dp = [0] * (full + 1)
    pick = [0] * (full + 1)
    for mask in range(1, full + 1):
        best = None
        chosen = -1
        for v in cand:
            if not mask >> v & 1:
                continue
            prev = dp[mask ^ (1 << v)]
            if best is None or prev < best:
                best = prev
                chosen = v
        here = 0 if mask == full else cut[mask] + bound[mask]
        dp[mask] = best if best > here else here
        pick[mask] = chosen

    order = []
    mask = full
    while mask:
        v = pick[mask]
        order.append(verts[v])
        mask ^= 1 << v
    order.reverse()
    return order


# ------------------------------------------------------------- treewidth


def _component_through(adj, v, allowed_mask):
    """Vertices adjacent to v directly or via paths inside allowed_mask."""
    seen = adj[v]
    stack = seen & allowed_mask
    while stack:
        u = (stack & -stack).bit_length() - 1
        stack &= stack - 1
        fresh = adj[u] & ~seen
        seen |= fresh
        stack |= fresh & allowed_mask
    return seen & ~(1 << v)


def treewidth_exact(graph):
    """Minimum treewidth with a validated tree decomposition, by the
    elimination-ordering subset DP over the underlying undirected graph."""
    verts, pairs = _graph_view(graph)
    n = len(verts)
    if n > TREEWIDTH_VERTEX_GUARD:
        raise SizeGuardError(
            f"exact treewidth limited to {TREEWIDTH_VERTEX_GUARD} vertices, got {n}"
        )
    if n == 0:
        return 0, TreeDecomposition((), (), 0)
    idx = {v: i for i, v in enumerate(verts)}
    adj = [0] * n
    for t, h in pairs:
        a, b = idx[t], idx[h]
        if a != b:
            adj[a] |= 1 << b
            adj[b] |= 1 << a

    full = (1 << n) - 1
    dp = [0] * (full + 1)
    pick = [0] * (full + 1)
    cand = sorted(range(n), key=lambda i: ident_key(verts[i]))
    for mask in range(1, full + 1):
        best = None
        chosen = -1
        for v in cand:
            if not mask >> v & 1:
                continue
            prev_mask = mask ^ (1 << v)
            # vertices already eliminated do not count toward the bag
            reach = _component_through(adj, v, prev_mask) & ~prev_mask
            width = max(dp[prev_mask], reach.bit_count())
            if best is None or width < best:
                best = width
                chosen = v
        dp[mask] = best
        pick[mask] = chosen

    elim_rev = []
    mask = full
    while mask:
        v = pick[mask]
        elim_rev.append(v)
        mask ^= 1 << v
    elim = list(reversed(elim_rev))

    # replay the elimination to collect bags from the fill-in graph
    work = list(adj)
    alive = full
    bags = []
    for v in elim:
        neigh = work[v] & alive & ~(1 << v)
        bags.append(frozenset(verts[u] for u in _bits(neigh)) | {verts[v]})
        members = list(_bits(neigh))
        for a in members:
            for b in members:
                if a != b:
                    work[a] |= 1 << b
        alive ^= 1 << v

    position = {verts[v]: i for i, v in enumerate(elim)}
    tree = []
    for i, v in enumerate(elim[:-1]):
        later = [position[u] for u in bags[i] if position[u] > i]
        parent = min(later) if later else i + 1
        tree.append((i, parent))
    width = dp[full]
    assert max(len(b) for b in bags) - 1 == width
    decomp = TreeDecomposition(tuple(bags), tuple(tree), width)
    assert validate_decomposition(graph, decomp)
    return width, decomp


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def validate_decomposition(graph, decomposition) -> bool:
    """Check vertex coverage, edge coverage and connected occupancy."""
    verts, pairs = _graph_view(graph)
    bags = decomposition.bags
    if not bags:
        return not verts
    covered = set().union(*bags)
    if covered != set(verts):
        return False
    for t, h in pairs:
        if t != h and not any(t in b and h in b for b in bags):
            return False
    neighbors = {i: set() for i in range(len(bags))}
    for i, j in decomposition.edges:
        if not (0 <= i < len(bags) and 0 <= j < len(bags)) or i == j:
            return False
        neighbors[i].add(j)
        neighbors[j].add(i)
    if len(decomposition.edges) != len(bags) - 1:
        return False
    for v in verts:
        holding = [i for i, b in enumerate(bags) if v in b]
        seen = {holding[0]}
        stack = [holding[0]]
        hold_set = set(holding)
        while stack:
            cur = stack.pop()
            for nxt in neighbors[cur]:
                if nxt in hold_set and nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if seen != hold_set:
            return False
    return True


def smooth_decomposition(graph, decomposition) -> TreeDecomposition:
    """Equivalent decomposition of the same width where every bag has
    width+1 vertices and adjacent bags share exactly width of them."""
    omega = decomposition.width
    bags = [set(b) for b in decomposition.bags]
    edges = {tuple(sorted(e)) for e in decomposition.edges}

    def neighbors(i):
        for a, b in edges:
            if a == i:
                yield b
            elif b == i:
                yield a

    # grow small bags by borrowing from a neighbor
    changed = True
    while changed:
        changed = False
        for i, bag in enumerate(bags):
            if len(bag) >= omega + 1:
                continue
            for j in neighbors(i):
                extra = sorted(bags[j] - bag, key=ident_key)
                if extra:
                    bag.add(extra[0])
                    changed = True
                    break

    # contract duplicated adjacent bags
    while True:
        dup = next(
            ((i, j) for i, j in sorted(edges) if bags[i] == bags[j]), None
        )
        if dup is None:
            break
        i, j = dup
        edges.remove((i, j))
        for a, b in list(edges):
            if j in (a, b):
                other = a if b == j else b
                edges.remove((a, b))
                if other != i:
                    edges.add(tuple(sorted((i, other))))
        bags[j] = None

    live = [i for i, b in enumerate(bags) if b is not None]
    renum = {old: new for new, old in enumerate(live)}
    bags = [bags[i] for i in live]
    edges = {tuple(sorted((renum[a], renum[b]))) for a, b in edges}

    # split adjacency gaps one vertex swap at a time
    while True:
        gap = next(
            (
                (i, j)
                for i, j in sorted(edges)
                if len(bags[i] & bags[j]) < omega
            ),
            None,
        )
        if gap is None:
            break
        i, j = gap
        drop = max(bags[i] - bags[j], key=ident_key)
        gain = min(bags[j] - bags[i], key=ident_key)
        middle = (bags[i] - {drop}) | {gain}
        k = len(bags)
        bags.append(middle)
        edges.remove((i, j))
        edges.add(tuple(sorted((i, k))))
        edges.add(tuple(sorted((k, j))))

    result = TreeDecomposition(
        tuple(frozenset(b) for b in bags), tuple(sorted(edges)), omega
    )
    assert validate_decomposition(graph, result)
    for i, j in result.edges:
        assert len(result.bags[i] & result.bags[j]) == omega
    assert all(len(b) == omega + 1 for b in result.bags)
    return result


# ------------------------------------------------ minimal solution bounds


def verify_cutwidth_bound(network: SolutionNetwork, pattern: Pattern) -> bool:
    """True iff the exact cutwidth is at most 7 times the demand count."""
    _require_minimal(network, pattern)
    return cutwidth_exact(network).value <= 7 * pattern.num_demands


def _require_minimal(network, pattern):
    if not feasible(network, pattern):
        raise ValueError("network does not satisfy the pattern")
    if minimalize(network, pattern).edges != network.edges:
        raise ValueError("network is not minimal for the pattern")


# ---------------------------------------------------------- SCC structure


def scc_pattern(network: SolutionNetwork, pattern: Pattern, component) -> Pattern:
    """Induced demand pattern of one strongly connected component: for each
    demand path, its first and last visit to the component becomes an edge."""
    members = set(component)
    paths = fixed_path_family(network, pattern)
    edges = set()
    used = set()
    for demand in pattern.demands:
        walk = paths[demand]
        hits = [v for v in walk if v in members]
        if not hits:
            continue
        first, last = hits[0], hits[-1]
        lo = walk.index(first)
        hi = len(walk) - 1 - tuple(reversed(walk)).index(last)
        assert all(v in members for v in walk[lo : hi + 1]), (
            "demand path leaves and re-enters a strongly connected component"
        )
        if first != last:
            used.update((first, last))
            edges.add((first, last))
    return Pattern(
        sorted(used, key=ident_key), sorted(edges, key=edge_sort_key)
    )


def scc_arborescences(network: SolutionNetwork, component, component_pattern):
    """Split a strongly connected component into an in-arborescence and an
    out-arborescence rooted at its first terminal, plus the reversal of the
    in-only edges.

    Returns (into_root, out_of_root, reversed_in_only) as edge tuples; the
    union of the first two spans the whole component when the surrounding
    network is minimal.
    """
    members = set(component)
    inner = [
        (t, h) for (t, h) in network.edges if t in members and h in members
    ]
    sub = SolutionNetwork(network.host, inner)
    terms = sorted(component_pattern.terminals, key=ident_key)
    if not terms:
        raise ValueError("component pattern has no terminals")
    root = terms[0]
    others = [v for v in terms if v != root]
    gather = Pattern(terms, [(v, root) for v in others])
    spread = Pattern(terms, [(root, v) for v in others])
    a_in = minimalize(sub, gather)
    a_out = minimalize(sub, spread)
    out_set = set(a_out.edges)
    reversed_in = tuple(
        sorted(
            ((h, t) for (t, h) in a_in.edges if (t, h) not in out_set),
            key=edge_sort_key,
        )
    )
    return a_in.edges, a_out.edges, reversed_in


# ---------------------------------------------------- the core of a solution


def necessary_edges(
    network: SolutionNetwork, certificate: CaterpillarCertificate, spine_index: int
):
    """Per-leaf sets of edges whose removal severs the star demand of the
    given spine vertex, found by single-edge deletion."""
    if certificate is None:
        raise ValueError("a caterpillar certificate is required")
    if not 0 <= spine_index < certificate.spine_length:
        raise ValueError(f"spine index out of range: {spine_index}")
    root = certificate.spine[spine_index]
    leaves = sorted(
        certificate.stars[spine_index] - {root}, key=ident_key
    )
    outward = certificate.orientation == "out"
    result = {}
    for leaf in leaves:
        s, t = (root, leaf) if outward else (leaf, root)
        if not _connected(network.successor_map(), s, t):
            raise ValueError(
                f"network has no {s!r}->{t!r} path for the certificate star"
            )
        needed = []
        for edge in network.edges:
            reduced = network.without(*edge)
            if not _connected(reduced.successor_map(), s, t):
                needed.append(edge)
        result[leaf] = frozenset(needed)
    return result


def _connected(succ, s, t):
    if s not in succ:
        return False
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        if v == t:
            return True
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return t in seen


def core_decomposition(
    network: SolutionNetwork,
    pattern: Pattern,
    certificate: CaterpillarCertificate,
) -> CoreDecomposition:
    """Split a minimal solution into a core answering the spine-and-extra
    sub-pattern plus star-serving arborescences hanging off it."""
    if certificate is None:
        raise ValueError("a caterpillar certificate is required")
    if certificate.equivalent_pattern is not None:
        raise ValueError(
            "certificate must describe the pattern itself, not an equivalent"
        )
    if not validate_certificate(
        pattern,
        certificate,
        certificate.spine_length,
        len(certificate.extra_edges),
    ):
        raise ValueError("certificate does not match the pattern")
    _require_minimal(network, pattern)
    if certificate.orientation == "out":
        return _core_out(network, pattern, certificate)

    host = network.host
    rev_host = WeightedDigraph(
        host.vertices, [(h, t, c) for (t, h, c) in host.edges]
    )
    rev_net = SolutionNetwork(rev_host, [(h, t) for (t, h) in network.edges])
    rev_cert = CaterpillarCertificate(
        orientation="out",
        spine=tuple(reversed(certificate.spine)),
        stars=tuple(reversed(certificate.stars)),
        extra_edges=frozenset((h, t) for (t, h) in certificate.extra_edges),
        spine_length=certificate.spine_length,
    )
    got = _core_out(rev_net, pattern.reversed(), rev_cert)
    core = SolutionNetwork(host, [(h, t) for (t, h) in got.core.edges])
    core_pat = got.core_pattern.reversed()
    forest = tuple(
        (root, tuple(sorted(((h, t) for (t, h) in arc), key=edge_sort_key)))
        for root, arc in got.forest
    )
    decomp = CoreDecomposition(core, core_pat, forest, "in")
    return decomp


def _core_out(network, pattern, cert):
    spine = cert.spine
    length = cert.spine_length
    star_edges = set()
    for v, star in zip(spine, cert.stars):
        for leaf in star - {v}:
            star_edges.add((v, leaf))
    glue_edges = sorted(
        (d for d in pattern.demands if d not in star_edges), key=edge_sort_key
    )
    assert len(glue_edges) == max(0, length - 1) + len(cert.extra_edges)
    glue_terms = sorted({v for e in glue_edges for v in e}, key=ident_key)
    glue_pattern = Pattern(glue_terms, glue_edges)
    glue_net = minimalize(network, glue_pattern)
    paths = fixed_path_family(glue_net, glue_pattern)

    per_spine = [
        necessary_edges(network, cert, i) for i in range(length)
    ]
    core_edges = set(glue_net.edges)
    core_demands = set(glue_edges)
    for st in glue_edges:
        walk = paths[st]
        on_path = set(walk)
        path_edges = set(zip(walk, walk[1:]))
        for i in range(length):
            pooled = set()
            for per_leaf in per_spine[i].values():
                pooled |= per_leaf
            wants = {
                f
                for f in pooled
                if f not in path_edges and f[1] in on_path
            }
            if not wants:
                continue
            witnesses = [
                leaf
                for leaf, needed in per_spine[i].items()
                if wants <= needed
            ]
            assert witnesses, "no common witness leaf for the necessary edges"
            leaf = min(witnesses, key=ident_key)
            route = _lex_shortest_path(network, spine[i], leaf)
            core_edges.update(zip(route, route[1:]))
            core_demands.add((spine[i], leaf))

    core_terms = sorted({v for e in core_demands for v in e}, key=ident_key)
    core_pattern = Pattern(
        core_terms, sorted(core_demands, key=edge_sort_key)
    )
    core = minimalize(
        SolutionNetwork(network.host, sorted(core_edges, key=edge_sort_key)),
        core_pattern,
    )
    assert len(core_demands) <= (1 + length) * len(glue_edges) or not glue_edges

    leftover = [e for e in network.edges if e not in set(core.edges)]
    forest = _split_out_arborescences(leftover, core.vertex_set())
    return CoreDecomposition(core, core_pattern, forest, "out")


def _split_out_arborescences(edge_list, core_vertices):
    """Group leftover edges into components and certify each one as an
    out-arborescence touching the core only at its root."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, h in edge_list:
        for v in (t, h):
            parent.setdefault(v, v)
        a, b = find(t), find(h)
        if a != b:
            parent[a] = b
    groups = {}
    for e in edge_list:
        groups.setdefault(find(e[0]), []).append(e)

    forest = []
    for edges in groups.values():
        heads = {h for _, h in edges}
        verts = {v for e in edges for v in e}
        roots = sorted(verts - heads, key=ident_key)
        assert len(roots) == 1, "leftover component has no unique source"
        root = roots[0]
        indeg = {}
        for _, h in edges:
            indeg[h] = indeg.get(h, 0) + 1
        assert all(c == 1 for c in indeg.values()), (
            "leftover component has a doubly entered vertex"
        )
        succ = {}
        for t, h in edges:
            succ.setdefault(t, []).append(h)
        seen = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for w in succ.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        assert seen == verts, "leftover component is not spanned from its root"
        assert verts & set(core_vertices) <= {root}, (
            "arborescence touches the core away from its root"
        )
        forest.append((root, tuple(sorted(edges, key=edge_sort_key))))
    forest.sort(key=lambda item: ident_key(item[0]))
    return tuple(forest)


def validate_core_decomposition(
    network: SolutionNetwork,
    decomposition: CoreDecomposition,
    max_spine: int,
    max_extra: int,
) -> bool:
    """Re-check the three decomposition invariants against a network."""
    core = decomposition.core
    core_pattern = decomposition.core_pattern
    if core.edges:
        if not feasible(core, core_pattern):
            return False
        if minimalize(core, core_pattern).edges != core.edges:
            return False
    elif core_pattern.num_demands:
        return False
    bound = (1 + max_spine) * (max_spine + max_extra)
    if core_pattern.num_demands > bound:
        return False
    forest_edges = [e for _, arc in decomposition.forest for e in arc]
    if sorted(forest_edges) != sorted(
        set(network.edges) - set(core.edges)
    ):
        return False
    if len(forest_edges) != len(set(forest_edges)):
        return False
    outward = decomposition.orientation == "out"
    core_verts = set(core.vertex_set())
    for root, arc in decomposition.forest:
        edges = list(arc if outward else [(h, t) for (t, h) in arc])
        verts = {v for e in edges for v in e}
        heads = {h for _, h in edges}
        if verts - heads != {root}:
            return False
        counts = {}
        for _, h in edges:
            counts[h] = counts.get(h, 0) + 1
        if any(c != 1 for c in counts.values()):
            return False
        succ = {}
        for t, h in edges:
            succ.setdefault(t, []).append(h)
        seen = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for w in succ.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != verts:
            return False
        if not (verts & core_verts <= {root}):
            return False
    return True
