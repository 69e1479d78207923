"""Shared test utilities: seeded generators and independent cross-check oracles.

Oracles here are deliberately implemented on top of networkx or plain brute
force, never by calling the code under test, so the two routes stay
independent.
"""

from __future__ import annotations

import random
from itertools import combinations, permutations

import networkx as nx

from dsnet.graphs import Pattern, SolutionNetwork, WeightedDigraph
from dsnet.reductions import MccInstance


# ---------------------------------------------------------------- generators


def rng_graph(seed, n=None, m=None, max_cost=10) -> WeightedDigraph:
    rng = random.Random(seed)
    if n is None:
        n = rng.randint(3, 9)
    verts = [f"v{i}" for i in range(n)]
    all_pairs = [(a, b) for a in verts for b in verts if a != b]
    if m is None:
        m = rng.randint(n - 1, min(len(all_pairs), 3 * n))
    m = min(m, len(all_pairs))
    pairs = rng.sample(all_pairs, m)
    edges = [(t, h, rng.randint(0, max_cost)) for t, h in pairs]
    return WeightedDigraph(verts, edges)


def rng_pattern(seed, k=None, d=None) -> Pattern:
    """Random pattern; terminals are exactly the vertices used by demands."""
    rng = random.Random(seed)
    if k is None:
        k = rng.randint(2, 7)
    labels = [f"t{i}" for i in range(k)]
    all_pairs = [(a, b) for a in labels for b in labels if a != b]
    if d is None:
        d = rng.randint(1, min(len(all_pairs), 2 * k))
    d = max(1, min(d, len(all_pairs)))
    demands = rng.sample(all_pairs, d)
    used = [v for v in labels if any(v in dm for dm in demands)]
    return Pattern(used, demands)


def out_star_pattern(root, leaves) -> Pattern:
    return Pattern([root, *leaves], [(root, leaf) for leaf in leaves])


def in_star_pattern(root, leaves) -> Pattern:
    return Pattern([root, *leaves], [(leaf, root) for leaf in leaves])


def rng_star_instance(seed, orientation="out"):
    """Random feasible instance whose pattern is a single star."""
    rng = random.Random(seed)
    g = rng_graph(seed * 31 + 7, n=rng.randint(4, 9))
    verts = list(g.vertices)
    root = rng.choice(verts)
    others = [v for v in verts if v != root]
    leaves = rng.sample(others, rng.randint(1, min(4, len(others))))
    extra = []
    for leaf in leaves:
        src, dst = (root, leaf) if orientation == "out" else (leaf, root)
        if dst not in nx_reachable(g, src) and not g.has_edge(src, dst):
            extra.append((src, dst, rng.randint(0, 10)))
    if extra:
        g = WeightedDigraph(g.vertices, list(g.edges) + extra)
    if orientation == "out":
        pat = out_star_pattern(root, leaves)
    else:
        pat = in_star_pattern(root, leaves)
    return g, pat


# ------------------------------------------------------------------- oracles


def to_nx(g) -> nx.DiGraph:
    dg = nx.DiGraph()
    if isinstance(g, WeightedDigraph):
        dg.add_nodes_from(g.vertices)
        for t, h, c in g.edges:
            dg.add_edge(t, h, cost=c)
    elif isinstance(g, SolutionNetwork):
        dg.add_nodes_from(g.host.vertices)
        dg.add_edges_from(g.edges)
    elif isinstance(g, Pattern):
        dg.add_nodes_from(g.terminals)
        dg.add_edges_from(g.demands)
    else:
        raise TypeError(g)
    return dg


def nx_reachable(g, s) -> frozenset:
    dg = to_nx(g)
    return frozenset(nx.descendants(dg, s) | {s})


def nx_scc_arc_multiplicities(g):
    """Multiset of crossing-arc multiplicities, independent of component ids."""
    dg = to_nx(g)
    comp_of = {}
    for i, comp in enumerate(nx.strongly_connected_components(dg)):
        for v in comp:
            comp_of[v] = i
    counts = {}
    for t, h in dg.edges():
        a, b = comp_of[t], comp_of[h]
        if a != b:
            counts[(a, b)] = counts.get((a, b), 0) + 1
    return sorted(counts.values())


def nx_transitive_closure_pairs(p: Pattern) -> frozenset:
    dg = to_nx(p)
    closure = nx.transitive_closure(dg, reflexive=False)
    return frozenset((s, t) for s, t in closure.edges() if s != t)


def nx_closures_isomorphic(p1: Pattern, p2: Pattern) -> bool:
    c1 = nx.transitive_closure(to_nx(p1), reflexive=False)
    c2 = nx.transitive_closure(to_nx(p2), reflexive=False)
    c1.remove_edges_from(nx.selfloop_edges(c1))
    c2.remove_edges_from(nx.selfloop_edges(c2))
    return nx.is_isomorphic(c1, c2)


def brute_force_optimum_cost(g: WeightedDigraph, p: Pattern):
    """Reference optimum by scanning all edge subsets. Exponential; tiny inputs only."""
    best = None
    edges = list(g.edges)
    assert len(edges) <= 16
    for r in range(len(edges) + 1):
        for combo in combinations(edges, r):
            net = SolutionNetwork(g, [(t, h) for t, h, _ in combo])
            if _nx_feasible(net, p):
                cost = sum(c for _, _, c in combo)
                if best is None or cost < best:
                    best = cost
    return best


def _nx_feasible(net: SolutionNetwork, p: Pattern) -> bool:
    dg = to_nx(net)
    return all(nx.has_path(dg, s, t) for s, t in p.demands)


def permutation_cutwidth(edge_list, vertices):
    """Exact cutwidth by trying every vertex order. Factorial; tiny inputs only."""
    verts = list(vertices)
    assert len(verts) <= 8
    best = None
    for perm in permutations(verts):
        pos = {v: i for i, v in enumerate(perm)}
        width = 0
        for i in range(len(verts) - 1):
            cut = sum(
                mult
                for t, h, mult in edge_list
                if min(pos[t], pos[h]) <= i < max(pos[t], pos[h])
            )
            width = max(width, cut)
        if best is None or width < best:
            best = width
    return best


def brute_caterpillar(p: Pattern, max_spine) -> bool:
    """Definitional caterpillar test: try every spine ordering and every way
    of hanging the remaining vertices off it, both orientations."""
    verts = list(p.terminals)
    target = frozenset(p.demands)
    if not target:
        return True
    for out_mode in (True, False):
        for ln in range(1, max_spine + 1):
            for spine in permutations(verts, ln):
                rest = [v for v in verts if v not in spine]
                built = {(spine[i], spine[i + 1]) for i in range(ln - 1)}
                if not out_mode:
                    built = {(b, a) for a, b in built}
                for assign in _assignments_over(rest, ln):
                    edges = set(built)
                    for v, slot in zip(rest, assign):
                        if slot is None:
                            continue
                        root = spine[slot]
                        edges.add((root, v) if out_mode else (v, root))
                    if frozenset(edges) == target:
                        return True
    return False


def _assignments_over(rest, slots):
    if not rest:
        yield ()
        return
    for tail in _assignments_over(rest[1:], slots):
        yield (None, *tail)
        for s in range(slots):
            yield (s, *tail)


def brute_min_vertex_cover(p: Pattern):
    """Smallest cover by ascending-size lexicographic enumeration."""
    verts = sorted(p.terminals, key=str)
    und = {frozenset(d) for d in p.demands}
    for size in range(len(verts) + 1):
        for combo in combinations(verts, size):
            chosen = set(combo)
            if all(e & chosen for e in und):
                return size, combo
    raise AssertionError("unreachable")


def nx_max_matching_size(p: Pattern) -> int:
    g = nx.Graph()
    g.add_nodes_from(p.terminals)
    g.add_edges_from(p.demands)
    return len(nx.max_weight_matching(g, maxcardinality=True))


def random_tournament(seed, n) -> Pattern:
    rng = random.Random(seed)
    verts = [f"t{i}" for i in range(n)]
    demands = []
    for a, b in combinations(verts, 2):
        demands.append((a, b) if rng.random() < 0.5 else (b, a))
    return Pattern(verts, demands)


def classification_corpus(count, seed=0):
    """Mixed bag of patterns for dichotomy testing: random, stars, cycles,
    diamonds, caterpillars with noise."""
    from dsnet.classify import diamond_pattern, directed_cycle_pattern

    rng = random.Random(seed)
    out = []
    while len(out) < count:
        kind = rng.randrange(6)
        if kind == 0:
            out.append(rng_pattern(rng.randrange(10**6), k=rng.randint(2, 7)))
        elif kind == 1:
            leaves = [f"l{i}" for i in range(rng.randint(1, 5))]
            star = out_star_pattern("r", leaves)
            if rng.random() < 0.5:
                star = star.reversed()
            out.append(star)
        elif kind == 2:
            out.append(directed_cycle_pattern(rng.randint(2, 7)))
        elif kind == 3:
            dk = rng.choice(
                ["pure-out-diamond", "pure-in-diamond",
                 "flawed-out-diamond", "flawed-in-diamond"]
            )
            out.append(diamond_pattern(rng.randint(1, 4), dk))
        elif kind == 4:
            # caterpillar with a couple of extra edges thrown back in
            ln = rng.randint(1, 3)
            spine = [f"s{i}" for i in range(ln)]
            demands = [(spine[i], spine[i + 1]) for i in range(ln - 1)]
            leaf_id = 0
            for s in spine:
                for _ in range(rng.randint(0, 2)):
                    demands.append((s, f"w{leaf_id}"))
                    leaf_id += 1
            verts = sorted({v for d in demands for v in d}, key=str)
            if demands and rng.random() < 0.6:
                extra = [(b, a) for a, b in demands if (b, a) not in demands]
                rng.shuffle(extra)
                demands.extend(extra[: rng.randint(0, 2)])
            if demands:
                out.append(Pattern(verts, demands))
        else:
            a = rng_pattern(rng.randrange(10**6), k=rng.randint(2, 5))
            b = directed_cycle_pattern(rng.randint(2, 4))
            relabeled = Pattern(
                [f"z{v}" for v in b.terminals],
                [(f"z{s}", f"z{t}") for s, t in b.demands],
            )
            merged = list(a.demands) + list(relabeled.demands)
            verts = sorted({v for d in merged for v in d}, key=str)
            out.append(Pattern(verts, merged))
    return out


def rng_instance(seed, n_max=6, m_max=None, k_max=4, d_max=4):
    """Random solver instance: a graph plus a demand pattern over some of
    its vertices. May be infeasible."""
    rng = random.Random(seed)
    n = rng.randint(3, n_max)
    m_hi = min(2 * n, m_max) if m_max is not None else 2 * n
    g = rng_graph(seed * 101 + 13, n=n, m=rng.randint(n - 1, m_hi))
    verts = list(g.vertices)
    k = rng.randint(2, min(k_max, n))
    terms = rng.sample(verts, k)
    pairs = [(a, b) for a in terms for b in terms if a != b]
    d = rng.randint(1, min(d_max, len(pairs)))
    demands = rng.sample(pairs, d)
    used = sorted({v for dd in demands for v in dd})
    return g, Pattern(used, demands)


def rng_path_union(seed, d_max=5):
    """Acyclic union of up to d_max directed paths over a shared pool.

    Every path follows one global vertex order, so the union is a DAG.
    Returns (graph, path_count, paths)."""
    rng = random.Random(seed)
    pool = [f"p{i}" for i in range(rng.randint(4, 8))]
    order = list(pool)
    rng.shuffle(order)
    rank = {v: i for i, v in enumerate(order)}
    d = rng.randint(1, d_max)
    paths = []
    pairs = set()
    for _ in range(d):
        size = rng.randint(2, len(pool))
        walk = sorted(rng.sample(pool, size), key=rank.__getitem__)
        paths.append(tuple(walk))
        pairs.update(zip(walk, walk[1:]))
    g = WeightedDigraph(pool, [(t, h, 1) for t, h in sorted(pairs)])
    return g, d, paths


def rng_disjoint_path_union(seed, d_max=5):
    """Union of vertex-disjoint directed paths. Returns (graph, path_count)."""
    rng = random.Random(seed)
    d = rng.randint(1, d_max)
    verts = []
    pairs = []
    label = 0
    for _ in range(d):
        walk = []
        for _ in range(rng.randint(2, 4)):
            walk.append(f"q{label}")
            label += 1
        verts.extend(walk)
        pairs.extend(zip(walk, walk[1:]))
    g = WeightedDigraph(verts, [(t, h, 1) for t, h in pairs])
    return g, d


def rng_scc_rich(seed):
    """Several small strongly connected blobs wired forward along a block
    order, possibly with singleton blocks mixed in."""
    rng = random.Random(seed)
    blocks = []
    label = 0
    for _ in range(rng.randint(2, 4)):
        size = rng.randint(1, 4)
        members = [f"b{label + i}" for i in range(size)]
        label += size
        blocks.append(members)
    pairs = set()
    for members in blocks:
        if len(members) > 1:
            for a, b in zip(members, members[1:] + members[:1]):
                pairs.add((a, b))
            # the occasional chord keeps blob layouts nontrivial
            if len(members) == 4 and rng.random() < 0.5:
                pairs.add((members[0], members[2]))
    for i, src in enumerate(blocks[:-1]):
        for dst in blocks[i + 1 :]:
            for _ in range(rng.randint(0, 2)):
                pairs.add((rng.choice(src), rng.choice(dst)))
    verts = [v for b in blocks for v in b]
    g = WeightedDigraph(verts, [(t, h, 1) for t, h in sorted(pairs)])
    return g


def _patch_feasible(g: WeightedDigraph, p: Pattern, rng) -> WeightedDigraph:
    """Add direct demand arcs where the graph cannot serve a demand."""
    extra = []
    for s, t in p.demands:
        if t not in nx_reachable(g, s) and not g.has_edge(s, t):
            extra.append((s, t, rng.randint(1, 10)))
    if extra:
        g = WeightedDigraph(g.vertices, list(g.edges) + extra)
    return g


def rng_cycle_demand_instance(seed):
    """Feasible instance whose demands form a directed terminal cycle, so
    every minimal solution is strongly connected."""
    rng = random.Random(seed)
    g = rng_graph(seed * 77 + 3, n=rng.randint(4, 7))
    verts = list(g.vertices)
    k = rng.randint(2, min(4, len(verts)))
    terms = rng.sample(verts, k)
    demands = [(terms[i], terms[(i + 1) % k]) for i in range(k)]
    p = Pattern(terms, demands)
    return _patch_feasible(g, p, rng), p


def rng_caterpillar_instance(seed, max_spine=2, max_extra=1):
    """Feasible instance whose pattern is a caterpillar with at most
    max_spine spine vertices plus at most max_extra extra demands."""
    rng = random.Random(seed)
    g = rng_graph(seed * 53 + 11, n=rng.randint(5, 9))
    verts = list(g.vertices)
    ln = rng.randint(1, max_spine)
    outward = rng.random() < 0.5
    need = ln + rng.randint(1, 2)
    chosen = rng.sample(verts, min(need + 2, len(verts)))
    spine = chosen[:ln]
    pool = chosen[ln:]
    demands = list(zip(spine, spine[1:]))
    leaves_of = {}
    for i, v in enumerate(spine):
        take = rng.randint(0 if ln > 1 else 1, 2)
        leaves_of[v] = pool[:take]
        pool = pool[take:]
        for w in leaves_of[v]:
            demands.append((v, w) if outward else (w, v))
    if not demands:
        leaves_of[spine[0]] = [pool[0]]
        demands.append((spine[0], pool[0]) if outward else (pool[0], spine[0]))
    terms = sorted({v for d in demands for v in d})
    if rng.random() < 0.6 and max_extra:
        options = [
            (a, b)
            for a in terms
            for b in terms
            if a != b and (a, b) not in demands
        ]
        if options:
            demands.append(rng.choice(options))
    terms = sorted({v for d in demands for v in d})
    p = Pattern(terms, demands)
    return _patch_feasible(g, p, rng), p


def permutation_treewidth(pairs, vertices):
    """Exact treewidth by trying every elimination order. Factorial; tiny only."""
    verts = list(vertices)
    assert len(verts) <= 7
    if not verts:
        return 0
    base = {v: set() for v in verts}
    for t, h in pairs:
        if t != h:
            base[t].add(h)
            base[h].add(t)
    best = None
    for perm in permutations(verts):
        adj = {v: set(ns) for v, ns in base.items()}
        width = 0
        for v in perm:
            bag = adj.pop(v)
            width = max(width, len(bag))
            for a in bag:
                adj[a].discard(v)
                adj[a].update(bag - {a})
        if best is None or width < best:
            best = width
    return best


def rng_arborescence_union(seed, star_count=2, spread=3):
    """Union of star arborescences over a shared vertex pool, plus the star
    pattern and the per-demand root-to-leaf paths each arborescence fixes."""
    rng = random.Random(seed)
    pool = [f"v{i}" for i in range(4 + rng.randint(0, 4))]
    edge_costs = {}
    demands = []
    paths = {}
    for s in range(star_count):
        root = rng.choice(pool)
        out_mode = rng.random() < 0.5
        parent = {root: None}
        order = [root]
        for v in rng.sample([x for x in pool if x != root],
                            rng.randint(1, min(spread, len(pool) - 1))):
            parent[v] = rng.choice(order)
            order.append(v)
        leaves = [v for v in order if v != root]
        for leaf in rng.sample(leaves, rng.randint(1, len(leaves))):
            walk = [leaf]
            while walk[-1] != root:
                walk.append(parent[walk[-1]])
            walk.reverse()
            if out_mode:
                demands.append((root, leaf))
                paths[(root, leaf)] = tuple(walk)
            else:
                demands.append((leaf, root))
                paths[(leaf, root)] = tuple(reversed(walk))
        for child, par in parent.items():
            if par is None:
                continue
            pair = (par, child) if out_mode else (child, par)
            edge_costs.setdefault(pair, rng.randint(0, 10))
    demands = list(dict.fromkeys(demands))
    g = WeightedDigraph(pool, [(t, h, c) for (t, h), c in sorted(edge_costs.items())])
    used = sorted({v for d in demands for v in d})
    p = Pattern(used, demands)
    net = SolutionNetwork(g, list(edge_costs))
    return net, p, paths


def rng_mcc(seed, k=3, max_part=3):
    """Random multicolored clique instance with parts of size 1..max_part."""
    rng = random.Random(seed)
    parts = []
    for i in range(k):
        size = rng.randint(1, max_part)
        parts.append(tuple(f"p{i}n{j}" for j in range(size)))
    edges = []
    for i in range(k):
        for j in range(i + 1, k):
            for u in parts[i]:
                for v in parts[j]:
                    if rng.random() < 0.55:
                        edges.append((u, v))
    return MccInstance(parts, edges)


def scss_brute(graph, terminals, max_edges=16):
    """Cheapest edge subset inside which every terminal reaches every
    other, by exhaustive subset scan. Returns None when impossible."""
    edges = list(graph.edges)
    m = len(edges)
    assert m <= max_edges
    terms = list(terminals)
    best = None
    for mask in range(1 << m):
        cost = 0
        succ = {}
        for e in range(m):
            if mask >> e & 1:
                t, h, c = edges[e]
                cost += c
                succ.setdefault(t, []).append(h)
        if best is not None and cost >= best:
            continue
        ok = True
        for s in terms:
            seen = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for w in succ.get(v, ()):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if any(t not in seen for t in terms):
                ok = False
                break
        if ok:
            best = cost
    return best
