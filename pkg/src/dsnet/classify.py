"""Classification of demand patterns.

A pattern is "caterpillar-shaped" when its edges form a directed spine path
whose vertices root pairwise disjoint stars, all pointing the same way. The
relaxed classes allow a bounded set of extra edges, either directly or up to
transitive equivalence. This module decides membership in these classes,
produces re-checkable certificates, and, through decompose_or_obstruct,
constructively realizes the dichotomy: every pattern either gets a
certificate (for spine budget 2*size and extra budget 4*size^3 + 6*size^2)
or an obstruction (a cycle or diamond of the requested size) witnessed by an
identification partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .graphs import (
    Pattern,
    SizeGuardError,
    edge_sort_key,
    ident_key,
    transitive_closure,
    transitively_equivalent,
)

CLASSIFY_VERTEX_GUARD = 12

OBSTRUCTION_KINDS = (
    "cycle",
    "pure-out-diamond",
    "pure-in-diamond",
    "flawed-out-diamond",
    "flawed-in-diamond",
)


@dataclass(frozen=True)
class CaterpillarCertificate:
    """Witness that a pattern is a caterpillar plus at most a few extra edges.

    When equivalent_pattern is set, the certificate describes that pattern
    and additionally claims it is transitively equivalent to the classified
    one; otherwise it describes the classified pattern itself.
    """

    orientation: str
    spine: tuple
    stars: tuple  # per spine vertex: frozenset containing the vertex and its leaves
    extra_edges: frozenset
    spine_length: int
    equivalent_pattern: Optional[Pattern] = None


@dataclass(frozen=True)
class Obstruction:
    """Witness that a pattern contains a cycle or diamond of a given size.

    The witness partition, fed to identify_terminals, collapses the pattern
    into something transitively equivalent to the named obstruction.
    """

    kind: str
    size: int
    partition: tuple  # tuple of vertex tuples
    matching: tuple = ()
    stars: tuple = ()


@dataclass(frozen=True)
class StarDecomposition:
    stars: tuple  # (root, leaf tuple, orientation)
    vertex_cover: tuple
    cover_size: int


def _guard(pattern: Pattern, size_guard: int):
    if pattern.num_terminals > size_guard:
        raise SizeGuardError(
            f"classification limited to {size_guard} pattern vertices, "
            f"got {pattern.num_terminals}"
        )


# --------------------------------------------------------- caterpillar shape


def _out_recognize(n, edges, max_spine):
    """Recognize edge set as path-plus-out-stars; returns (spine, stars) or None.

    The spine is forced: exactly the vertices with positive out-degree, in
    the unique order their internal edges allow. Spine length is minimal.
    """
    if not edges:
        return ((), ())
    succ = [set() for _ in range(n)]
    indeg = [0] * n
    for u, v in edges:
        succ[u].add(v)
        indeg[v] += 1
    roots = [v for v in range(n) if succ[v]]
    root_set = set(roots)
    nxt = {}
    inner_indeg = {v: 0 for v in roots}
    for u in roots:
        inner = [v for v in succ[u] if v in root_set]
        if len(inner) > 1:
            return None
        if inner:
            nxt[u] = inner[0]
            inner_indeg[inner[0]] += 1
    starts = [u for u in roots if inner_indeg[u] == 0]
    if len(starts) != 1:
        return None
    spine = [starts[0]]
    seen = {starts[0]}
    while spine[-1] in nxt:
        v = nxt[spine[-1]]
        if v in seen:
            return None
        spine.append(v)
        seen.add(v)
    if len(spine) != len(roots) or len(spine) > max_spine:
        return None
    spine_set = seen
    pos = {v: i for i, v in enumerate(spine)}
    for u, v in edges:
        if u not in spine_set:
            return None
        if v in spine_set and pos[v] != pos[u] + 1:
            return None
    for v in range(n):
        if v not in spine_set and indeg[v] > 1:
            return None
    stars = tuple(
        frozenset({s} | {v for v in succ[s] if v not in spine_set}) for s in spine
    )
    return (tuple(spine), stars)


def _recognize(n, edges, max_spine, orientation):
    if orientation == "out":
        return _out_recognize(n, edges, max_spine)
    rec = _out_recognize(n, {(v, u) for u, v in edges}, max_spine)
    if rec is None:
        return None
    spine, stars = rec
    return (tuple(reversed(spine)), tuple(reversed(stars)))


def _best_shape(n, edges, max_spine):
    """Try both orientations; prefer the shorter spine, ties to out."""
    best = None
    for orientation in ("out", "in"):
        rec = _recognize(n, edges, max_spine, orientation)
        if rec is not None and (best is None or len(rec[0]) < len(best[1])):
            best = (orientation, rec[0], rec[1])
    return best


def _index_cert(pattern, orientation, spine, stars, extra):
    lab = pattern.terminals.__getitem__
    return CaterpillarCertificate(
        orientation=orientation,
        spine=tuple(lab(v) for v in spine),
        stars=tuple(frozenset(lab(v) for v in star) for star in stars),
        extra_edges=frozenset((lab(s), lab(t)) for s, t in extra),
        spine_length=len(spine),
    )


def is_caterpillar(pattern: Pattern, max_spine: int, size_guard=CLASSIFY_VERTEX_GUARD):
    """Certificate with no extra edges iff the pattern is a caterpillar
    with spine length at most max_spine; None otherwise."""
    _guard(pattern, size_guard)
    if max_spine < 0:
        raise ValueError("max_spine must be nonnegative")
    n = pattern.num_terminals
    edges = {(pattern.index(s), pattern.index(t)) for s, t in pattern.demands}
    best = _best_shape(n, edges, max_spine)
    if best is None:
        return None
    orientation, spine, stars = best
    return _index_cert(pattern, orientation, spine, stars, frozenset())


def is_almost_caterpillar(
    pattern: Pattern, max_spine: int, max_extra: int, size_guard=CLASSIFY_VERTEX_GUARD
):
    """Certificate iff removing at most max_extra edges leaves a caterpillar
    with spine length at most max_spine.

    Extra-edge subsets are enumerated smallest-first in a fixed order, so the
    returned certificate has the minimum possible number of extra edges.
    """
    _guard(pattern, size_guard)
    if max_spine < 0 or max_extra < 0:
        raise ValueError("budgets must be nonnegative")
    n = pattern.num_terminals
    ordered = sorted(pattern.demands, key=edge_sort_key)
    idx_edges = [(pattern.index(s), pattern.index(t)) for s, t in ordered]
    all_edges = set(idx_edges)
    for size in range(0, min(max_extra, len(idx_edges)) + 1):
        for removed in combinations(range(len(idx_edges)), size):
            extra = {idx_edges[i] for i in removed}
            best = _best_shape(n, all_edges - extra, max_spine)
            if best is not None:
                orientation, spine, stars = best
                return _index_cert(pattern, orientation, spine, stars, extra)
    return None


# ------------------------------------------------- membership up to closure


def _closure_masks(out, n):
    res = []
    for v in range(n):
        seen = 1 << v
        stack = [v]
        while stack:
            u = stack.pop()
            fresh = out[u] & ~seen
            while fresh:
                w = (fresh & -fresh).bit_length() - 1
                fresh &= fresh - 1
                seen |= 1 << w
                stack.append(w)
        res.append(seen & ~(1 << v))
    return res


def _mask_edges(masks, n):
    return {(u, v) for u in range(n) for v in range(n) if (masks[u] >> v) & 1}


def _edges_closure_equal(edges, n, target_masks):
    out = [0] * n
    for u, v in edges:
        out[u] |= 1 << v
    return _closure_masks(out, n) == target_masks


def _nonredundant_edges(closure, n):
    """Edges of a transitively closed digraph not implied by a two-step path."""
    out = set()
    for u in range(n):
        m = closure[u]
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            implied = False
            mid = closure[u] & ~(1 << v)
            while mid:
                w = (mid & -mid).bit_length() - 1
                mid &= mid - 1
                if w != u and (closure[w] >> v) & 1:
                    implied = True
                    break
            if not implied:
                out.add((u, v))
    return out


def _spines(closure, n, length):
    """All vertex sequences of the given length whose consecutive arcs are
    present, in lexicographic order."""
    if length == 0:
        yield ()
        return

    def extend(prefix, used):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        options = range(n) if not prefix else _mask_bits(closure[prefix[-1]])
        for v in options:
            if not used & (1 << v):
                prefix.append(v)
                yield from extend(prefix, used | (1 << v))
                prefix.pop()

    yield from extend([], 0)


def _mask_bits(mask):
    while mask:
        yield (mask & -mask).bit_length() - 1
        mask &= mask - 1


def is_almost_caterpillar_equivalent(
    pattern: Pattern, max_spine: int, max_extra: int, size_guard=CLASSIFY_VERTEX_GUARD
):
    """Certificate iff some pattern with an isomorphic transitive closure is
    a caterpillar plus at most max_extra edges.

    Search space: subgraphs of the transitive closure whose own closure is
    the full closure. Any qualifying pattern can be relabeled into this
    space, so the search is complete. Enumerated as caterpillar structure
    plus extra edges, with the closure's non-redundant edges forced into
    every candidate.
    """
    _guard(pattern, size_guard)
    direct = is_almost_caterpillar(pattern, max_spine, max_extra, size_guard)
    if direct is not None:
        return CaterpillarCertificate(
            orientation=direct.orientation,
            spine=direct.spine,
            stars=direct.stars,
            extra_edges=direct.extra_edges,
            spine_length=direct.spine_length,
            equivalent_pattern=pattern,
        )
    n = pattern.num_terminals
    base = [0] * n
    for s, t in pattern.demands:
        base[pattern.index(s)] |= 1 << pattern.index(t)
    closure = _closure_masks(base, n)
    closure_edges = _mask_edges(closure, n)
    mandatory = _nonredundant_edges(closure, n)
    rev = [0] * n
    for u in range(n):
        m = closure[u]
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            rev[v] |= 1 << u
    out_needers = sum(1 for v in range(n) if closure[v])
    in_needers = sum(1 for v in range(n) if rev[v])
    for orientation in ("out", "in"):
        needers = out_needers if orientation == "out" else in_needers
        for lam0 in range(0, max_spine + 1):
            # every emitting vertex off the spine costs one extra edge
            if needers - lam0 > max_extra:
                continue
            for spine in _spines(closure, n, lam0):
                cert = _search_fixed_spine(
                    pattern, closure, closure_edges, mandatory, n, orientation,
                    spine, max_extra,
                )
                if cert is not None:
                    return cert
    return None


def _search_fixed_spine(
    pattern, closure, closure_edges, mandatory, n, orientation, spine, max_extra
):
    spine_set = set(spine)
    path_arcs = set(zip(spine, spine[1:]))
    # star-coverable mandatory edges have their root end on the spine
    fixed = set()
    for u, v in mandatory:
        if (u, v) in path_arcs:
            continue
        root, leaf = (u, v) if orientation == "out" else (v, u)
        if root not in spine_set or leaf in spine_set:
            fixed.add((u, v))
    if len(fixed) > max_extra:
        return None
    others = [v for v in range(n) if v not in spine_set]
    choice_lists = []
    for w in others:
        opts = [None]
        for r in spine:
            arc_ok = (closure[r] >> w) & 1 if orientation == "out" else (closure[w] >> r) & 1
            if arc_ok:
                opts.append(r)
        choice_lists.append(opts)

    def assignments(i, current):
        if i == len(others):
            yield dict(current)
            return
        for opt in choice_lists[i]:
            current.append((others[i], opt))
            yield from assignments(i + 1, current)
            current.pop()

    for assign in assignments(0, []):
        star_arcs = set()
        for w, r in assign.items():
            if r is None:
                continue
            star_arcs.add((r, w) if orientation == "out" else (w, r))
        cat = path_arcs | star_arcs
        must = mandatory - cat
        if len(must) > max_extra:
            continue
        pool = sorted(closure_edges - cat - must)
        budget = max_extra - len(must)
        for esize in range(0, budget + 1):
            for extra in combinations(pool, esize):
                extra_set = must | set(extra)
                if _edges_closure_equal(cat | extra_set, n, closure):
                    return _build_equivalent_cert(
                        pattern, orientation, spine, assign, cat, extra_set
                    )
    return None


def _build_equivalent_cert(pattern, orientation, spine, assign, cat_edges, extra_set):
    terms = pattern.terminals
    lab = terms.__getitem__
    demands = sorted(
        [(lab(u), lab(v)) for u, v in cat_edges | extra_set], key=edge_sort_key
    )
    equivalent = Pattern(terms, demands)
    stars = []
    for r in spine:
        members = {r} | {w for w, owner in assign.items() if owner == r}
        stars.append(frozenset(lab(v) for v in members))
    return CaterpillarCertificate(
        orientation=orientation,
        spine=tuple(lab(v) for v in spine),
        stars=tuple(stars),
        extra_edges=frozenset((lab(u), lab(v)) for u, v in extra_set),
        spine_length=len(spine),
        equivalent_pattern=equivalent,
    )


# --------------------------------------------------- covers, matchings, stars


def _und_masks(pattern):
    n = pattern.num_terminals
    und = [0] * n
    for s, t in pattern.demands:
        a, b = pattern.index(s), pattern.index(t)
        und[a] |= 1 << b
        und[b] |= 1 << a
    return und


def max_matching(pattern: Pattern):
    """Maximum matching of the underlying undirected demand structure.

    Returns (size, edges) where edges are directed demands, one per matched
    pair, in a fixed order.
    """
    n = pattern.num_terminals
    und = _und_masks(pattern)
    memo = {}

    def best(mask):
        got = memo.get(mask)
        if got is not None:
            return got
        res = 0
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            nb = und[v] & mask
            if nb:
                rest = mask & ~(1 << v)
                res = best(rest)
                nn = nb
                while nn:
                    w = (nn & -nn).bit_length() - 1
                    nn &= nn - 1
                    cand = 1 + best(rest & ~(1 << w))
                    if cand > res:
                        res = cand
                break
            m &= m - 1
        memo[mask] = res
        return res

    full = (1 << n) - 1
    size = best(full)
    pairs = []
    mask, left = full, size
    while left:
        v = next(v for v in range(n) if (mask >> v) & 1 and und[v] & mask)
        rest = mask & ~(1 << v)
        if best(rest) == left:
            mask = rest
            continue
        w = next(
            w for w in _mask_bits(und[v] & mask) if 1 + best(rest & ~(1 << w)) == left
        )
        pairs.append((v, w))
        mask = rest & ~(1 << w)
        left -= 1
    directed = []
    for v, w in pairs:
        a, b = pattern.terminals[v], pattern.terminals[w]
        cands = [d for d in ((a, b), (b, a)) if pattern.has_demand(*d)]
        directed.append(min(cands, key=edge_sort_key))
    return size, tuple(sorted(directed, key=edge_sort_key))


def _cover_exists(edge_masks, budget, allowed):
    if not edge_masks:
        return True
    if budget == 0:
        return False
    first = edge_masks[0]
    usable = first & allowed
    if not usable:
        return False
    for v in _mask_bits(usable):
        rest = [e for e in edge_masks[1:] if not (e >> v) & 1]
        if _cover_exists(rest, budget - 1, allowed):
            return True
    return False


def vertex_cover_number(pattern: Pattern):
    """Minimum vertex cover of the underlying undirected demand structure;
    ties broken toward the lexicographically smallest sorted cover."""
    n = pattern.num_terminals
    order = sorted(range(n), key=lambda i: ident_key(pattern.terminals[i]))
    seen = set()
    edge_masks = []
    for s, t in pattern.demands:
        a, b = pattern.index(s), pattern.index(t)
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            edge_masks.append((1 << a) | (1 << b))
    full = (1 << n) - 1
    size = 0
    while not _cover_exists(edge_masks, size, full):
        size += 1
    chosen = []
    remaining = edge_masks
    budget = size
    for rank, v in enumerate(order):
        if budget == 0:
            break
        later = 0
        for u in order[rank + 1 :]:
            later |= 1 << u
        without = [e for e in remaining if not (e >> v) & 1]
        if _cover_exists(without, budget - 1, later):
            chosen.append(pattern.terminals[v])
            remaining = without
            budget -= 1
    return size, tuple(chosen)


def star_decomposition(pattern: Pattern) -> StarDecomposition:
    """Split the demands into out- and in-stars rooted at a minimum vertex
    cover; every demand lands in exactly one star."""
    tau, cover = vertex_cover_number(pattern)
    cover_order = {v: i for i, v in enumerate(cover)}
    stars = []
    cover_set = set(cover)
    for x in cover:
        out_leaves = []
        in_leaves = []
        for s, t in pattern.demands:
            if s == x and (t not in cover_set or cover_order[x] < cover_order[t]):
                out_leaves.append(t)
            if t == x and (s not in cover_set or cover_order[x] < cover_order[s]):
                in_leaves.append(s)
        if out_leaves:
            stars.append((x, tuple(sorted(out_leaves, key=ident_key)), "out"))
        if in_leaves:
            stars.append((x, tuple(sorted(in_leaves, key=ident_key)), "in"))
    return StarDecomposition(stars=tuple(stars), vertex_cover=cover, cover_size=tau)


def identify_terminals(pattern: Pattern, partition) -> Pattern:
    """Collapse each partition class to a single vertex; drop the demands
    that turn into self-loops or duplicates, and classes left isolated."""
    classes = [tuple(sorted(cls, key=ident_key)) for cls in partition]
    flat = [v for cls in classes for v in cls]
    if any(not cls for cls in classes):
        raise ValueError("empty partition class")
    if len(flat) != len(set(flat)) or set(flat) != set(pattern.terminals):
        raise ValueError("partition must cover the pattern vertices exactly")
    class_of = {}
    for cls in classes:
        for v in cls:
            class_of[v] = cls
    demands = []
    seen = set()
    for s, t in pattern.demands:
        cs, ct = class_of[s], class_of[t]
        if cs != ct and (cs, ct) not in seen:
            seen.add((cs, ct))
            demands.append((cs, ct))
    used = sorted(
        {c for d in demands for c in d},
        key=lambda cls: tuple(ident_key(v) for v in cls),
    )
    return Pattern(used, demands)


def hamiltonian_path_semicomplete(pattern: Pattern):
    """Hamiltonian path of a semicomplete digraph, by insertion."""
    verts = pattern.terminals
    for u, v in combinations(verts, 2):
        if not (pattern.has_demand(u, v) or pattern.has_demand(v, u)):
            raise ValueError(f"not semicomplete: no arc between {u!r} and {v!r}")
    order = []
    for v in verts:
        if not order:
            order.append(v)
            continue
        if pattern.has_demand(v, order[0]):
            order.insert(0, v)
            continue
        if pattern.has_demand(order[-1], v):
            order.append(v)
            continue
        placed = False
        for i in range(len(order) - 1):
            if pattern.has_demand(order[i], v) and pattern.has_demand(v, order[i + 1]):
                order.insert(i + 1, v)
                placed = True
                break
        if not placed:  # cannot happen in a semicomplete digraph
            raise AssertionError("insertion failed")
    for a, b in zip(order, order[1:]):
        if not pattern.has_demand(a, b):
            raise AssertionError("constructed order is not a path")
    return tuple(order)


# ----------------------------------------------------- canonical obstructions


def directed_cycle_pattern(length: int) -> Pattern:
    """Directed cycle as a pattern; a length-1 cycle collapses to nothing."""
    if length < 1:
        raise ValueError("cycle length must be positive")
    if length == 1:
        return Pattern([], [])
    verts = [f"c{i}" for i in range(length)]
    return Pattern(verts, [(verts[i], verts[(i + 1) % length]) for i in range(length)])


def diamond_pattern(size: int, kind: str) -> Pattern:
    """Canonical diamond: two roots fully joined to a shared leaf row, with
    an optional apex feeding (or fed by) both roots."""
    if size < 1:
        raise ValueError("diamond size must be positive")
    if kind not in OBSTRUCTION_KINDS or kind == "cycle":
        raise ValueError(f"not a diamond kind: {kind}")
    leaves = [f"l{i}" for i in range(size)]
    demands = [(r, leaf) for r in ("r1", "r2") for leaf in leaves]
    verts = ["r1", "r2", *leaves]
    if kind.startswith("flawed"):
        verts.append("x")
        demands += [("x", "r1"), ("x", "r2")]
    if kind.endswith("in-diamond"):
        demands = [(t, s) for s, t in demands]
    return Pattern(verts, demands)


# --------------------------------------------------------------- validators


def validate_certificate(
    pattern: Pattern, cert: CaterpillarCertificate, max_spine: int, max_extra: int
) -> bool:
    """Re-check a caterpillar certificate from scratch."""
    target = cert.equivalent_pattern if cert.equivalent_pattern is not None else pattern
    if cert.orientation not in ("out", "in"):
        return False
    spine = cert.spine
    if len(spine) != cert.spine_length or cert.spine_length > max_spine:
        return False
    if len(cert.stars) != len(spine) or len(set(spine)) != len(spine):
        return False
    terms = set(target.terminals)
    members = set()
    for v, star in zip(spine, cert.stars):
        if v not in star or not star <= terms:
            return False
        if members & star:
            return False
        members |= star
    cat_edges = set(zip(spine, spine[1:]))
    for v, star in zip(spine, cert.stars):
        for w in star - {v}:
            cat_edges.add((v, w) if cert.orientation == "out" else (w, v))
    extra = set(cert.extra_edges)
    if len(extra) > max_extra or (extra & cat_edges):
        return False
    if set(target.demands) != cat_edges | extra:
        return False
    if cert.equivalent_pattern is not None and not transitively_equivalent(
        pattern, target
    ):
        return False
    return True


def validate_obstruction(pattern: Pattern, obstruction: Obstruction) -> bool:
    """Re-check an obstruction witness: identifying along the partition must
    produce something transitively equivalent to the named obstruction."""
    if obstruction.kind not in OBSTRUCTION_KINDS or obstruction.size < 1:
        return False
    expected_classes = obstruction.size
    if obstruction.kind != "cycle":
        expected_classes = obstruction.size + (
            3 if obstruction.kind.startswith("flawed") else 2
        )
    if len(obstruction.partition) != expected_classes:
        return False
    try:
        identified = identify_terminals(pattern, obstruction.partition)
    except ValueError:
        return False
    if obstruction.kind == "cycle":
        canonical = directed_cycle_pattern(obstruction.size)
    else:
        canonical = diamond_pattern(obstruction.size, obstruction.kind)
    return transitively_equivalent(identified, canonical)


# ------------------------------------------------ decomposition / dichotomy


def _aligned_pairs(first, second, count):
    """Pick count classes pairing members of two leaf lists; vertices present
    in both lists are paired with themselves, first."""
    shared = sorted(set(first) & set(second), key=ident_key)
    only_a = sorted(set(first) - set(second), key=ident_key)
    only_b = sorted(set(second) - set(first), key=ident_key)
    classes = []
    for v in shared[:count]:
        classes.append((v,))
    need = count - len(classes)
    for a, b in zip(only_a[:need], only_b[:need]):
        classes.append((a, b))
    if len(classes) != count:
        raise AssertionError("not enough leaves to build the obstruction")
    return classes


def _cycle_from_matching(pattern, matching, size):
    edges = list(matching[:size])
    classes = []
    for i in range(size):
        head = edges[i][1]
        tail = edges[(i + 1) % size][0]
        cls = {head, tail}
        classes.append(cls)
    placed = {v for cls in classes for v in cls}
    leftovers = [v for v in pattern.terminals if v not in placed]
    classes[0].update(leftovers)
    return Obstruction(
        kind="cycle",
        size=size,
        partition=tuple(tuple(sorted(c, key=ident_key)) for c in classes),
        matching=tuple(edges),
    )


def _cycle_from_two_stars(pattern, in_root, in_leaves, out_root, out_leaves, size):
    """Large in-star plus large out-star rooted in the cover: identifying
    the roots and pairing leaves yields a strongly connected blob on `size`
    classes, which is a cycle obstruction."""
    leaf_classes = _aligned_pairs(in_leaves, out_leaves, size - 1)
    root_class = {in_root, out_root}
    placed = {v for cls in leaf_classes for v in cls} | root_class
    root_class.update(v for v in pattern.terminals if v not in placed)
    partition = [tuple(sorted(root_class, key=ident_key))] + list(leaf_classes)
    return Obstruction(
        kind="cycle",
        size=size,
        partition=tuple(partition),
        stars=((out_root, tuple(out_leaves)), (in_root, tuple(in_leaves))),
    )


def _diamond_obstruction(cleaned, r1, r2, leaves1, leaves2, size, flip):
    """Partition per the two-big-stars construction. Works on the cleaned
    pattern; valid for the original too, since identification followed by
    closure only depends on the closure of the input."""
    chosen = _aligned_pairs(leaves1, leaves2, size)
    star_vertices = {r1, r2} | {v for cls in chosen for v in cls}
    succ = {v: set() for v in cleaned.terminals}
    for s, t in cleaned.demands:
        succ[s].add(t)

    def reach(v):
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in succ[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        seen.discard(v)
        return seen

    y1 = reach(r1) - star_vertices
    y2 = reach(r2) - star_vertices
    w1 = y1 - y2
    w2 = y2 - y1
    shared = y1 & y2
    rest = [
        v
        for v in cleaned.terminals
        if v not in star_vertices and v not in y1 and v not in y2
    ]
    side1 = {*w1, r1}
    side2 = {*w2, r2}
    hits1 = any(reach(u) & side1 for u in rest)
    hits2 = any(reach(u) & side2 for u in rest)
    class_r1 = {r1} | w1
    class_r2 = {r2} | w2
    leaf_classes = [set(c) for c in chosen]
    leaf_classes[0] |= shared
    apex = None
    if rest and hits1 and hits2:
        apex = set(rest)
        kind = "flawed-out-diamond"
    else:
        kind = "pure-out-diamond"
        if rest:
            if hits1:
                class_r1 |= set(rest)
            else:
                class_r2 |= set(rest)
    partition = [class_r1, class_r2, *leaf_classes]
    if apex is not None:
        partition.append(apex)
    if flip:
        kind = kind.replace("out", "in")
    return Obstruction(
        kind=kind,
        size=size,
        partition=tuple(tuple(sorted(c, key=ident_key)) for c in partition),
        stars=((r1, tuple(leaves1)), (r2, tuple(leaves2))),
    )


def _cleaned_pattern(pattern: Pattern, cover) -> Pattern:
    """Transitively equivalent pattern: closure inside the cover, original
    cover-to-rest edges, then redundant ones stripped in a fixed order."""
    cover_set = set(cover)
    closed = transitive_closure(pattern)
    inside = [
        (s, t) for s, t in closed.demands if s in cover_set and t in cover_set
    ]
    boundary = [
        (s, t) for s, t in pattern.demands if s not in cover_set or t not in cover_set
    ]
    current = set(inside) | set(boundary)
    succ = {v: set() for v in pattern.terminals}
    for s, t in current:
        succ[s].add(t)
    for s, t in sorted(boundary, key=edge_sort_key):
        succ[s].discard(t)
        if _path_exists(succ, s, t):
            current.discard((s, t))
        else:
            succ[s].add(t)
    return Pattern(pattern.terminals, sorted(current, key=edge_sort_key))


def _path_exists(succ, s, t):
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        if u == t:
            return True
        for w in succ[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def decompose_or_obstruct(pattern: Pattern, size: int):
    """Either certify membership with spine budget 2*size and extra budget
    4*size^3 + 6*size^2, or produce an obstruction of the given size.

    Follows the constructive dichotomy: a large matching yields a cycle; a
    small matching yields a small cover, a cleaned equivalent pattern, and
    then either a certificate assembled from the cover's large stars, or a
    cycle/diamond obstruction found along the way.
    """
    if size < 1:
        raise ValueError("obstruction size must be at least 1")
    alpha = size
    matched, matching = max_matching(pattern)
    if matched >= alpha:
        return _cycle_from_matching(pattern, matching, alpha)
    tau, cover = vertex_cover_number(pattern)
    cleaned = _cleaned_pattern(pattern, cover)
    cover_set = set(cover)
    out_by_root = {x: [] for x in cover}
    in_by_root = {x: [] for x in cover}
    for s, t in cleaned.demands:
        if s in cover_set and t not in cover_set:
            out_by_root[s].append(t)
        elif t in cover_set and s not in cover_set:
            in_by_root[t].append(s)
    for x in cover:
        out_by_root[x].sort(key=ident_key)
        in_by_root[x].sort(key=ident_key)
    max_out = max((len(v) for v in out_by_root.values()), default=0)
    max_in = max((len(v) for v in in_by_root.values()), default=0)
    if alpha >= 2 and max_out >= alpha - 1 and max_in >= alpha - 1:
        out_root = next(x for x in cover if len(out_by_root[x]) >= alpha - 1)
        in_root = next(x for x in cover if len(in_by_root[x]) >= alpha - 1)
        return _cycle_from_two_stars(
            pattern,
            in_root,
            in_by_root[in_root][: alpha - 1],
            out_root,
            out_by_root[out_root][: alpha - 1],
            alpha,
        )
    if max_in <= alpha - 2 or max_in == 0:
        result = _decompose_oriented(pattern, cleaned, cover, alpha, flip=False)
    else:
        result = _decompose_oriented(
            pattern.reversed(), cleaned.reversed(), cover, alpha, flip=True
        )
    return result


def _decompose_oriented(pattern, cleaned, cover, alpha, flip):
    """Out-orientation core; the in case runs this on the reversed pattern
    and un-reverses the result."""
    cover_set = set(cover)
    edge_i = [
        (s, t)
        for s, t in cleaned.demands
        if (s in cover_set) != (t in cover_set)
    ]
    tainted = {s for s, t in edge_i if t in cover_set}
    f1 = {
        (s, t)
        for s, t in edge_i
        if (s if s not in cover_set else t) in tainted
    }
    leaves = {}
    for x in cover:
        leaves[x] = sorted(
            (t for s, t in edge_i if s == x and (s, t) not in f1), key=ident_key
        )
    big = [x for x in cover if len(leaves[x]) >= alpha]
    for u, v in combinations(big, 2):
        if not cleaned.has_demand(u, v) and not cleaned.has_demand(v, u):
            obs = _diamond_obstruction(
                cleaned, u, v, leaves[u], leaves[v], alpha, flip
            )
            return obs
    assigned = set()
    for x in big:
        overlap = assigned & set(leaves[x])
        if overlap:  # ruled out by the star-disjointness argument
            raise AssertionError(f"big stars share leaves: {sorted(overlap)}")
        assigned |= set(leaves[x])
    f2 = set(f1)
    for x in cover:
        if x not in big:
            f2 |= {(x, t) for t in leaves[x]}
    if not big:
        spine = ()
    elif len(big) == 1:
        spine = (big[0],)
    else:
        restricted = Pattern(
            sorted(big, key=ident_key),
            [(u, v) for u in big for v in big if u != v and cleaned.has_demand(u, v)],
        )
        spine = hamiltonian_path_semicomplete(restricted)
    spine_arcs = set(zip(spine, spine[1:]))
    f3 = set(f2)
    for s, t in cleaned.demands:
        if s in cover_set and t in cover_set and (s, t) not in spine_arcs:
            f3.add((s, t))
    stars = tuple(frozenset({x, *leaves[x]}) for x in spine)
    if not flip:
        return CaterpillarCertificate(
            orientation="out",
            spine=spine,
            stars=stars,
            extra_edges=frozenset(f3),
            spine_length=len(spine),
            equivalent_pattern=cleaned,
        )
    return CaterpillarCertificate(
        orientation="in",
        spine=tuple(reversed(spine)),
        stars=tuple(reversed(stars)),
        extra_edges=frozenset((t, s) for s, t in f3),
        spine_length=len(spine),
        equivalent_pattern=cleaned.reversed(),
    )
