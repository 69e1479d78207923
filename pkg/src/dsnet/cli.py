"""Command-line front end.

Subcommands read instance documents from JSON files, run the library's
classifiers, solvers, and analyses, and print exactly one JSON object on
standard out, serialized with sorted keys and no extra whitespace so that
identical inputs produce identical bytes. Diagnostics go to standard error.

Exit codes: 0 success; 1 negative answer (infeasible instance, unsatisfied
solution, or no membership certificate); 2 malformed input document;
3 invalid command-line arguments; 4 a size guard refused the computation.

The JSON shapes produced and consumed here are documented as schemas in
the packaged ``schemas/`` directory.
"""

import argparse
import json
import random
import sys

from .classify import is_almost_caterpillar, is_almost_caterpillar_equivalent
from .graphs import (
    Pattern,
    SizeGuardError,
    SolutionNetwork,
    WeightedDigraph,
    feasible,
    minimalize,
)
from .reductions import (
    MccInstance,
    cycle_pattern_instance,
    expander_like_instance,
    mcc_to_flawed_diamond,
    mcc_to_pure_diamond,
)
from .solver import ilp_solve, solve_dp
from .structure import (
    core_decomposition,
    cutwidth_exact,
    treewidth_exact,
    validate_core_decomposition,
)

# classify/solve/analyze search spine+extra budgets up to this total when
# no explicit width is given; patterns beyond it must be solved with an
# explicit --treewidth
BUDGET_TOTAL = 8


class DocumentError(Exception):
    """An input document failed to parse; the message carries where."""

    def __init__(self, message, where=None):
        super().__init__(message if where is None else f"{where}: {message}")


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse wants to print usage and exit; surface a code 3 instead
    def error(self, message):
        raise _ArgumentError(message)


# ------------------------------------------------------- document parsing


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"invalid JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _expect_keys(obj, keys, where):
    if not isinstance(obj, dict):
        raise DocumentError(f"expected an object, got {type(obj).__name__}", where)
    for key in obj:
        if key not in keys:
            raise DocumentError(f"unknown key {key!r}", where)
    for key in keys:
        if key not in obj:
            raise DocumentError(f"missing key {key!r}", where)


def _string_list(items, where):
    if not isinstance(items, list):
        raise DocumentError("expected a list", where)
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, str) or not item:
            raise DocumentError("expected a nonempty string", f"{where}[{i}]")
        out.append(item)
    return out


def _pair_list(items, where):
    if not isinstance(items, list):
        raise DocumentError("expected a list", where)
    out = []
    for i, item in enumerate(items):
        spot = f"{where}[{i}]"
        if not isinstance(item, list) or len(item) != 2:
            raise DocumentError("expected a [tail, head] pair", spot)
        tail, head = item
        if not isinstance(tail, str) or not isinstance(head, str):
            raise DocumentError("endpoints must be strings", spot)
        out.append((tail, head))
    return out


def parse_instance(document):
    """Build the host graph and demand pattern from a plain JSON object.

    Raises DocumentError naming the offending field for anything malformed,
    including invariant violations such as duplicate vertex names, negative
    costs, or terminals missing from the graph.
    """
    _expect_keys(document, ("graph", "pattern"), "$")
    gdoc = document["graph"]
    _expect_keys(gdoc, ("vertices", "edges"), "$.graph")
    vertices = _string_list(gdoc["vertices"], "$.graph.vertices")
    seen = set()
    for name in vertices:
        if name in seen:
            raise DocumentError(f"duplicate vertex name {name!r}", "$.graph.vertices")
        seen.add(name)
    if not isinstance(gdoc["edges"], list):
        raise DocumentError("expected a list", "$.graph.edges")
    edges = []
    for i, item in enumerate(gdoc["edges"]):
        spot = f"$.graph.edges[{i}]"
        if not isinstance(item, list) or len(item) != 3:
            raise DocumentError("expected a [tail, head, cost] triple", spot)
        tail, head, cost = item
        if not isinstance(tail, str) or not isinstance(head, str):
            raise DocumentError("endpoints must be strings", spot)
        if isinstance(cost, bool) or not isinstance(cost, int):
            raise DocumentError(f"cost must be an integer, got {cost!r}", spot)
        if cost < 0:
            raise DocumentError(f"negative cost {cost}", spot)
        edges.append((tail, head, cost))
    pdoc = document["pattern"]
    _expect_keys(pdoc, ("terminals", "demands"), "$.pattern")
    terminals = _string_list(pdoc["terminals"], "$.pattern.terminals")
    demands = _pair_list(pdoc["demands"], "$.pattern.demands")
    try:
        graph = WeightedDigraph(vertices, edges)
    except ValueError as exc:
        raise DocumentError(str(exc), "$.graph") from exc
    try:
        pattern = Pattern(terminals, demands)
    except ValueError as exc:
        raise DocumentError(str(exc), "$.pattern") from exc
    for t in pattern.terminals:
        if not graph.has_vertex(t):
            raise DocumentError(
                f"terminal {t!r} is not a graph vertex", "$.pattern.terminals"
            )
    return graph, pattern


def serialize_instance(graph, pattern):
    """Plain JSON object for a host graph and pattern.

    Lists keep their stored order, so parsing a document and serializing
    the result normalizes key order and nothing else.
    """
    return {
        "graph": {
            "vertices": list(graph.vertices),
            "edges": [[t, h, c] for t, h, c in graph.edges],
        },
        "pattern": {
            "terminals": list(pattern.terminals),
            "demands": [[s, t] for s, t in pattern.demands],
        },
    }


def parse_solution(document):
    """Edge pair list from a solution document."""
    _expect_keys(document, ("edges",), "$")
    return _pair_list(document["edges"], "$.edges")


def _solution_network(graph, edge_pairs):
    try:
        return SolutionNetwork(graph, edge_pairs)
    except ValueError as exc:
        raise DocumentError(str(exc), "$.edges") from exc


# ------------------------------------------------------------ subcommands


def _emit(payload):
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _certify_budget(pattern):
    """Smallest total spine+extra budget the pattern certifies into,
    preferring small spines on ties. None when nothing fits the search."""
    try:
        for total in range(0, BUDGET_TOTAL + 1):
            for spine in range(0, total + 1):
                cert = is_almost_caterpillar(pattern, spine, total - spine)
                if cert is not None:
                    return spine, total - spine, cert
    except SizeGuardError:
        return None
    return None


def _cmd_classify(args):
    _, pattern = parse_instance(_load_json(args.instance))
    check = is_almost_caterpillar_equivalent if args.star else is_almost_caterpillar
    cert = check(pattern, args.max_spine, args.max_extra)
    if cert is None:
        shape = "equivalent to a caterpillar" if args.star else "a caterpillar"
        _emit(
            {
                "member": False,
                "reason": (
                    f"pattern is not {shape} of spine length at most "
                    f"{args.max_spine} plus at most {args.max_extra} extra edges"
                ),
            }
        )
        return 1
    payload = {
        "orientation": cert.orientation,
        "spine": list(cert.spine),
        "stars": [sorted(star) for star in cert.stars],
        "extra_edges": sorted([s, t] for s, t in cert.extra_edges),
        "spine_length": cert.spine_length,
        "equivalent_pattern": None,
    }
    if cert.equivalent_pattern is not None:
        payload["equivalent_pattern"] = {
            "terminals": list(cert.equivalent_pattern.terminals),
            "demands": [[s, t] for s, t in cert.equivalent_pattern.demands],
        }
    _emit({"member": True, "certificate": payload})
    return 0


def _cmd_solve(args):
    graph, pattern = parse_instance(_load_json(args.instance))
    if pattern.num_demands == 0:
        _emit({"cost": 0, "edges": [], "omega_used": 1})
        return 0
    if args.treewidth is not None:
        omega = args.treewidth
    else:
        found = _certify_budget(pattern)
        if found is None:
            raise _ArgumentError(
                "pattern did not certify into a caterpillar class within "
                f"total budget {BUDGET_TOTAL}; pass --treewidth"
            )
        spine, extra, _ = found
        omega = max(1, min(7 * (1 + spine) * (spine + extra), graph.num_vertices - 1))
    result = solve_dp(graph, pattern, width=omega)
    if result is None:
        _emit({"cost": None, "edges": None, "omega_used": omega})
        return 1
    net, cost = result
    _emit(
        {
            "cost": cost,
            "edges": [[t, h] for t, h in net.edges],
            "omega_used": omega,
        }
    )
    return 0


def _cmd_oracle(args):
    graph, pattern = parse_instance(_load_json(args.instance))
    if pattern.num_demands == 0:
        _emit({"cost": 0, "edges": []})
        return 0
    result = ilp_solve(graph, pattern)
    if result is None:
        _emit({"cost": None, "edges": None})
        return 1
    net, cost = result
    _emit({"cost": cost, "edges": [[t, h] for t, h in net.edges]})
    return 0


def _cmd_analyze(args):
    graph, pattern = parse_instance(_load_json(args.instance))
    nothing = {"cutwidth": None, "treewidth": None, "bounds": None, "core": None}
    if args.solution is not None:
        net = _solution_network(graph, parse_solution(_load_json(args.solution)))
        if not feasible(net, pattern):
            print("analyze: solution does not satisfy the pattern", file=sys.stderr)
            _emit(nothing)
            return 1
    elif pattern.num_demands == 0:
        net = SolutionNetwork(graph, [])
    else:
        result = ilp_solve(graph, pattern)
        if result is None:
            print("analyze: instance is infeasible", file=sys.stderr)
            _emit(nothing)
            return 1
        net = result[0]
    # the structural bounds are stated for minimal solutions, so shrink
    # whatever we were given first
    minimal = minimalize(net, pattern)
    cw = cutwidth_exact(minimal).value
    tw = treewidth_exact(minimal)[0]
    bounds = {
        "cw_7d": "pass" if cw <= 7 * pattern.num_demands else "fail",
        "tw_bound": None,
    }
    core = None
    found = _certify_budget(pattern)
    if found is not None:
        spine, extra, cert = found
        cap = 7 * (1 + spine) * (spine + extra)
        bounds["tw_bound"] = "pass" if tw <= cap else "fail"
        if pattern.num_demands:
            deco = core_decomposition(minimal, pattern, cert)
            core = {
                "orientation": deco.orientation,
                "core_edges": deco.core.num_edges,
                "core_demands": deco.core_pattern.num_demands,
                "forest_size": len(deco.forest),
                "valid": validate_core_decomposition(minimal, deco, spine, extra),
            }
    _emit({"cutwidth": cw, "treewidth": tw, "bounds": bounds, "core": core})
    return 0


def _random_mcc(rng, k):
    parts = []
    for i in range(k):
        size = rng.randint(1, 3)
        parts.append(tuple(f"p{i}n{j}" for j in range(size)))
    edges = []
    for i in range(k):
        for j in range(i + 1, k):
            for u in parts[i]:
                for v in parts[j]:
                    if rng.random() < 0.55:
                        edges.append((u, v))
    return MccInstance(parts, edges)


def _random_cycle_instance(rng, k):
    n = k + rng.randint(1, 3)
    vertices = [f"v{i}" for i in range(n)]
    pool = [(t, h) for t in vertices for h in vertices if t != h]
    count = rng.randint(n, min(len(pool), 3 * n))
    chosen = sorted(rng.sample(pool, count))
    graph = WeightedDigraph(
        vertices, [(t, h, rng.randint(0, 10)) for t, h in chosen]
    )
    return cycle_pattern_instance(graph, vertices[:k])


def _cmd_generate(args):
    rng = random.Random(args.seed)
    if args.kind in ("pure-diamond", "flawed-diamond"):
        if args.k < 2:
            raise _ArgumentError("--k must be at least 2 for diamond instances")
        build = (
            mcc_to_pure_diamond
            if args.kind == "pure-diamond"
            else mcc_to_flawed_diamond
        )
        out = build(_random_mcc(rng, args.k), orientation=args.orientation)
        graph, pattern = out.instance
    elif args.kind == "cycle":
        if args.k < 2:
            raise _ArgumentError("--k must be at least 2 for cycle instances")
        graph, pattern = _random_cycle_instance(rng, args.k)
    else:
        try:
            graph, pattern = expander_like_instance(args.k, args.seed)
        except ValueError as exc:
            raise _ArgumentError(str(exc)) from exc
    _emit(serialize_instance(graph, pattern))
    return 0


def _cmd_verify(args):
    graph, pattern = parse_instance(_load_json(args.instance))
    net = _solution_network(graph, parse_solution(_load_json(args.solution)))
    ok = feasible(net, pattern)
    minimal = ok and minimalize(net, pattern).edges == net.edges
    _emit({"feasible": ok, "minimal": minimal})
    return 0 if ok else 1


# --------------------------------------------------------------- wiring


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _build_parser():
    parser = _Parser(
        prog="dsnet",
        description=(
            "Exact solving and structural analysis of directed Steiner "
            "network instances."
        ),
    )
    parser.add_argument(
        "--jobs",
        type=_positive_int,
        default=1,
        metavar="N",
        help=(
            "worker budget for internal sweeps; output is identical for "
            "any value (currently everything runs in one process)"
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser(
        "classify",
        help="test whether the demand pattern fits a caterpillar class budget",
    )
    p.add_argument("instance", help="instance document (JSON)")
    p.add_argument(
        "--lambda",
        dest="max_spine",
        type=_nonnegative_int,
        required=True,
        metavar="L",
        help="largest allowed spine length",
    )
    p.add_argument(
        "--delta",
        dest="max_extra",
        type=_nonnegative_int,
        required=True,
        metavar="D",
        help="largest allowed number of extra edges",
    )
    p.add_argument(
        "--star",
        action="store_true",
        help="also accept patterns transitively equivalent to a member",
    )
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("solve", help="exact optimum via the layered solver")
    p.add_argument("instance", help="instance document (JSON)")
    p.add_argument(
        "--treewidth",
        type=_positive_int,
        metavar="W",
        help="interface width; derived from the pattern's class when omitted",
    )
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("oracle", help="reference optimum via integer programming")
    p.add_argument("instance", help="instance document (JSON)")
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser(
        "analyze",
        help="cutwidth, treewidth, bound checks, and core split of a minimal solution",
    )
    p.add_argument("instance", help="instance document (JSON)")
    p.add_argument(
        "--solution",
        metavar="FILE",
        help="solution document to analyze; solved from scratch when omitted",
    )
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("generate", help="emit a seeded instance document")
    p.add_argument(
        "kind",
        choices=("pure-diamond", "flawed-diamond", "cycle", "expander"),
        help="instance family",
    )
    p.add_argument(
        "--k",
        type=_positive_int,
        default=3,
        metavar="K",
        help=(
            "size parameter: part count for diamonds, terminal count for "
            "cycles, arc-degree (even, at least 4) for expanders"
        ),
    )
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument(
        "--orientation",
        choices=("out", "in"),
        default="out",
        help="diamond orientation (ignored for other kinds)",
    )
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser(
        "verify", help="check a solution document for feasibility and minimality"
    )
    p.add_argument("instance", help="instance document (JSON)")
    p.add_argument("solution", help="solution document (JSON)")
    p.set_defaults(handler=_cmd_verify)

    return parser


def run(argv=None):
    """Parse arguments, dispatch, and return the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _ArgumentError as exc:
        print(f"dsnet: {exc}", file=sys.stderr)
        return 3
    except DocumentError as exc:
        print(f"dsnet: {exc}", file=sys.stderr)
        return 2
    except SizeGuardError as exc:
        print(f"dsnet: size guard: {exc}", file=sys.stderr)
        return 4


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
