"""Command-line front end: document parsing, subcommand behavior, exit
codes, and the shipped output schemas."""

import contextlib
import io
import json
import tempfile
from importlib.resources import files
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsnet.cli import (
    DocumentError,
    parse_instance,
    parse_solution,
    run,
    serialize_instance,
)
from dsnet.graphs import SolutionNetwork, feasible

from helpers import rng_instance

seeds = st.integers(min_value=0, max_value=10**6)


def load_schema(name):
    src = (files("dsnet") / "schemas" / f"{name}.schema.json").read_text()
    return json.loads(src)


def write_doc(directory, name, doc):
    target = Path(directory) / name
    target.write_text(json.dumps(doc), encoding="utf-8")
    return str(target)


def trivial_path_doc():
    return {
        "graph": {
            "vertices": ["s", "a", "t"],
            "edges": [["s", "a", 1], ["a", "t", 1]],
        },
        "pattern": {"terminals": ["s", "t"], "demands": [["s", "t"]]},
    }


def cycle5_doc():
    terms = [f"c{i}" for i in range(5)]
    return {
        "graph": {"vertices": terms, "edges": []},
        "pattern": {
            "terminals": terms,
            "demands": [[terms[i], terms[(i + 1) % 5]] for i in range(5)],
        },
    }


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(list(argv))
    return code, out.getvalue(), err.getvalue()


def only_json(out):
    payload = json.loads(out)
    # canonical form: sorted keys, compact separators, one trailing newline
    assert out == json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    return payload


class TestParseInstance:
    def test_minimal_valid_document_parses(self):
        graph, pattern = parse_instance(trivial_path_doc())
        assert graph.num_vertices == 3
        assert pattern.demands == (("s", "t"),)

    def test_empty_document_parses(self):
        graph, pattern = parse_instance(
            {
                "graph": {"vertices": [], "edges": []},
                "pattern": {"terminals": [], "demands": []},
            }
        )
        assert graph.num_vertices == 0
        assert pattern.num_demands == 0

    def test_duplicate_vertex_named_in_error(self):
        doc = trivial_path_doc()
        doc["graph"]["vertices"].append("a")
        with pytest.raises(DocumentError, match="'a'"):
            parse_instance(doc)

    def test_negative_cost_rejected_with_index(self):
        doc = trivial_path_doc()
        doc["graph"]["edges"][1][2] = -3
        with pytest.raises(DocumentError, match=r"edges\[1\].*negative cost -3"):
            parse_instance(doc)

    def test_boolean_cost_rejected(self):
        doc = trivial_path_doc()
        doc["graph"]["edges"][0][2] = True
        with pytest.raises(DocumentError, match="integer"):
            parse_instance(doc)

    @pytest.mark.parametrize(
        "mutate, spot",
        [
            (lambda d: d.update(extra=1), r"\$"),
            (lambda d: d["graph"].update(weights=[]), r"\$\.graph"),
            (lambda d: d["pattern"].update(demand=[]), r"\$\.pattern"),
        ],
    )
    def test_unknown_keys_rejected(self, mutate, spot):
        doc = trivial_path_doc()
        mutate(doc)
        with pytest.raises(DocumentError, match=f"{spot}: unknown key"):
            parse_instance(doc)

    def test_missing_key_rejected(self):
        doc = trivial_path_doc()
        del doc["pattern"]["demands"]
        with pytest.raises(DocumentError, match="missing key 'demands'"):
            parse_instance(doc)

    def test_wrong_arity_edge_rejected(self):
        doc = trivial_path_doc()
        doc["graph"]["edges"][0] = ["s", "a"]
        with pytest.raises(DocumentError, match=r"\[tail, head, cost\]"):
            parse_instance(doc)

    def test_nonstring_vertex_rejected(self):
        doc = trivial_path_doc()
        doc["graph"]["vertices"][0] = 7
        with pytest.raises(DocumentError, match=r"vertices\[0\]"):
            parse_instance(doc)

    def test_terminal_missing_from_graph_rejected(self):
        doc = trivial_path_doc()
        doc["pattern"]["terminals"] = ["s", "zz"]
        doc["pattern"]["demands"] = [["s", "zz"]]
        with pytest.raises(DocumentError, match="'zz' is not a graph vertex"):
            parse_instance(doc)

    def test_demand_endpoint_not_terminal_rejected(self):
        doc = trivial_path_doc()
        doc["pattern"]["demands"].append(["s", "a"])
        with pytest.raises(DocumentError, match=r"\$\.pattern"):
            parse_instance(doc)

    def test_solution_document(self):
        assert parse_solution({"edges": [["s", "a"]]}) == [("s", "a")]
        with pytest.raises(DocumentError, match="unknown key"):
            parse_solution({"edges": [], "cost": 1})
        with pytest.raises(DocumentError, match=r"\$\.edges\[0\]"):
            parse_solution({"edges": [["s", "a", 1]]})


class TestSerializeRoundTrip:
    def test_round_trip_preserves_content_and_order(self):
        doc = {
            "pattern": {"demands": [["b", "a"], ["a", "b"]], "terminals": ["b", "a"]},
            "graph": {
                "edges": [["b", "a", 2], ["a", "b", 0]],
                "vertices": ["b", "a"],
            },
        }
        again = serialize_instance(*parse_instance(doc))
        assert again == doc

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_round_trip_over_random_instances(self, seed):
        graph, pattern = rng_instance(seed)
        doc = serialize_instance(graph, pattern)
        graph2, pattern2 = parse_instance(doc)
        assert graph2.vertices == graph.vertices
        assert graph2.edges == graph.edges
        assert pattern2.terminals == pattern.terminals
        assert pattern2.demands == pattern.demands
        assert serialize_instance(graph2, pattern2) == doc


class TestClassifyCommand:
    def test_star_pattern_member(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, _ = cli("classify", path, "--lambda", "1", "--delta", "0")
        payload = only_json(out)
        assert code == 0
        assert payload["member"] is True
        cert = payload["certificate"]
        assert cert["orientation"] == "out"
        assert cert["spine"] == ["s"]
        assert cert["stars"] == [["s", "t"]]
        assert cert["extra_edges"] == []
        assert cert["equivalent_pattern"] is None
        jsonschema.validate(payload, load_schema("classify-output"))

    def test_five_cycle_rejected_with_reason(self, tmp_path):
        path = write_doc(tmp_path, "c5.json", cycle5_doc())
        code, out, _ = cli(
            "classify", path, "--lambda", "1", "--delta", "1", "--star"
        )
        payload = only_json(out)
        assert code == 1
        assert payload["member"] is False
        assert "spine length at most 1" in payload["reason"]
        assert "1 extra edge" in payload["reason"]
        jsonschema.validate(payload, load_schema("classify-output"))

    def test_shortcut_chain_needs_star_mode(self, tmp_path):
        # a chain with its transitive shortcut: not a bare 2-caterpillar,
        # but equivalent to one (the chain itself)
        doc = {
            "graph": {"vertices": ["a", "b", "c"], "edges": []},
            "pattern": {
                "terminals": ["a", "b", "c"],
                "demands": [["a", "b"], ["b", "c"], ["a", "c"]],
            },
        }
        path = write_doc(tmp_path, "chain.json", doc)
        code, out, _ = cli("classify", path, "--lambda", "2", "--delta", "0")
        assert code == 1
        assert only_json(out)["member"] is False
        code, out, _ = cli(
            "classify", path, "--lambda", "2", "--delta", "0", "--star"
        )
        payload = only_json(out)
        assert code == 0
        equivalent = payload["certificate"]["equivalent_pattern"]
        assert equivalent is not None
        assert len(equivalent["demands"]) == 2
        jsonschema.validate(payload, load_schema("classify-output"))


class TestSolveCommand:
    def test_trivial_path(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, _ = cli("solve", path)
        payload = only_json(out)
        assert code == 0
        assert payload["cost"] == 2
        assert payload["edges"] == [["s", "a"], ["a", "t"]]
        assert payload["omega_used"] == 2
        jsonschema.validate(payload, load_schema("solve-output"))

    def test_explicit_width_reported(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, _ = cli("solve", path, "--treewidth", "3")
        payload = only_json(out)
        assert code == 0
        assert payload["cost"] == 2
        assert payload["omega_used"] == 3

    def test_infeasible_instance(self, tmp_path):
        doc = {
            "graph": {"vertices": ["a", "b"], "edges": []},
            "pattern": {"terminals": ["a", "b"], "demands": [["a", "b"]]},
        }
        path = write_doc(tmp_path, "i.json", doc)
        code, out, _ = cli("solve", path)
        payload = only_json(out)
        assert code == 1
        assert payload == {"cost": None, "edges": None, "omega_used": 1}
        jsonschema.validate(payload, load_schema("solve-output"))

    def test_no_demands_solves_to_zero(self, tmp_path):
        doc = {
            "graph": {"vertices": ["a", "b"], "edges": [["a", "b", 5]]},
            "pattern": {"terminals": [], "demands": []},
        }
        path = write_doc(tmp_path, "i.json", doc)
        code, out, _ = cli("solve", path)
        assert code == 0
        assert only_json(out) == {"cost": 0, "edges": [], "omega_used": 1}

    def test_unclassified_pattern_needs_explicit_width(self, tmp_path):
        # complete bipartite 3x4 demands exceed every spine+extra split of
        # the default budget, so solve refuses without --treewidth
        terms = [f"s{i}" for i in range(3)] + [f"t{j}" for j in range(4)]
        doc = {
            "graph": {"vertices": terms, "edges": []},
            "pattern": {
                "terminals": terms,
                "demands": [[f"s{i}", f"t{j}"] for i in range(3) for j in range(4)],
            },
        }
        path = write_doc(tmp_path, "wide.json", doc)
        code, out, err = cli("solve", path)
        assert code == 3
        assert out == ""
        assert "--treewidth" in err
        code, out, _ = cli("solve", path, "--treewidth", "3")
        assert code == 1
        assert only_json(out)["cost"] is None

    @settings(max_examples=15, deadline=None)
    @given(seeds)
    def test_agrees_with_oracle_command(self, seed):
        graph, pattern = rng_instance(seed, n_max=5)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_doc(tmp, "i.json", serialize_instance(graph, pattern))
            code_s, out_s, _ = cli("solve", path, "--treewidth", "4")
            code_o, out_o, _ = cli("oracle", path)
        assert code_s == code_o
        assert json.loads(out_s)["cost"] == json.loads(out_o)["cost"]


class TestOracleCommand:
    def test_generated_diamond_hits_target(self, tmp_path):
        # seed 4 draws a multicolored instance with a clique, so the
        # generated gadget's optimum sits exactly on the 4k^2-2k target
        code, out, _ = cli("generate", "pure-diamond", "--k", "3", "--seed", "4")
        assert code == 0
        doc = json.loads(out)
        path = write_doc(tmp_path, "dia.json", doc)
        code, out, _ = cli("oracle", path)
        payload = only_json(out)
        assert code == 0
        assert payload["cost"] == 30
        jsonschema.validate(payload, load_schema("oracle-output"))
        graph, pattern = parse_instance(doc)
        net = SolutionNetwork(graph, [tuple(e) for e in payload["edges"]])
        assert net.cost == 30
        assert feasible(net, pattern)

    def test_infeasible(self, tmp_path):
        doc = {
            "graph": {"vertices": ["a", "b"], "edges": []},
            "pattern": {"terminals": ["a", "b"], "demands": [["a", "b"]]},
        }
        path = write_doc(tmp_path, "i.json", doc)
        code, out, _ = cli("oracle", path)
        assert code == 1
        assert only_json(out) == {"cost": None, "edges": None}


class TestAnalyzeCommand:
    def test_trivial_path_full_report(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, _ = cli("analyze", path)
        payload = only_json(out)
        assert code == 0
        assert payload["cutwidth"] == 1
        assert payload["treewidth"] == 1
        assert payload["bounds"] == {"cw_7d": "pass", "tw_bound": "pass"}
        assert payload["core"]["valid"] is True
        assert payload["core"]["orientation"] == "out"
        jsonschema.validate(payload, load_schema("analyze-output"))

    def test_given_solution_is_minimalized_first(self, tmp_path):
        doc = trivial_path_doc()
        doc["graph"]["edges"].append(["t", "s", 0])
        inst = write_doc(tmp_path, "i.json", doc)
        sol = write_doc(
            tmp_path, "s.json", {"edges": [["s", "a"], ["a", "t"], ["t", "s"]]}
        )
        code, out, _ = cli("analyze", inst, "--solution", sol)
        payload = only_json(out)
        assert code == 0
        # the cycle edge is redundant for the lone demand and gets dropped
        assert payload["cutwidth"] == 1

    def test_unsatisfying_solution_rejected(self, tmp_path):
        inst = write_doc(tmp_path, "i.json", trivial_path_doc())
        sol = write_doc(tmp_path, "s.json", {"edges": [["s", "a"]]})
        code, out, err = cli("analyze", inst, "--solution", sol)
        payload = only_json(out)
        assert code == 1
        assert payload == {
            "cutwidth": None,
            "treewidth": None,
            "bounds": None,
            "core": None,
        }
        assert "satisfy" in err
        jsonschema.validate(payload, load_schema("analyze-output"))

    def test_infeasible_instance_reports_nothing(self, tmp_path):
        doc = {
            "graph": {"vertices": ["a", "b"], "edges": []},
            "pattern": {"terminals": ["a", "b"], "demands": [["a", "b"]]},
        }
        path = write_doc(tmp_path, "i.json", doc)
        code, out, err = cli("analyze", path)
        assert code == 1
        assert only_json(out)["cutwidth"] is None
        assert "infeasible" in err

    def test_unclassified_pattern_skips_class_bounds(self, tmp_path):
        # 12 demands exceed the certification budget; cutwidth facts still
        # come back, the class-relative ones are null
        sv = [f"s{i}" for i in range(3)]
        tv = [f"t{j}" for j in range(4)]
        doc = {
            "graph": {
                "vertices": sv + tv,
                "edges": [[a, b, 1] for a in sv for b in tv],
            },
            "pattern": {
                "terminals": sv + tv,
                "demands": [[a, b] for a in sv for b in tv],
            },
        }
        path = write_doc(tmp_path, "wide.json", doc)
        code, out, _ = cli("analyze", path)
        payload = only_json(out)
        assert code == 0
        assert payload["cutwidth"] is not None
        assert payload["bounds"]["cw_7d"] == "pass"
        assert payload["bounds"]["tw_bound"] is None
        assert payload["core"] is None
        jsonschema.validate(payload, load_schema("analyze-output"))


class TestGenerateCommand:
    @pytest.mark.parametrize(
        "argv",
        [
            ("generate", "pure-diamond", "--k", "3", "--seed", "1"),
            ("generate", "flawed-diamond", "--k", "3", "--seed", "2"),
            ("generate", "cycle", "--k", "3", "--seed", "3"),
            ("generate", "expander", "--k", "4", "--seed", "4"),
        ],
    )
    def test_output_is_valid_instance(self, argv):
        code, out, _ = cli(*argv)
        payload = only_json(out)
        assert code == 0
        jsonschema.validate(payload, load_schema("instance"))
        graph, pattern = parse_instance(payload)
        assert graph.num_edges > 0
        assert pattern.num_demands > 0

    def test_deterministic_per_seed(self):
        first = cli("generate", "cycle", "--k", "4", "--seed", "9")
        second = cli("generate", "cycle", "--k", "4", "--seed", "9")
        other = cli("generate", "cycle", "--k", "4", "--seed", "10")
        assert first == second
        assert first[1] != other[1]

    def test_cycle_pattern_shape(self):
        code, out, _ = cli("generate", "cycle", "--k", "4", "--seed", "0")
        assert code == 0
        _, pattern = parse_instance(json.loads(out))
        assert pattern.num_demands == 4
        succ = dict(pattern.demands)
        # one closed walk over all four terminals
        seen = [pattern.terminals[0]]
        while succ[seen[-1]] != seen[0]:
            seen.append(succ[seen[-1]])
        assert len(seen) == 4

    def test_flawed_diamond_has_apex(self, tmp_path):
        code, out, _ = cli("generate", "flawed-diamond", "--k", "2", "--seed", "5")
        graph, pattern = parse_instance(json.loads(out))
        assert code == 0
        assert graph.has_vertex("x")
        assert ("x", "r1") in {(t, h) for t, h, _ in graph.edges}
        assert ("x", "r1") in pattern.demands

    def test_odd_expander_degree_rejected(self):
        code, out, err = cli("generate", "expander", "--k", "5", "--seed", "1")
        assert code == 3
        assert out == ""
        assert err != ""

    def test_seed_required(self):
        code, out, err = cli("generate", "cycle", "--k", "3")
        assert code == 3
        assert "--seed" in err


class TestVerifyCommand:
    def test_feasible_minimal(self, tmp_path):
        inst = write_doc(tmp_path, "i.json", trivial_path_doc())
        sol = write_doc(tmp_path, "s.json", {"edges": [["s", "a"], ["a", "t"]]})
        code, out, _ = cli("verify", inst, sol)
        payload = only_json(out)
        assert code == 0
        assert payload == {"feasible": True, "minimal": True}
        jsonschema.validate(payload, load_schema("verify-output"))

    def test_feasible_with_slack(self, tmp_path):
        doc = trivial_path_doc()
        doc["graph"]["edges"].append(["t", "s", 4])
        inst = write_doc(tmp_path, "i.json", doc)
        sol = write_doc(
            tmp_path, "s.json", {"edges": [["s", "a"], ["a", "t"], ["t", "s"]]}
        )
        code, out, _ = cli("verify", inst, sol)
        assert code == 0
        assert only_json(out) == {"feasible": True, "minimal": False}

    def test_infeasible_solution(self, tmp_path):
        inst = write_doc(tmp_path, "i.json", trivial_path_doc())
        sol = write_doc(tmp_path, "s.json", {"edges": [["s", "a"]]})
        code, out, _ = cli("verify", inst, sol)
        assert code == 1
        assert only_json(out) == {"feasible": False, "minimal": False}

    def test_unknown_edge_is_a_document_error(self, tmp_path):
        inst = write_doc(tmp_path, "i.json", trivial_path_doc())
        sol = write_doc(tmp_path, "s.json", {"edges": [["t", "s"]]})
        code, out, err = cli("verify", inst, sol)
        assert code == 2
        assert out == ""
        assert "not in host graph" in err


class TestExitCodesAndStreams:
    def test_unknown_subcommand(self):
        code, out, err = cli("frobnicate")
        assert code == 3
        assert out == ""
        assert err != ""

    def test_missing_required_flag(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, err = cli("classify", path, "--delta", "0")
        assert code == 3
        assert "--lambda" in err

    def test_negative_budget_rejected(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, _, err = cli("classify", path, "--lambda", "-1", "--delta", "0")
        assert code == 3
        assert "nonnegative" in err

    def test_jobs_must_be_positive(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, _, err = cli("--jobs", "0", "solve", path)
        assert code == 3
        assert "at least 1" in err

    def test_missing_file(self):
        code, out, err = cli("solve", "/nonexistent/instance.json")
        assert code == 2
        assert out == ""
        assert "cannot read" in err

    def test_malformed_json_reports_line(self, tmp_path):
        target = tmp_path / "bad.json"
        target.write_text('{"graph":\n  oops\n}')
        code, out, err = cli("solve", str(target))
        assert code == 2
        assert "line 2" in err

    def test_scan_size_guard(self, tmp_path):
        verts = [f"n{i}" for i in range(8)]
        doc = {
            "graph": {
                "vertices": verts,
                "edges": [[a, b, 1] for a in verts for b in verts if a != b],
            },
            "pattern": {
                "terminals": [verts[0], verts[7]],
                "demands": [[verts[0], verts[7]]],
            },
        }
        path = write_doc(tmp_path, "dense.json", doc)
        code, out, err = cli("solve", path)
        assert code == 4
        assert out == ""
        assert "size guard" in err

    def test_analysis_size_guard(self, tmp_path):
        verts = [f"n{i:02d}" for i in range(17)]
        doc = {
            "graph": {
                "vertices": verts,
                "edges": [[verts[i], verts[i + 1], 1] for i in range(16)],
            },
            "pattern": {
                "terminals": [verts[0], verts[16]],
                "demands": [[verts[0], verts[16]]],
            },
        }
        path = write_doc(tmp_path, "long.json", doc)
        code, out, err = cli("analyze", path)
        assert code == 4
        assert "size guard" in err

    def test_results_on_stdout_only(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        code, out, err = cli("solve", path)
        assert code == 0
        assert err == ""
        only_json(out)

    def test_byte_determinism(self, tmp_path):
        path = write_doc(tmp_path, "i.json", trivial_path_doc())
        runs = [cli("analyze", path) for _ in range(2)]
        assert runs[0] == runs[1]


class TestSchemas:
    @pytest.mark.parametrize(
        "name",
        [
            "instance",
            "solution",
            "classify-output",
            "solve-output",
            "oracle-output",
            "analyze-output",
            "verify-output",
        ],
    )
    def test_schema_files_are_valid(self, name):
        jsonschema.Draft7Validator.check_schema(load_schema(name))

    def test_instance_schema_matches_parser_on_shape(self):
        schema = load_schema("instance")
        good = trivial_path_doc()
        jsonschema.validate(good, schema)
        bad = trivial_path_doc()
        bad["graph"]["edges"][0][2] = -1
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, schema)
        with pytest.raises(DocumentError):
            parse_instance(bad)

    def test_solution_schema(self):
        schema = load_schema("solution")
        jsonschema.validate({"edges": [["a", "b"]]}, schema)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate({"edges": [["a", "b", 1]]}, schema)
