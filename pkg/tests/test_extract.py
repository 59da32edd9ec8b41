import pytest

from upgrade_lens import extract_call_graph, load_graph, save_graph

from conftest import FIXTURES


def write_tree(root, files: dict[str, str]):
    for relpath, body in files.items():
        path = root / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body)
    return root


class TestBasics:
    def test_two_functions_one_call(self, tmp_path):
        write_tree(tmp_path, {"mod.py": "def f():\n    return g()\n\ndef g():\n    return 1\n"})
        g = extract_call_graph(tmp_path)
        assert (g.n, g.m) == (2, 1)
        caller = g.nodes[g.edges[0].source]
        callee = g.nodes[g.edges[0].target]
        assert (caller.name, callee.name) == ("f", "g")
        assert caller.path == callee.path == "mod.py"

    def test_recursive_function_gets_self_loop(self, tmp_path):
        write_tree(tmp_path, {"mod.py": "def f(n):\n    return f(n - 1)\n"})
        g = extract_call_graph(tmp_path)
        assert g.self_loops == (0,)

    def test_empty_tree(self, tmp_path):
        g = extract_call_graph(tmp_path)
        assert (g.n, g.m) == (0, 0)

    def test_unknown_names_attach_to_external_nodes(self, tmp_path):
        write_tree(tmp_path, {"mod.py": "def f():\n    return missing()\n"})
        g = extract_call_graph(tmp_path)
        external = g.nodes[g.edges[0].target]
        assert external.path == "<external>"
        assert external.name == "missing"

    def test_methods_get_qualified_names(self, tmp_path):
        write_tree(
            tmp_path,
            {"mod.py": "class Box:\n    def get(self):\n        return helper()\n\ndef helper():\n    return 0\n"},
        )
        g = extract_call_graph(tmp_path)
        names = {n.name for n in g.nodes}
        assert "Box.get" in names and "helper" in names
        edge = g.edges[0]
        assert g.nodes[edge.source].name == "Box.get"
        assert g.nodes[edge.target].name == "helper"

    def test_repeated_calls_accumulate_weight(self, tmp_path):
        write_tree(tmp_path, {"mod.py": "def f():\n    g(); g(); g()\n\ndef g():\n    pass\n"})
        g = extract_call_graph(tmp_path)
        assert g.m == 1
        assert g.edges[0].weight == 3.0

    def test_import_aware_resolution(self, tmp_path):
        write_tree(
            tmp_path,
            {
                "a.py": "from b import weld\nimport c\n\ndef go():\n    weld()\n    c.rivet()\n",
                "b.py": "def weld():\n    pass\n",
                "c.py": "def rivet():\n    pass\n",
            },
        )
        g = extract_call_graph(tmp_path)
        edges = {
            (g.nodes[e.source].key, g.nodes[e.target].key) for e in g.edges
        }
        assert (("a.py", "go"), ("b.py", "weld")) in edges
        assert (("a.py", "go"), ("c.py", "rivet")) in edges


class TestFixtureTree:
    def test_matches_hand_drawn_expected_graph(self):
        g = extract_call_graph(FIXTURES / "miniapp")
        expected = load_graph((FIXTURES / "miniapp_expected.jsonl").read_text())
        assert g == expected

    def test_deterministic_and_idempotent(self):
        first = extract_call_graph(FIXTURES / "miniapp")
        second = extract_call_graph(FIXTURES / "miniapp")
        assert first == second
        assert save_graph(first) == save_graph(second)

    def test_round_trips_through_interchange(self):
        g = extract_call_graph(FIXTURES / "miniapp")
        assert load_graph(save_graph(g)) == g

    def test_v2_fixture_shape(self):
        g = extract_call_graph(FIXTURES / "miniapp_v2")
        assert (g.n, g.m) == (16, 15)
        assert g.id_of("lib.py", "pack") is not None
        assert g.id_of("lib.py", "wrap") is None


class TestRobustness:
    def test_unparsable_file_skipped_with_warning(self, tmp_path):
        write_tree(
            tmp_path,
            {
                "good.py": "def ok():\n    pass\n",
                "broken.py": "def nope(:\n",
            },
        )
        with pytest.warns(UserWarning, match="broken.py"):
            g = extract_call_graph(tmp_path)
        assert {n.name for n in g.nodes} == {"ok"}

    def test_redefinition_shares_one_node(self, tmp_path):
        write_tree(tmp_path, {"mod.py": "def f():\n    pass\n\ndef f():\n    return h()\n"})
        g = extract_call_graph(tmp_path)
        internal = [n for n in g.nodes if n.path == "mod.py"]
        assert len(internal) == 1

    def test_star_import_falls_back_to_external(self, tmp_path):
        write_tree(
            tmp_path,
            {
                "a.py": "from b import *\n\ndef go():\n    weld()\n",
                "b.py": "def weld():\n    pass\n",
            },
        )
        g = extract_call_graph(tmp_path)
        target = g.nodes[g.edges[0].target]
        assert target.path == "<external>"

    def test_relative_import_resolution(self, tmp_path):
        write_tree(
            tmp_path,
            {
                "pkg/__init__.py": "",
                "pkg/a.py": "from .b import weld\n\ndef go():\n    weld()\n",
                "pkg/b.py": "def weld():\n    pass\n",
            },
        )
        g = extract_call_graph(tmp_path)
        edges = {(g.nodes[e.source].key, g.nodes[e.target].key) for e in g.edges}
        assert (("pkg/a.py", "go"), ("pkg/b.py", "weld")) in edges
