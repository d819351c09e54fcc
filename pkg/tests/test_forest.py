import json
from math import comb

import pytest

from packsem.forest import (
    And, CycleError, Forest, ForestFormatError, Leaf, Or, bottom_up_order, enumerate_readings,
    forest_from_json, forest_to_dot, forest_to_json, must_occur, node_counts, reading_nodes,
    readings_count, validate,
)
from packsem.parser import BackboneGrammar, Rule, parse

from conftest import grammar, pp_forest


def catalan(k):
    return comb(2 * k, k) // (k + 1)


def binary_grammar():
    # X -> X X over "a"; every bracketing is a parse
    return BackboneGrammar([Rule("X", ("X", "X"), "r1")], {"a": [("X", "a/X")]}, "X")


def unary_grammar():
    # lexical ambiguity plus unary chains
    rules = [Rule("S", ("A", "B"), "r1"), Rule("A", ("C",), "r2"), Rule("B", ("C",), "r3"),
             Rule("S", ("S", "B"), "r4")]
    lex = {"x": [("A", "x/A"), ("C", "x/C")], "y": [("B", "y/B"), ("C", "y/C")]}
    return BackboneGrammar(rules, lex, "S")


def corpus():
    out = []
    for name in ("demo", "demo-np"):
        for n in range(4):
            out.append((f"{name}-pp{n}", pp_forest(n, name)))
    for k in range(1, 7):
        out.append((f"binary-{k}", parse(["a"] * k, binary_grammar())))
    for toks in (["x", "y"], ["x", "y", "y"], ["x", "x", "y", "y"]):
        out.append(("unary-" + "".join(toks), parse(toks, unary_grammar())))
    return [(name, f) for name, f in out if readings_count(f) <= 100]


CORPUS = corpus()


def single_tree():
    # S(NP, VP) over two leaves
    return Forest((Leaf("NP", "i", (0, 1)), Leaf("VP", "slept", (1, 2)),
                   And("S", "r1", (0, 1), (0, 2))), 2)


# --- validate ------------------------------------------------------------------

def test_validate_accepts_parser_output():
    g = grammar("demo")
    for n in range(4):
        assert validate(pp_forest(n), g.backbone) == []


def test_validate_single_tree():
    assert validate(single_tree()) == []


def test_validate_condition_one():
    f = Forest((Leaf("NP", "i", (0, 1)), Leaf("VP", "i", (0, 1)), Or("NP", (0, 1), (0, 1))), 2)
    kinds = {v.kind for v in validate(f)}
    assert "condition-1" in kinds


def test_validate_condition_two():
    g = grammar("demo")
    f = pp_forest(1)
    nodes = list(f.nodes)
    i = next(k for k, n in enumerate(nodes) if isinstance(n, And) and n.cat == "VP")
    nodes[i] = And("VP", "r1", nodes[i].children, nodes[i].span)
    v = validate(Forest(tuple(nodes), f.root), g.backbone)
    assert [x.kind for x in v] == ["condition-2"]


def test_validate_structural_errors():
    leaf = Leaf("A", "a", (0, 1))
    assert validate(Forest((leaf,), 3))[0].kind == "root"
    assert validate(Forest((And("A", "r", (5,), (0, 1)),), 0))[0].kind == "dangling"
    cyc = Forest((And("A", "r", (1,), (0, 1)), And("A", "r", (0,), (0, 1))), 0)
    assert validate(cyc)[0].kind == "cycle"
    unreachable = Forest((leaf, Leaf("B", "b", (0, 1))), 0)
    assert [v.kind for v in validate(unreachable)] == ["unreachable"]
    nested = Forest((leaf, Leaf("A", "a", (0, 1), "x"), Or("A", (0, 1), (0, 1)),
                     Or("A", (2, 0), (0, 1))), 3)
    assert "or-child" in {v.kind for v in validate(nested)}


def test_validate_span_gap():
    f = Forest((Leaf("A", "a", (0, 1)), Leaf("B", "b", (2, 3)), And("S", "r", (0, 1), (0, 3))), 2)
    assert any(v.kind == "span" for v in validate(f))


# --- order, counting, enumeration ----------------------------------------------

def test_bottom_up_order_small():
    assert bottom_up_order(Forest((Leaf("A", "a", (0, 1)),), 0)) == [0]
    f = Forest((Leaf("A", "a", (0, 1)), And("B", "r", (0,), (0, 1))), 1)
    assert bottom_up_order(f) == [0, 1]


@pytest.mark.parametrize("name,f", CORPUS)
def test_bottom_up_order_respects_edges(name, f):
    pos = {n: k for k, n in enumerate(bottom_up_order(f))}
    for i, n in enumerate(f.nodes):
        for c in n.children:
            assert pos[c] < pos[i]


def test_bottom_up_order_cycle():
    with pytest.raises(CycleError):
        bottom_up_order(Forest((And("A", "r", (0,), (0, 1)),), 0))


@pytest.mark.parametrize("n,expected", [(0, 1), (1, 2), (2, 5), (3, 14), (4, 42), (6, 429), (10, 58786)])
def test_readings_count_pp(n, expected):
    assert readings_count(pp_forest(n)) == expected == catalan(n + 1)


@pytest.mark.parametrize("name,f", CORPUS)
def test_enumeration_matches_count(name, f):
    readings = list(enumerate_readings(f))
    assert len(readings) == readings_count(f)
    assert len({r for r in readings}) == len(readings)
    for r in readings:
        # choices cover exactly the reachable OR nodes
        ors = {i for i in reading_nodes(f, r) if isinstance(f.nodes[i], Or)}
        assert ors == set(r.choice)


def test_enumeration_without_or_nodes():
    (r,) = list(enumerate_readings(single_tree()))
    assert r.choice == {}


def test_enumeration_cap():
    assert len(list(enumerate_readings(pp_forest(4), cap=10))) == 10


@pytest.mark.parametrize("n", range(4))
def test_every_reading_is_a_valid_tree(n):
    g = grammar("demo")
    f = pp_forest(n)
    for r in enumerate_readings(f):
        keep = [i for i in reading_nodes(f, r) if not isinstance(f.nodes[i], Or)]
        # rebuild the tree with OR nodes spliced out and validate it
        remap = {}
        nodes = []
        for i in reversed(keep):
            n_ = f.nodes[i]
            if isinstance(n_, And):
                kids = tuple(remap[r.choice.get(c, c)] for c in n_.children)
                n_ = And(n_.cat, n_.rule, kids, n_.span)
            remap[i] = len(nodes)
            nodes.append(n_)
        tree = Forest(tuple(nodes), remap[r.choice.get(f.root, f.root)])
        assert validate(tree, g.backbone) == []


# --- must_occur -----------------------------------------------------------------

def test_must_occur_small():
    f = single_tree()
    assert must_occur(f, 0) == frozenset()
    assert must_occur(f, 2) == {0, 1}


@pytest.mark.parametrize("name,f", CORPUS)
def test_must_occur_matches_brute_force(name, f):
    table = must_occur(f)
    for node in bottom_up_order(f):
        seen = None
        for r in enumerate_readings(f, node=node):
            nodes = set(reading_nodes(f, r, node)) - {node}
            seen = nodes if seen is None else seen & nodes
        assert table[node] == seen, (name, node)
        assert must_occur(f, node) == seen


# --- node counts ------------------------------------------------------------------

def test_node_counts_single_tree():
    assert node_counts(single_tree()) == (1, 0, 2)


def test_node_counts_pp2():
    a, o, l = node_counts(pp_forest(2))
    assert o == 3 and a + o + l == 35


def test_node_counts_cubic_growth():
    totals = [sum(node_counts(pp_forest(n))) for n in range(2, 17, 2)]
    d1 = [b - a for a, b in zip(totals, totals[1:])]
    d2 = [b - a for a, b in zip(d1, d1[1:])]
    d3 = [b - a for a, b in zip(d2, d2[1:])]
    assert len(set(d3)) == 1


# --- formats --------------------------------------------------------------------

@pytest.mark.parametrize("name,f", CORPUS[:6])
def test_json_round_trip(name, f):
    data = json.loads(json.dumps(forest_to_json(f)))
    assert forest_from_json(data) == f


def test_json_shape():
    d = forest_to_json(pp_forest(1))
    kinds = {n["kind"] for n in d["nodes"]}
    assert kinds == {"and", "or", "leaf"}
    assert all(set(n) >= {"id", "kind", "cat", "children", "span"} for n in d["nodes"])


@pytest.mark.parametrize("bad", [
    '{"nodes": []}',
    '{"root": 0, "nodes": [{"id": 0, "kind": "blob", "cat": "A", "span": [0, 1]}]}',
    '{"root": 0, "nodes": [{"id": 1, "kind": "leaf", "cat": "A", "token": "a", "span": [0, 1]}]}',
])
def test_json_errors(bad):
    with pytest.raises(ForestFormatError):
        forest_from_json(bad)


def test_dot_draws_or_nodes_as_boxes():
    dot = forest_to_dot(pp_forest(2))
    assert dot.startswith("digraph")
    assert dot.count("subgraph cluster_") == 3
