import json

import pytest
from hypothesis import given, strategies as st

from persuakit import (
    ValidationError,
    ancestor_closure,
    ancestors,
    bundled_hierarchy,
    parse_hierarchy,
)
from hierarchy_utils import make_hierarchy


def doc(root="root", edges=(), leaf_order=()):
    return json.dumps({"root": root, "edges": list(edges), "leaf_order": list(leaf_order)})


MINIMAL = doc(
    edges=[["root", "A"], ["root", "B"], ["A", "a1"], ["A", "a2"], ["B", "b1"]],
    leaf_order=["a1", "a2", "b1"],
)


class TestParse:
    def test_minimal_tree(self):
        h = parse_hierarchy(MINIMAL)
        assert h.leaf_order == ("a1", "a2", "b1")
        assert h.root == "root"
        assert h.nodes == {"root", "A", "B", "a1", "a2", "b1"}

    def test_cycle_rejected(self):
        bad = doc(edges=[["root", "X"], ["a1", "A"], ["A", "a1"]], leaf_order=["X"])
        with pytest.raises(ValidationError, match="cycle|orphan"):
            parse_hierarchy(bad)

    def test_multi_parent_rejected(self):
        bad = doc(
            edges=[["root", "A"], ["root", "B"], ["A", "x"], ["B", "x"]],
            leaf_order=["x"],
        )
        with pytest.raises(ValidationError, match="multiple parents"):
            parse_hierarchy(bad)

    def test_orphan_rejected(self):
        bad = doc(edges=[["root", "A"], ["lost", "x"]], leaf_order=["A", "x"])
        with pytest.raises(ValidationError, match="orphan"):
            parse_hierarchy(bad)

    def test_unknown_keys_rejected(self):
        obj = json.loads(MINIMAL)
        obj["comment"] = "hi"
        with pytest.raises(ValidationError, match="unknown keys"):
            parse_hierarchy(json.dumps(obj))

    def test_missing_key_rejected(self):
        with pytest.raises(ValidationError, match="missing key"):
            parse_hierarchy(json.dumps({"root": "r", "edges": []}))

    def test_not_json(self):
        with pytest.raises(ValidationError, match="not valid JSON"):
            parse_hierarchy(b"{nope")

    def test_duplicate_edge_rejected(self):
        bad = doc(edges=[["root", "A"], ["root", "A"]], leaf_order=["A"])
        with pytest.raises(ValidationError, match="duplicate edge"):
            parse_hierarchy(bad)

    def test_leaf_order_must_match_leaves(self):
        bad = doc(edges=[["root", "A"], ["A", "a1"]], leaf_order=["a1", "A"])
        with pytest.raises(ValidationError, match="leaf_order"):
            parse_hierarchy(bad)

    def test_leaf_order_duplicates_rejected(self):
        bad = doc(edges=[["root", "A"], ["A", "a1"]], leaf_order=["a1", "a1"])
        with pytest.raises(ValidationError, match="duplicates"):
            parse_hierarchy(bad)

    def test_root_as_child_rejected(self):
        bad = doc(edges=[["root", "A"], ["A", "root"]], leaf_order=["A"])
        with pytest.raises(ValidationError, match="root"):
            parse_hierarchy(bad)


class TestBundledTaxonomy:
    def test_twenty_leaves(self):
        h = bundled_hierarchy()
        assert len(h.leaf_order) == 20

    def test_known_techniques_present(self):
        h = bundled_hierarchy()
        for name in ("Loaded Language", "Smears", "Straw Man", "Slogans",
                     "Name calling/Labelling", "Reductio ad Hitlerum",
                     "Bandwagon", "Repetition", "Red Herring"):
            assert name in h.leaves

    def test_smears_closure(self):
        h = bundled_hierarchy()
        assert ancestor_closure(h, {"Smears"}) == {"Smears", "Ad Hominem", "Ethos"}


class TestAncestors:
    def test_one_level(self):
        h = parse_hierarchy(MINIMAL)
        assert ancestors(h, "a1") == {"A"}

    def test_child_of_root_has_none(self):
        h = parse_hierarchy(MINIMAL)
        assert ancestors(h, "A") == set()

    def test_unknown_technique(self):
        h = parse_hierarchy(MINIMAL)
        with pytest.raises(ValidationError, match="unknown technique"):
            ancestors(h, "X")


class TestClosure:
    def test_single_label(self):
        h = parse_hierarchy(MINIMAL)
        assert ancestor_closure(h, {"a1"}) == {"a1", "A"}

    def test_empty_is_empty(self):
        h = parse_hierarchy(MINIMAL)
        assert ancestor_closure(h, set()) == set()

    def test_union_of_per_label_closures(self):
        h = parse_hierarchy(MINIMAL)
        assert ancestor_closure(h, {"a1", "b1"}) == {"a1", "A", "b1", "B"}

    def test_unknown_label(self):
        h = parse_hierarchy(MINIMAL)
        with pytest.raises(ValidationError):
            ancestor_closure(h, {"nope"})


# random trees for the algebraic closure properties
@st.composite
def tree_and_labels(draw):
    n = draw(st.integers(min_value=1, max_value=7))
    names = [f"n{i}" for i in range(n)]
    edges = []
    for i in range(n):
        parent = draw(st.sampled_from(["root"] + names[:i]))
        edges.append([parent, names[i]])
    parents = {p for p, _ in edges}
    leaves = [x for x in names if x not in parents]
    h = make_hierarchy("root", edges, leaves)
    labels = draw(st.sets(st.sampled_from(names)))
    return h, labels


@given(tree_and_labels())
def test_closure_idempotent(data):
    h, labels = data
    once = ancestor_closure(h, labels)
    assert ancestor_closure(h, once) == once


@given(tree_and_labels())
def test_closure_monotone(data):
    h, labels = data
    sub = {x for i, x in enumerate(sorted(labels)) if i % 2 == 0}
    assert ancestor_closure(h, sub) <= ancestor_closure(h, labels)


@given(tree_and_labels())
def test_closure_excludes_root(data):
    h, labels = data
    assert h.root not in ancestor_closure(h, labels)
