import random

from hypothesis import given, settings, strategies as st

from conftest import QueryGen, all_trees, brute_force_ted, leaf_kind_tree, random_tree
from sqlhinter.aliases import canonicalize_aliases
from sqlhinter.nodes import Node, NodeKind, node
from sqlhinter.parse import parse
from sqlhinter.treedist import UNORDERED_KINDS, query_distance, zhang_shasha


def q(text: str) -> Node:
    tree, _ = canonicalize_aliases(parse(text))
    return tree


def test_identity_distance_zero():
    t = q("SELECT a, b FROM t, u WHERE a = 1")
    assert zhang_shasha(t, t) == 0
    assert query_distance(t, t) == 0


def test_single_node_relabel():
    a = leaf_kind_tree("a")
    b = leaf_kind_tree("b")
    assert zhang_shasha(a, b) == 1
    assert query_distance(a, b) == 1


def test_insert_internal_node_costs_one():
    # COUNT(*) versus bare *: one Aggregate insertion
    a = q("SELECT * FROM department")
    b = q("SELECT COUNT(*) FROM department")
    assert zhang_shasha(a, b) == 1
    assert query_distance(a, b) == 1


def test_from_list_is_unordered():
    a = q("SELECT x FROM a, b")
    b = q("SELECT x FROM b, a")
    assert query_distance(a, b) == 0
    assert zhang_shasha(a, b) > 0


def test_order_by_stays_ordered():
    a = q("SELECT * FROM t ORDER BY x, y")
    b = q("SELECT * FROM t ORDER BY y, x")
    assert query_distance(a, b) > 0


def test_symmetry_and_identity_properties():
    gen = QueryGen(seed=5)
    rng = random.Random(5)
    texts = gen.corpus(30)
    for _ in range(60):
        a = q(rng.choice(texts))
        b = q(rng.choice(texts))
        assert query_distance(a, b) == query_distance(b, a)
    for text in texts[:20]:
        t = q(text)
        assert query_distance(t, t) == 0


def _permute_unordered(tree: Node, rng: random.Random) -> Node:
    kids = tuple(_permute_unordered(c, rng) for c in tree.children)
    if tree.kind in UNORDERED_KINDS and len(kids) > 1:
        kids = tuple(rng.sample(list(kids), len(kids)))
    return tree.replace(children=kids)


def test_permutation_of_unordered_children_is_distance_zero():
    gen = QueryGen(seed=17)
    rng = random.Random(17)
    for text in gen.corpus(120, partial_fraction=0.2):
        t = q(text)
        shuffled = _permute_unordered(t, rng)
        assert query_distance(t, shuffled) == 0, text


def test_query_distance_never_exceeds_zhang_shasha():
    gen = QueryGen(seed=29)
    rng = random.Random(29)
    texts = gen.corpus(40)
    for _ in range(80):
        a = q(rng.choice(texts))
        b = q(rng.choice(texts))
        assert query_distance(a, b) <= zhang_shasha(a, b)


def test_exhaustive_small_universe_matches_brute_force():
    universe = [t for n in (1, 2, 3) for t in all_trees(n, "ab")]
    for a in universe:
        for b in universe:
            expected = brute_force_ted(a, b)
            assert zhang_shasha(a, b) == expected, (a, b)
            assert query_distance(a, b) == expected, (a, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_random_pairs_match_brute_force(seed):
    rng = random.Random(seed)
    a = random_tree(rng, 6)
    b = random_tree(rng, 6)
    expected = brute_force_ted(a, b)
    assert zhang_shasha(a, b) == expected
    assert query_distance(a, b) == expected


def test_triangle_inequality_for_zhang_shasha():
    rng = random.Random(123)
    trees = [random_tree(rng, 6) for _ in range(12)]
    for a in trees[:6]:
        for b in trees[3:9]:
            for c in trees[6:]:
                assert zhang_shasha(a, c) <= zhang_shasha(a, b) + zhang_shasha(b, c)


def test_unmatched_children_cost_subtree_size():
    # FROM with one table versus three: two whole TableRef subtrees inserted
    a = q("SELECT x FROM t")
    b = q("SELECT x FROM t, u, v")
    assert query_distance(a, b) == 2


def test_unordered_assignment_on_labeled_fixture():
    left = node(NodeKind.FROM_LIST, children=[
        node(NodeKind.TABLE_REF, "employee"),
        node(NodeKind.TABLE_REF, "department", [node(NodeKind.IDENTIFIER, "t1")]),
    ])
    right = node(NodeKind.FROM_LIST, children=[
        node(NodeKind.TABLE_REF, "department", [node(NodeKind.IDENTIFIER, "t1")]),
        node(NodeKind.TABLE_REF, "location"),
    ])
    # employee->location relabel is the cheapest assignment
    assert query_distance(left, right) == 1
