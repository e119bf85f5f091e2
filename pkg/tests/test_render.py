import pytest
from hypothesis import given, settings, strategies as st

from conftest import QueryGen
from sqlhinter.parse import parse
from sqlhinter.render import render, render_tokens

CASES = [
    ("SELECT * FROM department", "SELECT * FROM department"),
    ("select count(*) from DEPARTMENT where Dept_id", "SELECT COUNT(*) FROM department WHERE dept_id"),
    (
        'SELECT COUNT(*) FROM department WHERE dept_ID IN (SELECT dept_ID)',
        "SELECT COUNT(*) FROM department WHERE dept_id IN (SELECT dept_id)",
    ),
    (
        'SELECT COUNT(e.emp_ID) FROM employee e, location l, department d',
        "SELECT COUNT(e.emp_id) FROM employee e, location l, department d",
    ),
    ("SELECT a FROM t WHERE x = 1 AND (y = 2 OR z = 3)", "SELECT a FROM t WHERE x = 1 AND (y = 2 OR z = 3)"),
    ("SELECT a FROM t ORDER BY a ASC, b DESC", "SELECT a FROM t ORDER BY a, b DESC"),
    ("SELECT a AS total FROM t", "SELECT a AS total FROM t"),
]


@pytest.mark.parametrize("text,expected", CASES)
def test_render_text(text, expected):
    assert render(parse(text)) == expected


@pytest.mark.parametrize("text,_", CASES)
def test_parse_render_fixpoint_on_cases(text, _):
    tree = parse(text)
    assert parse(render(tree)) == tree


def test_partial_predicate_renders_dangling_operand():
    tree = parse("SELECT COUNT(*) FROM department WHERE dept_ID")
    assert render(tree).endswith("WHERE dept_id")


def test_tokens_carry_paths_and_clauses():
    tree = parse("SELECT a FROM t WHERE a = 1")
    tokens = render_tokens(tree)
    assert [t.text for t in tokens] == ["SELECT", "a", "FROM", "t", "WHERE", "a", "=", "1"]
    clauses = {t.text: t.clause for t in tokens}
    assert clauses["t"] == "FromList"
    assert clauses["="] == "Where"
    # the WHERE keyword's path points at the Where node itself
    where_tok = [t for t in tokens if t.text == "WHERE"][0]
    assert where_tok.path == (2,)


def test_roundtrip_on_seeded_corpus():
    gen = QueryGen(seed=99)
    for text in gen.corpus(300):
        t1 = parse(text)
        assert parse(render(t1)) == t1, text


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_roundtrip_property(seed):
    gen = QueryGen(seed=seed)
    text = gen.corpus(1)[0]
    t1 = parse(text)
    assert parse(render(t1)) == t1
