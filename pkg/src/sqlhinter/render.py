"""Render a query tree back to single-line SQL text.

Rendering is the inverse of parsing on canonical trees:
parse(render(t)) is structurally equal to t for every tree t that parse
can produce, including trees with partial nodes.

The renderer works through a token stream in which every token remembers
the path of the tree node that emitted it; the hint engine reuses that
stream to compute token-level diffs with tree positions attached.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import Node, NodeKind
from .parse import AGGREGATE_NAMES

# tokens that glue to the previous token without a space
_NO_SPACE_BEFORE = {",", ")"}
_NO_SPACE_AFTER = {"("}


@dataclass(frozen=True)
class RenderToken:
    text: str
    path: tuple[int, ...]  # path of the emitting node
    clause: str  # top-level clause kind under the root Query, "" at the root


def join_tokens(tokens: list[RenderToken]) -> str:
    parts: list[str] = []
    prev = ""
    for tok in tokens:
        if parts and tok.text not in _NO_SPACE_BEFORE and prev not in _NO_SPACE_AFTER:
            if not (tok.text == "(" and prev in AGGREGATE_NAMES):
                parts.append(" ")
        parts.append(tok.text)
        prev = tok.text
    return "".join(parts)


def render(tree: Node) -> str:
    """Single-line SQL text for the tree."""
    return join_tokens(render_tokens(tree))


def render_tokens(tree: Node) -> list[RenderToken]:
    out: list[RenderToken] = []
    _emit(tree, (), "", out)
    return out


def _emit(n: Node, path: tuple[int, ...], clause: str, out: list[RenderToken]) -> None:
    def tok(text: str) -> None:
        out.append(RenderToken(text, path, clause))

    def child(i: int, cl: str | None = None) -> None:
        _emit(n.children[i], path + (i,), clause if cl is None else cl, out)

    kind = n.kind
    if kind is NodeKind.QUERY:
        tok("SELECT")
        for i, c in enumerate(n.children):
            _emit(c, path + (i,), c.kind.value, out)
        return

    if kind is NodeKind.SELECT_LIST:
        if n.label == "DISTINCT":
            tok("DISTINCT")
        _emit_comma_list(n, path, clause, out)
        return

    if kind is NodeKind.SELECT_ITEM:
        child(0)
        if len(n.children) > 1:
            tok("AS")
            child(1)
        return

    if kind is NodeKind.AGGREGATE:
        tok(n.label)
        tok("(")
        if n.children:
            child(0)
        tok(")")
        return

    if kind in (NodeKind.STAR, NodeKind.COLUMN, NodeKind.LITERAL, NodeKind.IDENTIFIER):
        tok(n.label)
        return

    if kind is NodeKind.FROM_LIST:
        tok("FROM")
        _emit_comma_list(n, path, clause, out)
        return

    if kind is NodeKind.TABLE_REF:
        tok(n.label)
        if n.children:
            child(0)
        return

    if kind is NodeKind.JOIN:
        child(0)
        tok(n.label)
        child(1)
        if len(n.children) > 2:
            child(2)
        return

    if kind is NodeKind.JOIN_CONDITION:
        tok("ON")
        child(0)
        return

    if kind is NodeKind.WHERE:
        tok("WHERE")
        child(0)
        return

    if kind is NodeKind.HAVING:
        tok("HAVING")
        child(0)
        return

    if kind in (NodeKind.LOGICAL_AND, NodeKind.LOGICAL_OR):
        wrap_or = kind is NodeKind.LOGICAL_AND
        for i, c in enumerate(n.children):
            if i:
                tok(n.label)
            needs_parens = wrap_or and c.kind is NodeKind.LOGICAL_OR
            if needs_parens:
                tok("(")
            child(i)
            if needs_parens:
                tok(")")
        return

    if kind is NodeKind.NOT:
        tok("NOT")
        inner = n.children[0]
        needs_parens = inner.kind in (NodeKind.LOGICAL_AND, NodeKind.LOGICAL_OR)
        if needs_parens:
            tok("(")
        child(0)
        if needs_parens:
            tok(")")
        return

    if kind is NodeKind.COMPARISON:
        child(0)
        tok(n.label)
        child(1)
        return

    if kind is NodeKind.IN_EXPR:
        child(0)
        for part in n.label.split():
            tok(part)
        if len(n.children) == 2 and n.children[1].kind is NodeKind.SUBQUERY:
            child(1)  # the subquery supplies its own parentheses
            return
        tok("(")
        for i in range(1, len(n.children)):
            if i > 1:
                tok(",")
            child(i)
        tok(")")
        return

    if kind is NodeKind.LIKE_EXPR:
        child(0)
        for part in n.label.split():
            tok(part)
        child(1)
        return

    if kind is NodeKind.BETWEEN_EXPR:
        child(0)
        for part in n.label.split():
            tok(part)
        child(1)
        tok("AND")
        child(2)
        return

    if kind is NodeKind.PARTIAL_PREDICATE:
        child(0)
        for part in n.label.split():
            tok(part)
        for i in range(1, len(n.children)):
            child(i)
        return

    if kind is NodeKind.SUBQUERY:
        tok("(")
        child(0)
        tok(")")
        return

    if kind is NodeKind.GROUP_BY:
        tok("GROUP")
        tok("BY")
        _emit_comma_list(n, path, clause, out)
        return

    if kind is NodeKind.ORDER_BY:
        tok("ORDER")
        tok("BY")
        _emit_comma_list(n, path, clause, out)
        return

    if kind is NodeKind.ORDER_ITEM:
        child(0)
        if n.label == "DESC":
            tok("DESC")
        return

    raise ValueError(f"cannot render node kind {kind}")


def _emit_comma_list(n: Node, path: tuple[int, ...], clause: str, out: list[RenderToken]) -> None:
    for i, c in enumerate(n.children):
        if i:
            out.append(RenderToken(",", path, clause))
        _emit(c, path + (i,), clause, out)
