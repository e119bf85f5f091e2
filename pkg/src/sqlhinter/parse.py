"""Error-tolerant recursive-descent parser for the supported SQL subset.

The subset: SELECT [DISTINCT], aggregates (COUNT/SUM/AVG/MIN/MAX), `*`,
column lists with optional AS aliases, comma joins and JOIN ... ON,
WHERE with AND/OR/NOT and the operators =, <>, <, <=, >, >=, IN
(value list or subquery), LIKE, BETWEEN, nested SELECT, GROUP BY,
HAVING and ORDER BY ASC/DESC.

Incomplete input is expected, not exceptional: a query abandoned mid-clause
parses to a tree with partial nodes (a dangling `WHERE dept_id` becomes a
PartialPredicate) and dangling clause keywords are dropped. ParseError is
raised only when no prefix of the input is interpretable, e.g. text that
does not start with SELECT. Tokens past the last interpretable clause are
ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .nodes import Node, NodeKind, node

AGGREGATE_NAMES = {"COUNT", "SUM", "AVG", "MIN", "MAX"}

KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER",
    "ASC", "DESC", "AND", "OR", "NOT", "IN", "LIKE", "BETWEEN", "AS", "ON",
    "JOIN", "INNER", "LEFT", "RIGHT", "OUTER",
} | AGGREGATE_NAMES

COMPARISON_OPS = {"=", "<>", "<", "<=", ">", ">="}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><=|>=|<>|!=|=|<|>)
  | (?P<punct>[(),.;*])
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<str>"(?:[^"]*)"?|'(?:[^']*)'?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | num | str | op | punct
    text: str  # normalized: keywords upper, identifiers lower
    pos: int


def tokenize(sql_text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(sql_text)
    while i < n:
        m = _TOKEN_RE.match(sql_text, i)
        if m is None:
            raise ParseError(i, f"a valid token (found {sql_text[i]!r})")
        i = m.end()
        if m.lastgroup == "ws":
            continue
        text = m.group()
        if m.lastgroup == "ident":
            upper = text.upper()
            if upper in KEYWORDS:
                tokens.append(Token("keyword", upper, m.start()))
            else:
                tokens.append(Token("ident", text.lower(), m.start()))
        elif m.lastgroup == "op":
            tokens.append(Token("op", "<>" if text == "!=" else text, m.start()))
        elif m.lastgroup == "punct":
            tokens.append(Token("punct", text, m.start()))
        elif m.lastgroup == "num":
            tokens.append(Token("num", text, m.start()))
        else:  # string literal; tolerate missing closing quote at end of input
            body = text[1:]
            if body.endswith(text[0]):
                body = body[:-1]
            tokens.append(Token("str", body, m.start()))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- cursor helpers -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def at_keyword(self, *names: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "keyword" and t.text in names

    def at_punct(self, ch: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "punct" and t.text == ch

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def accept_keyword(self, *names: str) -> bool:
        if self.at_keyword(*names):
            self.advance()
            return True
        return False

    def accept_punct(self, ch: str) -> bool:
        if self.at_punct(ch):
            self.advance()
            return True
        return False

    def done(self) -> bool:
        return self.i >= len(self.tokens)

    def at_clause_boundary(self) -> bool:
        return self.at_keyword("FROM", "WHERE", "GROUP", "HAVING", "ORDER")

    # -- grammar ------------------------------------------------------------

    def parse_query(self) -> Node:
        if not self.accept_keyword("SELECT"):
            t = self.peek()
            raise ParseError(t.pos if t else 0, "SELECT")
        distinct = self.accept_keyword("DISTINCT")
        children: list[Node] = [self.parse_select_list(distinct)]
        if self.accept_keyword("FROM"):
            from_list = self.parse_from_list()
            if from_list is not None:
                children.append(from_list)
        if self.accept_keyword("WHERE"):
            cond = self.parse_condition()
            if cond is not None:
                children.append(node(NodeKind.WHERE, children=[cond]))
        if self.at_keyword("GROUP"):
            group = self.parse_group_by()
            if group is not None:
                children.append(group)
        if self.accept_keyword("HAVING"):
            cond = self.parse_condition()
            if cond is not None:
                children.append(node(NodeKind.HAVING, children=[cond]))
        if self.at_keyword("ORDER"):
            order = self.parse_order_by()
            if order is not None:
                children.append(order)
        return node(NodeKind.QUERY, children=children)

    def parse_select_list(self, distinct: bool) -> Node:
        items: list[Node] = []
        while not self.done() and not self.at_clause_boundary() and not self.at_punct(")"):
            item = self.parse_select_item()
            if item is None:
                break
            items.append(item)
            if not self.accept_punct(","):
                break
        return node(NodeKind.SELECT_LIST, "DISTINCT" if distinct else "", items)

    def parse_select_item(self) -> Node | None:
        expr = self.parse_value_expr()
        if expr is None:
            return None
        children = [expr]
        if self.accept_keyword("AS"):
            t = self.peek()
            if t is not None and t.kind == "ident":
                self.advance()
                children.append(node(NodeKind.IDENTIFIER, t.text))
        return node(NodeKind.SELECT_ITEM, children=children)

    def parse_value_expr(self) -> Node | None:
        """Star, aggregate call, column reference or literal."""
        t = self.peek()
        if t is None:
            return None
        if t.kind == "punct" and t.text == "*":
            self.advance()
            return node(NodeKind.STAR, "*")
        if t.kind == "keyword" and t.text in AGGREGATE_NAMES:
            self.advance()
            args: list[Node] = []
            if self.accept_punct("("):
                arg = self.parse_value_expr()
                if arg is not None:
                    args.append(arg)
                self.accept_punct(")")
            return node(NodeKind.AGGREGATE, t.text, args)
        if t.kind == "ident":
            return self.parse_column()
        if t.kind == "num":
            self.advance()
            return node(NodeKind.LITERAL, t.text)
        if t.kind == "str":
            self.advance()
            return node(NodeKind.LITERAL, f"'{t.text}'")
        return None

    def parse_column(self) -> Node:
        name = self.advance().text
        if self.at_punct("."):
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == "ident":
                self.advance()
                self.advance()
                name = f"{name}.{nxt.text}"
        return node(NodeKind.COLUMN, name)

    def parse_from_list(self) -> Node | None:
        refs: list[Node] = []
        while True:
            ref = self.parse_table_ref()
            if ref is None:
                break
            while self.at_keyword("JOIN", "INNER", "LEFT", "RIGHT"):
                joined = self.parse_join(ref)
                if joined is None:
                    break
                ref = joined
            refs.append(ref)
            if not self.accept_punct(","):
                break
        if not refs:
            return None
        return node(NodeKind.FROM_LIST, children=refs)

    def parse_table_ref(self) -> Node | None:
        t = self.peek()
        if t is None or t.kind != "ident":
            return None
        self.advance()
        children: list[Node] = []
        self.accept_keyword("AS")
        alias = self.peek()
        if alias is not None and alias.kind == "ident":
            self.advance()
            children.append(node(NodeKind.IDENTIFIER, alias.text))
        return node(NodeKind.TABLE_REF, t.text, children)

    def parse_join(self, left: Node) -> Node | None:
        label_parts: list[str] = []
        if self.at_keyword("INNER", "LEFT", "RIGHT"):
            label_parts.append(self.advance().text)
            self.accept_keyword("OUTER")
        if not self.accept_keyword("JOIN"):
            return None
        label_parts.append("JOIN")
        right = self.parse_table_ref()
        if right is None:
            return None  # dangling JOIN keyword: keep what we had
        children = [left, right]
        if self.accept_keyword("ON"):
            cond = self.parse_condition()
            if cond is not None:
                children.append(node(NodeKind.JOIN_CONDITION, children=[cond]))
        return node(NodeKind.JOIN, " ".join(label_parts), children)

    # Boolean expressions: OR is weakest, then AND, then NOT. AND/OR nodes
    # are flattened to n-ary form so conjunct order-insensitivity and
    # per-conjunct decomposition operate on one level.

    def parse_condition(self) -> Node | None:
        terms: list[Node] = []
        term = self.parse_and_term()
        if term is None:
            return None
        terms.append(term)
        while self.at_keyword("OR"):
            self.advance()
            nxt = self.parse_and_term()
            if nxt is None:
                break
            terms.append(nxt)
        if len(terms) == 1:
            return terms[0]
        flat: list[Node] = []
        for t in terms:
            flat.extend(t.children if t.kind is NodeKind.LOGICAL_OR else [t])
        return node(NodeKind.LOGICAL_OR, "OR", flat)

    def parse_and_term(self) -> Node | None:
        terms: list[Node] = []
        term = self.parse_not_term()
        if term is None:
            return None
        terms.append(term)
        while self.at_keyword("AND"):
            self.advance()
            nxt = self.parse_not_term()
            if nxt is None:
                break
            terms.append(nxt)
        if len(terms) == 1:
            return terms[0]
        flat: list[Node] = []
        for t in terms:
            flat.extend(t.children if t.kind is NodeKind.LOGICAL_AND else [t])
        return node(NodeKind.LOGICAL_AND, "AND", flat)

    def parse_not_term(self) -> Node | None:
        if self.accept_keyword("NOT"):
            inner = self.parse_not_term()
            if inner is None:
                return None
            return node(NodeKind.NOT, "NOT", [inner])
        if self.at_punct("("):
            nxt = self.peek(1)
            if nxt is not None and not (nxt.kind == "keyword" and nxt.text == "SELECT"):
                self.advance()
                inner = self.parse_condition()
                self.accept_punct(")")
                return inner
        return self.parse_predicate()

    def parse_predicate(self) -> Node | None:
        left = self.parse_value_expr()
        if left is None:
            return None
        negated = self.accept_keyword("NOT")
        t = self.peek()
        if t is not None and t.kind == "op" and not negated:
            op = self.advance().text
            right = self.parse_operand_or_subquery()
            if right is None:
                return node(NodeKind.PARTIAL_PREDICATE, op, [left])
            return node(NodeKind.COMPARISON, op, [left, right])
        if self.at_keyword("IN"):
            self.advance()
            label = "NOT IN" if negated else "IN"
            items = self.parse_in_rhs()
            if items is None:
                return node(NodeKind.PARTIAL_PREDICATE, label, [left])
            return node(NodeKind.IN_EXPR, label, [left, *items])
        if self.at_keyword("LIKE"):
            self.advance()
            label = "NOT LIKE" if negated else "LIKE"
            t = self.peek()
            if t is not None and t.kind in ("str", "num"):
                self.advance()
                lit = f"'{t.text}'" if t.kind == "str" else t.text
                return node(NodeKind.LIKE_EXPR, label, [left, node(NodeKind.LITERAL, lit)])
            return node(NodeKind.PARTIAL_PREDICATE, label, [left])
        if self.at_keyword("BETWEEN"):
            self.advance()
            label = "NOT BETWEEN" if negated else "BETWEEN"
            lo = self.parse_value_expr()
            if lo is None:
                return node(NodeKind.PARTIAL_PREDICATE, label, [left])
            if not self.accept_keyword("AND"):
                return node(NodeKind.PARTIAL_PREDICATE, label, [left, lo])
            hi = self.parse_value_expr()
            if hi is None:
                return node(NodeKind.PARTIAL_PREDICATE, label, [left, lo])
            return node(NodeKind.BETWEEN_EXPR, label, [left, lo, hi])
        # no operator at all: a predicate under construction
        label = "NOT" if negated else ""
        return node(NodeKind.PARTIAL_PREDICATE, label, [left])

    def parse_operand_or_subquery(self) -> Node | None:
        if self.at_punct("("):
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == "keyword" and nxt.text == "SELECT":
                return self.parse_subquery()
        return self.parse_value_expr()

    def parse_in_rhs(self) -> list[Node] | None:
        """Contents of IN ( ... ): a subquery or a literal list."""
        if not self.accept_punct("("):
            return None
        if self.at_keyword("SELECT"):
            sub = self.parse_query()
            self.accept_punct(")")
            return [node(NodeKind.SUBQUERY, children=[sub])]
        items: list[Node] = []
        while True:
            t = self.peek()
            if t is None or (t.kind == "punct" and t.text == ")"):
                break
            if t.kind == "num":
                self.advance()
                items.append(node(NodeKind.LITERAL, t.text))
            elif t.kind == "str":
                self.advance()
                items.append(node(NodeKind.LITERAL, f"'{t.text}'"))
            elif t.kind == "ident":
                items.append(self.parse_column())
            else:
                break
            if not self.accept_punct(","):
                break
        self.accept_punct(")")
        if not items:
            return None
        return items

    def parse_subquery(self) -> Node:
        self.accept_punct("(")
        sub = self.parse_query()
        self.accept_punct(")")
        return node(NodeKind.SUBQUERY, children=[sub])

    def parse_group_by(self) -> Node | None:
        self.accept_keyword("GROUP")
        if not self.accept_keyword("BY"):
            return None
        cols: list[Node] = []
        while True:
            t = self.peek()
            if t is None or t.kind != "ident":
                break
            cols.append(self.parse_column())
            if not self.accept_punct(","):
                break
        if not cols:
            return None
        return node(NodeKind.GROUP_BY, children=cols)

    def parse_order_by(self) -> Node | None:
        self.accept_keyword("ORDER")
        if not self.accept_keyword("BY"):
            return None
        items: list[Node] = []
        while True:
            expr = self.parse_value_expr()
            if expr is None:
                break
            direction = "ASC"
            if self.at_keyword("ASC", "DESC"):
                direction = self.advance().text
            items.append(node(NodeKind.ORDER_ITEM, direction, [expr]))
            if not self.accept_punct(","):
                break
        if not items:
            return None
        return node(NodeKind.ORDER_BY, children=items)


def parse(sql_text: str) -> Node:
    """Parse SQL text (possibly incomplete) into a canonical query tree.

    Raises ParseError when the text is empty, contains an illegal character,
    or does not begin with SELECT.
    """
    if not sql_text or not sql_text.strip():
        raise ParseError(0, "a non-empty query")
    tokens = tokenize(sql_text)
    if not tokens:
        raise ParseError(0, "a non-empty query")
    return _Parser(tokens).parse_query()
