"""Canonical query tree: node kinds, structural helpers.

A query tree is an immutable tree of Node objects. Internal nodes represent
expressions (clauses, predicates, function applications); leaves carry the
terminal symbols of the query (column names, table names, literals, aliases).
Keywords and identifiers are case-normalized at parse time (keywords upper,
identifiers lower); string-literal content is preserved verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


class NodeKind(str, Enum):
    QUERY = "Query"
    SELECT_LIST = "SelectList"
    SELECT_ITEM = "SelectItem"
    AGGREGATE = "Aggregate"
    STAR = "Star"
    COLUMN = "Column"
    FROM_LIST = "FromList"
    TABLE_REF = "TableRef"
    JOIN = "Join"
    JOIN_CONDITION = "JoinCondition"
    WHERE = "Where"
    PREDICATE = "Predicate"
    COMPARISON = "Comparison"
    IN_EXPR = "InExpr"
    LIKE_EXPR = "LikeExpr"
    BETWEEN_EXPR = "BetweenExpr"
    LOGICAL_AND = "LogicalAnd"
    LOGICAL_OR = "LogicalOr"
    NOT = "Not"
    SUBQUERY = "Subquery"
    GROUP_BY = "GroupBy"
    HAVING = "Having"
    ORDER_BY = "OrderBy"
    ORDER_ITEM = "OrderItem"
    LITERAL = "Literal"
    IDENTIFIER = "Identifier"
    PARTIAL_PREDICATE = "PartialPredicate"


@dataclass(frozen=True)
class Node:
    """One node of a query tree; equality and hashing are structural."""

    kind: NodeKind
    label: str = ""
    children: tuple["Node", ...] = field(default_factory=tuple)

    def replace(self, **kwargs) -> "Node":
        data = {"kind": self.kind, "label": self.label, "children": self.children}
        data.update(kwargs)
        return Node(**data)

    def __repr__(self) -> str:  # compact, debugging-oriented
        head = self.kind.value if not self.label else f"{self.kind.value}:{self.label}"
        if not self.children:
            return head
        return f"{head}({', '.join(repr(c) for c in self.children)})"


# A query tree is identified with its root node.
QueryTree = Node


def node(kind: NodeKind, label: str = "", children=()) -> Node:
    return Node(kind, label, tuple(children))


def tree_size(t: Node) -> int:
    """Number of nodes in the subtree rooted at t."""
    return 1 + sum(tree_size(c) for c in t.children)


def iter_nodes(t: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def node_at(t: Node, path: tuple[int, ...]) -> Node:
    cur = t
    for i in path:
        cur = cur.children[i]
    return cur


def child_of_kind(t: Node, kind: NodeKind) -> Node | None:
    """First direct child of the given kind, or None."""
    for c in t.children:
        if c.kind is kind:
            return c
    return None


def replace_child_of_kind(t: Node, kind: NodeKind, new_child: Node | None) -> Node:
    """Return t with its (single) child of `kind` replaced, inserted in clause
    order, or removed when new_child is None.

    Only meaningful for Query nodes, whose children follow the fixed clause
    order SelectList, FromList, Where, GroupBy, Having, OrderBy.
    """
    order = [
        NodeKind.SELECT_LIST,
        NodeKind.FROM_LIST,
        NodeKind.WHERE,
        NodeKind.GROUP_BY,
        NodeKind.HAVING,
        NodeKind.ORDER_BY,
    ]
    rank = {k: i for i, k in enumerate(order)}
    kept = [c for c in t.children if c.kind is not kind]
    if new_child is not None:
        kept.append(new_child)
    kept.sort(key=lambda c: rank.get(c.kind, len(order)))
    return t.replace(children=tuple(kept))
