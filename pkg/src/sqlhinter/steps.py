"""Decompose a complete query into ordered construction steps.

A solution step is the partial query a clause-order construction passes
through. The grain:

1. the full select list alone;
2. the FROM list grown one table reference at a time (JOINs grow along
   their left spine, each join level together with its ON condition);
3. WHERE predicates added per top-level conjunct, each in two sub-steps:
   first the dangling left operand (a PartialPredicate), then the completed
   predicate. A predicate whose right side is a subquery first appears with
   a skeleton subquery holding only its select list, after which the
   subquery's own decomposition is inlined;
4. GROUP BY, 5. HAVING, 6. ORDER BY as one step each.

Consecutive duplicate trees collapse. The final step equals the input.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DecomposeError
from .nodes import Node, NodeKind, child_of_kind, node, replace_child_of_kind


@dataclass(frozen=True)
class SolutionStep:
    index: int
    tree: Node
    is_final: bool


def incomplete_reason(tree: Node) -> str | None:
    """Why the tree is not a finished query, or None when it is."""
    if tree.kind is not NodeKind.QUERY:
        return "not a query tree"
    select = child_of_kind(tree, NodeKind.SELECT_LIST)
    if select is None or not select.children:
        return "empty select list"
    for n in _walk(tree):
        if n.kind is NodeKind.PARTIAL_PREDICATE:
            return "partial predicate"
        if n.kind is NodeKind.AGGREGATE and not n.children:
            return "aggregate without argument"
        if n.kind is NodeKind.JOIN and len(n.children) < 3:
            return "join without ON condition"
        if n.kind is NodeKind.SUBQUERY:
            inner = incomplete_reason(n.children[0])
            if inner is not None:
                return f"subquery: {inner}"
    return None


def _walk(t: Node):
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children)


def decompose(full: Node) -> list[SolutionStep]:
    """Ordered solution steps for a complete query tree."""
    reason = incomplete_reason(full)
    if reason is not None:
        raise DecomposeError(f"cannot decompose an incomplete query: {reason}")
    trees = _stage_trees(full)
    collapsed: list[Node] = []
    for t in trees:
        if not collapsed or collapsed[-1] != t:
            collapsed.append(t)
    return [
        SolutionStep(index=i, tree=t, is_final=(i == len(collapsed) - 1))
        for i, t in enumerate(collapsed)
    ]


def _stage_trees(full: Node) -> list[Node]:
    select = child_of_kind(full, NodeKind.SELECT_LIST)
    base = node(NodeKind.QUERY, children=[select])
    trees: list[Node] = [base]
    current = base

    from_list = child_of_kind(full, NodeKind.FROM_LIST)
    if from_list is not None:
        for partial_from in _from_stages(from_list):
            current = replace_child_of_kind(current, NodeKind.FROM_LIST, partial_from)
            trees.append(current)

    where = child_of_kind(full, NodeKind.WHERE)
    if where is not None:
        for partial_where in _predicate_stages(where.children[0]):
            current = replace_child_of_kind(
                current, NodeKind.WHERE, node(NodeKind.WHERE, children=[partial_where])
            )
            trees.append(current)

    for kind in (NodeKind.GROUP_BY, NodeKind.HAVING, NodeKind.ORDER_BY):
        clause = child_of_kind(full, kind)
        if clause is not None:
            current = replace_child_of_kind(current, kind, clause)
            trees.append(current)

    return trees


def _from_stages(from_list: Node) -> list[Node]:
    """FROM lists growing one table reference at a time."""
    stages: list[Node] = []
    done: list[Node] = []
    for ref in from_list.children:
        for partial_ref in _ref_stages(ref):
            stages.append(from_list.replace(children=tuple(done + [partial_ref])))
        done.append(ref)
    return stages


def _ref_stages(ref: Node) -> list[Node]:
    if ref.kind is NodeKind.JOIN:
        return _ref_stages(ref.children[0]) + [ref]
    return [ref]


def _predicate_stages(pred: Node) -> list[Node]:
    """WHERE contents growing conjunct by conjunct, two sub-steps each."""
    if pred.kind is NodeKind.LOGICAL_AND:
        conjuncts = list(pred.children)
    else:
        conjuncts = [pred]
    stages: list[Node] = []
    done: list[Node] = []
    for conj in conjuncts:
        dangling = node(NodeKind.PARTIAL_PREDICATE, children=[_left_operand(conj)])
        stages.append(_conjoin(done + [dangling]))
        for staged_conj in _conjunct_stages(conj):
            stages.append(_conjoin(done + [staged_conj]))
        done.append(conj)
    return stages


def _conjoin(conjuncts: list[Node]) -> Node:
    if len(conjuncts) == 1:
        return conjuncts[0]
    return node(NodeKind.LOGICAL_AND, "AND", conjuncts)


def _left_operand(expr: Node) -> Node:
    if expr.kind in (
        NodeKind.COMPARISON,
        NodeKind.IN_EXPR,
        NodeKind.LIKE_EXPR,
        NodeKind.BETWEEN_EXPR,
        NodeKind.PARTIAL_PREDICATE,
    ):
        return expr.children[0]
    if expr.kind in (NodeKind.NOT, NodeKind.LOGICAL_AND, NodeKind.LOGICAL_OR):
        return _left_operand(expr.children[0])
    return expr


def _conjunct_stages(conj: Node) -> list[Node]:
    """The completed conjunct, staged through its first subquery if any."""
    sub_path = _find_subquery(conj, ())
    if sub_path is None:
        return [conj]
    inner = _node_at(conj, sub_path).children[0]
    return [
        _replace_at(conj, sub_path, node(NodeKind.SUBQUERY, children=[step.tree]))
        for step in decompose(inner)
    ]


def _find_subquery(n: Node, path: tuple[int, ...]) -> tuple[int, ...] | None:
    if n.kind is NodeKind.SUBQUERY:
        return path
    for i, c in enumerate(n.children):
        found = _find_subquery(c, path + (i,))
        if found is not None:
            return found
    return None


def _node_at(t: Node, path: tuple[int, ...]) -> Node:
    for i in path:
        t = t.children[i]
    return t


def _replace_at(t: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    i = path[0]
    kids = list(t.children)
    kids[i] = _replace_at(kids[i], path[1:], new)
    return t.replace(children=tuple(kids))


_PREDICATE_KINDS = frozenset(
    {
        NodeKind.COMPARISON,
        NodeKind.IN_EXPR,
        NodeKind.LIKE_EXPR,
        NodeKind.BETWEEN_EXPR,
        NodeKind.PARTIAL_PREDICATE,
    }
)


def _node_matches(pattern: Node, target: Node) -> bool:
    if (pattern.kind, pattern.label) == (target.kind, target.label):
        return True
    # a dangling predicate matches the completed predicate it grows into
    return pattern.kind is NodeKind.PARTIAL_PREDICATE and target.kind in _PREDICATE_KINDS


def extension_of(prev: Node, next_tree: Node) -> bool:
    """True iff prev is obtainable from next_tree by node deletions only.

    Deleting a node splices its children into its parent's child list in
    place; order is preserved throughout (ordered tree inclusion). The one
    extra allowance: a PartialPredicate in prev matches the completed
    predicate node it grows into, since completion relabels that node
    rather than adding one above it.
    """
    memo: dict[tuple, bool] = {}

    def included(pattern: tuple[Node, ...], target: tuple[Node, ...]) -> bool:
        if not pattern:
            return True
        if sum(1 + _count(t) for t in target) < sum(1 + _count(p) for p in pattern):
            return False
        key = (pattern, target)
        cached = memo.get(key)
        if cached is not None:
            return cached
        head = target[0]
        # delete the head of the target forest, splicing its children
        result = included(pattern, head.children + target[1:])
        if not result:
            p = pattern[0]
            if _node_matches(p, head):
                result = included(p.children, head.children) and included(
                    pattern[1:], target[1:]
                )
        memo[key] = result
        return result

    return included((prev,), (next_tree,))


def _count(t: Node) -> int:
    return sum(1 + _count(c) for c in t.children)
