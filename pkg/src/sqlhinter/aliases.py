"""Alias canonicalization: rename table aliases to positional names.

Students pick arbitrary alias spellings, which inflates tree distance
between structurally identical queries. Canonicalization renames every
declared alias to t1, t2, ... in order of first appearance in the FROM list
and rewrites qualified column references to match. Each query scope
(outer query, every subquery) is numbered independently; column qualifiers
are resolved innermost-scope-first so correlated references still rewrite
deterministically. Queries without aliases pass through unchanged.
"""

from __future__ import annotations

from .nodes import Node, NodeKind

# original alias -> canonical alias, for the outermost query scope
AliasMap = dict[str, str]


def canonicalize_aliases(tree: Node) -> tuple[Node, AliasMap]:
    """Return (rewritten tree, outer-scope alias map). Idempotent."""
    new_tree, amap = _rewrite_query(tree, scopes=())
    return new_tree, amap


def _collect_scope(query: Node) -> AliasMap:
    amap: AliasMap = {}
    from_list = next((c for c in query.children if c.kind is NodeKind.FROM_LIST), None)
    if from_list is None:
        return amap

    def visit(n: Node) -> None:
        if n.kind is NodeKind.TABLE_REF:
            if n.children and n.children[0].kind is NodeKind.IDENTIFIER:
                alias = n.children[0].label
                if alias not in amap:
                    amap[alias] = f"t{len(amap) + 1}"
        elif n.kind is NodeKind.JOIN:
            for c in n.children:
                visit(c)

    for ref in from_list.children:
        visit(ref)
    return amap


def _rewrite_query(query: Node, scopes: tuple[AliasMap, ...]) -> tuple[Node, AliasMap]:
    amap = _collect_scope(query)
    inner_scopes = (amap,) + scopes
    children = tuple(_rewrite_node(c, inner_scopes) for c in query.children)
    return query.replace(children=children), amap


def _rewrite_node(n: Node, scopes: tuple[AliasMap, ...]) -> Node:
    if n.kind is NodeKind.SUBQUERY:
        sub, _ = _rewrite_query(n.children[0], scopes)
        return n.replace(children=(sub,))
    if n.kind is NodeKind.TABLE_REF and n.children:
        alias_node = n.children[0]
        if alias_node.kind is NodeKind.IDENTIFIER:
            renamed = _lookup(alias_node.label, scopes)
            if renamed is not None:
                alias_node = alias_node.replace(label=renamed)
        return n.replace(children=(alias_node,) + n.children[1:])
    if n.kind is NodeKind.COLUMN and "." in n.label:
        qualifier, col = n.label.split(".", 1)
        renamed = _lookup(qualifier, scopes)
        if renamed is not None:
            return n.replace(label=f"{renamed}.{col}")
        return n
    if n.children:
        return n.replace(children=tuple(_rewrite_node(c, scopes) for c in n.children))
    return n


def _lookup(name: str, scopes: tuple[AliasMap, ...]) -> str | None:
    for scope in scopes:
        if name in scope:
            return scope[name]
    return None
