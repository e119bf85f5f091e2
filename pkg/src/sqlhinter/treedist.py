"""Tree edit distance between query trees.

Two distances are provided:

* ``zhang_shasha`` -- exact minimal ordered tree edit distance (unit costs)
  via the classic keyroot dynamic program.
* ``query_distance`` -- the distance used for MDP state matching. It equals
  ordered tree edit distance except that at nodes whose children are
  semantically order-free (select lists, from lists, AND/OR conjunct lists,
  GROUP BY columns) the child lists are compared as multisets: pairwise
  subtree distances are computed recursively and a minimum-cost assignment
  is taken, with unmatched children costing their full subtree size.

Both operate on unit costs: insert 1, delete 1, relabel 1 when the
(kind, label) signatures differ and 0 otherwise. Unordered matching never
exceeds the ordered cost, so ``query_distance(a, b) <= zhang_shasha(a, b)``
for every pair.

Exact assignment is affordable because query-tree child lists are small
(about ten entries at most); general unordered tree edit distance is
NP-hard and is deliberately not attempted.
"""

from __future__ import annotations

import sys

import numpy as np
from scipy.optimize import linear_sum_assignment

from .nodes import Node, NodeKind, tree_size

UNORDERED_KINDS: frozenset[NodeKind] = frozenset(
    {
        NodeKind.SELECT_LIST,
        NodeKind.FROM_LIST,
        NodeKind.LOGICAL_AND,
        NodeKind.LOGICAL_OR,
        NodeKind.GROUP_BY,
    }
)


def _sig(n: Node) -> tuple[NodeKind, str]:
    return (n.kind, n.label)


def _relabel(a: Node, b: Node) -> int:
    return 0 if _sig(a) == _sig(b) else 1


# ---------------------------------------------------------------------------
# Zhang-Shasha ordered tree edit distance (keyroot formulation)
# ---------------------------------------------------------------------------


class _Annotated:
    """Postorder node array with leftmost-leaf-descendant indices and keyroots."""

    def __init__(self, root: Node):
        self.nodes: list[Node] = []
        self.lmds: list[int] = []
        self._index(root)
        keyroots: dict[int, int] = {}
        for i, lmd in enumerate(self.lmds):
            keyroots[lmd] = i
        self.keyroots = sorted(keyroots.values())

    def _index(self, n: Node) -> int:
        """Postorder-number the subtree; return this node's lmd index."""
        if not n.children:
            self.nodes.append(n)
            self.lmds.append(len(self.nodes) - 1)
            return self.lmds[-1]
        lmd = None
        for c in n.children:
            child_lmd = self._index(c)
            if lmd is None:
                lmd = child_lmd
        self.nodes.append(n)
        self.lmds.append(lmd)
        return lmd


def zhang_shasha(a: Node, b: Node) -> int:
    """Exact ordered tree edit distance under unit costs."""
    ta, tb = _Annotated(a), _Annotated(b)
    na, nb = len(ta.nodes), len(tb.nodes)
    treedists = [[0] * nb for _ in range(na)]

    for i in ta.keyroots:
        for j in tb.keyroots:
            _zs_treedist(ta, tb, i, j, treedists)
    return treedists[na - 1][nb - 1]


def _zs_treedist(ta: _Annotated, tb: _Annotated, i: int, j: int, treedists) -> None:
    al, bl = ta.lmds, tb.lmds
    an, bn = ta.nodes, tb.nodes

    m = i - al[i] + 2
    n = j - bl[j] + 2
    fd = [[0] * n for _ in range(m)]
    ioff = al[i] - 1
    joff = bl[j] - 1

    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + 1
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + 1

    for x in range(1, m):
        for y in range(1, n):
            if al[i] == al[x + ioff] and bl[j] == bl[y + joff]:
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[x - 1][y - 1] + _relabel(an[x + ioff], bn[y + joff]),
                )
                treedists[x + ioff][y + joff] = fd[x][y]
            else:
                p = al[x + ioff] - 1 - ioff
                q = bl[y + joff] - 1 - joff
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[p][q] + treedists[x + ioff][y + joff],
                )


# ---------------------------------------------------------------------------
# query_distance: ordered TED with unordered-multiset comparison
# ---------------------------------------------------------------------------


class _Indexed:
    """Flat id-indexed view of a tree for memoized forest recursion."""

    def __init__(self, root: Node):
        self.nodes: list[Node] = []
        self.children: list[tuple[int, ...]] = []
        self.sizes: list[int] = []
        self.root = self._add(root)

    def _add(self, n: Node) -> int:
        idx = len(self.nodes)
        self.nodes.append(n)
        self.children.append(())
        self.sizes.append(0)
        kids = tuple(self._add(c) for c in n.children)
        self.children[idx] = kids
        self.sizes[idx] = 1 + sum(self.sizes[k] for k in kids)
        return idx


class _QueryDistance:
    def __init__(self, a: Node, b: Node, unordered: frozenset[NodeKind]):
        self.a = _Indexed(a)
        self.b = _Indexed(b)
        self.unordered = unordered
        self._forest_memo: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}

    def run(self) -> int:
        return self.forest((self.a.root,), (self.b.root,))

    def forest(self, fa: tuple[int, ...], fb: tuple[int, ...]) -> int:
        if not fa and not fb:
            return 0
        if not fa:
            return sum(self.b.sizes[j] for j in fb)
        if not fb:
            return sum(self.a.sizes[i] for i in fa)
        key = (fa, fb)
        cached = self._forest_memo.get(key)
        if cached is not None:
            return cached
        v, w = fa[-1], fb[-1]
        best = min(
            self.forest(fa[:-1] + self.a.children[v], fb) + 1,
            self.forest(fa, fb[:-1] + self.b.children[w]) + 1,
            self.forest(fa[:-1], fb[:-1]) + self.match(v, w),
        )
        self._forest_memo[key] = best
        return best

    def match(self, v: int, w: int) -> int:
        """Cost of mapping node v onto node w (their subtrees align)."""
        nv, nw = self.a.nodes[v], self.b.nodes[w]
        cost = _relabel(nv, nw)
        ca, cb = self.a.children[v], self.b.children[w]
        ordered = self.forest(ca, cb)
        if nv.kind in self.unordered and nw.kind in self.unordered:
            return cost + min(ordered, self.assignment(ca, cb))
        return cost + ordered

    def assignment(self, ca: tuple[int, ...], cb: tuple[int, ...]) -> int:
        """Minimum-cost multiset matching of two child lists.

        Real-to-real cells hold recursive subtree distances; a child left
        unmatched pays its subtree size (pure deletion/insertion).
        """
        n, m = len(ca), len(cb)
        if n == 0:
            return sum(self.b.sizes[j] for j in cb)
        if m == 0:
            return sum(self.a.sizes[i] for i in ca)
        dim = n + m
        cost = np.full((dim, dim), 0.0)
        for i, x in enumerate(ca):
            cost[i, m:] = self.a.sizes[x]
            for j, y in enumerate(cb):
                cost[i, j] = self.forest((x,), (y,))
        for j, y in enumerate(cb):
            cost[n:, j] = self.b.sizes[y]
        rows, cols = linear_sum_assignment(cost)
        return int(round(cost[rows, cols].sum()))


def query_distance(a: Node, b: Node, unordered: frozenset[NodeKind] = UNORDERED_KINDS) -> int:
    """Tree distance for MDP state matching; see module docstring."""
    total = tree_size(a) + tree_size(b)
    if sys.getrecursionlimit() < 4 * total + 100:
        sys.setrecursionlimit(4 * total + 100)
    return _QueryDistance(a, b, unordered).run()
