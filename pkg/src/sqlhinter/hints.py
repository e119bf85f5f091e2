"""Match a student's query to the MDP and recommend the next step.

Hint generation walks three stages:

1. the student's canonical tree is matched to the most similar state by
   tree distance (exact-tree hits short-circuit; ties prefer the higher
   value, then higher support, then lower id);
2. if the matched state does not already sit on a path that shortens the
   BFS distance to a passing terminal, backward actions are followed until
   an ancestor with such a forward destination is found (this skips whole
   incorrect sub-branches so hints stay progressive); with no usable
   ancestor the hint falls back to the best seeded branch root;
3. among the distance-reducing forward destinations the one with the
   highest value wins (ties: higher transition probability, lower id),
   and the hint carries its rendered SQL plus an added/removed token diff
   against the student's query.

A student already standing on a passing terminal gets their own query
back as confirmation with an empty diff.
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from math import inf, isinf

from .aliases import canonicalize_aliases
from .errors import EmptySolution, NoHintAvailable, StaleHint
from .mdp import MdpGraph, passing_distance_map
from .nodes import Node, NodeKind, child_of_kind
from .render import render, render_tokens
from .treedist import query_distance


@dataclass(frozen=True)
class DiffOp:
    op: str  # "added" | "removed"
    path: tuple[int, ...]  # node path in the target (added) or student (removed) tree
    token: str

    def to_payload(self) -> dict:
        return {"op": self.op, "path": list(self.path), "token": self.token}


@dataclass
class Hint:
    sql_text: str
    diff: list[DiffOp]
    matched_state: int
    matched_distance: int
    target_state: int
    student_tree: Node  # canonical tree the hint was generated against
    target_tree: Node

    def to_payload(self) -> dict:
        return {
            "sql_text": self.sql_text,
            "diff": [d.to_payload() for d in self.diff],
            "matched_state": self.matched_state,
            "matched_distance": self.matched_distance,
            "target_state": self.target_state,
        }


def _require_select_content(tree: Node) -> None:
    select = child_of_kind(tree, NodeKind.SELECT_LIST)
    if select is None or not select.children:
        raise EmptySolution("the query has no select-list content yet")


def match_state(g: MdpGraph, student: Node) -> tuple[int, int]:
    """Most similar state to the student's query and its tree distance."""
    _require_select_content(student)
    canonical, _ = canonicalize_aliases(student)
    exact = g.index.get(canonical)
    if exact is not None:
        return exact, 0
    best_sid = None
    best_key = None
    for st in g.states.values():
        d = query_distance(canonical, st.tree)
        key = (d, -st.value, -st.support, st.id)
        if best_key is None or key < best_key:
            best_key = key
            best_sid = st.id
    if best_sid is None:
        raise NoHintAvailable("the graph has no states")
    return best_sid, best_key[0]


def generate_hint(g: MdpGraph, student: Node) -> Hint:
    """Construct the next-step hint for the student's current query."""
    _require_select_content(student)
    canonical, _ = canonicalize_aliases(student)
    if not g.passing_terminals():
        raise NoHintAvailable("no passing terminal exists in this graph")
    sid, distance = match_state(g, student)
    dmap = passing_distance_map(g)

    matched = g.state(sid)
    if matched.is_final and matched.reward > 0:
        target = matched  # solution confirmed
    else:
        target_id = _progressive_target(g, sid, dmap)
        target = g.state(target_id)

    diff = compute_diff(canonical, target.tree)
    return Hint(
        sql_text=render(target.tree),
        diff=diff,
        matched_state=sid,
        matched_distance=distance,
        target_state=target.id,
        student_tree=canonical,
        target_tree=target.tree,
    )


def _progressive_target(g: MdpGraph, sid: int, dmap: dict[int, float]) -> int:
    """Forward destination that strictly reduces the distance to a pass.

    Walks backward from the matched state while no forward destination is
    one BFS hop closer to a passing terminal; this is what skips entire
    incorrect sub-branches. Falls back to the best seeded branch root when
    the matched component cannot reach a pass at all.
    """
    anchor = sid
    while anchor is not None:
        here = dmap.get(anchor, inf)
        if here == 0:
            st = g.state(anchor)
            if st.is_final and st.reward > 0:
                return anchor
        if not isinf(here):
            candidates = [
                d for d in g.forward.get(anchor, {}) if dmap.get(d, inf) == here - 1
            ]
            if candidates:
                probs = g.forward[anchor]
                return max(
                    candidates,
                    key=lambda d: (g.state(d).value, probs[d], -d),
                )
        anchor = g.backward.get(anchor)

    # disconnected from every passing terminal: restart from the best root
    roots = [r for r in g.roots if not isinf(dmap.get(r, inf))]
    if not roots:
        raise NoHintAvailable("no passing terminal is reachable")
    return max(roots, key=lambda r: (g.state(r).value, g.state(r).support, -r))


def compute_diff(student: Node, target: Node) -> list[DiffOp]:
    """Token-level diff between two rendered trees, grouped by clause.

    Removed ops carry paths into the student tree, added ops into the
    target tree; replaying them over the student's token stream yields the
    target's token stream.
    """
    a = render_tokens(student)
    b = render_tokens(target)
    matcher = SequenceMatcher(a=[t.text for t in a], b=[t.text for t in b], autojunk=False)
    ops: list[DiffOp] = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag in ("delete", "replace"):
            ops.extend(DiffOp("removed", t.path, t.text) for t in a[i1:i2])
        if tag in ("insert", "replace"):
            ops.extend(DiffOp("added", t.path, t.text) for t in b[j1:j2])
    return ops


def apply_hint(student: Node, hint: Hint) -> Node:
    """Adopt the hint: the student's query becomes the target step.

    Raises StaleHint when the student's query changed since the hint was
    generated (re-applying an already adopted hint stays idempotent).
    """
    canonical, _ = canonicalize_aliases(student)
    if canonical == hint.target_tree:
        return hint.target_tree
    if canonical != hint.student_tree:
        raise StaleHint("the query changed since this hint was generated")
    return hint.target_tree
