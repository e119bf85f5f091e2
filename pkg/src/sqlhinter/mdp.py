"""Per-exercise Markov decision process over solution steps.

States are deduplicated alias-canonical query trees collected from the
decomposed historical attempts plus instructor ideal solutions (the
cold-start seed). Each non-final state carries exactly one forward action
whose destinations are weighted by the relative frequency of trajectories
that moved that way, plus one backward action to its construction
predecessor. Rewards live only on final states: a submission scoring above
the pass threshold earns its score as a positive reward, anything else
earns the fail reward. Values are computed by undiscounted value
iteration with absorbing final states.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from math import inf

from .aliases import canonicalize_aliases
from .errors import BuildError, NoEscape, ParseError, DecomposeError
from .nodes import Node
from .parse import parse
from .render import render
from .steps import decompose


@dataclass(frozen=True)
class RewardPolicy:
    """Maps a submission score (percent) to a terminal reward."""

    pass_threshold: float = 95.0
    fail_reward: float = -100.0

    def reward_for(self, score: float) -> float:
        return float(score) if score > self.pass_threshold else self.fail_reward


@dataclass
class MdpState:
    id: int
    tree: Node
    is_final: bool = False
    reward: float = 0.0
    value: float = 0.0
    support: int = 0
    sources: set[str] = field(default_factory=set)


@dataclass
class MdpGraph:
    states: dict[int, MdpState] = field(default_factory=dict)
    forward: dict[int, dict[int, float]] = field(default_factory=dict)
    forward_counts: dict[int, Counter] = field(default_factory=dict)
    backward: dict[int, int] = field(default_factory=dict)
    roots: set[int] = field(default_factory=set)
    index: dict[Node, int] = field(default_factory=dict)
    gamma: float = 1.0
    converged: bool = True
    skipped_attempts: int = 0

    def state(self, sid: int) -> MdpState:
        return self.states[sid]

    def passing_terminals(self) -> list[int]:
        return [s.id for s in self.states.values() if s.is_final and s.reward > 0]

    def add_state(self, tree: Node) -> MdpState:
        sid = self.index.get(tree)
        if sid is not None:
            return self.states[sid]
        sid = len(self.states)
        st = MdpState(id=sid, tree=tree)
        self.states[sid] = st
        self.index[tree] = sid
        return st


def build_mdp(
    attempts: list,
    ideals: list[Node],
    policy: RewardPolicy = RewardPolicy(),
) -> MdpGraph:
    """Build the exercise MDP from attempt records and ideal-solution trees.

    ``attempts`` entries expose ``query_text`` and ``score`` (AttemptRecord
    does); unparseable or incomplete attempt queries are skipped and
    counted, never fatal. Ideals are injected as trajectories with a
    perfect score, which keeps at least one positively rewarded branch in
    every graph (the cold-start guarantee).
    """
    if not ideals:
        raise BuildError("at least one ideal solution is required")
    g = MdpGraph()

    trajectories: list[tuple[str, list, float]] = []
    for k, ideal in enumerate(ideals):
        canonical, _ = canonicalize_aliases(ideal)
        try:
            steps = decompose(canonical)
        except DecomposeError as exc:
            # a broken ideal would void the cold-start guarantee
            raise BuildError(f"ideal solution {k} cannot be decomposed: {exc}")
        trajectories.append((f"ideal-{k}", steps, 100.0))
    for i, attempt in enumerate(attempts):
        try:
            tree = parse(attempt.query_text)
            canonical, _ = canonicalize_aliases(tree)
            steps = decompose(canonical)
        except (ParseError, DecomposeError):
            g.skipped_attempts += 1
            continue
        trajectories.append((f"attempt-{i}", steps, float(attempt.score)))

    pred_counts: dict[int, Counter] = {}
    for traj_id, steps, traj_score in trajectories:
        ids = []
        for step in steps:
            st = g.add_state(step.tree)
            st.support += 1
            st.sources.add(traj_id)
            ids.append(st.id)
        g.roots.add(ids[0])
        for a, b in zip(ids, ids[1:]):
            g.forward_counts.setdefault(a, Counter())[b] += 1
            pred_counts.setdefault(b, Counter())[a] += 1
        final = g.states[ids[-1]]
        reward = policy.reward_for(traj_score)
        # a state submitted at several scores keeps its best outcome
        final.reward = max(final.reward, reward) if final.is_final else reward
        final.is_final = True

    for sid, counts in g.forward_counts.items():
        total = sum(counts.values())
        g.forward[sid] = {dest: n / total for dest, n in counts.items()}

    for sid, preds in pred_counts.items():
        if sid in g.roots:
            continue
        best = max(preds.items(), key=lambda kv: (kv[1], -kv[0]))
        g.backward[sid] = best[0]

    for st in g.states.values():
        st.value = st.reward
    return g


def run_value_iteration(
    g: MdpGraph, epsilon: float = 1e-6, max_iter: int | None = None
) -> MdpGraph:
    """Iterate V(s) = max over {forward, backward} of R_s + gamma * E[V(s')].

    Final states are absorbing: their values stay fixed at their rewards,
    which makes the undiscounted iteration converge on these graphs. Stops
    when the largest update falls below epsilon; if max_iter is exhausted
    first the graph is returned with converged=False.
    """
    if max_iter is None:
        max_iter = max(10 * len(g.states), 50)
    values = {sid: (st.reward if st.is_final else st.value) for sid, st in g.states.items()}
    g.converged = False
    for _ in range(max_iter):
        delta = 0.0
        new_values = {}
        for sid, st in g.states.items():
            if st.is_final:
                new_values[sid] = st.reward
                continue
            candidates = []
            fwd = g.forward.get(sid)
            if fwd:
                candidates.append(
                    st.reward + g.gamma * sum(p * values[d] for d, p in fwd.items())
                )
            back = g.backward.get(sid)
            if back is not None:
                candidates.append(st.reward + g.gamma * values[back])
            nv = max(candidates) if candidates else st.reward
            delta = max(delta, abs(nv - values[sid]))
            new_values[sid] = nv
        values = new_values
        if delta < epsilon:
            g.converged = True
            break
    for sid, st in g.states.items():
        st.value = values[sid]
    return g


def escape_incorrect_branch(g: MdpGraph, sid: int) -> int:
    """Back out of a sub-branch whose forward continuations are all losing.

    When the best forward successor of the state already has positive
    value the state is returned unchanged. Otherwise backward actions are
    followed to the first ancestor with a forward destination of positive
    value; with no such ancestor, NoEscape is raised (callers fall back to
    the best seeded branch root).
    """
    st = g.state(sid)
    fwd = g.forward.get(sid, {})
    best = max((g.state(d).value for d in fwd), default=-inf)
    if best >= 0 and fwd:
        return sid
    cur = g.backward.get(sid)
    while cur is not None:
        if any(g.state(d).value > 0 for d in g.forward.get(cur, {})):
            return cur
        cur = g.backward.get(cur)
    raise NoEscape(f"no ancestor of state {sid} leads to a positive branch")


def passing_distance_map(g: MdpGraph) -> dict[int, float]:
    """BFS hop count from every state to its nearest passing terminal.

    Forward destinations and the backward action both count as unit-length
    links. Unreachable states map to infinity.
    """
    rev: dict[int, list[int]] = {sid: [] for sid in g.states}
    for sid, dests in g.forward.items():
        for d in dests:
            rev[d].append(sid)
    for sid, back in g.backward.items():
        rev[back].append(sid)

    dist = {sid: inf for sid in g.states}
    queue = deque()
    for sid in g.passing_terminals():
        dist[sid] = 0
        queue.append(sid)
    while queue:
        cur = queue.popleft()
        for nxt in rev[cur]:
            if dist[nxt] is inf:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def to_dot(g: MdpGraph, max_label: int = 40) -> str:
    """Graphviz DOT rendering of the graph for inspection."""
    lines = ["digraph mdp {", "  rankdir=LR;", "  node [shape=box, fontsize=10];"]
    for st in sorted(g.states.values(), key=lambda s: s.id):
        sql = render(st.tree)
        if len(sql) > max_label:
            sql = sql[: max_label - 3] + "..."
        sql = sql.replace('"', '\\"')
        extras = f"R={st.reward:g} V={st.value:.2f}"
        shape = ' peripheries=2' if st.is_final else ""
        lines.append(f'  s{st.id} [label="[{st.id}] {sql}\\n{extras}"{shape}];')
    for sid, dests in sorted(g.forward.items()):
        for dest, p in sorted(dests.items()):
            lines.append(f'  s{sid} -> s{dest} [label="{p:.2f}"];')
    for sid, back in sorted(g.backward.items()):
        lines.append(f"  s{sid} -> s{back} [style=dashed, color=gray];")
    lines.append("}")
    return "\n".join(lines)


def graph_to_json(g: MdpGraph) -> str:
    data = {
        "gamma": g.gamma,
        "converged": g.converged,
        "skipped_attempts": g.skipped_attempts,
        "roots": sorted(g.roots),
        "states": [
            {
                "id": st.id,
                "sql": render(st.tree),
                "is_final": st.is_final,
                "reward": st.reward,
                "value": st.value,
                "support": st.support,
            }
            for st in sorted(g.states.values(), key=lambda s: s.id)
        ],
        "forward": {
            str(sid): {str(d): p for d, p in sorted(dests.items())}
            for sid, dests in sorted(g.forward.items())
        },
        "backward": {str(sid): dest for sid, dest in sorted(g.backward.items())},
    }
    return json.dumps(data, indent=2)
