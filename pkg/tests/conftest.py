"""Shared fixtures: schema data, a hand-built reference MDP, generators
for random trees and random query texts, and the brute-force tree edit
distance oracle used to validate both distance implementations."""

from __future__ import annotations

import random

import pytest

from sqlhinter.executor import schema_from_dict
from sqlhinter.mdp import MdpGraph, MdpState
from sqlhinter.nodes import Node, NodeKind, node
from sqlhinter.parse import parse

# ---------------------------------------------------------------------------
# schema and exercise fixtures
# ---------------------------------------------------------------------------

# The data is arranged so that the count of SALES employees (4) equals the
# count of departments having any employee (4): both published solution
# shapes for the sales-count exercise return the same single-cell matrix.
COMPANY_SCHEMA = {
    "name": "company",
    "tables": [
        {
            "name": "department",
            "columns": [
                {"name": "dept_id", "type": "int"},
                {"name": "name", "type": "text"},
                {"name": "loc_id", "type": "int"},
            ],
            "rows": [
                [10, "SALES", 1],
                [20, "RESEARCH", 2],
                [30, "ACCOUNTING", 1],
                [40, "HR", 2],
                [50, "MARKETING", 2],
            ],
        },
        {
            "name": "employee",
            "columns": [
                {"name": "emp_id", "type": "int"},
                {"name": "name", "type": "text"},
                {"name": "dept_id", "type": "int"},
                {"name": "salary", "type": "float"},
            ],
            "rows": [
                [1, "ada", 10, 4200.0],
                [2, "grace", 10, 4800.0],
                [3, "alan", 10, 3900.0],
                [4, "edsger", 10, 5100.0],
                [5, "donald", 20, 4400.0],
                [6, "barbara", 40, 4700.0],
                [7, "john", 30, 3600.0],
            ],
        },
        {
            "name": "location",
            "columns": [
                {"name": "loc_id", "type": "int"},
                {"name": "region", "type": "text"},
            ],
            "rows": [
                [1, "DALLAS"],
                [2, "BOSTON"],
            ],
        },
    ],
}

TABLE1_ROW1_IDEAL = (
    'SELECT COUNT(*) FROM employee, department '
    'WHERE employee.dept_ID = department.dept_ID AND department.name = "SALES"'
)
TABLE1_ROW1_ALT = (
    'SELECT COUNT(*) FROM department WHERE dept_ID IN (SELECT dept_ID FROM employee)'
)
TABLE1_ROW2_IDEAL = (
    'SELECT COUNT(*) FROM employee e, department d, location l '
    'WHERE e.dept_ID = d.dept_ID AND d.loc_ID = l.loc_ID AND region = "DALLAS" GROUP BY region'
)
TABLE1_ROW2_ALT = (
    'SELECT COUNT(e.emp_ID) FROM employee e, location l, department d '
    'WHERE e.dept_ID = d.dept_ID AND d.loc_ID = l.loc_ID AND region = "DALLAS" GROUP BY region'
)
TABLE1_ROW2_STUDENT = 'SELECT COUNT(e.emp_ID) FROM employee e, location l WHERE region = "DALLAS"'


@pytest.fixture
def company_schema():
    return schema_from_dict(COMPANY_SCHEMA)


EXERCISE_BUNDLES = [
    {
        "id": "sales-count",
        "description": 'Return the number of employees in department "SALES".',
        "difficulty": "difficult",
        "schema": "company",
        "schema_image": "company.png",
        "ideal_solutions": [TABLE1_ROW1_IDEAL, TABLE1_ROW1_ALT],
        "evaluation_rule": {"column_names_matter": False},
    },
    {
        "id": "dallas-count",
        "description": 'Return the number of employees in region "DALLAS".',
        "difficulty": "moderate",
        "schema": "company",
        "schema_image": "company.png",
        "ideal_solutions": [TABLE1_ROW2_IDEAL],
        "evaluation_rule": {"column_names_matter": False},
    },
    {
        "id": "easy-names",
        "description": "List the names of employees in department 10, ordered by name.",
        "difficulty": "easy",
        "schema": "company",
        "schema_image": "company.png",
        "ideal_solutions": ["SELECT name FROM employee WHERE dept_id = 10 ORDER BY name"],
        "evaluation_rule": {"order_matters": True},
    },
]


def make_data_dir(root) -> str:
    """Write the sample schema and exercise bundles under root/data."""
    import json
    from pathlib import Path

    data = Path(root) / "data"
    (data / "schemas").mkdir(parents=True, exist_ok=True)
    (data / "exercises").mkdir(parents=True, exist_ok=True)
    (data / "schemas" / "company.json").write_text(json.dumps(COMPANY_SCHEMA, indent=2))
    for bundle in EXERCISE_BUNDLES:
        (data / "exercises" / f"{bundle['id']}.json").write_text(json.dumps(bundle, indent=2))
    return str(data)


@pytest.fixture
def data_dir(tmp_path):
    return make_data_dir(tmp_path)


# ---------------------------------------------------------------------------
# hand-built reference MDP (the shape discussed around the example graph:
# four terminals rewarded +100, -100, +90 and +55, a bad IN branch that
# requires stepping two states back, probabilistic junctions)
# ---------------------------------------------------------------------------

REFERENCE_STATE_SQL = [
    "SELECT COUNT(*)",                                                                    # 0
    "SELECT COUNT(*) FROM employee",                                                      # 1
    "SELECT COUNT(*) FROM employee, department",                                          # 2
    "SELECT COUNT(*) FROM employee, department WHERE employee.dept_id",                   # 3
    "SELECT COUNT(*) FROM employee, department WHERE employee.dept_id = department.dept_id",  # 4
    "SELECT COUNT(*) FROM employee, department "
    "WHERE employee.dept_id = department.dept_id AND department.name",                    # 5
    "SELECT COUNT(*) FROM employee, department "
    "WHERE employee.dept_id = department.dept_id AND department.name = 'SALES'",          # 6 final +100
    "SELECT COUNT(*) FROM employee WHERE dept_id",                                        # 7
    "SELECT COUNT(*) FROM employee WHERE dept_id IN (SELECT dept_id FROM department)",    # 8 final -100
    "SELECT COUNT(*) FROM employee, department "
    "WHERE employee.dept_id = department.dept_id GROUP BY department.name",               # 9 final +90
    "SELECT COUNT(*) FROM employee, department WHERE department.name",                    # 10
    "SELECT COUNT(*) FROM employee, department WHERE department.name = 'SALES'",          # 11 final +55
]

REFERENCE_FINALS = {6: 100.0, 8: -100.0, 9: 90.0, 11: 55.0}

REFERENCE_FORWARD_COUNTS = {
    0: {1: 4},
    1: {2: 3, 7: 1},
    2: {3: 2, 10: 1},
    3: {4: 2},
    4: {5: 1, 9: 1},
    5: {6: 1},
    7: {8: 1},
    10: {11: 1},
}

REFERENCE_BACKWARD = {1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 6: 5, 7: 1, 8: 7, 9: 4, 10: 2, 11: 10}

# trajectories: W=(0..6), X=(0,1,7,8), G=(0..4,9), P=(0,1,2,10,11)
REFERENCE_TRAJECTORIES = {
    "W": (0, 1, 2, 3, 4, 5, 6),
    "X": (0, 1, 7, 8),
    "G": (0, 1, 2, 3, 4, 9),
    "P": (0, 1, 2, 10, 11),
}
REFERENCE_SUPPORT = {0: 4, 1: 4, 2: 3, 3: 2, 4: 2, 5: 1, 6: 1, 7: 1, 8: 1, 9: 1, 10: 1, 11: 1}

# analytic fixed point of the value iteration on this graph
REFERENCE_VALUES = {
    0: 95.0, 1: 95.0, 2: 95.0, 3: 95.0, 4: 95.0, 5: 100.0,
    6: 100.0, 7: 95.0, 8: -100.0, 9: 90.0, 10: 95.0, 11: 55.0,
}

# BFS hops to the nearest passing terminal (forward and backward links)
REFERENCE_DIST_SOL = {0: 4, 1: 3, 2: 2, 3: 2, 4: 1, 5: 1, 6: 0, 7: 4, 8: 5, 9: 0, 10: 1, 11: 0}


def build_reference_graph() -> MdpGraph:
    from collections import Counter

    g = MdpGraph()
    for sid, sql in enumerate(REFERENCE_STATE_SQL):
        tree = parse(sql)
        st = MdpState(id=sid, tree=tree, support=REFERENCE_SUPPORT[sid])
        if sid in REFERENCE_FINALS:
            st.is_final = True
            st.reward = REFERENCE_FINALS[sid]
            st.value = st.reward
        g.states[sid] = st
        g.index[tree] = sid
    for sid, counts in REFERENCE_FORWARD_COUNTS.items():
        total = sum(counts.values())
        g.forward[sid] = {dest: n / total for dest, n in counts.items()}
        g.forward_counts[sid] = Counter(counts)
    g.backward = dict(REFERENCE_BACKWARD)
    g.roots = {0}
    for name, path in REFERENCE_TRAJECTORIES.items():
        for sid in path:
            g.states[sid].sources.add(name)
    return g


@pytest.fixture
def reference_graph():
    return build_reference_graph()


# ---------------------------------------------------------------------------
# generic labeled ordered trees + brute-force edit distance oracle
# ---------------------------------------------------------------------------


def leaf_kind_tree(label: str, children=()) -> Node:
    """Trees for distance tests use a kind that is never unordered."""
    return node(NodeKind.COLUMN, label, children)


def all_trees(n: int, labels: str = "abc"):
    """Every ordered tree with exactly n nodes over the label alphabet."""
    if n == 1:
        for lab in labels:
            yield leaf_kind_tree(lab)
        return
    for lab in labels:
        for split in _compositions(n - 1):
            for forest in _forests(split, labels):
                yield leaf_kind_tree(lab, forest)


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _forests(sizes: tuple[int, ...], labels: str):
    if not sizes:
        yield ()
        return
    for head in all_trees(sizes[0], labels):
        for rest in _forests(sizes[1:], labels):
            yield (head,) + rest


def random_tree(rng: random.Random, max_nodes: int, labels: str = "abc") -> Node:
    """Random ordered tree built by attaching nodes to random parents."""
    n = rng.randint(1, max_nodes)
    children_map: dict[int, list[int]] = {0: []}
    for i in range(1, n):
        parent = rng.randrange(i)
        children_map.setdefault(parent, []).append(i)
        children_map.setdefault(i, [])
    labels_for = [rng.choice(labels) for _ in range(n)]

    def build(i: int) -> Node:
        return leaf_kind_tree(labels_for[i], tuple(build(c) for c in children_map[i]))

    return build(0)


def _preorder(t: Node) -> list[Node]:
    out = [t]
    for c in t.children:
        out.extend(_preorder(c))
    return out


def brute_force_ted(a: Node, b: Node) -> int:
    """Minimum edit-script cost via exhaustive mapping enumeration.

    A mapping is valid when it is one-to-one and preserves both the
    ancestor relation and left-to-right order; its cost is the number of
    relabels plus the unmapped nodes on each side.
    """
    na = _preorder(a)
    nb = _preorder(b)

    def descendants(nodes: list[Node]) -> list[set[int]]:
        index = {id(n): i for i, n in enumerate(nodes)}
        desc: list[set[int]] = [set() for _ in nodes]

        def fill(t: Node) -> set[int]:
            mine = {index[id(t)]}
            for c in t.children:
                mine |= fill(c)
            desc[index[id(t)]] = mine - {index[id(t)]}
            return mine

        fill(nodes[0])
        return desc

    desc_a = descendants(na)
    desc_b = descendants(nb)

    def anc_a(i, j):  # i proper ancestor of j in a
        return j in desc_a[i]

    def anc_b(i, j):
        return j in desc_b[i]

    best = len(na) + len(nb)

    def consistent(i: int, j: int, mapping: list[tuple[int, int]]) -> bool:
        for i2, j2 in mapping:
            if anc_a(i2, i) != anc_b(j2, j):
                return False
            if anc_a(i, i2) != anc_b(j, j2):
                return False
            # preorder order must agree for non-ancestor pairs
            if not anc_a(i2, i) and not anc_a(i, i2):
                if (i2 < i) != (j2 < j):
                    return False
        return True

    def rec(i: int, mapping: list[tuple[int, int]], used: set[int], relabels: int):
        nonlocal best
        mapped = len(mapping)
        if i == len(na):
            cost = relabels + (len(na) - mapped) + (len(nb) - mapped)
            best = min(best, cost)
            return
        rec(i + 1, mapping, used, relabels)  # leave na[i] unmapped
        for j in range(len(nb)):
            if j in used or not consistent(i, j, mapping):
                continue
            extra = 0 if (na[i].kind, na[i].label) == (nb[j].kind, nb[j].label) else 1
            mapping.append((i, j))
            used.add(j)
            rec(i + 1, mapping, used, relabels + extra)
            mapping.pop()
            used.remove(j)

    rec(0, [], set(), 0)
    return best


# ---------------------------------------------------------------------------
# random query text generator (round-trip corpus, random MDP exercises)
# ---------------------------------------------------------------------------

_TABLES = ["employee", "department", "location", "project", "orders"]
_COLUMNS = ["dept_id", "name", "salary", "region", "loc_id", "emp_id", "budget"]
_STRINGS = ["SALES", "DALLAS", "BOSTON", "ab%", "x_y"]


class QueryGen:
    """Seeded generator of query texts in the supported subset."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def column(self, qualify: str | None = None) -> str:
        name = self.rng.choice(_COLUMNS)
        if qualify and self.rng.random() < 0.5:
            return f"{qualify}.{name}"
        return name

    def literal(self) -> str:
        if self.rng.random() < 0.5:
            return str(self.rng.randint(0, 99))
        return f'"{self.rng.choice(_STRINGS)}"'

    def select_item(self, alias: str | None) -> str:
        roll = self.rng.random()
        if roll < 0.2:
            return "*"
        if roll < 0.45:
            fn = self.rng.choice(["COUNT", "SUM", "AVG", "MIN", "MAX"])
            arg = "*" if fn == "COUNT" and self.rng.random() < 0.5 else self.column(alias)
            item = f"{fn}({arg})"
        else:
            item = self.column(alias)
        if self.rng.random() < 0.2:
            item += f" AS c{self.rng.randint(1, 9)}"
        return item

    def predicate(self, alias: str | None, depth: int) -> str:
        roll = self.rng.random()
        left = self.column(alias)
        if roll < 0.45:
            op = self.rng.choice(["=", "<>", "<", "<=", ">", ">="])
            return f"{left} {op} {self.literal()}"
        if roll < 0.6:
            if depth < 1 and self.rng.random() < 0.5:
                return f"{left} IN ({self.query(depth + 1)})"
            values = ", ".join(self.literal() for _ in range(self.rng.randint(1, 3)))
            return f"{left} IN ({values})"
        if roll < 0.75:
            return f'{left} LIKE "{self.rng.choice(_STRINGS)}"'
        if roll < 0.9:
            lo = self.rng.randint(0, 40)
            return f"{left} BETWEEN {lo} AND {lo + self.rng.randint(1, 40)}"
        return f"NOT {left} = {self.literal()}"

    def condition(self, alias: str | None, depth: int) -> str:
        parts = [self.predicate(alias, depth) for _ in range(self.rng.randint(1, 3))]
        glue = self.rng.choice([" AND ", " OR "])
        return glue.join(parts)

    def query(self, depth: int = 0) -> str:
        rng = self.rng
        tables = rng.sample(_TABLES, rng.randint(1, 3))
        aliased = rng.random() < 0.5
        from_parts = []
        first_alias = None
        for i, t in enumerate(tables):
            if aliased:
                alias = f"{t[0]}{i}" if rng.random() < 0.7 else t[0] * (i + 1)
                if first_alias is None:
                    first_alias = alias
                from_parts.append(f"{t} {alias}")
            else:
                from_parts.append(t)
        items = ", ".join(self.select_item(first_alias) for _ in range(rng.randint(1, 3)))
        distinct = "DISTINCT " if rng.random() < 0.15 else ""
        sql = f"SELECT {distinct}{items} FROM {', '.join(from_parts)}"
        if rng.random() < 0.2 and len(tables) == 1:
            join_table = rng.choice([t for t in _TABLES if t not in tables])
            sql += f" JOIN {join_table} ON {self.column(None)} = {self.column(None)}"
        if rng.random() < 0.7:
            sql += f" WHERE {self.condition(first_alias, depth)}"
        if rng.random() < 0.25:
            sql += f" GROUP BY {self.column(first_alias)}"
            if rng.random() < 0.5:
                sql += f" HAVING COUNT(*) > {rng.randint(0, 5)}"
        if rng.random() < 0.25:
            direction = rng.choice(["", " ASC", " DESC"])
            sql += f" ORDER BY {self.column(first_alias)}{direction}"
        return sql

    def corpus(self, size: int, partial_fraction: float = 0.35) -> list[str]:
        """Query texts, a fraction truncated at token boundaries."""
        out = []
        for _ in range(size):
            text = self.query()
            if self.rng.random() < partial_fraction:
                words = text.split()
                keep = self.rng.randint(1, len(words))
                text = " ".join(words[:keep])
            out.append(text)
        return out
