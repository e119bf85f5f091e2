"""In-memory execution of the supported query subset over fixture schemas.

Evaluation order follows standard multiset semantics: FROM cross product
(JOIN ... ON as a filtered product), WHERE filter, GROUP BY with
aggregates, HAVING, ORDER BY, projection last, DISTINCT on the projected
rows. Everything is hermetic: schemas are plain data loaded from JSON,
no external database is involved, and execution is deterministic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ExecError, SchemaError
from .nodes import Node, NodeKind, child_of_kind
from .steps import incomplete_reason

COLUMN_TYPES = {"int", "float", "text", "date"}


@dataclass(frozen=True)
class Column:
    name: str
    type: str


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class Schema:
    name: str
    tables: dict[str, Table]

    def table(self, name: str) -> Table:
        t = self.tables.get(name.lower())
        if t is None:
            raise ExecError("UnknownTable", name)
        return t


@dataclass
class ResultMatrix:
    columns: list[str]
    rows: list[tuple]

    def to_payload(self) -> dict:
        return {"columns": self.columns, "rows": [list(r) for r in self.rows]}


def load_schema(path: str | Path) -> Schema:
    """Load a schema fixture from its JSON file."""
    data = json.loads(Path(path).read_text())
    return schema_from_dict(data)


def schema_from_dict(data: dict) -> Schema:
    if "name" not in data or "tables" not in data:
        raise SchemaError("schema file requires 'name' and 'tables'")
    tables: dict[str, Table] = {}
    for tdef in data["tables"]:
        cols = []
        seen = set()
        for cdef in tdef["columns"]:
            ctype = cdef.get("type", "text")
            if ctype not in COLUMN_TYPES:
                raise SchemaError(f"unknown column type {ctype!r} in table {tdef['name']!r}")
            name = cdef["name"].lower()
            if name in seen:
                raise SchemaError(f"duplicate column {name!r} in table {tdef['name']!r}")
            seen.add(name)
            cols.append(Column(name, ctype))
        rows = []
        for row in tdef.get("rows", []):
            if len(row) != len(cols):
                raise SchemaError(
                    f"row arity {len(row)} != column count {len(cols)} in table {tdef['name']!r}"
                )
            rows.append(tuple(_coerce(v, c.type) for v, c in zip(row, cols)))
        tables[tdef["name"].lower()] = Table(tdef["name"].lower(), tuple(cols), tuple(rows))
    return Schema(data["name"], tables)


def _coerce(value, ctype: str):
    if value is None:
        return None
    if ctype == "int":
        return int(value)
    if ctype == "float":
        return float(value)
    return str(value)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass
class _Source:
    qualifier: str  # alias if declared, else the table name
    table: Table


@dataclass
class _Env:
    sources: list[_Source] = field(default_factory=list)

    def resolve(self, label: str) -> tuple[int, int]:
        """Map a column label (possibly qualified) to (source, column) indices."""
        if "." in label:
            qual, col = label.split(".", 1)
            for si, src in enumerate(self.sources):
                if src.qualifier == qual:
                    for ci, c in enumerate(src.table.columns):
                        if c.name == col:
                            return si, ci
                    raise ExecError("UnknownColumn", label)
            raise ExecError("UnknownTable", f"no table or alias named {qual!r}")
        hits = []
        for si, src in enumerate(self.sources):
            for ci, c in enumerate(src.table.columns):
                if c.name == label:
                    hits.append((si, ci))
        if not hits:
            raise ExecError("UnknownColumn", label)
        if len(hits) > 1:
            raise ExecError("UnknownColumn", f"{label!r} is ambiguous")
        return hits[0]


# a context is one joined row: a tuple of per-source row tuples
_Context = tuple[tuple, ...]


def execute(q: Node, schema: Schema) -> ResultMatrix:
    """Execute a complete query tree against the schema."""
    reason = incomplete_reason(q)
    if reason is not None:
        raise ExecError("PartialQuery", reason)
    from_list = child_of_kind(q, NodeKind.FROM_LIST)
    if from_list is None:
        raise ExecError("PartialQuery", "query has no FROM clause")

    env = _Env()
    contexts = _build_contexts(from_list, env, schema)

    where = child_of_kind(q, NodeKind.WHERE)
    if where is not None:
        contexts = [c for c in contexts if _truthy(_eval_pred(where.children[0], env, c, schema))]

    select = child_of_kind(q, NodeKind.SELECT_LIST)
    group_by = child_of_kind(q, NodeKind.GROUP_BY)
    having = child_of_kind(q, NodeKind.HAVING)
    order_by = child_of_kind(q, NodeKind.ORDER_BY)
    items = list(select.children)
    grouped = group_by is not None or _has_aggregate(select) or (
        having is not None and _has_aggregate(having)
    )

    if grouped:
        rows = _execute_grouped(items, group_by, having, order_by, env, contexts, schema)
    else:
        if having is not None:
            raise ExecError("Ungrouped", "HAVING requires grouping or aggregates")
        rows = _execute_plain(items, order_by, env, contexts, schema)

    columns = _output_columns(items, env)
    if select.label == "DISTINCT":
        seen = set()
        unique = []
        for r in rows:
            key = tuple(_norm_cell(v) for v in r)
            if key not in seen:
                seen.add(key)
                unique.append(r)
        rows = unique
    return ResultMatrix(columns, rows)


def _build_contexts(from_list: Node, env: _Env, schema: Schema) -> list[_Context]:
    contexts: list[_Context] = [()]
    for ref in from_list.children:
        contexts = _extend_contexts(ref, env, contexts, schema)
    return contexts


def _extend_contexts(ref: Node, env: _Env, contexts: list[_Context], schema: Schema) -> list[_Context]:
    if ref.kind is NodeKind.TABLE_REF:
        table = schema.table(ref.label)
        qualifier = ref.children[0].label if ref.children else table.name
        env.sources.append(_Source(qualifier, table))
        return [ctx + (row,) for ctx in contexts for row in table.rows]
    if ref.kind is NodeKind.JOIN:
        contexts = _extend_contexts(ref.children[0], env, contexts, schema)
        contexts = _extend_contexts(ref.children[1], env, contexts, schema)
        cond = ref.children[2].children[0]
        return [c for c in contexts if _truthy(_eval_pred(cond, env, c, schema))]
    raise ExecError("PartialQuery", f"unsupported FROM entry {ref.kind.value}")


def _has_aggregate(n: Node) -> bool:
    if n.kind is NodeKind.AGGREGATE:
        return True
    if n.kind is NodeKind.SUBQUERY:
        return False
    return any(_has_aggregate(c) for c in n.children)


def _execute_plain(items, order_by, env, contexts, schema) -> list[tuple]:
    if any(i.children[0].kind is NodeKind.AGGREGATE for i in items):
        raise ExecError("Ungrouped", "aggregate without grouping context")
    decorated = []
    for ctx in contexts:
        projected = _row_values(items, env, ctx, schema)
        keys = _order_keys(order_by, items, env, ctx, schema, projected)
        decorated.append((keys, projected))
    return _sorted_rows(decorated, order_by)


def _row_values(items, env, ctx, schema, group=None) -> tuple:
    out: list = []
    for item in items:
        expr = item.children[0]
        if expr.kind is NodeKind.STAR:
            out.extend(_star_row(env, ctx))
        elif expr.kind is NodeKind.AGGREGATE:
            out.append(_eval_aggregate(expr, env, group if group is not None else [], schema))
        else:
            out.append(_eval_scalar(expr, env, ctx, schema))
    return tuple(out)


def _execute_grouped(items, group_by, having, order_by, env, contexts, schema) -> list[tuple]:
    group_exprs = list(group_by.children) if group_by is not None else []
    resolved_keys = [env.resolve(g.label) for g in group_exprs]

    for item in items:
        expr = item.children[0]
        if expr.kind is NodeKind.STAR:
            raise ExecError("Ungrouped", "* cannot be projected from a grouped query")
        if expr.kind is NodeKind.COLUMN:
            if env.resolve(expr.label) not in resolved_keys:
                raise ExecError("Ungrouped", f"column {expr.label!r} is not grouped")
        elif expr.kind is not NodeKind.AGGREGATE and expr.kind is not NodeKind.LITERAL:
            raise ExecError("Ungrouped", f"cannot project {expr.kind.value} from groups")

    groups: dict[tuple, list[_Context]] = {}
    if group_exprs:
        for ctx in contexts:
            key = tuple(_eval_scalar(g, env, ctx, schema) for g in group_exprs)
            groups.setdefault(key, []).append(ctx)
    else:
        groups[()] = list(contexts)  # implicit single group, possibly empty

    decorated = []
    for key, members in groups.items():
        if having is not None:
            if not _truthy(_eval_pred(having.children[0], env, None, schema, group=members)):
                continue
        projected = _row_values(items, env, members[0] if members else None, schema, group=members)
        keys = _order_keys(order_by, items, env, members[0] if members else None, schema,
                           projected, group=members)
        decorated.append((keys, projected))
    return _sorted_rows(decorated, order_by)


def _output_columns(items, env) -> list[str]:
    names: list[str] = []
    star_expanded: list[str] | None = None
    for item in items:
        expr = item.children[0]
        if len(item.children) > 1:
            names.append(item.children[1].label)
            continue
        if expr.kind is NodeKind.STAR:
            if star_expanded is None:
                star_expanded = [c.name for src in env.sources for c in src.table.columns]
            names.extend(star_expanded)
            continue
        if expr.kind is NodeKind.COLUMN:
            names.append(expr.label.split(".")[-1])
        elif expr.kind is NodeKind.AGGREGATE:
            arg = expr.children[0].label if expr.children else "*"
            names.append(f"{expr.label}({arg})")
        else:
            names.append(expr.label)
    return names


def _order_keys(order_by, items, env, ctx, schema, projected, group=None):
    if order_by is None:
        return ()
    alias_values = {}
    for item in items:
        expr = item.children[0]
        if len(item.children) > 1 and expr.kind is not NodeKind.STAR:
            if expr.kind is NodeKind.AGGREGATE:
                value = _eval_aggregate(expr, env, group if group is not None else [], schema)
            else:
                value = _eval_scalar(expr, env, ctx, schema)
            alias_values[item.children[1].label] = value
    keys = []
    for oi in order_by.children:
        expr = oi.children[0]
        if expr.kind is NodeKind.LITERAL and expr.label.isdigit():
            pos = int(expr.label) - 1
            value = projected[pos] if 0 <= pos < len(projected) else None
        elif expr.kind is NodeKind.COLUMN and expr.label in alias_values:
            value = alias_values[expr.label]
        elif expr.kind is NodeKind.AGGREGATE:
            value = _eval_aggregate(expr, env, group if group is not None else [], schema)
        else:
            value = _eval_scalar(expr, env, ctx, schema)
        keys.append((oi.label, value))
    return tuple(keys)


def _sorted_rows(decorated, order_by) -> list[tuple]:
    if order_by is None:
        return [row for _, row in decorated]
    # stable multi-key sort: apply keys right to left
    for pos in range(len(order_by.children) - 1, -1, -1):
        reverse = order_by.children[pos].label == "DESC"
        decorated.sort(key=lambda d: _sort_key(d[0][pos][1]), reverse=reverse)
    return [row for _, row in decorated]


def _sort_key(value):
    if value is None:
        return (0, 0.0, "")
    if isinstance(value, (int, float)):
        return (1, float(value), "")
    return (2, 0.0, str(value))


# -- expression evaluation ---------------------------------------------------


def _star_row(env: _Env, ctx: _Context) -> tuple:
    return tuple(v for src_row in ctx for v in src_row)


def _eval_scalar(expr: Node, env: _Env, ctx: _Context | None, schema: Schema):
    if expr.kind is NodeKind.COLUMN:
        if ctx is None:
            return None
        si, ci = env.resolve(expr.label)
        return ctx[si][ci]
    if expr.kind is NodeKind.LITERAL:
        return literal_value(expr.label)
    if expr.kind is NodeKind.STAR:
        raise ExecError("PartialQuery", "* is not a scalar")
    if expr.kind is NodeKind.AGGREGATE:
        raise ExecError("Ungrouped", f"aggregate {expr.label} outside grouping context")
    raise ExecError("PartialQuery", f"cannot evaluate {expr.kind.value}")


def literal_value(label: str):
    if label.startswith("'"):
        return label[1:-1]
    if "." in label:
        return float(label)
    return int(label)


def _eval_aggregate(expr: Node, env: _Env, group: list[_Context], schema: Schema):
    fn = expr.label
    if not expr.children or expr.children[0].kind is NodeKind.STAR:
        if fn != "COUNT":
            raise ExecError("PartialQuery", f"{fn}(*) is not supported")
        return len(group)
    arg = expr.children[0]
    values = [_eval_scalar(arg, env, ctx, schema) for ctx in group]
    values = [v for v in values if v is not None]
    if fn == "COUNT":
        return len(values)
    if not values:
        return None
    if fn == "SUM":
        return sum(values)
    if fn == "AVG":
        return sum(values) / len(values)
    if fn == "MIN":
        return min(values)
    if fn == "MAX":
        return max(values)
    raise ExecError("PartialQuery", f"unknown aggregate {fn}")


def _truthy(value) -> bool:
    return bool(value)


def _eval_pred(expr: Node, env: _Env, ctx: _Context | None, schema: Schema, group=None) -> bool:
    kind = expr.kind
    if kind is NodeKind.LOGICAL_AND:
        return all(_eval_pred(c, env, ctx, schema, group) for c in expr.children)
    if kind is NodeKind.LOGICAL_OR:
        return any(_eval_pred(c, env, ctx, schema, group) for c in expr.children)
    if kind is NodeKind.NOT:
        return not _eval_pred(expr.children[0], env, ctx, schema, group)
    if kind is NodeKind.COMPARISON:
        left = _eval_operand(expr.children[0], env, ctx, schema, group)
        right = _eval_operand(expr.children[1], env, ctx, schema, group)
        return _compare(expr.label, left, right)
    if kind is NodeKind.IN_EXPR:
        left = _eval_operand(expr.children[0], env, ctx, schema, group)
        negate = expr.label.startswith("NOT")
        if left is None:
            return False
        if len(expr.children) == 2 and expr.children[1].kind is NodeKind.SUBQUERY:
            sub = execute(expr.children[1].children[0], schema)
            if len(sub.columns) != 1:
                raise ExecError("PartialQuery", "IN subquery must return one column")
            members = {_norm_cell(r[0]) for r in sub.rows}
        else:
            members = {_norm_cell(literal_value(c.label)) for c in expr.children[1:]}
        result = _norm_cell(left) in members
        return (not result) if negate else result
    if kind is NodeKind.LIKE_EXPR:
        left = _eval_operand(expr.children[0], env, ctx, schema, group)
        if left is None:
            return False
        pattern = literal_value(expr.children[1].label)
        regex = "^" + re.escape(str(pattern)).replace("%", ".*").replace("_", ".") + "$"
        matched = re.match(regex, str(left)) is not None
        return (not matched) if expr.label.startswith("NOT") else matched
    if kind is NodeKind.BETWEEN_EXPR:
        value = _eval_operand(expr.children[0], env, ctx, schema, group)
        lo = _eval_operand(expr.children[1], env, ctx, schema, group)
        hi = _eval_operand(expr.children[2], env, ctx, schema, group)
        if value is None or lo is None or hi is None:
            return False
        inside = _compare("<=", lo, value) and _compare("<=", value, hi)
        return (not inside) if expr.label.startswith("NOT") else inside
    if kind is NodeKind.PARTIAL_PREDICATE:
        raise ExecError("PartialQuery", "partial predicate")
    raise ExecError("PartialQuery", f"cannot evaluate predicate {kind.value}")


def _eval_operand(expr: Node, env: _Env, ctx: _Context | None, schema: Schema, group=None):
    if expr.kind is NodeKind.AGGREGATE:
        if group is None:
            raise ExecError("Ungrouped", f"aggregate {expr.label} outside grouping context")
        return _eval_aggregate(expr, env, group, schema)
    if expr.kind is NodeKind.SUBQUERY:
        sub = execute(expr.children[0], schema)
        if len(sub.columns) != 1 or len(sub.rows) != 1:
            raise ExecError("PartialQuery", "scalar subquery must return a single cell")
        return sub.rows[0][0]
    if expr.kind is NodeKind.COLUMN and group is not None:
        # inside HAVING, plain columns refer to the grouping key values
        return _eval_scalar(expr, env, group[0] if group else None, schema)
    return _eval_scalar(expr, env, ctx, schema)


def _compare(op: str, left, right) -> bool:
    if left is None or right is None:
        return False
    lnum = isinstance(left, (int, float))
    rnum = isinstance(right, (int, float))
    if lnum != rnum:
        return False if op != "<>" else True
    if op == "=":
        return left == right
    if op == "<>":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ExecError("PartialQuery", f"unknown operator {op}")


def _norm_cell(value):
    """Value normalized for equality: ints and floats compare numerically."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    return value
