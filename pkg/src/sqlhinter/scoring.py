"""Score a student's result matrix against the ideal result matrix.

The score is a product of four bounded factors:

    percent = 100 * row_recall * row_precision * column_match * order_factor

* row_recall      -- multiset overlap of rows relative to the ideal rows,
* row_precision   -- the same overlap relative to the student's rows,
* column_match    -- matched columns over max(column counts), matched by
                     name when the rule says names matter, else by
                     position and type,
* order_factor    -- 1 unless row order matters, in which case the longest
                     common subsequence of the matched rows over the
                     overlap size.

Row comparison happens on the matched columns only, aligned to the ideal
column order. Deductions are therefore driven by missing/extra rows,
missing/misnamed columns, and (optionally) wrong row order, while a pass
is decided by comparing the percentage to the rule's threshold.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .executor import ResultMatrix, _norm_cell


@dataclass(frozen=True)
class EvaluationRule:
    order_matters: bool = False
    column_names_matter: bool = True
    pass_threshold: float = 95.0

    def __post_init__(self):
        if not (0.0 < self.pass_threshold <= 100.0):
            raise ValueError("pass_threshold must be in (0, 100]")

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationRule":
        return cls(
            order_matters=bool(data.get("order_matters", False)),
            column_names_matter=bool(data.get("column_names_matter", True)),
            pass_threshold=float(data.get("pass_threshold", 95.0)),
        )


@dataclass
class Score:
    percent: float
    breakdown: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.percent > self.breakdown.get("pass_threshold", 95.0)


def score(student: ResultMatrix, ideal: ResultMatrix, rule: EvaluationRule) -> Score:
    matched = _match_columns(student, ideal, rule)
    n_s, n_i = len(student.columns), len(ideal.columns)
    if max(n_s, n_i) == 0:
        column_match = 1.0
    else:
        column_match = len(matched) / max(n_s, n_i)

    s_rows = [_project(r, [m[0] for m in matched]) for r in student.rows]
    i_rows = [_project(r, [m[1] for m in matched]) for r in ideal.rows]

    overlap = sum((Counter(s_rows) & Counter(i_rows)).values())
    row_recall = overlap / len(i_rows) if i_rows else 1.0
    row_precision = overlap / len(s_rows) if s_rows else 1.0

    if not rule.order_matters or overlap == 0:
        order_factor = 1.0
    else:
        order_factor = _lcs(s_rows, i_rows) / overlap

    percent = 100.0 * row_recall * row_precision * column_match * order_factor
    return Score(
        percent=percent,
        breakdown={
            "row_recall": row_recall,
            "row_precision": row_precision,
            "column_match": column_match,
            "order_factor": order_factor,
            "pass_threshold": rule.pass_threshold,
        },
    )


def _match_columns(student: ResultMatrix, ideal: ResultMatrix, rule: EvaluationRule):
    """Pairs (student column index, ideal column index)."""
    if rule.column_names_matter:
        available = {i: name.lower() for i, name in enumerate(student.columns)}
        matched = []
        for ii, iname in enumerate(ideal.columns):
            for si, sname in list(available.items()):
                if sname == iname.lower():
                    matched.append((si, ii))
                    del available[si]
                    break
        return matched
    matched = []
    for i in range(min(len(student.columns), len(ideal.columns))):
        if _types_compatible(_column_type(student, i), _column_type(ideal, i)):
            matched.append((i, i))
    return matched


def _column_type(matrix: ResultMatrix, idx: int) -> str | None:
    for row in matrix.rows:
        v = row[idx]
        if v is not None:
            return "num" if isinstance(v, (int, float)) else "text"
    return None


def _types_compatible(a: str | None, b: str | None) -> bool:
    return a is None or b is None or a == b


def _project(row: tuple, indexes: list[int]) -> tuple:
    return tuple(_norm_cell(row[i]) for i in indexes)


def _lcs(a: list[tuple], b: list[tuple]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]
