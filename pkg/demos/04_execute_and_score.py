"""Executing queries on an in-memory schema and scoring result matrices.

Run from the repository root:  python3 demos/04_execute_and_score.py
"""

import json
from pathlib import Path

from sqlhinter import EvaluationRule, execute, parse, schema_from_dict, score

schema = schema_from_dict(json.loads(Path("data/schemas/company.json").read_text()))

print("=== running queries ===")
for sql in (
    "SELECT * FROM department",
    "SELECT name, salary FROM employee WHERE dept_id = 10 ORDER BY salary DESC",
    "SELECT dept_id, COUNT(*) FROM employee GROUP BY dept_id HAVING COUNT(*) >= 2",
    'SELECT COUNT(*) FROM employee, department '
    'WHERE employee.dept_ID = department.dept_ID AND department.name = "SALES"',
):
    matrix = execute(parse(sql), schema)
    print(sql)
    print("  columns:", matrix.columns)
    for row in matrix.rows:
        print("  ", row)
    print()

print("=== scoring a student result against the ideal ===")
ideal = execute(parse("SELECT name FROM employee WHERE dept_id = 10 ORDER BY name"), schema)
cases = {
    "identical": "SELECT name FROM employee WHERE dept_id = 10 ORDER BY name",
    "missing rows": "SELECT name FROM employee WHERE dept_id = 10 AND salary > 4000 ORDER BY name",
    "extra rows": "SELECT name FROM employee ORDER BY name",
    "wrong order": "SELECT name FROM employee WHERE dept_id = 10 ORDER BY name DESC",
}
rule = EvaluationRule(order_matters=True)
for title, sql in cases.items():
    student = execute(parse(sql), schema)
    result = score(student, ideal, rule)
    parts = {k: round(v, 3) for k, v in result.breakdown.items() if k != "pass_threshold"}
    print(f"{title:15} -> {result.percent:6.1f}%  {parts}")
