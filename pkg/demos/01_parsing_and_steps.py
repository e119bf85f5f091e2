"""Parsing, rendering and solution-step decomposition.

Run from the repository root:  python3 demos/01_parsing_and_steps.py
"""

from sqlhinter import canonicalize_aliases, decompose, parse, render

print("=== parsing a complete query ===")
sql = (
    'SELECT COUNT(e.emp_ID) FROM employee e, department d '
    'WHERE e.dept_ID = d.dept_ID AND d.name = "SALES"'
)
tree = parse(sql)
print("input: ", sql)
print("tree:  ", tree)
print("render:", render(tree))

print()
print("=== incomplete queries parse to partial nodes ===")
for text in (
    "SELECT COUNT(*) FROM department WHERE dept_ID",
    "SELECT name FROM employee WHERE salary >=",
    "SELECT a FROM t WHERE x IN",
):
    partial = parse(text)
    print(f"{text!r:55} -> {render(partial)}")

print()
print("=== alias canonicalization ===")
canonical, alias_map = canonicalize_aliases(tree)
print("alias map:", alias_map)
print("canonical:", render(canonical))

print()
print("=== decomposition into solution steps ===")
for step in decompose(canonical):
    marker = " (final)" if step.is_final else ""
    print(f"  step {step.index}{marker}: {render(step.tree)}")

print()
print("=== a nested query inlines the subquery's own steps ===")
nested = parse(
    'SELECT COUNT(*) FROM department WHERE dept_ID IN '
    '(SELECT dept_ID FROM employee WHERE salary > 4000)'
)
for step in decompose(nested):
    print(f"  step {step.index}: {render(step.tree)}")
