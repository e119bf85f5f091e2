"""Building an exercise MDP from history and asking it for hints.

Run from the repository root:  python3 demos/03_mdp_and_hints.py
"""

from sqlhinter import (
    AttemptRecord,
    RewardPolicy,
    build_mdp,
    generate_hint,
    parse,
    passing_distance_map,
    render,
    run_value_iteration,
    to_dot,
)

# task: "return the number of employees in department SALES"
ideal = parse(
    'SELECT COUNT(*) FROM employee, department '
    'WHERE employee.dept_ID = department.dept_ID AND department.name = "SALES"'
)

history = [
    # a past student solved it with an IN subquery instead of a join
    AttemptRecord(
        query_text='SELECT COUNT(*) FROM department WHERE dept_ID IN (SELECT dept_ID FROM employee)',
        score=100.0, user="s01", schema="company", exercise_id="sales", timestamp="2023-04-02T10:15:00",
    ),
    # another one stopped at a wrong filter and scored poorly
    AttemptRecord(
        query_text="SELECT COUNT(*) FROM department WHERE name = 'SALES'",
        score=12.0, user="s02", schema="company", exercise_id="sales", timestamp="2023-04-02T10:21:00",
    ),
]

graph = build_mdp(history, [ideal], RewardPolicy())
run_value_iteration(graph, epsilon=1e-9)

print(f"states: {len(graph.states)}, passing terminals: {len(graph.passing_terminals())}")
print()
dmap = passing_distance_map(graph)
print(f"{'id':>3} {'reward':>7} {'value':>8} {'dist':>5}  sql")
for st in sorted(graph.states.values(), key=lambda s: s.id):
    d = dmap[st.id]
    dist = f"{int(d)}" if d != float("inf") else "inf"
    print(f"{st.id:>3} {st.reward:>7.0f} {st.value:>8.2f} {dist:>5}  {render(st.tree)}")

print()
print("=== a hint session ===")
student = "SELECT * FROM department"
for round_no in range(1, 8):
    hint = generate_hint(graph, parse(student))
    target = graph.states[hint.target_state]
    print(f"round {round_no}: student: {student}")
    print(f"         hint:    {hint.sql_text}")
    added = [op.token for op in hint.diff if op.op == "added"]
    removed = [op.token for op in hint.diff if op.op == "removed"]
    print(f"         diff:    +{added} -{removed}")
    if target.is_final and target.reward > 0:
        print("         the hint confirms a passing solution; done.")
        break
    student = hint.sql_text

print()
print("=== DOT export (paste into graphviz) ===")
print(to_dot(graph)[:400] + " ...")
