"""Timeline metrics: dist_sol curves, convergence slopes, rank tests.

Run from the repository root:  python3 demos/05_trajectory_analytics.py
"""

from sqlhinter import (
    ActionEvent,
    RewardPolicy,
    TimelinePoint,
    build_attempt_trace,
    build_mdp,
    compute_betas,
    fit_beta,
    mann_whitney_u,
    parse,
    render,
    run_value_iteration,
)

ideal = parse(
    'SELECT COUNT(*) FROM employee e, department d, location l '
    'WHERE e.dept_ID = d.dept_ID AND d.loc_ID = l.loc_ID AND region = "DALLAS" GROUP BY region'
)
graph = run_value_iteration(build_mdp([], [ideal], RewardPolicy()), epsilon=1e-9)
sql = {sid: render(st.tree) for sid, st in graph.states.items()}

events = [
    ActionEvent("s11", "dallas", "2024-05-01T10:00:00", "edit", sql[0]),
    ActionEvent("s11", "dallas", "2024-05-01T10:00:25", "execute", sql[1]),
    ActionEvent("s11", "dallas", "2024-05-01T10:00:50", "edit", sql[2]),
    ActionEvent("s11", "dallas", "2024-05-01T10:01:20", "hint_requested", ""),
    ActionEvent("s11", "dallas", "2024-05-01T10:01:30", "hint_employed", sql[4]),
    ActionEvent("s11", "dallas", "2024-05-01T10:01:50", "edit", sql[7]),
    ActionEvent("s11", "dallas", "2024-05-01T10:02:10", "edit", sql[9]),
    ActionEvent("s11", "dallas", "2024-05-01T10:02:30", "submit", sql[len(sql) - 1]),
]

trace = build_attempt_trace(graph, events)
print("=== timeline (distance to the nearest passing solution) ===")
for p in trace.points:
    mark = "  <- hint employed" if p.is_hint_employment else ""
    print(f"  t={p.t_elapsed:6.1f}s  dist_sol={p.dist_sol:.0f}{mark}")
print(f"solving time: {trace.t_solving:.0f}s, branches touched: {trace.n_branches}")

print()
print("=== convergence slopes (normalized OLS) ===")
betas = compute_betas(trace.points)
print(f"  beta_all            = {betas.beta_all:+.3f}")
print(f"  beta_pre_first_hint = {betas.beta_pre_first_hint:+.3f}")
print(f"  beta_post_first_hint= {betas.beta_post_first_hint:+.3f}")
print(f"  beta_after_hint_avg = {betas.beta_after_hint_avg:+.3f}")
print(f"  delta_beta          = {betas.delta_beta:+.3f}")
print("(more negative after the hint: faster convergence to the solution)")

print()
print("=== comparing two cohorts' slopes with Mann-Whitney-Wilcoxon ===")
before = [-0.4, -0.5, -0.2, -0.7, -0.3]
after = [-5.1, -6.4, -4.8, -7.2, -5.5]
result = mann_whitney_u(after, before, alternative="less")
print(f"  U = {result.U}, p = {result.p:.5f} (exact, small samples)")

print()
print("=== slope of a hand-made collinear timeline ===")
line = [TimelinePoint(t, 6 - 0.2 * t) for t in (0.0, 10.0, 20.0)]
print(f"  beta = {fit_beta(line):+.3f} on normalized axes")
