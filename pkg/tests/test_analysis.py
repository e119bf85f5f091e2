import itertools
import random

import numpy as np
import pytest

from conftest import REFERENCE_DIST_SOL, build_reference_graph
from sqlhinter.analysis import (
    KnowledgeRule,
    TimelinePoint,
    assign_segment,
    build_attempt_trace,
    compute_betas,
    dist_sol,
    fit_beta,
    mann_whitney_u,
    segment_report,
)
from sqlhinter.errors import InsufficientPoints, Unreachable
from sqlhinter.mdp import run_value_iteration
from sqlhinter.render import render
from sqlhinter.store import ActionEvent


def pts(pairs, hints=()):
    return [
        TimelinePoint(t_elapsed=t, dist_sol=d, is_hint_employment=(i in hints))
        for i, (t, d) in enumerate(pairs)
    ]


# ---------------------------------------------------------------------------
# dist_sol
# ---------------------------------------------------------------------------


def test_dist_sol_reference_values():
    g = build_reference_graph()
    for sid, expected in REFERENCE_DIST_SOL.items():
        assert dist_sol(g, sid) == expected


def test_dist_sol_zero_at_passing_terminal():
    g = build_reference_graph()
    assert dist_sol(g, 6) == 0


def test_dist_sol_linear_chain_counts_steps():
    from sqlhinter.mdp import RewardPolicy, build_mdp, run_value_iteration
    from sqlhinter.parse import parse

    ideal = parse("SELECT a FROM t WHERE x = 1 AND y = 2")
    g = build_mdp([], [ideal], RewardPolicy())
    run_value_iteration(g, epsilon=1e-9)
    root = next(iter(g.roots))
    assert dist_sol(g, root) == len(g.states) - 1


def test_dist_sol_unreachable():
    from sqlhinter.mdp import MdpGraph, MdpState
    from sqlhinter.parse import parse

    g = MdpGraph()
    t = parse("SELECT a")
    g.states[0] = MdpState(id=0, tree=t, is_final=True, reward=-100.0)
    g.index[t] = 0
    with pytest.raises(Unreachable):
        dist_sol(g, 0)


# ---------------------------------------------------------------------------
# fit_beta
# ---------------------------------------------------------------------------


def closed_form_beta(ts, ds):
    """Independent oracle: normalize by L2 norms, then textbook OLS slope."""
    x = np.asarray(ts, dtype=float)
    y = np.asarray(ds, dtype=float)
    x = x / np.linalg.norm(x)
    y = y / np.linalg.norm(y)
    xbar, ybar = x.mean(), y.mean()
    return float(((x - xbar) * (y - ybar)).sum() / ((x - xbar) ** 2).sum())


def test_beta_matches_closed_form_on_three_points():
    ts = [10.0, 20.0, 30.0]
    ds = [6.0, 4.0, 2.0]
    expected = closed_form_beta(ts, ds)
    assert fit_beta(pts(list(zip(ts, ds)))) == pytest.approx(expected, abs=1e-9)
    # collinear with negative slope: after normalization the slope is -1
    assert expected == pytest.approx(-1.0, abs=1e-12)


def test_beta_zero_for_constant_distance():
    assert fit_beta(pts([(0, 3), (10, 3), (20, 3)])) == pytest.approx(0.0, abs=1e-12)


def test_beta_insufficient_points():
    with pytest.raises(InsufficientPoints):
        fit_beta(pts([(0, 1)]))
    with pytest.raises(InsufficientPoints):
        fit_beta(pts([(5, 1), (5, 2)]))  # constant time


def test_beta_windows():
    # hint employed at index 2; decline is steeper afterwards
    points = pts([(0, 6), (10, 6), (20, 5), (30, 3), (40, 1)], hints={2})
    pre = fit_beta(points, "pre_first_hint")
    post = fit_beta(points, "post_first_hint")
    assert post < pre
    betas = compute_betas(points)
    assert betas.beta_pre_first_hint == pytest.approx(pre, abs=1e-12)
    assert betas.beta_post_first_hint == pytest.approx(post, abs=1e-12)
    assert betas.delta_beta == pytest.approx(
        betas.beta_after_hint_avg - betas.beta_pre_first_hint, abs=1e-12
    )


def test_after_hint_avg_averages_per_window():
    points = pts(
        [(0, 8), (10, 7), (20, 6), (30, 5), (40, 4), (50, 3)],
        hints={1, 3},
    )
    first = fit_beta(points[1:3])
    second = fit_beta(points[3:])
    expected = (first + second) / 2
    assert fit_beta(points, "after_hint_avg") == pytest.approx(expected, abs=1e-12)


def test_beta_sign_invariant_under_time_scaling():
    base = pts([(0, 6), (10, 5), (20, 3), (30, 2)])
    scaled = pts([(0, 6), (1000, 5), (2000, 3), (3000, 2)])
    b1 = fit_beta(base)
    b2 = fit_beta(scaled)
    assert (b1 < 0) == (b2 < 0)


def test_no_hint_windows_raise():
    points = pts([(0, 5), (10, 4)])
    with pytest.raises(InsufficientPoints):
        fit_beta(points, "pre_first_hint")
    betas = compute_betas(points)
    assert betas.beta_all is not None
    assert betas.beta_pre_first_hint is None
    assert betas.delta_beta is None


# ---------------------------------------------------------------------------
# Mann-Whitney-Wilcoxon
# ---------------------------------------------------------------------------


def oracle_mww(a, b, alternative):
    """Exhaustive enumeration over all labelings of the pooled sample."""
    pooled = sorted(a + b)
    n = len(a)

    def u_of(subset):
        sample = [pooled[i] for i in subset]
        rest = [pooled[i] for i in range(len(pooled)) if i not in subset]
        u = 0.0
        for x in sample:
            for y in rest:
                if x > y:
                    u += 1.0
                elif x == y:
                    u += 0.5
        return u

    u_obs = 0.0
    for x in a:
        for y in b:
            if x > y:
                u_obs += 1.0
            elif x == y:
                u_obs += 0.5

    us = [u_of(set(c)) for c in itertools.combinations(range(len(pooled)), n)]
    less = sum(1 for u in us if u <= u_obs + 1e-12) / len(us)
    greater = sum(1 for u in us if u >= u_obs - 1e-12) / len(us)
    if alternative == "less":
        p = less
    elif alternative == "greater":
        p = greater
    else:
        p = min(1.0, 2 * min(less, greater))
    return u_obs, p


def test_complete_separation_u_zero():
    result = mann_whitney_u([1, 2, 3], [4, 5, 6], "less")
    assert result.U == 0.0
    u, p = oracle_mww([1, 2, 3], [4, 5, 6], "less")
    assert result.p == pytest.approx(p, abs=1e-12)


def test_identical_samples_two_sided_p_one():
    result = mann_whitney_u([1, 2, 3], [1, 2, 3], "two_sided")
    assert result.p == pytest.approx(1.0, abs=1e-9)


def test_exact_matches_enumeration_oracle():
    rng = random.Random(42)
    for _ in range(120):
        n = rng.randint(1, 5)
        m = rng.randint(1, 5)
        # small value range to provoke ties
        a = [rng.randint(0, 6) for _ in range(n)]
        b = [rng.randint(0, 6) for _ in range(m)]
        for alternative in ("less", "greater", "two_sided"):
            mine = mann_whitney_u(a, b, alternative)
            u, p = oracle_mww(a, b, alternative)
            assert mine.U == pytest.approx(u, abs=1e-12), (a, b)
            assert mine.p == pytest.approx(p, abs=1e-12), (a, b, alternative)


def test_u_statistics_sum_to_nm():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 8)
        m = rng.randint(1, 8)
        a = [rng.randint(0, 10) for _ in range(n)]
        b = [rng.randint(0, 10) for _ in range(m)]
        ua = mann_whitney_u(a, b).U
        ub = mann_whitney_u(b, a).U
        assert ua + ub == pytest.approx(n * m, abs=1e-12)


def test_normal_approximation_for_large_samples():
    rng = random.Random(13)
    a = [rng.gauss(0.0, 1.0) for _ in range(25)]
    b = [rng.gauss(1.0, 1.0) for _ in range(25)]
    result = mann_whitney_u(a, b, "less")
    assert 0.0 <= result.p <= 1.0
    assert result.p < 0.05  # clearly shifted samples


def test_validation():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1])
    with pytest.raises(ValueError):
        mann_whitney_u([1], [2], "sideways")


# ---------------------------------------------------------------------------
# attempt traces and segments
# ---------------------------------------------------------------------------


def _event(user, kind, ts, snapshot=""):
    return ActionEvent(
        user=user, exercise_id="ex", timestamp=ts, kind=kind, query_snapshot=snapshot
    )


def reference_events(user="stu"):
    g = build_reference_graph()
    run_value_iteration(g, epsilon=1e-12, max_iter=5000)
    sql = {sid: render(st.tree) for sid, st in g.states.items()}
    events = [
        _event(user, "edit", "2024-01-01T10:00:00", sql[0]),
        _event(user, "execute", "2024-01-01T10:00:10", sql[1]),
        _event(user, "focus_lost", "2024-01-01T10:00:20"),
        _event(user, "focus_gained", "2024-01-01T10:00:50"),
        _event(user, "edit", "2024-01-01T10:01:00", sql[7]),
        _event(user, "hint_requested", "2024-01-01T10:01:10"),
        _event(user, "hint_employed", "2024-01-01T10:01:20", sql[2]),
        _event(user, "edit", "2024-01-01T10:01:40", sql[4]),
        _event(user, "submit", "2024-01-01T10:02:00", sql[6]),
    ]
    return g, events


def test_build_attempt_trace_timeline():
    g, events = reference_events()
    trace = build_attempt_trace(g, events)
    # five snapshot-carrying actions: 2 edits, execute, hint_employed, edit
    assert len(trace.points) == 5
    assert [p.dist_sol for p in trace.points] == [4.0, 3.0, 4.0, 2.0, 1.0]
    assert [p.is_hint_employment for p in trace.points] == [False, False, False, True, False]
    # unfocused 30s excluded: total span 120s -> 90s solving
    assert trace.t_solving == pytest.approx(90.0)
    assert trace.hints_employed == 1
    # elapsed times exclude the unfocused window
    assert trace.points[2].t_elapsed == pytest.approx(30.0)
    assert trace.points[3].t_elapsed == pytest.approx(50.0)


def test_trace_time_is_nondecreasing():
    g, events = reference_events()
    trace = build_attempt_trace(g, events)
    ts = [p.t_elapsed for p in trace.points]
    assert ts == sorted(ts)


def test_segment_assignment_matrix():
    assert assign_segment(True, False, False) == "I"
    assert assign_segment(False, False, False) == "II"
    assert assign_segment(False, True, False) == "III"
    assert assign_segment(True, True, True) == "IV"
    assert assign_segment(False, True, True) == "V"
    assert assign_segment(True, True, False) is None


def test_knowledge_rule():
    rule = KnowledgeRule()
    assert rule.knowledgeable({"proficiency": 4})
    assert rule.knowledgeable({"proficiency": 1, "years_experience": 3})
    assert not rule.knowledgeable({"proficiency": 3, "years_experience": 1})


def test_segment_report_synthetic_cohort():
    g, _ = reference_events()
    profiles = {
        "k_nohint": {"proficiency": 5, "years_experience": 4, "hints_useful": False},
        "n_nohint": {"proficiency": 1, "years_experience": 0, "hints_useful": False},
        "n_nouse": {"proficiency": 2, "years_experience": 0, "hints_useful": False},
        "k_useful": {"proficiency": 5, "years_experience": 5, "hints_useful": True},
        "n_useful": {"proficiency": 1, "years_experience": 0, "hints_useful": True},
    }

    def hintless(user):
        sql = {sid: render(st.tree) for sid, st in g.states.items()}
        return [
            _event(user, "edit", "2024-01-01T10:00:00", sql[0]),
            _event(user, "edit", "2024-01-01T10:00:30", sql[2]),
            _event(user, "submit", "2024-01-01T10:01:00", sql[6]),
        ]

    def hinted(user):
        _, events = reference_events(user)
        return events

    traces = [
        build_attempt_trace(g, hintless("k_nohint")),
        build_attempt_trace(g, hintless("n_nohint")),
        build_attempt_trace(g, hinted("n_nouse")),
        build_attempt_trace(g, hinted("k_useful")),
        build_attempt_trace(g, hinted("n_useful")),
        build_attempt_trace(g, hinted("stranger")),  # no profile: skipped
    ]
    aggregates, skipped = segment_report(traces, profiles)
    assert skipped == 1
    by_segment = {a.segment: a for a in aggregates}
    assert set(by_segment) == {"I", "II", "III", "IV", "V"}
    for seg in ("I", "II"):
        assert by_segment[seg].beta_pre_fh is None
        assert by_segment[seg].beta_aha is None
    assert by_segment["I"].attempts == 1
    assert by_segment["V"].t_solving == pytest.approx(90.0)


def test_no_hints_only_segments_one_two():
    g, _ = reference_events()
    sql = {sid: render(st.tree) for sid, st in g.states.items()}
    events = [
        _event("u1", "edit", "2024-01-01T10:00:00", sql[0]),
        _event("u1", "submit", "2024-01-01T10:01:00", sql[6]),
    ]
    traces = [build_attempt_trace(g, events)]
    profiles = {"u1": {"proficiency": 5, "hints_useful": True}}
    aggregates, _ = segment_report(traces, profiles)
    assert [a.segment for a in aggregates] == ["I"]
    assert aggregates[0].delta_beta is None


def test_n_branches_counts_touched_trajectories():
    g, events = reference_events()
    trace = build_attempt_trace(g, events)
    # snapshots touch states 0, 1, 7, 2 and 4; state 0 belongs to all four
    # contributor trajectories in the reference graph
    assert trace.n_branches == 4
