"""Trajectory analytics: distance-to-solution timelines, regression
slopes around hint employment, rank tests and participant segments.

The central signal is dist_sol: the minimum number of solution steps (BFS
hops over forward and backward links) from a state to any passing
terminal. A participant timeline samples dist_sol at every recorded query
snapshot; the convergence slope beta is the OLS slope of dist_sol against
elapsed solving time after both are normalized by their Euclidean norms,
computed over configurable windows (all points, before the first hint
employment, after it, or averaged over per-hint windows). Segment
aggregates group attempts by prior knowledge and hint-usefulness feedback.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from math import inf
from statistics import fmean

import numpy as np

from .errors import EmptySolution, InsufficientPoints, ParseError, Unreachable
from .hints import match_state
from .mdp import MdpGraph, passing_distance_map
from .parse import parse


def dist_sol(g: MdpGraph, sid: int) -> int:
    """BFS distance from the state to the nearest passing terminal."""
    d = passing_distance_map(g).get(sid)
    if d is None:
        raise KeyError(f"unknown state {sid}")
    if d is inf:
        raise Unreachable(f"state {sid} cannot reach a passing terminal")
    return int(d)


# ---------------------------------------------------------------------------
# timelines and convergence slopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimelinePoint:
    t_elapsed: float  # seconds since solving start, unfocused time excluded
    dist_sol: float
    is_hint_employment: bool = False


BETA_WINDOWS = ("all", "pre_first_hint", "post_first_hint", "after_hint_avg")


def fit_beta(points: list[TimelinePoint], window: str = "all") -> float:
    """Normalized-regression slope over the selected window.

    Both variables are divided by their Euclidean (L2) norms before an
    ordinary least-squares fit with intercept; the slope is returned.
    ``after_hint_avg`` fits one slope per span from each hint employment to
    the next (or the end) and averages the usable ones.
    """
    if window not in BETA_WINDOWS:
        raise ValueError(f"window must be one of {BETA_WINDOWS}")
    if window == "after_hint_avg":
        marks = [i for i, p in enumerate(points) if p.is_hint_employment]
        if not marks:
            raise InsufficientPoints("no hint employment in the timeline")
        betas = []
        for k, start in enumerate(marks):
            end = marks[k + 1] if k + 1 < len(marks) else len(points)
            try:
                betas.append(_ols_beta(points[start:end]))
            except InsufficientPoints:
                continue
        if not betas:
            raise InsufficientPoints("no post-hint span has two usable points")
        return fmean(betas)

    if window == "all":
        selected = points
    else:
        marks = [i for i, p in enumerate(points) if p.is_hint_employment]
        if not marks:
            raise InsufficientPoints("no hint employment in the timeline")
        first = marks[0]
        selected = points[:first] if window == "pre_first_hint" else points[first:]
    return _ols_beta(selected)


def _ols_beta(points: list[TimelinePoint]) -> float:
    if len(points) < 2:
        raise InsufficientPoints("need at least two points")
    x = np.array([p.t_elapsed for p in points], dtype=float)
    y = np.array([p.dist_sol for p in points], dtype=float)
    xn = np.linalg.norm(x)
    yn = np.linalg.norm(y)
    if xn > 0:
        x = x / xn
    if yn > 0:
        y = y / yn
    var = float(np.sum((x - x.mean()) ** 2))
    if var == 0.0:
        raise InsufficientPoints("elapsed time is constant over the window")
    cov = float(np.sum((x - x.mean()) * (y - y.mean())))
    return cov / var


@dataclass
class BetaSet:
    beta_all: float | None = None
    beta_pre_first_hint: float | None = None
    beta_post_first_hint: float | None = None
    beta_after_hint_avg: float | None = None

    @property
    def delta_beta(self) -> float | None:
        if self.beta_after_hint_avg is None or self.beta_pre_first_hint is None:
            return None
        return self.beta_after_hint_avg - self.beta_pre_first_hint


def compute_betas(points: list[TimelinePoint]) -> BetaSet:
    out = BetaSet()
    for window, attr in (
        ("all", "beta_all"),
        ("pre_first_hint", "beta_pre_first_hint"),
        ("post_first_hint", "beta_post_first_hint"),
        ("after_hint_avg", "beta_after_hint_avg"),
    ):
        try:
            setattr(out, attr, fit_beta(points, window))
        except InsufficientPoints:
            pass
    return out


# ---------------------------------------------------------------------------
# Mann-Whitney-Wilcoxon rank test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MannWhitneyResult:
    U: float
    p: float


def mann_whitney_u(a: list[float], b: list[float], alternative: str = "two_sided") -> MannWhitneyResult:
    """Rank-sum U statistic of sample ``a`` with tie-corrected p-value.

    The exact conditional null distribution (given the observed midranks)
    is used when n*m <= 400, computed by a subset-sum dynamic program;
    larger samples use the normal approximation with tie correction and
    continuity correction. Two-sided p is twice the smaller tail, capped
    at 1.
    """
    if alternative not in ("less", "greater", "two_sided"):
        raise ValueError("alternative must be less, greater or two_sided")
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    n, m = len(a), len(b)
    pooled = [(v, 0) for v in a] + [(v, 1) for v in b]
    pooled.sort(key=lambda t: t[0])
    # midranks, doubled so they stay integral under ties
    double_ranks = [0] * (n + m)
    i = 0
    while i < n + m:
        j = i
        while j + 1 < n + m and pooled[j + 1][0] == pooled[i][0]:
            j += 1
        dr = (i + 1) + (j + 1)  # 2 * average rank of the tied block
        for k in range(i, j + 1):
            double_ranks[k] = dr
        i = j + 1
    rank_sum_a = sum(dr for dr, (_, who) in zip(double_ranks, pooled) if who == 0) / 2.0
    u = rank_sum_a - n * (n + 1) / 2.0

    if n * m <= 400:
        p = _exact_p(double_ranks, n, u, alternative)
    else:
        p = _normal_p(double_ranks, n, m, u, alternative)
    return MannWhitneyResult(U=u, p=p)


def _exact_p(double_ranks: list[int], n: int, u_obs: float, alternative: str) -> float:
    """Exact p by counting size-n subsets of the pooled midranks by sum."""
    # ways[k][s] = number of subsets of size k with doubled-rank sum s
    ways = [Counter() for _ in range(n + 1)]
    ways[0][0] = 1
    for dr in double_ranks:
        for k in range(n - 1, -1, -1):
            if not ways[k]:
                continue
            bucket = ways[k + 1]
            for s, c in ways[k].items():
                bucket[s + dr] += c
    denom = sum(ways[n].values())
    less = greater = 0
    for s, c in ways[n].items():
        u = s / 2.0 - n * (n + 1) / 2.0
        if u <= u_obs + 1e-12:
            less += c
        if u >= u_obs - 1e-12:
            greater += c
    p_less = less / denom
    p_greater = greater / denom
    if alternative == "less":
        return p_less
    if alternative == "greater":
        return p_greater
    return min(1.0, 2.0 * min(p_less, p_greater))


def _normal_p(double_ranks: list[int], n: int, m: int, u_obs: float, alternative: str) -> float:
    big_n = n + m
    mu = n * m / 2.0
    tie_term = 0.0
    counts = Counter(double_ranks)
    for c in counts.values():
        tie_term += c**3 - c
    var = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0:
        return 1.0
    sigma = math.sqrt(var)

    def phi(z: float) -> float:
        return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))

    if alternative == "less":
        return phi((u_obs - mu + 0.5) / sigma)
    if alternative == "greater":
        return 1.0 - phi((u_obs - mu - 0.5) / sigma)
    z = (abs(u_obs - mu) - 0.5) / sigma
    return min(1.0, 2.0 * (1.0 - phi(max(z, 0.0))))


# ---------------------------------------------------------------------------
# attempt timelines from the event log
# ---------------------------------------------------------------------------

ACTION_KINDS = {"edit", "execute", "hint_requested", "hint_employed", "submit"}
SNAPSHOT_KINDS = {"edit", "execute", "hint_employed"}


def _ts(value: str) -> datetime:
    return datetime.fromisoformat(value)


@dataclass
class AttemptTrace:
    user: str
    exercise_id: str
    points: list[TimelinePoint] = field(default_factory=list)
    t_solving: float | None = None
    n_branches: int = 0
    hints_employed: int = 0
    skipped_snapshots: int = 0


def build_attempt_trace(g: MdpGraph, events: list) -> AttemptTrace:
    """Timeline + aggregate metrics for one (user, exercise) event stream.

    Solving starts at the first editing/executing action (everything before
    counts as instruction reading); spans between focus_lost and
    focus_gained are excluded from elapsed time. Snapshots that cannot be
    parsed or matched are skipped and counted.
    """
    events = sorted(events, key=lambda e: _ts(e.timestamp))
    trace = AttemptTrace(
        user=events[0].user if events else "",
        exercise_id=events[0].exercise_id if events else "",
    )
    start: datetime | None = None
    lost_at: datetime | None = None
    unfocused = 0.0
    last_action: datetime | None = None
    dmap = passing_distance_map(g)
    branches: set[str] = set()

    for e in events:
        when = _ts(e.timestamp)
        if e.kind == "focus_lost":
            lost_at = when
            continue
        if e.kind == "focus_gained":
            if lost_at is not None:
                unfocused += (when - lost_at).total_seconds()
                lost_at = None
            continue
        if e.kind not in ACTION_KINDS:
            continue
        if start is None:
            start = when
        last_action = when
        if e.kind == "hint_employed":
            trace.hints_employed += 1
        if e.kind in SNAPSHOT_KINDS and e.query_snapshot:
            elapsed = (when - start).total_seconds() - unfocused
            try:
                tree = parse(e.query_snapshot)
                sid, _ = match_state(g, tree)
            except (ParseError, EmptySolution):
                trace.skipped_snapshots += 1
                continue
            d = dmap.get(sid, inf)
            if d is inf:
                trace.skipped_snapshots += 1
                continue
            branches.update(g.state(sid).sources)
            trace.points.append(
                TimelinePoint(
                    t_elapsed=elapsed,
                    dist_sol=float(d),
                    is_hint_employment=(e.kind == "hint_employed"),
                )
            )
    if start is not None and last_action is not None:
        trace.t_solving = (last_action - start).total_seconds() - unfocused
    trace.n_branches = len(branches)
    return trace


# ---------------------------------------------------------------------------
# participant segmentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnowledgeRule:
    """When a participant counts as knowledgeable.

    Self-reported proficiency above the scale midpoint or at least
    ``min_years`` of experience. Both cut-offs are configuration.
    """

    proficiency_midpoint: float = 3.0
    min_years: float = 2.0

    def knowledgeable(self, profile: dict) -> bool:
        prof = float(profile.get("proficiency", 0) or 0)
        years = float(profile.get("years_experience", 0) or 0)
        return prof > self.proficiency_midpoint or years >= self.min_years


SEGMENTS = ("I", "II", "III", "IV", "V")


def assign_segment(knowledgeable: bool, employed_hints: bool, hints_useful: bool) -> str | None:
    """Paper segments; the knowledgeable/hints/not-useful combination has
    no segment and returns None."""
    if not employed_hints:
        return "I" if knowledgeable else "II"
    if knowledgeable:
        return "IV" if hints_useful else None
    return "V" if hints_useful else "III"


@dataclass
class SegmentAggregate:
    segment: str
    attempts: int = 0
    t_solving: float | None = None
    n_branches: float | None = None
    beta_pre_fh: float | None = None
    beta_aha: float | None = None
    delta_beta: float | None = None

    def to_row(self) -> dict:
        return {
            "segment": self.segment,
            "attempts": self.attempts,
            "t_solving": self.t_solving,
            "n_branches": self.n_branches,
            "beta_pre_fh": self.beta_pre_fh,
            "beta_aha": self.beta_aha,
            "delta_beta": self.delta_beta,
        }


def segment_report(
    traces: list[AttemptTrace],
    profiles: dict[str, dict],
    rule: KnowledgeRule = KnowledgeRule(),
) -> tuple[list[SegmentAggregate], int]:
    """Aggregate attempt traces into the five participant segments.

    Returns (aggregates for segments that occurred, count of attempts
    skipped for missing profiles or unassignable segment).
    """
    buckets: dict[str, list[AttemptTrace]] = {s: [] for s in SEGMENTS}
    skipped = 0
    for trace in traces:
        profile = profiles.get(trace.user)
        if profile is None:
            skipped += 1
            continue
        seg = assign_segment(
            rule.knowledgeable(profile),
            trace.hints_employed > 0,
            bool(profile.get("hints_useful", False)),
        )
        if seg is None:
            skipped += 1
            continue
        buckets[seg].append(trace)

    out: list[SegmentAggregate] = []
    for seg in SEGMENTS:
        group = buckets[seg]
        if not group:
            continue
        agg = SegmentAggregate(segment=seg, attempts=len(group))
        solving = [t.t_solving for t in group if t.t_solving is not None]
        agg.t_solving = fmean(solving) if solving else None
        agg.n_branches = fmean([t.n_branches for t in group])
        if seg in ("III", "IV", "V"):
            betas = [compute_betas(t.points) for t in group]
            pre = [b.beta_pre_first_hint for b in betas if b.beta_pre_first_hint is not None]
            aha = [b.beta_after_hint_avg for b in betas if b.beta_after_hint_avg is not None]
            delta = [b.delta_beta for b in betas if b.delta_beta is not None]
            agg.beta_pre_fh = fmean(pre) if pre else None
            agg.beta_aha = fmean(aha) if aha else None
            agg.delta_beta = fmean(delta) if delta else None
        out.append(agg)
    return out, skipped
