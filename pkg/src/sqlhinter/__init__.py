"""sqlhinter: adaptive SQL hint engine built from historical attempts.

Past attempts at an exercise are parsed, alias-canonicalized and decomposed
into solution steps; steps become states of a per-exercise MDP whose values
are solved by value iteration. A student's in-progress query is matched to
the nearest state by tree edit distance and the hint recommends the next
step along the best branch, skipping incorrect sub-branches.
"""

from .aliases import AliasMap, canonicalize_aliases
from .analysis import (
    AttemptTrace,
    BetaSet,
    KnowledgeRule,
    MannWhitneyResult,
    SegmentAggregate,
    TimelinePoint,
    build_attempt_trace,
    compute_betas,
    dist_sol,
    fit_beta,
    mann_whitney_u,
    segment_report,
)
from .config import ServiceConfig
from .errors import (
    BuildError,
    DecomposeError,
    EmptySolution,
    ExecError,
    FormatError,
    InsufficientPoints,
    NoEscape,
    NoHintAvailable,
    ParseError,
    SchemaError,
    SqlHinterError,
    StaleHint,
    UnknownExercise,
    Unreachable,
)
from .executor import ResultMatrix, Schema, execute, load_schema, schema_from_dict
from .hints import Hint, apply_hint, compute_diff, generate_hint, match_state
from .mdp import (
    MdpGraph,
    MdpState,
    RewardPolicy,
    build_mdp,
    escape_incorrect_branch,
    graph_to_json,
    passing_distance_map,
    run_value_iteration,
    to_dot,
)
from .nodes import Node, NodeKind, QueryTree
from .parse import parse
from .render import render
from .scoring import EvaluationRule, Score, score
from .steps import SolutionStep, decompose, extension_of, incomplete_reason
from .store import ActionEvent, AttemptRecord, ExerciseBundle, Store, load_exercise_bundle
from .treedist import UNORDERED_KINDS, query_distance, zhang_shasha

__version__ = "0.1.0"

__all__ = [
    "AliasMap",
    "AttemptRecord",
    "AttemptTrace",
    "ActionEvent",
    "BetaSet",
    "BuildError",
    "DecomposeError",
    "EmptySolution",
    "EvaluationRule",
    "ExecError",
    "ExerciseBundle",
    "FormatError",
    "Hint",
    "InsufficientPoints",
    "KnowledgeRule",
    "MannWhitneyResult",
    "MdpGraph",
    "MdpState",
    "NoEscape",
    "NoHintAvailable",
    "Node",
    "NodeKind",
    "ParseError",
    "QueryTree",
    "ResultMatrix",
    "RewardPolicy",
    "Schema",
    "SchemaError",
    "Score",
    "SegmentAggregate",
    "ServiceConfig",
    "SolutionStep",
    "SqlHinterError",
    "StaleHint",
    "Store",
    "TimelinePoint",
    "UNORDERED_KINDS",
    "UnknownExercise",
    "Unreachable",
    "apply_hint",
    "build_attempt_trace",
    "build_mdp",
    "canonicalize_aliases",
    "compute_betas",
    "compute_diff",
    "decompose",
    "dist_sol",
    "escape_incorrect_branch",
    "execute",
    "extension_of",
    "fit_beta",
    "generate_hint",
    "graph_to_json",
    "incomplete_reason",
    "load_exercise_bundle",
    "load_schema",
    "mann_whitney_u",
    "match_state",
    "parse",
    "passing_distance_map",
    "query_distance",
    "render",
    "run_value_iteration",
    "schema_from_dict",
    "score",
    "segment_report",
    "to_dot",
    "zhang_shasha",
]
