"""Fuzzy-inference test case prioritization.

Scores test cases from execution time and failure rate with a Mamdani rule
base, promotes recently updated tests, and schedules them so prerequisites
run first.
"""

from .errors import (
    ClampWarning,
    DatasetError,
    FuzzyError,
    FuzzyTcpError,
    InferenceError,
    PrerequisiteCycleError,
    SurveyError,
)
from .fuzzy_core import (
    AlphaCut,
    FuzzyTerm,
    LinguisticVariable,
    MembershipFunction,
    PiecewiseLinear,
    alpha_cut,
    centroid,
    clip,
    eval_membership,
    pointwise_intersection,
    pointwise_union,
)
from .inference import Engine, FuzzyRule, InferenceTrace, RuleBase, activation, explain, fuzzify, infer
from .tcp import (
    ExecutionPlan,
    PrioritizedTest,
    TestCase,
    plan_stats,
    prioritize,
    promote,
    schedule,
    score,
)
from .elicitation import RatingSample, Survey, build_partition, validate_partition
from .evaluation import EvaluationReport, FaultModel, compare, simulate

__version__ = "0.1.0"
