"""Push and pull search for constrained multi-objective optimization on MOEA/D."""

from .core import (
    ConfigurationError,
    ContractViolation,
    EvaluationError,
    IdealNadirPair,
    Individual,
    PushPullError,
    UndefinedMetric,
    UnsupportedOperation,
    dominates,
    nondominated_mask,
    overall_violation,
    transform_equality,
)
from .decomposition import build_neighborhoods, generate_weights, tchebycheff
from .engine import (
    ALGORITHMS,
    Archive,
    EngineConfig,
    RunRecord,
    StageState,
    advance_stage,
    max_change_rate,
    nd_select,
    observe_generation,
    run,
    update_epsilon,
)
from .metrics import hypervolume, igd, reference_point
from .problems import REGISTRY, ConstraintStub, Problem, get_problem, problem_manifest, sample_reference_front
from .selection import ComparatorKind, cdp_replace, pull_replace, push_replace, sr_replace
from .stats import build_comparison_table, summarize, wilcoxon_rank_sum
from .variation import VariationConfig, de_offspring, polynomial_mutation

__version__ = "0.1.0"
