"""Batched surrogate-assisted evolutionary multi-objective optimization."""

from emobatch.core import (
    Bounds,
    BudgetExhaustedError,
    ConfigError,
    DifferentiableVectorObjective,
    EmptyTangentError,
    EvaluatedSolution,
    IllConditionedError,
    NotSupportedError,
    Population,
    RandomSource,
    Source,
    dominates,
    nondominated_filter,
    nondominated_mask,
)
from emobatch.driver import (
    ExperimentConfig,
    InstanceSpec,
    RunRecord,
    SuiteConfig,
    load_experiment_config,
    load_record,
    load_suite_config,
    reference_front,
    run_dmi,
    run_suite,
    save_record,
)
from emobatch.metrics import hypervolume, ihv_contributions
from emobatch.problems import available_problems, make_problem
from emobatch.sampling import latin_hypercube
from emobatch.stats import ComparisonReport, a12, compare, wilcoxon_signed_rank

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "BudgetExhaustedError",
    "ComparisonReport",
    "ConfigError",
    "DifferentiableVectorObjective",
    "EmptyTangentError",
    "EvaluatedSolution",
    "ExperimentConfig",
    "IllConditionedError",
    "InstanceSpec",
    "NotSupportedError",
    "Population",
    "RandomSource",
    "RunRecord",
    "Source",
    "SuiteConfig",
    "a12",
    "available_problems",
    "compare",
    "dominates",
    "hypervolume",
    "ihv_contributions",
    "latin_hypercube",
    "load_experiment_config",
    "load_record",
    "load_suite_config",
    "make_problem",
    "nondominated_filter",
    "nondominated_mask",
    "reference_front",
    "run_dmi",
    "run_suite",
    "save_record",
    "wilcoxon_signed_rank",
]
