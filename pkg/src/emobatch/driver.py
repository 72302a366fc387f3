"""End-to-end batched optimization runs, suite orchestration, persistence.

One run alternates surrogate fitting, evolutionary search on the model
means, tangent-step interpolation around the search results, batch
selection, and true evaluation of the chosen batch, until the post-
initialization evaluation budget is spent.  A suite sweeps problems x
algorithm instances x seeds and writes one record file per run plus a
summary table.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .batch import (
    BatchSelection,
    select_ibea_native,
    select_ihv,
    select_moead_native,
    select_nsga2_native,
)
from .core import (
    ConfigError,
    IllConditionedError,
    Population,
    RandomSource,
    Source,
    nondominated_mask,
)
from .emo import (
    MIN_WEIGHT,
    EmoConfig,
    WeightSet,
    available_optimizers,
    das_dennis_weights,
    default_emo_config,
    run_optimizer,
)
from .gpr import BASE_JITTER, PARAM_LOWER, PARAM_UPPER, fit_surrogates
from .manifold import DUPLICATE_TOLERANCE, InterpolationConfig, interpolate
from .metrics import experiment_reference, hypervolume
from .problems import (
    EvaluationBudget,
    ProblemSpec,
    evaluate_batch,
    evaluate_true,
    make_problem,
    sample_true_pf,
    segment_coverage,
)
from .sampling import default_initial_size, latin_hypercube

logger = logging.getLogger(__name__)

THREAD_ENV_VAR = "EMOBATCH_THREADS"

AVAILABLE_SELECTORS = ("ihv", "native")

# The reference front is sampled once per problem with a fixed seed so that
# every run of that problem scores hypervolume against the same yardstick.
REFERENCE_PF_SEED = 987654321
_REFERENCE_PF_COUNT = {2: 1000, 3: 2000}

_DEFAULT_MAX_FES = {2: 150, 3: 250}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete settings for one optimization run.

    ``initial_size`` and ``max_fes`` default to 11n-1 and to 150 (two
    objectives) or 250 (three); ``max_fes`` counts only evaluations spent
    after the initial design.  ``population_size`` and ``generations``
    size the inner surrogate search; ``hyper_bounds`` restricts the kernel
    hyperparameter search.
    """

    problem: str
    n_var: int
    optimizer: str
    selector: str
    seed: int
    n_obj: int | None = None
    batch_size: int = 10
    candidate_count: int = 100
    step_scale: float = 0.1
    initial_size: int | None = None
    max_fes: int | None = None
    interpolation_enabled: bool = True
    population_size: int | None = None
    generations: int = 100
    hyper_bounds: tuple[float, float] = (PARAM_LOWER, PARAM_UPPER)

    def __post_init__(self) -> None:
        if self.optimizer not in available_optimizers():
            raise ConfigError(
                f"unknown optimizer {self.optimizer!r}; "
                f"expected one of {available_optimizers()}"
            )
        if self.selector not in AVAILABLE_SELECTORS:
            raise ConfigError(
                f"unknown selector {self.selector!r}; "
                f"expected one of {AVAILABLE_SELECTORS}"
            )
        if self.n_var < 1:
            raise ConfigError("number of variables must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.batch_size < 1:
            raise ConfigError("batch size must be at least 1")
        if self.candidate_count < 1:
            raise ConfigError("candidate count must be at least 1")
        if self.step_scale < 0:
            raise ConfigError("step scale must be non-negative")
        if self.initial_size is not None and self.initial_size < 1:
            raise ConfigError("initial design size must be at least 1")
        if self.max_fes is not None and self.max_fes < 0:
            raise ConfigError("evaluation budget must be non-negative")
        if self.population_size is not None and self.population_size < 2:
            raise ConfigError("population size must be at least 2")
        if self.generations < 0:
            raise ConfigError("generation count must be non-negative")
        bounds = tuple(float(v) for v in self.hyper_bounds)
        if len(bounds) != 2:
            raise ConfigError("hyperparameter bounds must be a (low, high) pair")
        object.__setattr__(self, "hyper_bounds", bounds)
        lo, hi = bounds
        if not PARAM_LOWER <= lo < hi <= PARAM_UPPER:
            raise ConfigError(
                f"hyperparameter bounds must be increasing and lie within "
                f"[{PARAM_LOWER}, {PARAM_UPPER}]"
            )

    def problem_spec(self) -> ProblemSpec:
        return make_problem(self.problem, self.n_var, m=self.n_obj)

    @property
    def resolved_initial_size(self) -> int:
        if self.initial_size is not None:
            return self.initial_size
        return default_initial_size(self.n_var)

    def resolved_max_fes(self, n_obj: int) -> int:
        if self.max_fes is not None:
            return self.max_fes
        return _DEFAULT_MAX_FES[n_obj]

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {}
        for spec in fields(self):
            value = getattr(self, spec.name)
            data[spec.name] = list(value) if isinstance(value, tuple) else value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        known = {spec.name for spec in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        try:
            return cls(**dict(data))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Read one run configuration from a JSON file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"configuration file {path} must hold a JSON object")
    return ExperimentConfig.from_dict(data)


def run_label(config: ExperimentConfig) -> str:
    """Canonical instance name: optimizer-selector, dmi- when interpolating."""
    prefix = "dmi-" if config.interpolation_enabled else ""
    return f"{prefix}{config.optimizer}-{config.selector}"


# ---------------------------------------------------------------------------
# Run artifacts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IterationLog:
    """What one outer iteration did and cost."""

    iteration: int
    evaluations_used: int
    archive_hypervolume: float
    batch_x: np.ndarray
    batch_f: np.ndarray
    gp_parameters: tuple[tuple[float, float, float], ...]
    wall_time: float
    padded_from_lhs: int = 0


@dataclass(frozen=True)
class RunRecord:
    """Everything a finished run produced."""

    config: ExperimentConfig
    archive: Population
    iterations: tuple[IterationLog, ...]
    front: Population
    final_hypervolume: float
    initial_hypervolume: float
    coverage: tuple[int, int]
    reference_point: np.ndarray
    reference_front: Population

    @property
    def evaluations(self) -> int:
        """Total true evaluations, initial design included."""
        return len(self.archive)


@lru_cache(maxsize=None)
def reference_front(spec: ProblemSpec) -> Population:
    """The shared fixed-seed sample of the problem's true front."""
    count = _REFERENCE_PF_COUNT.get(spec.m, 2000)
    return sample_true_pf(spec, count, RandomSource(REFERENCE_PF_SEED))


# ---------------------------------------------------------------------------
# Pieces of the main loop
# ---------------------------------------------------------------------------


def _thread_count() -> int:
    raw = os.environ.get(THREAD_ENV_VAR)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREAD_ENV_VAR} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREAD_ENV_VAR} must be at least 1, got {value}")
    return value


def _evaluate_rows(
    spec: ProblemSpec, X: np.ndarray, budget: EvaluationBudget
) -> Population:
    """True-evaluate rows of X; results always land in row order."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    threads = _thread_count()
    if threads == 1 or X.shape[0] <= 1:
        return evaluate_batch(spec, X, budget)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda row: evaluate_true(spec, row, budget), X))
    return Population.from_arrays(X, np.vstack(rows), Source.TRUE_EVALUATION)


def _lattice_divisions(n_obj: int, population_size: int) -> int | None:
    """Lattice parameter whose simplex grid has exactly population_size nodes."""
    if n_obj == 2:
        return population_size - 1
    h = 1
    while math.comb(h + 2, 2) < population_size:
        h += 1
    return h if math.comb(h + 2, 2) == population_size else None


def _search_config(config: ExperimentConfig, n_obj: int) -> EmoConfig:
    base = default_emo_config(n_obj)
    pop = (
        config.population_size
        if config.population_size is not None
        else base.population_size
    )
    divisions = _lattice_divisions(n_obj, pop)
    needs_weights = config.optimizer == "moead" or (
        config.selector == "native" and config.optimizer == "nsga2"
    )
    if needs_weights and divisions is None:
        raise ConfigError(
            f"population size {pop} admits no {n_obj}-objective simplex lattice"
        )
    return replace(
        base,
        population_size=pop,
        generations=config.generations,
        weight_divisions=divisions,
    )


def _fit_bank(archive: Population, rng, bounds, search_range, iteration: int):
    try:
        return fit_surrogates(
            archive.X, archive.F, rng, bounds=bounds, search_range=search_range
        )
    except IllConditionedError:
        logger.warning(
            "iteration %d: ill-conditioned kernel matrix, retrying with "
            "doubled jitter",
            iteration,
        )
    try:
        return fit_surrogates(
            archive.X,
            archive.F,
            rng,
            bounds=bounds,
            search_range=search_range,
            base_jitter=2.0 * BASE_JITTER,
        )
    except IllConditionedError as exc:
        raise IllConditionedError(
            f"iteration {iteration}: surrogate fitting failed even with "
            f"doubled jitter ({exc}); archive may contain coincident points"
        ) from exc


def _initial_subproblem_bests(F: np.ndarray, weights: WeightSet) -> np.ndarray:
    """Best scalarization value per weight vector over an evaluated set."""
    z_star = F.min(axis=0)
    W = np.maximum(weights.vectors, MIN_WEIGHT)
    G = (np.abs(F[:, None, :] - z_star[None, None, :]) / W[None, :, :]).max(axis=2)
    return G.min(axis=0)


def _select(
    config: ExperimentConfig,
    pool: Population,
    batch_quota: int,
    weights: WeightSet | None,
    fitness_scaling: float,
    previous_bests: np.ndarray | None,
) -> BatchSelection:
    if config.selector == "ihv":
        return select_ihv(pool, batch_quota)
    if config.optimizer == "nsga2":
        assert weights is not None
        return select_nsga2_native(pool, batch_quota, weights)
    if config.optimizer == "ibea":
        return select_ibea_native(pool, batch_quota, fitness_scaling=fitness_scaling)
    assert weights is not None and previous_bests is not None
    return select_moead_native(pool, batch_quota, weights, previous_bests)


def _dedup_walk(
    pool_norm: np.ndarray,
    ranking: np.ndarray,
    taken_norm: np.ndarray,
    count: int,
) -> list[int]:
    """First `count` ranked candidates not within tolerance of a taken point."""
    chosen: list[int] = []
    taken = taken_norm
    for idx in ranking:
        row = pool_norm[idx]
        if taken.size and bool(
            (np.abs(taken - row).max(axis=1) <= DUPLICATE_TOLERANCE).any()
        ):
            continue
        chosen.append(int(idx))
        taken = np.vstack([taken, row[None, :]])
        if len(chosen) == count:
            break
    return chosen


# ---------------------------------------------------------------------------
# The main loop
# ---------------------------------------------------------------------------


def run_dmi(config: ExperimentConfig) -> RunRecord:
    """Execute one full run and return its record.

    The initial design is true-evaluated outside the budget; each iteration
    then fits the surrogates, searches their means, scatters tangent-step
    candidates (unless interpolation is disabled), selects up to
    ``batch_size`` new points, and true-evaluates them, until exactly
    ``max_fes`` post-initialization evaluations are spent.  Candidates that
    nearly coincide with archive members or with already-chosen batch mates
    are skipped in rank order; any shortfall is filled with fresh
    space-filling points.  Fully deterministic given the configuration.
    """
    spec = config.problem_spec()
    bounds = spec.bounds
    n_obj = spec.m
    init_size = config.resolved_initial_size
    max_fes = config.resolved_max_fes(n_obj)
    search = _search_config(config, n_obj)
    weights = (
        das_dennis_weights(n_obj, search.weight_divisions, search.neighborhood_size)
        if search.weight_divisions is not None
        else None
    )
    pf = reference_front(spec)
    ref = experiment_reference(pf.F)

    rng = RandomSource(config.seed)
    budget = EvaluationBudget(init_size + max_fes)
    design = latin_hypercube(init_size, bounds, rng.child(0))
    archive = _evaluate_rows(spec, design.points, budget)
    initial_hv = hypervolume(archive.F, ref)

    interp_config = InterpolationConfig(
        count_total=config.candidate_count, step_scale=config.step_scale
    )
    previous_bests: np.ndarray | None = None
    logs: list[IterationLog] = []
    iteration = 0
    while budget.remaining > 0:
        iteration += 1
        start = time.perf_counter()
        bank = _fit_bank(
            archive, rng.child(1, iteration), bounds, config.hyper_bounds, iteration
        )
        population = run_optimizer(
            config.optimizer, bank, bounds, search, rng.child(2, iteration)
        )
        if config.interpolation_enabled:
            scattered = interpolate(
                population,
                bank,
                interp_config,
                bounds,
                rng.child(3, iteration),
                exclude=archive.X,
            )
            pool = (
                Population.concat(population, scattered)
                if len(scattered)
                else population
            )
        else:
            pool = population

        batch_quota = min(config.batch_size, budget.remaining)
        if (
            config.selector == "native"
            and config.optimizer == "moead"
            and previous_bests is None
        ):
            previous_bests = _initial_subproblem_bests(archive.F, weights)
        selection = _select(
            config, pool, batch_quota, weights, search.fitness_scaling, previous_bests
        )
        if config.selector == "native" and config.optimizer == "moead":
            previous_bests = selection.subproblem_bests

        chosen = _dedup_walk(
            bounds.normalize(pool.X),
            selection.ranking,
            bounds.normalize(archive.X),
            batch_quota,
        )
        parts = []
        if chosen:
            parts.append(pool.X[np.asarray(chosen, dtype=int)])
        padded = batch_quota - len(chosen)
        if padded > 0:
            logger.info(
                "iteration %d: %d of %d batch slots refilled with fresh "
                "space-filling points",
                iteration,
                padded,
                batch_quota,
            )
            parts.append(latin_hypercube(padded, bounds, rng.child(4, iteration)).points)
        batch_x = np.vstack(parts)

        evaluated = _evaluate_rows(spec, batch_x, budget)
        archive = Population.concat(archive, evaluated)
        logs.append(
            IterationLog(
                iteration=iteration,
                evaluations_used=budget.consumed - init_size,
                archive_hypervolume=hypervolume(archive.F, ref),
                batch_x=batch_x,
                batch_f=evaluated.F,
                gp_parameters=tuple(
                    (
                        model.params.amplitude,
                        model.params.length_scale,
                        model.params.jitter,
                    )
                    for model in bank.models
                ),
                wall_time=time.perf_counter() - start,
                padded_from_lhs=padded,
            )
        )

    front = archive.subset(np.flatnonzero(nondominated_mask(archive.F)))
    covered, total = segment_coverage(front.F, pf)
    return RunRecord(
        config=config,
        archive=archive,
        iterations=tuple(logs),
        front=front,
        final_hypervolume=hypervolume(front.F, ref),
        initial_hypervolume=initial_hv,
        coverage=(covered, total),
        reference_point=ref,
        reference_front=pf,
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _population_to_dict(population: Population) -> dict[str, Any]:
    return {
        "x": population.X.tolist(),
        "f": population.F.tolist(),
        "sources": population.sources.tolist(),
    }


def _population_from_dict(data: Mapping[str, Any]) -> Population:
    return Population(
        np.asarray(data["x"], dtype=float),
        np.asarray(data["f"], dtype=float),
        np.asarray(data["sources"], dtype=np.uint8),
    )


def record_to_dict(record: RunRecord) -> dict[str, Any]:
    return {
        "config": record.config.to_dict(),
        "archive": _population_to_dict(record.archive),
        "iterations": [
            {
                "iteration": log.iteration,
                "evaluations_used": log.evaluations_used,
                "archive_hypervolume": log.archive_hypervolume,
                "batch_x": log.batch_x.tolist(),
                "batch_f": log.batch_f.tolist(),
                "gp_parameters": [list(p) for p in log.gp_parameters],
                "wall_time": log.wall_time,
                "padded_from_lhs": log.padded_from_lhs,
            }
            for log in record.iterations
        ],
        "front": _population_to_dict(record.front),
        "final_hypervolume": record.final_hypervolume,
        "initial_hypervolume": record.initial_hypervolume,
        "coverage": list(record.coverage),
        "reference_point": record.reference_point.tolist(),
        "reference_front": _population_to_dict(record.reference_front),
    }


def record_from_dict(data: Mapping[str, Any]) -> RunRecord:
    logs = tuple(
        IterationLog(
            iteration=int(item["iteration"]),
            evaluations_used=int(item["evaluations_used"]),
            archive_hypervolume=float(item["archive_hypervolume"]),
            batch_x=np.asarray(item["batch_x"], dtype=float),
            batch_f=np.asarray(item["batch_f"], dtype=float),
            gp_parameters=tuple(tuple(p) for p in item["gp_parameters"]),
            wall_time=float(item["wall_time"]),
            padded_from_lhs=int(item["padded_from_lhs"]),
        )
        for item in data["iterations"]
    )
    covered, total = data["coverage"]
    return RunRecord(
        config=ExperimentConfig.from_dict(data["config"]),
        archive=_population_from_dict(data["archive"]),
        iterations=logs,
        front=_population_from_dict(data["front"]),
        final_hypervolume=float(data["final_hypervolume"]),
        initial_hypervolume=float(data["initial_hypervolume"]),
        coverage=(int(covered), int(total)),
        reference_point=np.asarray(data["reference_point"], dtype=float),
        reference_front=_population_from_dict(data["reference_front"]),
    )


def save_record(record: RunRecord, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(record_to_dict(record)), encoding="utf-8")
    return path


def load_record(path: str | Path) -> RunRecord:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return record_from_dict(data)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])


def _write_objective_csv(path: Path, F: np.ndarray) -> None:
    lines = [",".join(f"f{j + 1}" for j in range(F.shape[1]))]
    lines.extend(",".join(repr(float(v)) for v in row) for row in F)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_front(record: RunRecord, path: str | Path) -> Path:
    """Write the final front as CSV, plus the true-front sample alongside.

    The companion file gets a ``_pf`` suffix before the extension and holds
    the fixed reference sample of the true front for overlay plotting.
    """
    path = Path(path)
    _write_objective_csv(path, record.front.F)
    companion = path.with_name(path.stem + "_pf" + path.suffix)
    _write_objective_csv(companion, record.reference_front.F)
    return path


def read_objective_csv(path: str | Path) -> np.ndarray:
    """Read a headed CSV of objective vectors back into an array."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text:
        raise ValueError(f"{path} is empty")
    rows = [line.split(",") for line in text]
    start = 0
    try:
        float(rows[0][0])
    except ValueError:
        start = 1
    if start == len(rows):
        raise ValueError(f"{path} holds no data rows")
    return np.asarray([[float(v) for v in row] for row in rows[start:]], dtype=float)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceSpec:
    """One algorithm variant inside a suite."""

    optimizer: str
    selector: str
    interpolation: bool = True
    label: str | None = None

    def resolved_label(self) -> str:
        if self.label is not None:
            return self.label
        prefix = "dmi-" if self.interpolation else ""
        return f"{prefix}{self.optimizer}-{self.selector}"


@dataclass(frozen=True)
class SuiteConfig:
    """Sweep of problems x algorithm instances x seeds."""

    problems: tuple[tuple[str, int], ...]
    instances: tuple[InstanceSpec, ...]
    seeds: tuple[int, ...]
    overrides: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.problems or not self.instances or not self.seeds:
            raise ConfigError("suite needs at least one problem, instance and seed")
        reserved = {
            "problem",
            "n_var",
            "optimizer",
            "selector",
            "seed",
            "interpolation_enabled",
        }
        clash = reserved & set(self.overrides)
        if clash:
            raise ConfigError(
                f"suite overrides may not set {sorted(clash)}; these come from "
                f"the problem, instance and seed axes"
            )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SuiteConfig":
        unknown = sorted(set(data) - {"problems", "instances", "seeds", "overrides"})
        if unknown:
            raise ConfigError(f"unknown suite keys: {', '.join(unknown)}")
        try:
            problems = tuple(
                (str(item["name"]), int(item["n"])) for item in data["problems"]
            )
            instances = tuple(
                InstanceSpec(
                    optimizer=str(item["optimizer"]),
                    selector=str(item["selector"]),
                    interpolation=bool(item.get("interpolation", True)),
                    label=item.get("label"),
                )
                for item in data["instances"]
            )
            seeds = tuple(int(s) for s in data["seeds"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed suite configuration: {exc}") from None
        return cls(
            problems=problems,
            instances=instances,
            seeds=seeds,
            overrides=dict(data.get("overrides", {})),
        )


def load_suite_config(path: str | Path) -> SuiteConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"suite file {path} must hold a JSON object")
    return SuiteConfig.from_dict(data)


SUMMARY_COLUMNS = [
    "problem",
    "n_var",
    "instance",
    "seed",
    "status",
    "evaluations",
    "initial_hv",
    "final_hv",
    "segments_covered",
    "segments_total",
    "message",
]


def run_suite(suite: SuiteConfig, out_dir: str | Path) -> list[RunRecord]:
    """Run every (problem, instance, seed) combination and persist results.

    Each run writes ``<problem>_<label>_s<seed>.json``; a ``summary.csv``
    collects one row per run.  A failing run is recorded in the summary with
    its error message and the suite continues.  Returns the records of the
    successful runs in execution order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: list[RunRecord] = []
    rows: list[list[Any]] = []
    for problem, n_var in suite.problems:
        for instance in suite.instances:
            for seed in suite.seeds:
                label = instance.resolved_label()
                stem = f"{problem}_{label}_s{seed}"
                try:
                    config = ExperimentConfig(
                        problem=problem,
                        n_var=n_var,
                        optimizer=instance.optimizer,
                        selector=instance.selector,
                        seed=seed,
                        interpolation_enabled=instance.interpolation,
                        **suite.overrides,
                    )
                    record = run_dmi(config)
                except Exception as exc:  # keep the sweep alive, log the run
                    logger.error("run %s failed: %s", stem, exc)
                    rows.append(
                        [problem, n_var, label, seed, "failed", "", "", "", "", "",
                         str(exc).replace("\n", " ")]
                    )
                    continue
                save_record(record, out / f"{stem}.json")
                records.append(record)
                covered, total = record.coverage
                rows.append(
                    [
                        problem,
                        n_var,
                        label,
                        seed,
                        "ok",
                        record.evaluations,
                        record.initial_hypervolume,
                        record.final_hypervolume,
                        covered,
                        total,
                        "",
                    ]
                )
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    return records
