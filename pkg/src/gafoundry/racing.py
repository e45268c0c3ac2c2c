"""Iterated racing over the GA design space.

Candidates race on successive blocks of shared seeds, one run per (candidate,
seed), scored by single-run AUC.  After each block a Friedman rank test over
the accumulated columns decides whether the rank spread is significant; if
so, candidates whose rank sum trails the leader by more than the pairwise
critical difference are dropped (never below a survivor floor).  Survivors
seed the next iteration, which samples fresh candidates by perturbing them.
Elites finish with independent validation runs on paired seeds.

Runs within one block are independent (disjoint streams) and may execute in
parallel; elimination is a sequential barrier between blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .engine import GAParams, run_auc
from .operators import SLOT_SIZES, Configuration
from .rng import RngStream
from .wmodel import WModelInstance

BLOCK_SIZE = 5
FIRST_TEST_COLUMNS = 5
# Each racing iteration may spend up to this fraction of the remaining run
# budget; iterations repeat until a single block no longer fits.
ITERATION_BUDGET_DIVISOR = 3

# Child-stream layout under the rng handed to tune(): id 0 drives sampling
# decisions, ids 1+column drive the GA runs of that seed column.
_DECISION_CHILD = 0
_COLUMN_CHILD_BASE = 1


@dataclass(frozen=True)
class RaceBudget:
    """Racing resources: total tuning runs, validation runs per elite,
    elimination significance level, and the survivor floor."""

    total_runs: int = 100_000
    validation_runs: int = 50
    confidence: float = 0.05
    min_survivors: int = 4

    def __post_init__(self):
        if self.total_runs < 1 or self.validation_runs < 1:
            raise ValueError("run budgets must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence level must be in (0, 1)")
        if self.min_survivors < 1:
            raise ValueError("min_survivors must be >= 1")


def perturb_probability(iteration: int) -> float:
    """Per-slot resampling probability, decaying 0.9^iteration with floor 0.1."""
    return max(0.9**iteration, 0.1)


def sample_configurations(
    count: int,
    elites: Sequence[Configuration],
    iteration: int,
    rng: RngStream,
    p_perturb: float | None = None,
) -> list[Configuration]:
    """Draw candidate configurations.

    Iteration 1 (or an empty elite set) samples every slot index uniformly.
    Later iterations copy a uniformly chosen elite and independently resample
    each slot with the perturbation probability.  Results are canonical by
    construction.
    """
    if count < 1:
        raise ValueError("candidate count must be >= 1")
    if p_perturb is None:
        p_perturb = perturb_probability(iteration)
    out = []
    for _ in range(count):
        if iteration <= 1 or not elites:
            indices = [rng.randint_below(size) for size in SLOT_SIZES]
        else:
            base = elites[rng.randint_below(len(elites))].indices()
            indices = [
                rng.randint_below(size) if rng.random() < p_perturb else value
                for value, size in zip(base, SLOT_SIZES)
            ]
        out.append(Configuration(*indices))
    return out


def _column_ranks(results: np.ndarray) -> np.ndarray:
    # Rank within each column, 1 = best (largest score), average ranks on ties.
    return stats.rankdata(-results, method="average", axis=0)


def friedman_statistic(results: np.ndarray) -> float:
    """Friedman chi-square over a configs x blocks score matrix:
    12b/(k(k+1)) * sum_j (mean_rank_j - (k+1)/2)^2."""
    results = np.asarray(results, dtype=np.float64)
    k, b = results.shape
    mean_ranks = _column_ranks(results).mean(axis=1)
    return float(12.0 * b / (k * (k + 1)) * np.sum((mean_ranks - (k + 1) / 2.0) ** 2))


def friedman_eliminate(results: np.ndarray, alpha: float, min_survivors: int = 1) -> list[int]:
    """Surviving row indices after one elimination round.

    With two rows a sign test over the blocks decides; otherwise the Friedman
    statistic is gated against the chi-square critical value at k-1 degrees
    of freedom and, when significant, rows whose rank sum trails the best by
    more than the t-based pairwise critical difference are dropped.  Fewer
    than two rows or columns, or a non-significant spread, eliminates nobody,
    and survivors never fall below min_survivors.
    """
    results = np.asarray(results, dtype=np.float64)
    if results.ndim != 2:
        raise ValueError("results must be a 2D matrix (configs x blocks)")
    k, b = results.shape
    everyone = list(range(k))
    if k < 2 or b < 2 or min_survivors >= k:
        return everyone
    if k == 2:
        wins0 = int(np.sum(results[0] > results[1]))
        wins1 = int(np.sum(results[1] > results[0]))
        decided = wins0 + wins1
        if decided == 0 or wins0 == wins1 or min_survivors >= 2:
            return everyone
        p_value = min(1.0, 2.0 * float(stats.binom.cdf(min(wins0, wins1), decided, 0.5)))
        if p_value < alpha:
            return [0] if wins0 > wins1 else [1]
        return everyone
    ranks = _column_ranks(results)
    mean_ranks = ranks.mean(axis=1)
    statistic = float(12.0 * b / (k * (k + 1)) * np.sum((mean_ranks - (k + 1) / 2.0) ** 2))
    if statistic <= float(stats.chi2.ppf(1.0 - alpha, k - 1)):
        return everyone
    rank_sums = ranks.sum(axis=1)
    best = int(np.argmin(rank_sums))
    spread = 1.0 - statistic / (b * (k - 1))
    scale = (np.sum(ranks**2) - b * k * (k + 1) ** 2 / 4.0) / ((b - 1) * (k - 1))
    variance = 2.0 * b * spread * scale
    if variance <= 0.0:
        critical = 0.0
    else:
        critical = float(stats.t.ppf(1.0 - alpha / 2.0, (b - 1) * (k - 1))) * math.sqrt(variance)
    survivors = set(everyone)
    for j in sorted(everyone, key=lambda i: (-rank_sums[i], i)):
        if len(survivors) <= min_survivors:
            break
        if j != best and rank_sums[j] - rank_sums[best] > critical:
            survivors.discard(j)
    return sorted(survivors)


@dataclass
class RaceResult:
    """Outcome of one race: survivor candidate indices (best mean first),
    their mean scores over the raced columns, and resource usage."""

    survivors: list[int]
    means: list[float]
    columns: int
    runs_used: int
    scores: np.ndarray


EvaluateBlock = Callable[[list[tuple[object, int]]], Sequence[float]]


def race(
    candidates: Sequence,
    evaluate_block: EvaluateBlock,
    max_runs: int,
    *,
    block_size: int = BLOCK_SIZE,
    alpha: float = 0.05,
    min_survivors: int = 4,
    first_test_columns: int = FIRST_TEST_COLUMNS,
    exhaust_budget: bool = False,
) -> RaceResult:
    """Race the candidates until the survivor floor or the run budget.

    evaluate_block receives (candidate, column_index) pairs and returns one
    score per pair; every pair costs one run.  Columns are shared across
    candidates so comparisons are paired.  With exhaust_budget the survivors
    keep accumulating columns until the budget cannot cover another block.
    """
    k = len(candidates)
    if k < 1:
        raise ValueError("need at least one candidate")
    if k * block_size > max_runs:
        raise ValueError(
            f"run budget {max_runs} cannot cover one block of {k} candidates x {block_size} seeds"
        )
    # Alive never drops below min(k, min_survivors), which bounds how many
    # columns the budget can pay for; preallocate the score matrix once.
    min_alive = min(k, max(1, min_survivors))
    max_columns = block_size * (max_runs // (min_alive * block_size))
    scores = np.full((k, max_columns), np.nan)
    alive = list(range(k))
    columns = 0
    runs_used = 0
    while True:
        if runs_used + len(alive) * block_size > max_runs:
            break
        if columns and len(alive) <= min_survivors and not exhaust_budget:
            break
        pairs = [(candidates[i], columns + b) for b in range(block_size) for i in alive]
        values = list(evaluate_block(pairs))
        if len(values) != len(pairs):
            raise RuntimeError(f"evaluator returned {len(values)} scores for {len(pairs)} runs")
        pos = 0
        for b in range(block_size):
            for i in alive:
                scores[i, columns + b] = values[pos]
                pos += 1
        columns += block_size
        runs_used += len(pairs)
        if len(alive) > min_survivors and columns >= first_test_columns:
            keep = friedman_eliminate(scores[alive, :columns], alpha, min_survivors)
            alive = [alive[i] for i in keep]
    if columns == 0:
        raise ValueError("race budget did not allow a single block")
    means = {i: float(np.mean(scores[i, :columns])) for i in alive}
    order = sorted(alive, key=lambda i: (-means[i], i))
    return RaceResult(
        survivors=order,
        means=[means[i] for i in order],
        columns=columns,
        runs_used=runs_used,
        scores=scores[:, :columns].copy(),
    )


@dataclass
class IterationStats:
    iteration: int
    candidates: int
    survivors: int
    columns: int
    runs_used: int
    best_mean: float


@dataclass
class EliteResult:
    config: Configuration
    mean_auc: float
    std_auc: float
    validation_aucs: list[float] = field(default_factory=list)


@dataclass
class TuneResult:
    """Elites sorted by mean validation AUC (descending), per-iteration racing
    statistics, and the total number of runs consumed."""

    elites: list[EliteResult]
    iterations: list[IterationStats]
    spent: int


def _auc_task(args) -> float:
    config, inst, params, target_buckets, budget_buckets, master_seed, stream_id = args
    return run_auc(config, inst, params, master_seed, stream_id, target_buckets, budget_buckets)


def _dedup_fill(
    existing: list[Configuration],
    want: int,
    elites: Sequence[Configuration],
    iteration: int,
    rng: RngStream,
) -> list[Configuration]:
    out = list(existing)
    seen = {c.indices() for c in out}
    attempts = 0
    while len(out) < want and attempts < 200 * want:
        candidate = sample_configurations(1, elites, iteration, rng)[0]
        attempts += 1
        if candidate.indices() not in seen:
            seen.add(candidate.indices())
            out.append(candidate)
    return out


def initial_sample_size(total_runs: int) -> int:
    """First-iteration candidate count: max(20, sqrt(total_runs)/2)."""
    return max(20, math.isqrt(total_runs) // 2)


def tune(
    inst: WModelInstance,
    params: GAParams,
    budget: RaceBudget,
    rng: RngStream,
    *,
    target_buckets: int = 100,
    budget_buckets: int = 100,
    parallel_map: Callable | None = None,
    initial_candidates: Sequence[Configuration] | None = None,
) -> TuneResult:
    """Search the design space for configurations maximizing AUC on inst.

    Iterated racing: sample candidates, race them on shared seed blocks,
    carry the survivors as elites, and perturb them into the next candidate
    set, until the run budget is spent.  Elites are then validated with
    budget.validation_runs independent runs each (these are on top of
    total_runs) and returned sorted by mean validation AUC.
    """
    n_init = initial_sample_size(budget.total_runs)
    if initial_candidates:
        n_init = max(n_init, len(initial_candidates))
    if budget.total_runs < n_init * BLOCK_SIZE:
        raise ValueError(
            f"total_runs {budget.total_runs} below one block of {n_init} initial candidates"
        )
    decisions = rng.substream(_DECISION_CHILD)
    mapper = parallel_map if parallel_map is not None else lambda f, it: list(map(f, it))
    column_base = 0
    spent = 0
    elites: list[tuple[Configuration, float]] = []
    iteration_stats: list[IterationStats] = []
    max_score = float(target_buckets * budget_buckets)

    def make_block_evaluator(base: int) -> EvaluateBlock:
        def evaluate_block(pairs):
            tasks = [
                (
                    config,
                    inst,
                    params,
                    target_buckets,
                    budget_buckets,
                    rng.master_seed,
                    rng.substream(_COLUMN_CHILD_BASE + base + column).stream_id,
                )
                for config, column in pairs
            ]
            values = list(mapper(_auc_task, tasks))
            for value in values:
                if not 0.0 <= value <= max_score:
                    raise RuntimeError(f"AUC {value} outside [0, {max_score}]")
            return values

        return evaluate_block

    iteration = 0
    while True:
        iteration += 1
        remaining = budget.total_runs - spent
        iter_budget = remaining // ITERATION_BUDGET_DIVISOR
        if iteration == 1:
            seeds = list(initial_candidates or [])
            candidates = _dedup_fill(seeds, n_init, [], 1, decisions)
        else:
            want = max(2 * budget.min_survivors, n_init >> (iteration - 1))
            elite_configs = [c for c, _ in elites]
            candidates = _dedup_fill(list(elite_configs), want, elite_configs, iteration, decisions)
        min_needed = len(candidates) * BLOCK_SIZE
        if remaining < min_needed:
            break
        if iter_budget < min_needed:
            iter_budget = min_needed
        result = race(
            candidates,
            make_block_evaluator(column_base),
            iter_budget,
            block_size=BLOCK_SIZE,
            alpha=budget.confidence,
            min_survivors=budget.min_survivors,
        )
        column_base += result.columns
        spent += result.runs_used
        elites = [
            (candidates[i], mean)
            for i, mean in zip(result.survivors, result.means)
        ][: budget.min_survivors]
        iteration_stats.append(
            IterationStats(
                iteration=iteration,
                candidates=len(candidates),
                survivors=len(result.survivors),
                columns=result.columns,
                runs_used=result.runs_used,
                best_mean=result.means[0],
            )
        )
    if not elites:
        raise ValueError("tuning budget too small to finish one racing iteration")

    validator = make_block_evaluator(column_base)
    validation_pairs = [
        (config, column)
        for config, _ in elites
        for column in range(budget.validation_runs)
    ]
    values = list(validator(validation_pairs))
    spent += len(validation_pairs)
    elite_results = []
    for index, (config, _) in enumerate(elites):
        aucs = values[index * budget.validation_runs : (index + 1) * budget.validation_runs]
        mean = float(np.mean(aucs))
        std = float(np.std(aucs, ddof=1)) if len(aucs) > 1 else 0.0
        elite_results.append(EliteResult(config, mean, std, [float(a) for a in aucs]))
    elite_results.sort(key=lambda e: -e.mean_auc)
    return TuneResult(elites=elite_results, iterations=iteration_stats, spent=spent)
