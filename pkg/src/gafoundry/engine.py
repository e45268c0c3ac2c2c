"""(mu+lambda) GA engine over an operator configuration.

Each generation builds lambda offspring: with probability p_c two parents are
selected and recombined, one of the two children is kept uniformly at random
and then mutated with probability p_m; otherwise a single parent is selected
and always mutated.  Every evaluation counts against the budget and is
reported to the observer; the generation ends with a replacement step.  When
the budget expires mid-generation the remaining offspring are not created
and that partial generation's replacement is skipped.

A single run is strictly sequential; independent runs parallelize by using
disjoint random streams and per-run observers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .anytime import AttainmentHistogram
from .bitstrings import uniform_bitstring
from .operators import (
    PC_VALUES,
    PM_VALUES,
    Configuration,
    Individual,
    Population,
    crossover,
    mutate,
    replace,
    select_one,
    select_pair,
)
from .rng import RngStream
from .wmodel import WModelInstance

Observer = Callable[[int, int], None]

DEFAULT_POPULATION_SIZE = 5
DEFAULT_BUDGET_FACTOR = 5


@dataclass(frozen=True)
class GAParams:
    """Run-shape parameters: parent count, offspring count, evaluation budget."""

    budget: int
    mu: int = DEFAULT_POPULATION_SIZE
    lam: int = DEFAULT_POPULATION_SIZE

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ValueError("mu and lambda must be >= 1")
        if self.budget < self.mu:
            raise ValueError(f"budget {self.budget} cannot cover the initial population of {self.mu}")


@dataclass
class RunResult:
    """Outcome of one run: best value, evaluations used, improvement trajectory.

    The trajectory holds one (eval_index, best_so_far) pair per improvement;
    best_so_far is nondecreasing and the first entry appears within the
    initial population.
    """

    best_value: int
    evals_used: int
    trajectory: list[tuple[int, int]] = field(default_factory=list)
    final_population: Population = field(default_factory=list)


def run(
    config: Configuration,
    inst: WModelInstance,
    params: GAParams,
    rng: RngStream,
    observer: Observer | None = None,
) -> RunResult:
    """Execute one GA run of exactly params.budget evaluations."""
    p_c = PC_VALUES[config.pc_idx]
    p_m = PM_VALUES[config.pm_idx]
    budget = params.budget
    evals = 0
    best = -1
    trajectory: list[tuple[int, int]] = []

    def evaluated(genotype) -> Individual:
        nonlocal evals, best
        value = inst.evaluate(genotype)
        evals += 1
        if observer is not None:
            observer(evals, value)
        if value > best:
            best = value
            trajectory.append((evals, value))
        return Individual(genotype, value)

    population = [evaluated(uniform_bitstring(inst.n, rng)) for _ in range(params.mu)]
    while evals < budget:
        offspring: Population = []
        for _ in range(params.lam):
            if evals >= budget:
                break
            r_c = rng.random()
            # p_c == 0 must never take the crossover branch, even when the
            # uniform draw is exactly 0.0.
            if p_c > 0.0 and r_c <= p_c:
                first, second = select_pair(config.selc_idx, population, rng)
                child_a, child_b = crossover(config.cross_idx, first.genotype, second.genotype, rng)
                child = child_a if rng.randint_below(2) == 0 else child_b
                r_m = rng.random()
                if p_m > 0.0 and r_m <= p_m:
                    child = mutate(config.mut_idx, child, rng)
            else:
                parent = select_one(config.selm_idx, population, rng)
                child = mutate(config.mut_idx, parent.genotype, rng)
            offspring.append(evaluated(child))
        if len(offspring) == params.lam:
            population = replace(config.repl_idx, population, offspring, params.mu, rng)
    return RunResult(best_value=best, evals_used=evals, trajectory=trajectory, final_population=population)


# Hand-picked reference configurations.
BASELINES: dict[str, Configuration] = {
    # (lambda+lambda) EA: no crossover, uniform parent choice, standard bit
    # mutation, plus replacement.
    "EA": Configuration(pc_idx=0, selm_idx=0, mut_idx=1, repl_idx=0),
    # Same but with the heavy-tailed (power-law) mutation.
    "fEA": Configuration(pc_idx=0, selm_idx=0, mut_idx=5, repl_idx=0),
    # Elitist selections, uniform crossover with bias 0.5, standard bit
    # mutation, plus replacement, crossover and mutation rates 0.4.
    "xGA": Configuration(pc_idx=2, selc_idx=2, cross_idx=2, pm_idx=2, selm_idx=2, mut_idx=1, repl_idx=0),
    # As xGA with 1-point crossover.
    "1ptGA": Configuration(pc_idx=2, selc_idx=2, cross_idx=5, pm_idx=2, selm_idx=2, mut_idx=1, repl_idx=0),
}

BASELINE_NAMES = tuple(BASELINES)


def baseline(name: str) -> Configuration:
    """Look up a named baseline configuration (EA, fEA, xGA, 1ptGA)."""
    try:
        return BASELINES[name]
    except KeyError:
        raise ValueError(f"unknown baseline {name!r}; choose from {', '.join(BASELINES)}") from None


def run_auc(
    config: Configuration,
    inst: WModelInstance,
    params: GAParams,
    master_seed: int,
    stream_id: int = 0,
    target_buckets: int = 100,
    budget_buckets: int = 100,
) -> float:
    """One run scored by its single-run attainment AUC."""
    hist = AttainmentHistogram(inst.v_max, params.budget, target_buckets, budget_buckets)
    run(config, inst, params, RngStream(master_seed, stream_id), hist.observe)
    hist.finalize_run()
    return hist.auc()


TRAJECTORY_CSV_HEADER = "fid,config,seed,eval,best"


def trajectory_csv(fid: int, config: Configuration, seed: int, trajectory: list[tuple[int, int]]) -> str:
    """One row per improvement event, in the shared trajectory format."""
    from .operators import config_string

    lines = [TRAJECTORY_CSV_HEADER]
    text = config_string(config)
    for eval_index, best in trajectory:
        lines.append(f"{fid},{text},{seed},{eval_index},{best}")
    return "\n".join(lines) + "\n"
