"""Operator portfolio and design space for the configurable GA.

Seven slots, each holding an indexed list of interchangeable options:
crossover rate, crossover parent selector, crossover operator, mutation rate,
mutation parent selector, mutation operator, and replacement.  A complete
assignment of one index per slot is a Configuration; the functions below
execute a slot given its index.

All operators are pure given their random stream and treat populations as
ordered multisets (duplicates allowed).  Parallel callers must use disjoint
streams.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .bitstrings import BitString, flip_k, sample_without_replacement
from .rng import RngStream


class Individual(NamedTuple):
    genotype: BitString
    fitness: int


Population = list[Individual]

# Slot option tables.  Indices into these tuples are the design-space values.
PC_VALUES = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8)
PM_VALUES = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8)
CROSSOVER_BIASES = (0.1, 0.3, 0.5, 0.7, 0.9)  # crossover ids 0-4
CROSSOVER_POINTS = (1, 3, 5, 7, 9)  # crossover ids 5-9; id 10 = classic 1-point
SELECTOR_TOURNAMENT_SIZES = {4: 2, 5: 6, 6: 10}
STOCHASTIC_SELECT_WIN_RATE = 0.5  # selector id 1
CONSTANT_STRENGTHS = {6: 1, 7: 3, 8: 5, 9: 7, 10: 9}  # mutation ids 6-10
POWER_LAW_BETA = 1.5  # mutation id 5
NORMAL_STRENGTH_SIGMA = math.sqrt(1.5)  # mutation id 4: N(1, 1.5)
REPLACE_WIN_RATES = {3: 0.51, 4: 0.71, 5: 0.91}
REPLACE_TOURNAMENT_SIZES = {6: 2, 7: 4, 8: 6, 9: 8, 10: 10}

SLOT_NAMES = ("pc_idx", "selc_idx", "cross_idx", "pm_idx", "selm_idx", "mut_idx", "repl_idx")
SLOT_SIZES = (6, 7, 11, 6, 7, 11, 11)


@dataclass(frozen=True)
class Configuration:
    """A point in the GA design space: one option index per slot.

    Instances are canonical: when pc_idx is 0 the crossover branch is never
    executed, so selc_idx, cross_idx, and pm_idx are normalized to 0.
    """

    pc_idx: int = 0
    selc_idx: int = 0
    cross_idx: int = 0
    pm_idx: int = 0
    selm_idx: int = 0
    mut_idx: int = 0
    repl_idx: int = 0

    def __post_init__(self):
        for name, size in zip(SLOT_NAMES, SLOT_SIZES):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value < size:
                raise ValueError(f"{name} must be an integer in [0, {size - 1}], got {value!r}")
        if self.pc_idx == 0:
            object.__setattr__(self, "selc_idx", 0)
            object.__setattr__(self, "cross_idx", 0)
            object.__setattr__(self, "pm_idx", 0)

    @property
    def p_c(self) -> float:
        return PC_VALUES[self.pc_idx]

    @property
    def p_m(self) -> float:
        return PM_VALUES[self.pm_idx]

    def indices(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in SLOT_NAMES)

    def to_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in SLOT_NAMES}

    @classmethod
    def from_dict(cls, data: dict) -> "Configuration":
        missing = set(SLOT_NAMES) - set(data)
        unknown = set(data) - set(SLOT_NAMES)
        if missing or unknown:
            raise ValueError(f"bad configuration keys: missing {sorted(missing)}, unknown {sorted(unknown)}")
        return cls(**{name: data[name] for name in SLOT_NAMES})


def config_space_size() -> int:
    """Number of raw slot-index combinations."""
    return math.prod(SLOT_SIZES)


def canonical_config_count() -> int:
    """Number of distinct canonical configurations (pc_idx=0 collapses three slots)."""
    pc0 = SLOT_SIZES[4] * SLOT_SIZES[5] * SLOT_SIZES[6]
    rest = (SLOT_SIZES[0] - 1) * math.prod(SLOT_SIZES[1:])
    return pc0 + rest


class ConfigParseError(ValueError):
    """Raised when a configuration string cannot be parsed; names the token."""


_STRING_TAGS = ("P", "C", "s", "c", "a", "M", "u", "m", "r", "O")
# Fixed tokens: population size 5, post-crossover selector 0, stop rule 0.
_FIXED_TOKEN_VALUES = {"P": 5, "a": 0, "O": 0}
_TAG_TO_SLOT = {"C": 0, "s": 1, "c": 2, "M": 3, "u": 4, "m": 5, "r": 6}


def config_string(config: Configuration) -> str:
    """Canonical text form, e.g. "P5 C2 s2 c2 a0 M2 u2 m1 r0 O0"."""
    i = config.indices()
    return f"P5 C{i[0]} s{i[1]} c{i[2]} a0 M{i[3]} u{i[4]} m{i[5]} r{i[6]} O0"


def parse_config(text: str) -> Configuration:
    """Inverse of config_string; raises ConfigParseError naming the bad token."""
    tokens = text.split()
    if len(tokens) != len(_STRING_TAGS):
        raise ConfigParseError(
            f"expected {len(_STRING_TAGS)} tokens, got {len(tokens)} in {text!r}"
        )
    values: dict[str, int] = {}
    for pos, (tag, token) in enumerate(zip(_STRING_TAGS, tokens), start=1):
        if not token.startswith(tag) or len(token) < len(tag) + 1:
            raise ConfigParseError(f"token {pos} ({token!r}): expected tag {tag!r}")
        try:
            value = int(token[len(tag) :])
        except ValueError:
            raise ConfigParseError(f"token {pos} ({token!r}): not an integer index") from None
        if tag in _FIXED_TOKEN_VALUES and value != _FIXED_TOKEN_VALUES[tag]:
            raise ConfigParseError(
                f"token {pos} ({token!r}): only {tag}{_FIXED_TOKEN_VALUES[tag]} is supported"
            )
        values[tag] = value
    indices = [0] * len(SLOT_NAMES)
    for tag, slot in _TAG_TO_SLOT.items():
        indices[slot] = values[tag]
        if not 0 <= values[tag] < SLOT_SIZES[slot]:
            raise ConfigParseError(
                f"token {tag}{values[tag]}: index outside [0, {SLOT_SIZES[slot] - 1}]"
            )
    return Configuration(*indices)


# ---------------------------------------------------------------------------
# Selection


def _best_index(pop: Population) -> int:
    best = 0
    for i in range(1, len(pop)):
        if pop[i].fitness > pop[best].fitness:
            best = i
    return best


def _distinct_pair(n: int, rng: RngStream) -> tuple[int, int]:
    i = rng.randint_below(n)
    j = rng.randint_below(n - 1)
    if j >= i:
        j += 1
    return i, j


def _stochastic_binary(pop: Population, rng: RngStream, win_rate: float) -> Individual:
    # Binary tournament: the fitter of two distinct contestants wins with
    # probability max(win_rate, 0.5).
    if len(pop) == 1:
        return pop[0]
    i, j = _distinct_pair(len(pop), rng)
    a, b = pop[i], pop[j]
    if b.fitness > a.fitness:
        a, b = b, a
    return a if rng.random() < max(win_rate, 0.5) else b


def _proportional(pop: Population, rng: RngStream) -> Individual:
    total = 0
    for ind in pop:
        if ind.fitness < 0:
            raise ValueError("fitness-proportional selection needs nonnegative fitness")
        total += ind.fitness
    if total == 0:
        return pop[rng.randint_below(len(pop))]
    r = rng.random() * total
    acc = 0
    for ind in pop:
        acc += ind.fitness
        if r < acc:
            return ind
    return pop[-1]


def _deterministic_tournament(pop: Population, k: int, rng: RngStream) -> Individual:
    k = min(k, len(pop))
    sampled = sample_without_replacement(len(pop), k, rng)
    best = -1
    for p in sampled.tolist():
        if best < 0 or pop[p].fitness > pop[best].fitness or (
            pop[p].fitness == pop[best].fitness and p < best
        ):
            best = p
    return pop[best]


def select_one(selector_id: int, pop: Population, rng: RngStream) -> Individual:
    """Select one parent: 0 uniform, 1 stochastic binary tournament, 2 best
    member (ties to the lowest position), 3 fitness-proportional (uniform
    fallback on an all-zero population), 4-6 deterministic tournament of size
    2/6/10 capped at the population size."""
    if not pop:
        raise ValueError("cannot select from an empty population")
    if selector_id == 0:
        return pop[rng.randint_below(len(pop))]
    if selector_id == 1:
        return _stochastic_binary(pop, rng, STOCHASTIC_SELECT_WIN_RATE)
    if selector_id == 2:
        return pop[_best_index(pop)]
    if selector_id == 3:
        return _proportional(pop, rng)
    if selector_id in SELECTOR_TOURNAMENT_SIZES:
        return _deterministic_tournament(pop, SELECTOR_TOURNAMENT_SIZES[selector_id], rng)
    raise ValueError(f"unknown selector id {selector_id}")


def select_pair(selector_id: int, pop: Population, rng: RngStream) -> tuple[Individual, Individual]:
    """Two selections without removal; id 2 returns the two distinct best positions."""
    if selector_id == 2:
        if len(pop) < 2:
            raise ValueError("selecting the two best requires a population of size >= 2")
        order = sorted(range(len(pop)), key=lambda i: (-pop[i].fitness, i))
        return pop[order[0]], pop[order[1]]
    return select_one(selector_id, pop, rng), select_one(selector_id, pop, rng)


# ---------------------------------------------------------------------------
# Crossover


def crossover(cross_id: int, x: BitString, y: BitString, rng: RngStream) -> tuple[BitString, BitString]:
    """Recombine two equal-length parents into two children.

    Ids 0-4: uniform crossover with bias 0.1/0.3/0.5/0.7/0.9 (child 1 takes
    the x bit with that probability per position; child 2 takes the mirrored
    assignment).  Ids 5-9: k-point crossover with k = 1/3/5/7/9 cuts drawn
    without replacement from the n-1 interior boundaries, segments
    alternating between parents.  Id 10: classic 1-point crossover.
    """
    n = len(x)
    if len(y) != n:
        raise ValueError(f"parent length mismatch: {n} vs {len(y)}")
    if not 0 <= cross_id <= 10:
        raise ValueError(f"unknown crossover id {cross_id}")
    if cross_id <= 4:
        take_x = rng.random_array(n) < CROSSOVER_BIASES[cross_id]
        c1 = np.where(take_x, x.bits, y.bits)
        c2 = np.where(take_x, y.bits, x.bits)
        return BitString._wrap(c1), BitString._wrap(c2)
    k = 1 if cross_id == 10 else CROSSOVER_POINTS[cross_id - 5]
    if k >= n:
        raise ValueError(f"{k}-point crossover needs parent length > {k}, got {n}")
    cuts = sample_without_replacement(n - 1, k, rng) + 1
    marks = np.zeros(n, dtype=np.int64)
    marks[cuts] = 1
    from_y = (np.cumsum(marks) & 1).astype(bool)
    c1 = np.where(from_y, y.bits, x.bits)
    c2 = np.where(from_y, x.bits, y.bits)
    return BitString._wrap(c1), BitString._wrap(c2)


# ---------------------------------------------------------------------------
# Mutation

# All mutation operators are unary unbiased: they sample a flip strength k
# from an id-specific distribution and apply flip_k, so behaviour depends on
# neither bit values nor positions.


def _float_pow(base: float, exponent: int) -> float:
    # Repeated multiplication keeps the value a product of correctly rounded
    # IEEE operations (bit-reproducible across platforms, unlike libm pow).
    out = 1.0
    for _ in range(exponent):
        out *= base
    return out


def _binomial_pmf(n: int, p: float) -> list[float]:
    q = 1.0 - p
    ratio = p / q
    value = _float_pow(q, n)
    pmf = [value]
    for k in range(n):
        value = value * (n - k) / (k + 1) * ratio
        pmf.append(value)
    return pmf


@lru_cache(maxsize=None)
def _strength_cdf(mut_id: int, n: int) -> tuple[float, ...]:
    """Cumulative distribution of the flip strength for ids 1-5 at length n."""
    if mut_id == 1:
        pmf = _binomial_pmf(n, 1.0 / n)
    elif mut_id == 2:
        pmf = [0.0] + _binomial_pmf(n - 1, 1.0 / n)
    elif mut_id == 3:
        base = _binomial_pmf(n, 1.0 / n)
        pmf = [0.0, base[0] + base[1]] + base[2:]
    elif mut_id == 4:
        # Strength = round(N(1, 1.5)) half away from zero, negatives to 0,
        # values above n redrawn uniformly from [0..n].
        sigma = NORMAL_STRENGTH_SIGMA
        upper = [float(ndtr((j + 0.5 - 1.0) / sigma)) for j in range(n + 1)]
        pmf = [upper[0]] + [upper[j] - upper[j - 1] for j in range(1, n + 1)]
        tail = (1.0 - upper[n]) / (n + 1)
        pmf = [m + tail for m in pmf]
    elif mut_id == 5:
        # Power law k^-beta on [1..n/2]; i^-1.5 computed as 1/(i*sqrt(i))
        # to stay on correctly rounded operations.
        weights = [1.0 / (i * math.sqrt(i)) for i in range(1, n // 2 + 1)]
        total = math.fsum(weights)
        pmf = [0.0] + [w / total for w in weights]
    else:
        raise ValueError(f"no tabulated distribution for mutation id {mut_id}")
    cdf = []
    acc = 0.0
    for m in pmf:
        acc += m
        cdf.append(acc)
    cdf[-1] = 1.0
    return tuple(cdf)


def sample_mutation_strength(mut_id: int, n: int, rng: RngStream) -> int:
    """Draw a flip strength for length n.

    Id 0: uniform on [0..n].  Id 1: Binomial(n, 1/n).  Id 2: 1 + Binomial(n-1,
    1/n).  Id 3: Binomial(n, 1/n) with 0 remapped to 1.  Id 4: rounded
    N(1, 1.5), negatives clamped to 0, values above n redrawn uniformly from
    [0..n].  Id 5: power law k^-1.5 on [1..n/2].  Ids 6-10: constant
    1/3/5/7/9.
    """
    if n < 2:
        raise ValueError(f"mutation needs length >= 2, got {n}")
    if mut_id == 0:
        return rng.randint_below(n + 1)
    if mut_id in CONSTANT_STRENGTHS:
        return CONSTANT_STRENGTHS[mut_id]
    if not 1 <= mut_id <= 5:
        raise ValueError(f"unknown mutation id {mut_id}")
    return bisect_right(_strength_cdf(mut_id, n), rng.random())


def mutate(mut_id: int, x: BitString, rng: RngStream) -> BitString:
    """Apply flip_k with a strength drawn from the id's distribution."""
    return flip_k(x, sample_mutation_strength(mut_id, len(x), rng), rng)


# ---------------------------------------------------------------------------
# Replacement


def _sorted_best(pool: Population, count: int) -> Population:
    order = sorted(range(len(pool)), key=lambda i: (-pool[i].fitness, i))
    return [pool[i] for i in order[:count]]


def _pool_tournament_pick(pool: Population, k: int, rng: RngStream) -> int:
    k = min(k, len(pool))
    sampled = sample_without_replacement(len(pool), k, rng)
    best = -1
    for p in sampled.tolist():
        if best < 0 or pool[p].fitness > pool[best].fitness or (
            pool[p].fitness == pool[best].fitness and p < best
        ):
            best = p
    return best


def _pool_stochastic_pick(pool: Population, win_rate: float, rng: RngStream) -> int:
    if len(pool) == 1:
        return 0
    i, j = _distinct_pair(len(pool), rng)
    if pool[j].fitness > pool[i].fitness:
        i, j = j, i
    return i if rng.random() < max(win_rate, 0.5) else j


def replace(repl_id: int, parents: Population, offspring: Population, mu: int, rng: RngStream) -> Population:
    """Build the next parent population of exactly mu members.

    Id 0 (plus): best mu of parents + offspring.  Id 1 (comma): best mu of
    the offspring (requires at least mu of them).  Id 2: the best min(lambda,
    mu) offspring overwrite the worst parents.  Ids 3-5: mu sequential binary
    stochastic tournaments over the union with win rate 0.51/0.71/0.91,
    removing each winner from the pool.  Ids 6-10: mu sequential
    deterministic tournaments of size 2/4/6/8/10 (capped at the pool size)
    over the union, removing each winner.
    """
    if len(parents) != mu:
        raise ValueError(f"parent population must have exactly mu={mu} members")
    if not 0 <= repl_id <= 10:
        raise ValueError(f"unknown replacement id {repl_id}")
    if repl_id == 0:
        return _sorted_best(parents + offspring, mu)
    if repl_id == 1:
        if len(offspring) < mu:
            raise ValueError(
                f"comma replacement needs at least mu={mu} offspring, got {len(offspring)}"
            )
        return _sorted_best(offspring, mu)
    if repl_id == 2:
        count = min(len(offspring), mu)
        incoming = _sorted_best(offspring, count)
        survivors = list(parents)
        worst = sorted(range(mu), key=lambda i: (parents[i].fitness, i))[:count]
        for pos, ind in zip(worst, incoming):
            survivors[pos] = ind
        return survivors
    pool = parents + offspring
    out: Population = []
    if repl_id in REPLACE_WIN_RATES:
        rate = REPLACE_WIN_RATES[repl_id]
        for _ in range(mu):
            out.append(pool.pop(_pool_stochastic_pick(pool, rate, rng)))
        return out
    size = REPLACE_TOURNAMENT_SIZES[repl_id]
    for _ in range(mu):
        out.append(pool.pop(_pool_tournament_pick(pool, size, rng)))
    return out
