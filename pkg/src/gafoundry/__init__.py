"""Configurable (mu+lambda) genetic algorithms on W-model landscapes.

The package bundles four pieces that plug into each other: binary genotypes
with reproducible random streams, the W-model benchmark generator and its
19-instance suite, a slot-indexed GA engine with an attainment-histogram
anytime logger scored by AUC, and an iterated-racing tuner searching the
configuration space per instance.
"""

from .anytime import AttainmentHistogram, ProtocolError, bucket_index, merge
from .bitstrings import BitString, flip_k, hamming, sample_without_replacement, uniform_bitstring
from .engine import (
    BASELINE_NAMES,
    BASELINES,
    GAParams,
    RunResult,
    baseline,
    run,
    run_auc,
    trajectory_csv,
)
from .operators import (
    ConfigParseError,
    Configuration,
    Individual,
    Population,
    canonical_config_count,
    config_space_size,
    config_string,
    crossover,
    mutate,
    parse_config,
    replace,
    sample_mutation_strength,
    select_one,
    select_pair,
)
from .racing import (
    EliteResult,
    RaceBudget,
    RaceResult,
    TuneResult,
    friedman_eliminate,
    friedman_statistic,
    race,
    sample_configurations,
    tune,
)
from .rng import RngStream
from .wmodel import (
    WModelInstance,
    epistasis,
    instance,
    instances,
    instances_csv,
    neutrality,
    onemax,
    parse_instances_csv,
    ruggedness,
    ruggedness_permutation,
)

__version__ = "0.1.0"

__all__ = [
    "AttainmentHistogram",
    "BASELINES",
    "BASELINE_NAMES",
    "BitString",
    "ConfigParseError",
    "Configuration",
    "EliteResult",
    "GAParams",
    "Individual",
    "Population",
    "ProtocolError",
    "RaceBudget",
    "RaceResult",
    "RngStream",
    "RunResult",
    "TuneResult",
    "WModelInstance",
    "baseline",
    "bucket_index",
    "canonical_config_count",
    "config_space_size",
    "config_string",
    "crossover",
    "epistasis",
    "flip_k",
    "friedman_eliminate",
    "friedman_statistic",
    "hamming",
    "instance",
    "instances",
    "instances_csv",
    "merge",
    "mutate",
    "neutrality",
    "onemax",
    "parse_config",
    "parse_instances_csv",
    "race",
    "replace",
    "ruggedness",
    "ruggedness_permutation",
    "run",
    "run_auc",
    "sample_configurations",
    "sample_mutation_strength",
    "sample_without_replacement",
    "select_one",
    "select_pair",
    "trajectory_csv",
    "tune",
    "uniform_bitstring",
]
