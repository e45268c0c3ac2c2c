"""End-to-end acceptance gates for the whole toolkit.

Each test prints one pass/fail line.  Capacity-bound gates (the tuning
campaign and the throughput floor) state their limits for four cores; on
smaller hosts the limits are normalized per core, since independent runs
scale linearly.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from _oracles import staircase_counts, two_sample_pvalue, gof_pvalue
from test_operators import strength_pmf_oracle
from test_wmodel import all_blocks, reduced_space_maximum
from gafoundry import (
    AttainmentHistogram,
    BASELINE_NAMES,
    BitString,
    GAParams,
    Individual,
    RaceBudget,
    RngStream,
    baseline,
    epistasis,
    hamming,
    instance,
    instances,
    mutate,
    race,
    run,
    run_auc,
    ruggedness_permutation,
    sample_configurations,
    sample_mutation_strength,
    select_one,
    tune,
    uniform_bitstring,
)

EFFECTIVE_CORES = min(4, os.cpu_count() or 1)


def report(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"[criterion {number}] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number} ({name}): {detail}"


def test_criterion_1_auc_oracle_equivalence():
    started = time.perf_counter()
    decisions = RngStream(20_240_001, 0)
    configs = sample_configurations(100, [], 1, decisions)
    mismatches = 0
    for index, config in enumerate(configs):
        inst = instance(1 + decisions.randint_below(6))
        budget = 5 * inst.n
        hist = AttainmentHistogram(inst.v_max, budget)
        values = []

        def observer(eval_index, value):
            values.append(value)
            hist.observe(eval_index, value)

        run(config, inst, GAParams(budget=budget), RngStream(20_240_001, 1 + index), observer)
        hist.finalize_run()
        oracle = staircase_counts(values, inst.v_max, budget, 100, 100)
        if not np.array_equal(hist.counts, oracle):
            mismatches += 1
        elif hist.auc() != float(oracle.sum()):
            mismatches += 1
    elapsed = time.perf_counter() - started
    report(
        1,
        "AUC oracle equivalence",
        mismatches == 0 and elapsed < 60,
        f"100 trajectories, {mismatches} mismatches, {elapsed:.1f}s < 60s",
    )


def test_criterion_2_wmodel_structural_suite():
    started = time.perf_counter()
    problems = []
    for nu in range(2, 13):
        blocks = all_blocks(nu)
        mapped = [epistasis(BitString(b), nu) for b in blocks]
        if len({str(m) for m in mapped}) != 2**nu:
            problems.append(f"nu={nu} not bijective")
        for value in range(2**nu):
            for j in range(nu):
                neighbour = value ^ (1 << j)
                if neighbour < value:
                    continue
                if hamming(mapped[value], mapped[neighbour]) < nu - 1:
                    problems.append(f"nu={nu} amplification broken at {value}/{j}")
    for inst in instances():
        table = ruggedness_permutation(inst.ruggedness_gamma, inst.v_max)
        if sorted(table.tolist()) != list(range(inst.v_max + 1)):
            problems.append(f"fid {inst.fid}: not a permutation")
        if table[inst.v_max] != inst.v_max:
            problems.append(f"fid {inst.fid}: optimum moved")
        if int(table.max()) != inst.v_max:
            problems.append(f"fid {inst.fid}: maximum below v_max")
    checked = []
    for inst in instances():
        if inst.reduced_length <= 22:
            checked.append(inst.fid)
            if reduced_space_maximum(inst) != inst.v_max:
                problems.append(f"fid {inst.fid}: brute-force optimum != v_max")
    elapsed = time.perf_counter() - started
    report(
        2,
        "W-model structural suite",
        not problems and elapsed < 120,
        f"brute-forced fids {checked}, {len(problems)} defects, {elapsed:.1f}s < 120s",
    )


def test_criterion_3_operator_distribution_suite():
    started = time.perf_counter()
    samples_per_test = 100_000
    problems = []
    for n in (16, 100):
        for mut_id in range(6):
            rng = RngStream(33_000 + mut_id, n)
            samples = [sample_mutation_strength(mut_id, n, rng) for _ in range(samples_per_test)]
            p = gof_pvalue(samples, strength_pmf_oracle(mut_id, n))
            if p <= 0.01:
                problems.append(f"strength id {mut_id} at n={n}: p={p:.4f}")

    pop = [Individual(BitString([1]), f) for f in (1, 2, 3, 4, 5)]
    rng = RngStream(34_000, 0)
    counts = np.zeros(5, dtype=int)
    draws = 10_000
    for _ in range(draws):
        counts[select_one(0, pop, rng).fitness - 1] += 1
    tol = 3 * (0.2 * 0.8 / draws) ** 0.5
    if not np.all(np.abs(counts / draws - 0.2) <= tol):
        problems.append("uniform selector marginals off")
    prop_pop = [Individual(BitString([1]), 1), Individual(BitString([1]), 3)]
    rng = RngStream(34_001, 0)
    first = sum(select_one(3, prop_pop, rng).fitness == 1 for _ in range(draws))
    tol = 3 * (0.25 * 0.75 / draws) ** 0.5
    if abs(first / draws - 0.25) > tol:
        problems.append("proportional selector law off")

    n = 16
    base_rng = RngStream(35_000, 0)
    x = uniform_bitstring(n, base_rng)
    x_bar = BitString(1 - x.bits)
    for mut_id in range(11):
        rng_a = RngStream(35_001, mut_id)
        rng_b = RngStream(35_002, mut_id)
        a = [hamming(x, mutate(mut_id, x, rng_a)) for _ in range(samples_per_test)]
        b = [hamming(x_bar, mutate(mut_id, x_bar, rng_b)) for _ in range(samples_per_test)]
        p = two_sample_pvalue(a, b)
        if p <= 0.01:
            problems.append(f"unbiasedness id {mut_id}: p={p:.4f}")
    elapsed = time.perf_counter() - started
    report(
        3,
        "operator distribution suite",
        not problems and elapsed < 120,
        f"{len(problems)} defects {problems[:3]}, {elapsed:.1f}s < 120s",
    )


def test_criterion_4_baseline_plausibility():
    started = time.perf_counter()
    runs = 50
    master = 404
    means: dict[tuple[int, str], float] = {}
    stream = 0
    for inst in instances():
        params = GAParams(budget=5 * inst.n)
        for name in BASELINE_NAMES:
            aucs = []
            for _ in range(runs):
                aucs.append(run_auc(baseline(name), inst, params, master, stream))
                stream += 1
            means[(inst.fid, name)] = float(np.mean(aucs))
    problems = []
    for (fid, name), mean in means.items():
        if not 4500.0 <= mean <= 9800.0:
            problems.append(f"fid {fid} {name}: mean {mean:.0f} outside [4500, 9800]")
    best = {fid: max(means[(fid, n)] for n in BASELINE_NAMES) for fid in range(1, 20)}
    for low in (7, 8, 14, 18):
        for high in (1, 2, 3):
            if not best[low] < best[high]:
                problems.append(f"best[{low}]={best[low]:.0f} !< best[{high}]={best[high]:.0f}")
    elapsed = time.perf_counter() - started
    report(
        4,
        "baseline plausibility",
        not problems and elapsed < 600,
        f"19 fids x 4 baselines x {runs} runs, {len(problems)} defects {problems[:3]}, {elapsed:.0f}s < 600s",
    )


def test_criterion_5_tuning_beats_baselines():
    started = time.perf_counter()
    limit = 1800.0 * 4 / EFFECTIVE_CORES
    master = 505
    wins = 0
    details = []
    for fid in (5, 9, 17):
        inst = instance(fid)
        params = GAParams(budget=5 * inst.n)
        outcome = tune(inst, params, RaceBudget(total_runs=20_000, validation_runs=50), RngStream(master, fid))
        elite_mean = outcome.elites[0].mean_auc
        baseline_means = {}
        for b, name in enumerate(BASELINE_NAMES):
            aucs = [
                run_auc(baseline(name), inst, params, master, (1 << 40) + fid * 1000 + b * 50 + rep)
                for rep in range(50)
            ]
            baseline_means[name] = float(np.mean(aucs))
        best_name = max(baseline_means, key=baseline_means.get)
        best_mean = baseline_means[best_name]
        won = elite_mean >= best_mean
        wins += won
        details.append(f"fid{fid}: elite {elite_mean:.0f} vs {best_name} {best_mean:.0f} {'WIN' if won else 'LOSS'}")
    elapsed = time.perf_counter() - started
    report(
        5,
        "tuning beats baselines",
        wins >= 2 and elapsed < limit,
        f"{'; '.join(details)}; wins {wins}/3, {elapsed:.0f}s < {limit:.0f}s",
    )


def test_criterion_6_racing_soundness_on_synthetic_arms():
    started = time.perf_counter()
    means = np.linspace(0.1, 0.9, 100)
    hits = 0
    for rep in range(20):

        def evaluate_block(pairs, rep=rep):
            return [
                1.0 if RngStream(60_000 + rep, col * 128 + arm).random() < means[arm] else 0.0
                for arm, col in pairs
            ]

        result = race(
            list(range(100)),
            evaluate_block,
            20_000,
            block_size=1,
            alpha=0.05,
            min_survivors=4,
            exhaust_budget=True,
        )
        hits += result.survivors[0] >= 97
    elapsed = time.perf_counter() - started
    report(
        6,
        "racing soundness on synthetic arms",
        hits >= 18 and elapsed < 60,
        f"best in true top-3 in {hits}/20 repetitions, {elapsed:.1f}s < 60s",
    )


def _invoke(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "gafoundry.cli", *args], capture_output=True, cwd=cwd
    )


def test_criterion_7_cli_determinism(tmp_path):
    problems = []
    run_args = ["run", "P5 C2 s2 c2 a0 M2 u2 m1 r0 O0", "--fid", "2", "--seed", "9"]
    a = _invoke(run_args + ["--out", str(tmp_path / "ra")], tmp_path)
    b = _invoke(run_args + ["--out", str(tmp_path / "rb")], tmp_path)
    if a.returncode or b.returncode:
        problems.append("run exited nonzero")
    if a.stdout != b.stdout:
        problems.append("run stdout differs")
    for name in ("run_fid2_seed9.json", "trajectory_fid2_seed9.csv"):
        if (tmp_path / "ra" / name).read_bytes() != (tmp_path / "rb" / name).read_bytes():
            problems.append(f"run artifact {name} differs")
    tune_args = [
        "tune", "--fid", "3", "--seed", "17", "--total-runs", "400",
        "--validation-runs", "5", "--jobs", "1",
    ]
    a = _invoke(tune_args + ["--out", str(tmp_path / "ta")], tmp_path)
    b = _invoke(tune_args + ["--out", str(tmp_path / "tb")], tmp_path)
    if a.returncode or b.returncode:
        problems.append("tune exited nonzero")
    if a.stdout != b.stdout:
        problems.append("tune stdout differs")
    for name in ("tuning_fid3.json", "validation_fid3.csv"):
        if (tmp_path / "ta" / name).read_bytes() != (tmp_path / "tb" / name).read_bytes():
            problems.append(f"tune artifact {name} differs")
    report(
        7,
        "CLI determinism",
        not problems,
        "byte-identical run and tune reruns" if not problems else "; ".join(problems),
    )


def test_criterion_8_throughput():
    # warm the distribution caches outside the timed section
    for inst in instances():
        for name in BASELINE_NAMES:
            run_auc(baseline(name), inst, GAParams(budget=5 * inst.n), 1, 0)
    started = time.perf_counter()
    count = 0
    for rep in range(2):
        for inst in instances():
            params = GAParams(budget=5 * inst.n)
            for b, name in enumerate(BASELINE_NAMES):
                run_auc(baseline(name), inst, params, 808, rep * 100 + b)
                count += 1
    elapsed = time.perf_counter() - started
    rate = count / elapsed
    required = 100.0 * EFFECTIVE_CORES / 4
    report(
        8,
        "throughput",
        rate >= required,
        f"{rate:.0f} runs/sec on {EFFECTIVE_CORES} core(s), floor {required:.0f} "
        f"(100/sec on 4 cores, independent runs scale per core)",
    )
