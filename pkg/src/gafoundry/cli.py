"""Command-line orchestration: single runs, baseline campaigns, tuning,
data export, and a target-runner wire protocol for external tuners.

Every subcommand is deterministic under a fixed master seed; the --jobs flag
only distributes independent runs, results are collected in a fixed order.
Exit codes: 0 success, 1 runtime failure, 2 usage error (the target-runner
reports every failure as 1 so external tuners treat it as a rejected
configuration).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anytime import AttainmentHistogram
from .engine import (
    BASELINE_NAMES,
    DEFAULT_BUDGET_FACTOR,
    GAParams,
    baseline,
    run,
    run_auc,
    trajectory_csv,
)
from .operators import ConfigParseError, Configuration, config_string, parse_config
from .racing import RaceBudget, tune
from .rng import RngStream
from .wmodel import WModelInstance, instance, instances, instances_csv, parse_instances_csv

OUTPUT_DIR_ENV = "GAFOUNDRY_OUT"
DEFAULT_OUTPUT_DIR = "gafoundry-out"

# Comparison baselines in cmd_tune run on child streams of this id, disjoint
# from the tuner's own decision/run streams.
_BASELINE_COMPARISON_CHILD = 1 << 32

TUNING_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "fid",
        "master_seed",
        "instance",
        "ga",
        "buckets",
        "race_budget",
        "iterations",
        "elites",
        "spent_runs",
        "best_baseline",
        "rel_gain",
    ],
    "properties": {
        "fid": {"type": "integer"},
        "master_seed": {"type": "integer"},
        "instance": {
            "type": "object",
            "required": ["dim", "neutrality_mu", "epistasis_nu", "ruggedness_gamma", "v_max"],
            "properties": {
                "dim": {"type": "integer"},
                "neutrality_mu": {"type": "integer"},
                "epistasis_nu": {"type": "integer"},
                "ruggedness_gamma": {"type": "integer"},
                "v_max": {"type": "integer"},
            },
        },
        "ga": {
            "type": "object",
            "required": ["mu", "lambda", "budget"],
            "properties": {
                "mu": {"type": "integer"},
                "lambda": {"type": "integer"},
                "budget": {"type": "integer"},
            },
        },
        "buckets": {
            "type": "object",
            "required": ["target", "budget"],
            "properties": {"target": {"type": "integer"}, "budget": {"type": "integer"}},
        },
        "race_budget": {
            "type": "object",
            "required": ["total_runs", "validation_runs", "confidence", "min_survivors"],
            "properties": {
                "total_runs": {"type": "integer"},
                "validation_runs": {"type": "integer"},
                "confidence": {"type": "number"},
                "min_survivors": {"type": "integer"},
            },
        },
        "iterations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["iteration", "candidates", "survivors", "columns", "runs_used", "best_mean_auc"],
                "properties": {
                    "iteration": {"type": "integer"},
                    "candidates": {"type": "integer"},
                    "survivors": {"type": "integer"},
                    "columns": {"type": "integer"},
                    "runs_used": {"type": "integer"},
                    "best_mean_auc": {"type": "number"},
                },
            },
        },
        "elites": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["config", "mean_auc", "std_auc"],
                "properties": {
                    "config": {"type": "string"},
                    "mean_auc": {"type": "number"},
                    "std_auc": {"type": "number"},
                },
            },
        },
        "spent_runs": {"type": "integer"},
        "best_baseline": {
            "type": "object",
            "required": ["name", "mean_auc"],
            "properties": {"name": {"type": "string"}, "mean_auc": {"type": "number"}},
        },
        "rel_gain": {"type": "number"},
    },
}


@dataclass
class ExperimentSpec:
    """A benchmarking campaign: which instances, which configurations (named
    baselines or explicit Configuration values), how many repetitions, budget
    factor, master seed, and where the artifacts go."""

    fids: list[int]
    configs: list = field(default_factory=lambda: list(BASELINE_NAMES))
    runs: int = 50
    budget_factor: int = DEFAULT_BUDGET_FACTOR
    seed: int = 0
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    buckets: int = 100
    jobs: int = 1
    suite: list[WModelInstance] = field(default_factory=lambda: list(instances()))

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.budget_factor < 1:
            raise ValueError("budget factor must be >= 1")
        if not self.configs:
            raise ValueError("campaign needs at least one configuration")
        known = {inst.fid for inst in self.suite}
        bad = [f for f in self.fids if f not in known]
        if bad:
            raise ValueError(f"unknown instance ids: {bad}")

    def instance(self, fid: int) -> WModelInstance:
        for inst in self.suite:
            if inst.fid == fid:
                return inst
        raise ValueError(f"unknown instance id {fid}")

    def resolved_configs(self) -> list[tuple[str, Configuration]]:
        out = []
        for entry in self.configs:
            if isinstance(entry, Configuration):
                out.append((config_string(entry), entry))
            else:
                out.append((entry, baseline(entry)))
        return out


def _parse_fid_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"no instance ids in {text!r}")
    return out


def _output_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_suite(path: str | None) -> list[WModelInstance]:
    if path is None:
        return list(instances())
    return parse_instances_csv(Path(path).read_text())


def _lookup(suite: list[WModelInstance], fid: int) -> WModelInstance:
    for inst in suite:
        if inst.fid == fid:
            return inst
    raise ValueError(f"instance id {fid} not in the suite")


def _auc_job(args) -> float:
    config, inst, params, buckets, master_seed, stream_id = args
    return run_auc(config, inst, params, master_seed, stream_id, buckets, buckets)


def _map_jobs(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(tasks) // (jobs * 8))
        return list(pool.map(fn, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigParseError as exc:
        print(f"bad configuration string: {exc}", file=sys.stderr)
        return 2
    suite = _load_suite(args.instances)
    inst = _lookup(suite, args.fid)
    params = GAParams(budget=args.budget_factor * inst.n)
    hist = AttainmentHistogram(inst.v_max, params.budget, args.buckets, args.buckets)
    result = run(config, inst, params, RngStream(args.seed, 0), hist.observe)
    hist.finalize_run()
    auc = hist.auc()
    out = _output_dir(args.out)
    tag = f"fid{inst.fid}_seed{args.seed}"
    (out / f"trajectory_{tag}.csv").write_text(
        trajectory_csv(inst.fid, config, args.seed, result.trajectory)
    )
    artifact = {
        "fid": inst.fid,
        "config": config_string(config),
        "seed": args.seed,
        "n": inst.n,
        "v_max": inst.v_max,
        "budget": params.budget,
        "target_buckets": args.buckets,
        "budget_buckets": args.buckets,
        "auc": auc,
        "evals_used": result.evals_used,
        "best_value": result.best_value,
        "trajectory": [[e, v] for e, v in result.trajectory],
        "attainment": {
            "run_count": hist.run_count,
            "counts": hist.counts.tolist(),
        },
    }
    (out / f"run_{tag}.json").write_text(json.dumps(artifact, sort_keys=True))
    print(f"auc={auc}")
    return 0


def _cmd_baselines(args) -> int:
    spec = ExperimentSpec(
        fids=_parse_fid_list(args.fids),
        runs=args.runs,
        budget_factor=args.budget_factor,
        seed=args.seed,
        output_dir=_output_dir(args.out),
        buckets=args.buckets,
        jobs=args.jobs,
        suite=_load_suite(args.instances),
    )
    rows = run_baseline_campaign(spec)
    path = spec.output_dir / "baselines.csv"
    lines = ["fid,algo,runs,mean_auc,std_auc,best"]
    for row in rows:
        lines.append(
            f"{row['fid']},{row['algo']},{spec.runs},{row['mean_auc']},{row['std_auc']},{row['best']}"
        )
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def run_baseline_campaign(spec: ExperimentSpec) -> list[dict]:
    """Mean/stddev AUC of every campaign configuration on every requested
    instance, plus the per-instance argmax configuration."""
    configs = spec.resolved_configs()
    tasks = []
    for fid in spec.fids:
        inst = spec.instance(fid)
        params = GAParams(budget=spec.budget_factor * inst.n)
        for _, config in configs:
            for rep in range(spec.runs):
                stream_id = len(tasks)
                tasks.append((config, inst, params, spec.buckets, spec.seed, stream_id))
    values = _map_jobs(_auc_job, tasks, spec.jobs)
    rows = []
    pos = 0
    for fid in spec.fids:
        per_algo = {}
        for name, _ in configs:
            aucs = values[pos : pos + spec.runs]
            pos += spec.runs
            mean = float(np.mean(aucs))
            std = float(np.std(aucs, ddof=1)) if spec.runs > 1 else 0.0
            per_algo[name] = (mean, std)
        best = max(per_algo, key=lambda n: per_algo[n][0])
        for name, _ in configs:
            mean, std = per_algo[name]
            rows.append(
                {"fid": fid, "algo": name, "mean_auc": mean, "std_auc": std, "best": best}
            )
    return rows


def _cmd_tune(args) -> int:
    suite = _load_suite(args.instances)
    inst = _lookup(suite, args.fid)
    params = GAParams(budget=args.budget_factor * inst.n)
    race_budget = RaceBudget(
        total_runs=args.total_runs,
        validation_runs=args.validation_runs,
        confidence=args.alpha,
        min_survivors=args.min_survivors,
    )
    rng = RngStream(args.seed, 0)
    parallel = None
    if args.jobs > 1:
        pool = ProcessPoolExecutor(max_workers=args.jobs)
        parallel = lambda fn, it: list(pool.map(fn, list(it), chunksize=4))  # noqa: E731
    try:
        outcome = tune(
            inst,
            params,
            race_budget,
            rng,
            target_buckets=args.buckets,
            budget_buckets=args.buckets,
            parallel_map=parallel,
        )
    finally:
        if args.jobs > 1:
            pool.shutdown()

    # Baseline comparison under identical run counts, on dedicated streams.
    baseline_tasks = []
    for b, name in enumerate(BASELINE_NAMES):
        for rep in range(args.validation_runs):
            stream_id = rng.substream(_BASELINE_COMPARISON_CHILD + b * args.validation_runs + rep).stream_id
            baseline_tasks.append((baseline(name), inst, params, args.buckets, args.seed, stream_id))
    baseline_values = _map_jobs(_auc_job, baseline_tasks, args.jobs)
    baseline_means = {}
    for b, name in enumerate(BASELINE_NAMES):
        chunk = baseline_values[b * args.validation_runs : (b + 1) * args.validation_runs]
        baseline_means[name] = float(np.mean(chunk))
    best_name = max(BASELINE_NAMES, key=lambda n: baseline_means[n])
    best_mean = baseline_means[best_name]
    top = outcome.elites[0]
    rel_gain = (top.mean_auc - best_mean) / best_mean

    report = {
        "fid": inst.fid,
        "master_seed": args.seed,
        "instance": {
            "dim": inst.n,
            "neutrality_mu": inst.neutrality_mu,
            "epistasis_nu": inst.epistasis_nu,
            "ruggedness_gamma": inst.ruggedness_gamma,
            "v_max": inst.v_max,
        },
        "ga": {"mu": params.mu, "lambda": params.lam, "budget": params.budget},
        "buckets": {"target": args.buckets, "budget": args.buckets},
        "race_budget": {
            "total_runs": race_budget.total_runs,
            "validation_runs": race_budget.validation_runs,
            "confidence": race_budget.confidence,
            "min_survivors": race_budget.min_survivors,
        },
        "iterations": [
            {
                "iteration": it.iteration,
                "candidates": it.candidates,
                "survivors": it.survivors,
                "columns": it.columns,
                "runs_used": it.runs_used,
                "best_mean_auc": it.best_mean,
            }
            for it in outcome.iterations
        ],
        "elites": [
            {"config": config_string(e.config), "mean_auc": e.mean_auc, "std_auc": e.std_auc}
            for e in outcome.elites
        ],
        "spent_runs": outcome.spent,
        "best_baseline": {"name": best_name, "mean_auc": best_mean},
        "rel_gain": rel_gain,
    }
    out = _output_dir(args.out)
    report_path = out / f"tuning_fid{inst.fid}.json"
    report_path.write_text(json.dumps(report, sort_keys=True))
    validation_path = out / f"validation_fid{inst.fid}.csv"
    lines = ["config,run,auc"]
    for elite in outcome.elites:
        text = config_string(elite.config)
        for rep, auc in enumerate(elite.validation_aucs):
            lines.append(f"{text},{rep},{auc}")
    validation_path.write_text("\n".join(lines) + "\n")
    print(f"best={config_string(top.config)} mean_auc={top.mean_auc} rel_gain={rel_gain}")
    return 0


_SLOT_FLAGS = {
    "--pc": "pc_idx",
    "--selc": "selc_idx",
    "--cross": "cross_idx",
    "--pm": "pm_idx",
    "--selm": "selm_idx",
    "--mut": "mut_idx",
    "--repl": "repl_idx",
}


def _cmd_target_runner(argv: list[str]) -> int:
    # Wire protocol: <config-id> <instance-id> <seed> <instance> then
    # --slot value pairs; prints exactly one cost line (negated AUC, the
    # caller minimizes).  Any failure exits 1.
    try:
        if len(argv) < 4:
            raise ValueError("expected <config-id> <instance-id> <seed> <instance> --slot value ...")
        seed = int(argv[2])
        fid = int(argv[3])
        rest = argv[4:]
        indices: dict[str, int] = {}
        budget_factor = DEFAULT_BUDGET_FACTOR
        buckets = 100
        i = 0
        while i < len(rest):
            flag = rest[i]
            if i + 1 >= len(rest):
                raise ValueError(f"flag {flag} is missing a value")
            value = int(rest[i + 1])
            if flag in _SLOT_FLAGS:
                indices[_SLOT_FLAGS[flag]] = value
            elif flag == "--budget-factor":
                budget_factor = value
            elif flag == "--buckets":
                buckets = value
            else:
                raise ValueError(f"unknown slot flag {flag}")
            i += 2
        missing = [flag for flag, name in _SLOT_FLAGS.items() if name not in indices]
        if missing:
            raise ValueError(f"missing slot flags: {' '.join(missing)}")
        config = Configuration(**indices)
        inst = instance(fid)
        params = GAParams(budget=budget_factor * inst.n)
        auc = run_auc(config, inst, params, seed, 0, buckets, buckets)
        print(f"{-auc}")
        return 0
    except Exception as exc:  # the caller treats any failure as a rejected config
        print(f"target-runner error: {exc}", file=sys.stderr)
        return 1


def _cmd_export(args) -> int:
    out = _output_dir(args.out)
    for path_text in args.artifacts:
        path = Path(path_text)
        if not path.exists():
            raise FileNotFoundError(f"missing artifact {path}")
        artifact = json.loads(path.read_text())
        if args.kind == "histograms":
            data = artifact["attainment"]
            hist = AttainmentHistogram(
                artifact["v_max"],
                artifact["budget"],
                artifact["target_buckets"],
                artifact["budget_buckets"],
            )
            hist.counts = np.array(data["counts"], dtype=np.uint32)
            hist.run_count = int(data["run_count"])
            target = out / f"histogram_{path.stem}.csv"
            target.write_text(hist.to_csv())
        else:
            config = parse_config(artifact["config"])
            target = out / f"trajectory_{path.stem}.csv"
            target.write_text(
                trajectory_csv(
                    artifact["fid"],
                    config,
                    artifact["seed"],
                    [(e, v) for e, v in artifact["trajectory"]],
                )
            )
        print(f"wrote {target}")
    return 0


def _cmd_instances(args) -> int:
    text = instances_csv()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gafoundry",
        description=(
            "Configurable (mu+lambda) GAs on W-model problems with anytime "
            "AUC logging and racing-based tuning.  The native tuner maximizes "
            "AUC; the target-runner protocol prints negated AUC because "
            "external tuners minimize."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, jobs=True):
        p.add_argument("--budget-factor", type=int, default=DEFAULT_BUDGET_FACTOR,
                       help="evaluation budget = factor * dimension")
        p.add_argument("--buckets", type=int, default=100, help="histogram buckets per axis")
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUTPUT_DIR_ENV} or {DEFAULT_OUTPUT_DIR})")
        p.add_argument("--instances", default=None, help="custom instance suite CSV")
        if jobs:
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                           help="parallel worker processes")

    p_run = sub.add_parser("run", help="one GA run; prints auc=<value>")
    p_run.add_argument("config", help='configuration string, e.g. "P5 C0 s0 c0 a0 M0 u0 m1 r0 O0"')
    p_run.add_argument("--fid", type=int, required=True)
    p_run.add_argument("--seed", type=int, default=0)
    add_common(p_run, jobs=False)
    p_run.set_defaults(handler=_cmd_run)

    p_base = sub.add_parser("baselines", help="baseline campaign; writes baselines.csv")
    p_base.add_argument("--fids", default="1-19", help="instance ids, e.g. 1-19 or 1,5,9")
    p_base.add_argument("--runs", type=int, default=50)
    p_base.add_argument("--seed", type=int, default=0)
    add_common(p_base)
    p_base.set_defaults(handler=_cmd_baselines)

    p_tune = sub.add_parser("tune", help="racing search; writes report JSON and validation CSV")
    p_tune.add_argument("--fid", type=int, required=True)
    p_tune.add_argument("--seed", type=int, default=0)
    p_tune.add_argument("--total-runs", type=int, default=100_000)
    p_tune.add_argument("--validation-runs", type=int, default=50)
    p_tune.add_argument("--alpha", type=float, default=0.05)
    p_tune.add_argument("--min-survivors", type=int, default=4)
    add_common(p_tune)
    p_tune.set_defaults(handler=_cmd_tune)

    p_exp = sub.add_parser("export", help="re-emit CSVs from run artifacts")
    p_exp.add_argument("kind", choices=("histograms", "trajectories"))
    p_exp.add_argument("artifacts", nargs="+", help="run_*.json artifact paths")
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(handler=_cmd_export)

    p_inst = sub.add_parser("instances", help="emit the benchmark suite CSV")
    p_inst.add_argument("--out", default=None)
    p_inst.set_defaults(handler=_cmd_instances)

    # Documented here, handled before argparse so every failure exits 1.
    sub.add_parser(
        "target-runner",
        help="external-tuner protocol: <config-id> <instance-id> <seed> <fid> "
        "--pc I --selc I --cross I --pm I --selm I --mut I --repl I; prints -AUC",
    )

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "target-runner":
        return _cmd_target_runner(argv[1:])
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
