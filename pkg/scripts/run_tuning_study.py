#!/usr/bin/env python3
"""Per-instance tuning campaign: race the design space on each requested
instance, validate the elites, and compare against the best baseline.

Desk-scale defaults (20k runs/instance) finish in minutes per instance; the
full-scale study uses --total-runs 100000.

    python3 scripts/run_tuning_study.py --fids 5,9,17 --total-runs 20000 --out tuning/
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from gafoundry import (
    BASELINE_NAMES,
    GAParams,
    RaceBudget,
    RngStream,
    baseline,
    config_string,
    instance,
    run_auc,
    tune,
)
from gafoundry.cli import _parse_fid_list


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fids", default="1-19")
    parser.add_argument("--total-runs", type=int, default=20_000)
    parser.add_argument("--validation-runs", type=int, default=50)
    parser.add_argument("--budget-factor", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default="tuning-study")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for fid in _parse_fid_list(args.fids):
        inst = instance(fid)
        params = GAParams(budget=args.budget_factor * inst.n)
        budget = RaceBudget(total_runs=args.total_runs, validation_runs=args.validation_runs)
        outcome = tune(inst, params, budget, RngStream(args.seed, fid))
        baseline_means = {}
        for b, name in enumerate(BASELINE_NAMES):
            aucs = [
                run_auc(baseline(name), inst, params, args.seed, (1 << 40) + fid * 10_000 + b * 100 + rep)
                for rep in range(args.validation_runs)
            ]
            baseline_means[name] = float(np.mean(aucs))
        best_name = max(baseline_means, key=baseline_means.get)
        top = outcome.elites[0]
        rel_gain = (top.mean_auc - baseline_means[best_name]) / baseline_means[best_name]
        record = {
            "fid": fid,
            "elite": config_string(top.config),
            "elite_mean_auc": top.mean_auc,
            "best_baseline": best_name,
            "best_baseline_mean_auc": baseline_means[best_name],
            "rel_gain": rel_gain,
            "spent_runs": outcome.spent,
        }
        summary.append(record)
        print(
            f"fid {fid:2d}: elite {record['elite']} auc {top.mean_auc:.0f} "
            f"vs {best_name} {baseline_means[best_name]:.0f} (rel {rel_gain:+.1%})"
        )
    (out / "tuning_summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2))
    print(f"wrote {out / 'tuning_summary.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
