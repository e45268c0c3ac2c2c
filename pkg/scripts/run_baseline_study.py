#!/usr/bin/env python3
"""Baseline campaign over the 19-instance suite.

Runs every named baseline on every requested instance and writes
baselines.csv (mean/stddev AUC plus the per-instance argmax baseline), the
same artifact the `gafoundry baselines` subcommand produces.

    python3 scripts/run_baseline_study.py --runs 50 --seed 1 --out results/
"""

import argparse
import sys
from pathlib import Path

from gafoundry.cli import ExperimentSpec, run_baseline_campaign


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fids", default="1-19", help="instance ids, e.g. 1-19 or 1,5,9")
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--budget-factor", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="baseline-study")
    args = parser.parse_args()

    from gafoundry.cli import _parse_fid_list

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = ExperimentSpec(
        fids=_parse_fid_list(args.fids),
        runs=args.runs,
        budget_factor=args.budget_factor,
        seed=args.seed,
        output_dir=out,
        jobs=args.jobs,
    )
    rows = run_baseline_campaign(spec)
    path = out / "baselines.csv"
    lines = ["fid,algo,runs,mean_auc,std_auc,best"]
    for row in rows:
        lines.append(
            f"{row['fid']},{row['algo']},{spec.runs},{row['mean_auc']},{row['std_auc']},{row['best']}"
        )
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    for fid in spec.fids:
        fid_rows = [r for r in rows if r["fid"] == fid]
        best = fid_rows[0]["best"]
        best_mean = max(r["mean_auc"] for r in fid_rows)
        print(f"fid {fid:2d}: best {best} (mean AUC {best_mean:.0f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
