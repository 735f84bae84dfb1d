"""Run the AoA RMSE / missing-target campaign and print the summary table."""

import argparse

from raa_isac.config import resolve_config
from raa_isac.experiment import run_montecarlo


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="paper_desk", help="preset name or .cfg path")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="results/rmse_sweep")
    args = ap.parse_args()
    cfg = resolve_config(args.config)
    overrides = {k: v for k, v in (("trials", args.trials), ("workers", args.workers)) if v is not None}
    if overrides:
        cfg = cfg.replace(montecarlo=overrides)
    manifest = run_montecarlo(cfg, args.out)
    print(f"{'centroid':>8} {'rmse_raa':>9} {'rmse_ula':>9} {'eps_raa':>7} {'eps_ula':>7}")
    for row in manifest.summary:
        print(f"{row['centroid_deg']:>8g} {row['rmse_raa_deg']:>9.4f} {row['rmse_ula_deg']:>9.4f} "
              f"{row['eps_raa']:>7.2f} {row['eps_ula']:>7.2f}")
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
