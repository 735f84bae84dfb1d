"""Expected achievable rate per swarm centroid for the three front ends."""

import argparse

from raa_isac.comms import expected_rate
from raa_isac.config import resolve_config
from raa_isac.experiment import draw_scenario, front_end


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="paper_desk", help="preset name or .cfg path")
    ap.add_argument("--trials", type=int, default=None)
    args = ap.parse_args()
    cfg = resolve_config(args.config)
    trials = args.trials or cfg.montecarlo.rate_trials
    ofdm = cfg.ofdm_config()
    arrays = {name: front_end(cfg, name) for name in ("raa", "ula", "ula_iso")}
    print(f"{'centroid':>8} " + " ".join(f"{name:>16}" for name in arrays))
    for ci, centroid in enumerate(cfg.scenario.centroids_deg):
        cells = []
        for array in arrays.values():
            r = expected_rate(lambda s, c=centroid: draw_scenario(cfg, c, s), array, ofdm, trials,
                              seed=[cfg.montecarlo.seed, ci])
            cells.append(f"{r.rate:>9.3f}+-{r.stderr:<5.3f}")
        print(f"{centroid:>8g} " + " ".join(cells))


if __name__ == "__main__":
    main()
