"""Print RAA vs ULA angular resolution over steering angles for a few array sizes."""

import argparse

import numpy as np

from raa_isac.array_model import RaaConfig, UlaConfig
from raa_isac.beam_analysis import raa_resolution, ula_domain, ula_resolution


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, nargs="+", default=[8, 16, 128])
    ap.add_argument("--angles", type=float, nargs="+", default=[0, 15, 30, 45, 60, 75])
    args = ap.parse_args()
    print(f"{'M':>4} {'theta_deg':>9} {'raa_deg':>9} {'ula_deg':>9} {'ratio':>7}")
    for M in args.M:
        raa, ula = RaaConfig.design(M), UlaConfig(M)
        for deg in args.angles:
            tp = np.deg2rad(deg)
            g_raa = np.rad2deg(raa_resolution(raa, tp).resolution)
            if abs(tp) <= ula_domain(M):
                g_ula = np.rad2deg(ula_resolution(ula, tp).resolution)
                print(f"{M:>4} {deg:>9.1f} {g_raa:>9.4f} {g_ula:>9.4f} {g_ula / g_raa:>7.3f}")
            else:
                print(f"{M:>4} {deg:>9.1f} {g_raa:>9.4f} {'n/a':>9} {'n/a':>7}")


if __name__ == "__main__":
    main()
