"""Battery level for a fixed outage target as the path-loss exponent varies."""
import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from cellenergy.config import reference_scenario
from cellenergy.model import PathLoss, PathLossKind
from cellenergy.planner import dimension_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--gamma-min", type=float, default=2.0)
    ap.add_argument("--gamma-max", type=float, default=5.0)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    args = ap.parse_args()
    sc = reference_scenario()
    w = csv.writer(sys.stdout)
    w.writerow(["gamma", "zeta_total_mws", "zeta_additive_mws", "alpha_star", "e_lambda", "reliable"])
    for g in np.linspace(args.gamma_min, args.gamma_max, args.points):
        cell = replace(sc.cell, pathloss=PathLoss(PathLossKind.SINGULAR, float(g)))
        battery = dimension_battery(cell, sc.traffic, args.epsilon, args.mode)
        w.writerow([f"{g:.4g}", f"{battery.zeta_total:.8g}", f"{battery.zeta:.8g}", f"{battery.alpha_star:.6f}",
                    f"{battery.e_lambda:.5g}", battery.reliable])


if __name__ == "__main__":
    main()
