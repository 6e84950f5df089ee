"""Beacon power-control gain E[J_B] / J_B^0 against the mean number of users per cell."""
import argparse
import csv
import sys

import numpy as np

from cellenergy.analytic import power_control_gain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", default="2,3,4")
    ap.add_argument("--n-max", type=float, default=200.0)
    ap.add_argument("--points", type=int, default=40)
    args = ap.parse_args()
    gammas = [float(g) for g in args.gammas.split(",")]
    w = csv.writer(sys.stdout)
    w.writerow(["mean_users"] + [f"gain_gamma_{g:g}" for g in gammas])
    for n in np.geomspace(0.1, args.n_max, args.points):
        w.writerow([f"{n:.6g}"] + [f"{power_control_gain(n, g):.10f}" for g in gammas])


if __name__ == "__main__":
    main()
