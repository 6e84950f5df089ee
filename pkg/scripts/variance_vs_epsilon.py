"""Variance of the additive energy under accelerated mobility t -> M(t / eps)."""
import argparse
import json

from cellenergy.config import reference_scenario
from cellenergy.mobility import MobilityModel
from cellenergy.montecarlo import SimulationPlan, variance_vs_epsilon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--speed", type=float, default=0.5, help="base speed in m/s")
    ap.add_argument("--epsilons", default="1,0.5,0.2,0.1")
    ap.add_argument("--replications", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    sc = reference_scenario()
    eps = [float(e) for e in args.epsilons.split(",")]
    table = variance_vs_epsilon(sc.cell, sc.traffic, MobilityModel.constant_velocity(args.speed), eps,
                                SimulationPlan(args.replications, master_seed=args.seed))
    print(json.dumps(table.to_dict(), indent=2))


if __name__ == "__main__":
    main()
