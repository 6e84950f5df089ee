"""Analytic moments of the reference cell against Monte Carlo, static and mobile."""
import argparse
import json

from cellenergy.analytic import ja_moments_motionless, jb_moments_power_control
from cellenergy.config import load_scenario, reference_scenario
from cellenergy.mobility import MobilityModel
from cellenergy.montecarlo import SimulationPlan, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="scenario JSON (default: built-in reference cell)")
    ap.add_argument("--replications", type=int, default=10_000)
    ap.add_argument("--speed", type=float, default=5.0, help="m/s for the mobile comparison")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sc = load_scenario(args.config) if args.config else reference_scenario()
    exact = ja_moments_motionless(sc.cell, sc.traffic, 2)
    rows = {"analytic": {"JA_mean": exact.mean, "JA_var": exact.variance,
                         "JB_pc_mean": jb_moments_power_control(sc.cell, 1)}}
    for label, mob, reps in (("motionless", MobilityModel.motionless(), args.replications),
                             (f"{args.speed:g} m/s", MobilityModel.constant_velocity(args.speed),
                              max(args.replications // 10, 100))):
        rep = simulate(sc.cell, sc.traffic, mob, SimulationPlan(reps, master_seed=args.seed))
        ja, jb = rep["JA"], rep["JB_power_control"]
        rows[label] = {"replications": reps, "JA_mean": ja.mean, "JA_mean_ci": ja.mean_ci,
                       "JA_var": ja.variance, "JA_var_ci": ja.variance_ci,
                       "JB_pc_mean": jb.mean, "seconds": round(rep.timing, 1)}
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
