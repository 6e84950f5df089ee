"""Command-line front end.

Every command writes its outputs plus ``manifest.json`` (config snapshot,
seed, version and SHA-256 digests of the files written) into ``--out-dir``.
Exit codes: 0 success, 1 usage or configuration error, 2 validation coverage
failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (MomentReport, jb_moments_power_control, jb_no_power_control,
                       ja_moments_motionless, kappa, power_control_gain)
from .config import ConfigError, Scenario, load_scenario
from .model import PathLossKind
from .montecarlo import SimulationPlan, simulate
from .planner import CostModel, cost_curve, dimension_battery, optimal_radius

EXIT_OK, EXIT_CONFIG, EXIT_COVERAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class _Outputs:
    def __init__(self, out_dir: Path, fmt: str):
        self.dir = out_dir
        self.fmt = fmt
        self.written: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str, kind: str | None = None):
        if kind is not None and self.fmt not in (kind, "both"):
            return
        data = text.encode()
        (self.dir / name).write_bytes(data)
        self.written[name] = hashlib.sha256(data).hexdigest()

    def manifest(self, command: str, scenario: Scenario, args, started: float):
        snap = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
        snap["config_path"] = str(args.config)
        manifest = {"command": command, "config": scenario.to_dict(), "arguments": snap,
                    "master_seed": getattr(args, "seed", None), "tool_version": __version__,
                    "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
                    "wall_clock_s": time.time() - started, "outputs": dict(sorted(self.written.items()))}
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_moments(args, scenario: Scenario, out: _Outputs) -> int:
    cell, traffic = scenario.cell, scenario.traffic
    n = args.orders
    ja = ja_moments_motionless(cell, traffic, n)
    jb_vals = [jb_moments_power_control(cell, k) for k in range(1, n + 1)]
    jb = MomentReport(list(range(1, n + 1)), jb_vals, "analytic", ["max-distance-law"])
    jb0 = jb_no_power_control(cell)
    doc = {"JA_motionless": ja.to_dict(), "JB_power_control": jb.to_dict(), "JB_fixed": jb0,
           "kappa": kappa(cell, traffic), "power_control_gain": jb.mean / jb0}
    out.write("moments.json", _dumps(doc), "json")
    rows = [("JA_motionless", k, v) for k, v in zip(ja.orders, ja.values)]
    rows += [("JB_power_control", k, v) for k, v in zip(jb.orders, jb.values)]
    rows += [("JB_fixed", 1, jb0), ("kappa", 0, doc["kappa"])]
    out.write("moments.csv", _csv_text(["quantity", "order", "value"], rows), "csv")
    return EXIT_OK


def _plan(args, **kw) -> SimulationPlan:
    return SimulationPlan(args.replications, args.seed, time_step=args.time_step, workers=args.workers, **kw)


def _verdict(analytic, estimate, se, mode="equal"):
    diff = estimate - analytic
    if se == 0:
        ok = abs(diff) <= 1e-9 * max(abs(analytic), 1e-300)
        z = 0.0 if ok else math.inf
    else:
        z = diff / se
        ok = z <= 3 if mode == "upper" else abs(z) <= 3
    return z, ok


def cmd_validate(args, scenario: Scenario, out: _Outputs) -> int:
    cell, traffic, mobility = scenario.cell, scenario.traffic, scenario.mobility
    report = simulate(cell, traffic, mobility, _plan(args))
    ja_exact = ja_moments_motionless(cell, traffic, 2)
    rows = []

    def add(quantity, analytic, est, se, mode="equal"):
        z, ok = _verdict(analytic, est, se, mode)
        rows.append({"quantity": quantity, "analytic": analytic, "montecarlo": est, "std_error": se,
                     "z": z, "relation": "<=" if mode == "upper" else "==", "pass": ok})

    s = report["JA"]
    add("JA_mean", ja_exact.mean, s.mean, s.mean_se)
    if mobility.is_static:
        add("JA_variance", ja_exact.variance, s.variance, s.variance_se)
        b = report["JB_power_control"]
        add("JB_power_control_mean", jb_moments_power_control(cell, 1), b.mean, b.mean_se)
    else:
        # mobility can only lower the variance below the motionless value
        add("JA_variance_vs_motionless", ja_exact.variance, s.variance, s.variance_se, "upper")
    f = report["JB_fixed"]
    add("JB_fixed", jb_no_power_control(cell), f.mean, 0.0)
    passed = all(r["pass"] for r in rows)
    doc = {"replications": report.replications, "master_seed": report.master_seed,
           "all_pass": passed, "rows": rows, "warnings": report.warnings,
           "estimates": report.to_dict(timing=False)["statistics"]}
    out.write("validate.json", _dumps(doc), "json")
    out.write("validate.csv", _csv_text(list(rows[0]), [list(r.values()) for r in rows]), "csv")
    if args.dump_replications:
        report.dump_replications(out.dir / "replications.csv")
        out.written["replications.csv"] = hashlib.sha256((out.dir / "replications.csv").read_bytes()).hexdigest()
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['quantity']:<28} analytic={r['analytic']:.6g} "
              f"mc={r['montecarlo']:.6g} z={r['z']:+.2f}")
    return EXIT_OK if passed else EXIT_COVERAGE


def cmd_power_gain(args, scenario: Scenario, out: _Outputs) -> int:
    cell = scenario.cell
    if cell.pathloss.kind is not PathLossKind.SINGULAR:
        raise ConfigError("power-gain needs the singular path loss")
    grid = args.n_grid or [0.1, 0.5, 1, 2, 5, 10, 20, 50, 100, 200]
    rows = [(n, power_control_gain(n, cell.gamma)) for n in grid]
    out.write("power_gain.csv", _csv_text(["mean_users", "gain"], rows))
    return EXIT_OK


def _planner_doc(**kw) -> dict:
    keys = ("r_opt_m", "r_hat_m", "cost_at_opt", "kappa", "zeta_mws", "alpha_star", "e_lambda")
    doc = {k: kw.pop(k, None) for k in keys}
    doc["warnings"] = kw.pop("warnings", [])
    doc.update(kw)
    return doc


def cmd_optimize_radius(args, scenario: Scenario, out: _Outputs) -> int:
    cell, traffic = scenario.cell, scenario.traffic
    k = None if args.recompute_kappa else (args.kappa if args.kappa is not None else kappa(cell, traffic))
    cost = CostModel(args.area, args.c1, cell.horizon, k)
    res = optimal_radius(cost, cell, traffic)
    doc = _planner_doc(r_opt_m=res.r_opt, r_hat_m=res.r_hat, cost_at_opt=res.cost_at_opt,
                       kappa=res.kappa, warnings=res.warnings)
    out.write("radius.json", _dumps(doc), "json")
    centre = res.r_opt or res.r_hat
    radii = centre * np.logspace(-1, 1, 201)
    out.write("cost_curve.csv", _csv_text(["radius_m", "cost"], cost_curve(cost, cell, traffic, radii)), "csv")
    print(json.dumps(doc))
    return EXIT_OK


def cmd_dimension_battery(args, scenario: Scenario, out: _Outputs) -> int:
    cell, traffic = scenario.cell, scenario.traffic
    battery = dimension_battery(cell, traffic, args.epsilon, args.mode)
    extra = {}
    if args.replications:
        from .montecarlo import tail_from_samples
        rep = simulate(cell, traffic, scenario.mobility, _plan(args, outputs=("JA", "JTotal")))
        tail = tail_from_samples(rep.samples["JTotal"], battery.zeta_total)
        extra = {"empirical_tail": tail.probability, "empirical_tail_ci": [tail.lower, tail.upper],
                 "replications": args.replications}
    doc = _planner_doc(zeta_mws=battery.zeta_total, alpha_star=battery.alpha_star, e_lambda=battery.e_lambda,
                       kappa=kappa(cell, traffic), warnings=battery.warnings, epsilon=battery.epsilon,
                       mode=battery.mode, zeta_additive_mws=battery.zeta, beacon_mws=battery.beacon,
                       m3=battery.m3, reliable=battery.reliable, out_of_validity=battery.out_of_validity, **extra)
    out.write("battery.json", _dumps(doc), "json")
    rows = []
    for g in np.round(np.arange(2.0, 5.01, 0.25), 2):
        c = replace(cell, pathloss=replace(cell.pathloss, gamma=float(g)))
        z = dimension_battery(c, traffic, args.epsilon, args.mode).zeta_total / cell.horizon
        rows.append((float(g), z, math.log10(z)))
    out.write("zeta_curve.csv", _csv_text(["gamma", "zeta_over_T_mw", "log10_zeta_over_T"], rows), "csv")
    print(json.dumps(doc))
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cellenergy", description="Energy of an isolated base station under Poisson users.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, sim=False):
        sp.add_argument("--config", required=True, type=Path, help="scenario JSON file")
        sp.add_argument("--out-dir", type=Path, default=Path("out"))
        sp.add_argument("--format", choices=("json", "csv", "both"), default="both")
        if sim:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--replications", type=int, default=10_000)
            sp.add_argument("--workers", type=int, default=1)
            sp.add_argument("--time-step", type=float, default=10.0)

    sp = sub.add_parser("moments", help="closed-form moments of J_A, J_B and kappa")
    common(sp)
    sp.add_argument("--orders", type=int, default=4)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("validate", help="analytic moments against Monte Carlo")
    common(sp, sim=True)
    sp.add_argument("--dump-replications", action="store_true")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("power-gain", help="power-control gain against the mean user count")
    common(sp)
    sp.add_argument("--n-grid", type=_float_list, default=None)
    sp.set_defaults(func=cmd_power_gain)

    sp = sub.add_parser("optimize-radius", help="cell radius minimising deployment plus energy cost")
    common(sp)
    sp.add_argument("--area", type=float, default=1e8, help="region area in m^2")
    sp.add_argument("--c1", type=float, default=1e3, help="deployment cost per station")
    sp.add_argument("--kappa", type=float, default=None, help="fixed kappa (default: from config)")
    sp.add_argument("--recompute-kappa", action="store_true", help="recompute kappa at each radius")
    sp.set_defaults(func=cmd_optimize_radius)

    sp = sub.add_parser("dimension-battery", help="battery level for an outage target")
    common(sp, sim=True)
    sp.set_defaults(replications=0)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    sp.set_defaults(func=cmd_dimension_battery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        scenario = load_scenario(args.config)
        out = _Outputs(args.out_dir, args.format)
        code = args.func(args, scenario, out)
    except ValueError as exc:  # ConfigError, PlanningError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:  # QuadratureError, OptimizationError
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out.manifest(args.command, scenario, args, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
