"""JSON scenario files.

Keys: radius_m, density_per_m2, horizon_s, pathloss{kind, gamma, r0_m},
budget{p_min_rx_mw, p_min_beacon_mw, frequency_hz, d_ref_m}, traffic{kind,
mu_on_per_s, mu_off_per_s}, mobility{kind, speed_mps, epsilon}.  Unknown keys
are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .mobility import MobilityKind, MobilityModel, SpeedDistribution
from .model import CellConfig, LinkBudget, PathLoss, PathLossKind
from .traffic import TrafficKind, TrafficModel


class ConfigError(ValueError):
    pass


def _check_keys(d: dict, allowed: set, where: str, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class Scenario:
    cell: CellConfig
    traffic: TrafficModel = field(default_factory=TrafficModel)
    mobility: MobilityModel = field(default_factory=MobilityModel)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        _check_keys(d, {"radius_m", "density_per_m2", "horizon_s", "pathloss", "budget", "traffic",
                        "mobility"}, "scenario", ("radius_m", "density_per_m2", "horizon_s"))
        try:
            pl = d.get("pathloss", {})
            _check_keys(pl, {"kind", "gamma", "r0_m"}, "pathloss")
            pathloss = PathLoss(PathLossKind(pl.get("kind", "singular")), float(pl.get("gamma", 3.0)),
                                None if pl.get("r0_m") is None else float(pl["r0_m"]))
            bd = d.get("budget", {})
            _check_keys(bd, {"p_min_rx_mw", "p_min_beacon_mw", "frequency_hz", "d_ref_m"}, "budget")
            budget = LinkBudget(float(bd.get("p_min_rx_mw", 1e-9)), float(bd.get("p_min_beacon_mw", 1e-8)),
                                float(bd.get("frequency_hz", 2e9)), float(bd.get("d_ref_m", 1.0)))
            cell = CellConfig(float(d["radius_m"]), float(d["density_per_m2"]), pathloss, budget,
                              float(d["horizon_s"]))
            tr = d.get("traffic", {"kind": "always_on"})
            _check_keys(tr, {"kind", "mu_on_per_s", "mu_off_per_s"}, "traffic", ("kind",))
            kind = TrafficKind(tr["kind"])
            if kind is TrafficKind.ALWAYS_ON:
                traffic = TrafficModel.always_on()
            else:
                traffic = TrafficModel(kind, float(tr["mu_on_per_s"]), float(tr["mu_off_per_s"]))
            mb = d.get("mobility", {"kind": "motionless"})
            _check_keys(mb, {"kind", "speed_mps", "epsilon"}, "mobility", ("kind",))
            mkind = MobilityKind(mb["kind"])
            eps = float(mb.get("epsilon", 1.0))
            if mkind is MobilityKind.MOTIONLESS:
                if "speed_mps" in mb:
                    raise ConfigError("mobility: motionless takes no speed_mps")
                mobility = MobilityModel(mkind, None, eps)
            else:
                mobility = MobilityModel(mkind, _parse_speed(mb.get("speed_mps")), eps)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(cell, traffic, mobility)

    def to_dict(self) -> dict:
        c = self.cell
        pl = {"kind": c.pathloss.kind.value, "gamma": c.pathloss.gamma}
        if c.pathloss.r0 is not None:
            pl["r0_m"] = c.pathloss.r0
        d = {"radius_m": c.radius, "density_per_m2": c.density, "horizon_s": c.horizon, "pathloss": pl,
             "budget": {"p_min_rx_mw": c.budget.p_min_rx, "p_min_beacon_mw": c.budget.p_min_beacon,
                        "frequency_hz": c.budget.frequency_hz, "d_ref_m": c.budget.d_ref}}
        t = self.traffic
        d["traffic"] = ({"kind": t.kind.value} if t.kind is TrafficKind.ALWAYS_ON else
                        {"kind": t.kind.value, "mu_on_per_s": t.mu_on, "mu_off_per_s": t.mu_off})
        m = self.mobility
        d["mobility"] = {"kind": m.kind.value, "epsilon": m.epsilon}
        if m.speed is not None:
            d["mobility"]["speed_mps"] = ({"fixed": m.speed.low} if m.speed.is_fixed else
                                          {"uniform": [m.speed.low, m.speed.high]})
        return d


def _parse_speed(spec) -> SpeedDistribution:
    if isinstance(spec, (int, float)):
        return SpeedDistribution.fixed(float(spec))
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError("mobility.speed_mps must be a number, {fixed: v} or {uniform: [lo, hi]}")
    (kind, value), = spec.items()
    if kind == "fixed":
        return SpeedDistribution.fixed(float(value))
    if kind == "uniform":
        lo, hi = value
        return SpeedDistribution(float(lo), float(hi))
    raise ConfigError(f"mobility.speed_mps: unknown distribution {kind!r}")


def load_scenario(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return Scenario.from_dict(data)


def reference_scenario() -> Scenario:
    """Reference cell: 1e-4 users/m^2, R = 500 m, gamma = 3, mu_on = mu_off = 0.01/s, T = 1 h."""
    return Scenario(CellConfig(500.0, 1e-4, PathLoss(PathLossKind.SINGULAR, 3.0), LinkBudget(), 3600.0),
                    TrafficModel(TrafficKind.EXPONENTIAL, 0.01, 0.01), MobilityModel.motionless())
