"""Scenario configuration, single-point evaluation and parameter sweeps."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np

from .interferometer import POSITIONS, build_nested_mzi, detector_probabilities, get_position
from .measurement import (
    EvolutionOrder,
    WeakCoupling,
    position_probability,
    postselected_meter_probabilities,
    run_weak_measurement,
)
from .weak_values import DegeneratePostselectionError, infer_weak_value, joint_weak_value, weak_value

# Column order is part of the output contract.
COLUMNS: dict[str, str] = {
    "order": "evolution used for the probability columns: exact or first (linearized coupling)",
    "r": "outer splitter reflectivity",
    "t": "outer splitter transmissivity, r^2 + t^2 = 1",
    "theta": "coupling phase eta*tau",
    "position": "where the meter is coupled",
    "P_D1": "click probability at D1 (sum over meter levels); r^4 with no coupling",
    "P_D2": "click probability at D2",
    "P_D3": "click probability at D3",
    "P_b": "joint probability of a D1 click and meter in b",
    "P_c": "joint probability of a D1 click and meter in c",
    "P_E": "probability of the photon at E; (t^2/4)(1 - cos theta) for exact coupling at C",
    "A_A": "weak value at A (1)",
    "A_B": "weak value at B (-t^2/2r^2)",
    "A_C": "weak value at C (t^2/2r^2)",
    "A_E": "weak value at E (0)",
    "A_F": "weak value at F (0)",
    "A_inferred": "arcsin((P_c - P_b)/(P_b + P_c))/theta: weak value at the coupled position read off the meter",
    "A_CE": "joint weak value for C then E (equals A_C)",
}

SWEEP_COLUMNS: dict[str, str] = {
    "r": COLUMNS["r"],
    "t": COLUMNS["t"],
    "theta": COLUMNS["theta"],
    "position": COLUMNS["position"],
    "P_b_exact": "P_b under exact coupling",
    "P_c_exact": "P_c under exact coupling",
    "P_b_first": "P_b under linearized coupling",
    "P_c_first": "P_c under linearized coupling",
    "dP_b": "P_b_exact - P_b_first, O(theta^2)",
    "dP_c": "P_c_exact - P_c_first, O(theta^2)",
    "P_E_exact": "probability of the photon at E under exact coupling",
    "P_E_first": "probability of the photon at E under linearized coupling",
}

RT_CONSISTENCY = 1e-9


class ConfigError(ValueError):
    """Invalid scenario or sweep configuration; ``field`` names the culprit."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    r: float
    t: float
    theta: float = 0.0
    coupling_position: str = "C"
    order: EvolutionOrder = EvolutionOrder.EXACT
    outputs: tuple[str, ...] = tuple(COLUMNS)

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> "ScenarioConfig":
        known = {"r", "t", "theta", "eta", "tau", "position", "coupling_position", "order", "outputs"}
        for key in raw:
            if key not in known:
                raise ConfigError(key, "unknown field")
        r, t = _resolve_rt(_num(raw, "r"), _num(raw, "t"))
        theta = _resolve_theta(_num(raw, "theta"), _num(raw, "eta"), _num(raw, "tau"))
        pos = raw.get("coupling_position", raw.get("position", "C"))
        if str(pos).upper() not in POSITIONS:
            raise ConfigError("position", f"{pos!r} is not one of {', '.join(POSITIONS)}")
        try:
            order = EvolutionOrder(raw.get("order", "exact"))
        except ValueError:
            raise ConfigError("order", f"{raw.get('order')!r} is not 'exact' or 'first'") from None
        outputs = raw.get("outputs") or tuple(COLUMNS)
        if isinstance(outputs, str):
            outputs = [o.strip() for o in outputs.split(",") if o.strip()]
        bad = [o for o in outputs if o not in COLUMNS]
        if bad:
            raise ConfigError("outputs", f"unknown column(s) {', '.join(bad)}")
        try:
            WeakCoupling(theta, str(pos).upper())
        except ValueError as exc:
            raise ConfigError("theta", str(exc)) from None
        # Keep the documented column order regardless of request order.
        ordered = tuple(c for c in COLUMNS if c in set(outputs))
        return cls(r, t, theta, str(pos).upper(), order, ordered)


def _num(raw: Mapping[str, Any], key: str) -> Optional[float]:
    value = raw.get(key)
    if value is None:
        return None
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"{value!r} is not a number") from None
    if not math.isfinite(out):
        raise ConfigError(key, "must be finite")
    return out


def _resolve_rt(r: Optional[float], t: Optional[float]) -> tuple[float, float]:
    for name, v in (("r", r), ("t", t)):
        if v is not None and not 0.0 <= v <= 1.0:
            raise ConfigError(name, f"{v} outside [0, 1]")
    if r is None and t is None:
        raise ConfigError("r", "one of r or t is required")
    if r is None:
        return math.sqrt(1 - t * t), t
    if t is None:
        return r, math.sqrt(1 - r * r)
    if abs(r * r + t * t - 1) > RT_CONSISTENCY:
        raise ConfigError("t", f"r^2 + t^2 = {r * r + t * t:.12g}, expected 1")
    # Renormalize so the pipeline's own 1e-12 check cannot trip on input rounding.
    h = math.hypot(r, t)
    return r / h, t / h


def _resolve_theta(theta: Optional[float], eta: Optional[float], tau: Optional[float]) -> float:
    if (eta is None) != (tau is None):
        raise ConfigError("tau" if tau is None else "eta", "eta and tau must be given together")
    if eta is None:
        return 0.0 if theta is None else theta
    product = eta * tau
    if theta is not None and abs(theta - product) > 1e-12 * max(1.0, abs(theta)):
        raise ConfigError("theta", f"theta={theta} disagrees with eta*tau={product}")
    return product


def _safe(fn) -> float:
    try:
        return float(fn())
    except (DegeneratePostselectionError, ValueError):
        return math.nan


def run_scenario(cfg: ScenarioConfig) -> dict[str, Any]:
    """Evaluate one configuration; returns the requested columns in order."""
    r, t, theta = cfg.r, cfg.t, cfg.theta
    p = build_nested_mzi(r, t)
    c = WeakCoupling(theta, get_position(cfg.coupling_position))
    final = run_weak_measurement(r, t, c, cfg.order, pipeline=p)
    meter = postselected_meter_probabilities(final, "D1")
    d1, d2, d3 = detector_probabilities(final)
    row: dict[str, Any] = {
        "order": cfg.order.value,
        "r": r,
        "t": t,
        "theta": theta,
        "position": cfg.coupling_position,
        "P_D1": d1,
        "P_D2": d2,
        "P_D3": d3,
        "P_b": meter.p_b,
        "P_c": meter.p_c,
        "P_E": position_probability(r, t, c, "E", cfg.order, pipeline=p),
    }
    for name in "ABCEF":
        row[f"A_{name}"] = _safe(lambda name=name: weak_value(r, t, name, pipeline=p).value.real)
    row["A_inferred"] = _safe(lambda: infer_weak_value(meter, theta))
    row["A_CE"] = _safe(lambda: joint_weak_value(r, t, "C", "E", pipeline=p).value.real)
    return {k: row[k] for k in cfg.outputs}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.parameter not in ("theta", "r"):
            raise ConfigError("param", f"{self.parameter!r} is not 'theta' or 'r'")
        if self.scale not in ("linear", "log"):
            raise ConfigError("scale", f"{self.scale!r} is not 'linear' or 'log'")
        if self.points < 1:
            raise ConfigError("points", "must be at least 1")
        if self.points > 1 and not self.start < self.stop:
            raise ConfigError("stop", "start must be below stop")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("start", "log scale needs a positive start")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


def _with(cfg: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter == "theta":
        try:
            WeakCoupling(value, cfg.coupling_position)
        except ValueError as exc:
            raise ConfigError("stop", str(exc)) from None
        return dataclasses.replace(cfg, theta=float(value))
    r, t = _resolve_rt(float(value), None)
    return dataclasses.replace(cfg, r=r, t=t)


def sweep(cfg: ScenarioConfig, spec: SweepSpec) -> list[dict[str, Any]]:
    """One row per sweep value, exact and linearized results side by side."""
    rows = []
    for value in spec.values():
        point = _with(cfg, spec.parameter, value)
        r, t, theta = point.r, point.t, point.theta
        p = build_nested_mzi(r, t)
        c = WeakCoupling(theta, get_position(point.coupling_position))
        exact = postselected_meter_probabilities(run_weak_measurement(r, t, c, EvolutionOrder.EXACT, pipeline=p))
        first = postselected_meter_probabilities(run_weak_measurement(r, t, c, EvolutionOrder.FIRST, pipeline=p))
        rows.append(
            {
                "r": r,
                "t": t,
                "theta": theta,
                "position": point.coupling_position,
                "P_b_exact": exact.p_b,
                "P_c_exact": exact.p_c,
                "P_b_first": first.p_b,
                "P_c_first": first.p_c,
                "dP_b": exact.p_b - first.p_b,
                "dP_c": exact.p_c - first.p_c,
                "P_E_exact": position_probability(r, t, c, "E", EvolutionOrder.EXACT, pipeline=p),
                "P_E_first": position_probability(r, t, c, "E", EvolutionOrder.FIRST, pipeline=p),
            }
        )
    return rows


def sweep_theta(cfg: ScenarioConfig, spec: SweepSpec) -> list[dict[str, Any]]:
    if spec.parameter != "theta":
        raise ConfigError("param", "sweep_theta needs parameter 'theta'")
    return sweep(cfg, spec)

