"""Hardware clock drift schedules.

Every schedule keeps the instantaneous rate inside ``[1, 1 + rho]``. Rates
are described by a *level* in ``[0, 1]`` (rate ``1 + level * rho``) so a
schedule stays valid when ``rho`` changes.

A schedule is compiled per node into a :class:`RateTable`, which both kernel
backends integrate exactly; the hardware clock therefore does not depend on
the integration step.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from gcsim.params import InvalidArgument

KINDS = ("constant", "sinusoidal", "piecewise-constant", "seeded-random-walk")

# RateTable.kind codes shared with the kernels
TABLE_STEP = 0
TABLE_LINEAR = 1
TABLE_SINE = 2


@dataclass(frozen=True)
class DriftSchedule:
    kind: str = "constant"
    level: float | None = None
    period: float = 1.0e6
    phase: float | None = None
    times: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()
    step: float = 1000.0
    sigma: float = 0.05
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown drift kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "times", tuple(float(x) for x in self.times))
        object.__setattr__(self, "levels", tuple(float(x) for x in self.levels))
        if self.level is not None and not 0.0 <= self.level <= 1.0:
            raise InvalidArgument(f"drift level must lie in [0, 1] (level={self.level})")
        if self.kind == "piecewise-constant":
            if not self.times or len(self.times) != len(self.levels):
                raise InvalidArgument("piecewise-constant drift needs equally long, non-empty times and levels")
            if self.times[0] != 0.0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise InvalidArgument("piecewise-constant knot times must start at 0 and increase")
            if any(not 0.0 <= x <= 1.0 for x in self.levels):
                raise InvalidArgument("piecewise-constant levels must lie in [0, 1]")
        if self.kind == "sinusoidal" and not self.period > 0:
            raise InvalidArgument(f"sinusoidal period must be positive (period={self.period})")
        if self.kind == "seeded-random-walk" and not (self.step > 0 and 0 <= self.sigma <= 1):
            raise InvalidArgument("random walk needs step > 0 and sigma in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["times"] = list(self.times)
        d["levels"] = list(self.levels)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> DriftSchedule:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidArgument(f"unknown drift field(s): {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class RateTable:
    """Per-node rate description consumed by the kernels."""

    kind: int
    t: np.ndarray
    v: np.ndarray
    cum: np.ndarray
    amp: float = 0.0
    omega: float = 0.0
    phase: float = 0.0


def _rng(seed: int | None, node: int) -> np.random.Generator:
    return np.random.default_rng([int(seed or 0) & 0xFFFFFFFF, int(node)])


def _walk_levels(schedule: DriftSchedule, node: int, count: int) -> np.ndarray:
    rng = _rng(schedule.seed, node)
    draws = rng.random(count)
    levels = np.empty(count)
    x = draws[0]
    levels[0] = x
    for k in range(1, count):
        x += schedule.sigma * (2.0 * draws[k] - 1.0)
        # reflect into [0, 1]
        while x < 0.0 or x > 1.0:
            x = -x if x < 0.0 else 2.0 - x
        levels[k] = x
    return levels


def _cumulative(kind: int, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    cum = np.zeros(len(t))
    for i in range(1, len(t)):
        dtau = t[i] - t[i - 1]
        if kind == TABLE_LINEAR:
            slope = (v[i] - v[i - 1]) / dtau
            cum[i] = cum[i - 1] + dtau * (v[i - 1] + 0.5 * slope * dtau)
        else:
            cum[i] = cum[i - 1] + dtau * v[i - 1]
    return cum


def compile_schedule(schedule: DriftSchedule, node: int, rho: float, horizon: float) -> RateTable:
    """Rate table for ``node`` valid on ``[0, horizon]`` (and held constant beyond)."""
    s = schedule
    if s.kind == "constant":
        level = s.level if s.level is not None else float(_rng(s.seed, node).random())
        t = np.array([0.0])
        v = np.array([1.0 + level * rho])
        return RateTable(TABLE_STEP, t, v, np.zeros(1))
    if s.kind == "piecewise-constant":
        t = np.array(s.times)
        v = 1.0 + np.array(s.levels) * rho
        return RateTable(TABLE_STEP, t, v, _cumulative(TABLE_STEP, t, v))
    if s.kind == "seeded-random-walk":
        count = int(math.ceil(max(horizon, 0.0) / s.step)) + 2
        t = np.arange(count) * s.step
        v = 1.0 + _walk_levels(s, node, count) * rho
        return RateTable(TABLE_LINEAR, t, v, _cumulative(TABLE_LINEAR, t, v))
    phase = s.phase if s.phase is not None else float(2 * math.pi * _rng(s.seed, node).random())
    return RateTable(
        TABLE_SINE, np.zeros(1), np.ones(1), np.zeros(1),
        amp=rho, omega=2 * math.pi / s.period, phase=phase,
    )


def table_rate(tab: RateTable, t: float) -> float:
    if tab.kind == TABLE_SINE:
        return 1.0 + 0.5 * tab.amp * (1.0 + math.sin(tab.omega * t + tab.phase))
    i = int(np.searchsorted(tab.t, t, side="right")) - 1
    i = max(i, 0)
    if tab.kind == TABLE_LINEAR and i + 1 < len(tab.t):
        frac = (t - tab.t[i]) / (tab.t[i + 1] - tab.t[i])
        return float(tab.v[i] + frac * (tab.v[i + 1] - tab.v[i]))
    return float(tab.v[i])


def table_integral(tab: RateTable, t: float) -> float:
    """``integral_0^t rate``; same arithmetic as the kernels."""
    if tab.kind == TABLE_SINE:
        return t * (1.0 + 0.5 * tab.amp) + (0.5 * tab.amp / tab.omega) * (
            math.cos(tab.phase) - math.cos(tab.omega * t + tab.phase)
        )
    i = max(int(np.searchsorted(tab.t, t, side="right")) - 1, 0)
    dtau = t - tab.t[i]
    if tab.kind == TABLE_LINEAR and i + 1 < len(tab.t):
        slope = (tab.v[i + 1] - tab.v[i]) / (tab.t[i + 1] - tab.t[i])
        return float(tab.cum[i] + dtau * (tab.v[i] + 0.5 * slope * dtau))
    return float(tab.cum[i] + dtau * tab.v[i])


def hardware_rate(v: int, t: float, schedule: DriftSchedule, rho: float) -> float:
    """Instantaneous rate of node ``v``'s hardware clock at time ``t``; always in ``[1, 1+rho]``."""
    if t < 0:
        raise InvalidArgument(f"time must be non-negative (t={t})")
    tab = compile_schedule(schedule, v, rho, t + schedule.step)
    return min(max(table_rate(tab, t), 1.0), 1.0 + rho)


def hardware_elapsed(v: int, t0: float, t1: float, schedule: DriftSchedule, rho: float) -> float:
    """``H_v(t1) - H_v(t0)``."""
    tab = compile_schedule(schedule, v, rho, t1 + schedule.step)
    return table_integral(tab, t1) - table_integral(tab, t0)
