"""Single-node clock state and the logical-rate rule.

The logical multiplier is derived from the mode signal seen over the last
``T_osc``: ``1 + mu`` if it was constantly 1, ``1`` if constantly 0, and a
configurable transient value otherwise (the oscillator is retuning).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

from gcsim.drift import DriftSchedule, compile_schedule, table_integral
from gcsim.params import InvalidArgument, ParamSet
from gcsim.tdc import Trit

POLICIES = ("linear", "adversarial")


class Mode(IntEnum):
    SLOW = 0
    TRANSITIONING = 1
    FAST = 2

    def __str__(self):
        return self.name.lower()


def window_length(params: ParamSet, dt: float) -> int:
    """Number of integration steps covering the retuning window (at least one)."""
    return max(int(round(params.t_osc / dt)), 1)


def window_multiplier(
    total: int, ones: int, zeros: int, size: int, mu: float,
    policy: str = "linear", lead: float = 0.0, lag: float = 0.0,
) -> tuple[float, Mode]:
    """Multiplier for a window of ``size`` trits summing to ``total`` (0/1/2 encoding).

    ``lead``/``lag`` are the node's largest lead over and lag behind a
    neighbor; only the adversarial policy looks at them, choosing the rate
    extreme that widens the larger of the two.
    """
    if ones == size:
        return 1.0 + mu, Mode.FAST
    if zeros == size:
        return 1.0, Mode.SLOW
    if policy == "linear":
        return 1.0 + mu * total / (2.0 * size), Mode.TRANSITIONING
    if policy == "adversarial":
        return (1.0 + mu if lead >= lag else 1.0), Mode.TRANSITIONING
    raise InvalidArgument(f"unknown transient policy {policy!r}; expected one of {POLICIES}")


@dataclass(frozen=True)
class ClockState:
    time: float
    hardware_time: float
    logical_time: float
    effective_mode: Mode = Mode.SLOW
    history: tuple[int, ...] = ()

    @classmethod
    def initial(cls, offset: float, params: ParamSet, dt: float) -> ClockState:
        """State at ``t = 0`` with ``H = L = offset`` and a slow signal history."""
        return cls(0.0, offset, offset, Mode.SLOW, (int(Trit.ZERO),) * window_length(params, dt))


def advance(
    state: ClockState,
    dt: float,
    mode_signal: Trit | int,
    schedule: DriftSchedule,
    params: ParamSet,
    node: int = 0,
    policy: str = "linear",
    lead: float = 0.0,
    lag: float = 0.0,
) -> ClockState:
    """Apply ``mode_signal`` at ``state.time`` and integrate both clocks over ``dt``."""
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive (dt={dt})")
    size = window_length(params, dt)
    history = (tuple(state.history) + (int(mode_signal),))[-size:]
    if len(history) < size:
        history = (int(Trit.ZERO),) * (size - len(history)) + history
    total = sum(history)
    ones = history.count(int(Trit.ONE))
    zeros = history.count(int(Trit.ZERO))
    mult, mode = window_multiplier(total, ones, zeros, size, params.mu, policy, lead, lag)

    t0, t1 = state.time, state.time + dt
    tab = compile_schedule(schedule, node, params.rho, t1 + schedule.step)
    dh = table_integral(tab, t1) - table_integral(tab, t0)
    return replace(
        state,
        time=t1,
        hardware_time=state.hardware_time + dh,
        logical_time=state.logical_time + mult * dh,
        effective_mode=mode,
        history=history,
    )
