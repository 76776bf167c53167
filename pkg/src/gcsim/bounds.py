"""Closed-form skew bounds, uncertainty budget and convergence schedule."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from gcsim.params import InvalidArgument, ParamSet, delay_uncertainty

# ceil() of a logarithm that lands on an integer up to rounding must not jump a level
_LOG_SLACK = 1e-9


def delta_from(delta0: float, rho: float, mu: float, t_max: float) -> float:
    """Offset-estimate uncertainty ``delta0 + (rho + mu + rho*mu) * t_max``."""
    if min(delta0, rho, mu, t_max) < 0:
        raise InvalidArgument("delta_from expects non-negative arguments")
    return delay_uncertainty(delta0, rho, mu, t_max)


def _ceil_log(x: float, rho: float, mu: float) -> int:
    """``ceil(log_{mu/rho} x)``; for ``rho == 0`` the limit ``rho -> 0+`` is used."""
    if x <= 0:
        raise InvalidArgument(f"logarithm of non-positive value {x}")
    if rho == 0:
        return 1 if x >= 1 else 0
    return math.ceil(math.log(x) / math.log(mu / rho) - _LOG_SLACK)


def skew_bounds(params: ParamSet, diameter: int) -> tuple[float, float]:
    """Steady-state ``(global, local)`` skew bounds for a graph of the given diameter."""
    p = params
    if not p.mu > 2 * p.rho:
        raise InvalidArgument(f"skew bounds need mu > 2*rho (mu={p.mu}, rho={p.rho})")
    if diameter < 1:
        raise InvalidArgument(f"skew bounds need diameter >= 1 (D={diameter})")
    ratio = p.mu / (p.mu - 2 * p.rho)
    global_bound = ratio * p.kappa * diameter
    local_bound = (2 * _ceil_log(ratio * diameter, p.rho, p.mu) + 1) * p.kappa
    return global_bound, local_bound


def bound_with_initial_skew(params: ParamSet, diameter: int, s0: int) -> tuple[float, float]:
    """Bounds valid at all times when the initial local skew is at most ``(2*s0 + 1)*kappa``."""
    p = params
    if not p.mu > p.rho:
        raise InvalidArgument(f"bound needs mu > rho (mu={p.mu}, rho={p.rho})")
    if diameter < 1:
        raise InvalidArgument(f"bound needs diameter >= 1 (D={diameter})")
    if s0 < 0:
        raise InvalidArgument(f"s0 must be a natural number (s0={s0})")
    ratio = p.mu / (p.mu - p.rho)
    global_bound = (2 * s0 + ratio) * p.kappa * diameter
    local_bound = (2 * s0 + _ceil_log(ratio * diameter, p.rho, p.mu) + 1) * p.kappa
    return global_bound, local_bound


def initial_level(params: ParamSet, initial_local_skew: float) -> int:
    """Smallest ``s`` with ``initial_local_skew <= (2s + 1) * kappa``."""
    x = (initial_local_skew / params.kappa - 1) / 2
    return max(0, math.ceil(x - _LOG_SLACK))


def levels_needed(params: ParamSet, local_skew_budget: float) -> int:
    """Highest threshold index needed to keep a local skew budget inside the measurement range."""
    x = (local_skew_budget / params.kappa - 1) / 2
    return max(0, math.ceil(x - _LOG_SLACK))


@dataclass(frozen=True)
class ScheduleRow:
    i: int
    time: float
    bound: float


@dataclass(frozen=True)
class ConvergenceSchedule:
    q: float
    rows: tuple[ScheduleRow, ...]
    stable_time: float
    stable_index: int


def convergence_schedule(
    params: ParamSet, diameter: int, g0: float, n_rows: int = 8
) -> ConvergenceSchedule:
    """Time-indexed global skew bounds starting from initial global skew ``g0``.

    Row ``i`` holds the time ``4(g0 + i*kappa*D)/mu`` after which the global
    skew is at most ``kappa*D/(1-q) + q**i * (1 + rho/mu) * g0``.
    ``stable_time`` is the time after which the steady-state bounds of
    :func:`skew_bounds` hold, following the stabilization construction.
    """
    p = params
    r = p.rho / p.mu
    q = r * (1 + r)
    if q > 0.75:
        raise InvalidArgument(f"convergence schedule needs q <= 3/4 (q={q})")
    kd = p.kappa * diameter
    rows = tuple(
        ScheduleRow(i, 4 * (g0 + i * kd) / p.mu, kd / (1 - q) + q**i * (1 + r) * g0)
        for i in range(n_rows)
    )

    stable_time = math.inf
    stable_index = -1
    if p.mu > 2 * p.rho:
        eps = 1 / (1 - 2 * r) - 1 / (1 - q)
        i = 0
        while q**i * (1 + r) * g0 > eps * kd and i < 100_000:
            i += 1
        stable_index = i
        stable_time = 4 * (g0 + i * kd) / p.mu + p.mu * kd / ((p.mu - p.rho) * (p.mu - 2 * p.rho))
    return ConvergenceSchedule(q=q, rows=rows, stable_time=stable_time, stable_index=stable_index)


def psi_schedule(params: ParamSet, diameter: int, s0: int = 0) -> list[tuple[int, float]]:
    """Per-level potential bounds ``(s, psi^s)`` from level ``s0`` down to the first bound <= kappa."""
    p = params
    psi = p.mu / (p.mu - p.rho) * p.kappa * diameter
    out = [(s0, psi)]
    s = s0
    while psi > p.kappa and p.rho > 0 and s < s0 + 64:
        s += 1
        psi *= p.rho / p.mu
        out.append((s, psi))
    return out


@dataclass(frozen=True)
class BoundReport:
    diameter: int
    delta: float
    kappa_min: float
    global_bound: float
    local_bound: float
    levels_needed: int
    q: float
    sigma: float
    convergence_time: float
    initial_level: int
    global_bound_all_times: float
    local_bound_all_times: float
    psi_schedule: tuple[tuple[int, float], ...] = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["psi_schedule"] = [list(x) for x in self.psi_schedule]
        return d


def bound_report(params: ParamSet, diameter: int, g0: float | None = None) -> BoundReport:
    """Collect every closed-form bound for one parameter set and diameter.

    ``g0`` defaults to the worst initial global skew allowed by the initial
    local skew bound, ``init_skew_bound * D``.
    """
    p = params
    glob, loc = skew_bounds(p, diameter)
    s0 = initial_level(p, p.init_skew_bound)
    glob_all, loc_all = bound_with_initial_skew(p, diameter, s0)
    if g0 is None:
        g0 = p.init_skew_bound * diameter
    r = p.rho / p.mu
    q = r * (1 + r)
    conv = convergence_schedule(p, diameter, g0).stable_time if q <= 0.75 else math.inf
    return BoundReport(
        diameter=diameter,
        delta=p.delta,
        kappa_min=2 * p.delta,
        global_bound=glob,
        local_bound=loc,
        levels_needed=levels_needed(p, loc + p.init_skew_bound),
        q=q,
        sigma=math.inf if p.rho == 0 else p.mu / p.rho,
        convergence_time=conv,
        initial_level=s0,
        global_bound_all_times=glob_all,
        local_bound_all_times=loc_all,
        psi_schedule=tuple(psi_schedule(p, diameter, s0)),
    )
