"""Per-run summaries: skew statistics, bound compliance and monitor verdicts."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from gcsim.analysis import Verdict, convergence_time, monitor_suite, step_tolerance
from gcsim.bounds import bound_with_initial_skew, convergence_schedule, initial_level, skew_bounds
from gcsim.trace import SkewTrace

# terminal window used for the "final" local skew (ps), capped at a fifth of the run
FINAL_WINDOW = 200_000.0
# the all-pairs catch-up monitor is skipped above this node count
CATCH_UP_MAX_NODES = 64


@dataclass
class RunSummary:
    scenario_hash: str
    name: str = ""
    duration: float = 0.0
    max_local_skew: float = math.nan
    max_global_skew: float = math.nan
    final_local_skew: float = math.nan
    convergence_time: float | None = None
    converged: bool | None = None
    bounds: dict = field(default_factory=dict)
    compliance: dict = field(default_factory=dict)
    monitors: dict = field(default_factory=dict)
    metastable_events: int = 0
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        return all(self.compliance.values()) and all(m["passed"] for m in self.monitors.values())

    def failures(self) -> list[str]:
        out = [f"bound {k}" for k, ok in self.compliance.items() if not ok]
        out += [f"monitor {k}" for k, m in self.monitors.items() if not m["passed"]]
        if self.error is not None:
            out.append(f"error {self.error}")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunSummary:
        data = dict(data)
        data.pop("passed", None)
        return cls(**data)


def final_window(duration: float) -> float:
    return min(FINAL_WINDOW, duration / 5)


def summarize(scenario, trace: SkewTrace, monitors: bool = True) -> RunSummary:
    """Derive the summary from the trace and the closed-form bounds only."""
    p = trace.params
    topo = trace.topology
    local = trace.local_skew_series
    glob = trace.global_skew_series
    tol = step_tolerance(trace)
    t_end = float(trace.times[-1])
    final = float(local[trace.times >= t_end - final_window(t_end - trace.times[0])].max())

    bounds: dict = {}
    compliance: dict = {}
    conv = converged = None
    if topo.diameter >= 1 and p.mu > 2 * p.rho:
        g_steady, l_steady = skew_bounds(p, topo.diameter)
        s0 = initial_level(p, p.init_skew_bound)
        g_all, l_all = bound_with_initial_skew(p, topo.diameter, s0)
        r = p.rho / p.mu
        stable = (convergence_schedule(p, topo.diameter, float(glob[0])).stable_time
                  if r * (1 + r) <= 0.75 else math.inf)
        bounds = {
            "global_steady": g_steady, "local_steady": l_steady,
            "initial_level": s0, "global_all_times": g_all, "local_all_times": l_all,
            "stable_time": stable,
        }
        compliance = {
            "global_all_times": bool(glob.max() <= g_all + tol),
            "local_all_times": bool(local.max() <= l_all + tol),
        }
        # the steady-state bounds are guaranteed only once the stabilization time has passed
        after = trace.times >= stable
        if after.any():
            compliance["global_steady"] = bool(glob[after].max() <= g_steady + tol)
            compliance["local_steady"] = bool(local[after].max() <= l_steady + tol)
        conv = convergence_time(trace, l_steady)
        converged = bool(final <= l_steady + tol)

    verdicts: dict[str, Verdict] = {}
    if monitors and len(trace.times) >= 2:
        verdicts = monitor_suite(trace, catch_up=topo.n <= CATCH_UP_MAX_NODES)
    return RunSummary(
        scenario_hash=trace.meta.get("scenario_hash") or scenario.digest(),
        name=getattr(scenario, "name", ""),
        duration=float(scenario.duration),
        max_local_skew=float(np.max(local)),
        max_global_skew=float(np.max(glob)),
        final_local_skew=final,
        convergence_time=conv,
        converged=converged,
        bounds=bounds,
        compliance=compliance,
        monitors={k: v.to_dict() for k, v in verdicts.items()},
        metastable_events=trace.metastable_count(),
    )


def failed_summary(scenario, exc: Exception) -> RunSummary:
    try:
        digest = scenario.digest()
    except Exception:  # noqa: BLE001 - the scenario itself may be malformed
        digest = ""
    return RunSummary(
        scenario_hash=digest,
        name=getattr(scenario, "name", ""),
        duration=float(getattr(scenario, "duration", 0.0) or 0.0),
        error=f"{type(exc).__name__}: {exc}",
    )
