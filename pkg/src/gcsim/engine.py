"""Scenario definition, kernel dispatch and batch runs.

The compiled kernel (``gcsim._kernel``) is used when it was built; otherwise
the pure-Python kernel is selected at import. ``GCSIM_BACKEND=python``
forces the fallback.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from gcsim import _pykernel
from gcsim.clock import POLICIES, window_length
from gcsim.drift import DriftSchedule, compile_schedule
from gcsim.params import InvalidArgument, ParamSet, validate
from gcsim.tdc import measurement_latency
from gcsim.topology import Topology
from gcsim.trace import SkewTrace

CONTROLLERS = ("idealized", "hardware", "continuous")
_CONTROLLER_CODE = {"idealized": 0, "hardware": 1, "continuous": 2}
_POLICY_CODE = {"linear": 0, "adversarial": 1}
# slack on the initial-skew precondition
_OFFSET_SLACK = 1e-9


def _load_backend(name: str | None = None):
    name = (name or os.environ.get("GCSIM_BACKEND", "auto")).lower()
    if name == "python":
        return _pykernel
    if name not in ("auto", "cython"):
        raise InvalidArgument(f"unknown backend {name!r}; expected auto, cython or python")
    try:
        from gcsim import _kernel
    except ImportError:
        if name == "cython":
            raise
        return _pykernel
    return _kernel


BACKEND = _load_backend()


def backend_name(mod=None) -> str:
    return "python" if (mod or BACKEND) is _pykernel else "cython"


class ScenarioError(InvalidArgument):
    """A scenario that fails validation; ``problems`` lists every violation."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one run.

    ``drift`` holds one schedule per node; a schedule whose ``seed`` is
    ``None`` takes the scenario seed. ``duration=None`` selects the default
    convergence horizon (see :func:`default_duration`). ``stride`` is the
    trace sampling interval in integration steps. ``measurement_latency``
    overrides the edge-to-controller pipeline delay.
    """

    params: ParamSet
    topology: Topology
    initial_offsets: tuple[float, ...]
    drift: tuple[DriftSchedule, ...] = ()
    controller: str = "hardware"
    policy: str = "linear"
    duration: float | None = None
    dt: float = 1.0
    seed: int = 0
    stride: int | None = None
    jitter: bool = False
    measurement_latency: float | None = None
    record_codes: bool = False
    name: str = ""

    def __post_init__(self):
        n = self.topology.n
        offsets = tuple(float(x) for x in self.initial_offsets)
        object.__setattr__(self, "initial_offsets", offsets)
        drift = self.drift
        if isinstance(drift, DriftSchedule):
            drift = (drift,) * n
        elif len(drift) == 0:
            drift = (DriftSchedule(),) * n
        elif len(drift) == 1:
            drift = tuple(drift) * n
        object.__setattr__(self, "drift", tuple(drift))
        if self.params.ell is None:
            object.__setattr__(self, "params", self.params.resolved(self.topology))
        if self.duration is None:
            object.__setattr__(self, "duration", default_duration(self.params, self.topology, offsets))
        if self.stride is None:
            object.__setattr__(self, "stride", max(int(round(self.params.period / 5 / self.dt)), 1) if self.dt > 0 else 1)

    def problems(self) -> list[str]:
        out = validate(self.params, self.topology)
        n = self.topology.n
        if len(self.initial_offsets) != n:
            out.append(f"expected {n} initial offsets, got {len(self.initial_offsets)}")
        elif self.topology.edges:
            skew = initial_local_skew(self.topology, self.initial_offsets)
            if skew > self.params.init_skew_bound + _OFFSET_SLACK:
                out.append(
                    f"initial local skew {skew} exceeds init_skew_bound {self.params.init_skew_bound}"
                )
        if len(self.drift) != n:
            out.append(f"expected {n} drift schedules, got {len(self.drift)}")
        if self.controller not in CONTROLLERS:
            out.append(f"unknown controller {self.controller!r}; expected one of {CONTROLLERS}")
        if self.policy not in POLICIES:
            out.append(f"unknown transient policy {self.policy!r}; expected one of {POLICIES}")
        if not (self.duration is not None and self.duration > 0):
            out.append(f"duration > 0 violated (duration={self.duration})")
        if not self.dt > 0:
            out.append(f"dt > 0 violated (dt={self.dt})")
        if not (isinstance(self.stride, int) and self.stride >= 1):
            out.append(f"stride >= 1 violated (stride={self.stride})")
        if self.measurement_latency is not None and not self.measurement_latency >= 0:
            out.append(f"measurement_latency >= 0 violated ({self.measurement_latency})")
        return out

    def to_dict(self) -> dict:
        drift = [d.to_dict() for d in self.drift]
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "topology": self.topology.to_dict(),
            "initial_offsets": list(self.initial_offsets),
            "drift": drift[0] if all(d == self.drift[0] for d in self.drift) else drift,
            "controller": self.controller,
            "policy": self.policy,
            "duration": self.duration,
            "dt": self.dt,
            "seed": self.seed,
            "stride": self.stride,
            "jitter": self.jitter,
            "measurement_latency": self.measurement_latency,
            "record_codes": self.record_codes,
        }

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **changes) -> Scenario:
        """Copy with fields replaced; ``stride`` is recomputed when ``dt`` changes."""
        if "dt" in changes and "stride" not in changes:
            changes["stride"] = None
        return replace(self, **changes)


def initial_local_skew(topo: Topology, offsets) -> float:
    if not topo.edges:
        return 0.0
    e = np.asarray(topo.edges)
    off = np.asarray(offsets, dtype=float)
    return float(np.abs(off[e[:, 0]] - off[e[:, 1]]).max())


def default_duration(params: ParamSet, topo: Topology, offsets) -> float:
    """Twice the stabilization time scale ``4(G(0) + kappa D)/mu``."""
    off = np.asarray(offsets, dtype=float)
    g0 = float(off.max() - off.min()) if off.size else 0.0
    return 2 * 4 * (g0 + params.kappa * topo.diameter) / params.mu


def _rate_tables(scenario: Scenario, horizon: float):
    p = scenario.params
    kinds, offs, kt, kv, kc = [], [0], [], [], []
    amp, omega, phase = [], [], []
    for v, sched in enumerate(scenario.drift):
        if sched.seed is None:
            sched = replace(sched, seed=scenario.seed)
        tab = compile_schedule(sched, v, p.rho, horizon)
        kinds.append(tab.kind)
        kt.extend(tab.t.tolist())
        kv.extend(tab.v.tolist())
        kc.extend(tab.cum.tolist())
        offs.append(len(kt))
        amp.append(tab.amp)
        omega.append(tab.omega)
        phase.append(tab.phase)
    return (
        np.asarray(kinds, dtype=np.int64), np.asarray(offs, dtype=np.int64),
        np.asarray(kt), np.asarray(kv), np.asarray(kc),
        np.asarray(amp), np.asarray(omega), np.asarray(phase),
    )


def error_amplitude(scenario: Scenario) -> float:
    """Bound on per-threshold (hardware) or per-estimate errors.

    The hardware thresholds carry the setup/hold window on top of the error,
    so their draws are limited to ``delta0 - epsilon``.
    """
    p = scenario.params
    if scenario.controller == "hardware":
        return max(p.delta0 - p.epsilon, 0.0)
    return p.delta0


def static_errors(scenario: Scenario, n_channels: int) -> np.ndarray:
    p = scenario.params
    width = 2 * (p.ell + 1) if scenario.controller == "hardware" else 1
    amp = error_amplitude(scenario)
    rng = np.random.default_rng([int(scenario.seed) & 0xFFFFFFFF, 0x7D6])
    return rng.uniform(-amp, amp, size=(n_channels, width))


def run(scenario: Scenario, backend=None) -> SkewTrace:
    """Simulate ``scenario``; raises :class:`ScenarioError` if it is invalid."""
    problems = scenario.problems()
    if problems:
        raise ScenarioError(problems)
    kernel = BACKEND if backend is None else (_load_backend(backend) if isinstance(backend, str) else backend)
    p = scenario.params
    topo = scenario.topology
    dt = float(scenario.dt)
    n_steps = int(round(scenario.duration / dt))
    if n_steps < 1:
        raise ScenarioError([f"duration {scenario.duration} shorter than one step {dt}"])
    ptr, idx = topo.csr()
    tables = _rate_tables(scenario, n_steps * dt + dt)
    errors = static_errors(scenario, len(idx))
    lat = measurement_latency(p) if scenario.measurement_latency is None else scenario.measurement_latency

    times, L, H, sig, eff, events, codes = kernel.simulate(
        topo.n, ptr, idx, np.asarray(scenario.initial_offsets, dtype=float),
        *tables,
        p.mu, p.kappa, p.delta, p.epsilon, p.period, int(p.ell), lat + p.t_cnt,
        _CONTROLLER_CODE[scenario.controller], _POLICY_CODE[scenario.policy],
        window_length(p, dt), dt, n_steps, int(scenario.stride),
        errors, int(bool(scenario.jitter)), error_amplitude(scenario),
        int(scenario.seed) & 0xFFFFFFFFFFFFFFFF, int(bool(scenario.record_codes)),
    )
    return SkewTrace(
        times=times, L=L, H=H, signal=sig, effective=eff,
        topology=topo, params=p, dt=dt,
        events=tuple(events), codes=tuple(codes),
        meta={"scenario": scenario.to_dict(), "scenario_hash": scenario.digest(), "backend": backend_name(kernel)},
    )


def _run_summary(scenario: Scenario):
    from gcsim.summary import failed_summary, summarize

    try:
        return summarize(scenario, run(scenario))
    except Exception as exc:  # noqa: BLE001 - reported per scenario
        return failed_summary(scenario, exc)


def sweep(scenarios, workers: int = 1) -> list:
    """Run every scenario and summarize it; failures become error summaries.

    With ``workers > 1`` runs are distributed over processes; the output
    order always matches the input order.
    """
    scenarios = list(scenarios)
    if not scenarios:
        return []
    if workers <= 1 or len(scenarios) == 1:
        return [_run_summary(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=min(workers, len(scenarios))) as pool:
        return list(pool.map(_run_summary, scenarios))
