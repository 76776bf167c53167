"""Algorithm and hardware parameters.

All times are picoseconds, all rates dimensionless. ``ParamSet`` fills in the
derived fields (``t_max``, ``delta``) when they are not given; when they are
given explicitly they are kept as-is so that :func:`validate` can report a
mismatch instead of silently correcting it.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from gcsim.topology import Topology

# relative slack when comparing derived fields against their formula
_REL_TOL = 1e-12


class InvalidArgument(ValueError):
    """Raised for arguments outside an operation's domain."""


def delay_uncertainty(delta0: float, rho: float, mu: float, t_max: float) -> float:
    """Total offset-estimate uncertainty from propagation uncertainty and staleness."""
    return delta0 + (rho + mu + rho * mu) * t_max


@dataclass(frozen=True)
class ParamSet:
    rho: float = 1e-5
    mu: float = 1e-4
    kappa: float = 10.0
    delta0: float = 4.0
    epsilon: float = 1.0
    t_meas: float = 500.0
    t_cnt: float = 25.0
    t_osc: float = 250.0
    period: float = 500.0
    init_skew_bound: float | None = None
    t_max: float | None = None
    delta: float | None = None
    ell: int | None = None

    def __post_init__(self):
        if self.t_max is None:
            object.__setattr__(self, "t_max", self.t_meas + self.t_cnt + self.t_osc)
        if self.delta is None:
            object.__setattr__(
                self, "delta", delay_uncertainty(self.delta0, self.rho, self.mu, self.t_max)
            )
        if self.init_skew_bound is None:
            # initial local skew assumed to be at most one kappa
            object.__setattr__(self, "init_skew_bound", self.kappa)

    def default_ell(self, diameter: int) -> int:
        """Smallest level count covering the steady-state plus initial local skew."""
        from gcsim.bounds import levels_needed, skew_bounds

        d = max(int(diameter), 1)
        # the level formula is undefined for mu <= 2*rho; validate() reports that case
        local = skew_bounds(self, d)[1] if self.mu > 2 * self.rho else 3 * self.kappa
        return levels_needed(self, local + self.init_skew_bound)

    def resolved(self, topo: Topology) -> ParamSet:
        """Copy with ``ell`` filled in from the topology when it is unset."""
        if self.ell is not None:
            return self
        return replace(self, ell=self.default_ell(topo.diameter))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ParamSet:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidArgument(f"unknown parameter field(s): {', '.join(unknown)}")
        return cls(**data)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=1e-12)


def validate(params: ParamSet, topo: Topology | None = None) -> list[str]:
    """Return every violated invariant; an empty list means the set is usable.

    Derived fields are recomputed and compared against the stored values.
    Never raises and never mutates its inputs.
    """
    p = params
    problems: list[str] = []
    if not p.rho >= 0:
        problems.append(f"rho >= 0 violated (rho={p.rho})")
    if not p.mu > 0:
        problems.append(f"mu > 0 violated (mu={p.mu})")
    if not p.kappa > 0:
        problems.append(f"kappa > 0 violated (kappa={p.kappa})")
    if not p.delta0 >= 0:
        problems.append(f"delta0 >= 0 violated (delta0={p.delta0})")
    if not p.epsilon >= 0:
        problems.append(f"epsilon >= 0 violated (epsilon={p.epsilon})")
    for name in ("t_meas", "t_cnt", "t_osc"):
        if not getattr(p, name) >= 0:
            problems.append(f"{name} >= 0 violated ({name}={getattr(p, name)})")
    if not p.period > 0:
        problems.append(f"period > 0 violated (period={p.period})")
    if not p.init_skew_bound >= 0:
        problems.append(f"init_skew_bound >= 0 violated (init_skew_bound={p.init_skew_bound})")

    if not p.mu > 2 * p.rho:
        problems.append(f"mu > 2*rho violated (mu={p.mu}, rho={p.rho})")
    if not p.kappa > 2 * p.delta:
        problems.append(f"kappa > 2*delta violated (kappa={p.kappa}, delta={p.delta})")
    if not p.epsilon < 2 * p.kappa:
        problems.append(f"epsilon < 2*kappa violated (epsilon={p.epsilon}, kappa={p.kappa})")
    if not p.epsilon <= p.delta0:
        problems.append(f"epsilon <= delta0 violated (epsilon={p.epsilon}, delta0={p.delta0})")

    t_max = p.t_meas + p.t_cnt + p.t_osc
    if not _close(p.t_max, t_max):
        problems.append(f"t_max = t_meas + t_cnt + t_osc violated (stored {p.t_max}, expected {t_max})")
    delta = delay_uncertainty(p.delta0, p.rho, p.mu, t_max)
    if not _close(p.delta, delta):
        problems.append(
            f"delta = delta0 + (rho + mu + rho*mu)*t_max violated (stored {p.delta}, expected {delta})"
        )

    if p.ell is not None:
        if p.ell < 0 or int(p.ell) != p.ell:
            problems.append(f"ell must be a natural number (ell={p.ell})")
        elif topo is not None and p.kappa > 0 and p.mu > 2 * p.rho:
            need = p.default_ell(topo.diameter)
            if p.ell < need:
                problems.append(f"ell >= {need} violated (ell={p.ell}); levels may only be raised")

    if topo is not None:
        problems.extend(topo.problems())
    return problems
