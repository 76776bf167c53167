"""Fast-trigger decision rule and the ground-truth fast/slow conditions.

The trigger works on offset estimates (real-valued, or as thermometer trits
in the hardware variant). The conditions work on true clock values and are
only used by monitors and the soundness checker.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from gcsim.params import InvalidArgument, ParamSet
from gcsim.tdc import ThermometerCode, Trit
from gcsim.topology import Topology


def _ell(params: ParamSet, ell: int | None) -> int:
    ell = params.ell if ell is None else ell
    if ell is None:
        raise InvalidArgument("ell is unset; pass it explicitly or resolve the parameters first")
    return int(ell)


def trigger_level(o_min: float, o_max: float, params: ParamSet, ell: int | None = None) -> int | None:
    """Smallest ``s <= ell`` at which both trigger inequalities hold, else ``None``."""
    k, d = params.kappa, params.delta
    for s in range(_ell(params, ell) + 1):
        if o_max >= (2 * s + 1) * k - d and o_min >= -(2 * s + 1) * k - d:
            return s
    return None


def fast_trigger(o_min: float, o_max: float, params: ParamSet, ell: int | None = None) -> bool:
    return trigger_level(o_min, o_max, params, ell) is not None


def fast_trigger_trits(min_code: ThermometerCode, max_code: ThermometerCode) -> Trit:
    """Kleene ``OR_s AND(max_code.Q^{-(s+1)}, min_code.Q^{+(s+1)})``."""
    if len(min_code) != len(max_code):
        raise InvalidArgument("min and max codes must have equal length")
    ell = min_code.ell
    out = Trit.ZERO
    for s in range(ell + 1):
        term = min(max_code[ell + 1 + s], min_code[ell - s])
        out = max(out, term)
    return Trit(out)


def fast_trigger_array(o_min: np.ndarray, o_max: np.ndarray, kappa: float, delta: float, ell: int) -> np.ndarray:
    """Vectorized :func:`fast_trigger`."""
    o_min = np.asarray(o_min, dtype=float)
    o_max = np.asarray(o_max, dtype=float)
    out = np.zeros(np.broadcast(o_min, o_max).shape, dtype=bool)
    for s in range(ell + 1):
        c = (2 * s + 1) * kappa
        out |= (o_max >= c - delta) & (o_min >= -c - delta)
    return out


def _default_s_max(offsets: np.ndarray, kappa: float) -> int:
    if offsets.size == 0:
        return 0
    return int(math.ceil(float(np.max(np.abs(offsets))) / (2 * kappa))) + 1


def fast_condition_offsets(offsets: np.ndarray, kappa: float, s_max: int | None = None) -> np.ndarray:
    """Fast condition evaluated on neighbor offsets ``L_x - L_v`` along the last axis."""
    offsets = np.asarray(offsets, dtype=float)
    s_max = _default_s_max(offsets, kappa) if s_max is None else s_max
    hi, lo = offsets.max(axis=-1), offsets.min(axis=-1)
    out = np.zeros(hi.shape, dtype=bool)
    for s in range(s_max + 1):
        c = (2 * s + 1) * kappa
        out |= (hi >= c) & (-lo <= c)
    return out


def slow_condition_offsets(offsets: np.ndarray, kappa: float, s_max: int | None = None) -> np.ndarray:
    """Slow condition evaluated on neighbor offsets ``L_x - L_v`` along the last axis."""
    offsets = np.asarray(offsets, dtype=float)
    s_max = _default_s_max(offsets, kappa) if s_max is None else s_max
    hi, lo = offsets.max(axis=-1), offsets.min(axis=-1)
    out = np.zeros(hi.shape, dtype=bool)
    for s in range(s_max + 1):
        c = 2 * s * kappa
        out |= (-lo >= c) & (hi <= c)
    return out


def _neighbor_offsets(v: int, clocks, topo: Topology) -> np.ndarray:
    nbrs = topo.adjacency[v]
    if not nbrs:
        raise InvalidArgument(f"node {v} has no neighbors")
    clocks = np.asarray(clocks, dtype=float)
    return clocks[list(nbrs)] - clocks[v]


def _s_max(s_range) -> int | None:
    if s_range is None:
        return None
    if isinstance(s_range, int):
        return s_range
    return max(s_range)


def fast_condition(v: int, clocks, topo: Topology, params: ParamSet, s_range=None) -> bool:
    """Some neighbor is ahead by ``>= (2s+1)kappa`` and none is behind by more, for some ``s``.

    ``s_range`` is an upper bound on ``s`` (int or iterable); by default every
    ``s`` that could possibly hold is tried.
    """
    off = _neighbor_offsets(v, clocks, topo)
    return bool(fast_condition_offsets(off, params.kappa, _s_max(s_range)))


def slow_condition(v: int, clocks, topo: Topology, params: ParamSet, s_range=None) -> bool:
    """Some neighbor is behind by ``>= 2s*kappa`` and none is ahead by more, for some ``s``."""
    off = _neighbor_offsets(v, clocks, topo)
    return bool(slow_condition_offsets(off, params.kappa, _s_max(s_range)))


@dataclass
class SoundnessReport:
    states: int
    evaluations: int
    fast_misses: int
    slow_misses: int
    both_conditions: int
    examples: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.fast_misses == 0 and self.slow_misses == 0 and self.both_conditions == 0


def check_trigger_soundness(
    params: ParamSet,
    ell: int | None = None,
    n_neighbors: int = 3,
    step: float | None = None,
    error_levels=None,
    max_examples: int = 10,
) -> SoundnessReport:
    """Exhaustively check that the trigger agrees with the true conditions.

    Every combination of neighbor offsets on a lattice of ``step`` (default
    ``kappa/4``) inside ``±(2ell+1)kappa`` is paired with every assignment of
    estimate errors from ``error_levels`` (default ``{-delta0, 0, +delta0}``).
    A miss is a state where the fast condition holds but the trigger does
    not, or the slow condition holds and the trigger fires.
    """
    ell = _ell(params, ell)
    k = params.kappa
    step = k / 4 if step is None else step
    if error_levels is None:
        error_levels = (-params.delta0, 0.0, params.delta0)
    span = (2 * ell + 1) * k
    count = int(math.floor(2 * span / step + 1e-9)) + 1
    lattice = -span + step * np.arange(count)

    states = np.array(list(itertools.product(lattice, repeat=n_neighbors)))
    errors = np.array(list(itertools.product(error_levels, repeat=n_neighbors)))
    fc = fast_condition_offsets(states, k)
    sc = slow_condition_offsets(states, k)

    est = states[:, None, :] + errors[None, :, :]
    ft = fast_trigger_array(est.min(axis=-1), est.max(axis=-1), k, params.delta, ell)

    fast_bad = fc[:, None] & ~ft
    slow_bad = sc[:, None] & ft
    both = fc & sc
    examples = []
    for kind, mask in (("fast", fast_bad), ("slow", slow_bad)):
        for i, j in zip(*np.nonzero(mask)):
            if len(examples) >= max_examples:
                break
            examples.append({"kind": kind, "offsets": states[i].tolist(), "errors": errors[j].tolist()})
    return SoundnessReport(
        states=len(states),
        evaluations=int(fast_bad.size),
        fast_misses=int(fast_bad.sum()),
        slow_misses=int(slow_bad.sum()),
        both_conditions=int(both.sum()),
        examples=examples,
    )
