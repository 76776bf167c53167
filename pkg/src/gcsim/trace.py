"""Recorded simulation output."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from gcsim.params import InvalidArgument, ParamSet
from gcsim.topology import Topology


@dataclass(frozen=True, eq=False)
class SkewTrace:
    """Sampled per-node clocks of one run.

    ``signal`` holds the controller output (0, 1 = M, 2 = fast) and
    ``effective`` the oscillator mode (0 slow, 1 transitioning, 2 fast), both
    as int8 arrays shaped like ``L``. ``events`` lists ``(t, node, signal)``
    for every change of a node's mode signal. ``dt`` is the integration step
    the trace was produced with.
    """

    times: np.ndarray
    L: np.ndarray
    H: np.ndarray
    signal: np.ndarray
    effective: np.ndarray
    topology: Topology
    params: ParamSet
    dt: float
    events: tuple[tuple[float, int, int], ...] = ()
    codes: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n_t = len(self.times)
        for name in ("L", "H", "signal", "effective"):
            arr = getattr(self, name)
            if arr.shape != (n_t, self.topology.n):
                raise InvalidArgument(f"trace field {name} has shape {arr.shape}, expected {(n_t, self.topology.n)}")
        if n_t > 1 and not np.all(np.diff(self.times) > 0):
            raise InvalidArgument("trace sample times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.topology.n

    @cached_property
    def _edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.asarray(self.topology.edges, dtype=np.int64).reshape(-1, 2)
        return e[:, 0], e[:, 1]

    @cached_property
    def local_skew_series(self) -> np.ndarray:
        u, v = self._edge_arrays
        if len(u) == 0:
            return np.zeros(len(self.times))
        return np.abs(self.L[:, u] - self.L[:, v]).max(axis=1)

    @cached_property
    def global_skew_series(self) -> np.ndarray:
        return self.L.max(axis=1) - self.L.min(axis=1)

    def clocks_at(self, t: float) -> np.ndarray:
        """Logical clocks at time ``t``, linearly interpolated between samples."""
        times = self.times
        if not times[0] <= t <= times[-1]:
            raise InvalidArgument(f"t={t} outside trace [{times[0]}, {times[-1]}]")
        j = int(np.searchsorted(times, t, side="right")) - 1
        if j >= len(times) - 1:
            return self.L[-1].copy()
        a = (t - times[j]) / (times[j + 1] - times[j])
        return self.L[j] + a * (self.L[j + 1] - self.L[j])

    def metastable_count(self) -> int:
        return sum(1 for _, _, s in self.events if s == 1)

    def window(self, t0: float, t1: float) -> np.ndarray:
        """Boolean mask of samples with ``t0 <= t <= t1``."""
        return (self.times >= t0) & (self.times <= t1)
