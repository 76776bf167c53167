"""Thermometer-code offset measurement over three-valued logic.

A code has ``2(ell+1)`` trits ordered ``Q^{ell+1} .. Q^{1} Q^{-1} .. Q^{-(ell+1)}``,
which puts the thresholds in increasing order from left to right:
``Q^{+i}`` fires at ``-(2i-1)*kappa - delta`` and ``Q^{-i}`` at
``(2i-1)*kappa - delta``. A trit reads 1 when the perturbed offset clears its
threshold by the setup/hold window ``epsilon``, 0 when it does not reach the
threshold, and M in between.

Trits are encoded as ``0 < M < 1`` = ``0 < 1 < 2`` so Kleene AND/OR are
plain ``min``/``max``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from gcsim.params import InvalidArgument, ParamSet

_CODE_RE = re.compile(r"^1*M?0*$")
# tolerance when checking error draws against delta0
_ERR_SLACK = 1e-9


class Trit(IntEnum):
    ZERO = 0
    M = 1
    ONE = 2

    def __str__(self):
        return "0M1"[self.value]

    @classmethod
    def parse(cls, ch: str) -> Trit:
        try:
            return cls("0M1".index(ch))
        except ValueError:
            raise InvalidArgument(f"not a trit: {ch!r}") from None


def trit_and(a: int, b: int) -> Trit:
    return Trit(min(a, b))


def trit_or(a: int, b: int) -> Trit:
    return Trit(max(a, b))


@dataclass(frozen=True)
class ThermometerCode:
    trits: tuple[Trit, ...]

    def __post_init__(self):
        if len(self.trits) < 2 or len(self.trits) % 2:
            raise InvalidArgument(f"code length must be even and >= 2 (got {len(self.trits)})")
        object.__setattr__(self, "trits", tuple(Trit(int(x)) for x in self.trits))

    @classmethod
    def parse(cls, text: str) -> ThermometerCode:
        return cls(tuple(Trit.parse(ch) for ch in text))

    @property
    def ell(self) -> int:
        return len(self.trits) // 2 - 1

    def __str__(self):
        return "".join(str(t) for t in self.trits)

    def __len__(self):
        return len(self.trits)

    def __getitem__(self, p: int) -> Trit:
        return self.trits[p]

    def well_formed(self) -> bool:
        """True iff the word has the form ``1*M?0*``."""
        return bool(_CODE_RE.match(str(self)))

    def metastable_count(self) -> int:
        return sum(1 for t in self.trits if t == Trit.M)


def position_of(i: int, ell: int) -> int:
    """Index in the code of ``Q^{i}`` for ``i`` in ``±1..±(ell+1)``."""
    if i == 0 or abs(i) > ell + 1:
        raise InvalidArgument(f"threshold index {i} outside ±1..±{ell + 1}")
    return ell + 1 - i if i > 0 else ell - i


def thresholds(params: ParamSet, ell: int) -> np.ndarray:
    """Thresholds of every code position, increasing from left to right."""
    k, d = params.kappa, params.delta
    left = [-(2 * i - 1) * k - d for i in range(ell + 1, 0, -1)]
    right = [(2 * i - 1) * k - d for i in range(1, ell + 2)]
    return np.array(left + right)


def _resolve_ell(params: ParamSet, ell: int | None) -> int:
    ell = params.ell if ell is None else ell
    if ell is None:
        raise InvalidArgument("ell is unset; pass it explicitly or resolve the parameters first")
    return int(ell)


def _errors_array(errors, npos: int, delta0: float) -> np.ndarray:
    if errors is None:
        return np.zeros(npos)
    err = np.asarray(errors, dtype=float)
    if err.shape[-1] != npos:
        raise InvalidArgument(f"expected {npos} per-threshold errors, got {err.shape[-1]}")
    if np.any(np.abs(err) > delta0 + _ERR_SLACK):
        raise InvalidArgument(f"per-threshold errors must lie within ±delta0 = ±{delta0}")
    return err


def encode_trits(offsets, params: ParamSet, errors=None, ell: int | None = None) -> np.ndarray:
    """Vectorized encoder: trit matrix of shape ``offsets.shape + (2(ell+1),)``.

    ``errors`` broadcasts against the output (one row per threshold, or one
    row per offset).
    """
    ell = _resolve_ell(params, ell)
    thr = thresholds(params, ell)
    err = _errors_array(errors, len(thr), params.delta0)
    x = np.asarray(offsets, dtype=float)[..., None] + err
    out = np.full(x.shape, int(Trit.M), dtype=np.int8)
    out[x >= thr + params.epsilon] = int(Trit.ONE)
    out[(x <= thr) & (x < thr + params.epsilon)] = int(Trit.ZERO)
    return out


def encode_offset(true_offset: float, params: ParamSet, errors=None, ell: int | None = None) -> ThermometerCode:
    """Quantize ``L_w - L_v`` into a thermometer code under per-threshold errors."""
    return ThermometerCode(tuple(encode_trits(float(true_offset), params, errors, ell).tolist()))


def combine_min_max(codes) -> tuple[ThermometerCode, ThermometerCode]:
    """Tritwise AND (min) and OR (max) over the neighbors' codes."""
    codes = list(codes)
    if not codes:
        raise InvalidArgument("combine_min_max needs at least one code")
    n = len(codes[0])
    if any(len(c) != n for c in codes):
        raise InvalidArgument("all codes must have the same length")
    lo = tuple(min(c[p] for c in codes) for p in range(n))
    hi = tuple(max(c[p] for c in codes) for p in range(n))
    return ThermometerCode(lo), ThermometerCode(hi)


def decode_interval(code: ThermometerCode, params: ParamSet, margin: float = 0.0) -> tuple[float, float]:
    """Coarsest interval of perturbed offsets consistent with ``code``, widened by ``margin``.

    With ``margin`` set to the error bound the result contains the true
    offset. Ends are infinite when the code saturates.
    """
    thr = thresholds(params, code.ell)
    lo, hi = -math.inf, math.inf
    for p, t in enumerate(code.trits):
        if t == Trit.ONE:
            lo = max(lo, thr[p] + params.epsilon)
        elif t == Trit.ZERO:
            hi = min(hi, thr[p])
        else:
            lo = max(lo, thr[p])
            hi = min(hi, thr[p] + params.epsilon)
    return float(lo - margin), float(hi + margin)


def decode_midpoint(code: ThermometerCode, params: ParamSet) -> float:
    """Point estimate for logging: interval midpoint, or the finite end when saturated."""
    lo, hi = decode_interval(code, params)
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi
    if math.isinf(hi):
        return lo
    return 0.5 * (lo + hi)


def measurement_latency(params: ParamSet) -> float:
    """Delay from a sampling edge to the code reaching the controller.

    The measurement latency budget includes the wait for the sampling edge
    itself, which is up to one period; only the remainder is pipeline delay.
    """
    return max(params.t_meas - params.period, 0.0)


@dataclass
class MeasurementChannel:
    """Measurement of ``source`` as seen by ``sink``."""

    source: int
    sink: int
    errors: np.ndarray
    delay: float
    last_code: ThermometerCode | None = None
    sample_time: float | None = None
    history: list[tuple[float, ThermometerCode]] = field(default_factory=list)

    @classmethod
    def seeded(
        cls, source: int, sink: int, params: ParamSet, seed: int = 0,
        ell: int | None = None, delay: float | None = None,
    ) -> MeasurementChannel:
        """Channel with static per-threshold errors drawn from ``±(delta0 - epsilon)``."""
        ell = _resolve_ell(params, ell)
        amp = max(params.delta0 - params.epsilon, 0.0)
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, source, sink])
        errors = rng.uniform(-amp, amp, 2 * (ell + 1))
        return cls(source, sink, errors, measurement_latency(params) if delay is None else delay)


def sample_on_edge(
    channel: MeasurementChannel, t_edge: float, l_v: float, l_w: float, params: ParamSet
) -> tuple[float, ThermometerCode]:
    """Latch ``L_w - L_v`` at a rising edge of the sink; returns ``(delivery_time, code)``."""
    code = encode_offset(l_w - l_v, params, channel.errors, ell=len(channel.errors) // 2 - 1)
    channel.last_code = code
    channel.sample_time = t_edge
    channel.history.append((t_edge, code))
    return t_edge + channel.delay, code
