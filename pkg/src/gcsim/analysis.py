"""Skews, potential functions and trace-level monitors.

The potentials compare every pair of nodes with a distance discount:

* ``psi_v^s = max_w (L_w - L_v - 2 s kappa d(v, w))``
* ``xi_v^s = max_w (L_v - L_w - (2s + 1) kappa d(v, w))``

and ``psi^s``/``xi^s`` are their maxima over ``v``. A node ``w`` is *leading*
(resp. *trailing*) when it attains a positive ``psi_v^s`` (resp. ``xi_v^s``)
for some ``v`` and ``s``. All monitors report their tolerance explicitly.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import asdict, dataclass, field

import numpy as np

from gcsim.params import InvalidArgument
from gcsim.trace import SkewTrace

# cap on the number of violations stored in a verdict
MAX_LISTED = 20
# working-set size (samples * n * n) for vectorized potential evaluation
_CHUNK_CELLS = 4_000_000
# psi^s series already computed, per trace
_PSI_CACHE: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


@dataclass
class Verdict:
    name: str
    passed: bool
    tolerance: float
    checked: int
    violations: list[dict] = field(default_factory=list)
    n_violations: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> Verdict:
        return cls(**data)


def _verdict(name: str, tol: float, checked: int, violations: list[dict], note: str = "") -> Verdict:
    return Verdict(name, not violations, tol, checked, violations[:MAX_LISTED], len(violations), note)


def step_tolerance(trace: SkewTrace) -> float:
    """One-step discretization slack ``2(1+mu)(1+rho)dt``."""
    p = trace.params
    return 2 * (1 + p.mu) * (1 + p.rho) * trace.dt


def _float_slack(trace: SkewTrace) -> float:
    scale = max(1.0, float(np.max(np.abs(trace.L))) if trace.L.size else 1.0)
    return 64 * np.finfo(float).eps * scale


# ----------------------------------------------------------------------------- skews

def local_skew(trace: SkewTrace, t: float) -> float:
    """Largest clock difference across an edge at time ``t``."""
    clocks = trace.clocks_at(t)
    if not trace.topology.edges:
        return 0.0
    e = np.asarray(trace.topology.edges)
    return float(np.abs(clocks[e[:, 0]] - clocks[e[:, 1]]).max())


def global_skew(trace: SkewTrace, t: float) -> float:
    """Largest clock difference over all node pairs at time ``t``."""
    clocks = trace.clocks_at(t)
    return float(clocks.max() - clocks.min())


def convergence_time(trace: SkewTrace, target_local: float) -> float | None:
    """First sample time after which the local skew stays ``<= target_local``."""
    above = np.nonzero(trace.local_skew_series > target_local)[0]
    if len(above) == 0:
        return float(trace.times[0])
    last = above[-1]
    if last == len(trace.times) - 1:
        return None
    return float(trace.times[last + 1])


# ----------------------------------------------------------------------------- potentials

@dataclass(frozen=True)
class PotentialSample:
    t: float
    s: int
    psi: float
    xi: float
    psi_witness: tuple[int, int]
    xi_witness: tuple[int, int]
    leading: frozenset[int]
    trailing: frozenset[int]


def _psi_matrix(clocks: np.ndarray, dist: np.ndarray, s: int, kappa: float) -> np.ndarray:
    """``[..., v, w] -> L_w - L_v - 2 s kappa d(v, w)``."""
    return clocks[..., None, :] - clocks[..., :, None] - 2 * s * kappa * dist


def _xi_matrix(clocks: np.ndarray, dist: np.ndarray, s: int, kappa: float) -> np.ndarray:
    """``[..., v, w] -> L_v - L_w - (2s+1) kappa d(v, w)``."""
    return clocks[..., :, None] - clocks[..., None, :] - (2 * s + 1) * kappa * dist


def psi(trace: SkewTrace, t: float, v: int, s: int) -> float:
    return float(_psi_matrix(trace.clocks_at(t), trace.topology.dist, s, trace.params.kappa)[v].max())


def xi(trace: SkewTrace, t: float, v: int, s: int) -> float:
    return float(_xi_matrix(trace.clocks_at(t), trace.topology.dist, s, trace.params.kappa)[v].max())


def _attainers(mat: np.ndarray) -> frozenset[int]:
    best = mat.max(axis=1)
    hit = (mat == best[:, None]) & (best[:, None] > 0)
    return frozenset(int(w) for w in np.nonzero(hit.any(axis=0))[0])


def potential_sample(trace: SkewTrace, t: float, s: int) -> PotentialSample:
    """Both potentials at ``t`` with their witnesses and the leading/trailing sets for level ``s``."""
    clocks = trace.clocks_at(t)
    dist, k = trace.topology.dist, trace.params.kappa
    pm = _psi_matrix(clocks, dist, s, k)
    xm = _xi_matrix(clocks, dist, s, k)
    pv, pw = np.unravel_index(int(np.argmax(pm)), pm.shape)
    xv, xw = np.unravel_index(int(np.argmax(xm)), xm.shape)
    return PotentialSample(
        t=t, s=s, psi=float(pm.max()), xi=float(xm.max()),
        psi_witness=(int(pv), int(pw)), xi_witness=(int(xv), int(xw)),
        leading=_attainers(pm), trailing=_attainers(xm),
    )


def _chunked(trace: SkewTrace):
    n = trace.n
    step = max(1, _CHUNK_CELLS // max(n * n, 1))
    for i in range(0, len(trace.times), step):
        yield i, trace.L[i:i + step]


def psi_series(trace: SkewTrace, s: int) -> np.ndarray:
    """``psi^s`` at every sample (read-only, cached per trace)."""
    cache = _PSI_CACHE.setdefault(trace, {})
    if s not in cache:
        out = np.empty(len(trace.times))
        dist, k = trace.topology.dist, trace.params.kappa
        for i, chunk in _chunked(trace):
            out[i:i + len(chunk)] = _psi_matrix(chunk, dist, s, k).max(axis=(1, 2))
        out.flags.writeable = False
        cache[s] = out
    return cache[s]


def xi_series(trace: SkewTrace, s: int) -> np.ndarray:
    """``xi^s`` at every sample."""
    out = np.empty(len(trace.times))
    dist, k = trace.topology.dist, trace.params.kappa
    for i, chunk in _chunked(trace):
        out[i:i + len(chunk)] = _xi_matrix(chunk, dist, s, k).max(axis=(1, 2))
    return out


def _role_masks(trace: SkewTrace) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample boolean ``(leading, trailing)`` masks over all levels that can be positive."""
    n_t, n = trace.L.shape
    dist, k = trace.topology.dist, trace.params.kappa
    gmax = float(trace.global_skew_series.max()) if n_t else 0.0
    s_top = int(math.ceil(gmax / (2 * k))) + 1
    leading = np.zeros((n_t, n), dtype=bool)
    trailing = np.zeros((n_t, n), dtype=bool)
    for i, chunk in _chunked(trace):
        sl = slice(i, i + len(chunk))
        for s in range(s_top + 1):
            positive = False
            for mat_fn, mask in ((_psi_matrix, leading), (_xi_matrix, trailing)):
                m = mat_fn(chunk, dist, s, k)
                best = m.max(axis=2, keepdims=True)
                hit = (m == best) & (best > 0)
                mask[sl] |= hit.any(axis=1)
                positive = positive or bool((best > 0).any())
            # both potentials are non-increasing in s, so no higher level is positive either
            if not positive:
                break
    return leading, trailing


# ----------------------------------------------------------------------------- monitors

def check_wait_up(trace: SkewTrace, s: int, tolerance: float | None = None) -> Verdict:
    """``psi^s(t1) <= psi^s(t0) + rho (t1 - t0)`` for all sample pairs ``t0 < t1``.

    Evaluated in O(samples) with a running minimum of ``psi^s(t) - rho t``;
    each violating ``t1`` is reported with the ``t0`` that maximizes the excess.
    """
    tol = step_tolerance(trace) if tolerance is None else tolerance
    g = psi_series(trace, s) - trace.params.rho * trace.times
    violations = []
    best, best_i = math.inf, 0
    for j, val in enumerate(g):
        if val - best > tol:
            violations.append({
                "t0": float(trace.times[best_i]), "t1": float(trace.times[j]),
                "excess": float(val - best),
            })
        if val < best:
            best, best_i = val, j
    return _verdict(f"wait_up[s={s}]", tol, len(g), violations)


def _runs(mask: np.ndarray):
    """Yield ``(start, end)`` inclusive index ranges where ``mask`` is True."""
    padded = np.concatenate(([False], mask, [False]))
    d = np.diff(padded.astype(np.int8))
    starts = np.nonzero(d == 1)[0]
    ends = np.nonzero(d == -1)[0] - 1
    return zip(starts.tolist(), ends.tolist())


def check_leading_trailing(trace: SkewTrace, window: float | None = None) -> Verdict:
    """Leading nodes run at hardware rate; trailing nodes at ``1+mu`` times it.

    The hardware reacts with latency, so a node is only held to the rate band
    once it has been leading (trailing) for ``window`` (default
    ``T_max + T_cnt``); the rate is measured over the rest of the run of samples.
    """
    p = trace.params
    window = p.t_max + p.t_cnt if window is None else window
    tol = 2 * (p.mu + p.rho + p.mu * p.rho) * trace.dt + _float_slack(trace)
    leading, trailing = _role_masks(trace)
    times = trace.times
    violations = []
    checked = 0
    bands = (
        ("leading", leading, 1.0, 1.0 + p.rho),
        ("trailing", trailing, 1.0 + p.mu, (1.0 + p.mu) * (1.0 + p.rho)),
    )
    for role, mask, lo, hi in bands:
        for v in range(trace.n):
            for a, b in _runs(mask[:, v]):
                j0 = int(np.searchsorted(times, times[a] + window, side="left"))
                if j0 >= b:
                    continue
                checked += 1
                span = times[b] - times[j0]
                dl = trace.L[b, v] - trace.L[j0, v]
                if dl < lo * span - tol or dl > hi * span + tol:
                    violations.append({
                        "role": role, "node": v, "t_start": float(times[a]),
                        "t0": float(times[j0]), "t1": float(times[b]), "rate": float(dl / span),
                        "band": [lo, hi],
                    })
    return _verdict("leading_trailing", tol, checked, violations, note=f"window={window}")


def check_catch_up(
    trace: SkewTrace, levels=None, slack_time: float | None = None,
    tolerance: float | None = None, t0_stride: int = 1,
) -> Verdict:
    """Nodes far behind catch up within ``xi_v^s(t0)/mu + slack_time``.

    For every sampled ``t0``, level ``s`` and ``v`` with ``xi_v^s(t0) > 0``,
    checks ``L_w(t1) >= t1 - t0 + L_v(t0) - (2s+1) kappa d(v, w)`` for all
    ``w`` at the first sample ``t1 >= t0 + xi_v^s(t0)/mu + slack_time``
    (``slack_time`` defaults to ``T_max``).
    """
    p = trace.params
    slack_time = p.t_max if slack_time is None else slack_time
    tol = step_tolerance(trace) if tolerance is None else tolerance
    levels = range((p.ell or 0) + 1) if levels is None else levels
    times, L, dist = trace.times, trace.L, trace.topology.dist
    t0_idx = np.arange(0, len(times), t0_stride)
    step = max(1, _CHUNK_CELLS // max(trace.n ** 2, 1))
    violations = []
    checked = 0
    for s in levels:
        c = (2 * s + 1) * p.kappa
        any_positive = False
        for start in range(0, len(t0_idx), step):
            rows = t0_idx[start:start + step]
            xv = _xi_matrix(L[rows], dist, s, p.kappa).max(axis=2)
            ii, vv = np.nonzero(xv > 0)
            if ii.size == 0:
                continue
            any_positive = True
            i = rows[ii]
            jj = np.searchsorted(times, times[i] + xv[ii, vv] / p.mu + slack_time, side="left")
            keep = jj < len(times)
            i, vv, jj = i[keep], vv[keep], jj[keep]
            checked += len(i)
            need = (times[jj] - times[i] + L[i, vv])[:, None] - c * dist[vv]
            short = need - L[jj]
            w = np.argmax(short, axis=1)
            worst = short[np.arange(len(w)), w]
            for q in np.nonzero(worst > tol)[0]:
                violations.append({
                    "s": s, "v": int(vv[q]), "w": int(w[q]), "t0": float(times[i[q]]),
                    "t1": float(times[jj[q]]), "shortfall": float(worst[q]),
                })
        # xi^s is non-increasing in s: once it never turns positive, higher levels are vacuous
        if not any_positive:
            break
    return _verdict("catch_up", tol, checked, violations, note=f"slack_time={slack_time}")


def check_psi_monotone(trace: SkewTrace, s_max: int | None = None) -> Verdict:
    """``psi^{s+1} <= psi^s`` at every sample."""
    s_max = (trace.params.ell or 0) + 1 if s_max is None else s_max
    tol = _float_slack(trace)
    prev = psi_series(trace, 0)
    violations = []
    for s in range(1, s_max + 1):
        cur = psi_series(trace, s)
        for j in np.nonzero(cur > prev + tol)[0]:
            violations.append({"s": s, "t": float(trace.times[j]), "excess": float(cur[j] - prev[j])})
        prev = cur
    return _verdict("psi_monotone", tol, len(trace.times) * s_max, violations)


def check_psi0_global(trace: SkewTrace) -> Verdict:
    """``psi^0`` equals the global skew at every sample."""
    tol = _float_slack(trace)
    diff = np.abs(psi_series(trace, 0) - trace.global_skew_series)
    violations = [{"t": float(trace.times[j]), "diff": float(diff[j])} for j in np.nonzero(diff > tol)[0]]
    return _verdict("psi0_equals_global", tol, len(diff), violations)


def check_psi_local(trace: SkewTrace, s_max: int | None = None) -> Verdict:
    """``psi^s <= kappa`` implies local skew ``<= (2s+1) kappa``."""
    k = trace.params.kappa
    s_max = (trace.params.ell or 0) + 1 if s_max is None else s_max
    tol = _float_slack(trace)
    local = trace.local_skew_series
    violations = []
    for s in range(s_max + 1):
        ps = psi_series(trace, s)
        bad = (ps <= k) & (local > (2 * s + 1) * k + tol)
        for j in np.nonzero(bad)[0]:
            violations.append({"s": s, "t": float(trace.times[j]), "local": float(local[j])})
    return _verdict("psi_bounds_local", tol, len(local) * (s_max + 1), violations)


def check_rate_band(trace: SkewTrace) -> Verdict:
    """Between consecutive samples ``dH <= dL <= (1+mu) dH`` and ``dt <= dH <= (1+rho) dt``."""
    p = trace.params
    dt = np.diff(trace.times)[:, None]
    # rounding accumulates once per integration step between samples
    steps = float(dt.max()) / trace.dt + 1 if dt.size else 1.0
    tol = steps * _float_slack(trace) / 16
    dl = np.diff(trace.L, axis=0)
    dh = np.diff(trace.H, axis=0)
    bad = (
        (dl < dh - tol) | (dl > (1 + p.mu) * dh + tol)
        | (dh < dt - tol) | (dh > (1 + p.rho) * dt + tol) | (dl < 0)
    )
    violations = []
    for j, v in zip(*np.nonzero(bad)):
        violations.append({
            "node": int(v), "t0": float(trace.times[j]), "t1": float(trace.times[j + 1]),
            "dL": float(dl[j, v]), "dH": float(dh[j, v]),
        })
    return _verdict("rate_band", tol, int(dl.size), violations)


def monitor_suite(trace: SkewTrace, catch_up: bool = True) -> dict[str, Verdict]:
    """Every trace monitor, keyed by verdict name."""
    if len(trace.times) < 2:
        raise InvalidArgument("monitors need at least two samples")
    out: dict[str, Verdict] = {}
    for s in range((trace.params.ell or 0) + 1):
        v = check_wait_up(trace, s)
        out[v.name] = v
    for v in (
        check_leading_trailing(trace),
        check_psi_monotone(trace),
        check_psi0_global(trace),
        check_psi_local(trace),
        check_rate_band(trace),
    ):
        out[v.name] = v
    if catch_up:
        v = check_catch_up(trace)
        out[v.name] = v
    return out
