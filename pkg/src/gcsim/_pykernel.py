"""Pure-Python simulation kernel.

Reference implementation of the fixed-step loop; ``_kernel.pyx`` mirrors it
operation for operation so both backends produce bit-identical traces.
See :mod:`gcsim.engine` for the meaning of every argument.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
CTRL_IDEAL, CTRL_HARDWARE, CTRL_CONTINUOUS = 0, 1, 2
POLICY_LINEAR, POLICY_ADVERSARIAL = 0, 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def jitter_unit(seed: int, channel: int, sample: int, pos: int) -> float:
    """Uniform draw in ``[0, 1)`` keyed by (seed, channel, sample, threshold)."""
    h = splitmix64(seed & MASK64)
    h = splitmix64(h ^ channel)
    h = splitmix64(h ^ sample)
    h = splitmix64(h ^ pos)
    return (h >> 11) * (1.0 / 9007199254740992.0)


def record_count(n_steps: int, stride: int) -> int:
    return n_steps // stride + 1 + (1 if n_steps % stride else 0)


def simulate(
    n, ptr, idx, L0,
    tab_kind, tab_off, knot_t, knot_v, knot_cum, sin_amp, sin_omega, sin_phase,
    mu, kappa, delta, epsilon, period, ell, latency,
    controller, policy, window, dt, n_steps, stride,
    errors, jitter, jitter_amp, seed, record_codes,
):
    ptr = [int(x) for x in ptr]
    idx = [int(x) for x in idx]
    L0 = [float(x) for x in L0]
    tab_kind = [int(x) for x in tab_kind]
    tab_off = [int(x) for x in tab_off]
    knot_t = [float(x) for x in knot_t]
    knot_v = [float(x) for x in knot_v]
    knot_cum = [float(x) for x in knot_cum]
    sin_amp = [float(x) for x in sin_amp]
    sin_omega = [float(x) for x in sin_omega]
    sin_phase = [float(x) for x in sin_phase]
    err = [[float(x) for x in row] for row in np.asarray(errors)]
    npos = 2 * (ell + 1)
    thr = [-(2 * i - 1) * kappa - delta for i in range(ell + 1, 0, -1)]
    thr += [(2 * i - 1) * kappa - delta for i in range(1, ell + 2)]

    n_rec = record_count(n_steps, stride)
    times = np.empty(n_rec)
    rec_L = np.empty((n_rec, n))
    rec_H = np.empty((n_rec, n))
    rec_sig = np.empty((n_rec, n), dtype=np.int8)
    rec_eff = np.empty((n_rec, n), dtype=np.int8)
    events = []
    codes = []

    L = list(L0)
    H = list(L0)
    L_new = [0.0] * n
    cursor = [tab_off[v] for v in range(n)]
    integ = [0.0] * n
    sig = [0] * n
    mult = [1.0] * n
    eff = [0] * n
    win = [[0] * window for _ in range(n)]
    win_sum = [0] * n
    win_ones = [0] * n
    win_zeros = [window] * n
    wpos = 0
    fifo = [deque() for _ in range(n)]
    edge_idx = [math.floor(L0[v] / period) + 1 for v in range(n)]
    edge_count = [0] * n
    cmin = [0] * npos
    cmax = [0] * npos

    def integral(v, t):
        kind = tab_kind[v]
        if kind == 2:
            a = sin_amp[v]
            w = sin_omega[v]
            ph = sin_phase[v]
            return t * (1.0 + 0.5 * a) + (0.5 * a / w) * (math.cos(ph) - math.cos(w * t + ph))
        c = cursor[v]
        end = tab_off[v + 1]
        while c + 1 < end and knot_t[c + 1] <= t:
            c += 1
        cursor[v] = c
        dtau = t - knot_t[c]
        if kind == 1 and c + 1 < end:
            slope = (knot_v[c + 1] - knot_v[c]) / (knot_t[c + 1] - knot_t[c])
            return knot_cum[c] + dtau * (knot_v[c] + 0.5 * slope * dtau)
        return knot_cum[c] + dtau * knot_v[c]

    for v in range(n):
        integ[v] = integral(v, 0.0)

    r = 0
    for k in range(n_steps + 1):
        t = k * dt

        # 1. controller output reaching the oscillator
        if controller == CTRL_CONTINUOUS:
            for v in range(n):
                if ptr[v] == ptr[v + 1]:
                    continue
                omin = math.inf
                omax = -math.inf
                for c in range(ptr[v], ptr[v + 1]):
                    est = L[idx[c]] - L[v] + err[c][0]
                    if est < omin:
                        omin = est
                    if est > omax:
                        omax = est
                val = 0
                for s in range(ell + 1):
                    cs = (2 * s + 1) * kappa
                    if omax >= cs - delta and omin >= -cs - delta:
                        val = 2
                        break
                if val != sig[v]:
                    sig[v] = val
                    events.append((t, v, val))
        else:
            for v in range(n):
                q = fifo[v]
                while q and q[0][0] <= t:
                    val = q.popleft()[1]
                    if val != sig[v]:
                        sig[v] = val
                        events.append((t, v, val))

        # 2. retuning window and logical multiplier
        for v in range(n):
            old = win[v][wpos]
            win_sum[v] -= old
            if old == 2:
                win_ones[v] -= 1
            elif old == 0:
                win_zeros[v] -= 1
            val = sig[v]
            win[v][wpos] = val
            win_sum[v] += val
            if val == 2:
                win_ones[v] += 1
            elif val == 0:
                win_zeros[v] += 1
            if win_ones[v] == window:
                mult[v] = 1.0 + mu
                eff[v] = 2
            elif win_zeros[v] == window:
                mult[v] = 1.0
                eff[v] = 0
            else:
                eff[v] = 1
                if policy == POLICY_LINEAR:
                    mult[v] = 1.0 + mu * win_sum[v] / (2.0 * window)
                else:
                    lead = 0.0
                    lag = 0.0
                    for c in range(ptr[v], ptr[v + 1]):
                        d = L[v] - L[idx[c]]
                        if d > lead:
                            lead = d
                        if -d > lag:
                            lag = -d
                    mult[v] = 1.0 + mu if lead >= lag else 1.0
        wpos += 1
        if wpos == window:
            wpos = 0

        # 3. trace
        if k % stride == 0 or k == n_steps:
            times[r] = t
            for v in range(n):
                rec_L[r, v] = L[v]
                rec_H[r, v] = H[v]
                rec_sig[r, v] = sig[v]
                rec_eff[r, v] = eff[v]
            r += 1
        if k == n_steps:
            break

        # 4. integrate
        t1 = (k + 1) * dt
        for v in range(n):
            i1 = integral(v, t1)
            dh = i1 - integ[v]
            integ[v] = i1
            H[v] = L0[v] + i1
            L_new[v] = L[v] + mult[v] * dh

        # 5. sampling edges
        if controller != CTRL_CONTINUOUS:
            for v in range(n):
                while L_new[v] >= edge_idx[v] * period:
                    frac = (edge_idx[v] * period - L[v]) / (L_new[v] - L[v])
                    te = t + frac * dt
                    lv = L[v] + frac * (L_new[v] - L[v])
                    val = 0
                    if ptr[v] < ptr[v + 1]:
                        if controller == CTRL_HARDWARE:
                            for p in range(npos):
                                cmin[p] = 2
                                cmax[p] = 0
                            for c in range(ptr[v], ptr[v + 1]):
                                w = idx[c]
                                off = L[w] + frac * (L_new[w] - L[w]) - lv
                                for p in range(npos):
                                    if jitter:
                                        e = jitter_amp * (2.0 * jitter_unit(seed, c, edge_count[v], p) - 1.0)
                                    else:
                                        e = err[c][p]
                                    x = off + e
                                    if x >= thr[p] + epsilon:
                                        tr = 2
                                    elif x <= thr[p]:
                                        tr = 0
                                    else:
                                        tr = 1
                                    if tr < cmin[p]:
                                        cmin[p] = tr
                                    if tr > cmax[p]:
                                        cmax[p] = tr
                            for s in range(ell + 1):
                                a = cmax[ell + 1 + s]
                                b = cmin[ell - s]
                                term = a if a < b else b
                                if term > val:
                                    val = term
                            if record_codes:
                                codes.append((te, v, tuple(cmin), tuple(cmax)))
                        else:
                            omin = math.inf
                            omax = -math.inf
                            for c in range(ptr[v], ptr[v + 1]):
                                w = idx[c]
                                if jitter:
                                    e = jitter_amp * (2.0 * jitter_unit(seed, c, edge_count[v], 0) - 1.0)
                                else:
                                    e = err[c][0]
                                est = L[w] + frac * (L_new[w] - L[w]) - lv + e
                                if est < omin:
                                    omin = est
                                if est > omax:
                                    omax = est
                            for s in range(ell + 1):
                                cs = (2 * s + 1) * kappa
                                if omax >= cs - delta and omin >= -cs - delta:
                                    val = 2
                                    break
                            if record_codes:
                                codes.append((te, v, omin, omax))
                    fifo[v].append((te + latency, val))
                    edge_idx[v] += 1
                    edge_count[v] += 1

        for v in range(n):
            L[v] = L_new[v]

    return times, rec_L, rec_H, rec_sig, rec_eff, events, codes
