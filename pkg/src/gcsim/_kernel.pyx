# cython: language_level=3
"""Compiled simulation kernel; same algorithm and arithmetic order as ``_pykernel``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, floor, INFINITY
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline uint64_t splitmix64(uint64_t x) noexcept nogil:
    cdef uint64_t z = x + <uint64_t>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double jitter_unit(uint64_t seed, uint64_t channel, uint64_t sample, uint64_t pos) noexcept nogil:
    cdef uint64_t h = splitmix64(seed)
    h = splitmix64(h ^ channel)
    h = splitmix64(h ^ sample)
    h = splitmix64(h ^ pos)
    return <double>(h >> 11) * (1.0 / 9007199254740992.0)


cdef inline double integral(
    int v, double t, const int64_t[:] tab_kind, const int64_t[:] tab_off,
    const double[:] knot_t, const double[:] knot_v, const double[:] knot_cum,
    const double[:] sin_amp, const double[:] sin_omega, const double[:] sin_phase,
    int64_t[:] cursor,
) noexcept nogil:
    cdef int64_t kind = tab_kind[v]
    cdef double a, w, ph, dtau, slope
    cdef int64_t c, end
    if kind == 2:
        a = sin_amp[v]
        w = sin_omega[v]
        ph = sin_phase[v]
        return t * (1.0 + 0.5 * a) + (0.5 * a / w) * (cos(ph) - cos(w * t + ph))
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


def simulate(
    int n, ptr_in, idx_in, L0_in,
    tab_kind_in, tab_off_in, knot_t_in, knot_v_in, knot_cum_in,
    sin_amp_in, sin_omega_in, sin_phase_in,
    double mu, double kappa, double delta, double epsilon, double period,
    int ell, double latency,
    int controller, int policy, int window, double dt, int64_t n_steps, int64_t stride,
    errors_in, int jitter, double jitter_amp, seed_in, int record_codes,
):
    cdef const int64_t[:] ptr = np.ascontiguousarray(ptr_in, dtype=np.int64)
    cdef const int64_t[:] idx = np.ascontiguousarray(idx_in, dtype=np.int64)
    cdef const double[:] L0 = np.ascontiguousarray(L0_in, dtype=np.float64)
    cdef const int64_t[:] tab_kind = np.ascontiguousarray(tab_kind_in, dtype=np.int64)
    cdef const int64_t[:] tab_off = np.ascontiguousarray(tab_off_in, dtype=np.int64)
    cdef const double[:] knot_t = np.ascontiguousarray(knot_t_in, dtype=np.float64)
    cdef const double[:] knot_v = np.ascontiguousarray(knot_v_in, dtype=np.float64)
    cdef const double[:] knot_cum = np.ascontiguousarray(knot_cum_in, dtype=np.float64)
    cdef const double[:] sin_amp = np.ascontiguousarray(sin_amp_in, dtype=np.float64)
    cdef const double[:] sin_omega = np.ascontiguousarray(sin_omega_in, dtype=np.float64)
    cdef const double[:] sin_phase = np.ascontiguousarray(sin_phase_in, dtype=np.float64)
    cdef const double[:, :] err = np.ascontiguousarray(errors_in, dtype=np.float64)
    cdef uint64_t seed = <uint64_t>(int(seed_in) & 0xFFFFFFFFFFFFFFFF)

    cdef int npos = 2 * (ell + 1)
    thr_np = np.empty(npos)
    cdef double[:] thr = thr_np
    cdef int i, p, s
    for i in range(ell + 1, 0, -1):
        thr[ell + 1 - i] = -(2 * i - 1) * kappa - delta
    for i in range(1, ell + 2):
        thr[ell + i] = (2 * i - 1) * kappa - delta

    cdef int64_t n_rec = n_steps // stride + 1 + (1 if n_steps % stride else 0)
    times_np = np.empty(n_rec)
    recL_np = np.empty((n_rec, n))
    recH_np = np.empty((n_rec, n))
    recS_np = np.empty((n_rec, n), dtype=np.int8)
    recE_np = np.empty((n_rec, n), dtype=np.int8)
    cdef double[:] times = times_np
    cdef double[:, :] rec_L = recL_np
    cdef double[:, :] rec_H = recH_np
    cdef signed char[:, :] rec_sig = recS_np
    cdef signed char[:, :] rec_eff = recE_np
    events = []
    codes = []

    L_np = np.array(L0_in, dtype=np.float64)
    H_np = np.array(L0_in, dtype=np.float64)
    cdef double[:] L = L_np
    cdef double[:] H = H_np
    cdef double[:] L_new = np.zeros(n)
    cdef int64_t[:] cursor = np.array(tab_off_in[:n], dtype=np.int64)
    cdef double[:] integ = np.zeros(n)
    cdef int64_t[:] sig = np.zeros(n, dtype=np.int64)
    cdef double[:] mult = np.ones(n)
    cdef int64_t[:] eff = np.zeros(n, dtype=np.int64)
    cdef int64_t[:, :] win = np.zeros((n, window), dtype=np.int64)
    cdef int64_t[:] win_sum = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] win_ones = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] win_zeros = np.full(n, window, dtype=np.int64)
    cdef int wpos = 0

    cdef int cap = <int>((latency + 2.0 * dt) * 2.0 / period) + 4
    cdef double[:, :] fifo_t = np.zeros((n, cap))
    cdef int64_t[:, :] fifo_v = np.zeros((n, cap), dtype=np.int64)
    cdef int64_t[:] head = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] count = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] edge_idx = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] edge_count = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] cmin = np.zeros(npos, dtype=np.int64)
    cdef int64_t[:] cmax = np.zeros(npos, dtype=np.int64)

    cdef int v, w, c, slot
    cdef int64_t k, r = 0, val, old, tr, a, b, term
    cdef double t, t1, i1, dh, omin, omax, est, cs, lead, lag, d
    cdef double frac, te, lv, off, e, x

    for v in range(n):
        edge_idx[v] = <int64_t>floor(L0[v] / period) + 1
        integ[v] = integral(v, 0.0, tab_kind, tab_off, knot_t, knot_v, knot_cum,
                            sin_amp, sin_omega, sin_phase, cursor)

    for k in range(n_steps + 1):
        t = k * dt

        # 1. controller output reaching the oscillator
        if controller == 2:
            for v in range(n):
                if ptr[v] == ptr[v + 1]:
                    continue
                omin = INFINITY
                omax = -INFINITY
                for c in range(ptr[v], ptr[v + 1]):
                    est = L[idx[c]] - L[v] + err[c, 0]
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
                    events.append((t, v, int(val)))
        else:
            for v in range(n):
                while count[v] > 0 and fifo_t[v, head[v]] <= t:
                    val = fifo_v[v, head[v]]
                    head[v] = (head[v] + 1) % cap
                    count[v] -= 1
                    if val != sig[v]:
                        sig[v] = val
                        events.append((t, v, int(val)))

        # 2. retuning window and logical multiplier
        for v in range(n):
            old = win[v, wpos]
            win_sum[v] -= old
            if old == 2:
                win_ones[v] -= 1
            elif old == 0:
                win_zeros[v] -= 1
            val = sig[v]
            win[v, wpos] = val
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
                if policy == 0:
                    mult[v] = 1.0 + mu * <double>win_sum[v] / (2.0 * window)
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
                rec_sig[r, v] = <signed char>sig[v]
                rec_eff[r, v] = <signed char>eff[v]
            r += 1
        if k == n_steps:
            break

        # 4. integrate
        t1 = (k + 1) * dt
        for v in range(n):
            i1 = integral(v, t1, tab_kind, tab_off, knot_t, knot_v, knot_cum,
                          sin_amp, sin_omega, sin_phase, cursor)
            dh = i1 - integ[v]
            integ[v] = i1
            H[v] = L0[v] + i1
            L_new[v] = L[v] + mult[v] * dh

        # 5. sampling edges
        if controller != 2:
            for v in range(n):
                while L_new[v] >= edge_idx[v] * period:
                    frac = (edge_idx[v] * period - L[v]) / (L_new[v] - L[v])
                    te = t + frac * dt
                    lv = L[v] + frac * (L_new[v] - L[v])
                    val = 0
                    if ptr[v] < ptr[v + 1]:
                        if controller == 1:
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
                                        e = err[c, p]
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
                                codes.append((te, v, tuple([int(cmin[p]) for p in range(npos)]),
                                              tuple([int(cmax[p]) for p in range(npos)])))
                        else:
                            omin = INFINITY
                            omax = -INFINITY
                            for c in range(ptr[v], ptr[v + 1]):
                                w = idx[c]
                                if jitter:
                                    e = jitter_amp * (2.0 * jitter_unit(seed, c, edge_count[v], 0) - 1.0)
                                else:
                                    e = err[c, 0]
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
                    if count[v] == cap:
                        raise RuntimeError("measurement pipeline overflow")
                    slot = (head[v] + count[v]) % cap
                    fifo_t[v, slot] = te + latency
                    fifo_v[v, slot] = val
                    count[v] += 1
                    edge_idx[v] += 1
                    edge_count[v] += 1

        for v in range(n):
            L[v] = L_new[v]

    return times_np, recL_np, recH_np, recS_np, recE_np, events, codes
