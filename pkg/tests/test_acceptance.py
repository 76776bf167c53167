"""Acceptance criteria C1-C9; each prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written straight to the terminal (and to ``test_output.txt`` when teed).
"""
import itertools
import time

import numpy as np
import pytest

from gcsim import analysis as A
from gcsim import clocktree, engine, presets
from gcsim.bounds import delta_from, skew_bounds
from gcsim.controller import check_trigger_soundness
from gcsim.io import resolve, scenario_from_dict
from gcsim.params import ParamSet
from gcsim.tdc import ThermometerCode, decode_interval, encode_trits, thresholds

FINAL_WINDOW = 200_000.0


@pytest.fixture
def report(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\n{cid} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


def _scenario(name, **over):
    return scenario_from_dict(dict(presets.get(name), **over))


def _final_local(trace):
    m = trace.times >= trace.times[-1] - FINAL_WINDOW
    return float(trace.local_skew_series[m].max())


def _first_fast(trace, v):
    return next((t for t, node, sig in trace.events if node == v and sig == 2), None)


@pytest.fixture(scope="module")
def line_runs():
    out = {}
    for name in ("paper-line4-ahead", "paper-line4-behind"):
        sc = _scenario(name)
        t0 = time.perf_counter()
        tr = engine.run(sc)
        out[name] = (sc, tr, time.perf_counter() - t0)
    return out


def test_c1_uncertainty_budget(report):
    value = delta_from(4, 1e-5, 1e-4, 775)
    oracle = 4.0 + (1e-5 + 1e-4 + 1e-5 * 1e-4) * 775.0
    ok = abs(value - oracle) <= 1e-6 and round(value, 4) == 4.0853 and value <= 5.0
    report("C1", ok, f"delta = {value:.9f} ps (oracle {oracle:.9f}, 4-decimal value {round(value, 4)}, budget 5 ps)")
    assert ok


def test_c2_skew_bounds(report):
    local = skew_bounds(ParamSet(kappa=10, mu=1e-3, rho=1e-5), 62)[1]
    glob = skew_bounds(ParamSet(kappa=10, mu=1e-4, rho=1e-5), 3)[0]
    rel = abs(glob - 36.69) / 36.69
    ok = local == 30.0 and rel <= 0.05
    report("C2", ok, f"local(D=62) = {local} ps; global(D=3) = {glob} ps, {100 * rel:.2f}% from 36.69 ps")
    assert ok


def test_c3a_max_local_skew_over_run(line_runs, report):
    sc, tr, _ = line_runs["paper-line4-ahead"]
    peak = float(tr.local_skew_series.max())
    at = float(tr.times[int(np.argmax(tr.local_skew_series))])
    ok = peak <= 30.0
    below = A.convergence_time(tr, 30.0)
    report("C3a", ok, f"max local skew {peak:.3f} ps at t = {at:.0f} ps (limit 30 ps); the initial local skew is "
                      f"{A.local_skew(tr, 0.0):.1f} ps and stays <= 30 ps from t = {below} ps on")
    assert ok


def test_c3b_final_window(line_runs, report):
    sc, tr, secs = line_runs["paper-line4-ahead"]
    final = _final_local(tr)
    ok = final <= 10.0 and secs < 30
    report("C3b", ok, f"local skew over the last 200 ns {final:.3f} ps (limit 10 ps), run took {secs:.2f} s")
    assert ok


def test_c3c_mirrored_scenario(line_runs, report):
    sc, tr, _ = line_runs["paper-line4-behind"]
    final = _final_local(tr)
    conv = A.convergence_time(tr, 10.0)
    ok = final <= 10.0 and conv is not None
    report("C3c", ok, f"node 1 behind: last-200 ns local skew {final:.3f} ps, below 10 ps from t = {conv} ps")
    assert ok


def test_c3d_fast_mode_order(line_runs, report):
    _, tr, _ = line_runs["paper-line4-ahead"]
    t2, t3 = _first_fast(tr, 2), _first_fast(tr, 3)
    ok = t2 is not None and t3 is not None and t3 > t2
    report("C3d", ok, f"first fast signal: node 2 at {t2} ps, node 3 at {t3} ps")
    assert ok


def _shipped_scenarios():
    seen = {}
    for name in presets.names():
        raw = presets.get(name)
        if raw["kind"] == "scenario":
            dicts = [(name, raw)]
        elif raw["kind"] == "sweep":
            base = resolve(raw["base"])
            dicts = [(f"{name}/{v['name']}", dict(base, **v)) for v in raw["variants"]]
        else:
            continue
        for label, d in dicts:
            d = {k: v for k, v in d.items() if k not in ("kind", "description")}
            sc = scenario_from_dict(d)
            seen.setdefault(sc.digest(), (label, sc))
    return list(seen.values())


def test_c4_monitor_suite_on_presets(report):
    lines = []
    ok = True
    t0 = time.perf_counter()
    for label, sc in _shipped_scenarios():
        tr = engine.run(sc)
        p = sc.params
        verdicts = [A.check_wait_up(tr, s) for s in range(p.ell + 1)]
        verdicts += [
            A.check_leading_trailing(tr, window=p.t_max + p.t_cnt),
            A.check_psi_monotone(tr),
            A.check_psi0_global(tr),
        ]
        bad = [v.name for v in verdicts if not v.passed]
        ok &= not bad
        lines.append(f"{label}: {'ok' if not bad else 'violated ' + ', '.join(bad)}")
    report("C4", ok, f"{len(lines)} runs in {time.perf_counter() - t0:.1f} s; " + "; ".join(lines))
    assert ok


def test_c5_trigger_soundness(report):
    # kappa = 2 delta + kappa/10 with kappa = 10
    p = ParamSet(kappa=10.0, delta0=4.5, delta=4.5, epsilon=1.0, ell=2)
    t0 = time.perf_counter()
    rep = check_trigger_soundness(p, n_neighbors=3, step=p.kappa / 4)
    secs = time.perf_counter() - t0
    ok = rep.fast_misses == 0 and rep.slow_misses == 0 and secs < 10
    report("C5", ok, f"{rep.states} offset states x 27 error patterns = {rep.evaluations} evaluations, "
                     f"{rep.fast_misses} fast misses, {rep.slow_misses} slow misses, {secs:.2f} s")
    assert ok


def test_c6_thermometer_codes(report):
    p = ParamSet(**presets.HARDWARE_PARAMS, ell=2)
    thr = thresholds(p, p.ell)
    span = abs(thr).max() + 2 * p.kappa
    offsets = np.round(np.arange(-span, span + 0.05, 0.1), 10)
    patterns = np.array(list(itertools.product((-p.delta0, 0.0, p.delta0), repeat=len(thr))))
    t0 = time.perf_counter()
    codes = encode_trits(offsets[:, None], p, patterns[None, :, :])
    flat = codes.reshape(-1, len(thr))
    monotone = bool(np.all(np.diff(flat.astype(int), axis=1) <= 0))
    max_m = int((flat == 1).sum(axis=1).max())
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    intervals = np.array([decode_interval(ThermometerCode(tuple(int(x) for x in u)), p, margin=p.delta0)
                          for u in uniq])
    truth = np.repeat(offsets, len(patterns))
    consistent = bool(np.all((intervals[inverse, 0] <= truth) & (truth <= intervals[inverse, 1])))
    secs = time.perf_counter() - t0
    ok = monotone and max_m <= 1 and consistent and secs < 10
    report("C6", ok, f"{flat.shape[0]} codes ({len(offsets)} offsets x {len(patterns)} error patterns): "
                     f"all 1*M?0* = {monotone}, max M trits = {max_m}, intervals contain the offset = "
                     f"{consistent}, {secs:.2f} s")
    assert ok


def test_c7_step_refinement(report):
    sc = _scenario("paper-line4-ahead")
    t0 = time.perf_counter()
    coarse = engine.run(sc)
    fine = engine.run(sc.with_overrides(dt=sc.dt / 10, stride=sc.stride * 10))
    secs = time.perf_counter() - t0
    _, ia, ib = np.intersect1d(np.round(coarse.times, 6), np.round(fine.times, 6), return_indices=True)
    diff = float(np.abs(coarse.L[ia] - fine.L[ib]).max())
    tol = 2 * (1 + sc.params.mu) * (1 + sc.params.rho) * sc.dt
    ok = len(ia) == len(coarse.times) and diff <= tol and secs < 300
    report("C7", ok, f"{len(ia)} shared samples, max |L(dt=1) - L(dt=0.1)| = {diff:.3e} ps "
                     f"(limit {tol:.6f} ps), {secs:.1f} s")
    assert ok


def test_c8_self_stabilization(report):
    worst_g = worst_l = 0.0
    failures = []
    t0 = time.perf_counter()
    for seed in range(20):
        sc = _scenario("selfstab-line8", seed=seed)
        p, d = sc.params, sc.topology.diameter
        off = np.asarray(sc.initial_offsets)
        g0 = float(off.max() - off.min())
        horizon = 2 * 4 * (g0 + p.kappa * d) / p.mu
        glob_lim = p.mu / (p.mu - 2 * p.rho) * p.kappa * d * 1.05
        local_lim = skew_bounds(p, d)[1]
        tr = engine.run(sc)
        after = tr.times >= horizon
        g = float(tr.global_skew_series[after].max())
        loc = float(tr.local_skew_series[after].max())
        worst_g, worst_l = max(worst_g, g), max(worst_l, loc)
        if not (after.any() and abs(g0 - 700.0) < 1e-9 and g <= glob_lim and loc <= local_lim):
            failures.append(seed)
    ok = not failures
    report("C8", ok, f"20 seeds, G(0) = 700 ps; after t = {horizon:.0f} ps worst G = {worst_g:.2f} ps "
                     f"(limit {glob_lim:.2f}), worst L = {worst_l:.2f} ps (limit {local_lim}); "
                     f"failing seeds {failures}; {time.perf_counter() - t0:.1f} s")
    assert ok


def test_c9_clock_tree_shape(report):
    cfg = presets.get("clocktree-grid")
    rows = clocktree.compare_curves(cfg["w_list"], ParamSet(**cfg["params"]), cfg["nominal_edge_delay"],
                                    cfg["p"], cfg["strategy"])
    slope, _, r2 = clocktree.linear_fit([r.w for r in rows], [r.tree_skew for r in rows])
    gcs = {r.gcs_local_bound for r in rows}
    last = rows[-1]
    ok = slope > 0 and r2 >= 0.9 and gcs == {30.0} and last.gcs_local_bound <= 0.5 * last.tree_skew
    report("C9", ok, f"tree skew {[r.tree_skew for r in rows]} ps, slope {slope:.3f} ps/W, R^2 {r2:.4f}; "
                     f"GCS bound {sorted(gcs)} ps; W=32 ratio {last.gcs_local_bound / last.tree_skew:.3f}")
    assert ok
