import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcsim import analysis as A
from gcsim import engine
from gcsim.drift import DriftSchedule
from gcsim.engine import Scenario
from gcsim.params import InvalidArgument, ParamSet
from gcsim.topology import Topology, build_grid, build_line
from gcsim.trace import SkewTrace

P = ParamSet(kappa=10.0, mu=1e-4, rho=1e-5, ell=2)


def make_trace(L, topo, params=P, times=None, dt=1.0, H=None):
    L = np.atleast_2d(np.asarray(L, dtype=float))
    times = np.arange(len(L), dtype=float) if times is None else np.asarray(times, dtype=float)
    H = L.copy() if H is None else H
    zeros = np.zeros(L.shape, dtype=np.int8)
    return SkewTrace(times, L, H, zeros, zeros.copy(), topo, params, dt)


def test_equal_clocks_have_no_skew():
    tr = make_trace([[7.0, 7.0, 7.0]], build_line(3))
    assert A.local_skew(tr, 0) == 0
    assert A.global_skew(tr, 0) == 0
    for s in range(3):
        sample = A.potential_sample(tr, 0, s)
        assert sample.psi == 0
        assert not sample.leading and not sample.trailing
        for v in range(3):
            assert A.psi(tr, 0, v, s) == 0


def test_bump_on_line():
    tr = make_trace([[0.0, 40.0, 0.0, 0.0]], build_line(4))
    assert A.local_skew(tr, 0) == 40
    assert A.global_skew(tr, 0) == 40


def test_square_cycle():
    # values 0, 10, 20, 30 placed around the 4-cycle 0-1-3-2
    L = np.zeros(4)
    L[[0, 1, 3, 2]] = [0, 10, 20, 30]
    tr = make_trace([L], build_grid(2))
    assert A.local_skew(tr, 0) == 30
    assert A.global_skew(tr, 0) == 30


def test_psi_hand_value_and_roles():
    tr = make_trace([[0.0, 40.0, 0.0]], build_line(3))
    assert A.psi(tr, 0, 0, 1) == 20
    sample = A.potential_sample(tr, 0, 1)
    assert sample.leading == frozenset({1})
    assert sample.trailing == frozenset({0, 2})
    assert A.xi(tr, 0, 1, 1) == 10


@given(st.lists(st.floats(-500, 500), min_size=2, max_size=7))
def test_psi0_is_global_skew(values):
    n = len(values)
    tr = make_trace([values], build_line(n))
    assert A.psi_series(tr, 0)[0] == pytest.approx(A.global_skew(tr, 0), abs=1e-9)
    # levels only discount more
    assert A.psi_series(tr, 1)[0] <= A.psi_series(tr, 0)[0]


def test_clocks_at_outside_trace():
    tr = make_trace([[0.0, 1.0], [1.0, 2.0]], build_line(2))
    assert tr.clocks_at(0.5).tolist() == [0.5, 1.5]
    with pytest.raises(InvalidArgument):
        tr.clocks_at(3.0)


def test_wait_up_on_drift_free_run():
    p = ParamSet(rho=0.0, mu=1e-3, init_skew_bound=30.0)
    sc = Scenario(p, build_line(4), (0, 30, 0, 10), DriftSchedule("constant", level=0.0), duration=100_000.0)
    tr = engine.run(sc)
    for s in range(sc.params.ell + 1):
        assert A.check_wait_up(tr, s).passed


def test_wait_up_flags_clock_jump():
    t = np.arange(0, 100.0)
    L = np.stack([t, t, t], axis=1)
    L[50:, 1] += 5 * P.kappa
    tr = make_trace(L, build_line(3), times=t)
    v = A.check_wait_up(tr, 0)
    assert not v.passed
    assert v.violations[0]["t1"] == 50.0


def test_leading_node_running_fast_flagged():
    p = ParamSet(kappa=10.0, mu=1e-4, rho=1e-5, ell=2)
    t = np.arange(0, 5000.0, 10.0)
    L = np.stack([t, 40 + t * 1.001], axis=1)
    tr = make_trace(L, build_line(2), p, times=t)
    v = A.check_leading_trailing(tr)
    assert not v.passed
    assert any(x["role"] == "leading" and x["node"] == 1 for x in v.violations)


def test_trailing_node_not_catching_up_flagged():
    p = ParamSet(kappa=10.0, mu=1e-2, rho=1e-5, ell=4)
    t = np.arange(0, 20_000.0, 10.0)
    L = np.stack([t, t + 100], axis=1)
    tr = make_trace(L, build_line(2), p, times=t)
    v = A.check_catch_up(tr)
    assert not v.passed
    assert v.violations[0]["v"] == 1


def test_rate_band_flags_decreasing_clock():
    t = np.arange(0, 10.0)
    L = np.stack([t, t], axis=1)
    L[5, 0] -= 3
    tr = make_trace(L, build_line(2), times=t, H=np.stack([t, t], axis=1))
    v = A.check_rate_band(tr)
    assert not v.passed
    assert v.violations[0]["node"] == 0


def test_convergence_time_cases():
    t = np.arange(0, 10.0)
    flat = make_trace(np.stack([t, t], axis=1), build_line(2), times=t)
    assert A.convergence_time(flat, 5.0) == 0.0
    diverging = make_trace(np.stack([t, 3 * t], axis=1), build_line(2), times=t)
    assert A.convergence_time(diverging, 5.0) is None
    shrinking = make_trace(np.stack([t, t + (9 - t)], axis=1), build_line(2), times=t)
    # skew 9 - t first reaches 5 at t = 4
    assert A.convergence_time(shrinking, 5.0) == 4.0


def test_line_scenario_monitors(ahead_run):
    sc, tr = ahead_run
    for s in range(sc.params.ell + 1):
        assert A.check_wait_up(tr, s).passed
    assert A.check_leading_trailing(tr).passed
    conv = A.convergence_time(tr, 30.0)
    assert conv is not None
    assert conv <= 8 * (40 + sc.params.kappa * 3) / sc.params.mu


def test_ahead_node_stays_slow(ahead_run):
    _, tr = ahead_run
    # node 1 starts ahead and remains the leading node; its signal never leaves 0
    assert not [e for e in tr.events if e[1] == 1]
    assert np.all(tr.signal[:, 1] == 0)
    assert np.all(np.argmax(tr.L, axis=1) == 1)


def test_verdict_roundtrip(ahead_run):
    _, tr = ahead_run
    for v in A.monitor_suite(tr).values():
        assert A.Verdict.from_dict(v.to_dict()) == v


def test_monitors_need_two_samples():
    tr = make_trace([[0.0, 0.0]], Topology.from_edges(2, [(0, 1)]))
    with pytest.raises(InvalidArgument):
        A.monitor_suite(tr)
