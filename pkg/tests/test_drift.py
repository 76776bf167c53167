import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcsim.drift import DriftSchedule, compile_schedule, hardware_elapsed, hardware_rate, table_integral
from gcsim.params import InvalidArgument

RHO = 1e-5


def test_constant_at_top_of_band():
    s = DriftSchedule("constant", level=1.0)
    for t in (0.0, 123.4, 5e6):
        assert hardware_rate(0, t, s, RHO) == pytest.approx(1.00001, abs=1e-15)


def test_sinusoid_spans_band():
    s = DriftSchedule("sinusoidal", level=1.0, period=1000.0, phase=0.0)
    rates = [hardware_rate(0, t, s, RHO) for t in np.linspace(0, 1000, 4001)]
    assert min(rates) == pytest.approx(1.0, abs=1e-12)
    assert max(rates) == pytest.approx(1 + RHO, abs=1e-12)


def test_random_walk_replays():
    s = DriftSchedule("seeded-random-walk", seed=7)
    assert hardware_rate(3, 12345.0, s, RHO) == hardware_rate(3, 12345.0, s, RHO)


def test_piecewise_constant():
    s = DriftSchedule("piecewise-constant", times=(0, 100), levels=(0.0, 1.0))
    assert hardware_rate(0, 50, s, RHO) == 1.0
    assert hardware_rate(0, 150, s, RHO) == pytest.approx(1 + RHO)
    assert hardware_elapsed(0, 0, 200, s, RHO) == pytest.approx(100 + 100 * (1 + RHO))


def test_bad_schedules():
    with pytest.raises(InvalidArgument):
        DriftSchedule("wobbly")
    with pytest.raises(InvalidArgument):
        DriftSchedule("constant", level=1.5)
    with pytest.raises(InvalidArgument):
        DriftSchedule("piecewise-constant", times=(5,), levels=(0.0,))


def test_dict_roundtrip():
    s = DriftSchedule("piecewise-constant", times=(0, 10), levels=(0.2, 0.4), seed=3)
    assert DriftSchedule.from_dict(s.to_dict()) == s


schedules = st.one_of(
    st.builds(DriftSchedule, st.just("constant"), st.floats(0, 1)),
    st.builds(DriftSchedule, st.just("sinusoidal"), st.floats(0, 1), st.floats(10, 1e5), st.floats(0, 6.28)),
    st.builds(lambda seed, step: DriftSchedule("seeded-random-walk", step=step, seed=seed),
              st.integers(0, 2**31), st.floats(10, 1e4)),
)


@given(schedules, st.integers(0, 7), st.floats(0, 1e5), st.floats(0, 1e5))
def test_rate_in_band_and_integral_consistent(sched, node, t0, span):
    t1 = t0 + span
    r = hardware_rate(node, t0, sched, RHO)
    assert 1.0 <= r <= 1.0 + RHO
    e = hardware_elapsed(node, t0, t1, sched, RHO)
    assert span - 1e-6 <= e <= span * (1 + RHO) + 1e-6


@settings(max_examples=20)
@given(st.integers(0, 1000), st.floats(100, 1e4))
def test_integral_matches_quadrature(seed, horizon):
    sched = DriftSchedule("sinusoidal", level=0.7, period=horizon / 3, phase=seed / 100)
    tab = compile_schedule(sched, 0, RHO, horizon)
    t = np.linspace(0, horizon, 20001)
    rates = np.array([hardware_rate(0, x, sched, RHO) for x in t])
    quad = float(np.sum((rates[1:] + rates[:-1]) / 2 * np.diff(t)))
    assert table_integral(tab, horizon) == pytest.approx(quad, rel=1e-9)
