import pytest
from hypothesis import given, strategies as st

from gcsim.clock import ClockState, Mode, advance, window_length, window_multiplier
from gcsim.drift import DriftSchedule
from gcsim.params import InvalidArgument, ParamSet
from gcsim.tdc import Trit

UNIT = DriftSchedule("constant", level=0.0)


def test_slow_identity():
    p = ParamSet(mu=1e-4)
    s = advance(ClockState.initial(0.0, p, 500), 500, Trit.ZERO, UNIT, p)
    assert s.hardware_time == 500
    assert s.logical_time == 500
    assert s.effective_mode is Mode.SLOW


def test_fast_multiplier():
    p = ParamSet(mu=1e-4)
    s = advance(ClockState.initial(0.0, p, 500), 500, Trit.ONE, UNIT, p)
    assert s.logical_time == pytest.approx(500.05, abs=1e-12)
    assert s.effective_mode is Mode.FAST


def test_transition_stays_in_band():
    p = ParamSet(mu=1e-4, t_osc=250)
    dt = 1.0
    s = ClockState.initial(0.0, p, dt)
    mults = []
    for _ in range(window_length(p, dt) + 5):
        before = s.logical_time
        s = advance(s, dt, Trit.ONE, UNIT, p)
        mults.append((s.logical_time - before) / dt)
    # fully fast only after the retuning window has filled with ones
    assert all(1.0 - 1e-12 <= m <= 1.0 + p.mu + 1e-12 for m in mults)
    assert mults[0] < 1 + p.mu
    assert mults[-1] == pytest.approx(1 + p.mu)
    assert s.effective_mode is Mode.FAST


def test_metastable_signal_unlocks():
    mult, mode = window_multiplier(total=1, ones=0, zeros=0, size=1, mu=1e-4)
    assert mode is Mode.TRANSITIONING
    assert 1.0 <= mult <= 1 + 1e-4


def test_adversarial_policy_extremes():
    assert window_multiplier(3, 1, 1, 3, 1e-3, "adversarial", lead=5, lag=1)[0] == 1 + 1e-3
    assert window_multiplier(3, 1, 1, 3, 1e-3, "adversarial", lead=1, lag=5)[0] == 1.0


def test_bad_inputs():
    p = ParamSet()
    with pytest.raises(InvalidArgument):
        advance(ClockState.initial(0.0, p, 1), 0.0, Trit.ZERO, UNIT, p)
    with pytest.raises(InvalidArgument):
        window_multiplier(3, 1, 1, 3, 1e-3, "sloppy")


@given(st.lists(st.sampled_from([0, 1, 2]), min_size=1, max_size=40), st.floats(0, 1))
def test_rates_in_band_for_any_signal(signals, level):
    p = ParamSet(mu=1e-3, rho=1e-5, t_osc=5.0)
    sched = DriftSchedule("constant", level=level)
    s = ClockState.initial(3.0, p, 1.0)
    for sig in signals:
        prev = s
        s = advance(s, 1.0, sig, sched, p)
        dh = s.hardware_time - prev.hardware_time
        dl = s.logical_time - prev.logical_time
        assert 1.0 - 1e-12 <= dh <= 1 + p.rho + 1e-12
        assert dh - 1e-12 <= dl <= (1 + p.mu) * dh + 1e-12
