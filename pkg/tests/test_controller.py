import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcsim.controller import (
    check_trigger_soundness, fast_condition, fast_condition_offsets, fast_trigger,
    fast_trigger_array, fast_trigger_trits, slow_condition, slow_condition_offsets, trigger_level,
)
from gcsim.params import ParamSet
from gcsim.tdc import ThermometerCode, Trit, combine_min_max, encode_offset
from gcsim.topology import build_line

C = ThermometerCode.parse
P = ParamSet(kappa=10.0, delta=5.0, delta0=4.0, epsilon=1.0, ell=2)


def test_trigger_examples():
    assert trigger_level(12, 12, P) == 0
    assert not fast_trigger(0, 0, P)
    assert trigger_level(-18, 25, P) == 1


def test_trit_trigger_examples():
    assert fast_trigger_trits(C("111000"), C("111100")) == Trit.ONE
    assert fast_trigger_trits(C("111000"), C("111000")) == Trit.ZERO
    assert fast_trigger_trits(C("111000"), C("111M00")) == Trit.M
    # a satisfied term absorbs the metastable one
    assert fast_trigger_trits(C("111000"), C("11111M")) == Trit.ONE
    assert fast_trigger_trits(C("111000"), C("111110")) == Trit.ONE


def test_conditions_on_equal_clocks():
    topo = build_line(3)
    clocks = [5.0, 5.0, 5.0]
    for v in range(3):
        assert slow_condition(v, clocks, topo, P, s_range=[0])
        assert not fast_condition(v, clocks, topo, P)


def test_conditions_on_bump():
    topo = build_line(3)
    clocks = [0.0, 40.0, 0.0]
    assert fast_condition(0, clocks, topo, P, s_range=[1])
    assert slow_condition(1, clocks, topo, P, s_range=[2])
    assert not fast_condition(1, clocks, topo, P)


def test_soundness_small_lattice():
    p = ParamSet(kappa=10.0, delta=4.5, delta0=4.5, epsilon=1.0, ell=1)
    rep = check_trigger_soundness(p, n_neighbors=2)
    assert rep.ok, rep.examples
    assert rep.states == 25 ** 2


def test_soundness_catches_unsafe_kappa():
    # kappa below 2 delta: estimates can no longer separate the two conditions
    p = ParamSet(kappa=10.0, delta=6.0, delta0=6.0, epsilon=1.0, ell=1)
    rep = check_trigger_soundness(p, n_neighbors=2, step=0.5)
    assert not rep.ok
    assert rep.examples


def _brute_fc(offs, k, s_max):
    return any(max(offs) >= (2 * s + 1) * k and -min(offs) <= (2 * s + 1) * k for s in range(s_max + 1))


def _brute_sc(offs, k, s_max):
    return any(-min(offs) >= 2 * s * k and max(offs) <= 2 * s * k for s in range(s_max + 1))


@given(st.lists(st.floats(-60, 60), min_size=1, max_size=4))
def test_conditions_match_definition(offs):
    arr = np.array([offs])
    assert fast_condition_offsets(arr, 10.0, 4)[0] == _brute_fc(offs, 10.0, 4)
    assert slow_condition_offsets(arr, 10.0, 4)[0] == _brute_sc(offs, 10.0, 4)


@given(st.floats(-60, 60), st.floats(-60, 60))
def test_array_trigger_matches_scalar(a, b):
    lo, hi = min(a, b), max(a, b)
    assert fast_trigger_array(np.array(lo), np.array(hi), 10.0, 5.0, 2) == fast_trigger(lo, hi, P)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=4))
def test_trit_trigger_brackets_real_trigger(offs):
    lo, hi = combine_min_max([encode_offset(o, P) for o in offs])
    out = fast_trigger_trits(lo, hi)
    o_min, o_max = min(offs), max(offs)
    if out == Trit.ONE:
        assert fast_trigger(o_min, o_max, P)
    elif out == Trit.ZERO:
        assert not fast_trigger(o_min - 1e-9, o_max - 1e-9, P)
    else:
        assert fast_trigger(o_min + P.epsilon, o_max + P.epsilon, P)
