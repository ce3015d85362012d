import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wfa.dwt import Decomposition, dwt_forward, flatten
from wfa.errors import InputError
from wfa.shrink import (
    MAD_CONSTANT,
    ThresholdPlan,
    hard_threshold,
    mad_sigma,
    partition_counts,
    universal_threshold,
)


def decomposition_from_finest(finest, rest):
    """J=3 decomposition with the finest level given explicitly."""
    rest = np.asarray(rest, float)
    return Decomposition(3, 0, {2: np.asarray(finest, float), 1: rest[:2], 0: rest[2:3]}, rest[3:4])


def test_mad_sigma():
    assert mad_sigma([2.0, -2.0, 2.0, -2.0]) == pytest.approx(2.0 / MAD_CONSTANT)
    gen = np.random.default_rng(3)
    assert 0.98 <= mad_sigma(gen.standard_normal(100_000)) <= 1.02
    with pytest.raises(InputError):
        mad_sigma([])


def test_universal_threshold():
    assert universal_threshold(1.0, 1024) == pytest.approx(math.sqrt(2 * math.log(1024)), rel=1e-15)
    assert universal_threshold(1.0, 1024) == pytest.approx(3.72325, abs=1e-4)
    assert universal_threshold(1.0, 1) == 0.0
    assert universal_threshold(0.0, 512) == 0.0
    assert universal_threshold(2.0, 64) == pytest.approx(2 * math.sqrt(2 * math.log(64)))
    with pytest.raises(InputError):
        universal_threshold(1.0, 0)


def test_partition_counts():
    assert partition_counts(256, 3) == (224, 32)
    assert partition_counts(8, 3) == (7, 1)
    for bad in (0, 4):
        with pytest.raises(InputError):
            partition_counts(8, bad)


@given(st.integers(1, 12).flatmap(lambda J: st.tuples(st.just(J), st.integers(1, J))))
def test_plan_slot_invariants(Jl):
    J, l_t = Jl
    plan = ThresholdPlan(1.0, l_t, 1 << J)
    assert plan.n_t * 2 ** l_t == plan.n
    assert plan.p_slots + plan.q_slots == plan.n
    assert plan.p_slots == sum(1 << j for j in plan.thresholded_levels())


def test_keep_kill_example():
    d = decomposition_from_finest([3.0, 0.5, -2.0, 0.1], [9.0, 9.0, 9.0, 9.0])
    out = hard_threshold(d, ThresholdPlan(1.0, 1, 8))
    np.testing.assert_array_equal(out.kept, [3.0, -2.0])
    assert out.survivors == 2
    np.testing.assert_array_equal(out.unthresholded, [9.0] * 4)
    np.testing.assert_array_equal(out.decomposition.details[2], [3.0, 0.0, -2.0, 0.0])


def test_zero_and_infinite_threshold():
    d = decomposition_from_finest([3.0, 0.0, -2.0, 0.1], [1.0, 0.0, -1.0, 5.0])
    keep_all = hard_threshold(d, ThresholdPlan(0.0, 3, 8))
    # exact zeros die because survival needs |theta| > 0
    assert keep_all.survivors == 5
    kill_all = hard_threshold(d, ThresholdPlan(math.inf, 3, 8))
    assert kill_all.survivors == 0
    np.testing.assert_array_equal(kill_all.unthresholded, [5.0])


def test_ties_die():
    d = decomposition_from_finest([1.0, -1.0, 1.5, 0.0], [0.0] * 4)
    assert hard_threshold(d, ThresholdPlan(1.0, 1, 8)).survivors == 1


def test_plan_mismatch():
    d = dwt_forward(np.ones(16))
    with pytest.raises(InputError):
        hard_threshold(d, ThresholdPlan(1.0, 2, 32))
    partial = dwt_forward(np.ones(16), j0=2)
    with pytest.raises(InputError):
        hard_threshold(partial, ThresholdPlan(1.0, 4, 16))


@given(st.integers(1, 8), st.floats(0, 3), st.integers(0, 2 ** 31), st.data())
def test_threshold_properties(J, lam, seed, data):
    l_t = data.draw(st.integers(1, J))
    n = 1 << J
    y = np.random.default_rng(seed).standard_normal(n) * 2
    d = dwt_forward(y, "d4" if n >= 4 else "haar")
    plan = ThresholdPlan(lam, l_t, n)
    once = hard_threshold(d, plan)
    twice = hard_threshold(once.decomposition, plan)
    np.testing.assert_array_equal(flatten(twice.decomposition), flatten(once.decomposition))
    assert np.all(once.kept ** 2 > lam ** 2)
    assert once.survivors <= plan.p_slots
    assert once.unthresholded.size == plan.q_slots
    assert once.energy() <= float(flatten(d) @ flatten(d)) + 1e-12
