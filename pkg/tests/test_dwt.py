import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from wfa.dwt import (
    WAVELETS,
    Decomposition,
    dwt_forward,
    dwt_inverse,
    flatten,
    make_filter,
    unflatten,
)
from wfa.errors import InputError

S2 = 1 / math.sqrt(2)


def analysis_matrix(n, h, g):
    """One periodic filter-and-downsample level as an explicit n x n matrix:
    rows 0..n/2-1 low-pass, rows n/2..n-1 high-pass."""
    W = np.zeros((n, n))
    for k in range(n // 2):
        for m in range(len(h)):
            W[k, (2 * k + m) % n] += h[m]
            W[n // 2 + k, (2 * k + m) % n] += g[m]
    return W


def full_transform_oracle(y, name, j0=0):
    f = make_filter(name)
    v, details = np.asarray(y, float), []
    while v.size > (1 << j0):
        out = analysis_matrix(v.size, f.h, f.g) @ v
        v, w = out[: v.size // 2], out[v.size // 2:]
        details.append(w)
    return np.concatenate(details + [v])


def test_haar_taps():
    f = make_filter("haar")
    np.testing.assert_allclose(f.h, [S2, S2], atol=1e-15)
    np.testing.assert_allclose(f.g, [S2, -S2], atol=1e-15)


@pytest.mark.parametrize("name", WAVELETS)
def test_filter_invariants(name):
    f = make_filter(name)
    h, g, L = f.h, f.g, f.length
    assert L % 2 == 0
    assert h.sum() == pytest.approx(math.sqrt(2), abs=1e-12)
    assert np.sum(h ** 2) == pytest.approx(1.0, abs=1e-12)
    for m in range(1, L // 2):
        assert abs(np.dot(h[: L - 2 * m], h[2 * m:])) <= 1e-12
    np.testing.assert_array_equal(g, [(-1) ** k * h[L - 1 - k] for k in range(L)])


def test_d4_closed_form():
    r3 = math.sqrt(3)
    expected = np.array([1 + r3, 3 + r3, 3 - r3, 1 - r3]) / (4 * math.sqrt(2))
    np.testing.assert_allclose(make_filter("d4").h, expected, atol=1e-15)


def test_d8_has_four_vanishing_moments():
    g = make_filter("d8").g
    k = np.arange(8)
    for power in range(4):
        assert abs(np.sum(g * k ** power)) <= 1e-9 * max(1, 7 ** power)


def test_unknown_filter():
    with pytest.raises(InputError):
        make_filter("bogus")


def test_haar_small_examples():
    d = dwt_forward([1, 1, 1, 1], "haar")
    np.testing.assert_array_equal(d.details[1], [0.0, 0.0])
    np.testing.assert_array_equal(d.details[0], [0.0])
    np.testing.assert_allclose(d.scaling, [2.0], atol=1e-15)
    d = dwt_forward([1, -1], "haar")
    np.testing.assert_allclose(d.details[0], [math.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(d.scaling, [0.0], atol=1e-15)


def test_haar_matches_explicit_matrix():
    # 4x4 orthonormal Haar matrix, rows in flattened order [W_1, W_0, V_0]
    H = np.array([
        [S2, -S2, 0, 0],
        [0, 0, S2, -S2],
        [0.5, 0.5, -0.5, -0.5],
        [0.5, 0.5, 0.5, 0.5],
    ])
    y = np.array([3.0, -1.0, 2.0, 7.0])
    np.testing.assert_allclose(flatten(dwt_forward(y, "haar")), H @ y, atol=1e-14)


@pytest.mark.parametrize("name", WAVELETS)
@pytest.mark.parametrize("n", [2, 8, 32, 128])
def test_matches_matrix_pyramid(name, n, rng):
    y = rng.standard_normal(n)
    np.testing.assert_allclose(flatten(dwt_forward(y, name)), full_transform_oracle(y, name), atol=1e-12)


@pytest.mark.parametrize("name", WAVELETS)
def test_roundtrip_and_parseval_all_lengths(name, rng):
    for J in range(1, 11):
        y = rng.standard_normal(1 << J) * 10
        for j0 in {0, J // 2, J - 1}:
            d = dwt_forward(y, name, j0)
            assert np.max(np.abs(dwt_inverse(d) - y)) <= 1e-10
            theta = flatten(d)
            assert abs(theta @ theta - y @ y) <= 1e-10 * (y @ y)


def test_roundtrip_small_cases():
    np.testing.assert_allclose(dwt_inverse(dwt_forward([1, 2, 3, 4], "haar")), [1, 2, 3, 4], atol=1e-14)
    zero = unflatten(np.zeros(16), 4, 0, "d4")
    np.testing.assert_array_equal(dwt_inverse(zero), np.zeros(16))


@given(hnp.arrays(float, st.sampled_from([2, 4, 16, 64]), elements=st.floats(-1e3, 1e3)),
       st.floats(-1e3, 1e3))
def test_haar_constant_details_are_exactly_zero(y, c):
    d = dwt_forward(np.full(y.size, c), "haar")
    for w in d.details.values():
        assert np.all(w == 0.0)


@given(st.sampled_from(WAVELETS), st.integers(1, 8), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2 ** 31))
def test_linearity(name, J, alpha, beta, seed):
    gen = np.random.default_rng(seed)
    y, z = gen.standard_normal((2, 1 << J))
    lhs = flatten(dwt_forward(alpha * y + beta * z, name))
    rhs = alpha * flatten(dwt_forward(y, name)) + beta * flatten(dwt_forward(z, name))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(alpha) + abs(beta)) * 10)


def test_flatten_order():
    d = Decomposition(2, 0, {1: np.array([1.0, 2.0]), 0: np.array([3.0])}, np.array([4.0]))
    np.testing.assert_array_equal(flatten(d), [1, 2, 3, 4])
    d = Decomposition(2, 1, {1: np.array([1.0, 2.0])}, np.array([5.0, 6.0]))
    np.testing.assert_array_equal(flatten(d), [1, 2, 5, 6])
    d = Decomposition(2, 2, {}, np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_array_equal(flatten(d), [1, 2, 3, 4])


def test_partial_transform_layout(rng):
    y = rng.standard_normal(32)
    d = dwt_forward(y, "d4", j0=2)
    assert sorted(d.details) == [2, 3, 4]
    assert [d.details[j].size for j in d.levels()] == [16, 8, 4]
    assert d.scaling.size == 4
    d2 = unflatten(flatten(d), 5, 2, "d4")
    np.testing.assert_array_equal(flatten(d2), flatten(d))


def test_batched_transform_matches_single(rng):
    Y = rng.standard_normal((3, 64))
    batch = flatten(dwt_forward(Y, "d8"))
    for row, y in zip(batch, Y):
        np.testing.assert_allclose(row, flatten(dwt_forward(y, "d8")), atol=1e-15)


def test_input_errors():
    with pytest.raises(InputError, match="power of two"):
        dwt_forward(np.ones(6))
    with pytest.raises(InputError):
        dwt_forward(np.ones(8), j0=3)
    with pytest.raises(InputError):
        dwt_forward(np.ones(8), j0=-1)
    bad = Decomposition(2, 0, {1: np.zeros(2), 0: np.zeros(1)}, np.zeros(1))
    object.__setattr__(bad, "details", {1: np.zeros(2), 0: np.zeros(2)})
    with pytest.raises(InputError):
        dwt_inverse(bad)
    with pytest.raises(InputError):
        Decomposition(2, 0, {1: np.zeros(3), 0: np.zeros(1)}, np.zeros(1))
