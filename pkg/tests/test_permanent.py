import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bosonic_qubits import permanent as pm
from bosonic_qubits.errors import InvalidDimensionError, InvalidParameterError, SizeLimitError

from oracles import permanent_by_definition

FAST = [pm.permanent_ryser, pm.permanent_glynn]
ALL = [pm.permanent_naive] + FAST


def random_disk_matrix(rng, n):
    r = np.sqrt(rng.random((n, n)))
    return r * np.exp(2j * np.pi * rng.random((n, n)))


def row_bound(m):
    """Error scale near cancellation: |per m| <= prod_i sum_j |m_ij| (and the column analogue)."""
    a = np.abs(m)
    return max(float(np.prod(a.sum(axis=1))), float(np.prod(a.sum(axis=0))), 1e-300)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_naive_matches_textbook_definition(rng):
    for n in range(1, 6):
        m = random_disk_matrix(rng, n)
        assert rel(pm.permanent_naive(m), permanent_by_definition(m)) < 1e-13


@pytest.mark.parametrize("kernel", ALL)
def test_small_cases(kernel):
    a, b, c, d = 1 + 2j, -0.5j, 3.0, 0.25 - 1j
    assert kernel([[a]]) == a
    assert kernel([[a, b], [c, d]]) == pytest.approx(a * d + b * c, rel=1e-15)
    assert kernel(np.ones((3, 3))) == pytest.approx(6.0)


@pytest.mark.parametrize("kernel", FAST)
@pytest.mark.parametrize("n", range(1, 13))
def test_identity_and_all_ones(kernel, n):
    assert kernel(np.eye(n)) == pytest.approx(1.0, abs=1e-12)
    assert rel(kernel(np.ones((n, n))), math.factorial(n)) < 1e-9


def test_glynn_ten_by_ten_ones():
    assert rel(pm.permanent_glynn(np.ones((10, 10))), 3628800) < 1e-9
    assert pm.permanent_glynn(np.eye(8)) == pytest.approx(1.0, abs=1e-12)


def test_ryser_matches_naive_on_random_6x6(rng):
    for _ in range(100):
        m = random_disk_matrix(rng, 6)
        assert rel(pm.permanent_ryser(m), pm.permanent_naive(m)) < 1e-10


def test_glynn_matches_ryser_on_random_7x7(rng):
    for _ in range(100):
        m = random_disk_matrix(rng, 7)
        assert rel(pm.permanent_glynn(m), pm.permanent_ryser(m)) < 1e-9


@pytest.mark.parametrize("kernel", ["naive", "ryser", "glynn"])
def test_batch_kernels_match_scalar(kernel, rng):
    for n in range(1, 7):
        mats = np.stack([random_disk_matrix(rng, n) for _ in range(5)])
        batch = pm.permanent_batch(mats, kernel)
        for m, value in zip(mats, batch):
            assert rel(value, pm.permanent_naive(m)) < 1e-10


def test_size_guards():
    with pytest.raises(SizeLimitError):
        pm.permanent_naive(np.eye(11))
    with pytest.raises(SizeLimitError):
        pm.permanent_ryser(np.eye(31))
    with pytest.raises(SizeLimitError):
        pm.permanent_glynn(np.eye(31))
    with pytest.raises(SizeLimitError):
        pm.permanent_ryser_batch(np.eye(31)[None])


def test_shape_and_kernel_errors():
    with pytest.raises(InvalidDimensionError):
        pm.permanent_ryser(np.ones((2, 3)))
    with pytest.raises(InvalidDimensionError):
        pm.permanent_naive(np.ones((0, 0)))
    with pytest.raises(InvalidParameterError):
        pm.permanent_glynn([[np.inf]])
    with pytest.raises(InvalidParameterError):
        pm.permanent(np.eye(2), kernel="gurvits")


def test_zero_row():
    m = np.random.default_rng(1).random((6, 6)) + 0j
    m[3] = 0
    assert pm.permanent_naive(m) == 0
    for kernel in FAST:
        assert abs(kernel(m)) < 1e-12


# unit-disk entries with bounded dynamic range (inclusion-exclusion kernels lose
# relative accuracy when entries span many orders of magnitude)
complex_entries = st.one_of(
    st.just(0j),
    st.builds(lambda r, phi: r * np.exp(1j * phi), st.floats(1e-3, 1.0), st.floats(0.0, 2 * np.pi)),
)
square6 = arrays(np.complex128, (6, 6), elements=complex_entries)


@settings(max_examples=60, deadline=None)
@given(square6)
def test_transpose_invariance(m):
    for kernel in ALL:
        assert abs(kernel(m.T) - kernel(m)) <= 1e-10 * row_bound(m)


@settings(max_examples=60, deadline=None)
@given(square6, complex_entries, st.integers(0, 5))
def test_row_scaling(m, c, row):
    scaled = m.copy()
    scaled[row] *= c
    for kernel in ALL:
        assert abs(kernel(scaled) - c * kernel(m)) <= 1e-10 * row_bound(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(np.complex128, (n, n), elements=complex_entries)))
def test_kernel_agreement(m):
    ref = pm.permanent_naive(m)
    for kernel in FAST:
        assert abs(kernel(m) - ref) <= 1e-9 * max(abs(ref), 1e-3 * row_bound(m))
