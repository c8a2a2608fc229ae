"""Matrix permanents of complex square matrices.

Three independent kernels are provided and cross-checked in the test suite:

* :func:`permanent_naive` enumerates all N! permutations (reference oracle).
* :func:`permanent_ryser` uses Ryser's inclusion-exclusion formula with a
  Gray-code walk over column subsets, O(2^N N).
* :func:`permanent_glynn` uses Glynn's +/-1 formula, also Gray-coded.

The scalar fast kernels are JIT compiled with numba when available. The
``*_batch`` variants evaluate a stack of matrices of shape (B, N, N) with
vectorized numpy and are what the quadrature routines call.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError, SizeLimitError

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NAIVE_MAX_N = 10
FAST_MAX_N = 30
DEFAULT_KERNEL = "ryser"
_NAIVE_CHUNK = 40320


def as_square_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidDimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("matrix has non-finite entries")
    return np.ascontiguousarray(a)


def _as_batch(mats) -> np.ndarray:
    a = np.asarray(mats, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2] or a.shape[1] < 1:
        raise InvalidDimensionError(f"expected a stack of square matrices (B, N, N), got shape {a.shape}")
    return a


def _check_size(n: int, limit: int, name: str) -> None:
    if n > limit:
        raise SizeLimitError(f"{name} permanent is capped at N = {limit}, got N = {n}")


def _permutation_chunks(n: int):
    perms = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perms, _NAIVE_CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def permanent_naive(m) -> complex:
    """Sum over all permutations sigma of prod_s m[sigma(s), s]."""
    a = as_square_matrix(m)
    n = a.shape[0]
    _check_size(n, NAIVE_MAX_N, "naive")
    cols = np.arange(n)
    total = 0j
    for perms in _permutation_chunks(n):
        total += np.prod(a[perms, cols], axis=1).sum()
    return complex(total)


def _ryser_py(a):
    n = a.shape[0]
    rowsum = np.zeros(n, dtype=np.complex128)
    total = 0j
    gray = 0
    size = 0
    for k in range(1, 1 << n):
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            size += 1
            for i in range(n):
                rowsum[i] += a[i, j]
        else:
            size -= 1
            for i in range(n):
                rowsum[i] -= a[i, j]
        prod = 1.0 + 0j
        for i in range(n):
            prod *= rowsum[i]
        if size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        total = -total
    return total


def _glynn_py(a):
    n = a.shape[0]
    colsum = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        for i in range(n):
            colsum[j] += a[i, j]
    delta = np.ones(n, dtype=np.int64)
    prod = 1.0 + 0j
    for j in range(n):
        prod *= colsum[j]
    total = prod
    sign = 1
    for k in range(1, 1 << (n - 1)):
        i = 1
        while not (k >> (i - 1)) & 1:
            i += 1
        for j in range(n):
            colsum[j] -= 2 * delta[i] * a[i, j]
        delta[i] = -delta[i]
        sign = -sign
        prod = 1.0 + 0j
        for j in range(n):
            prod *= colsum[j]
        if sign > 0:
            total += prod
        else:
            total -= prod
    return total / (1 << (n - 1))


if numba is not None:
    _ryser_kernel = numba.njit(cache=True)(_ryser_py)
    _glynn_kernel = numba.njit(cache=True)(_glynn_py)
else:  # pragma: no cover
    _ryser_kernel = _ryser_py
    _glynn_kernel = _glynn_py


def permanent_ryser(m) -> complex:
    """Ryser formula with Gray-code subset iteration."""
    a = as_square_matrix(m)
    _check_size(a.shape[0], FAST_MAX_N, "Ryser")
    return complex(_ryser_kernel(a))


def permanent_glynn(m) -> complex:
    """Glynn formula with Gray-code sign-vector iteration."""
    a = as_square_matrix(m)
    _check_size(a.shape[0], FAST_MAX_N, "Glynn")
    return complex(_glynn_kernel(a))


def permanent_naive_batch(mats) -> np.ndarray:
    a = _as_batch(mats)
    n = a.shape[1]
    _check_size(n, NAIVE_MAX_N, "naive")
    out = np.zeros(a.shape[0], dtype=complex)
    for perms in _permutation_chunks(n):
        for perm in perms:
            out += np.prod(a[:, perm, np.arange(n)], axis=1)
    return out


def permanent_ryser_batch(mats) -> np.ndarray:
    a = _as_batch(mats)
    n = a.shape[1]
    _check_size(n, FAST_MAX_N, "Ryser")
    rowsum = np.zeros(a.shape[:2], dtype=complex)
    total = np.zeros(a.shape[0], dtype=complex)
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            rowsum += a[:, :, j]
        else:
            rowsum -= a[:, :, j]
        if bin(gray).count("1") & 1:
            total -= rowsum.prod(axis=1)
        else:
            total += rowsum.prod(axis=1)
    return -total if n & 1 else total


def permanent_glynn_batch(mats) -> np.ndarray:
    a = _as_batch(mats)
    n = a.shape[1]
    _check_size(n, FAST_MAX_N, "Glynn")
    colsum = a.sum(axis=1)
    delta = np.ones(n)
    total = colsum.prod(axis=1)
    sign = 1
    for k in range(1, 1 << (n - 1)):
        i = (k & -k).bit_length()
        colsum -= 2 * delta[i] * a[:, i, :]
        delta[i] = -delta[i]
        sign = -sign
        total = total + colsum.prod(axis=1) if sign > 0 else total - colsum.prod(axis=1)
    return total / (1 << (n - 1))


KERNELS = {
    "naive": permanent_naive,
    "ryser": permanent_ryser,
    "glynn": permanent_glynn,
}

BATCH_KERNELS = {
    "naive": permanent_naive_batch,
    "ryser": permanent_ryser_batch,
    "glynn": permanent_glynn_batch,
}


def _lookup(table, kernel):
    try:
        return table[kernel]
    except KeyError:
        raise InvalidParameterError(f"unknown permanent kernel {kernel!r}; choose from {sorted(table)}") from None


def permanent(m, kernel: str = DEFAULT_KERNEL) -> complex:
    return _lookup(KERNELS, kernel)(m)


def permanent_batch(mats, kernel: str = DEFAULT_KERNEL) -> np.ndarray:
    return _lookup(BATCH_KERNELS, kernel)(mats)

