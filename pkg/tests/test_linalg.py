"""Exact kernel dimensions: fraction-free vs certified modular engines."""

from fractions import Fraction

import numpy as np
import pytest

from hhh4.linalg import (
    PRIMES,
    ExactRankError,
    kernel_dim,
    kernel_dim_bareiss,
    kernel_dim_certified,
    rank_bareiss,
)


def kernel_dim_fractions(A):
    """Independent reference: textbook Gauss over Fraction."""
    M = [[Fraction(int(x)) for x in row] for row in A]
    nr = len(M)
    nc = len(M[0]) if M else 0
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(nr):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
        if r == nr:
            break
    return nc - r


def test_primes_are_20_bit_primes():
    assert len(PRIMES) == 16
    for p in PRIMES:
        assert p < (1 << 20)
        assert all(p % f for f in range(2, int(p ** 0.5) + 1))


def test_known_small_matrices():
    A = np.array([[1, 2], [2, 4]], dtype=np.int64)
    assert kernel_dim_bareiss(A) == kernel_dim_certified(A) == 1
    assert rank_bareiss([[1, 2], [2, 4]]) == 1
    Z = np.zeros((3, 4), dtype=np.int64)
    assert kernel_dim_bareiss(Z) == kernel_dim_certified(Z) == 4
    I = np.eye(3, dtype=np.int64)
    assert kernel_dim_bareiss(I) == kernel_dim_certified(I) == 0


def test_empty_matrix_needs_ncols():
    assert kernel_dim([], ncols=5) == 5
    with pytest.raises(ValueError):
        kernel_dim([])


def test_rational_rref_entries_lift():
    # true reduced form has entries 3/2: exercises rational reconstruction
    A = np.array([[2, 3, 0], [0, 0, 5]], dtype=np.int64)
    assert kernel_dim_certified(A) == 1
    assert kernel_dim_fractions(A) == 1


def test_prime_dividing_entries():
    p = PRIMES[0]
    A = np.array([[p, 0], [0, 1]], dtype=np.int64)
    # first prime sees a rank drop; a later prime certifies the truth
    assert kernel_dim_certified(A) == 0


@pytest.mark.parametrize("seed", range(6))
def test_random_cross_check(seed):
    rng = np.random.default_rng(seed)
    for _ in range(12):
        nr = int(rng.integers(1, 12))
        nc = int(rng.integers(1, 12))
        rank = int(rng.integers(0, min(nr, nc) + 1))
        A = (rng.integers(-4, 5, (nr, rank)) @ rng.integers(-4, 5, (rank, nc))).astype(np.int64)
        expected = kernel_dim_fractions(A)
        assert kernel_dim_bareiss(A) == expected
        assert kernel_dim_certified(A) == expected
        assert kernel_dim(A, method="auto") == expected


def test_duplicate_rows_ignored():
    A = [[1, 2, 3], [1, 2, 3], [0, 1, 1], [0, 0, 0]]
    assert kernel_dim_bareiss(A) == 1


def test_certified_gives_up_honestly():
    # a generic matrix whose reduced form has huge rational entries cannot be
    # certified from a handful of 20-bit primes; the failure must be loud,
    # never a silently wrong dimension
    rng = np.random.default_rng(7)
    A = (rng.integers(-9, 10, (40, 30)) @ rng.integers(-9, 10, (30, 60))).astype(np.int64)
    try:
        d = kernel_dim_certified(A, max_primes=2)
    except ExactRankError:
        return
    assert d == kernel_dim_fractions(A)
