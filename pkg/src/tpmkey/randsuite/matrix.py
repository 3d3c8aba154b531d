from __future__ import annotations

import math

import numpy as np

from ._core import TestId, TestResult, as_bits


def gf2_rank(rows) -> int:
    """Rank over GF(2) of a matrix whose rows are given as Python ints."""
    pivots: dict[int, int] = {}
    for r in rows:
        r = int(r)
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                break
            r ^= pivots[top]
    return len(pivots)


def rank_probability(r: int, rows: int, cols: int) -> float:
    """Probability that a uniformly random rows x cols binary matrix has rank r."""
    log2p = r * (rows + cols - r) - rows * cols
    prod = 1.0
    for i in range(r):
        prod *= (1 - 2.0 ** (i - rows)) * (1 - 2.0 ** (i - cols)) / (1 - 2.0 ** (i - r))
    return 2.0 ** log2p * prod


def binary_matrix_rank(bits, rows: int = 32, cols: int = 32,
                       reference_probabilities: bool = False) -> TestResult:
    """Rank test over rows x cols matrices.

    With ``reference_probabilities`` the class probabilities stay those of a
    32 x 32 matrix whatever the shape, as the reference tool does.
    """
    bits = as_bits(bits)
    n_mats = bits.size // (rows * cols)
    if n_mats == 0:
        return TestResult.not_applicable(TestId.MATRIX_RANK, "no complete matrix")
    # zero padding on the right of each packed row shifts all rows alike
    packed = np.packbits(bits[: n_mats * rows * cols].reshape(n_mats * rows, cols), axis=1)
    row_ints = [int.from_bytes(r, "big") for r in map(bytes, packed)]
    ranks = np.array([gf2_rank(row_ints[i * rows:(i + 1) * rows]) for i in range(n_mats)])
    full = min(rows, cols)
    f_full = int(np.count_nonzero(ranks == full))
    f_minus = int(np.count_nonzero(ranks == full - 1))
    observed = np.array([f_full, f_minus, n_mats - f_full - f_minus], dtype=float)
    shape = (32, 32, 32) if reference_probabilities else (full, rows, cols)
    p_full = rank_probability(*shape)
    p_minus = rank_probability(shape[0] - 1, *shape[1:])
    probs = np.array([p_full, p_minus, 1.0 - p_full - p_minus])
    expected = n_mats * probs
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    p = math.exp(-chi2 / 2.0)
    note = None if n_mats >= 38 else f"only {n_mats} matrices, 38 recommended"
    return TestResult(TestId.MATRIX_RANK, (p,), note=note,
                      stats={"chi2": chi2, "counts": observed.astype(int).tolist()})
