from __future__ import annotations

import numpy as np

from ._core import TestId, TestResult, as_bits, igamc

# first class rounded as in the reference implementation
_PI = np.array([0.01047, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833])


def berlekamp_massey(bits) -> int:
    """Length of the shortest LFSR generating ``bits`` over GF(2).

    Connection polynomials are held as Python ints, bit i = coefficient of x^i;
    the sequence window is kept reversed so a discrepancy is one AND + popcount.
    """
    c, b = 1, 1
    L, m = 0, -1
    window = 0  # bit j holds s[n - j]
    for n, s in enumerate(as_bits(bits).tolist()):
        window = (window << 1) | s
        d = bin(c & window).count("1") & 1
        if d:
            t = c
            c ^= b << (n - m)
            if 2 * L <= n:
                L = n + 1 - L
                b, m = t, n
    return L


def linear_complexity(bits, block_size: int = 500) -> TestResult:
    bits = as_bits(bits)
    M = block_size
    n_blocks = bits.size // M
    if n_blocks == 0:
        return TestResult.not_applicable(TestId.LINEAR_COMPLEXITY, "no complete block")
    blocks = bits[: n_blocks * M].reshape(n_blocks, M)
    lc = np.array([berlekamp_massey(blk) for blk in blocks])
    mu = M / 2.0 + (9 + (-1) ** (M + 1)) / 36.0 - (M / 3.0 + 2 / 9.0) / 2.0 ** M
    t = (-1) ** M * (lc - mu) + 2 / 9.0
    edges = np.array([-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])
    nu = np.bincount(np.searchsorted(edges, t, side="left"), minlength=7)
    expected = n_blocks * _PI
    chi2 = float(((nu - expected) ** 2 / expected).sum())
    p = igamc(3.0, chi2 / 2.0)
    note = None if n_blocks >= 200 else f"only {n_blocks} blocks, 200 recommended"
    return TestResult(TestId.LINEAR_COMPLEXITY, (p,), note=note, stats={"chi2": chi2, "nu": nu.tolist()})
