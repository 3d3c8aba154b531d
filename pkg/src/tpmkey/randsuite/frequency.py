"""Frequency-style tests: monobit, block frequency, runs, longest run, cusums."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from ._core import TestId, TestResult, as_bits, erfc, igamc, short_note


def monobit(bits) -> TestResult:
    bits = as_bits(bits)
    n = bits.size
    if n == 0:
        raise ValueError("monobit needs at least one bit")
    s = 2 * int(bits.sum()) - n
    s_obs = abs(s) / math.sqrt(n)
    p = erfc(s_obs / math.sqrt(2))
    return TestResult(TestId.MONOBIT, (p,), note=short_note(n, 100), stats={"S_n": s})


def block_frequency(bits, block_size: int = 128) -> TestResult:
    bits = as_bits(bits)
    n_blocks = bits.size // block_size
    if n_blocks == 0:
        return TestResult.not_applicable(TestId.BLOCK_FREQUENCY, "no complete block")
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    pi = blocks.sum(axis=1) / block_size
    chi2 = 4.0 * block_size * float(((pi - 0.5) ** 2).sum())
    p = igamc(n_blocks / 2.0, chi2 / 2.0)
    return TestResult(TestId.BLOCK_FREQUENCY, (p,), stats={"chi2": chi2, "blocks": n_blocks})


def runs(bits) -> TestResult:
    bits = as_bits(bits)
    n = bits.size
    if n < 2:
        return TestResult.not_applicable(TestId.RUNS, "need at least two bits")
    pi = bits.sum() / n
    tau = 2.0 / math.sqrt(n)
    if abs(pi - 0.5) >= tau:
        # frequency prerequisite failed; the runs statistic is meaningless
        return TestResult(TestId.RUNS, (0.0,), note="frequency pretest failed", stats={"pi": pi})
    v_obs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v_obs - 2.0 * n * pi * (1 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)
    p = erfc(num / den)
    return TestResult(TestId.RUNS, (p,), note=short_note(n, 100), stats={"V_n": v_obs, "pi": pi})


# (block length, longest-run class bounds low..high, class probabilities)
_LONGEST_RUN_TABLES = {
    8: (1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
    128: (4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    10_000: (10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
}


def _longest_run_of_ones(blocks: np.ndarray) -> np.ndarray:
    # run length ending at each position, maximised per row
    best = np.zeros(blocks.shape[0], dtype=np.int64)
    current = np.zeros(blocks.shape[0], dtype=np.int64)
    for col in blocks.T:
        current = (current + 1) * col
        np.maximum(best, current, out=best)
    return best


def longest_run(bits, block_size: int | None = None) -> TestResult:
    bits = as_bits(bits)
    n = bits.size
    if block_size is None:
        if n < 128:
            return TestResult.not_applicable(TestId.LONGEST_RUN, "need at least 128 bits")
        block_size = 8 if n < 6272 else 128 if n < 750_000 else 10_000
    if block_size not in _LONGEST_RUN_TABLES:
        raise ValueError(f"unsupported block size {block_size}")
    low, high, pi = _LONGEST_RUN_TABLES[block_size]
    n_blocks = n // block_size
    if n_blocks == 0:
        return TestResult.not_applicable(TestId.LONGEST_RUN, "no complete block")
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    longest = np.clip(_longest_run_of_ones(blocks), low, high)
    nu = np.bincount(longest - low, minlength=high - low + 1)
    expected = n_blocks * np.asarray(pi)
    chi2 = float(((nu - expected) ** 2 / expected).sum())
    p = igamc((len(pi) - 1) / 2.0, chi2 / 2.0)
    return TestResult(
        TestId.LONGEST_RUN, (p,), stats={"chi2": chi2, "nu": nu.tolist(), "block_size": block_size}
    )


def _trunc_div(a: int, b: int) -> int:
    """Integer division rounding toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _cusum_p(n: int, z: int) -> float:
    sqrt_n = math.sqrt(n)
    phi = stats.norm.cdf
    upper = _trunc_div(_trunc_div(n, z) - 1, 4)
    k1 = np.arange(_trunc_div(_trunc_div(-n, z) + 1, 4), upper + 1)
    k2 = np.arange(_trunc_div(_trunc_div(-n, z) - 3, 4), upper + 1)
    s1 = (phi((4 * k1 + 1) * z / sqrt_n) - phi((4 * k1 - 1) * z / sqrt_n)).sum()
    s2 = (phi((4 * k2 + 3) * z / sqrt_n) - phi((4 * k2 + 1) * z / sqrt_n)).sum()
    return float(1.0 - s1 + s2)


def cumulative_sums(bits) -> TestResult:
    """Forward and backward cumulative-sum excursion test."""
    bits = as_bits(bits)
    n = bits.size
    if n == 0:
        raise ValueError("cumulative sums needs at least one bit")
    x = 2 * bits.astype(np.int64) - 1
    z_fwd = int(np.abs(np.cumsum(x)).max())
    z_bwd = int(np.abs(np.cumsum(x[::-1])).max())
    p = (_cusum_p(n, z_fwd), _cusum_p(n, z_bwd))
    return TestResult(
        TestId.CUMULATIVE_SUMS, p, labels=("forward", "backward"),
        note=short_note(n, 100), stats={"z": (z_fwd, z_bwd)},
    )
