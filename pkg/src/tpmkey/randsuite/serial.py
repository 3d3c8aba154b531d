"""Overlapping-pattern tests: serial and approximate entropy."""

from __future__ import annotations

import math

import numpy as np

from ._core import TestId, TestResult, as_bits, igamc


def pattern_counts(bits: np.ndarray, m: int) -> np.ndarray:
    """Counts of every m-bit pattern over the sequence wrapped by m-1 bits."""
    n = bits.size
    if m == 0:
        return np.array([n])
    ext = np.concatenate([bits, bits[: m - 1]]).astype(np.int64)
    vals = np.zeros(n, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[j: j + n]
    return np.bincount(vals, minlength=2 ** m)


def _psi2_scaled(bits: np.ndarray, m: int) -> int:
    """n times the psi-squared statistic, kept as an exact integer."""
    if m <= 0:
        return 0
    n = bits.size
    counts = pattern_counts(bits, m)
    return (1 << m) * int((counts * counts).sum()) - n * n


def serial(bits, m: int = 16) -> TestResult:
    bits = as_bits(bits)
    n = bits.size
    if m < 2:
        raise ValueError("serial test needs m >= 2")
    if n < m:
        return TestResult.not_applicable(TestId.SERIAL, f"need at least {m} bits")
    psi_m, psi_m1, psi_m2 = (_psi2_scaled(bits, k) for k in (m, m - 1, m - 2))
    del1 = (psi_m - psi_m1) / n
    del2 = (psi_m - 2 * psi_m1 + psi_m2) / n
    p1 = igamc(2.0 ** (m - 2), del1 / 2.0)
    p2 = igamc(2.0 ** (m - 3), del2 / 2.0)
    note = None if m < int(math.log2(n)) - 2 else f"m={m} too large for n={n}"
    return TestResult(TestId.SERIAL, (p1, p2), labels=("P1", "P2"), note=note,
                      stats={"del1": del1, "del2": del2})


def _phi(bits: np.ndarray, m: int) -> float:
    counts = pattern_counts(bits, m)
    c = counts[counts > 0] / bits.size
    return float((c * np.log(c)).sum())


def approximate_entropy(bits, m: int = 10) -> TestResult:
    bits = as_bits(bits)
    n = bits.size
    if n <= m:
        return TestResult.not_applicable(TestId.APPROXIMATE_ENTROPY, f"need more than {m} bits")
    apen = _phi(bits, m) - _phi(bits, m + 1)
    chi2 = max(0.0, 2.0 * n * (math.log(2) - apen))
    p = igamc(2.0 ** (m - 1), chi2 / 2.0)
    note = None if m < int(math.log2(n)) - 5 else f"m={m} too large for n={n}"
    return TestResult(TestId.APPROXIMATE_ENTROPY, (p,), note=note, stats={"ApEn": apen, "chi2": chi2})
