from __future__ import annotations

import math

import numpy as np

from ._core import TestId, TestResult, as_bits, erfc, short_note


def spectral(bits) -> TestResult:
    """Discrete Fourier transform test for periodic features."""
    bits = as_bits(bits)
    n = bits.size
    if n < 2:
        return TestResult.not_applicable(TestId.SPECTRAL, "need at least two bits")
    x = 2.0 * bits - 1.0
    modulus = np.abs(np.fft.fft(x))[: n // 2]
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = int(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    p = erfc(abs(d) / math.sqrt(2))
    return TestResult(TestId.SPECTRAL, (p,), note=short_note(n, 1000), stats={"N1": n1, "d": d})
