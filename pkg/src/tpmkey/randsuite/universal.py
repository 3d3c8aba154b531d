from __future__ import annotations

import math

import numpy as np

from ._core import TestId, TestResult, as_bits, erfc

# block length L -> (expected value, variance) of the statistic
_EXPECTED = {
    1: (0.7326495, 0.690), 2: (1.5374383, 1.338), 3: (2.4016068, 1.901),
    4: (3.3112247, 2.358), 5: (4.2534266, 2.705), 6: (5.2177052, 2.954),
    7: (6.1962507, 3.125), 8: (7.1836656, 3.238), 9: (8.1764248, 3.311),
    10: (9.1723243, 3.356), 11: (10.170032, 3.384), 12: (11.168765, 3.401),
    13: (12.168070, 3.410), 14: (13.167693, 3.416), 15: (14.167488, 3.419),
    16: (15.167379, 3.421),
}

# smallest n for which each block length is used
_THRESHOLDS = [
    (1_059_061_760, 16), (496_435_200, 15), (231_669_760, 14), (107_560_960, 13),
    (49_643_520, 12), (22_753_280, 11), (10_342_400, 10), (4_654_080, 9),
    (2_068_480, 8), (904_960, 7), (387_840, 6),
]

MIN_LENGTH = 387_840


def choose_block_length(n: int) -> int | None:
    for threshold, L in _THRESHOLDS:
        if n >= threshold:
            return L
    return None


def maurer_universal(bits, L: int | None = None, Q: int | None = None) -> TestResult:
    """Maurer's universal statistical test.

    L and Q are picked from n when omitted; below 387,840 bits no block
    length is defined and the test is not applicable.
    """
    bits = as_bits(bits)
    n = bits.size
    if L is None:
        L = choose_block_length(n)
        if L is None:
            return TestResult.not_applicable(TestId.MAURER_UNIVERSAL, f"n={n} below {MIN_LENGTH}")
    if L not in _EXPECTED:
        raise ValueError(f"block length must be 1..16, got {L}")
    if Q is None:
        Q = 10 * 2 ** L
    total_blocks = n // L
    K = total_blocks - Q
    if K <= 0:
        return TestResult.not_applicable(TestId.MAURER_UNIVERSAL, "no test blocks after initialization")
    blocks = bits[: total_blocks * L].reshape(total_blocks, L).astype(np.int64)
    values = blocks @ (1 << np.arange(L - 1, -1, -1))
    last_seen = np.zeros(2 ** L, dtype=np.int64)
    last_seen[values[:Q]] = np.arange(1, Q + 1)  # later duplicates overwrite earlier ones
    total = 0.0
    for i, v in enumerate(values[Q:].tolist(), start=Q + 1):
        total += math.log2(i - last_seen[v])
        last_seen[v] = i
    fn = total / K
    expected, variance = _EXPECTED[L]
    c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(variance / K)
    p = erfc(abs(fn - expected) / (math.sqrt(2) * sigma))
    return TestResult(TestId.MAURER_UNIVERSAL, (p,), stats={"fn": fn, "L": L, "Q": Q, "K": K})
