"""Random excursion tests on the +-1 random walk of the sequence."""

from __future__ import annotations

import math

import numpy as np

from ._core import TestId, TestResult, as_bits, erfc, igamc

STATES = (-4, -3, -2, -1, 1, 2, 3, 4)
VARIANT_STATES = tuple(x for x in range(-9, 10) if x != 0)


def min_cycles(n: int) -> float:
    return max(0.005 * math.sqrt(n), 500)


def _walk(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Partial sums, the cycle index of each step, and the cycle count J."""
    s = np.cumsum(2 * bits.astype(np.int64) - 1)
    # a cycle ends at each return to zero, plus an implicit return after the end
    ends = s == 0
    cycle = np.concatenate([[0], np.cumsum(ends)[:-1]])
    j = int(ends.sum()) + (0 if s[-1] == 0 else 1)
    return s, cycle, j


def excursion_probabilities(x: int) -> np.ndarray:
    """P(state x is visited exactly k times in a cycle), k = 0..4 and >= 5."""
    a = 1.0 / (2 * abs(x))
    pi = [1 - a] + [a * a * (1 - a) ** (k - 1) for k in range(1, 5)] + [a * (1 - a) ** 4]
    return np.array(pi)


def _cycles_note(n: int, j: int) -> str | None:
    if j < min_cycles(n):
        return f"J={j} cycles below {min_cycles(n):.0f}"
    return None


def random_excursions(bits) -> TestResult:
    bits = as_bits(bits)
    if bits.size == 0:
        return TestResult.not_applicable(TestId.RANDOM_EXCURSIONS, "empty sequence")
    s, cycle, j = _walk(bits)
    p_values = []
    for x in STATES:
        visits = np.bincount(cycle[s == x], minlength=j)
        nu = np.bincount(np.minimum(visits, 5), minlength=6)
        expected = j * excursion_probabilities(x)
        chi2 = float(((nu - expected) ** 2 / expected).sum())
        p_values.append(igamc(2.5, chi2 / 2.0))
    return TestResult(TestId.RANDOM_EXCURSIONS, tuple(p_values), labels=tuple(map(str, STATES)),
                      note=_cycles_note(bits.size, j), stats={"J": j})


def random_excursions_variant(bits) -> TestResult:
    bits = as_bits(bits)
    if bits.size == 0:
        return TestResult.not_applicable(TestId.RANDOM_EXCURSIONS_VARIANT, "empty sequence")
    s, _, j = _walk(bits)
    counts = np.bincount(s + bits.size, minlength=2 * bits.size + 1)
    p_values = []
    for x in VARIANT_STATES:
        xi = int(counts[x + bits.size])
        p_values.append(erfc(abs(xi - j) / math.sqrt(2.0 * j * (4 * abs(x) - 2))))
    return TestResult(TestId.RANDOM_EXCURSIONS_VARIANT, tuple(p_values),
                      labels=tuple(map(str, VARIANT_STATES)),
                      note=_cycles_note(bits.size, j), stats={"J": j})
