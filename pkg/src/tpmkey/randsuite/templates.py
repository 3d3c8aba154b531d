"""Template matching tests (non-overlapping and overlapping)."""

from __future__ import annotations

import functools
import math

import numpy as np

from ._core import TestId, TestResult, as_bits, igamc


@functools.lru_cache(maxsize=None)
def aperiodic_templates(m: int) -> tuple[str, ...]:
    """All m-bit templates that cannot overlap a shifted copy of themselves,
    in ascending binary order (148 of them for m = 9)."""
    out = []
    for value in range(2 ** m):
        t = format(value, f"0{m}b")
        if not any(t[p:] == t[: m - p] for p in range(1, m)):
            out.append(t)
    return tuple(out)


def _window_values(bits: np.ndarray, m: int) -> np.ndarray:
    """Integer value of every length-m window (first bit most significant)."""
    n = bits.size - m + 1
    vals = np.zeros(max(n, 0), dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | bits[j: j + n]
    return vals


def _count_non_overlapping(positions: np.ndarray, m: int) -> int:
    count, next_free = 0, -1
    for pos in positions.tolist():
        if pos >= next_free:
            count += 1
            next_free = pos + m
    return count


def non_overlapping_template(bits, m: int = 9, n_blocks: int = 8, templates=None) -> TestResult:
    """Count non-overlapping matches of each aperiodic template per block.

    One P-value per template. The reported headline is the minimum.
    """
    bits = as_bits(bits)
    if templates is None:
        templates = aperiodic_templates(m)
    else:
        templates = tuple(templates)
        if any(len(t) != m for t in templates):
            raise ValueError(f"templates must all have length {m}")
    block = bits.size // n_blocks
    if block < m:
        return TestResult.not_applicable(TestId.NON_OVERLAPPING_TEMPLATE, "blocks shorter than template")
    windows = [_window_values(bits[i * block:(i + 1) * block], m) for i in range(n_blocks)]
    mu = (block - m + 1) / 2 ** m
    var = block * (1.0 / 2 ** m - (2 * m - 1) / 2.0 ** (2 * m))
    p_values = []
    for t in templates:
        target = int(t, 2)
        w = np.array([_count_non_overlapping(np.flatnonzero(win == target), m) for win in windows])
        chi2 = float(((w - mu) ** 2).sum() / var)
        p_values.append(igamc(n_blocks / 2.0, chi2 / 2.0))
    return TestResult(TestId.NON_OVERLAPPING_TEMPLATE, tuple(p_values), labels=templates,
                      stats={"block": block, "mu": mu, "var": var})


# corrected class probabilities for m=9, M=1032; the series below is a
# coarser approximation but it is what the published examples were computed with
_OVERLAPPING_PI_9_1032 = (0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865)


def overlapping_class_probabilities(m: int, block: int, classes: int, exact: bool = False) -> np.ndarray:
    """Probabilities of 0, 1, ..., classes-1 and >= classes overlapping matches."""
    if exact:
        if (m, block, classes) != (9, 1032, 5):
            raise ValueError("exact probabilities are only tabulated for m=9, M=1032, K=5")
        return np.array(_OVERLAPPING_PI_9_1032)
    eta = (block - m + 1) / 2.0 ** m / 2.0
    pi = [math.exp(-eta)]
    for u in range(1, classes):
        s = sum(math.comb(u - 1, l - 1) * eta ** l / math.factorial(l) for l in range(1, u + 1))
        pi.append(math.exp(-eta) / 2.0 ** u * s)
    pi.append(1.0 - sum(pi))
    return np.array(pi)


def overlapping_template(
    bits, m: int = 9, block: int = 1032, classes: int = 5, exact: bool = False
) -> TestResult:
    """Overlapping matches of the all-ones m-bit template per block."""
    bits = as_bits(bits)
    n_blocks = bits.size // block
    if n_blocks == 0:
        return TestResult.not_applicable(TestId.OVERLAPPING_TEMPLATE, "no complete block")
    blocks = bits[: n_blocks * block].reshape(n_blocks, block).astype(np.int64)
    # a window of m ones ends wherever the running run of ones reaches m
    run = np.zeros(n_blocks, dtype=np.int64)
    hits = np.zeros(n_blocks, dtype=np.int64)
    for col in blocks.T:
        run = (run + 1) * col
        hits += run >= m
    nu = np.bincount(np.minimum(hits, classes), minlength=classes + 1)
    pi = overlapping_class_probabilities(m, block, classes, exact)
    expected = n_blocks * pi
    chi2 = float(((nu - expected) ** 2 / expected).sum())
    p = igamc(classes / 2.0, chi2 / 2.0)
    return TestResult(TestId.OVERLAPPING_TEMPLATE, (p,), stats={"chi2": chi2, "nu": nu.tolist()})
