from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

ALPHA = 0.01


class TestId(str, enum.Enum):
    """The fifteen test families, in report order."""

    MONOBIT = "Monobit"
    BLOCK_FREQUENCY = "BlockFrequency"
    RUNS = "Runs"
    LONGEST_RUN = "LongestRun"
    MATRIX_RANK = "MatrixRank"
    SPECTRAL = "Spectral"
    NON_OVERLAPPING_TEMPLATE = "NonOverlappingTemplate"
    OVERLAPPING_TEMPLATE = "OverlappingTemplate"
    MAURER_UNIVERSAL = "MaurerUniversal"
    LINEAR_COMPLEXITY = "LinearComplexity"
    SERIAL = "Serial"
    APPROXIMATE_ENTROPY = "ApproximateEntropy"
    CUMULATIVE_SUMS = "CumulativeSums"
    RANDOM_EXCURSIONS = "RandomExcursions"
    RANDOM_EXCURSIONS_VARIANT = "RandomExcursionsVariant"


TestId.__test__ = False  # keep pytest from collecting it


def family_threshold(k: int, alpha: float = ALPHA) -> int:
    """Fewest passing P-values out of ``k`` for a family to count as passed.

    Lower edge of the three-sigma interval around the expected pass proportion
    ``1 - alpha``; one P-value must pass, 2..8 must all pass, 18 may lose one,
    148 templates may lose five.
    """
    p = 1.0 - alpha
    return math.ceil(k * (p - 3.0 * math.sqrt(p * alpha / k)) - 1e-9)


@dataclass
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    id: TestId
    p_values: tuple[float, ...] = ()
    labels: tuple[str, ...] = ()
    applicable: bool = True
    note: str | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p_values = tuple(float(min(max(p, 0.0), 1.0)) for p in self.p_values)
        if not self.labels:
            self.labels = tuple("" for _ in self.p_values)

    @classmethod
    def not_applicable(cls, id: TestId, reason: str) -> TestResult:
        return cls(id, applicable=False, note=reason)

    @property
    def passes(self) -> tuple[bool, ...]:
        return tuple(p >= ALPHA for p in self.p_values)

    @property
    def p_value(self) -> float | None:
        """Smallest P-value; the single number shown for multi-valued tests."""
        return min(self.p_values) if self.p_values else None

    @property
    def failures(self) -> int:
        return self.passes.count(False)

    @property
    def passed(self) -> bool:
        if not self.applicable or not self.p_values:
            return False
        return sum(self.passes) >= family_threshold(len(self.p_values))

    def to_dict(self) -> dict:
        return {
            "id": self.id.value,
            "applicable": self.applicable,
            "p_values": list(self.p_values),
            "labels": list(self.labels),
            "passes": list(self.passes),
            "passed": self.passed,
            "note": self.note,
        }


def as_bits(data) -> np.ndarray:
    """Coerce a '0101' string, bytes-free iterable or array into uint8 0/1 values."""
    if isinstance(data, str):
        data = "".join(data.split())
        if set(data) - {"0", "1"}:
            raise ValueError("bit strings may only contain '0' and '1'")
        return np.frombuffer(data.encode(), dtype=np.uint8) - ord("0")
    bits = np.asarray(data)
    if bits.ndim != 1:
        bits = bits.ravel()
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0 or 1")
    return bits.astype(np.uint8, copy=False)


def igamc(a: float, x: float) -> float:
    return float(special.gammaincc(a, x))


def erfc(x: float) -> float:
    return float(special.erfc(x))


def short_note(n: int, minimum: int) -> str | None:
    if n < minimum:
        return f"n={n} below recommended minimum {minimum}"
    return None
