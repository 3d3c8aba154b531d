from __future__ import annotations

from dataclasses import dataclass, field

from ._core import TestId, TestResult, as_bits
from .complexity import linear_complexity
from .excursions import min_cycles, random_excursions, random_excursions_variant
from .frequency import block_frequency, cumulative_sums, longest_run, monobit, runs
from .matrix import binary_matrix_rank
from .serial import approximate_entropy, serial
from .spectral import spectral
from .templates import non_overlapping_template, overlapping_template
from .universal import MIN_LENGTH as UNIVERSAL_MIN_LENGTH
from .universal import maurer_universal

_FUNCS = {
    TestId.MONOBIT: monobit,
    TestId.BLOCK_FREQUENCY: block_frequency,
    TestId.RUNS: runs,
    TestId.LONGEST_RUN: longest_run,
    TestId.MATRIX_RANK: binary_matrix_rank,
    TestId.SPECTRAL: spectral,
    TestId.NON_OVERLAPPING_TEMPLATE: non_overlapping_template,
    TestId.OVERLAPPING_TEMPLATE: overlapping_template,
    TestId.MAURER_UNIVERSAL: maurer_universal,
    TestId.LINEAR_COMPLEXITY: linear_complexity,
    TestId.SERIAL: serial,
    TestId.APPROXIMATE_ENTROPY: approximate_entropy,
    TestId.CUMULATIVE_SUMS: cumulative_sums,
    TestId.RANDOM_EXCURSIONS: random_excursions,
    TestId.RANDOM_EXCURSIONS_VARIANT: random_excursions_variant,
}

# parameters used for key evaluation: 128-bit frequency blocks, 500-bit
# complexity blocks, reference defaults everywhere else
DEFAULT_PARAMS = {
    TestId.BLOCK_FREQUENCY: {"block_size": 128},
    TestId.LINEAR_COMPLEXITY: {"block_size": 500},
    TestId.NON_OVERLAPPING_TEMPLATE: {"m": 9, "n_blocks": 8},
    TestId.OVERLAPPING_TEMPLATE: {"m": 9, "block": 1032, "classes": 5},
    TestId.SERIAL: {"m": 16},
    TestId.APPROXIMATE_ENTROPY: {"m": 10},
}


def _min_length(id: TestId, params: dict) -> int:
    if id is TestId.BLOCK_FREQUENCY:
        return max(100, params["block_size"])
    if id is TestId.LONGEST_RUN:
        return 128
    if id is TestId.MATRIX_RANK:
        return 38 * 32 * 32
    if id is TestId.SPECTRAL:
        return 1000
    if id is TestId.NON_OVERLAPPING_TEMPLATE:
        return params["n_blocks"] * 100 * params["m"]
    if id is TestId.OVERLAPPING_TEMPLATE:
        # at least 100 blocks keeps every expected class count above 5
        return 100 * params["block"]
    if id is TestId.MAURER_UNIVERSAL:
        return UNIVERSAL_MIN_LENGTH
    if id is TestId.LINEAR_COMPLEXITY:
        return 200 * params["block_size"]
    if id is TestId.SERIAL:
        return 2 ** (params["m"] + 3)
    if id is TestId.APPROXIMATE_ENTROPY:
        return 2 ** (params["m"] + 6)
    return 100


@dataclass(frozen=True)
class TestSpec:
    __test__ = False

    id: TestId
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "id", TestId(self.id))
        merged = {**DEFAULT_PARAMS.get(self.id, {}), **self.params}
        object.__setattr__(self, "params", merged)

    @property
    def min_length(self) -> int:
        return _min_length(self.id, self.params)


def run_test(bits, spec: TestSpec | TestId | str) -> TestResult:
    """Run one test, returning NotApplicable when the input is too short."""
    if not isinstance(spec, TestSpec):
        spec = TestSpec(TestId(spec))
    bits = as_bits(bits)
    n = bits.size
    if n < spec.min_length:
        return TestResult.not_applicable(spec.id, f"n={n} below minimum {spec.min_length}")
    try:
        result = _FUNCS[spec.id](bits, **spec.params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {spec.id.value}: {spec.params}") from exc
    if spec.id in (TestId.RANDOM_EXCURSIONS, TestId.RANDOM_EXCURSIONS_VARIANT):
        j = result.stats["J"]
        if j < min_cycles(n):
            return TestResult.not_applicable(spec.id, result.note)
    return result


@dataclass
class SuiteReport:
    n_bits: int
    results: list[TestResult]

    def __getitem__(self, id) -> TestResult:
        id = TestId(id)
        for r in self.results:
            if r.id is id:
                return r
        raise KeyError(id)

    def passed_families(self) -> list[TestId]:
        return [r.id for r in self.results if r.passed]

    def to_dict(self) -> dict:
        return {"n_bits": self.n_bits, "results": [r.to_dict() for r in self.results]}


def run_suite(bits, params: dict | None = None) -> SuiteReport:
    """All fifteen tests in report order; ``params`` overrides per test id."""
    bits = as_bits(bits)
    if bits.size == 0:
        raise ValueError("cannot test an empty sequence")
    params = {TestId(k): v for k, v in (params or {}).items()}
    results = [run_test(bits, TestSpec(id, params.get(id, {}))) for id in TestId]
    return SuiteReport(int(bits.size), results)
