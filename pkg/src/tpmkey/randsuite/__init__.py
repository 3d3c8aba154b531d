"""Statistical randomness tests after NIST SP 800-22."""

from ._core import ALPHA, TestId, TestResult, as_bits, family_threshold
from .complexity import berlekamp_massey, linear_complexity
from .excursions import random_excursions, random_excursions_variant
from .frequency import block_frequency, cumulative_sums, longest_run, monobit, runs
from .matrix import binary_matrix_rank, gf2_rank
from .serial import approximate_entropy, serial
from .spectral import spectral
from .suite import SuiteReport, TestSpec, run_suite, run_test
from .templates import aperiodic_templates, non_overlapping_template, overlapping_template
from .universal import maurer_universal

__all__ = [
    "ALPHA", "TestId", "TestResult", "TestSpec", "SuiteReport", "as_bits", "family_threshold",
    "run_test", "run_suite", "monobit", "block_frequency", "runs", "longest_run",
    "binary_matrix_rank", "gf2_rank", "spectral", "non_overlapping_template",
    "overlapping_template", "aperiodic_templates", "maurer_universal", "linear_complexity",
    "berlekamp_massey", "serial", "approximate_entropy", "cumulative_sums",
    "random_excursions", "random_excursions_variant",
]
