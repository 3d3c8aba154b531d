"""Randomness suite checks: published worked examples plus independent oracles."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpmkey.randsuite import (
    TestId,
    TestSpec,
    aperiodic_templates,
    approximate_entropy,
    as_bits,
    berlekamp_massey,
    binary_matrix_rank,
    block_frequency,
    cumulative_sums,
    family_threshold,
    gf2_rank,
    linear_complexity,
    longest_run,
    maurer_universal,
    monobit,
    non_overlapping_template,
    overlapping_template,
    random_excursions,
    random_excursions_variant,
    run_suite,
    run_test,
    runs,
    serial,
    spectral,
)
from tpmkey.randsuite.matrix import rank_probability
from tpmkey.randsuite.templates import overlapping_class_probabilities

TOL = 1e-3
E100 = (
    "1100100100001111110110101010001000100001011010001100001000110100"
    "110001001100011001100010100010111000"
)
LONGEST128 = (
    "1100110000010101011011000100110011100000000000100100110101010001"
    "0001001111010110100000001101011111001100111001101101100010110010"
)


def close(result, expected):
    assert np.allclose(result.p_values, np.atleast_1d(expected), atol=TOL, rtol=0), result.p_values


# worked examples on short strings

@pytest.mark.parametrize(
    "func, args, expected",
    [
        (monobit, ("1011010101",), 0.527089),
        (monobit, (E100,), 0.109599),
        (block_frequency, ("0110011010", 3), 0.801252),
        (block_frequency, (E100, 10), 0.706438),
        (runs, ("1001101011",), 0.147232),
        (runs, (E100,), 0.500798),
        (longest_run, (LONGEST128,), 0.180609),
        (non_overlapping_template, ("10100100101110010110", 3, 2, ["001"]), 0.344154),
        (serial, ("0011011101", 3), (0.808792, 0.670320)),
        (approximate_entropy, ("0100110101", 3), 0.261961),
        (approximate_entropy, (E100, 2), 0.235301),
        (cumulative_sums, (E100,), (0.219194, 0.114866)),
    ],
    ids=lambda v: getattr(v, "__name__", None) or "",
)
def test_short_worked_examples(func, args, expected):
    close(func(*args), expected)


def test_rank_small_example_uses_32x32_probabilities():
    r = binary_matrix_rank("01011001001010101101", 3, 3, reference_probabilities=True)
    close(r, 0.741948)
    assert r.stats["counts"] == [1, 1, 0]


def test_universal_small_example_statistic():
    # the published P-value for this example leaves out the variance correction,
    # so only the test statistic is comparable
    assert maurer_universal("01011010011101010111", 2, 4).stats["fn"] == pytest.approx(1.1949875, abs=1e-6)


def test_cusum_ten_bits_forward():
    assert cumulative_sums("1011010111").p_values[0] == pytest.approx(0.4116588, abs=TOL)


def test_excursions_ten_bits():
    # states -4..-1, 1..4 ; x = +1 sits at index 4
    assert random_excursions("0110110101").p_values[4] == pytest.approx(0.502529, abs=TOL)
    # states -9..-1, 1..9 ; x = +1 sits at index 9
    assert random_excursions_variant("0110110101").p_values[9] == pytest.approx(0.683091, abs=TOL)


# worked examples on the binary expansion of e

@pytest.mark.slow
class TestExpansionOfE:
    def test_monobit(self, e_bits):
        close(monobit(e_bits), 0.953749)

    def test_block_frequency(self, e_bits):
        close(block_frequency(e_bits, 128), 0.211072)

    def test_runs(self, e_bits):
        close(runs(e_bits), 0.561917)

    def test_longest_run(self, e_bits):
        close(longest_run(e_bits), 0.718945)

    def test_matrix_rank(self, e_bits):
        close(binary_matrix_rank(e_bits[:100_000]), 0.532069)
        close(binary_matrix_rank(e_bits), 0.306156)

    def test_spectral(self, e_bits):
        close(spectral(e_bits), 0.847187)

    def test_non_overlapping(self, e_bits):
        close(non_overlapping_template(e_bits, 9, 8, ["000000001"]), 0.078790)

    def test_overlapping(self, e_bits):
        close(overlapping_template(e_bits), 0.110434)

    def test_universal(self, e_bits):
        close(maurer_universal(e_bits), 0.282568)

    def test_linear_complexity(self, e_bits):
        close(linear_complexity(e_bits, 1000), 0.845406)

    def test_serial(self, e_bits):
        close(serial(e_bits, 2), (0.843764, 0.561915))

    def test_approximate_entropy(self, e_bits):
        close(approximate_entropy(e_bits, 10), 0.700073)

    def test_cumulative_sums(self, e_bits):
        close(cumulative_sums(e_bits), (0.669887, 0.724266))

    def test_random_excursions(self, e_bits):
        close(random_excursions(e_bits), (
            0.573306, 0.197996, 0.164011, 0.007779, 0.786868, 0.440912, 0.797854, 0.778186))

    def test_random_excursions_variant(self, e_bits):
        close(random_excursions_variant(e_bits), (
            0.858946, 0.794755, 0.576249, 0.493417, 0.633873, 0.917283, 0.934708, 0.816012,
            0.826009, 0.137861, 0.200642, 0.441254, 0.939291, 0.505683, 0.445935, 0.512207,
            0.538635, 0.593930))


# independent oracles

def lfsr_generates(bits, taps):
    L = len(taps)
    return all(
        bits[i] == sum(taps[j] * bits[i - 1 - j] for j in range(L)) % 2
        for i in range(L, len(bits))
    )


def brute_linear_complexity(bits):
    for L in range(len(bits) + 1):
        if any(lfsr_generates(bits, taps) for taps in itertools.product((0, 1), repeat=L)):
            return L
    return len(bits)


def test_berlekamp_massey_example():
    assert berlekamp_massey("1101011110001") == 4


@given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
@settings(max_examples=150)
def test_berlekamp_massey_matches_exhaustive_lfsr_search(bits):
    assert berlekamp_massey(bits) == brute_linear_complexity(bits)


def numpy_rank_gf2(matrix):
    m = np.array(matrix, dtype=bool)
    rank = 0
    for col in range(m.shape[1]):
        pivots = np.nonzero(m[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        m[[rank, p]] = m[[p, rank]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


def test_gf2_rank_matches_elimination_oracle():
    rng = np.random.default_rng(0)
    for _ in range(300):
        rows, cols = rng.integers(1, 9, size=2)
        m = rng.integers(0, 2, size=(rows, cols))
        as_ints = [int("".join(map(str, row)), 2) for row in m]
        assert gf2_rank(as_ints) == numpy_rank_gf2(m)


def test_gf2_rank_small_enumeration():
    # fraction of full-rank 3x3 GF(2) matrices is 168/512
    full = sum(
        gf2_rank(list(rows)) == 3 for rows in itertools.product(range(8), repeat=3)
    )
    assert full == 168


def test_rank_probabilities():
    total = sum(rank_probability(r, 32, 32) for r in range(33))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert rank_probability(32, 32, 32) == pytest.approx(0.2888, abs=1e-4)
    assert rank_probability(31, 32, 32) == pytest.approx(0.5776, abs=1e-4)
    # 3x3 oracle: 168 of 512 are full rank
    assert rank_probability(3, 3, 3) == pytest.approx(168 / 512)


def test_overlapping_probabilities_sum_to_one():
    for exact in (False, True):
        assert overlapping_class_probabilities(9, 1032, 5, exact).sum() == pytest.approx(1.0, abs=1e-5)


def test_aperiodic_templates():
    t9 = aperiodic_templates(9)
    assert len(t9) == 148
    assert list(t9) == sorted(t9)
    for t in t9:
        assert all(t[:k] != t[-k:] for k in range(1, 9))
    assert aperiodic_templates(2) == ("01", "10")


def test_family_threshold():
    assert [family_threshold(k) for k in (1, 2, 8, 18, 148)] == [1, 2, 8, 17, 143]


# generic properties

@given(st.lists(st.integers(0, 1), min_size=100, max_size=400))
@settings(max_examples=40)
def test_p_values_in_unit_interval(bits):
    for f in (monobit, runs, cumulative_sums, lambda b: serial(b, 3), lambda b: approximate_entropy(b, 2)):
        p = np.asarray(f(bits).p_values)
        assert np.all((p >= 0) & (p <= 1))


@given(st.lists(st.integers(0, 1), min_size=100, max_size=400))
@settings(max_examples=40)
def test_complement_invariance(bits):
    flipped = [1 - b for b in bits]
    for f in (monobit, runs, lambda b: serial(b, 3)):
        assert np.allclose(f(bits).p_values, f(flipped).p_values, atol=1e-12)


def test_monobit_gets_worse_with_imbalance():
    ps = [monobit("1" * (50 + k) + "0" * (50 - k)).p_value for k in range(0, 30, 5)]
    assert ps == sorted(ps, reverse=True)


def test_obvious_patterns_fail():
    assert not runs("01" * 500).passed
    assert not monobit("1" * 100).passed
    assert not cumulative_sums("1" * 100).passed


def test_deterministic():
    bits = np.random.default_rng(1).integers(0, 2, 50_000)
    assert run_suite(bits).to_dict() == run_suite(bits.copy()).to_dict()


def test_as_bits_rejects_garbage():
    with pytest.raises(ValueError):
        as_bits("0120")
    with pytest.raises(ValueError):
        as_bits([0, 1, 2])


# suite plumbing

def test_short_input_is_not_applicable_everywhere():
    report = run_suite(np.ones(50, dtype=np.uint8))
    assert len(report.results) == 15
    for r in report.results:
        assert not r.applicable and r.p_values == ()


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        run_suite([])


def test_spec_overrides_defaults():
    bits = np.random.default_rng(2).integers(0, 2, 20_000)
    r = run_test(bits, TestSpec(TestId.BLOCK_FREQUENCY, {"block_size": 500}))
    assert r.p_values == block_frequency(bits, 500).p_values
    assert run_test(bits, "Monobit").p_values == monobit(bits).p_values


def test_non_overlapping_reports_every_template():
    bits = np.random.default_rng(3).integers(0, 2, 20_000)
    assert len(non_overlapping_template(bits).p_values) == 148


def test_report_serializes():
    bits = np.random.default_rng(4).integers(0, 2, 5_000)
    d = run_suite(bits).to_dict()
    assert d["n_bits"] == 5_000
    assert len(d["results"]) == 15
