import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import GOLDEN, brute_perron, brute_words, pairs, seeds
from wentro import (
    BlockCode,
    FactorPair,
    Sft,
    SoficPresentation,
    count_words,
    enumerate_words,
    higher_block_recode,
    image_presentation,
    perron_entropy,
    validate_factor_pair,
)
from wentro.carpets import CarpetSpec, carpet_to_factor_pair
from wentro.errors import CapExceeded, SpecError
from wentro.generators import random_primitive_sft, rng_for
from wentro.symbolic import Alphabet, image_language, power_shift


# -- counting and enumeration -------------------------------------------------


def test_count_full_two_shift():
    assert count_words(Sft.full(2), 3) == 8


@pytest.mark.parametrize("n, expected", [(3, 5), (5, 13)])
def test_count_golden_mean(golden, n, expected):
    assert count_words(golden, n) == expected
    assert len(brute_words(golden, n)) == expected


def test_count_golden_mean_follows_fibonacci(golden):
    fib = [2, 3]
    while len(fib) < 30:
        fib.append(fib[-1] + fib[-2])
    assert [count_words(golden, n) for n in range(1, 31)] == fib


def test_enumerate_full_shift_length_one():
    assert list(enumerate_words(Sft.full(2), 1)) == [(0,), (1,)]


def test_enumerate_golden_mean(golden):
    assert list(enumerate_words(golden, 2)) == [(0, 0), (0, 1), (1, 0)]
    assert list(enumerate_words(golden, 3)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1)]


def test_enumerate_respects_cap():
    with pytest.raises(CapExceeded):
        list(enumerate_words(Sft.full(4), 12, cap=1000))


def test_count_rejects_zero_length(golden):
    with pytest.raises(SpecError):
        count_words(golden, 0)


# -- Perron entropy -----------------------------------------------------------


def test_perron_full_two_shift():
    assert perron_entropy(Sft.full(2)) == pytest.approx(math.log(2), abs=1e-12)


def test_perron_golden_mean(golden):
    assert perron_entropy(golden) == pytest.approx(math.log(GOLDEN), abs=1e-12)
    assert perron_entropy(golden) == pytest.approx(0.481212, abs=1e-6)


def test_perron_single_symbol():
    assert perron_entropy(Sft.full(1)) == 0.0


def test_perron_periodic_matrix():
    # period-2 cycle: power iteration without a shift would oscillate
    x = Sft([[0, 1], [1, 0]])
    assert perron_entropy(x) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_perron_matches_eigenvalues(seed):
    x = random_primitive_sft(rng_for(seed))
    assert perron_entropy(x) == pytest.approx(math.log(brute_perron(x.transitions)), abs=1e-10)


# -- essential core -----------------------------------------------------------


def test_non_essential_symbols_are_pruned():
    # symbol 2 has no successor
    with pytest.warns(UserWarning, match="pruning"):
        x = Sft([[1, 1, 1], [1, 0, 1], [0, 0, 0]])
    assert x.size == 2
    assert x.kept == (0, 1)


def test_empty_sft_rejected():
    with pytest.raises(SpecError):
        Sft([[0, 1], [0, 0]])


# -- recoding -----------------------------------------------------------------


def test_higher_block_identity(golden):
    recoded, words = higher_block_recode(golden, 1)
    assert recoded == golden
    assert words == [(0,), (1,)]


def test_higher_block_full_two_shift():
    recoded, words = higher_block_recode(Sft.full(2), 2)
    assert words == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert int(recoded.transitions.sum()) == 8
    expected = np.array([[u[1] == v[0] for v in words] for u in words])
    assert np.array_equal(recoded.transitions, expected)


def test_higher_block_golden_mean(golden):
    recoded, words = higher_block_recode(golden, 2)
    assert words == [(0, 0), (0, 1), (1, 0)]
    expected = np.array([[u[1] == v[0] and (u[1], v[1]) != (1, 1) for v in words] for u in words])
    assert np.array_equal(recoded.transitions, expected)


@given(seeds, st.integers(2, 3), st.integers(0, 5))
def test_higher_block_preserves_counts(seed, k, extra):
    x = random_primitive_sft(rng_for(seed))
    recoded, _ = higher_block_recode(x, k)
    n = k + extra
    assert count_words(recoded, n - k + 1) == count_words(x, n)


@given(seeds, st.integers(2, 3), st.integers(1, 4))
def test_power_shift_counts(seed, m, n):
    x = random_primitive_sft(rng_for(seed))
    xm, _ = power_shift(x, m)
    assert count_words(xm, n) == count_words(x, m * n)


# -- language properties ------------------------------------------------------


@given(seeds, st.integers(1, 12), st.integers(1, 12))
def test_count_submultiplicative(seed, n, m):
    x = random_primitive_sft(rng_for(seed))
    assert count_words(x, n + m) <= count_words(x, n) * count_words(x, m)


@given(seeds)
def test_count_growth_approaches_perron(seed):
    x = random_primitive_sft(rng_for(seed))
    h = perron_entropy(x)
    rates = [math.log(count_words(x, n)) / n for n in (10, 20, 40)]
    # per-length rates overshoot and come down; at N = 40 the gap to the limit
    # is bounded by log(sum of the Perron vector ratios) / 40
    assert all(r >= h - 1e-12 for r in rates)
    assert rates[-1] - h <= 0.1
    diff = math.log(count_words(x, 41)) - math.log(count_words(x, 40))
    assert diff == pytest.approx(h, abs=1e-6)


@given(seeds, st.integers(1, 7))
def test_enumeration_agrees_with_count(seed, n):
    x = random_primitive_sft(rng_for(seed))
    words = list(enumerate_words(x, n))
    assert len(words) == count_words(x, n)
    assert len(set(words)) == len(words)
    assert all(x.is_admissible(u) for u in words)
    assert words == sorted(words)
    assert words == brute_words(x, n)


# -- sofic images -------------------------------------------------------------


def test_identity_image_is_full_shift():
    x = Sft.full(2)
    y = image_presentation(x, BlockCode.from_table([0, 1]))
    for n in range(1, 8):
        assert y.count_words(n) == 2**n


def test_collapse_image_has_one_state():
    x = Sft.full(2)
    y = image_presentation(x, BlockCode.from_table([0, 0]))
    assert y.num_states == 1
    assert y.alphabet.size == 1
    assert y.words(4) == [(0, 0, 0, 0)]


def test_carpet_image_is_full_shift(example_carpet):
    pair = carpet_to_factor_pair(example_carpet)
    assert pair.y_is_sft
    for n in range(1, 9):
        assert set(pair.y.words(n)) == set(brute_words(Sft.full(2), n))
        assert image_language(pair.x, pair.code, n) == set(pair.y.words(n))


@given(pairs(), st.integers(1, 10))
def test_image_language_matches_brute_force(pair, n):
    if pair.x.size ** n > 300_000:
        n = 6
    table = pair.code.table
    image = {tuple(table[a] for a in u) for u in brute_words(pair.x, n)}
    assert set(pair.y.words(n)) == image


def test_image_of_merging_code():
    # two symbols share a label, so reading the image needs the subset construction
    x = Sft([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
    pair = FactorPair.from_code(x, BlockCode.from_table([0, 0, 1]))
    for n in range(1, 11):
        table = pair.code.table
        assert set(pair.y.words(n)) == {tuple(table[a] for a in u) for u in brute_words(x, n)}


# -- validation ---------------------------------------------------------------


def test_validate_carpet_pair(example_carpet):
    assert validate_factor_pair(carpet_to_factor_pair(example_carpet), 6).passed


def test_validate_golden_mean_identity(golden):
    report = validate_factor_pair(FactorPair.identity(golden), 10)
    assert report.passed
    assert report.checked_length == 10


def test_validate_detects_extra_symbol(golden):
    good = FactorPair.identity(golden)
    bigger = SoficPresentation.from_sft(Sft.full(3))
    report = validate_factor_pair(FactorPair(good.x, good.code, bigger), 5)
    assert not report.passed
    assert report.failed_at == 1
    assert report.counterexample == (2,)


def test_alphabet_labels_must_be_distinct():
    with pytest.raises(SpecError):
        Alphabet(2, ["a", "a"])


def test_from_code_drops_unused_codomain_symbols():
    x = Sft.full(2)
    code = BlockCode(x.alphabet, Alphabet(3), [0, 2])
    pair = FactorPair.from_code(x, code)
    assert pair.code.codomain.size == 2
    assert list(pair.code.table) == [0, 1]


def test_carpet_fiber_sizes():
    carpet = CarpetSpec(3, 2, [(x, y) for x in range(3) for y in range(2)])
    pair = carpet_to_factor_pair(carpet)
    assert sorted(len(v) for v in pair.code.fibers()) == [3, 3]
