import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import GOLDEN, pairs_with_potential, seeds, weights
from wentro import FactorPair, Potential, Sft, count_words, growth_limit_bounds
from wentro.carpets import CarpetSpec, carpet_to_factor_pair
from wentro.errors import SpecError
from wentro.generators import random_carpet, random_pair, random_potential, rng_for
from wentro.measures import markov_entropy_rate, weighted_measure_value
from wentro.variational import (
    OptimizerConfig,
    carpet_optimal_measure,
    misiurewicz_identity_residual,
    misiurewicz_lower_bound_check,
    misiurewicz_partition_check,
    misiurewicz_sigma,
    optimize_weighted_value,
    project_simplex,
)

W = math.log(2) / math.log(3)
CARPET_H = math.log(2**W + 1)


def _h(p):
    p = np.asarray(p, float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def grid_search_carpet(steps=400):
    """Best ``w H(p) + (1 - w) H(q)`` over a grid on the 2-simplex, ``q`` the row marginal."""
    best, arg = -1.0, None
    for i in range(steps + 1):
        for j in range(steps + 1 - i):
            p = np.array([i, j, steps - i - j]) / steps
            q = [p[0] + p[2], p[1]]
            v = W * _h(p) + (1 - W) * _h(q)
            if v > best:
                best, arg = v, p
    return best, arg


# -- projection ---------------------------------------------------------------


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_simplex_projection(v):
    p = project_simplex(np.array(v))
    assert p.min() >= 0
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    # idempotent
    assert np.allclose(project_simplex(p), p, atol=1e-12)


def test_config_validation():
    with pytest.raises(SpecError):
        OptimizerConfig(family="gaussian")
    with pytest.raises(SpecError):
        OptimizerConfig(restarts=0)
    with pytest.raises(SpecError):
        OptimizerConfig(step_rule="newton")


# -- optimizer ----------------------------------------------------------------


def test_optimizer_on_carpet(example_carpet):
    pair = carpet_to_factor_pair(example_carpet)
    res = optimize_weighted_value(pair, W, cfg=OptimizerConfig(family="bernoulli"))
    grid_value, grid_arg = grid_search_carpet()
    assert res.value.lower == pytest.approx(CARPET_H, abs=1e-4)
    assert res.value.lower >= grid_value - 1e-9
    p = np.asarray(res.measure.pi)
    target = carpet_optimal_measure(example_carpet).pi
    assert 0.5 * np.abs(p - target).sum() <= 1e-3
    assert 0.5 * np.abs(grid_arg - target).sum() <= 5e-3


def test_optimizer_markov_family_on_carpet(example_carpet):
    pair = carpet_to_factor_pair(example_carpet)
    res = optimize_weighted_value(pair, W, cfg=OptimizerConfig(family="markov", restarts=1, n_max=4))
    assert res.value.lower == pytest.approx(CARPET_H, abs=1e-4)


def test_optimizer_golden_mean_weight_one(golden):
    pair = FactorPair.collapse(golden)
    res = optimize_weighted_value(pair, 1.0, cfg=OptimizerConfig(restarts=2))
    assert res.value.lower == pytest.approx(math.log(GOLDEN), abs=1e-5)
    assert markov_entropy_rate(res.measure) == pytest.approx(math.log(GOLDEN), abs=1e-5)


@pytest.mark.parametrize("w", [0.0, 0.3, 1.0])
def test_optimizer_single_symbol(w):
    pair = FactorPair.identity(Sft.full(1))
    res = optimize_weighted_value(pair, w, cfg=OptimizerConfig(restarts=1))
    assert res.value.lower == 0.0 and res.value.upper == 0.0


def test_restarts_never_lower_the_objective():
    pair = random_pair(rng_for(21))
    f = random_potential(rng_for(22), pair.x)
    vals = [
        optimize_weighted_value(pair, 0.6, f, OptimizerConfig(restarts=r, n_max=4, seed=7)).objective
        for r in (1, 2, 3)
    ]
    assert vals[0] <= vals[1] <= vals[2]


def test_rerun_is_bit_identical():
    pair = random_pair(rng_for(23))
    f = random_potential(rng_for(24), pair.x)
    cfg = OptimizerConfig(restarts=2, n_max=4, seed=3)
    a = optimize_weighted_value(pair, 0.5, f, cfg)
    b = optimize_weighted_value(pair, 0.5, f, cfg)
    assert a.objective == b.objective
    assert np.array_equal(a.measure.P, b.measure.P)
    assert a.restart_values == b.restart_values


def test_constant_shift_of_potential():
    pair = random_pair(rng_for(25))
    f = random_potential(rng_for(26), pair.x)
    w, c = 0.7, 1.3
    cfg = OptimizerConfig(restarts=1, n_max=4)
    a = optimize_weighted_value(pair, w, f, cfg)
    b = optimize_weighted_value(pair, w, f.shifted(c), cfg)
    assert b.objective - a.objective == pytest.approx(w * c, abs=1e-9)
    assert np.abs(a.measure.P - b.measure.P).max() <= 1e-6


@given(pairs_with_potential(), weights)
@settings(max_examples=15)
def test_optimized_value_below_cover_upper(pf, w):
    pair, f = pf
    res = optimize_weighted_value(pair, w, f, OptimizerConfig(restarts=1, n_max=4, max_iters=300))
    gs = growth_limit_bounds(pair, w, f, n_max=8)
    assert res.value.lower <= gs.upper + 1e-6


# -- closed-form carpet optimum -----------------------------------------------


def test_carpet_optimal_measure_full_digits():
    carpet = CarpetSpec(3, 2, [(x, y) for x in range(3) for y in range(2)])
    m = carpet_optimal_measure(carpet)
    assert np.allclose(m.pi, 1 / 6, atol=1e-15)
    v = weighted_measure_value(carpet_to_factor_pair(carpet), m, carpet.w, n_max=3)
    assert v.lower == pytest.approx(math.log(2) + carpet.w * math.log(3), abs=1e-12)


def test_carpet_optimal_measure_single_row():
    carpet = CarpetSpec(4, 2, [(0, 1), (2, 1), (3, 1)])
    m = carpet_optimal_measure(carpet)
    assert np.allclose(m.pi, 1 / 3, atol=1e-15)
    v = weighted_measure_value(carpet_to_factor_pair(carpet), m, carpet.w, n_max=3)
    assert v.lower == pytest.approx(carpet.w * math.log(3), abs=1e-12)


def test_carpet_optimal_measure_example(example_carpet):
    p = carpet_optimal_measure(example_carpet).pi
    assert p[0] == pytest.approx(2 ** (W - 1) / (2**W + 1), abs=1e-15)
    assert p[2] == pytest.approx(2 ** (W - 1) / (2**W + 1), abs=1e-15)
    assert p[1] == pytest.approx(1 / (2**W + 1), abs=1e-15)


@given(seeds)
@settings(max_examples=20)
def test_carpet_optimum_meets_cover_value(seed):
    carpet = random_carpet(rng_for(seed))
    pair = carpet_to_factor_pair(carpet)
    v = weighted_measure_value(pair, carpet_optimal_measure(carpet), carpet.w, n_max=3)
    gs = growth_limit_bounds(pair, carpet.w, n_max=3)
    assert gs.upper - gs.lower <= 1e-12
    assert v.lower == pytest.approx(gs.upper, abs=1e-9)
    assert v.upper == pytest.approx(gs.upper, abs=1e-9)


# -- Misiurewicz measures -----------------------------------------------------


def test_sigma_uniform_at_weight_one(golden):
    pair = FactorPair.identity(golden)
    state = misiurewicz_sigma(pair, 1.0, n=6)
    assert np.allclose(state.sigma.probs, 1 / count_words(golden, 6), atol=1e-15)
    assert misiurewicz_identity_residual(state) <= 1e-12


def test_sigma_carpet_image_masses(example_carpet):
    pair = carpet_to_factor_pair(example_carpet)
    n = 4
    state = misiurewicz_sigma(pair, W, n=n)
    image_mass = np.bincount(state.image, weights=state.sigma.probs)
    expected = np.exp(W * state.log_za - state.log_z)
    assert np.allclose(image_mass, expected, atol=1e-14)
    # fiber sizes are 2^(#zeros in the image word)
    zeros = (state.image_words == 0).sum(axis=1)
    assert np.allclose(state.log_za, zeros * math.log(2), atol=1e-14)
    # sigma factorizes over coordinates with the closed-form carpet weights
    p = carpet_optimal_measure(example_carpet).pi
    assert np.allclose(state.sigma.probs, np.prod(p[state.words], axis=1), atol=1e-14)


def test_sigma_by_hand_single_letter():
    pair = FactorPair.collapse(Sft.full(2))
    a, b, w = 0.4, -0.9, 0.5
    state = misiurewicz_sigma(pair, w, Potential.from_symbol_values([a, b]), n=1)
    za = math.exp(a) + math.exp(b)
    assert state.sigma.probs == pytest.approx([math.exp(a) / za, math.exp(b) / za], abs=1e-15)
    assert state.log_z == pytest.approx(w * math.log(za), abs=1e-15)


@pytest.mark.parametrize("w", [0.0, 0.25, W, 1.0])
def test_identity_on_carpet(example_carpet, w):
    pair = carpet_to_factor_pair(example_carpet)
    for n in range(1, 9):
        assert misiurewicz_identity_residual(misiurewicz_sigma(pair, w, n=n)) <= 1e-10


@given(pairs_with_potential(window=st.just(1)), weights, st.integers(1, 8))
@settings(max_examples=30)
def test_identity_on_random_pairs(pf, w, n):
    pair, f = pf
    if count_words(pair.x, n) > 200_000:
        n = 5
    state = misiurewicz_sigma(pair, w, f, n)
    assert misiurewicz_identity_residual(state) <= 1e-10
    assert misiurewicz_partition_check(state, pair, w, f) <= 1e-10


@given(pairs_with_potential(window=st.integers(2, 3)), weights, st.integers(1, 6))
@settings(max_examples=20)
def test_identity_with_longer_windows(pf, w, n):
    pair, f = pf
    state = misiurewicz_sigma(pair, w, f, n)
    assert misiurewicz_identity_residual(state) <= 1e-10
    assert misiurewicz_partition_check(state, pair, w, f) <= 1e-10


def test_block_entropy_check_trivial_case(golden):
    pair = FactorPair.identity(golden)
    rep = misiurewicz_lower_bound_check(pair, 1.0, n=5, m_len=5)
    assert rep.passed


def test_block_entropy_check_golden_mean(golden):
    rep = misiurewicz_lower_bound_check(FactorPair.collapse(golden), 0.5, n=12, m_len=3)
    assert rep.passed
    assert rep.slack > 0


def test_block_entropy_check_carpet(example_carpet):
    rep = misiurewicz_lower_bound_check(carpet_to_factor_pair(example_carpet), W, n=10, m_len=2)
    assert rep.passed


@given(pairs_with_potential(), weights, st.integers(2, 7))
@settings(max_examples=20)
def test_block_entropy_check_random(pf, w, n):
    pair, f = pf
    rep = misiurewicz_lower_bound_check(pair, w, f, n=n, m_len=min(2, n))
    assert rep.passed


def test_block_entropy_check_rejects_long_blocks(golden):
    with pytest.raises(SpecError):
        misiurewicz_lower_bound_check(FactorPair.identity(golden), 0.5, n=3, m_len=4)
