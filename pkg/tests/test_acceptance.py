"""Acceptance criteria 1-8.

Each test appends one ``PASS``/``FAIL`` line to the acceptance log (shown in
the pytest terminal summary) and prints it, then asserts. Tolerances and
instance counts are fixed here and must not be relaxed.
"""

import json
import math
import time

import mpmath
import numpy as np

from wentro import FactorPair, Sft, amplification_check, growth_limit_bounds, perron_entropy
from wentro.carpets import CarpetSpec, carpet_to_factor_pair
from wentro.cli import main as cli_main
from wentro.generators import random_carpet, random_markov_measure, random_pair, random_potential, rng_for
from wentro.measures import gibbs_gap, power_subadditivity_gap, weighted_measure_value
from wentro.variational import (
    OptimizerConfig,
    misiurewicz_identity_residual,
    misiurewicz_sigma,
    optimize_weighted_value,
)

# growth sequences produced by the other criteria, rescanned by criterion 7
STORED = []


def verdict(log, number, title, passed, detail):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    log.append(line)
    print(line)
    return passed


def test_criterion_1_carpet_formula(acceptance_log, tmp_path, capsys):
    spec = {"a": 3, "b": 2, "R": [[0, 0], [1, 1], [2, 0]]}
    path = tmp_path / "carpet.json"
    path.write_text(json.dumps(spec))
    start = time.perf_counter()
    code = cli_main(["dim-carpet", "--input", str(path)])
    elapsed = time.perf_counter() - start
    got = json.loads(capsys.readouterr().out)["carpet_dim"]

    with mpmath.workdps(60):
        w = mpmath.log(2) / mpmath.log(3)
        oracle = float(mpmath.log(mpmath.power(2, w) + 1) / mpmath.log(2))
    err = abs(got - oracle)

    degenerate = []
    for a, b in [(2, 2), (3, 2), (5, 3), (5, 5)]:
        full = CarpetSpec(a, b, [(x, y) for x in range(a) for y in range(b)])
        single = CarpetSpec(a, b, [(a - 1, b - 1)])
        degenerate.append((_dim(full), _dim(single)))
    exact = all(d_full == 2.0 and d_one == 0.0 for d_full, d_one in degenerate)

    ok = code == 0 and err <= 1e-9 and elapsed < 1.0 and exact
    verdict(
        acceptance_log, 1, "carpet formula",
        ok, f"|dim - closed form| = {err:.1e} <= 1e-9, {elapsed:.3f} s < 1 s, degenerate cases exact: {exact}",
    )
    assert ok


def _dim(carpet):
    from wentro.carpets import carpet_dimension

    return carpet_dimension(carpet).dimension


def test_criterion_2_reductions(acceptance_log):
    start = time.perf_counter()
    golden = growth_limit_bounds(FactorPair.collapse(Sft.golden_mean()), 1.0, n_max=40)
    STORED.append(golden)
    h = math.log((1 + math.sqrt(5)) / 2)
    brackets = golden.lower <= h <= golden.upper
    width = golden.upper - golden.lower

    worst = 0.0
    pairs = [random_pair(rng_for(2000, i)) for i in range(20)]
    pairs.append(carpet_to_factor_pair(CarpetSpec(3, 2, [(0, 0), (1, 1), (2, 0)])))
    pairs.append(FactorPair.identity(Sft.golden_mean()))
    for pair in pairs:
        gs = growth_limit_bounds(pair, 0.0, n_max=10)
        STORED.append(gs)
        hy = perron_entropy(pair.y)
        worst = max(worst, abs(gs.upper - hy), abs(gs.lower - hy))
    elapsed = time.perf_counter() - start

    ok = brackets and width <= 1e-3 and worst <= 1e-6 and elapsed < 10
    verdict(
        acceptance_log, 2, "reductions",
        ok,
        f"w=1 golden mean brackets log phi: {brackets}, width {width:.1e} <= 1e-3; "
        f"w=0 max |bound - h(Y)| = {worst:.1e} <= 1e-6 over {len(pairs)} pairs; {elapsed:.2f} s < 10 s",
    )
    assert ok


def test_criterion_3_misiurewicz_identity(acceptance_log):
    start = time.perf_counter()
    worst, checked = 0.0, 0
    for i in range(100):
        rng = rng_for(3000, i)
        pair = random_pair(rng)
        f = random_potential(rng, pair.x, window=1)
        w = float(rng.uniform())
        for n in range(1, 9):
            state = misiurewicz_sigma(pair, w, f, n)
            worst = max(worst, misiurewicz_identity_residual(state))
            checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60
    verdict(
        acceptance_log, 3, "Misiurewicz identity",
        ok, f"max residual {worst:.1e} <= 1e-10 over 100 pairs x N=1..8 ({checked} states); {elapsed:.1f} s < 60 s",
    )
    assert ok


def test_criterion_4_one_sided_inequality(acceptance_log):
    violations, worst = 0, -math.inf
    for i in range(100):
        rng = rng_for(4000, i)
        pair = random_pair(rng)
        m = random_markov_measure(rng, pair.x)
        w = float(rng.uniform())
        f = random_potential(rng, pair.x, window=int(rng.integers(1, 3)))
        value = weighted_measure_value(pair, m, w, f, n_max=8)
        gs = growth_limit_bounds(pair, w, f, n_max=10)
        STORED.append(gs)
        excess = value.lower - gs.upper
        worst = max(worst, excess)
        violations += excess > 1e-6
    ok = violations == 0
    verdict(
        acceptance_log, 4, "one-sided variational inequality",
        ok, f"{violations} violations over 100 tuples; max(value lower - cover upper) = {worst:.3e} <= 1e-6",
    )
    assert ok


def test_criterion_5_carpet_equality(acceptance_log):
    start = time.perf_counter()
    worst_value, worst_tv = 0.0, 0.0
    for i in range(10):
        carpet = random_carpet(rng_for(5000, i), a_max=5)
        pair = carpet_to_factor_pair(carpet)
        w = carpet.w
        t = carpet.column_counts()
        closed = math.log(sum(c**w for c in t.values()))
        target = np.array([t[y] ** (w - 1) for _, y in carpet.digits])
        target /= sum(c**w for c in t.values())
        res = optimize_weighted_value(pair, w, cfg=OptimizerConfig(family="bernoulli", seed=i))
        worst_value = max(worst_value, abs(res.value.lower - closed))
        worst_tv = max(worst_tv, 0.5 * float(np.abs(np.asarray(res.measure.pi) - target).sum()))
        STORED.append(growth_limit_bounds(pair, w, n_max=5))
    elapsed = time.perf_counter() - start
    ok = worst_value <= 1e-4 and worst_tv <= 1e-3 and elapsed < 300
    verdict(
        acceptance_log, 5, "variational equality on carpets",
        ok, f"max |value - log sum t^w| = {worst_value:.1e} <= 1e-4, max TV = {worst_tv:.1e} <= 1e-3; {elapsed:.1f} s < 300 s",
    )
    assert ok


def test_criterion_6_amplification(acceptance_log):
    # N = 12 on a four-letter image needs about 2e6 image words, just past
    # the default enumeration guard
    cap = 10**7
    worst = 0.0
    for i in range(20):
        rng = rng_for(6000, i)
        pair = random_pair(rng)
        f = random_potential(rng, pair.x, window=int(rng.integers(1, 3)))
        w = float(rng.uniform())
        for m in (1, 2, 3):
            for n in (1, 2, 3, 4):
                worst = max(worst, amplification_check(pair, w, f, m=m, n=n, cap=cap))
    ok = worst <= 1e-10
    verdict(acceptance_log, 6, "amplification", ok, f"max residual {worst:.1e} <= 1e-10 over 20 pairs, m<=3, N<=4")
    assert ok


def test_criterion_7_submultiplicativity(acceptance_log):
    sequences = list(STORED)
    for i in range(30):
        rng = rng_for(7000, i)
        pair = random_pair(rng)
        f = random_potential(rng, pair.x, window=int(rng.integers(1, 4)))
        for w in (0.0, float(rng.uniform()), 1.0):
            sequences.append(growth_limit_bounds(pair, w, f, n_max=10))
    splits = sum(len(s.values) * (len(s.values) - 1) // 2 for s in sequences)
    bad = [v for s in sequences for v in s.submultiplicativity_violations(1e-9)]
    ok = not bad
    worst = max((v[2] for v in bad), default=0.0)
    verdict(
        acceptance_log, 7, "sub-multiplicativity scan",
        ok, f"{len(bad)} violations beyond 1e-9 across {splits} (N, M) splits in {len(sequences)} sequences (worst excess {worst:.1e})",
    )
    assert ok


def test_criterion_8_calculus(acceptance_log):
    rng = np.random.default_rng(8000)
    n = 10_000
    scale = 10.0 ** rng.uniform(-8, 8, size=(2, n))
    x, y = rng.uniform(size=(2, n)) * scale
    w = rng.uniform(size=n)
    w[:100] = 0.0
    w[100:200] = 1.0
    gap1 = power_subadditivity_gap(x, y, w)
    # relative slack: the terms range over sixteen orders of magnitude
    bad1 = int((gap1 < -1e-12 * np.maximum(1.0, x**w + y**w)).sum())

    bad2, worst2 = 0, 0.0
    for _ in range(n):
        k = int(rng.integers(1, 9))
        p = rng.dirichlet(np.ones(k) * rng.choice([0.1, 1.0, 10.0]))
        v = rng.normal(scale=rng.choice([0.1, 1.0, 30.0]), size=k)
        g = gibbs_gap(p, v)
        worst2 = min(worst2, g)
        bad2 += g < -1e-12
    ok = bad1 == 0 and bad2 == 0
    verdict(
        acceptance_log, 8, "calculus properties",
        ok, f"(x+y)^w <= x^w + y^w: {bad1}/{n} violations; Gibbs: {bad2}/{n} violations (min gap {worst2:.1e})",
    )
    assert ok
