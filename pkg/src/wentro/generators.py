"""Seeded random instances: primitive SFT pairs, potentials, measures, carpets."""

from __future__ import annotations

import numpy as np

from .carpets import CarpetSpec
from .cover import Potential
from .measures import MarkovMeasure
from .symbolic import BlockCode, FactorPair, Sft, enumerate_words


def random_primitive_sft(rng, size=None, density=0.7, max_tries=10_000):
    """Rejection-sample a primitive transition matrix on 2-4 symbols."""
    n = int(rng.integers(2, 5)) if size is None else size
    for _ in range(max_tries):
        matrix = rng.random((n, n)) < density
        if not (matrix.any(axis=0).all() and matrix.any(axis=1).all()):
            continue
        sft = Sft(matrix)
        if sft.is_primitive():
            return sft
    raise RuntimeError("could not draw a primitive SFT")


def random_code(rng, size, codomain=None):
    """Surjective 1-block code onto ``codomain`` symbols (random in ``1..size``)."""
    ny = int(rng.integers(1, size + 1)) if codomain is None else codomain
    table = np.concatenate([np.arange(ny), rng.integers(0, ny, size - ny)])
    rng.shuffle(table)
    return BlockCode.from_table(table.tolist(), ny)


def random_pair(rng, size=None):
    x = random_primitive_sft(rng, size)
    return FactorPair.from_code(x, random_code(rng, x.size))


def random_potential(rng, x, window=1, scale=1.0):
    """Potential with entries uniform in ``[-scale, scale]``."""
    return Potential(window, {u: float(rng.uniform(-scale, scale)) for u in enumerate_words(x, window)})


def random_markov_measure(rng, x):
    """Markov measure with Dirichlet rows on the allowed transitions."""
    P = np.zeros((x.size, x.size))
    for i, row in enumerate(x.transitions):
        P[i, row] = rng.dirichlet(np.ones(int(row.sum())))
    return MarkovMeasure(x, P)


def random_carpet(rng, a_max=5):
    """Carpet with ``2 <= b <= a <= a_max`` and a random non-empty digit set."""
    a = int(rng.integers(2, a_max + 1))
    b = int(rng.integers(2, a + 1))
    cells = [(x, y) for y in range(b) for x in range(a)]
    k = int(rng.integers(1, len(cells) + 1))
    pick = sorted(rng.choice(len(cells), size=k, replace=False).tolist())
    return CarpetSpec(a, b, [cells[i] for i in pick])


def rng_for(seed, *stream):
    return np.random.default_rng([seed, *stream])
