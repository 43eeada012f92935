"""Bedford-McMullen carpets and their sofic generalisations.

A carpet is given by bases ``a >= b >= 2`` and a digit set ``R`` of pairs
``(x, y)`` with ``0 <= x < a`` and ``0 <= y < b``. Its Hausdorff dimension is
``log_b sum_y t(y) ** log_a b`` where ``t(y)`` counts the digits in row ``y``.
Symbolically, the carpet is the full shift on ``R`` factored onto the rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .cover import growth_limit_bounds
from .errors import SpecError
from .symbolic import Alphabet, BlockCode, FactorPair, Sft

MP_DIGITS = 50


def _digits(a, b, digits):
    out = []
    for pair in digits:
        if len(pair) != 2:
            raise SpecError(f"digit {pair!r} is not a pair", field="R")
        x, y = int(pair[0]), int(pair[1])
        if not (0 <= x < a and 0 <= y < b):
            raise SpecError(f"digit {(x, y)} outside {a}x{b}", field="R")
        out.append((x, y))
    if not out:
        raise SpecError("digit set R is empty", field="R")
    if len(set(out)) != len(out):
        raise SpecError("digit set R has repeated pairs", field="R")
    return tuple(out)


@dataclass(frozen=True)
class CarpetSpec:
    a: int
    b: int
    digits: tuple

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if b < 2 or a < b:
            raise SpecError(f"need a >= b >= 2, got a={a}, b={b}", field="a")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "digits", _digits(a, b, self.digits))

    @property
    def w(self):
        return math.log(self.b) / math.log(self.a)

    def rows(self):
        """Occupied rows ``R'`` in increasing order."""
        return sorted({y for _, y in self.digits})

    def column_counts(self):
        """``t(y)``: number of digits in each occupied row."""
        t = {}
        for _, y in self.digits:
            t[y] = t.get(y, 0) + 1
        return dict(sorted(t.items()))


@dataclass(frozen=True)
class CarpetDimension:
    dimension: float
    w: float
    entropy: float
    dimension_mp: str


def carpet_dimension(carpet):
    """Closed-form dimension in ``MP_DIGITS``-digit arithmetic, with ``w`` and the weighted entropy."""
    with mpmath.workdps(MP_DIGITS):
        a, b = mpmath.mpf(carpet.a), mpmath.mpf(carpet.b)
        w = mpmath.log(b) / mpmath.log(a)
        total = mpmath.fsum(mpmath.mpf(t) ** w for t in carpet.column_counts().values())
        h = mpmath.log(total)
        dim = h / mpmath.log(b)
        return CarpetDimension(float(dim), float(w), float(h), mpmath.nstr(dim, MP_DIGITS - 5))


def carpet_to_factor_pair(carpet):
    """Full shift on the digits, projected onto the row digit."""
    rows = carpet.rows()
    index = {y: i for i, y in enumerate(rows)}
    labels = [f"{x}:{y}" for x, y in carpet.digits]
    x = Sft.full(len(carpet.digits), labels)
    code = BlockCode(x.alphabet, Alphabet(len(rows), [str(y) for y in rows]), [index[y] for _, y in carpet.digits])
    return FactorPair.from_code(x, code)


@dataclass(frozen=True)
class SoficCarpetSpec:
    """Carpet whose digit sequences are restricted by a transition matrix on ``R``."""

    carpet: CarpetSpec
    transitions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.transitions)
        n = len(self.carpet.digits)
        if t.shape != (n, n):
            raise SpecError(f"digit_transitions must be {n}x{n}", field="digit_transitions")
        object.__setattr__(self, "transitions", t.astype(bool))

    @property
    def a(self):
        return self.carpet.a

    @property
    def b(self):
        return self.carpet.b

    def digit_sft(self):
        labels = [f"{x}:{y}" for x, y in self.carpet.digits]
        return Sft(self.transitions, labels)


@dataclass(frozen=True)
class DimensionInterval:
    lower: float
    upper: float
    lower_kind: str
    w: float
    cover_lower: float
    variational_lower: float | None
    growth: object

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


def sofic_factor_pair(spec):
    """Digit SFT (pruned to its essential part) with the row projection."""
    x = spec.digit_sft()
    kept = [spec.carpet.digits[i] for i in x.kept]
    rows = sorted({y for _, y in kept})
    index = {y: i for i, y in enumerate(rows)}
    code = BlockCode(x.alphabet, Alphabet(len(rows), [str(y) for y in rows]), [index[y] for _, y in kept])
    return FactorPair.from_code(x, code)


def sofic_carpet_dimension(spec, n_max=12, variational=True, optimizer=None, cap=None):
    """Interval for ``h^w / log b`` with ``w = log_a b`` on a restricted carpet.

    The upper end comes from the cover bounds. The lower end is the larger of
    the cover lower bound and, when ``variational`` is set, the lower end of
    the weighted value of an optimized Markov measure; the latter is a valid
    lower bound because measure values never exceed the cover quantity.
    """
    if isinstance(spec, CarpetSpec):
        spec = SoficCarpetSpec(spec, np.ones((len(spec.digits),) * 2, dtype=bool))
    pair = sofic_factor_pair(spec)
    w = spec.carpet.w
    log_b = math.log(spec.b)
    growth = growth_limit_bounds(pair, w, n_max=n_max, cap=cap)
    lower, kind = growth.lower, growth.lower_kind
    var_lower = None
    if variational and pair.x.size > 1:
        from .variational import OptimizerConfig, optimize_weighted_value

        cfg = optimizer or OptimizerConfig(family="markov", restarts=2, n_max=8, max_iters=600)
        result = optimize_weighted_value(pair, w, None, cfg)
        var_lower = result.value.lower
        if kind != "rigorous" or var_lower > lower:
            lower, kind = max(var_lower, lower if kind == "rigorous" else -math.inf), "rigorous"
    return DimensionInterval(
        lower / log_b,
        growth.upper / log_b,
        kind,
        w,
        growth.lower / log_b,
        None if var_lower is None else var_lower / log_b,
        growth,
    )
