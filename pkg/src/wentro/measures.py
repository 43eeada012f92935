"""Entropy of partitions, Markov measures and their images under 1-block codes.

All logarithms are natural. The convention ``0 log 0 = 0`` is used throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from .errors import SpecError, check_cap
from .symbolic import Sft, word_array

MASS_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _entropy(p):
    p = np.asarray(p, dtype=float)
    return float(-xlogy(p, p).sum())


@dataclass(frozen=True)
class Distribution:
    """Probability vector; entries non-negative and summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.weights, dtype=float).reshape(-1)
        if p.size == 0:
            raise SpecError("distribution is empty")
        if (p < 0).any() or not np.isfinite(p).all():
            raise SpecError("distribution has negative or non-finite entries")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise SpecError(f"distribution sums to {p.sum()!r}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "weights", p)

    def __len__(self):
        return len(self.weights)

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))


def shannon_entropy(d):
    """``-sum p log p`` in nats; accepts a :class:`Distribution` or a raw vector."""
    if not isinstance(d, Distribution):
        d = Distribution(d)
    return _entropy(d.weights)


def conditional_entropy(joint, coarse, fine=None):
    """``H(fine | coarse)`` for a probability vector over cells.

    Parameters
    ----------
    joint : array_like or BlockDistribution
        Mass of each cell.
    coarse : array_like
        Coarse label of each cell.
    fine : array_like, optional
        Fine label of each cell. Defaults to the cells themselves.

    Coarse cells of zero mass are skipped, as in the usual definition.
    """
    probs = joint.probs if isinstance(joint, BlockDistribution) else np.asarray(joint, float)
    probs = probs.reshape(-1)
    coarse = np.asarray(coarse).reshape(len(coarse), -1) if np.ndim(coarse) > 1 else np.asarray(coarse)
    if len(coarse) != len(probs):
        raise SpecError(f"coarse map has {len(coarse)} entries for {len(probs)} cells")
    if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-10:
        raise SpecError(f"joint masses sum to {probs.sum()!r}, not 1")
    fine_ids = np.arange(len(probs)) if fine is None else _labels(fine)
    coarse_ids = _labels(coarse)
    total = 0.0
    for c in np.unique(coarse_ids):
        sel = coarse_ids == c
        mass = probs[sel].sum()
        if mass <= 0:
            continue
        cell = np.bincount(np.unique(fine_ids[sel], return_inverse=True)[1], weights=probs[sel])
        total += mass * _entropy(cell / mass)
    return total


def _labels(labels):
    arr = np.asarray(labels)
    if arr.ndim > 1:
        return np.unique(arr, axis=0, return_inverse=True)[1].reshape(-1)
    return np.unique(arr, return_inverse=True)[1].reshape(-1)


@dataclass(frozen=True)
class BlockDistribution:
    """Masses of the words of one length; ``words`` rows are lexicographic."""

    n: int
    words: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if abs(float(np.sum(self.probs)) - 1.0) > 1e-10:
            raise SpecError(f"block masses sum to {np.sum(self.probs)!r}")

    def entropy(self):
        return _entropy(self.probs)

    def as_dict(self):
        return {tuple(int(s) for s in u): float(p) for u, p in zip(self.words, self.probs)}

    def prob(self, word):
        return self.as_dict().get(tuple(word), 0.0)


class MarkovMeasure:
    """Stationary Markov measure on an SFT.

    ``P`` is row stochastic with ``P[i, j] > 0`` only on allowed transitions.
    ``pi`` defaults to the stationary vector of ``P``. A Bernoulli measure is
    the special case of identical rows on a full shift.
    """

    def __init__(self, sft, P, pi=None):
        P = np.array(P, dtype=float)
        n = sft.size
        if P.shape != (n, n):
            raise SpecError(f"P must be {n}x{n}, got {P.shape}", field="P")
        if (P < 0).any() or not np.isfinite(P).all():
            raise SpecError("P has negative or non-finite entries", field="P")
        if np.abs(P.sum(axis=1) - 1.0).max() > 1e-10:
            raise SpecError("P rows must sum to 1 (zero rows are not allowed)", field="P")
        if (P[~sft.transitions] > 0).any():
            raise SpecError("P charges a forbidden transition", field="P")
        if pi is None:
            pi = stationary_vector(P)
        pi = np.array(pi, dtype=float)
        if pi.shape != (n,):
            raise SpecError(f"pi must have {n} entries", field="pi")
        Distribution(pi)
        if np.abs(pi @ P - pi).max() > STATIONARY_TOL:
            raise SpecError("pi is not stationary for P", field="pi")
        if (pi == 0).any():
            warnings.warn(
                f"measure does not charge symbols {np.flatnonzero(pi == 0).tolist()}", stacklevel=2
            )
        self.sft = sft
        self.P = P
        self.pi = pi
        P.setflags(write=False)
        pi.setflags(write=False)

    @property
    def memory(self):
        return 0 if np.allclose(self.P, self.P[0], atol=0, rtol=0) else 1

    @classmethod
    def bernoulli(cls, p, sft=None):
        p = np.asarray(p, dtype=float)
        sft = Sft.full(len(p)) if sft is None else sft
        return cls(sft, np.tile(p, (len(p), 1)), p)

    @classmethod
    def parry(cls, sft):
        """Measure of maximal entropy (irreducible ``sft``)."""
        a = sft.transitions.astype(float)
        vals, right = np.linalg.eig(a)
        top = np.argmax(vals.real)
        lam = vals[top].real
        r = np.abs(right[:, top].real)
        vals_l, left = np.linalg.eig(a.T)
        l = np.abs(left[:, np.argmax(vals_l.real)].real)
        P = a * r[None, :] / (lam * r[:, None])
        pi = l * r
        pi /= pi.sum()
        P /= P.sum(axis=1, keepdims=True)
        return cls(sft, P, pi)

    def __repr__(self):
        return f"MarkovMeasure(size={self.sft.size}, memory={self.memory})"


def stationary_vector(P):
    """A stationary probability vector of a row-stochastic matrix."""
    n = len(P)
    system = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_entropy_rate(m):
    """``-sum_i pi_i sum_j P_ij log P_ij``."""
    return float(-(m.pi[:, None] * xlogy(m.P, m.P)).sum())


def block_distribution(m, n, cap=None):
    """Masses ``pi[u0] prod P[u_t, u_{t+1}]`` of the words of length ``n``."""
    words = word_array(m.sft, n, cap)
    probs = m.pi[words[:, 0]].copy()
    for t in range(n - 1):
        probs *= m.P[words[:, t], words[:, t + 1]]
    return BlockDistribution(n, words, probs)


def pushforward_block(m, code, n, cap=None):
    """Image distribution ``nu(v) = sum_{code(u) = v} mu(u)`` on length-``n`` words."""
    if code.window != 1:
        raise SpecError("pushforward needs a 1-block code", field="code")
    block = block_distribution(m, n, cap)
    images = np.asarray(code.table)[block.words]
    uniq, inverse = np.unique(images, axis=0, return_inverse=True)
    probs = np.bincount(inverse.reshape(-1), weights=block.probs, minlength=len(uniq))
    return BlockDistribution(n, uniq, probs)


def _hidden_sweep(m, code, n_max, cap=None):
    """Per length ``n``: ``H(Y_1..Y_n)`` and ``H(X_1, Y_1..Y_n)``.

    Forward recursion over image words. Each live word ``v`` carries
    ``beta_v[i, j] = P(X_1 = i, X_n = j, Y_1..n = v)``, grouped by first and
    last image symbol so updates are batched matrix products.
    """
    table = np.asarray(code.table)
    ny = code.codomain.size
    fib = [np.flatnonzero(table == c) for c in range(ny)]
    groups = {}
    for c in range(ny):
        if len(fib[c]):
            groups[c, c] = np.diag(m.pi[fib[c]])[None]
    trans = {
        (c, d): m.P[np.ix_(fib[c], fib[d])]
        for c in range(ny)
        for d in range(ny)
        if len(fib[c]) and len(fib[d]) and m.P[np.ix_(fib[c], fib[d])].any()
    }
    h_y, h_xy = [], []
    for n in range(1, n_max + 1):
        if n > 1:
            new = {}
            total = 0
            for (c0, c), mats in sorted(groups.items()):
                for d in range(ny):
                    tr = trans.get((c, d))
                    if tr is None:
                        continue
                    nxt = mats @ tr
                    keep = nxt.sum(axis=(1, 2)) > 0
                    if keep.any():
                        new.setdefault((c0, d), []).append(nxt[keep])
                        total += int(keep.sum())
            check_cap(total, "image words in the entropy sweep", cap)
            groups = {key: np.concatenate(parts) for key, parts in new.items()}
        word_mass = np.concatenate([g.sum(axis=(1, 2)) for g in groups.values()])
        joint_mass = np.concatenate([g.sum(axis=2).reshape(-1) for g in groups.values()])
        h_y.append(_entropy(word_mass))
        h_xy.append(_entropy(joint_mass))
    return h_y, h_xy


@dataclass(frozen=True)
class FactorEntropyBounds:
    lower: float
    upper: float
    n_max: int

    def __iter__(self):
        return iter((self.lower, self.upper))


def factor_entropy_bounds(m, code, n_max, cap=None):
    """Sandwich bounds on the entropy rate of the image process.

    ``upper = min(H(Y_1..N)/N, H(Y_N | Y_1..N-1))`` and
    ``lower = H(Y_N | Y_1..N-1, X_1)`` with ``N = n_max``. The lower end never
    decreases and the upper end never increases as ``n_max`` grows.
    """
    if n_max < 2:
        raise SpecError("N_max must be >= 2")
    h_y, h_xy = _hidden_sweep(m, code, n_max, cap)
    upper = min(h_y[-1] / n_max, h_y[-1] - h_y[-2])
    lower = h_xy[-1] - h_xy[-2]
    # in the degenerate cases the two ends coincide up to a few ulps
    if 0 < lower - upper < 1e-12:
        lower = upper = 0.5 * (lower + upper)
    return FactorEntropyBounds(max(lower, 0.0), max(upper, 0.0), n_max)


def integral(m, f):
    """``int f dmu`` for a locally constant potential: ``sum_u mu(u) f(u)`` over window words."""
    block = block_distribution(m, f.window)
    return float(sum(p * f.table[tuple(int(s) for s in u)] for u, p in zip(block.words, block.probs) if p > 0))


@dataclass(frozen=True)
class ValueInterval:
    """``w h_mu + (1 - w) h_nu + w int f dmu`` with ``h_nu`` bracketed."""

    lower: float
    upper: float
    entropy: float
    factor_lower: float
    factor_upper: float
    integral: float

    def __iter__(self):
        return iter((self.lower, self.upper))


def weighted_measure_value(pair, m, w, f=None, n_max=10, cap=None):
    """Interval for the weighted measure-theoretic value of ``m``."""
    from .cover import Potential

    if not 0.0 <= w <= 1.0:
        raise SpecError(f"weight w must lie in [0, 1], got {w}", field="w")
    if m.sft != pair.x:
        if m.sft.size != pair.x.size or (m.P[~pair.x.transitions] > 0).any():
            raise SpecError("measure is not supported on the upstairs SFT")
    f = Potential.zero(pair.x.size) if f is None else f
    h = markov_entropy_rate(m)
    if w == 1.0:
        lo = hi = 0.0
    else:
        lo, hi = factor_entropy_bounds(m, pair.code, n_max, cap)
    mean = integral(m, f)
    base = w * h + w * mean
    return ValueInterval(base + (1 - w) * lo, base + (1 - w) * hi, h, lo, hi, mean)


def power_subadditivity_gap(x, y, w):
    """``x**w + y**w - (x + y)**w``, non-negative for ``x, y >= 0`` and ``w`` in ``[0, 1]``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return x**w + y**w - (x + y) ** w


def gibbs_gap(p, x):
    """``log sum exp(x) - sum(-p log p + p x)``, non-negative for a probability vector ``p``."""
    p, x = np.asarray(p, float), np.asarray(x, float)
    return float(logsumexp(x) - (-xlogy(p, p).sum() + (p * x).sum()))
