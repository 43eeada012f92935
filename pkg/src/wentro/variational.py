"""Measure side of the weighted variational principle.

Three pieces live here:

* a projected-gradient optimizer of the weighted measure value over Bernoulli
  or one-step Markov measures;
* the explicit optimal Bernoulli measure on a carpet;
* the weighted Misiurewicz measures ``sigma_N`` on representatives of the
  ``N``-cylinders, with the exact entropy identity and the block-entropy
  inequality used to pass to invariant limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, xlogy

from .cover import Potential, representative_extension, weighted_partition_sum
from .errors import SpecError, check_cap
from .measures import (
    BlockDistribution,
    MarkovMeasure,
    ValueInterval,
    weighted_measure_value,
)
from .symbolic import enumerate_words

FD_STEP = 1e-5


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`optimize_weighted_value`.

    Parameters
    ----------
    family : {"bernoulli", "markov"}
    restarts : int
        Restart 0 starts from the uniform parameters, later ones from seeded
        Dirichlet draws.
    max_iters : int
    step : float
        Step ``c`` of the diminishing rule ``c / sqrt(t)``; initial trial step
        of the backtracking rule.
    step_rule : {"diminishing", "armijo"}
        ``"armijo"`` backtracks from ``step`` until the projected move gains
        at least a fixed fraction of its first-order prediction.
    tol : float
        Stop once the best objective has improved by less than ``tol`` over
        ``patience`` iterations.
    n_max : int
        Block length for the image-entropy bounds in the objective.
    """

    family: str = "markov"
    restarts: int = 3
    max_iters: int = 4000
    step: float = 0.5
    step_rule: str = "armijo"
    tol: float = 1e-8
    patience: int = 50
    seed: int = 0
    n_max: int = 6

    def __post_init__(self):
        if self.step_rule not in ("diminishing", "armijo"):
            raise SpecError(f"unknown step rule {self.step_rule!r}", field="step_rule")
        if self.family not in ("bernoulli", "markov"):
            raise SpecError(f"unknown measure family {self.family!r}", field="family")
        if self.restarts < 1:
            raise SpecError("restarts must be >= 1", field="restarts")
        if self.tol <= 0:
            raise SpecError("tol must be positive", field="tol")
        if self.max_iters < 1:
            raise SpecError("max_iters must be >= 1", field="max_iters")


def project_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class _Objective:
    """Lower end of the weighted measure value as a function of free parameters."""

    def __init__(self, pair, w, f, family, n_max):
        self.pair, self.w, self.f, self.family, self.n_max = pair, w, f, family, n_max
        x = pair.x
        self.mask = x.transitions
        self.table = np.asarray(pair.code.table)
        self.ny = pair.code.codomain.size
        if family == "bernoulli":
            if not x.is_full():
                raise SpecError("the Bernoulli family needs a full upstairs shift", field="family")
            if f.window != 1:
                raise SpecError("the Bernoulli family needs a window-1 potential", field="family")
            self.fvals = np.array([f.table[(i,)] for i in range(x.size)])

    def measure(self, params):
        if self.family == "bernoulli":
            return MarkovMeasure.bernoulli(params, self.pair.x)
        return MarkovMeasure(self.pair.x, params)

    def __call__(self, params):
        if self.family == "bernoulli":
            # i.i.d. image process: its entropy is the entropy of the image marginal
            p = params
            q = np.bincount(self.table, weights=p, minlength=self.ny)
            h = -xlogy(p, p).sum()
            hq = -xlogy(q, q).sum()
            return float(self.w * h + (1 - self.w) * hq + self.w * p @ self.fvals)
        return weighted_measure_value(self.pair, self.measure(params), self.w, self.f, self.n_max).lower

    def project(self, params):
        if self.family == "bernoulli":
            return project_simplex(params)
        out = np.zeros_like(params)
        for i in range(len(params)):
            allowed = self.mask[i]
            out[i, allowed] = project_simplex(params[i, allowed])
        return out

    def normalize(self, params):
        """Clip and renormalize, used for the finite-difference probes."""
        params = np.clip(params, 0.0, None)
        if self.family == "bernoulli":
            return params / params.sum()
        params = np.where(self.mask, params, 0.0)
        return params / params.sum(axis=-1, keepdims=True)

    def gradient(self, params):
        grad = np.zeros_like(params)
        free = np.ones(params.shape, bool) if self.family == "bernoulli" else self.mask
        for idx in zip(*np.nonzero(free)):
            up, down = params.copy(), params.copy()
            up[idx] += FD_STEP
            down[idx] -= FD_STEP
            grad[idx] = (self(self.normalize(up)) - self(self.normalize(down))) / (2 * FD_STEP)
        return grad

    def start(self, rng):
        if self.family == "bernoulli":
            n = len(self.mask)
            return np.full(n, 1.0 / n) if rng is None else rng.dirichlet(np.ones(n))
        out = np.zeros(self.mask.shape)
        for i, row in enumerate(self.mask):
            k = int(row.sum())
            out[i, row] = np.full(k, 1.0 / k) if rng is None else rng.dirichlet(np.ones(k))
        return out


@dataclass
class OptimizationResult:
    measure: MarkovMeasure
    value: ValueInterval
    objective: float
    restart_values: list = field(default_factory=list)
    iterations: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.measure, self.value))


def _ascend(obj, params, cfg):
    best_val = obj(params)
    best = params
    last_gain_at, mark = 0, best_val
    t = 0
    for t in range(1, cfg.max_iters + 1):
        grad = obj.gradient(params)
        if not np.isfinite(grad).all():
            raise FloatingPointError("non-finite gradient")
        if cfg.step_rule == "armijo":
            params, val = _backtrack(obj, params, obj(params), grad, cfg.step)
        else:
            params = obj.project(params + cfg.step / math.sqrt(t) * grad)
            val = obj(params)
        if not math.isfinite(val):
            raise FloatingPointError("non-finite objective")
        if val > best_val:
            best_val, best = val, params
        if best_val - mark > cfg.tol:
            mark, last_gain_at = best_val, t
        elif t - last_gain_at >= cfg.patience:
            break
    return best, best_val, t


def _backtrack(obj, params, current, grad, step, shrink=0.5, frac=1e-4, tries=40):
    for _ in range(tries):
        trial = obj.project(params + step * grad)
        val = obj(trial)
        if val >= current + frac * float((grad * (trial - params)).sum()):
            return trial, val
        step *= shrink
    return params, current


def optimize_weighted_value(pair, w, f=None, cfg=None):
    """Maximize the lower end of the weighted measure value over a measure family.

    Projected gradient ascent with central finite differences and per-row
    simplex projection; steps follow ``cfg.step_rule`` (Armijo backtracking
    by default, or ``c / sqrt(t)``); the best of ``cfg.restarts``
    runs is returned (ties go to the lowest restart index). Restart ``r`` is
    seeded from ``(cfg.seed, r)`` alone, so adding restarts never lowers the
    result and reruns are bit-identical.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    if not 0.0 <= w <= 1.0:
        raise SpecError(f"weight w must lie in [0, 1], got {w}", field="w")
    f = Potential.zero(pair.x.size) if f is None else f
    obj = _Objective(pair, w, f, cfg.family, cfg.n_max)
    best = None
    values, iters = [], []
    for r in range(cfg.restarts):
        rng = None if r == 0 else np.random.default_rng([cfg.seed, r])
        try:
            params, val, t = _ascend(obj, obj.start(rng), cfg)
        except (FloatingPointError, SpecError) as exc:
            values.append(float("nan"))
            iters.append(f"aborted: {exc}")
            continue
        values.append(val)
        iters.append(t)
        if best is None or val > best[1]:
            best = (params, val)
    if best is None:
        raise SpecError("every optimizer restart failed; see restart diagnostics")
    measure = obj.measure(best[0])
    interval = weighted_measure_value(pair, measure, w, f, max(cfg.n_max, 2))
    if cfg.family == "bernoulli":
        # exact for i.i.d. images, so the interval is degenerate
        interval = ValueInterval(best[1], best[1], interval.entropy, *_iid_factor(obj, best[0]), interval.integral)
    return OptimizationResult(measure, interval, best[1], values, iters)


def _iid_factor(obj, p):
    q = np.bincount(obj.table, weights=p, minlength=obj.ny)
    h = float(-xlogy(q, q).sum())
    return h, h


def carpet_optimal_measure(carpet, w=None):
    """Bernoulli weights ``p(x, y) = t(y) ** (w - 1) / sum_y' t(y') ** w`` on the digit set."""
    w = carpet.w if w is None else w
    t = carpet.column_counts()
    norm = sum(c**w for c in t.values())
    p = np.array([t[y] ** (w - 1) / norm for _, y in carpet.digits])
    return MarkovMeasure.bernoulli(p / p.sum())


@dataclass
class MisiurewiczState:
    """Representatives of the ``N``-cylinders and the weighted measure on them.

    Attributes
    ----------
    words : ndarray
        Admissible ``N``-words of ``x`` (one per cylinder ``B``).
    extensions : list of tuple
        Lexicographically least maximizing continuation of each word.
    sup : ndarray
        ``sup_B S_N f``, attained at the representative.
    image : ndarray
        Index of ``code(B)`` in ``image_words``.
    log_za : ndarray
        ``log Z_{N,A}`` per image word ``A``.
    log_z : float
    sigma : BlockDistribution
    """

    n: int
    w: float
    words: np.ndarray
    extensions: list
    sup: np.ndarray
    image_words: np.ndarray
    image: np.ndarray
    log_za: np.ndarray
    log_z: float
    sigma: BlockDistribution
    x: object = None

    def representative(self, idx, length):
        """Coordinates ``0..length-1`` of the representative of cylinder ``idx``."""
        seq = tuple(int(s) for s in self.words[idx]) + tuple(self.extensions[idx])
        if len(seq) >= length:
            return seq[:length]
        return seq + _greedy_tail(self.x, seq[-1], length - len(seq))


def _greedy_tail(x, last, length):
    out = []
    for _ in range(length):
        last = int(x.successors(last)[0])
        out.append(last)
    return tuple(out)


def misiurewicz_sigma(pair, w, f=None, n=1, cap=None):
    """Build ``sigma_N(B) = Z_{N,A(B)} ** (w - 1) exp(S_N f(x_B)) / Z_N``.

    The sums are evaluated by direct enumeration of ``N``-words, independent of
    the transfer-matrix sweep in :mod:`wentro.cover`.
    """
    if not 0.0 <= w <= 1.0:
        raise SpecError(f"weight w must lie in [0, 1], got {w}", field="w")
    f = Potential.zero(pair.x.size) if f is None else f
    f.check(pair.x)
    words = list(enumerate_words(pair.x, n, cap))
    extensions, sups = [], np.empty(len(words))
    for i, u in enumerate(words):
        if f.window == 1:
            ext, s = (), sum(f.table[(a,)] for a in u)
        else:
            ext, s = representative_extension(pair.x, f, u)
        extensions.append(ext)
        sups[i] = s
    arr = np.array(words, dtype=np.int64)
    images = np.asarray(pair.code.table)[arr]
    image_words, inverse = np.unique(images, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    log_za = np.array([logsumexp(sups[inverse == a]) for a in range(len(image_words))])
    log_z = float(logsumexp(w * log_za)) if w > 0 else math.log(len(image_words))
    log_sigma = (w - 1.0) * log_za[inverse] + sups - log_z
    sigma = BlockDistribution(n, arr, np.exp(log_sigma))
    return MisiurewiczState(n, w, arr, extensions, sups, image_words, inverse, log_za, log_z, sigma, pair.x)


def _h(p):
    return float(-xlogy(p, p).sum())


def misiurewicz_identity_residual(state, w=None, f=None):
    """``|w H(sigma) + (1 - w) H(pi_* sigma) + w int S_N f dsigma - log Z_N|``."""
    w = state.w if w is None else w
    p = state.sigma.probs
    image_mass = np.bincount(state.image, weights=p, minlength=len(state.image_words))
    lhs = w * _h(p) + (1 - w) * _h(image_mass) + w * float(p @ state.sup)
    return abs(lhs - state.log_z)


@dataclass(frozen=True)
class LowerBoundReport:
    passed: bool
    upstairs_lhs: float
    upstairs_rhs: float
    downstairs_lhs: float
    downstairs_rhs: float
    slack: float
    note: str = ""


def averaged_block_measure(state, pair, m_len):
    """``mu_N = (1/N) sum_n T^n_* sigma_N`` on ``M``-words, upstairs and downstairs.

    Coordinates past a representative's marked continuation follow the least
    admissible successor at every step.
    """
    n = state.n
    total = n + m_len - 1
    seqs = np.array([state.representative(i, total) for i in range(len(state.words))], dtype=np.int64)
    p = state.sigma.probs
    up, down = {}, {}
    table = np.asarray(pair.code.table)
    for shift in range(n):
        blocks = seqs[:, shift : shift + m_len]
        for b, mass in zip(map(tuple, blocks), p):
            up[b] = up.get(b, 0.0) + mass / n
            img = tuple(int(c) for c in table[list(b)])
            down[img] = down.get(img, 0.0) + mass / n
    return up, down


def misiurewicz_lower_bound_check(pair, w, f=None, n=8, m_len=2, state=None, cap=None):
    """Check ``H_{mu_N}(B^M)/M >= H_{sigma_N}(B^N)/N - 2 M log|B| / N`` and its image version."""
    if not 1 <= m_len <= n:
        raise SpecError("need 1 <= M <= N")
    state = misiurewicz_sigma(pair, w, f, n, cap) if state is None else state
    check_cap(len(state.words) * n, "averaged block measure", cap)
    up, down = averaged_block_measure(state, pair, m_len)
    p = state.sigma.probs
    image_mass = np.bincount(state.image, weights=p, minlength=len(state.image_words))
    nb, na = pair.x.size, pair.code.codomain.size
    up_lhs = _h(np.fromiter(up.values(), float)) / m_len
    up_rhs = _h(p) / n - 2 * m_len * math.log(nb) / n
    dn_lhs = _h(np.fromiter(down.values(), float)) / m_len
    dn_rhs = _h(image_mass) / n - 2 * m_len * math.log(na) / n if na > 1 else _h(image_mass) / n
    slack = min(up_lhs - up_rhs, dn_lhs - dn_rhs)
    return LowerBoundReport(slack >= -1e-9, up_lhs, up_rhs, dn_lhs, dn_rhs, slack)


def misiurewicz_partition_check(state, pair, w, f=None):
    """``|log Z_N (enumeration) - log Z_N (transfer sweep)|``."""
    return abs(state.log_z - weighted_partition_sum(pair, w, f, state.n))
