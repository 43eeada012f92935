"""Weighted partition sums over cylinder covers and bounds on their growth rate.

For a factor pair ``x -> y`` with 1-block code, weight ``w`` in ``[0, 1]`` and a
locally constant potential ``f`` the partition sum at length ``N`` is

    Z_N = sum_{v in L_N(y)} ( sum_{u in L_N(x), code(u) = v} exp(sup_[u] S_N f) ) ** w

with ``S_N f`` the Birkhoff sum. ``log Z_N / N`` converges to the weighted
pressure (the weighted entropy when ``f = 0``). Sums are accumulated in the log
domain.

The sweep behind every routine walks the language of ``y`` breadth first and
carries, per ``y``-word ``v``, the fiber transfer matrix ``W_v[i, s]``: total
weight of the ``x``-words over ``v`` that start with symbol ``i`` and end in
state ``s`` (the last ``k-1`` symbols for a window-``k`` potential).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import CapExceeded, SpecError, check_cap
from .symbolic import (
    BlockCode,
    FactorPair,
    higher_block_recode,
    image_presentation,
    power_shift,
)

SUBMULT_SLACK = 1e-9
MAX_REFINED_STATES = 256


@dataclass(frozen=True)
class Potential:
    """Locally constant potential: ``f(x) = table[x_0 .. x_{k-1}]`` (nats)."""

    window: int
    table: dict

    def __post_init__(self):
        if self.window < 1:
            raise SpecError("potential window must be >= 1", field="window")
        table = {}
        for key, value in dict(self.table).items():
            word = (key,) if isinstance(key, (int, np.integer)) else tuple(int(s) for s in key)
            if len(word) != self.window:
                raise SpecError(f"potential key {key!r} does not have length {self.window}")
            value = float(value)
            if not math.isfinite(value):
                raise SpecError(f"potential value for {key!r} is not finite")
            table[word] = value
        object.__setattr__(self, "table", table)

    @classmethod
    def zero(cls, size):
        return cls(1, {(i,): 0.0 for i in range(size)})

    @classmethod
    def from_symbol_values(cls, values):
        return cls(1, {(i,): float(v) for i, v in enumerate(values)})

    def is_zero(self):
        return all(v == 0.0 for v in self.table.values())

    def check(self, sft):
        from .symbolic import enumerate_words

        missing = [u for u in enumerate_words(sft, self.window) if u not in self.table]
        if missing:
            raise SpecError(
                f"potential is not defined on admissible word {missing[0]}", field="potential"
            )

    def dense(self, size):
        """Values indexed by the base-``size`` code of a window word; NaN if absent."""
        arr = np.full(size**self.window, np.nan)
        for word, value in self.table.items():
            if any(s >= size for s in word):
                raise SpecError(f"potential word {word} uses a symbol outside the alphabet")
            idx = 0
            for s in word:
                idx = idx * size + s
            arr[idx] = value
        return arr

    def __call__(self, word):
        return self.table[tuple(word)]

    def shifted(self, c):
        return Potential(self.window, {k: v + c for k, v in self.table.items()})

    def bounds(self):
        vals = list(self.table.values())
        return min(vals), max(vals)


def birkhoff_sums(f, words):
    """``sum_n f(u[n:n+k])`` over the windows lying inside each row of ``words``."""
    words = np.asarray(words, dtype=np.int64)
    k = f.window
    n_words, length = words.shape
    if length < k:
        return np.zeros(n_words)
    size = int(words.max()) + 1 if words.size else 1
    size = max(size, max((max(w) for w in f.table), default=0) + 1)
    dense = f.dense(size)
    idx = np.zeros((n_words, length - k + 1), dtype=np.int64)
    for t in range(k):
        idx = idx * size + words[:, t : length - k + 1 + t]
    vals = dense[idx]
    if np.isnan(vals).any():
        raise SpecError("potential evaluated on a word outside its table", field="potential")
    return vals.sum(axis=1)


def _extensions(sft, last, length):
    """Admissible continuations of ``length`` symbols after symbol ``last``, lexicographic."""
    out = [()]
    for _ in range(length):
        nxt = []
        for e in out:
            tail = e[-1] if e else last
            for s in sft.successors(tail):
                nxt.append(e + (int(s),))
        out = nxt
    return out


def _extremal_extension(sft, f, word, horizon, windows):
    """Max/min of the ``windows`` last Birkhoff terms over admissible continuations.

    ``word`` supplies the known prefix; windows start at positions
    ``len(word) - horizon`` onward. Returns ``(sup, inf, argmax_extension)``;
    ties go to the lexicographically least continuation.
    """
    k = f.window
    need = max(0, len(word) - horizon + windows - 1 + k - len(word))
    best, worst, arg = -math.inf, math.inf, None
    start = len(word) - horizon
    for e in _extensions(sft, word[-1], need):
        full = tuple(word) + e
        total = 0.0
        for t in range(start, start + windows):
            total += f.table[full[t : t + k]]
        if total > best:
            best, arg = total, e
        worst = min(worst, total)
    return best, worst, arg


def sup_birkhoff(pair, f, word, infimum=False):
    """``sup`` (or ``inf``) over the cylinder ``[word]`` of ``S_N f``, ``N = len(word)``.

    ``S_N f`` reads coordinates ``0 .. N+k-2``; the maximisation runs over the
    admissible ``(k-1)``-symbol continuations of ``word``. Returns ``-inf`` when
    the cylinder has no admissible continuation.
    """
    x = pair.x if isinstance(pair, FactorPair) else pair
    word = tuple(int(s) for s in word)
    if not word or not x.is_admissible(word):
        raise SpecError(f"word {word} is not admissible")
    n = len(word)
    sup, inf, arg = _extremal_extension(x, f, word, n, n)
    if arg is None:
        return -math.inf
    return inf if infimum else sup


def representative_extension(x, f, word):
    """Lexicographically least continuation attaining ``sup_[word] S_N f``."""
    word = tuple(word)
    sup, _, arg = _extremal_extension(x, f, word, len(word), len(word))
    return arg, sup


class _FiberModel:
    """Transfer data of a factor pair and potential, precomputed once."""

    def __init__(self, pair, f):
        x, code = pair.x, pair.code
        if code.window != 1:
            raise SpecError("factor pair code must be 1-block", field="code")
        f.check(x)
        self.pair = pair
        self.f = f
        self.k = k = f.window
        self.n = n = x.size
        self.r = max(k - 1, 1)
        if k <= 2:
            states = [(i,) for i in range(n)]
            strans = x.transitions
        else:
            xs, states = higher_block_recode(x, k - 1)
            strans = xs.transitions
        self.states = states
        ns = len(states)
        self.last = np.array([s[-1] for s in states])
        self.first = np.array([s[0] for s in states])

        # transition weights (log) and initial weights
        phi0 = np.zeros(ns)
        trans_w = np.zeros((ns, ns))
        for a in range(ns):
            if k == 1:
                phi0[a] = f.table[states[a]]
            for b in np.flatnonzero(strans[a]):
                if k == 1:
                    trans_w[a, b] = f.table[states[b]]
                else:
                    trans_w[a, b] = f.table[states[a] + (states[b][-1],)]
        self.phi0 = phi0

        # tail extremes for j trailing windows, j = 0..k-1
        self.tail_sup = np.zeros((k, ns))
        self.tail_inf = np.zeros((k, ns))
        self.tail_arg = [None] * ns
        for j in range(1, k):
            for a, s in enumerate(states):
                sup, inf, arg = _extremal_extension(x, f, s, k - 1, j)
                self.tail_sup[j, a] = sup
                self.tail_inf[j, a] = inf
                if j == k - 1:
                    self.tail_arg[a] = arg
        self.delta_tail = float((self.tail_sup[k - 1] - self.tail_inf[k - 1]).max()) if k > 1 else 0.0

        ny = code.codomain.size
        self.ny = ny
        table = np.array(code.table)
        self.fib = [np.flatnonzero(table == c) for c in range(ny)]
        self.fib_states = [np.flatnonzero(table[self.last] == c) for c in range(ny)]
        self.fib_first = [np.flatnonzero(table[self.first] == c) for c in range(ny)]
        self.sym_pos = np.empty(n, dtype=np.int64)
        for c in range(ny):
            self.sym_pos[self.fib[c]] = np.arange(len(self.fib[c]))
        # states -> last-symbol aggregation inside each fiber
        self.agg = []
        for c in range(ny):
            fs = self.fib_states[c]
            agg = np.zeros((len(fs), len(self.fib[c])))
            agg[np.arange(len(fs)), self.sym_pos[self.last[fs]]] = 1.0
            self.agg.append(agg)
        self.trans_weighted = {}
        self.trans_plain = {}
        for c in range(ny):
            for d in range(ny):
                rows, cols = self.fib_states[c], self.fib_states[d]
                allowed = strans[np.ix_(rows, cols)]
                if not allowed.any():
                    continue
                self.trans_plain[c, d] = allowed.astype(float)
                self.trans_weighted[c, d] = np.where(allowed, np.exp(trans_w[np.ix_(rows, cols)]), 0.0)
        self.code_table = table
        self._cross_matrix(x, f, strans)

    def _cross_matrix(self, x, f, strans):
        """Weights of the windows straddling a junction between two state words.

        ``cross[s, p]`` is ``exp`` of the ``k - 1`` windows of ``s + p`` that
        start inside ``s`` (zero when ``s + p`` is inadmissible). With it the
        window-interior weights concatenate exactly: ``V_{v1 v2} = V_{v1} cross V_{v2}``.
        """
        k, states = self.k, self.states
        ns = len(states)
        cross = np.zeros((ns, ns))
        if k == 1:
            cross[:] = x.transitions
        else:
            for a, s in enumerate(states):
                for b, q in enumerate(states):
                    if not x.transitions[s[-1], q[0]]:
                        continue
                    joined = s + q
                    cross[a, b] = math.exp(sum(f.table[joined[t : t + k]] for t in range(k - 1)))
        self.cross = cross
        images = [tuple(int(self.code_table[t]) for t in s) for s in states]
        groups = {}
        for a, img in enumerate(images):
            groups.setdefault(img, []).append(a)
        n_eff = 1
        for rows in groups.values():
            for cols in groups.values():
                n_eff = max(n_eff, int((cross[np.ix_(rows, cols)] > 0).sum()))
        self.n_eff = n_eff

    def initial_level(self):
        """Groups for words of length ``r``: ``{(c0, c): (W, logscale)}``."""
        groups = {}
        if self.k <= 2:
            for c in range(self.ny):
                fs = self.fib_states[c]
                mat = np.diag(np.exp(self.phi0[fs]))[None, :, :]
                groups[c, c] = mat
        else:
            prefixes = {}
            for a, s in enumerate(self.states):
                p = tuple(int(self.code_table[t]) for t in s)
                prefixes.setdefault(p, []).append(a)
            for p in sorted(prefixes):
                c0, c = p[0], p[-1]
                mat = np.zeros((len(self.fib_first[c0]), len(self.fib_states[c])))
                for a in prefixes[p]:
                    row = np.searchsorted(self.fib_first[c0], a)
                    col = np.searchsorted(self.fib_states[c], a)
                    mat[row, col] = 1.0
                groups.setdefault((c0, c), []).append(mat)
            groups = {key: np.stack(mats) for key, mats in groups.items()}
        return {key: _normalized(mat, np.zeros(len(mat))) for key, mat in groups.items()}

    def extend(self, groups, weighted=True, cap=None):
        table = self.trans_weighted if weighted else self.trans_plain
        out = {}
        total = 0
        for (c0, c), (mat, scale) in sorted(groups.items()):
            for d in range(self.ny):
                trans = table.get((c, d))
                if trans is None:
                    continue
                new = mat @ trans
                keep = new.reshape(len(new), -1).max(axis=1) > 0
                if not keep.any():
                    continue
                out.setdefault((c0, d), []).append(_normalized(new[keep], scale[keep]))
                total += int(keep.sum())
        check_cap(total, "image words in the weighted sum", cap)
        return {
            key: (np.concatenate([m for m, _ in parts]), np.concatenate([s for _, s in parts]))
            for key, parts in out.items()
        }

    def terminal(self, groups, windows, infimum=False):
        """Per group ``(c0, c, T, logscale, W)``.

        ``T[p, j]`` runs over first states and last symbols and includes the
        trailing windows; ``W`` is the raw state-to-state weight without them.
        """
        tail = (self.tail_inf if infimum else self.tail_sup)[windows]
        out = []
        for (c0, c), (mat, scale) in sorted(groups.items()):
            weights = np.exp(tail[self.fib_states[c]])
            t = (mat * weights[None, None, :]) @ self.agg[c]
            out.append((c0, c, t, scale, mat))
        return out

    def sweep(self, n_max, cap=None):
        """Yield ``(N, terminal data)`` for ``N = r .. n_max`` at resolution 0."""
        groups = self.initial_level()
        length = self.r
        while length <= n_max:
            yield length, groups
            if length == n_max:
                return
            groups = self.extend(groups, cap=cap)
            length += 1

    def groups_at_resolution(self, n, m, cap=None):
        """Groups for words of length ``n + m`` whose weights count windows ``< n``."""
        length_total = n + m
        groups = self.initial_level()
        length = self.r
        while length < length_total:
            t = length - self.r
            window = t + 1 if self.k == 1 else t
            groups = self.extend(groups, weighted=window <= n - 1, cap=cap)
            length += 1
        return groups

    def tail_windows(self, m):
        return max(0, self.k - 1 - m) if self.k > 1 else 0


def _normalized(mat, scale):
    peak = mat.reshape(len(mat), -1).max(axis=1)
    peak = np.where(peak > 0, peak, 1.0)
    return mat / peak[:, None, None], scale + np.log(peak)


def _log_inner(terminal):
    parts = []
    for _, _, t, scale, _ in terminal:
        with np.errstate(divide="ignore"):
            parts.append(np.log(t.sum(axis=(1, 2))) + scale)
    return np.concatenate(parts) if parts else np.empty(0)


def _powered_log(log_values, w):
    """``w * log x`` with the convention ``x ** 0 = 1`` for ``x > 0``."""
    if w == 0:
        return np.where(np.isfinite(log_values), 0.0, -np.inf)
    return w * log_values


def _log_sum(values, precision):
    values = values[np.isfinite(values)]
    if values.size == 0:
        return -math.inf
    if precision == "extended":
        peak = values.max()
        total = np.sum(np.exp((values - peak).astype(np.longdouble)), dtype=np.longdouble)
        return float(peak + np.log(total))
    return float(logsumexp(values))


def _brute_log_sum(pair, f, w, n, m=0, infimum=False, precision="double", cap=None):
    """Direct evaluation by enumerating ``x``-words (short lengths only)."""
    from .symbolic import word_array

    words = word_array(pair.x, n + m, cap)
    k = f.window
    length = n + m
    values = np.empty(len(words))
    for idx, u in enumerate(words):
        u = tuple(int(s) for s in u)
        need = max(0, n + k - 1 - length)
        best, worst = -math.inf, math.inf
        for e in _extensions(pair.x, u[-1], need):
            full = u + e
            total = sum(f.table[full[t : t + k]] for t in range(n))
            best = max(best, total)
            worst = min(worst, total)
        values[idx] = worst if infimum else best
    images = np.array(pair.code.table)[words]
    _, inverse = np.unique(images, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    inner = np.full(inverse.max() + 1, -np.inf)
    for key in range(len(inner)):
        inner[key] = logsumexp(values[inverse == key])
    return _log_sum(_powered_log(inner, w), precision)


def _check_weight(w):
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise SpecError(f"weight w must lie in [0, 1], got {w}", field="w")
    return w


def _check_pair(pair, f):
    if f is None:
        f = Potential.zero(pair.x.size)
    return f


def weighted_partition_sum(pair, w, f=None, n=1, resolution=0, precision="double", cap=None):
    """``log Z_N`` for cylinders of length ``N + resolution``."""
    w = _check_weight(w)
    f = _check_pair(pair, f)
    if n < 1:
        raise SpecError("N must be >= 1")
    return _partition_sum(pair, w, f, n, resolution, False, precision, cap)


def separated_lower_bound(pair, w, f=None, n=1, precision="double", cap=None):
    """``log Z'_N`` with ``inf_[u] S_N f`` in place of the supremum.

    Each length-``N`` image word carries one marked point of an
    ``epsilon``-separated set, so no cover element can serve two of them; the
    sum with cylinder infima is therefore a lower bound at matching resolution.
    """
    w = _check_weight(w)
    f = _check_pair(pair, f)
    if n < 1:
        raise SpecError("N must be >= 1")
    return _partition_sum(pair, w, f, n, 0, True, precision, cap)


def _partition_sum(pair, w, f, n, m, infimum, precision, cap):
    model = _FiberModel(pair, f)
    if n + m < model.r:
        return _brute_log_sum(pair, f, w, n, m, infimum, precision, cap)
    groups = model.groups_at_resolution(n, m, cap)
    terminal = model.terminal(groups, model.tail_windows(m), infimum)
    return _log_sum(_powered_log(_log_inner(terminal), w), precision)


@dataclass
class GrowthSequence:
    """``log Z_N`` for ``N = 1..N_max`` with bounds on ``lim log Z_N / N``.

    ``lower_kind`` is ``"rigorous"`` when ``lower`` is a proven bound and
    ``"heuristic"`` when it is the difference estimate. ``estimate`` always holds
    ``log Z_{N_max} - log Z_{N_max - 1}``.
    """

    w: float
    values: list
    upper: float
    lower: float
    lower_kind: str
    estimate: float
    resolution: int = 0
    upper_by_n: list = field(default_factory=list)
    lower_by_n: list = field(default_factory=list)
    sources: dict = field(default_factory=dict)

    @property
    def n_max(self):
        return len(self.values)

    def submultiplicativity_violations(self, slack=SUBMULT_SLACK):
        """``(N, M, excess)`` for every stored split with ``log Z_{N+M} > log Z_N + log Z_M + slack``."""
        bad = []
        vals = self.values
        for a in range(1, len(vals) + 1):
            for b in range(1, len(vals) + 1 - a):
                excess = vals[a + b - 1] - vals[a - 1] - vals[b - 1]
                if excess > slack:
                    bad.append((a, b, excess))
        return bad

    def to_record(self):
        return {
            "w": self.w,
            "N": self.n_max,
            "logZ": list(self.values),
            "upper": self.upper,
            "lower": self.lower,
            "lower_kind": self.lower_kind,
            "estimate": self.estimate,
            "resolution": self.resolution,
        }


class _Refinement:
    """Accumulates the endpoint- and image-state-refined partition matrices."""

    def __init__(self, model, w, y_states):
        self.model = model
        self.w = w
        self.y_states = y_states

    def x_matrix(self, terminal):
        """``Z^X_N[p, s] = sum_v V_v[p, s] ** w`` over first/last states, as ``(scaled, log_scale)``."""
        model = self.model
        ns = len(model.states)
        w = self.w
        peak = -math.inf
        logs = []
        for c0, c, _, scale, raw in terminal:
            with np.errstate(divide="ignore"):
                lg = _powered_log(np.log(raw) + scale[:, None, None], w)
            logs.append((c0, c, lg))
            if lg.size:
                peak = max(peak, float(lg.max()))
        mat = np.zeros((ns, ns))
        for c0, c, lg in logs:
            block = np.exp(lg - peak).sum(axis=0)
            mat[np.ix_(model.fib_first[c0], model.fib_states[c])] += block
        return mat, peak

    def y_matrix(self, terminal):
        """``log`` of ``Z^Y_N[q, q'] = sum_{v : delta(q, v) = q'} inner(q, v) ** w``."""
        states, allowed, lookup = self.y_states
        model = self.model
        nq = len(states)
        entries = []
        peak = -math.inf
        for c0, c, t, scale, _ in terminal:
            first = model.first[model.fib_first[c0]]
            for q in range(nq):
                mask = allowed[q][first]
                if not mask.any():
                    continue
                sub = t[:, mask, :].sum(axis=1)
                inner = sub.sum(axis=1)
                live = inner > 0
                if not live.any():
                    continue
                support = sub[live] > 0
                bits = (support * (1 << np.arange(support.shape[1]))).sum(axis=1)
                targets = np.array([lookup[c].get(int(b), -1) for b in bits])
                if (targets < 0).any():
                    return None, None
                lg = _powered_log(np.log(inner[live]) + scale[live], self.w)
                entries.append((q, targets, lg))
                peak = max(peak, float(lg.max()))
        mat = np.zeros((nq, nq))
        for q, targets, lg in entries:
            np.add.at(mat[q], targets, np.exp(lg - peak))
        return mat, peak


def _image_states(pair, model):
    """Subset states of the image presentation, their successor masks and a lookup."""
    if model.n > 62 or any(len(f) > 62 for f in model.fib):
        return None
    try:
        pres = image_presentation(pair.x, pair.code, cap=MAX_REFINED_STATES, minimize=False)
    except CapExceeded:
        return None
    states = pres.subsets
    reach = pair.x.transitions
    allowed = [reach[sorted(s)].any(axis=0) for s in states]
    lookup = [dict() for _ in range(model.ny)]
    for idx, s in enumerate(states):
        cs = {int(model.code_table[j]) for j in s}
        if len(cs) != 1:
            continue
        (c,) = cs
        bits = sum(1 << int(model.sym_pos[j]) for j in s)
        lookup[c][bits] = idx
    return states, allowed, lookup


def _power_entries(mat, w):
    if w == 0:
        return (mat > 0).astype(float)
    return np.where(mat > 0, mat, 0.0) ** w


def _perron_bracket(mat):
    """``(lo, hi)`` Collatz-Wielandt bracket on the Perron root of a non-negative matrix."""
    from scipy.sparse.csgraph import connected_components

    if not (mat > 0).any():
        return 0.0, 0.0
    ncomp, labels = connected_components(mat > 0, directed=True, connection="strong")
    lo_best, hi_best = 0.0, 0.0
    for comp in range(ncomp):
        idx = np.flatnonzero(labels == comp)
        block = mat[np.ix_(idx, idx)]
        if len(idx) == 1:
            val = float(block[0, 0])
            lo_best, hi_best = max(lo_best, val), max(hi_best, val)
            continue
        scale = block.max()
        shifted = block / scale + np.eye(len(idx))
        v = np.ones(len(idx))
        lo = hi = None
        for _ in range(100_000):
            y = shifted @ v
            ratios = y / v
            lo, hi = ratios.min(), ratios.max()
            if hi - lo <= 1e-14 * hi:
                break
            v = y / y.max()
        lo_best = max(lo_best, (lo - 1.0) * scale)
        hi_best = max(hi_best, (hi - 1.0) * scale)
    return lo_best, hi_best


def _gluing_constant(pair, model, w, f):
    """``(g, log c)`` with ``Z_{N+M+g} >= c Z_N Z_M``; ``None`` if ``x`` is not primitive."""
    g = pair.x.primitivity_gap()
    if g is None:
        return None
    n_glue = 1 if g == 0 else pair.y.count_words(g)
    fmin, _ = f.bounds()
    log_ce = g * fmin - model.delta_tail
    log_c = (w - 1.0) * math.log(n_glue) + w * log_ce
    return g, log_c


def _endpoint_constant(model, w):
    """``log c`` with ``Z^X_{N+M} >= c Z^X_N C^w Z^X_M`` entrywise.

    A junction sum has at most ``n_eff`` non-zero terms and
    ``(sum of n terms) ** w >= n ** (w - 1) * sum of their w-th powers``.
    """
    return (w - 1.0) * math.log(model.n_eff)


def growth_limit_bounds(pair, w, f=None, n_max=12, resolution=0, precision="double", cap=None):
    """Tabulate ``log Z_N`` and bound the limit of ``log Z_N / N``.

    Upper bounds (each valid for every ``N``):

    * ``log Z_N / N``, by sub-multiplicativity;
    * ``log rho(Z^X_N C^w) / N``. Here ``Z^X_N[p, s]`` sums ``V_v[p, s] ** w``
      over image words, ``V_v[p, s]`` is the fiber weight of ``v`` between
      first state ``p`` and last state ``s`` counting only windows inside the
      word, and ``C`` carries the windows across a junction. The product
      ``Z^X_N C^w`` is sub-multiplicative in ``N``;
    * ``log rho(Z^Y_N) / N`` with ``Z^Y_N`` indexed by states of the subset
      presentation of the image.

    Lower bounds:

    * ``(log c + log rho(Z^X_N C^w)) / N``, from entrywise
      super-multiplicativity up to ``c = n_eff ** (w - 1)``;
    * ``(log Z_N + log c) / (N + g)`` when ``x`` is primitive with gluing gap ``g``;
    * at ``w = 0`` the image-state matrix is exactly multiplicative, giving
      ``log rho(Z^Y_N) / N`` as a lower bound too.

    Perron roots enter through a Collatz-Wielandt bracket, using its upper end
    for upper bounds and its lower end for lower bounds.
    """
    w = _check_weight(w)
    f = _check_pair(pair, f)
    if n_max < 2:
        raise SpecError("N_max must be >= 2", field="nmax")
    model = _FiberModel(pair, f)
    y_states = _image_states(pair, model)
    refine = _Refinement(model, w, y_states)
    cross_w = _power_entries(model.cross, w)

    values = [None] * n_max
    uppers = [math.inf] * n_max
    lowers = [-math.inf] * n_max
    sources = {"upper": None, "lower": None}
    best_up, best_lo = (math.inf, None), (-math.inf, None)
    endpoint_c = _endpoint_constant(model, w)

    def offer(n, value, kind, upper):
        nonlocal best_up, best_lo
        if not math.isfinite(value):
            return
        if upper:
            uppers[n - 1] = min(uppers[n - 1], value)
            if value < best_up[0]:
                best_up = (value, f"{kind}@N={n}")
        else:
            lowers[n - 1] = max(lowers[n - 1], value)
            if value > best_lo[0]:
                best_lo = (value, f"{kind}@N={n}")

    for n in range(1, min(model.r, n_max + 1)):
        values[n - 1] = _brute_log_sum(pair, f, w, n, 0, False, precision, cap)

    for n, groups in model.sweep(n_max, cap):
        terminal = model.terminal(groups, model.tail_windows(0))
        values[n - 1] = _log_sum(_powered_log(_log_inner(terminal), w), precision)
        xmat, xpeak = refine.x_matrix(terminal)
        lo, hi = _perron_bracket(xmat @ cross_w)
        if hi > 0:
            offer(n, (math.log(hi) + xpeak) / n, "endpoint", True)
        if lo > 0:
            offer(n, (math.log(lo) + xpeak + endpoint_c) / n, "endpoint", False)
        if y_states is not None:
            ymat, ypeak = refine.y_matrix(terminal)
            if ymat is not None:
                lo, hi = _perron_bracket(ymat)
                if hi > 0:
                    offer(n, (math.log(hi) + ypeak) / n, "image-state", True)
                if w == 0 and lo > 0:
                    offer(n, (math.log(lo) + ypeak) / n, "image-state", False)

    if resolution:
        values = [
            _partition_sum(pair, w, f, n, resolution, False, precision, cap)
            for n in range(1, n_max + 1)
        ]

    glue = _gluing_constant(pair, model, w, f)
    for n in range(1, n_max + 1):
        offer(n, values[n - 1] / n, "fekete", True)
        if glue is not None and resolution == 0:
            g, log_c = glue
            offer(n, (values[n - 1] + log_c) / (n + g), "gluing", False)

    estimate = values[-1] - values[-2]
    upper = best_up[0]
    lower = best_lo[0]
    kind = "rigorous"
    if not math.isfinite(lower):
        lower, kind = estimate, "heuristic"
    sources = {"upper": best_up[1], "lower": best_lo[1]}
    return GrowthSequence(
        w=w,
        values=values,
        upper=upper,
        lower=lower,
        lower_kind=kind,
        estimate=estimate,
        resolution=resolution,
        upper_by_n=uppers,
        lower_by_n=lowers,
        sources=sources,
    )


def power_pair(pair, f, m):
    """The pair ``(x, T^m) -> (y, S^m)`` with potential ``S_m f``, as 1-block data."""
    if m == 1:
        return pair, f
    xm, words = power_shift(pair.x, m)
    table = pair.code.table
    images = sorted({tuple(table[s] for s in u) for u in words})
    index = {v: i for i, v in enumerate(images)}
    code = BlockCode(
        xm.alphabet,
        type(pair.code.codomain)(len(images), [",".join(map(str, v)) for v in images]),
        [index[tuple(table[s] for s in u)] for u in words],
    )
    new_pair = FactorPair.from_code(xm, code)
    k = f.window
    k_new = 1 + -(-(k - 1) // m)
    new_table = {}
    for block in _power_windows(xm, k_new):
        flat = sum((words[s] for s in block), ())
        new_table[block] = sum(f.table[flat[t : t + k]] for t in range(m))
    return new_pair, Potential(k_new, new_table)


def _power_windows(sft, k):
    from .symbolic import enumerate_words

    return list(enumerate_words(sft, k))


def amplification_check(pair, w, f=None, m=2, n=2, precision="double", cap=None):
    """``|log Z^(power)_N - log Z_{mN}|`` for the ``m``-th power system."""
    w = _check_weight(w)
    f = _check_pair(pair, f)
    if m < 1 or n < 1:
        raise SpecError("m and N must be >= 1")
    powered, fm = power_pair(pair, f, m)
    lhs = weighted_partition_sum(powered, w, fm, n, precision=precision, cap=cap)
    rhs = weighted_partition_sum(pair, w, f, m * n, precision=precision, cap=cap)
    return abs(lhs - rhs)
