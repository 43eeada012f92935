"""Subshifts of finite type, 1-block codes and their sofic images.

Symbols are integers ``0..size-1``. Words are tuples of symbols. An SFT is
given by a boolean transition matrix: ``transitions[i, j]`` means the
two-letter word ``ij`` is allowed. Everything here is one-sided; all the
quantities computed downstream only look at finite words.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded, ConvergenceError, SpecError, check_cap

Word = tuple

DETERMINIZATION_CAP = 10**6


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple | None = None

    def __post_init__(self):
        if self.size < 1:
            raise SpecError("alphabet size must be >= 1", field="alphabet_size")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.size:
                raise SpecError(
                    f"expected {self.size} labels, got {len(labels)}", field="labels"
                )
            if len(set(labels)) != len(labels):
                raise SpecError("labels must be distinct", field="labels")
            object.__setattr__(self, "labels", labels)

    def label(self, symbol):
        return self.labels[symbol] if self.labels is not None else str(symbol)


def _readonly(array):
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def essential_core(matrix):
    """Indices of the symbols that lie on a bi-infinite path of ``matrix``."""
    alive = np.ones(len(matrix), dtype=bool)
    while True:
        sub = matrix & alive[:, None] & alive[None, :]
        keep = alive & sub.any(axis=1) & sub.any(axis=0)
        if (keep == alive).all():
            return np.flatnonzero(alive)
        alive = keep


class Sft:
    """One-step subshift of finite type.

    Symbols that cannot occur in an infinite sequence are pruned with a
    warning; ``kept`` records the original index of each surviving symbol.
    """

    def __init__(self, transitions, labels=None):
        matrix = np.asarray(transitions)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise SpecError("transitions must be a non-empty square matrix", field="transitions")
        if not np.isin(matrix, (0, 1, True, False)).all():
            raise SpecError("transitions must contain only 0/1 entries", field="transitions")
        matrix = matrix.astype(bool)
        if labels is not None and len(labels) != len(matrix):
            raise SpecError(f"expected {len(matrix)} labels, got {len(labels)}", field="labels")

        kept = essential_core(matrix)
        if len(kept) == 0:
            raise SpecError("SFT has no infinite sequences", field="transitions")
        if len(kept) < len(matrix):
            dropped = sorted(set(range(len(matrix))) - set(kept.tolist()))
            warnings.warn(f"pruning non-essential symbols {dropped}", stacklevel=2)
            if labels is None:
                labels = [str(i) for i in range(len(matrix))]
            labels = [labels[i] for i in kept]
            matrix = matrix[np.ix_(kept, kept)]

        self.alphabet = Alphabet(len(matrix), None if labels is None else tuple(labels))
        self.transitions = _readonly(matrix)
        self.kept = tuple(int(i) for i in kept)

    @classmethod
    def full(cls, size, labels=None):
        return cls(np.ones((size, size), dtype=bool), labels)

    @classmethod
    def golden_mean(cls):
        return cls([[1, 1], [1, 0]])

    @property
    def size(self):
        return self.alphabet.size

    def __repr__(self):
        return f"Sft(size={self.size}, allowed={int(self.transitions.sum())})"

    def __eq__(self, other):
        return (
            isinstance(other, Sft)
            and self.alphabet == other.alphabet
            and np.array_equal(self.transitions, other.transitions)
        )

    def __hash__(self):
        return hash((self.alphabet, self.transitions.tobytes()))

    def is_full(self):
        return bool(self.transitions.all())

    def is_admissible(self, word):
        if len(word) == 0:
            return True
        if any(not 0 <= s < self.size for s in word):
            return False
        return all(self.transitions[a, b] for a, b in zip(word, word[1:]))

    def successors(self, symbol):
        return np.flatnonzero(self.transitions[symbol])

    def primitivity_gap(self):
        """Least ``g >= 0`` with every ``u e v`` gluable through some ``e`` of length ``g``.

        Equivalently the least ``g`` with ``A^(g+1) > 0``. Returns ``None`` when
        the matrix is not primitive.
        """
        a = self.transitions.astype(np.int64)
        n = self.size
        power = a.copy()
        # Wielandt bound on the primitivity exponent.
        for g in range((n - 1) ** 2 + 1):
            if (power > 0).all():
                return g
            power = np.minimum(power @ a, 1)
        return None

    def is_primitive(self):
        return self.primitivity_gap() is not None


def count_words(sft, n):
    """Exact number of admissible words of length ``n``."""
    if n < 1:
        raise SpecError("word length must be >= 1")
    rows = [[int(b) for b in row] for row in sft.transitions]
    vec = [1] * sft.size
    for _ in range(n - 1):
        vec = [sum(v for v, allowed in zip(vec, col) if allowed) for col in zip(*rows)]
    return sum(vec)


def enumerate_words(sft, n, cap=None) -> Iterator[Word]:
    """Yield the admissible words of length ``n`` in lexicographic order."""
    if n < 1:
        raise SpecError("word length must be >= 1")
    check_cap(count_words(sft, n), f"words of length {n}", cap)
    succ = [tuple(int(j) for j in sft.successors(i)) for i in range(sft.size)]

    def extend(prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for s in succ[prefix[-1]]:
            prefix.append(s)
            yield from extend(prefix)
            prefix.pop()

    for first in range(sft.size):
        yield from extend([first])


def word_array(sft, n, cap=None):
    """All admissible words of length ``n`` as an ``(count, n)`` array, lexicographic."""
    if n < 1:
        raise SpecError("word length must be >= 1")
    check_cap(count_words(sft, n), f"words of length {n}", cap)
    words = np.arange(sft.size, dtype=np.int64)[:, None]
    degree = sft.transitions.sum(axis=1)
    succ_table = [sft.successors(i) for i in range(sft.size)]
    for _ in range(n - 1):
        last = words[:, -1]
        reps = degree[last]
        parents = np.repeat(np.arange(len(words)), reps)
        nxt = np.concatenate([succ_table[s] for s in last]) if len(last) else np.empty(0, np.int64)
        words = np.column_stack([words[parents], nxt])
    return words


def _scc_spectral_radius(block, tol, max_iter):
    """Perron root of an irreducible non-negative block.

    Power iteration on ``block + I`` (primitive whenever ``block`` is
    irreducible, so periodic blocks still converge) with the Collatz-Wielandt
    bracket ``min (Bx)_i/x_i <= rho(B) <= max (Bx)_i/x_i`` as stopping rule.
    """
    n = len(block)
    if n == 1:
        return float(block[0, 0])
    shifted = block + np.eye(n)
    x = np.ones(n)
    for _ in range(max_iter):
        y = shifted @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi) - 1.0
        x = y / y.max()
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps (bracket [{lo - 1}, {hi - 1}])"
    )


def spectral_radius(matrix, tol=1e-13, max_iter=200_000):
    """Spectral radius of a non-negative square matrix via its strong components."""
    b = np.asarray(matrix, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("matrix must be square")
    if (b < 0).any():
        raise ValueError("matrix must be non-negative")
    ncomp, labels = connected_components(b > 0, directed=True, connection="strong")
    rho = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        block = b[np.ix_(idx, idx)]
        if len(idx) == 1 and block[0, 0] == 0:
            continue
        rho = max(rho, _scc_spectral_radius(block, tol, max_iter))
    return rho


def perron_entropy(system, tol=1e-13):
    """Topological entropy in nats: log of the Perron root of the adjacency matrix.

    ``system`` may be an :class:`Sft`, a :class:`SoficPresentation` (a
    right-resolving presentation, so its edge-count matrix carries the entropy)
    or a raw non-negative matrix.
    """
    if isinstance(system, Sft):
        matrix = system.transitions
    elif isinstance(system, SoficPresentation):
        matrix = system.adjacency()
    else:
        matrix = system
    rho = spectral_radius(matrix, tol=tol)
    return float(np.log(rho)) if rho > 0 else float("-inf")


def higher_block_recode(sft, k, cap=None):
    """The ``k``-block presentation of ``sft``.

    Returns ``(recoded, words)`` where ``words[s]`` is the ``k``-word that
    symbol ``s`` of ``recoded`` stands for. Symbol ``s`` may follow ``t`` when
    their words overlap in ``k-1`` letters.
    """
    if k < 1:
        raise SpecError("block length must be >= 1")
    if k == 1:
        return sft, [(i,) for i in range(sft.size)]
    arr = word_array(sft, k, cap)
    words = [tuple(int(s) for s in row) for row in arr]
    index = {w: i for i, w in enumerate(words)}
    matrix = np.zeros((len(words), len(words)), dtype=bool)
    for i, w in enumerate(words):
        for s in sft.successors(w[-1]):
            j = index.get(w[1:] + (int(s),))
            if j is not None:
                matrix[i, j] = True
    labels = None
    if sft.alphabet.labels is not None:
        labels = ["".join(sft.alphabet.label(s) for s in w) for w in words]
    else:
        labels = [",".join(str(s) for s in w) for w in words]
    return Sft(matrix, labels), words


def power_shift(sft, m, cap=None):
    """Presentation of ``(X, T^m)``: symbols are ``m``-words read without overlap."""
    if m < 1:
        raise SpecError("power must be >= 1")
    if m == 1:
        return sft, [(i,) for i in range(sft.size)]
    arr = word_array(sft, m, cap)
    words = [tuple(int(s) for s in row) for row in arr]
    first = arr[:, 0]
    last = arr[:, -1]
    matrix = sft.transitions[np.ix_(last, first)]
    labels = [",".join(str(s) for s in w) for w in words]
    return Sft(matrix, labels), words


@dataclass(frozen=True)
class BlockCode:
    """Sliding block code. ``window == 1``: ``table[i]`` is the image of symbol ``i``.

    For ``window > 1`` the table maps admissible ``window``-words (tuples) to
    codomain symbols; use :func:`recode_code` to bring it to window 1.
    """

    domain: Alphabet
    codomain: Alphabet
    table: object
    window: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise SpecError("code window must be >= 1", field="code")
        if self.window == 1:
            table = tuple(int(c) for c in self.table)
            if len(table) != self.domain.size:
                raise SpecError(
                    f"code table has {len(table)} entries for {self.domain.size} symbols",
                    field="code",
                )
            if any(not 0 <= c < self.codomain.size for c in table):
                raise SpecError("code table entry outside the codomain alphabet", field="code")
            object.__setattr__(self, "table", table)
        else:
            table = {tuple(int(s) for s in k): int(v) for k, v in dict(self.table).items()}
            if any(len(k) != self.window for k in table):
                raise SpecError("code table keys must have the window length", field="code")
            if any(not 0 <= c < self.codomain.size for c in table.values()):
                raise SpecError("code table entry outside the codomain alphabet", field="code")
            object.__setattr__(self, "table", table)

    @classmethod
    def from_table(cls, table, codomain_size=None, domain_labels=None, codomain_labels=None):
        table = [int(c) for c in table]
        if codomain_size is None:
            codomain_size = max(table) + 1
        return cls(
            Alphabet(len(table), domain_labels),
            Alphabet(codomain_size, codomain_labels),
            table,
        )

    def apply(self, word):
        if self.window != 1:
            k = self.window
            return tuple(self.table[tuple(word[i : i + k])] for i in range(len(word) - k + 1))
        return tuple(self.table[s] for s in word)

    def fibers(self):
        """``fibers[c]`` lists the domain symbols that map to ``c`` (window 1)."""
        out = [[] for _ in range(self.codomain.size)]
        for s, c in enumerate(self.table):
            out[c].append(s)
        return [tuple(f) for f in out]


def recode_code(x, code, cap=None):
    """Recode ``x`` to its ``k``-block presentation so that ``code`` becomes 1-block."""
    if code.window == 1:
        return x, code
    xk, words = higher_block_recode(x, code.window, cap)
    try:
        table = [code.table[w] for w in words]
    except KeyError as exc:
        raise SpecError(f"code table misses admissible word {exc.args[0]}", field="code") from exc
    return xk, BlockCode(xk.alphabet, code.codomain, table)


class SoficPresentation:
    """Deterministic (right-resolving) labelled graph.

    ``delta[q, c]`` is the state reached from ``q`` on symbol ``c`` or ``-1``.
    The language is the set of labels of paths leaving ``start``; every state
    is reachable from ``start`` and its follower set is contained in that of
    ``start``. ``subsets`` records, for presentations built by the subset
    construction, the set of upstairs symbols each state stands for.
    """

    def __init__(self, alphabet, delta, start=0, subsets=None):
        delta = np.asarray(delta, dtype=np.int64)
        if delta.ndim != 2 or delta.shape[1] != alphabet.size:
            raise SpecError("delta must have one column per symbol")
        if ((delta < -1) | (delta >= len(delta))).any():
            raise SpecError("delta refers to a missing state")
        self.alphabet = alphabet
        self.delta = _readonly(delta)
        self.start = int(start)
        self.subsets = None if subsets is None else tuple(frozenset(s) for s in subsets)

    @classmethod
    def from_sft(cls, sft):
        """States: one per symbol plus a start state that reads any symbol."""
        n = sft.size
        delta = -np.ones((n + 1, n), dtype=np.int64)
        delta[n] = np.arange(n)
        for i in range(n):
            delta[i, sft.successors(i)] = sft.successors(i)
        return cls(sft.alphabet, delta, start=n)

    @property
    def num_states(self):
        return len(self.delta)

    def __repr__(self):
        return f"SoficPresentation(states={self.num_states}, symbols={self.alphabet.size})"

    def adjacency(self):
        """Edge counts between states."""
        n = self.num_states
        adj = np.zeros((n, n))
        for q in range(n):
            for c in range(self.alphabet.size):
                t = self.delta[q, c]
                if t >= 0:
                    adj[q, t] += 1
        return adj

    def read(self, word, state=None):
        q = self.start if state is None else state
        for c in word:
            if not 0 <= c < self.alphabet.size:
                return -1
            q = self.delta[q, c]
            if q < 0:
                return -1
        return int(q)

    def accepts(self, word):
        return self.read(word) >= 0

    def count_words(self, n):
        vec = [0] * self.num_states
        vec[self.start] = 1
        for _ in range(n):
            new = [0] * self.num_states
            for q, v in enumerate(vec):
                if v:
                    for t in self.delta[q]:
                        if t >= 0:
                            new[t] += v
            vec = new
        return sum(vec)

    def words(self, n, cap=None):
        """Language words of length ``n`` in lexicographic order."""
        check_cap(self.count_words(n), f"presentation words of length {n}", cap)
        out = []

        def extend(prefix, q):
            if len(prefix) == n:
                out.append(tuple(prefix))
                return
            for c in range(self.alphabet.size):
                t = self.delta[q, c]
                if t >= 0:
                    prefix.append(c)
                    extend(prefix, t)
                    prefix.pop()

        extend([], self.start)
        return out

    def minimized(self):
        """Merge states with equal follower sets (Moore partition refinement)."""
        n, k = self.delta.shape
        block = np.zeros(n, dtype=np.int64)
        while True:
            signature = {}
            new = np.empty(n, dtype=np.int64)
            for q in range(n):
                key = (block[q],) + tuple(block[t] if t >= 0 else -1 for t in self.delta[q])
                new[q] = signature.setdefault(key, len(signature))
            if len(signature) == len(set(block.tolist())):
                break
            block = new
        # renumber blocks in order of first reach from the start state
        order = {}
        queue = deque([self.start])
        seen = {self.start}
        while queue:
            q = queue.popleft()
            order.setdefault(block[q], len(order))
            for t in self.delta[q]:
                if t >= 0 and t not in seen:
                    seen.add(int(t))
                    queue.append(int(t))
        delta = -np.ones((len(order), k), dtype=np.int64)
        subsets = [set() for _ in order] if self.subsets is not None else None
        for q in seen:
            b = order[block[q]]
            for c in range(k):
                t = self.delta[q, c]
                if t >= 0:
                    delta[b, c] = order[block[t]]
            if subsets is not None:
                subsets[b] |= self.subsets[q]
        return SoficPresentation(self.alphabet, delta, order[block[self.start]], subsets)


def image_presentation(x, code, cap=DETERMINIZATION_CAP, minimize=True):
    """Deterministic presentation of the image of ``x`` under a 1-block ``code``.

    Subset construction on the graph whose vertices are the symbols of ``x``,
    starting from the set of all symbols. A subset records the possible last
    upstairs symbols of a preimage. With ``minimize`` the result is merged to
    follower-separated form (state subsets become unions).
    """
    if code.window != 1:
        raise SpecError("image_presentation needs a 1-block code; recode first", field="code")
    if code.domain.size != x.size:
        raise SpecError("code domain does not match the SFT alphabet", field="code")
    fibers = [np.array(f, dtype=np.int64) for f in code.fibers()]
    reach = x.transitions
    start = frozenset(range(x.size))
    index = {start: 0}
    subsets = [start]
    rows = []
    queue = deque([start])
    while queue:
        s = queue.popleft()
        members = np.fromiter(s, dtype=np.int64)
        after = reach[members].any(axis=0)
        row = []
        for c, fib in enumerate(fibers):
            nxt = frozenset(int(j) for j in fib if after[j])
            if not nxt:
                row.append(-1)
                continue
            if nxt not in index:
                if len(index) >= cap:
                    raise CapExceeded(
                        f"determinization exceeded {cap} states "
                        f"(explored {len(rows)}, frontier {len(queue)})",
                        needed=len(index) + 1,
                        cap=cap,
                    )
                index[nxt] = len(subsets)
                subsets.append(nxt)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    pres = SoficPresentation(code.codomain, rows, 0, subsets)
    return pres.minimized() if minimize else pres


def _is_one_step_sft(pres):
    """Whether the language equals the 1-step SFT generated by its 2-words."""
    k = pres.alphabet.size
    allowed = np.zeros((k, k), dtype=bool)
    for w in pres.words(2, cap=k * k):
        allowed[w] = True
    # explore (last symbol, state) pairs reachable through SFT-admissible words
    seen = set()
    queue = deque()
    for c in range(k):
        q = pres.delta[pres.start, c]
        if q < 0:
            if allowed[c].any() or allowed[:, c].any():
                return False
            continue
        queue.append((c, int(q)))
    while queue:
        c, q = queue.popleft()
        if (c, q) in seen:
            continue
        seen.add((c, q))
        for d in np.flatnonzero(allowed[c]):
            t = pres.delta[q, d]
            if t < 0:
                return False
            queue.append((int(d), int(t)))
    return True


@dataclass(frozen=True)
class FactorPair:
    """Upstairs SFT ``x``, 1-block ``code`` and the image shift ``y``."""

    x: Sft
    code: BlockCode
    y: SoficPresentation
    y_is_sft: bool = field(default=False)

    @classmethod
    def from_code(cls, x, code, cap=DETERMINIZATION_CAP):
        x, code = recode_code(x, code)
        used = sorted(set(code.table))
        if len(used) < code.codomain.size:
            # drop codomain symbols that are never hit
            relabel = {c: i for i, c in enumerate(used)}
            labels = None
            if code.codomain.labels is not None:
                labels = [code.codomain.labels[c] for c in used]
            code = BlockCode(x.alphabet, Alphabet(len(used), labels), [relabel[c] for c in code.table])
        y = image_presentation(x, code, cap=cap)
        return cls(x, code, y, _is_one_step_sft(y))

    @classmethod
    def identity(cls, x):
        return cls.from_code(x, BlockCode(x.alphabet, x.alphabet, range(x.size)))

    @classmethod
    def collapse(cls, x):
        """Factor onto the one-point system."""
        return cls.from_code(x, BlockCode(x.alphabet, Alphabet(1), [0] * x.size))


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checked_length: int
    failed_at: int | None = None
    counterexample: Word | None = None
    note: str = ""


def image_language(x, code, n, cap=None):
    return {code.apply(u) for u in enumerate_words(x, n, cap)}


def validate_factor_pair(pair, max_length):
    """Compare the code-image of ``L_n(x)`` with ``L_n(y)`` for every ``n <= max_length``."""
    if max_length < 1:
        raise SpecError("validation length must be >= 1")
    for n in range(1, max_length + 1):
        image = image_language(pair.x, pair.code, n)
        lang = set(pair.y.words(n))
        if image != lang:
            extra = sorted(lang - image)
            missing = sorted(image - lang)
            if extra:
                return ValidationReport(False, n, n, extra[0], "word of y has no preimage")
            return ValidationReport(False, n, n, missing[0], "image word missing from y")
    return ValidationReport(True, max_length)


def sft_from_words(size, forbidden=()):
    """1-step SFT on ``size`` symbols with the given forbidden 2-words."""
    matrix = np.ones((size, size), dtype=bool)
    for a, b in forbidden:
        matrix[a, b] = False
    return Sft(matrix)


def all_words(size, n):
    """Every word of length ``n`` over ``size`` symbols (brute force helper)."""
    return product(range(size), repeat=n)
