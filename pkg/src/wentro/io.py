"""JSON loaders for systems, potentials, measures and carpets."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .carpets import CarpetSpec, SoficCarpetSpec
from .cover import Potential
from .errors import SpecError
from .measures import MarkovMeasure
from .symbolic import Alphabet, BlockCode, FactorPair, Sft


def read_json(source):
    """Parse a path or pass a dict through; malformed files raise :class:`SpecError`."""
    if isinstance(source, dict):
        return source
    path = Path(source)
    if not path.exists():
        raise SpecError(f"input file {path} does not exist", field="input")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}", field="input") from exc


def _matrix(rows, name):
    if not isinstance(rows, list) or not rows:
        raise SpecError(f"{name} must be a non-empty list of rows", field=name)
    n = len(rows)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SpecError(f"{name} row {i} has length {len(row) if isinstance(row, list) else '?'}, expected {n}", field=name)
    return np.array(rows)


def pair_from_dict(data):
    """Factor pair from ``{"alphabet_size", "transitions", "code", "labels"?}``."""
    for key in ("alphabet_size", "transitions", "code"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", field=key)
    size = data["alphabet_size"]
    if not isinstance(size, int) or size < 1:
        raise SpecError("alphabet_size must be a positive integer", field="alphabet_size")
    matrix = _matrix(data["transitions"], "transitions")
    if len(matrix) != size:
        raise SpecError(f"transitions has {len(matrix)} rows for alphabet_size {size}", field="transitions")
    code = data["code"]
    if not isinstance(code, list) or len(code) != size or not all(isinstance(c, int) and c >= 0 for c in code):
        raise SpecError(f"code must list {size} non-negative integers", field="code")
    labels = data.get("labels")
    x = Sft(matrix, labels)
    code = [code[i] for i in x.kept]
    used = sorted(set(code))
    if used != list(range(len(used))):
        # keep codomain symbols contiguous
        relabel = {c: i for i, c in enumerate(used)}
        code = [relabel[c] for c in code]
    return FactorPair.from_code(x, BlockCode(x.alphabet, Alphabet(max(code) + 1), code))


def load_pair(source):
    return pair_from_dict(read_json(source))


def potential_from_dict(data, pair=None):
    """Potential from ``{"window": k, "i,j,...": value, ...}``."""
    if "window" not in data:
        raise SpecError("missing field 'window'", field="window")
    k = data["window"]
    if not isinstance(k, int) or k < 1:
        raise SpecError("window must be a positive integer", field="window")
    table = {}
    for key, value in data.items():
        if key == "window":
            continue
        try:
            word = tuple(int(s) for s in str(key).split(","))
        except ValueError as exc:
            raise SpecError(f"potential key {key!r} is not a comma-separated word", field=key) from exc
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise SpecError(f"potential value for {key!r} must be a finite number", field=key)
        table[word] = float(value)
    f = Potential(k, table)
    if pair is not None:
        if any(s >= pair.x.size for w in table for s in w):
            raise SpecError("potential uses a symbol outside the alphabet", field="potential")
        f.check(pair.x)
    return f


def load_potential(source, pair=None):
    return potential_from_dict(read_json(source), pair)


def measure_from_dict(data, sft):
    for key in ("pi", "P"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", field=key)
    return MarkovMeasure(sft, _matrix(data["P"], "P"), data["pi"])


def load_measure(source, sft):
    return measure_from_dict(read_json(source), sft)


def carpet_from_dict(data):
    """Carpet from ``{"a", "b", "R", "digit_transitions"?}``."""
    for key in ("a", "b", "R"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", field=key)
    if not isinstance(data["R"], list):
        raise SpecError("R must be a list of [x, y] pairs", field="R")
    carpet = CarpetSpec(data["a"], data["b"], [tuple(d) for d in data["R"]])
    if "digit_transitions" in data:
        return SoficCarpetSpec(carpet, _matrix(data["digit_transitions"], "digit_transitions"))
    return carpet


def load_carpet(source):
    return carpet_from_dict(read_json(source))


def is_carpet(data):
    return isinstance(data, dict) and "R" in data and "a" in data


def dumps(record):
    """Deterministic JSON text."""
    return json.dumps(record, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
