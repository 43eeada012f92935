"""Command-line driver.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 an enumeration cap was hit. Volatile fields (wall clock time, elapsed
seconds) are kept under the ``"meta"`` key so that reports from equal
configurations are otherwise byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone

from . import io
from .carpets import (
    SoficCarpetSpec,
    carpet_dimension,
    carpet_to_factor_pair,
    sofic_carpet_dimension,
)
from .cover import amplification_check, growth_limit_bounds
from .errors import CapExceeded, SpecError
from .generators import random_pair, random_potential, rng_for
from .variational import (
    OptimizerConfig,
    misiurewicz_identity_residual,
    misiurewicz_lower_bound_check,
    misiurewicz_partition_check,
    misiurewicz_sigma,
    optimize_weighted_value,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
CHECK_TOL = 1e-10


@dataclass
class RunConfig:
    command: str
    input: str | None
    potential: str | None
    w: float | None
    nmax: int
    resolution: int
    seed: int
    out: str | None
    precision: str
    family: str | None
    restarts: int
    w_grid: list | None
    count: int

    def __post_init__(self):
        if self.w is not None and not 0.0 <= self.w <= 1.0:
            raise SpecError(f"--w must lie in [0, 1], got {self.w}", field="w")
        if self.nmax < 1:
            raise SpecError("--nmax must be >= 1", field="nmax")
        if self.resolution < 0:
            raise SpecError("--resolution must be >= 0", field="resolution")
        if self.restarts < 1:
            raise SpecError("--restarts must be >= 1", field="restarts")


def _load_system(cfg):
    """``(pair, potential, carpet_or_None)`` from the input file."""
    data = io.read_json(cfg.input)
    carpet = None
    if io.is_carpet(data):
        carpet = io.carpet_from_dict(data)
        if isinstance(carpet, SoficCarpetSpec):
            from .carpets import sofic_factor_pair

            pair = sofic_factor_pair(carpet)
        else:
            pair = carpet_to_factor_pair(carpet)
    else:
        pair = io.pair_from_dict(data)
    f = io.load_potential(cfg.potential, pair) if cfg.potential else None
    return pair, f, carpet


def _weight(cfg, carpet):
    if cfg.w is not None:
        return cfg.w
    if carpet is not None:
        return (carpet.carpet if isinstance(carpet, SoficCarpetSpec) else carpet).w
    raise SpecError("--w is required for this input", field="w")


def _family(cfg, pair, f):
    if cfg.family:
        return cfg.family
    return "bernoulli" if pair.x.is_full() and (f is None or f.window == 1) else "markov"


def _meta(start):
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "elapsed_s": round(time.perf_counter() - start, 6),
    }


def cmd_entropy(cfg):
    start = time.perf_counter()
    pair, f, carpet = _load_system(cfg)
    w = _weight(cfg, carpet)
    nmax = max(cfg.nmax, 2)
    gs = growth_limit_bounds(pair, w, f, nmax, resolution=cfg.resolution, precision=cfg.precision)
    record = gs.to_record()
    record.update(
        command="entropy",
        sources=gs.sources,
        precision=cfg.precision,
        submultiplicativity_violations=len(gs.submultiplicativity_violations()),
        meta=_meta(start),
    )
    return record, EXIT_OK


def cmd_dim_carpet(cfg):
    start = time.perf_counter()
    spec = io.load_carpet(cfg.input)
    if isinstance(spec, SoficCarpetSpec):
        interval = sofic_carpet_dimension(spec, n_max=max(cfg.nmax, 2))
        record = {
            "command": "dim-carpet",
            "sofic": True,
            "w": interval.w,
            "lower_dim": interval.lower,
            "upper_dim": interval.upper,
            "lower_kind": interval.lower_kind,
            "width_dim": interval.width,
            "h_w_upper": interval.growth.upper,
            "N": interval.growth.n_max,
        }
    else:
        dim = carpet_dimension(spec)
        record = {
            "command": "dim-carpet",
            "sofic": False,
            "carpet_dim": dim.dimension,
            "carpet_dim_digits": dim.dimension_mp,
            "w": dim.w,
            "h_w": dim.entropy,
        }
    record["meta"] = _meta(start)
    return record, EXIT_OK


def _check(name, passed, value, bound, **extra):
    return {"name": name, "passed": bool(passed), "value": value, "bound": bound, **extra}


def _instance_checks(pair, f, w, cfg, carpet=None, label=""):
    checks = []
    nmax = max(cfg.nmax, 2)
    gs = growth_limit_bounds(pair, w, f, nmax, precision=cfg.precision)
    bad = gs.submultiplicativity_violations()
    checks.append(_check(f"{label}submultiplicativity", not bad, len(bad), 0))

    family = _family(cfg, pair, f)
    opt_cfg = OptimizerConfig(family=family, restarts=cfg.restarts, seed=cfg.seed, n_max=min(nmax, 8))
    result = optimize_weighted_value(pair, w, f, opt_cfg)
    excess = result.value.lower - gs.upper
    checks.append(_check(f"{label}measure_value_below_cover_upper", excess <= 1e-6, excess, 1e-6))
    if carpet is not None and not isinstance(carpet, SoficCarpetSpec):
        gap = abs(gs.upper - result.value.lower)
        checks.append(_check(f"{label}optimizer_cover_gap", gap <= 1e-4, gap, 1e-4))

    n_sig = min(nmax, 6)
    state = misiurewicz_sigma(pair, w, f, n_sig)
    res = misiurewicz_identity_residual(state)
    checks.append(_check(f"{label}misiurewicz_identity", res <= CHECK_TOL, res, CHECK_TOL))
    res = misiurewicz_partition_check(state, pair, w, f)
    checks.append(_check(f"{label}misiurewicz_partition_sum", res <= CHECK_TOL, res, CHECK_TOL))
    rep = misiurewicz_lower_bound_check(pair, w, f, n_sig, min(2, n_sig), state=state)
    checks.append(_check(f"{label}misiurewicz_block_entropy", rep.passed, rep.slack, -1e-9))

    res = amplification_check(pair, w, f, m=2, n=2)
    checks.append(_check(f"{label}amplification", res <= CHECK_TOL, res, CHECK_TOL))
    return checks


def cmd_verify_vp(cfg):
    start = time.perf_counter()
    checks = []
    if cfg.input == "random":
        worst = 0.0
        for i in range(cfg.count):
            rng = rng_for(cfg.seed, i)
            pair = random_pair(rng)
            f = random_potential(rng, pair.x)
            w = float(rng.uniform(0, 1)) if cfg.w is None else cfg.w
            for c in _instance_checks(pair, f, w, cfg, label=f"instance{i}."):
                checks.append(c)
                if c["name"].endswith("misiurewicz_identity"):
                    worst = max(worst, c["value"])
        summary = {"instances": cfg.count, "misiurewicz_residual_max": worst}
    else:
        pair, f, carpet = _load_system(cfg)
        w = _weight(cfg, carpet)
        checks = _instance_checks(pair, f, w, cfg, carpet)
        summary = {"instances": 1}
    failed = [c["name"] for c in checks if not c["passed"]]
    record = {
        "command": "verify-vp",
        "seed": cfg.seed,
        "checks": checks,
        "failed": failed,
        "passed": not failed,
        **summary,
        "meta": _meta(start),
    }
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
    return record, EXIT_VERIFY if failed else EXIT_OK


def cmd_report(cfg):
    if not cfg.w_grid:
        raise SpecError("the w grid is empty", field="w-grid")
    pair, f, carpet = _load_system(cfg)
    family = _family(cfg, pair, f)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["w", "lower", "upper", "opt_value_lo", "opt_value_hi", "gap"])
    for w in cfg.w_grid:
        gs = growth_limit_bounds(pair, w, f, max(cfg.nmax, 2), precision=cfg.precision)
        opt = optimize_weighted_value(
            pair, w, f, OptimizerConfig(family=family, restarts=cfg.restarts, seed=cfg.seed, n_max=min(cfg.nmax, 8))
        )
        gap = gs.upper - opt.value.lower
        writer.writerow([_g(w), _g(gs.lower), _g(gs.upper), _g(opt.value.lower), _g(opt.value.upper), _g(gap)])
    return buf.getvalue(), EXIT_OK


def _g(x):
    return f"{x:#.12g}"


def _grid(text):
    if text is None:
        return None
    items = [t for t in text.replace(";", ",").split(",") if t.strip()]
    try:
        grid = [float(t) for t in items]
    except ValueError as exc:
        raise SpecError(f"bad --w-grid entry: {exc}", field="w-grid") from exc
    if any(not 0.0 <= w <= 1.0 for w in grid):
        raise SpecError("w-grid values must lie in [0, 1]", field="w-grid")
    return grid


COMMANDS = {
    "entropy": cmd_entropy,
    "dim-carpet": cmd_dim_carpet,
    "verify-vp": cmd_verify_vp,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="wentro", description="Weighted entropy of factor maps between subshifts.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--input", help="system, carpet JSON file, or 'random' for verify-vp")
    parser.add_argument("--potential", help="potential JSON file (default f = 0)")
    parser.add_argument("--w", type=float, help="weight in [0, 1] (carpets default to log_a b)")
    parser.add_argument("--nmax", type=int, default=12)
    parser.add_argument("--resolution", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--precision", choices=("double", "extended"), default="double")
    parser.add_argument("--family", choices=("bernoulli", "markov"))
    parser.add_argument("--restarts", type=int, default=3)
    parser.add_argument("--w-grid", dest="w_grid", help="comma-separated weights for 'report'")
    parser.add_argument("--count", type=int, default=20, help="instances for 'verify-vp --input random'")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.input is None:
            raise SpecError("--input is required", field="input")
        cfg = RunConfig(
            command=args.command,
            input=args.input,
            potential=args.potential,
            w=args.w,
            nmax=args.nmax,
            resolution=args.resolution,
            seed=args.seed,
            out=args.out,
            precision=args.precision,
            family=args.family,
            restarts=args.restarts,
            w_grid=_grid(args.w_grid) if args.command == "report" else None,
            count=args.count,
        )
        if cfg.command == "report" and cfg.w_grid is None:
            raise SpecError("report needs --w-grid", field="w-grid")
        output, code = COMMANDS[cfg.command](cfg)
    except SpecError as exc:
        field = f" [field: {exc.field}]" if exc.field else ""
        print(f"input error{field}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"resource cap: {exc} (raise WENTRO_CAP to allow more)", file=sys.stderr)
        return EXIT_CAP
    text = output if isinstance(output, str) else io.dumps(output)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
