"""Command-line interface.

Commands::

    schurplace assign --system sys.json --poles poles.json --out result.json
    schurplace metrics --system sys.json --poles poles.json --result result.json
    schurplace bench --kind real --n 13 --m 2,half,n-1 --amax 1:m --trials 50 --seed 0
    schurplace gmult --system sys.json --feedback result.json --pole 1.5,0

Exit status is 0 on success, 2 for invalid input and 3 for a numerical
failure. Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .driver import AssignConfig, SystemPair, assign
from .errors import NumericalFailure, ValidationError
from .experiments import BenchConfig, BenchKind, rows_to_csv, rows_to_json, run_bench
from .metrics import GMULT_TOL, evaluate, evaluate_result, geometric_multiplicity
from .poles import Order, load_pole_file
from .schur import DiagonalBlock

log = logging.getLogger("schurplace")


# -- file formats ---------------------------------------------------------------

def matrix_to_json(M: np.ndarray) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return {"rows": M.shape[0], "cols": M.shape[1], "data": [float(x) for x in M.ravel()]}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, list):
        try:
            M = np.array(obj, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix array: {exc}") from exc
        if M.ndim not in (1, 2):
            raise ValidationError(f"matrix array must be 1-D or 2-D, got shape {M.shape}")
        return M
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad matrix object: {exc}") from exc
    if len(data) != rows * cols:
        raise ValidationError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    return np.array(data, dtype=float).reshape(rows, cols)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def load_system(path) -> SystemPair:
    obj = _read_json(path)
    if not isinstance(obj, dict) or "A" not in obj or "B" not in obj:
        raise ValidationError("system file must contain 'A' and 'B'")
    return SystemPair(matrix_from_json(obj["A"]), matrix_from_json(obj["B"]))


def _blocks_from_json(items):
    return [DiagonalBlock(int(b["start"]), int(b["size"]), complex(b["re"], b["im"]),
                          float(b.get("delta", 1.0))) for b in items]


def result_to_json(result) -> dict:
    return {
        "F": matrix_to_json(result.F),
        "X": matrix_to_json(result.X),
        "T": matrix_to_json(result.T),
        "metrics": evaluate_result(result).to_json(),
        "groups": [{"re": g.pole.real, "im": g.pole.imag, "multiplicity": g.multiplicity,
                    "start": g.start, "sizes": list(g.sizes), "cases": list(g.cases)}
                   for g in result.groups],
        "blocks": [{"start": b.start, "size": b.size, "re": b.pole.real, "im": b.pole.imag,
                    "delta": b.delta} for b in result.blocks],
    }


def _write(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- grid parsing for bench -----------------------------------------------------------

def _token_value(tok: str, env: dict) -> int:
    tok = tok.strip()
    named = {"half": env["n"] // 2, "n-1": env["n"] - 1, "n": env["n"]}
    if "m" in env:
        named["m"] = env["m"]
    if tok in named:
        return named[tok]
    try:
        return int(tok)
    except ValueError:
        raise ValidationError(f"cannot interpret {tok!r} as a count") from None


def expand_counts(text: str, env: dict) -> list[int]:
    """Expand ``"2,half,n-1"`` or ``"1:m"`` (inclusive range) into integers.

    Names ``n``, ``n-1``, ``half`` (``n // 2``) and, for ``--amax``, ``m``
    refer to the current grid point. Duplicates are dropped, order kept.
    """
    out: list[int] = []
    for item in str(text).split(","):
        if ":" in item:
            lo, hi = item.split(":", 1)
            values = range(_token_value(lo, env), _token_value(hi, env) + 1)
        else:
            values = [_token_value(item, env)]
        for v in values:
            if v not in out:
                out.append(v)
    return out


def build_grid(n_text, m_text, a_text) -> list[tuple[int, int, int]]:
    grid = []
    for n in expand_counts(n_text, {"n": 0}):
        for m in sorted(expand_counts(m_text, {"n": n})):
            for a in expand_counts(a_text, {"n": n, "m": m}):
                grid.append((n, m, a))
    return grid


# -- commands -------------------------------------------------------------------------

def cmd_assign(args) -> int:
    system = load_system(args.system)
    spec = load_pole_file(args.poles, order=Order(args.order))
    config = AssignConfig(rank_tol=args.tol, order=Order(args.order),
                          controllability=args.controllability)
    result = assign(system, spec, config)
    payload = result_to_json(result)
    log.info("realized block structures: %s", result.group_structures)
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_metrics(args) -> int:
    system = load_system(args.system)
    spec = load_pole_file(args.poles)
    res = _read_json(args.result)
    F = matrix_from_json(res["F"] if isinstance(res, dict) and "F" in res else res)
    kwargs = {}
    if isinstance(res, dict) and "T" in res and "X" in res and "blocks" in res:
        kwargs = dict(T=matrix_from_json(res["T"]), X=matrix_from_json(res["X"]),
                      blocks=_blocks_from_json(res["blocks"]))
    if F.shape != (system.m, system.n):
        raise ValidationError(f"F has shape {F.shape}, expected {(system.m, system.n)}")
    report = evaluate(system.A, system.B, F, spec, **kwargs)
    _write(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    return 0


def cmd_bench(args) -> int:
    grid = build_grid(args.n, args.m, args.amax)
    config = BenchConfig(kind=BenchKind(args.kind), grid=grid, trials=args.trials,
                         seed=args.seed, recipe=args.recipe, jobs=args.jobs)
    rows = run_bench(config)
    text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows)
    _write(text, args.out)
    return 0


def _parse_pole(text: str) -> complex:
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"bad pole {text!r}, expected re,im") from None
    if len(values) == 1:
        values.append(0.0)
    if len(values) != 2:
        raise ValidationError(f"bad pole {text!r}, expected re,im")
    return complex(values[0], values[1])


def cmd_gmult(args) -> int:
    system = load_system(args.system)
    obj = _read_json(args.feedback)
    F = matrix_from_json(obj["F"] if isinstance(obj, dict) and "F" in obj else obj)
    if F.shape != (system.m, system.n):
        raise ValidationError(f"F has shape {F.shape}, expected {(system.m, system.n)}")
    g = geometric_multiplicity(system.A + system.B @ F, _parse_pole(args.pole), args.tol)
    print(g)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schurplace",
                                     description="Robust pole assignment with repeated poles.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assign", help="compute a feedback matrix")
    p.add_argument("--system", required=True)
    p.add_argument("--poles", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--order", choices=[o.value for o in Order], default="ascending")
    p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
    p.add_argument("--controllability", choices=["error", "warn", "skip"], default="error")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("metrics", help="robustness measures of a computed feedback")
    p.add_argument("--system", required=True)
    p.add_argument("--poles", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="randomized experiments")
    p.add_argument("--kind", choices=["real", "complex"], default="real")
    p.add_argument("--n", default="13")
    p.add_argument("--m", default="2,half,n-1")
    p.add_argument("--amax", default="2")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--recipe", choices=["qr", "dense"], default="qr")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gmult", help="geometric multiplicity of a closed-loop pole")
    p.add_argument("--system", required=True)
    p.add_argument("--feedback", required=True, help="matrix file or result file")
    p.add_argument("--pole", required=True, help="re,im")
    p.add_argument("--tol", type=float, default=GMULT_TOL)
    p.set_defaults(func=cmd_gmult)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except NumericalFailure as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
