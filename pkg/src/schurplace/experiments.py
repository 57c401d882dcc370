"""Randomized benchmark harness.

Random test systems follow the usual construction: draw an orthogonal
``Q_Y`` and an upper (quasi-)triangular ``R_Y`` whose diagonal carries the
target spectrum, and set ``A = Q_Y R_Y Q_Y^T - B F`` for random ``B, F``.
Then ``A + B F`` has the target spectrum by construction and the assignment
problem is guaranteed solvable.

Every trial draws from its own Philox stream keyed on
``(seed, kind, n, m, a_max, trial)``, so results do not depend on the order
or the process in which trials run.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .driver import SystemPair, assign, check_controllability
from .errors import GenerationFailure, PolePlacementError, ValidationError
from .metrics import evaluate_result, geometric_multiplicity
from .poles import PoleSpec, spec_from_values

log = logging.getLogger(__name__)

MAX_RETRIES = 10
CSV_HEADER = ("n", "m", "a_max", "trials", "dep_mean", "fnorm_mean", "kappa_mean",
              "defective_count", "precs_mean", "gmulti_mean", "failures")


class BenchKind(str, Enum):
    REAL = "real"
    COMPLEX = "complex"


class NormalStream:
    """Standard normal draws from a Philox counter generator via Box-Muller.

    Uniforms come from the 53-bit ``random()`` of :class:`numpy.random.Generator`;
    each pair ``(u1, u2)`` yields the two normals
    ``r cos(2 pi u2), r sin(2 pi u2)`` with ``r = sqrt(-2 log(1 - u1))``.
    """

    def __init__(self, key):
        seq = np.random.SeedSequence([int(k) for k in key])
        self._gen = np.random.Generator(np.random.Philox(seq))

    def normal(self, shape=()):
        count = int(np.prod(shape, dtype=int))
        pairs = (count + 1) // 2
        u = self._gen.random(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        ang = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([r * np.cos(ang), r * np.sin(ang)]).ravel()[:count]
        return z.reshape(shape) if shape != () else float(z[0])


@dataclass
class BenchConfig:
    """Grid and options of one benchmark run.

    ``grid`` lists ``(n, m, a_max)`` points in output order.
    """

    kind: BenchKind
    grid: list[tuple[int, int, int]]
    trials: int = 50
    seed: int = 0
    recipe: str = "qr"
    jobs: int = 1

    def __post_init__(self):
        self.kind = BenchKind(self.kind)
        if self.recipe not in ("qr", "dense"):
            raise ValidationError(f"unknown recipe {self.recipe!r}")
        if self.trials < 1:
            raise ValidationError("trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")
        for point in self.grid:
            validate_point(self.kind, *point)


def validate_point(kind: BenchKind, n: int, m: int, a_max: int):
    if not 1 <= m <= n:
        raise ValidationError(f"need 1 <= m <= n, got n={n}, m={m}")
    if BenchKind(kind) is BenchKind.REAL:
        if not 1 <= a_max <= max(n - 1, 1):
            raise ValidationError(f"real a_max must lie in [1, n-1], got {a_max}")
    elif not 2 <= a_max <= n // 2:
        raise ValidationError(f"complex a_max must lie in [2, n//2], got {a_max}")


def _triangular_factor(stream: NormalStream, n: int):
    Y = stream.normal((n, n))
    s = np.linalg.svd(Y, compute_uv=False)
    if s[-1] <= n * np.finfo(float).eps * s[0]:
        return None, None
    Q, R = np.linalg.qr(Y)
    return Y, (Q, np.triu(R))


def _finish(stream, n, m, Lambda, poles, recipe):
    """Shared tail of the generators; returns ``None`` to request a retry."""
    B = stream.normal((n, m))
    F = stream.normal((m, n))
    Y, (Q, R) = _triangular_factor(stream, n)
    if Y is None:
        return None
    if recipe == "qr":
        R = np.triu(R)
        R[np.diag_indices(n)] = 0.0
        R += Lambda
        A0 = Q @ R @ Q.T
    else:
        A0 = Y @ Lambda @ np.linalg.inv(Y)
    sys = SystemPair(A0 - B @ F, B)
    if np.linalg.matrix_rank(B) < m or not check_controllability(sys).controllable:
        return None
    return sys, spec_from_values(poles)


def _generate(kind: BenchKind, n, m, a_max, stream, recipe):
    for attempt in range(MAX_RETRIES + 1):
        if kind is BenchKind.REAL:
            c = stream.normal()
            rest = stream.normal((n - a_max,))
            poles = [c] * a_max + list(rest)
            Lambda = np.diag(poles)
        else:
            alpha, beta = stream.normal(), stream.normal()
            rest = stream.normal((n - 2 * a_max,))
            lam = complex(alpha, abs(beta))
            poles = [lam, lam.conjugate()] * a_max + list(rest)
            Lambda = np.zeros((n, n))
            for j in range(a_max):
                Lambda[2 * j:2 * j + 2, 2 * j:2 * j + 2] = [[alpha, beta], [-beta, alpha]]
            idx = np.arange(2 * a_max, n)
            Lambda[idx, idx] = rest
        if kind is BenchKind.COMPLEX and beta == 0.0:
            continue
        out = _finish(stream, n, m, Lambda, poles, recipe)
        if out is not None:
            return out
        log.info("regenerating %s system (n=%d, m=%d, a_max=%d), attempt %d",
                 kind.value, n, m, a_max, attempt + 1)
    raise GenerationFailure(f"no usable system after {MAX_RETRIES} retries")


def gen_real_repeated(n: int, m: int, a_max: int, stream: NormalStream,
                      recipe: str = "qr") -> tuple[SystemPair, PoleSpec]:
    """Random system whose target spectrum has one real pole of multiplicity ``a_max``.

    The other ``n - a_max`` poles are independent standard normals.
    """
    validate_point(BenchKind.REAL, n, m, a_max)
    return _generate(BenchKind.REAL, n, m, a_max, stream, recipe)


def gen_complex_repeated(n: int, m: int, a_max: int, stream: NormalStream,
                         recipe: str = "qr") -> tuple[SystemPair, PoleSpec]:
    """Random system with a complex pair ``lam, conj(lam)`` repeated ``a_max`` times.

    ``lam`` has standard-normal real and imaginary parts; the remaining
    ``n - 2 a_max`` poles are real standard normals. ``R_Y`` carries the pair
    as 2x2 blocks ``[[alpha, beta], [-beta, alpha]]``.
    """
    validate_point(BenchKind.COMPLEX, n, m, a_max)
    return _generate(BenchKind.COMPLEX, n, m, a_max, stream, recipe)


def trial_stream(seed: int, kind: BenchKind, n: int, m: int, a_max: int, trial: int):
    code = 0 if BenchKind(kind) is BenchKind.REAL else 1
    return NormalStream((seed, code, n, m, a_max, trial))


@dataclass
class TrialResult:
    dep: float = math.nan
    fnorm: float = math.nan
    kappa: float = math.nan
    defective: bool = False
    precs: int | None = None
    max_error: float = math.nan
    gmulti: int = 0
    structure: tuple = ()
    error: str | None = None
    extra: dict = field(default_factory=dict)


def run_trial(kind, n, m, a_max, trial, seed=0, recipe="qr") -> TrialResult:
    """Generate, solve and measure one random instance. Errors are captured."""
    kind = BenchKind(kind)
    stream = trial_stream(seed, kind, n, m, a_max, trial)
    try:
        gen = gen_real_repeated if kind is BenchKind.REAL else gen_complex_repeated
        sys, spec = gen(n, m, a_max, stream, recipe)
        result = assign(sys, spec)
        rep = evaluate_result(result)
    except PolePlacementError as exc:
        return TrialResult(error=f"{type(exc).__name__}: {exc}")
    repeated = max(spec.groups, key=lambda g: g.multiplicity).value.value
    return TrialResult(
        dep=rep.dep, fnorm=rep.f_norm, kappa=rep.kappa_F, defective=rep.non_diagonalizable,
        precs=rep.precs, max_error=max(rep.precs_errors),
        gmulti=geometric_multiplicity(result.closed_loop, repeated),
        structure=tuple(map(tuple, result.group_structures)),
        extra={"dep_schur": rep.dep_schur, **{k: result.diagnostics[k]
               for k in ("orthonormality", "constraint", "reconstruction")},
               "a_norm": float(np.linalg.norm(sys.A))})


def _trial_task(args):
    return run_trial(*args)


def _mean(values):
    values = [v for v in values if v is not None and math.isfinite(v)]
    return math.fsum(values) / len(values) if values else math.nan


def summarize(n, m, a_max, results: list[TrialResult]) -> dict:
    ok = [r for r in results if r.error is None]
    return {
        "n": n, "m": m, "a_max": a_max, "trials": len(results),
        "dep_mean": _mean([r.dep for r in ok]),
        "fnorm_mean": _mean([r.fnorm for r in ok]),
        "kappa_mean": _mean([r.kappa for r in ok]),
        "defective_count": sum(r.defective for r in ok),
        "precs_mean": _mean([r.precs for r in ok]),
        "gmulti_mean": _mean([r.gmulti for r in ok]),
        "failures": len(results) - len(ok),
    }


def run_bench(config: BenchConfig, return_trials: bool = False):
    """Run every trial of every grid point; one summary row per point.

    Means skip failed trials, trials whose eigenvalues came out exact
    (``precs`` undefined) and infinite condition numbers.
    """
    tasks = [(config.kind, n, m, a, t, config.seed, config.recipe)
             for (n, m, a) in config.grid for t in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=max(1, config.trials // 4)))
    else:
        results = [_trial_task(t) for t in tasks]
    rows, per_point = [], []
    for i, (n, m, a) in enumerate(config.grid):
        chunk = results[i * config.trials:(i + 1) * config.trials]
        for r in chunk:
            if r.error:
                log.warning("trial failed (n=%d, m=%d, a_max=%d): %s", n, m, a, r.error)
        rows.append(summarize(n, m, a, chunk))
        per_point.append(chunk)
    return (rows, per_point) if return_trials else rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_HEADER)]
    lines += [",".join(_fmt(row[k]) for k in CSV_HEADER) for row in rows]
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[dict]) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    return json.dumps([{k: clean(row[k]) for k in CSV_HEADER} for row in rows], indent=2) + "\n"
