"""Robustness and accuracy measures for a closed-loop matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import linalg
from .poles import PoleSpec
from .schur import DiagonalBlock

ZERO_TOL = 1e-12
GMULT_TOL = 1e-8


def _expanded(poles) -> np.ndarray:
    if isinstance(poles, PoleSpec):
        return np.array(poles.expanded(), dtype=complex)
    return np.asarray(list(poles), dtype=complex).ravel()


def departure_from_normality(Ac: np.ndarray, poles) -> float:
    """Henrici departure ``sqrt(||Ac||_F^2 - sum |lambda_j|^2)``.

    ``poles`` is a :class:`PoleSpec` or any iterable of eigenvalues. A
    difference within rounding level of the two sums is reported as zero.
    """
    lam = _expanded(poles)
    fro2 = float(np.linalg.norm(Ac) ** 2)
    lam2 = float(np.sum(np.abs(lam) ** 2))
    diff = fro2 - lam2
    n = max(Ac.shape[0], 1)
    if diff <= 16 * n * linalg.EPS * (fro2 + lam2):
        return 0.0
    return math.sqrt(diff)


def dep_from_schur(T: np.ndarray, blocks: Sequence[DiagonalBlock]) -> float:
    """Departure from normality read off the quasi-triangular factor.

    The strictly block-upper part ``N`` contributes ``||N||_F^2`` and each
    2x2 block ``[[a, d*b], [-b/d, a]]`` contributes ``(d - 1/d)^2 b^2``.
    """
    N = np.triu(T, 1).copy()
    extra = 0.0
    for blk in blocks:
        if blk.size == 2:
            i = blk.start
            N[i, i + 1] = 0.0
            beta = abs(blk.pole.imag)
            extra += ((blk.delta - 1.0 / blk.delta) * beta) ** 2
    return math.sqrt(float(np.linalg.norm(N) ** 2) + extra)


@dataclass
class PrecsResult:
    """Matched eigenvalue errors.

    ``value`` is ``ceil(log10(max error))`` or ``None`` when every computed
    eigenvalue is exact.
    """

    value: int | None
    errors: np.ndarray
    targets: np.ndarray
    computed: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.errors.max()) if self.errors.size else 0.0

    def label(self) -> str:
        return "exact" if self.value is None else str(self.value)


def _error_matrix(target, computed, zero_tol):
    diff = np.abs(computed[None, :] - target[:, None])
    scale = np.abs(target)[:, None]
    return np.where(scale <= zero_tol, diff, diff / np.where(scale <= zero_tol, 1.0, scale))


def match_eigenvalues(target, computed, zero_tol: float = ZERO_TOL):
    """Pair ``computed`` with ``target`` minimizing the worst error.

    First the smallest threshold admitting a perfect matching on the error
    matrix is found by bisection; among matchings under that threshold the
    one with the smallest total error is returned as a permutation ``p``
    with ``computed[p[i]]`` paired to ``target[i]``.
    """
    target = np.asarray(target, dtype=complex)
    computed = np.asarray(computed, dtype=complex)
    if target.size != computed.size:
        raise ValueError("target and computed must have the same size")
    if target.size == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    E = _error_matrix(target, computed, zero_tol)
    levels = np.unique(E)
    big = float(E.size + 1)

    def feasible(t):
        cost = (E > t).astype(float)
        r, c = linear_sum_assignment(cost)
        return cost[r, c].sum() == 0.0

    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    t = levels[lo]
    emax = max(float(E.max()), 1.0)
    cost = np.where(E <= t, E / emax, big)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(target.size, dtype=int)
    perm[rows] = cols
    return perm, E[np.arange(target.size), perm]


def _discount(errors, target, computed, zero_tol):
    """Worst error less one rounding unit of the operands.

    ``1 + 1e-11`` is not representable, so the measured error of such an
    eigenvalue is ``1.0000000827e-11``; without the discount its exponent
    would round up to ``-10``.
    """
    scale = np.where(np.abs(target) <= zero_tol, 1.0, np.abs(target))
    ulp = linalg.EPS * np.maximum(np.abs(target), np.abs(computed)) / scale
    reduced = errors - ulp
    reduced = np.where(reduced > 0, reduced, errors)
    return float(reduced.max())


def precs(target, Ac: np.ndarray, zero_tol: float = ZERO_TOL) -> PrecsResult:
    """Accuracy exponent ``ceil(max_j log10 |lambda_j - lambda_hat_j| / |lambda_j|)``.

    Poles with ``|lambda_j| <= zero_tol`` use the absolute error.
    """
    tgt = _expanded(target)
    comp = linalg.real_schur_eigvals(Ac)
    perm, errors = match_eigenvalues(tgt, comp, zero_tol)
    worst = float(errors.max()) if errors.size else 0.0
    value = None
    if worst > 0.0:
        value = int(math.ceil(math.log10(_discount(errors, tgt, comp[perm], zero_tol))))
    return PrecsResult(value, errors, tgt, comp[perm])


def geometric_multiplicity(Ac: np.ndarray, lam: complex, tol: float = GMULT_TOL) -> int:
    """``n - rank(Ac - lam I)`` with singular values below ``tol * sigma_1`` dropped."""
    lam = complex(lam)
    n = Ac.shape[0]
    M = Ac - lam.real * np.eye(n) if lam.imag == 0 else Ac - lam * np.eye(n)
    s = np.linalg.svd(M, compute_uv=False)
    return n - linalg.numerical_rank(s, tol)


@dataclass
class EigvecCondition:
    kappa: float
    non_diagonalizable: bool


def eigvec_condition(Ac: np.ndarray) -> EigvecCondition:
    """Frobenius condition ``||V||_F ||V^{-1}||_F`` of the eigenvector matrix.

    Columns of ``V`` are scaled to unit 2-norm first. The flag is raised when
    the 2-norm condition of ``V`` exceeds ``1/eps``; the (huge) value is
    still reported.
    """
    n = Ac.shape[0]
    if n == 0:
        return EigvecCondition(0.0, False)
    _, V = scipy.linalg.eig(Ac)
    V = V / np.linalg.norm(V, axis=0)
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] == 0.0:
        return EigvecCondition(math.inf, True)
    # ||V^{-1}||_F from the singular values avoids forming the inverse
    kappa = float(np.linalg.norm(V) * np.sqrt(np.sum(1.0 / s**2)))
    return EigvecCondition(kappa, bool(s[0] / s[-1] > 1.0 / linalg.EPS))


@dataclass
class RobustnessReport:
    dep: float
    dep_schur: float | None
    kappa_F: float
    non_diagonalizable: bool
    f_norm: float
    precs: int | None
    precs_errors: list[float]
    g_multi: dict[str, int] = field(default_factory=dict)
    residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "dep": self.dep,
            "dep_schur": self.dep_schur,
            "kappa_F": self.kappa_F if math.isfinite(self.kappa_F) else None,
            "non_diagonalizable": self.non_diagonalizable,
            "f_norm": self.f_norm,
            "precs": "exact" if self.precs is None else self.precs,
            "precs_errors": list(self.precs_errors),
            "g_multi": dict(self.g_multi),
            "residual": self.residual,
        }


def pole_key(lam: complex) -> str:
    lam = complex(lam)
    return f"{lam.real!r},{abs(lam.imag)!r}"


def evaluate(A: np.ndarray, B: np.ndarray, F: np.ndarray, spec: PoleSpec,
             T: np.ndarray | None = None, blocks: Iterable[DiagonalBlock] | None = None,
             X: np.ndarray | None = None, gmult_tol: float = GMULT_TOL,
             zero_tol: float = ZERO_TOL) -> RobustnessReport:
    """All measures for the closed loop ``A + B F``.

    ``T``, ``blocks`` and ``X`` are optional; with them the report also
    carries the quasi-triangular form of the departure and the
    reconstruction residual ``||A + BF - X T X^T||_F``.
    """
    Ac = A + B @ F
    p = precs(spec, Ac, zero_tol)
    cond = eigvec_condition(Ac)
    dep_t = dep_from_schur(T, list(blocks)) if T is not None and blocks is not None else None
    residual = float(np.linalg.norm(Ac - X @ T @ X.T)) if X is not None and T is not None else 0.0
    gm = {pole_key(g.value.value): geometric_multiplicity(Ac, g.value.value, gmult_tol)
          for g in spec.groups}
    return RobustnessReport(
        dep=departure_from_normality(Ac, spec), dep_schur=dep_t, kappa_F=cond.kappa,
        non_diagonalizable=cond.non_diagonalizable, f_norm=float(np.linalg.norm(F)),
        precs=p.value, precs_errors=[float(e) for e in p.errors], g_multi=gm,
        residual=residual)


def evaluate_result(result, **kwargs) -> RobustnessReport:
    """:func:`evaluate` applied to an :class:`~schurplace.driver.AssignmentResult`."""
    return evaluate(result.system.A, result.system.B, result.F, result.spec,
                    T=result.T, blocks=result.blocks, X=result.X, **kwargs)
