"""End-to-end state-feedback pole assignment.

Given a controllable pair ``(A, B)`` and a target spectrum, :func:`assign`
returns ``F`` together with an orthogonal ``X`` and an upper
quasi-triangular ``T`` such that ``A + B F = X T X^T``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .assign_complex import assign_complex_group
from .assign_real import assign_real_group
from .errors import DimensionMismatch, SingularR, Uncontrollable, ValidationError
from .poles import Order, PoleSpec
from .schur import DiagonalBlock, GroupRecord, SchurAccumulator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemPair:
    """State-space pair ``x' = A x + B u``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"B has shape {B.shape}, expected ({A.shape[0]}, m)")
        if B.shape[1] < 1 or B.shape[1] > A.shape[0]:
            raise DimensionMismatch("B must have between 1 and n columns")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValidationError("A and B must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass
class AssignConfig:
    """Knobs for :func:`assign`.

    Attributes
    ----------
    rank_tol : float or None
        Relative tolerance for rank decisions on null-space blocks. ``None``
        uses ``max(shape) * eps``.
    controllability : {"error", "warn", "skip"}
        What to do when the controllability test fails.
    controllability_tol : float or None
        Relative rank tolerance of that test.
    residual_tol : float
        Relative level at which construction residuals are reported as
        suspicious (``n * tol`` for orthogonality, ``||A||_F * tol`` for the
        constraint).
    """

    rank_tol: float | None = None
    order: Order = Order.ASCENDING
    imag_tol: float = 0.0
    controllability: str = "error"
    controllability_tol: float | None = None
    residual_tol: float = 1e-9


@dataclass
class ControllabilityReport:
    rank: int
    n: int
    singular_values: np.ndarray

    @property
    def controllable(self) -> bool:
        return self.rank == self.n


@dataclass
class AssignmentResult:
    F: np.ndarray
    X: np.ndarray
    T: np.ndarray
    system: SystemPair
    spec: PoleSpec
    groups: list[GroupRecord] = field(default_factory=list)
    blocks: list[DiagonalBlock] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def closed_loop(self) -> np.ndarray:
        return self.system.A + self.system.B @ self.F

    @property
    def group_structures(self) -> list[tuple[int, ...]]:
        return [tuple(g.sizes) for g in self.groups]


def check_controllability(sys: SystemPair, tol: float | None = None) -> ControllabilityReport:
    """Rank of ``[B, AB, ..., A^{n-1} B]`` from its singular values.

    Each block ``A^k B`` is scaled to unit Frobenius norm before it is
    stacked, so powers of a large or small ``A`` do not swamp the test. The
    column space, and hence the rank, is unchanged by the scaling.
    """
    n, m = sys.n, sys.m
    blocks = []
    K = sys.B.copy()
    for _ in range(n):
        nrm = np.linalg.norm(K)
        if nrm == 0.0:
            break
        K = K / nrm
        blocks.append(K)
        K = sys.A @ K
    C = np.hstack(blocks) if blocks else np.zeros((n, m))
    s = np.linalg.svd(C, compute_uv=False)
    if tol is None:
        tol = linalg.default_rank_tol(C.shape)
    return ControllabilityReport(linalg.numerical_rank(s, tol), n, s)


def recover_feedback(A: np.ndarray, Q1: np.ndarray, R: np.ndarray,
                     X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``F = R^{-1} Q1^T (X T X^T - A)``."""
    d = np.abs(np.diag(R))
    if d.size == 0 or d.min() <= linalg.EPS * R.shape[0] * np.abs(R).max():
        raise SingularR("R is numerically singular")
    rhs = Q1.T @ (X @ T @ X.T - A)
    return scipy.linalg.solve_triangular(R, rhs, lower=False)


def assign(sys: SystemPair, spec: PoleSpec, config: AssignConfig | None = None) -> AssignmentResult:
    """Compute a feedback ``F`` placing the spectrum of ``A + B F`` at ``spec``.

    Groups are processed in the order stored in ``spec``. Repeated poles
    are packed into as few diagonal blocks as the input dimension allows,
    which keeps the geometric multiplicity of each repeated pole high.

    Raises
    ------
    DimensionMismatch
        If the spectrum does not have ``n`` entries.
    Uncontrollable
        If the controllability gate is ``"error"`` and the test fails.
    NumericalFailure
        Propagated from the column construction.
    """
    config = config or AssignConfig()
    if not isinstance(sys, SystemPair):
        sys = SystemPair(*sys)
    A, B = sys.A, sys.B
    n = sys.n
    if spec.total_real_dimension != n:
        raise DimensionMismatch(
            f"spectrum has {spec.total_real_dimension} entries but n = {n}")
    Q1, Q2, R = linalg.qr_split(B)

    if config.controllability != "skip":
        report = check_controllability(sys, config.controllability_tol)
        if not report.controllable:
            msg = f"controllability matrix has rank {report.rank} < {n}"
            if config.controllability == "error":
                raise Uncontrollable(msg)
            log.warning(msg)

    acc = SchurAccumulator(n)
    for group in spec.groups:
        lam = group.value.value
        if group.is_real:
            assign_real_group(acc, A, Q2, lam.real, group.multiplicity, config.rank_tol)
        else:
            assign_complex_group(acc, A, Q2, lam, group.multiplicity, config.rank_tol)

    X, T = acc.X, acc.T
    F = recover_feedback(A, Q1, R, X, T)
    a_norm = np.linalg.norm(A)
    orth = acc.orthonormality_error()
    constraint = acc.constraint_residual(A, Q2)
    recon = float(np.linalg.norm(A + B @ F - X @ T @ X.T))
    diagnostics = {
        "orthonormality": orth,
        "constraint": constraint,
        "reconstruction": recon,
        "steps": acc.steps,
    }
    if orth > config.residual_tol * n:
        log.warning("orthonormality residual %.3g above %.3g", orth, config.residual_tol * n)
    if constraint > config.residual_tol * max(a_norm, 1.0):
        log.warning("constraint residual %.3g above tolerance", constraint)
    return AssignmentResult(F=F, X=X, T=T, system=sys, spec=spec, groups=acc.groups,
                            blocks=acc.blocks, diagnostics=diagnostics)
