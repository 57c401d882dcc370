"""Dense numerical kernels used by the assignment code.

Everything here works on plain ``numpy`` arrays. Rank decisions follow the
usual rule ``sigma_i > tol * sigma_1`` with ``tol = max(rows, cols) * eps``
unless the caller supplies a relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailure,
    DependentVectors,
    NotSymmetric,
    RankDeficientInput,
)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    numerical_rank: int


def default_rank_tol(shape: tuple[int, ...]) -> float:
    return max(max(shape), 1) * EPS


def numerical_rank(singular_values: np.ndarray, rank_tol: float | None = None,
                   shape: tuple[int, ...] | None = None) -> int:
    """Count singular values above ``rank_tol * sigma_1``."""
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] == 0.0:
        return 0
    if rank_tol is None:
        rank_tol = default_rank_tol(shape if shape is not None else (s.size,))
    return int(np.count_nonzero(s > rank_tol * s[0]))


def svd(M: np.ndarray, rank_tol: float | None = None, full: bool = False) -> SvdResult:
    """Thin (or full) SVD with a numerical rank attached.

    ``V`` holds right singular vectors as columns, so ``M = U diag(s) V^*``.
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        k = rows if full else min(rows, cols)
        U = np.eye(rows, k, dtype=M.dtype)
        V = np.eye(cols, cols if full else min(rows, cols), dtype=M.dtype)
        return SvdResult(U, np.zeros(min(rows, cols)), V, 0)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=full)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    r = numerical_rank(s, rank_tol, M.shape)
    return SvdResult(U, s, Vh.conj().T, r)


def null_basis(M: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the null space of ``M`` (real or complex).

    Returns a ``q x d`` array with ``d = q - numerical_rank(M)``; ``d`` may
    be zero.
    """
    M = np.asarray(M)
    p, q = M.shape
    if p == 0:
        return np.eye(q, dtype=M.dtype)
    res = svd(M, rank_tol, full=True)
    return np.ascontiguousarray(res.V[:, res.numerical_rank:])


def qr_split(B: np.ndarray, rank_tol: float | None = None):
    """Full QR of ``B`` split as ``B = Q1 R`` with ``Q2`` spanning the complement.

    Returns
    -------
    Q1 : (n, m) array
    Q2 : (n, n - m) array
    R : (m, m) upper-triangular array
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise RankDeficientInput("B must be a 2-D array")
    n, m = B.shape
    if not n >= m >= 1:
        raise RankDeficientInput(f"B must satisfy n >= m >= 1, got shape {B.shape}")
    s = np.linalg.svd(B, compute_uv=False)
    if numerical_rank(s, rank_tol, B.shape) < m:
        raise RankDeficientInput("B does not have full column rank")
    Q, R = np.linalg.qr(B, mode="complete")
    return Q[:, :m], Q[:, m:], R[:m, :]


def jacobi_orthogonalize(x, y, tol: float | None = None) -> tuple[float, float]:
    """Plane rotation making ``c*x - s*y`` and ``s*x + c*y`` orthogonal.

    Uses the classical one-sided Jacobi choice of ``t = tan(theta)`` as the
    smaller root of ``t^2 + 2 tau t - 1 = 0``. When ``x`` and ``y`` are
    already orthogonal to within ``tol`` the identity rotation is returned.

    Raises
    ------
    DependentVectors
        If ``[x y]`` has numerical rank below 2.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if tol is None:
        tol = default_rank_tol((x.size, 2))
    s2 = np.linalg.svd(np.column_stack([x, y]), compute_uv=False)
    if s2[0] == 0.0 or s2[1] <= tol * s2[0]:
        raise DependentVectors("vectors are numerically dependent")
    rho1 = float(x @ x)
    rho2 = float(y @ y)
    gamma = float(x @ y)
    if abs(gamma) <= tol * np.sqrt(rho1 * rho2):
        return 1.0, 0.0
    tau = (rho2 - rho1) / (2.0 * gamma)
    if tau >= 0:
        t = 1.0 / (tau + np.hypot(1.0, tau))
    else:
        t = -1.0 / (-tau + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return float(c), float(t * c)


def _symplectic_unit(n: int) -> np.ndarray:
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block([[Z, -I], [I, Z]])


def hamiltonian_paired_eig(A: np.ndarray, B: np.ndarray, tol: float | None = None):
    """Paired eigendecomposition of ``K = [[A, B], [B, -A]]``.

    For symmetric ``A`` and ``B``, ``K`` anticommutes with ``J = [[0, -I], [I, 0]]``
    so its spectrum is symmetric about zero. This returns an orthogonal ``U``
    with ``U[:, n + j] = J @ U[:, j]`` and ``theta >= 0`` sorted non-increasing
    such that ``K = U diag(theta, -theta) U^T``; the same ``U`` then also gives
    ``[[B, -A], [-A, -B]] = U [[0, -Theta], [-Theta, 0]] U^T``.

    Eigenvectors of the symmetric solver are re-orthogonalized against the
    already chosen columns and their ``J`` images, so the pairing survives
    clusters of (near) zero eigenvalues where the solver's basis is arbitrary.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError("A and B must be square of equal size")
    for name, M in (("A", A), ("B", B)):
        nrm = np.linalg.norm(M)
        if np.linalg.norm(M - M.T) > 10 * EPS * max(nrm, 1e-300) * max(n, 1):
            raise NotSymmetric(f"{name} is not symmetric")
    K = np.block([[A, B], [B, -A]])
    K = 0.5 * (K + K.T)
    J = _symplectic_unit(n)
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)

    w, V = np.linalg.eigh(K)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    scale = max(abs(w[0]), abs(w[-1]))
    if tol is None:
        tol = 100 * 2 * n * EPS
    npos = int(np.count_nonzero(w > tol * scale)) if scale > 0 else 0
    npos = min(npos, n)

    chosen: list[np.ndarray] = []

    def project(v):
        for _ in range(2):
            for u in chosen:
                v = v - u * (u @ v)
                Ju = J @ u
                v = v - Ju * (Ju @ v)
        return v

    for j in range(npos):
        v = project(V[:, j])
        chosen.append(v / np.linalg.norm(v))
    # remaining columns come from the near-null cluster, pivoted by residual
    candidates = [V[:, j] for j in range(npos, 2 * n - npos)]
    while len(chosen) < n:
        projected = [project(v) for v in candidates]
        norms = [np.linalg.norm(v) for v in projected]
        k = int(np.argmax(norms))
        chosen.append(projected[k] / norms[k])
        candidates.pop(k)

    Up = np.column_stack(chosen)
    theta = np.einsum("ij,ij->j", Up, K @ Up)
    theta = np.maximum(theta, 0.0)
    order = np.argsort(-theta, kind="stable")
    theta, Up = theta[order], Up[:, order]
    U = np.hstack([Up, J @ Up])
    return U, theta


def real_schur_eigvals(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a real square matrix via the real Schur form.

    Complex eigenvalues come out in exact conjugate pairs because they are
    read off the 2x2 diagonal blocks.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        T = scipy.linalg.schur(M, output="real")[0]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc
    n = T.shape[0]
    out = np.empty(n, dtype=complex)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            blk = T[i:i + 2, i:i + 2]
            a = 0.5 * (blk[0, 0] + blk[1, 1])
            det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
            disc = det - a * a
            if disc > 0:
                b = np.sqrt(disc)
                out[i], out[i + 1] = complex(a, b), complex(a, -b)
            else:
                ev = np.linalg.eigvals(blk)
                out[i:i + 2] = ev
            i += 2
        else:
            out[i] = T[i, i]
            i += 1
    return out
