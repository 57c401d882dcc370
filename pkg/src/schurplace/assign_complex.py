"""Placement of a repeated complex-conjugate pair ``{lam, conj(lam)}``.

Pairs are placed one at a time. Every placement reduces to picking a
complex null vector ``[z; w]`` of a constraint matrix and turning it into
two real orthonormal columns ``x1, x2``, two coupling columns ``v1, v2`` and
the scaling ``delta`` of the 2x2 diagonal block
``[[alpha, delta*beta], [-beta/delta, alpha]]``: multiplying ``z`` by a
phase does not leave the null space, so a Jacobi rotation makes
``Re z`` and ``Im z`` orthogonal, and ``delta`` is the ratio of their norms.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    DependentRealImag,
    DependentVectors,
    FeasibilityBreakdown,
    InsufficientRank,
    NumericalDegeneracy,
)
from .schur import GroupRecord, SchurAccumulator, build_constraint_matrix

# relative gap under which leading singular values are treated as one cluster
CLUSTER_TOL = 1e-10


def _branch_tol(n: int) -> float:
    return 16 * max(n, 2) * linalg.EPS


def _independence_tol(n: int, rank_tol: float | None) -> float:
    return rank_tol if rank_tol is not None else linalg.default_rank_tol((n, 2))


def real_imag_independent(u: np.ndarray, rank_tol: float | None = None) -> bool:
    s = np.linalg.svd(np.column_stack([u.real, u.imag]), compute_uv=False)
    return bool(s[0] > 0 and s[1] > _independence_tol(u.size, rank_tol) * s[0])


def pair_from_null_vector(z: np.ndarray, w: np.ndarray, unit_delta: bool = False,
                          tol: float | None = None):
    """Convert a complex null vector ``[z; w]`` into real pair data.

    With ``unit_delta`` the caller guarantees ``Re z`` and ``Im z`` already
    have equal norms, and ``delta`` is set to exactly one.

    Returns ``(x1, x2, v1, v2, delta)``.
    """
    c, s = linalg.jacobi_orthogonalize(z.real, z.imag, tol)
    xt1 = c * z.real - s * z.imag
    xt2 = s * z.real + c * z.imag
    wt1 = c * w.real - s * w.imag
    wt2 = s * w.real + c * w.imag
    n1 = np.linalg.norm(xt1)
    n2 = np.linalg.norm(xt2)
    delta = 1.0 if unit_delta else float(n1 / n2)
    return xt1 / n1, xt2 / n2, wt1 / n1, wt2 / n2, delta


def isotropic_combination(C: np.ndarray) -> np.ndarray | None:
    """Coefficients ``y`` with ``Re(C y)`` orthogonal to and as long as ``Im(C y)``.

    ``C`` is a complex ``n x k`` matrix with orthonormal columns. Writing
    ``C = C1 + i C2`` and ``y = y1 + i y2``, both conditions are quadratic
    forms in ``[y1; y2]`` whose matrices share the paired eigenvectors of
    :func:`~schurplace.linalg.hamiltonian_paired_eig`; the combination
    ``mu*u_1 + u_2 - mu*J u_1 + J u_2`` with ``mu = sqrt(theta_2/theta_1)``
    zeroes both. Returns ``None`` when ``k == 1`` and the single column does
    not already qualify.
    """
    n, k = C.shape
    C1, C2 = C.real, C.imag
    P = C1.T @ C2 + C2.T @ C1
    Q = C1.T @ C1 - C2.T @ C2
    if np.linalg.norm(P) <= _branch_tol(n) and np.linalg.norm(Q) <= _branch_tol(n):
        y = np.zeros(k, dtype=complex)
        y[0] = 1 + 1j
        return y
    if k < 2:
        return None
    U, theta = linalg.hamiltonian_paired_eig(P, Q)
    mu = np.sqrt(theta[1] / theta[0])
    coeffs = mu * U[:, 0] + U[:, 1] - mu * U[:, k] + U[:, k + 1]
    return coeffs[:k] + 1j * coeffs[k:]


def initial_complex_pair(A: np.ndarray, Q2: np.ndarray, lam: complex,
                         rank_tol: float | None = None):
    """First two columns for a complex pair placed before anything else.

    Returns ``(x1, x2, delta)``. ``delta`` is exactly one whenever the null
    space of ``Q2^T (A - lam I)`` has dimension at least two (that is, for
    ``m >= 2``). With a single input the only candidate direction is fixed
    up to a phase, and ``delta`` is whatever the Jacobi rotation leaves.
    """
    n = A.shape[0]
    empty = np.zeros((n, 0))
    M = build_constraint_matrix(A, Q2, lam, empty, empty)
    S = linalg.null_basis(M, rank_tol)
    if S.shape[1] == 0:
        raise FeasibilityBreakdown("null space of Q2^T (A - lam I) is empty")
    y = isotropic_combination(S)
    if y is not None:
        z = S @ y
        x1, x2, _, _, delta = pair_from_null_vector(z, np.zeros(0, dtype=complex),
                                                    unit_delta=True)
        return x1, x2, delta
    z = S[:, 0]
    if not real_imag_independent(z, rank_tol):
        raise FeasibilityBreakdown("kernel vector has dependent real and imaginary parts")
    x1, x2, _, _, delta = pair_from_null_vector(z, np.zeros(0, dtype=complex))
    return x1, x2, delta


def _quadratic_terms(c, s, n1, n2, w1, sigma1, W):
    """``H``, ``g``, ``zeta`` of ``||v1||^2 + ||v2||^2`` in ``[Re y; Im y]``."""
    Y1 = np.hstack([W.real, -W.imag])
    Y2 = np.hstack([W.imag, W.real])
    a, b = w1.real, w1.imag
    i1, i2 = 1.0 / n1**2, 1.0 / n2**2
    P = c * Y1 - s * Y2
    R = s * Y1 + c * Y2
    H = i1 * (P.T @ P) + i2 * (R.T @ R)
    k1 = c * c * i1 + s * s * i2
    k2 = s * s * i1 + c * c * i2
    k3 = c * s * (i2 - i1)
    g = (2.0 / sigma1) * (k1 * (Y1.T @ a) + k2 * (Y2.T @ b) + k3 * (Y2.T @ a + Y1.T @ b))
    zeta = (k1 * (a @ a) + k2 * (b @ b) + 2.0 * k3 * (a @ b)) / sigma1**2
    return H, g, float(zeta)


def _jacobi_place(u, w1, sigma1, W, rank_tol, details=None):
    n = u.size
    if not real_imag_independent(u, rank_tol):
        raise DependentRealImag("Re(u) and Im(u) are linearly dependent")
    c, s = linalg.jacobi_orthogonalize(u.real, u.imag, _independence_tol(n, rank_tol))
    xt1 = c * u.real - s * u.imag
    xt2 = s * u.real + c * u.imag
    n1, n2 = np.linalg.norm(xt1), np.linalg.norm(xt2)
    H, g, zeta = _quadratic_terms(c, s, n1, n2, w1, sigma1, W)
    k = W.shape[1]
    if k:
        try:
            cho = scipy.linalg.cho_factor(H)
        except np.linalg.LinAlgError as exc:
            raise NumericalDegeneracy("quadratic term is not positive definite") from exc
        yhat = -0.5 * scipy.linalg.cho_solve(cho, g)
        y = yhat[:k] + 1j * yhat[k:]
    else:
        yhat = np.zeros(0)
        y = np.zeros(0, dtype=complex)
    w = w1 / sigma1 + W @ y
    v1 = (c * w.real - s * w.imag) / n1
    v2 = (s * w.real + c * w.imag) / n2
    if details is not None:
        details.update(H=H, g=g, zeta=zeta, y=yhat, c=c, s=s, n1=n1, n2=n2,
                       objective=float(v1 @ v1 + v2 @ v2))
    return xt1 / n1, xt2 / n2, v1, v2, float(n1 / n2)


def place_pair_case4(S1: np.ndarray, S2: np.ndarray, lam: complex = None,
                     rank_tol: float | None = None, svd_S1=None, details: dict | None = None):
    """Pair placement when the state block ``S1`` has a single direction ``u``.

    ``x1, x2`` are the normalized Jacobi rotation of ``Re u, Im u`` and
    ``delta`` the ratio of their norms. The coupling is
    ``w = w_1/sigma_1 + W y`` where ``W`` spans the null-space directions
    with zero state part; ``y`` minimizes ``||v1||^2 + ||v2||^2``, a convex
    quadratic ``yhat^T H yhat + g^T yhat + zeta`` solved as ``-H^{-1} g / 2``.

    Pass a dict as ``details`` to receive ``H``, ``g``, ``zeta``, the optimal
    ``y`` and the attained objective.
    """
    res = svd_S1 if svd_S1 is not None else linalg.svd(S1, rank_tol)
    r = res.numerical_rank
    if r < 1:
        raise InsufficientRank("state block is zero")
    SV = S2 @ res.V
    return _jacobi_place(res.U[:, 0], SV[:, 0], res.singular_values[0], SV[:, r:],
                         rank_tol, details)


def place_pair_case3(S1: np.ndarray, S2: np.ndarray, lam: complex = None,
                     rank_tol: float | None = None, svd_S1=None, details: dict | None = None):
    """Pair placement when the state block ``S1`` has rank two or more.

    If the top left singular vector ``u_1`` already has orthogonal real and
    imaginary parts of equal length, it is used directly with ``delta = 1``.
    If ``sigma_1`` is a repeated singular value, a combination inside its
    singular subspace with the same property is built instead (this also
    gives ``delta = 1`` and the same coupling cost). Otherwise ``u_1`` goes
    through the single-direction procedure of :func:`place_pair_case4`.
    """
    n = S1.shape[0]
    res = svd_S1 if svd_S1 is not None else linalg.svd(S1, rank_tol)
    r = res.numerical_rank
    if r < 2:
        raise InsufficientRank(f"state block has rank {r}, need at least 2")
    sig = res.singular_values
    U, V = res.U, res.V
    info = details if details is not None else {}
    u1 = U[:, 0]
    if abs(u1 @ u1) <= _branch_tol(n):
        info["branch"] = "orthonormal"
        z, w = u1, S2 @ V[:, 0] / sig[0]
        return pair_from_null_vector(z, w, unit_delta=True)
    cluster = int(np.count_nonzero(sig[:r] >= sig[0] * (1.0 - CLUSTER_TOL)))
    if cluster >= 2:
        y = isotropic_combination(U[:, :cluster])
        info["branch"] = "cluster"
        z = U[:, :cluster] @ y
        w = S2 @ (V[:, :cluster] @ (y / sig[:cluster]))
        return pair_from_null_vector(z, w, unit_delta=True)
    info["branch"] = "jacobi"
    SV = S2 @ V
    W = SV[:, r:]
    if real_imag_independent(u1, rank_tol):
        return _jacobi_place(u1, SV[:, 0], sig[0], W, rank_tol, details)
    # u_1 is a real vector up to phase: mix in the second direction
    for mix in (1j, 1.0):
        coef = np.zeros(V.shape[1], dtype=complex)
        coef[0], coef[1] = 1.0 / sig[0], mix / sig[1]
        coef /= np.sqrt(2.0)
        z = U[:, :2] @ (coef[:2] * sig[:2])
        if real_imag_independent(z, rank_tol):
            info["branch"] = "jacobi-mixed"
            return _jacobi_place(z, SV @ coef, 1.0, W, rank_tol, details)
    raise DependentRealImag("no candidate direction with independent real and imaginary parts")


def place_pair_case5(acc: SchurAccumulator, A: np.ndarray, Q2: np.ndarray, lam: complex,
                     rank_tol: float | None = None, details: dict | None = None):
    """Start a new diagonal block: couple to every column placed so far.

    Returns ``(x1, x2, v1, v2, delta, route)`` where ``route`` names the
    sub-procedure used (``"iii"`` or ``"iv"``). The coupling vectors have
    length ``acc.size``.
    """
    n = A.shape[0]
    Xl = acc.Xr
    M = build_constraint_matrix(A, Q2, lam, Xl, Xl)
    S = linalg.null_basis(M, rank_tol)
    S1, S2 = S[:n], S[n:]
    res = linalg.svd(S1, rank_tol)
    if details is not None:
        details.update(rows=M.shape[0], null_dim=S.shape[1], state_rank=res.numerical_rank)
    if res.numerical_rank >= 2:
        return (*place_pair_case3(S1, S2, lam, rank_tol, res, details), "iii")
    if res.numerical_rank == 1:
        try:
            return (*place_pair_case4(S1, S2, lam, rank_tol, res, details), "iv")
        except DependentVectors as exc:
            raise FeasibilityBreakdown(
                "full-prefix kernel direction has dependent real/imaginary parts") from exc
    raise FeasibilityBreakdown(f"no admissible pair for pole {lam} after {acc.size} columns")


def assign_complex_group(acc: SchurAccumulator, A: np.ndarray, Q2: np.ndarray,
                         lam: complex, a: int, rank_tol: float | None = None) -> SchurAccumulator:
    """Append ``2a`` columns for ``a`` copies of ``{lam, conj(lam)}``.

    A pair joins the current diagonal block (coupling only to columns in
    front of that block) whenever the constraint null space allows it;
    otherwise a new block is opened. The realized block sizes, counted in
    pairs, go to a new :class:`GroupRecord`.
    """
    lam = complex(lam)
    if lam.imag < 0:
        lam = lam.conjugate()
    if lam.imag == 0:
        raise ValueError("assign_complex_group needs a non-real pole")
    n = A.shape[0]
    record = GroupRecord(pole=lam, multiplicity=a, start=acc.size)
    placed = 0
    k = acc.size
    if acc.size == 0:
        x1, x2, delta = initial_complex_pair(A, Q2, lam, rank_tol)
        acc.append_pair(x1, x2, np.zeros(0), np.zeros(0), lam, delta)
        acc.steps.append({"pole": lam, "columns": 0, "case": "initial"})
        record.sizes.append(1)
        record.cases.append("initial")
        placed = 1
    while placed < a:
        l = acc.size
        M = build_constraint_matrix(A, Q2, lam, acc.X[:, :k], acc.Xr)
        S = linalg.null_basis(M, rank_tol)
        S1, S2 = S[:n], S[n:]
        res = linalg.svd(S1, rank_tol)
        r = res.numerical_rank
        step = {"pole": lam, "columns": l, "rows": M.shape[0], "coupling": k,
                "null_dim": S.shape[1], "state_rank": r}
        if r >= 2:
            case = "iii"
            out = place_pair_case3(S1, S2, lam, rank_tol, res, step)
        elif r == 1 and real_imag_independent(res.U[:, 0], rank_tol):
            case = "iv"
            out = place_pair_case4(S1, S2, lam, rank_tol, res, step)
        else:
            case = "v"
            *out, route = place_pair_case5(acc, A, Q2, lam, rank_tol, step)
            step["route"] = route
            k = l
        x1, x2, v1, v2, delta = out
        step["case"] = case
        acc.steps.append(step)
        acc.append_pair(x1, x2, v1, v2, lam, delta)
        if placed == 0 or case == "v":
            record.sizes.append(1)
        else:
            record.sizes[-1] += 1
        record.cases.append(case)
        placed += 1
    acc.groups.append(record)
    return acc
