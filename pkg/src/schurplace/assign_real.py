"""Placement of a repeated real pole.

Each sub-step takes the null space of the constraint matrix built from all
columns placed so far, and appends as many columns as the rank of its state
block allows, all sharing the diagonal block ``lam * I``.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import FeasibilityBreakdown, InsufficientRank
from .schur import GroupRecord, SchurAccumulator, build_constraint_matrix


def solve_block_optimization(S1: np.ndarray, S2: np.ndarray, count: int,
                             rank_tol: float | None = None, svd_S1=None):
    """Minimize ``||S2 Z||_F`` subject to ``(S1 Z)^T (S1 Z) = I``.

    ``[S1; S2]`` must have orthonormal columns. The minimizer is
    ``Z = V[:, :count] diag(1 / sigma_1..count)`` built from the SVD
    ``S1 = U Sigma V^T``, which makes ``S1 Z = U[:, :count]``.

    Returns
    -------
    Xnew : (n, count) array
        New orthonormal state columns.
    Vnew : (q, count) array
        Coupling columns, ``S2 Z``.
    objective : float
        ``||Vnew||_F^2 = sum(1 / sigma_j^2) - count``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    res = svd_S1 if svd_S1 is not None else linalg.svd(S1, rank_tol)
    if count > res.numerical_rank:
        raise InsufficientRank(
            f"need {count} directions but the state block has rank {res.numerical_rank}")
    sig = res.singular_values[:count]
    Xnew = res.U[:, :count]
    Vnew = (S2 @ res.V[:, :count]) / sig
    if np.iscomplexobj(Xnew):
        Xnew, Vnew = Xnew.real, Vnew.real
    objective = float(np.sum(1.0 / sig**2) - count)
    return Xnew, Vnew, objective


def assign_real_group(acc: SchurAccumulator, A: np.ndarray, Q2: np.ndarray,
                      lam: float, a: int, rank_tol: float | None = None) -> SchurAccumulator:
    """Append ``a`` columns for the real pole ``lam`` to ``acc``.

    Block sizes are chosen greedily: each sub-step takes
    ``min(remaining, rank(S1))`` columns. The realized sizes are recorded in
    a new :class:`GroupRecord` on ``acc.groups``.
    """
    lam = float(np.real(lam))
    n = A.shape[0]
    record = GroupRecord(pole=complex(lam), multiplicity=a, start=acc.size)
    q = 0
    while q < a:
        Xl = acc.Xr
        M = build_constraint_matrix(A, Q2, lam, Xl, Xl)
        S = linalg.null_basis(M)
        S1, S2 = S[:n], S[n:]
        res = linalg.svd(S1, rank_tol)
        r = res.numerical_rank
        acc.steps.append({
            "pole": complex(lam), "columns": acc.size, "rows": M.shape[0],
            "constraint_rank": M.shape[1] - S.shape[1], "null_dim": S.shape[1],
            "state_rank": r,
        })
        if r == 0:
            raise FeasibilityBreakdown(
                f"no admissible column for pole {lam} after {acc.size} columns")
        c = min(a - q, r)
        acc.steps[-1]["case"] = "i" if c == a - q else "ii"
        Xnew, Vnew, _ = solve_block_optimization(S1, S2, c, svd_S1=res)
        acc.append_real_block(Xnew, Vnew, lam)
        record.sizes.append(c)
        record.cases.append(acc.steps[-1]["case"])
        q += c
    acc.groups.append(record)
    return acc
