"""Column-by-column construction state for ``A + BF = X T X^T``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DiagonalBlock:
    """One 1x1 or 2x2 diagonal block of ``T``.

    ``delta`` is only meaningful for 2x2 blocks, which have the form
    ``[[alpha, delta*beta], [-beta/delta, alpha]]``.
    """

    start: int
    size: int
    pole: complex
    delta: float = 1.0


@dataclass
class GroupRecord:
    """Realized block structure ``(n_1, ..., n_l)`` of one pole group."""

    pole: complex
    multiplicity: int
    start: int
    sizes: list[int] = field(default_factory=list)
    cases: list[str] = field(default_factory=list)


@dataclass
class SchurAccumulator:
    """Partially built orthonormal ``X`` and quasi-triangular ``T``.

    ``X`` and ``T`` are preallocated at full size ``n``; only the leading
    ``size`` columns (and the leading ``size x size`` part of ``T``) are
    meaningful.
    """

    n: int
    X: np.ndarray = None
    T: np.ndarray = None
    size: int = 0
    blocks: list[DiagonalBlock] = field(default_factory=list)
    groups: list[GroupRecord] = field(default_factory=list)
    steps: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.X is None:
            self.X = np.zeros((self.n, self.n))
        if self.T is None:
            self.T = np.zeros((self.n, self.n))

    @property
    def Xr(self) -> np.ndarray:
        return self.X[:, :self.size]

    @property
    def Tr(self) -> np.ndarray:
        return self.T[:self.size, :self.size]

    def append_real_block(self, Xnew: np.ndarray, coupling: np.ndarray, lam: float):
        """Append ``c`` columns with diagonal block ``lam * I_c``.

        ``coupling`` is ``size x c``; it fills ``T[:size, new]``.
        """
        r, c = self.size, Xnew.shape[1]
        if r + c > self.n:
            raise ValueError("accumulator overflow")
        self.X[:, r:r + c] = Xnew
        if r:
            self.T[:r, r:r + c] = coupling
        self.T[r:r + c, r:r + c] = lam * np.eye(c)
        for j in range(c):
            self.blocks.append(DiagonalBlock(r + j, 1, complex(lam)))
        self.size = r + c

    def append_pair(self, x1, x2, v1, v2, lam: complex, delta: float):
        """Append two columns for the conjugate pair ``{lam, conj(lam)}``.

        ``v1``, ``v2`` couple into the leading ``len(v1)`` rows only; the rows
        between that prefix and the current size stay zero.
        """
        r = self.size
        if r + 2 > self.n:
            raise ValueError("accumulator overflow")
        alpha, beta = lam.real, lam.imag
        self.X[:, r] = x1
        self.X[:, r + 1] = x2
        p = len(v1)
        if p:
            self.T[:p, r] = v1
            self.T[:p, r + 1] = v2
        self.T[r:r + 2, r:r + 2] = [[alpha, delta * beta], [-beta / delta, alpha]]
        self.blocks.append(DiagonalBlock(r, 2, complex(lam), float(delta)))
        self.size = r + 2

    def orthonormality_error(self) -> float:
        Xr = self.Xr
        return float(np.linalg.norm(Xr.T @ Xr - np.eye(self.size)))

    def constraint_residual(self, A: np.ndarray, Q2: np.ndarray) -> float:
        Xr = self.Xr
        return float(np.linalg.norm(Q2.T @ (A @ Xr - Xr @ self.Tr)))


def build_constraint_matrix(A: np.ndarray, Q2: np.ndarray, lam: complex,
                            X_p: np.ndarray, X_q: np.ndarray) -> np.ndarray:
    """Stack ``[[Q2^T (A - lam I), -Q2^T X_p], [X_q^T, 0]]``.

    ``X_p`` holds the columns new vectors may couple to through ``T``; ``X_q``
    the columns they must be orthogonal to. The result is real when ``lam``
    is real and complex otherwise.
    """
    n = A.shape[0]
    p, q = X_p.shape[1], X_q.shape[1]
    lam = complex(lam)
    dtype = float if lam.imag == 0 else complex
    shift = lam.real if lam.imag == 0 else lam
    top_left = Q2.T @ A - shift * Q2.T
    M = np.zeros((Q2.shape[1] + q, n + p), dtype=dtype)
    M[:Q2.shape[1], :n] = top_left
    if p:
        M[:Q2.shape[1], n:] = -(Q2.T @ X_p)
    if q:
        M[Q2.shape[1]:, :n] = X_q.T
    return M
