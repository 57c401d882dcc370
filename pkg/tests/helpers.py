"""Shared constructions for the test-suite."""

import numpy as np


def orthonormal(rng, rows, cols, complex_=False):
    G = rng.standard_normal((rows, cols))
    if complex_:
        G = G + 1j * rng.standard_normal((rows, cols))
    Q, _ = np.linalg.qr(G)
    return Q


def stacked_basis(rng, n, q, sigmas, complex_=False):
    """``[S1; S2]`` with orthonormal columns and prescribed singular values of ``S1``."""
    sigmas = np.asarray(sigmas, dtype=float)
    d = sigmas.size
    U = orthonormal(rng, n, d, complex_)
    P = orthonormal(rng, q, d, complex_)
    V = orthonormal(rng, d, d, complex_)
    S1 = U @ np.diag(sigmas) @ V.conj().T
    S2 = P @ np.diag(np.sqrt(1 - sigmas**2)) @ V.conj().T
    return S1, S2


def feasible_Z(rng, S1, count):
    """Random ``Z`` with ``(S1 Z)^T (S1 Z) = I``."""
    Z0 = rng.standard_normal((S1.shape[1], count))
    _, R = np.linalg.qr(S1 @ Z0)
    return Z0 @ np.linalg.inv(R)


def random_system(rng, n, m):
    return rng.standard_normal((n, n)), rng.standard_normal((n, m))


def complement(B):
    Q, _ = np.linalg.qr(B, mode="complete")
    return Q[:, B.shape[1]:]
