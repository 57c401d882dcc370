import numpy as np
import pytest

from helpers import complement, orthonormal, random_system, stacked_basis
from schurplace import SystemPair, assign, spec_from_values
from schurplace.assign_complex import (
    assign_complex_group,
    initial_complex_pair,
    isotropic_combination,
    pair_from_null_vector,
    place_pair_case3,
    place_pair_case4,
)
from schurplace.errors import DependentRealImag, InsufficientRank
from schurplace.metrics import departure_from_normality, geometric_multiplicity, precs
from schurplace.schur import SchurAccumulator


def isotropic_basis(rng, n, k):
    """Orthonormal complex columns ``(P + iQ)/sqrt(2)`` with ``C^T C = 0``."""
    PQ = orthonormal(rng, n, 2 * k)
    return (PQ[:, :k] + 1j * PQ[:, k:]) / np.sqrt(2)


def pair_ok(x1, x2, tol=1e-10):
    assert abs(x1 @ x2) <= tol
    assert abs(np.linalg.norm(x1) - 1) <= tol and abs(np.linalg.norm(x2) - 1) <= tol


def in_span(S, vec, tol=1e-10):
    coef, *_ = np.linalg.lstsq(S, vec, rcond=None)
    return np.linalg.norm(S @ coef - vec) <= tol * np.linalg.norm(vec)


def test_pair_from_null_vector():
    rng = np.random.default_rng(0)
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    x1, x2, v1, v2, delta = pair_from_null_vector(z, w)
    pair_ok(x1, x2)
    # the realized pair is a phase multiple of z
    zz = x1 + 1j * x2 / delta
    ww = v1 + 1j * v2 / delta
    ratio = zz / z
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)
    np.testing.assert_allclose(ww / w, ratio[0], rtol=1e-12)


@pytest.mark.parametrize("n,k", [(4, 2), (7, 3), (9, 5)])
def test_isotropic_combination(n, k):
    rng = np.random.default_rng(n + k)
    C = orthonormal(rng, n, k, complex_=True)
    y = isotropic_combination(C)
    z = C @ y
    assert abs(z.real @ z.imag) <= 1e-12 * np.linalg.norm(z) ** 2
    assert abs(np.linalg.norm(z.real) - np.linalg.norm(z.imag)) <= 1e-12 * np.linalg.norm(z)


def test_isotropic_combination_branch():
    rng = np.random.default_rng(1)
    C = isotropic_basis(rng, 6, 2)
    C1, C2 = C.real, C.imag
    np.testing.assert_allclose(C1.T @ C2, 0, atol=1e-15)
    np.testing.assert_allclose(C1.T @ C1, 0.5 * np.eye(2), atol=1e-15)
    y = isotropic_combination(C)
    z = C @ y
    assert abs(z.real @ z.imag) <= 1e-14
    assert abs(np.linalg.norm(z.real) - np.linalg.norm(z.imag)) <= 1e-14


def test_isotropic_combination_single_column():
    rng = np.random.default_rng(2)
    assert isotropic_combination(orthonormal(rng, 4, 1, complex_=True)) is None


def test_initial_pair_residual_and_unit_delta():
    rng = np.random.default_rng(3)
    A, B = random_system(rng, 5, 2)
    Q2 = complement(B)
    lam = 1 + 2j
    x1, x2, delta = initial_complex_pair(A, Q2, lam)
    pair_ok(x1, x2)
    assert delta == 1.0
    assert np.linalg.norm(Q2.T @ (A - lam * np.eye(5)) @ (x1 + 1j * x2)) <= 1e-10 * np.linalg.norm(A)


def test_initial_pair_single_input_falls_back():
    rng = np.random.default_rng(4)
    A, B = random_system(rng, 4, 1)
    Q2 = complement(B)
    lam = 0.5 + 1j
    x1, x2, delta = initial_complex_pair(A, Q2, lam)
    pair_ok(x1, x2)
    z = x1 + 1j * x2 / delta
    assert np.linalg.norm(Q2.T @ (A - lam * np.eye(4)) @ z) <= 1e-10 * np.linalg.norm(A)


def test_case3_orthonormal_branch_zero_coupling():
    rng = np.random.default_rng(5)
    S1 = isotropic_basis(rng, 6, 3)
    S2 = np.zeros((2, 3), dtype=complex)
    info = {}
    x1, x2, v1, v2, delta = place_pair_case3(S1, S2, details=info)
    assert info["branch"] == "orthonormal"
    pair_ok(x1, x2)
    assert delta == 1.0
    assert np.abs(v1).max() == 0 and np.abs(v2).max() == 0


def test_case3_orthonormal_branch_objective():
    rng = np.random.default_rng(6)
    sig = np.array([0.8, 0.6, 0.3])
    C = isotropic_basis(rng, 7, 3)
    V = orthonormal(rng, 3, 3, complex_=True)
    P = orthonormal(rng, 4, 3, complex_=True)
    S1 = C @ np.diag(sig) @ V.conj().T
    S2 = P @ np.diag(np.sqrt(1 - sig**2)) @ V.conj().T
    info = {}
    x1, x2, v1, v2, delta = place_pair_case3(S1, S2, details=info)
    assert info["branch"] == "orthonormal"
    assert delta == 1.0
    expected = 2 * (1 - sig[0] ** 2) / sig[0] ** 2
    assert v1 @ v1 + v2 @ v2 == pytest.approx(expected, rel=1e-10)


def test_case3_cluster_branch():
    rng = np.random.default_rng(7)
    sig = np.array([0.7, 0.7, 0.4])
    S1, S2 = stacked_basis(rng, 6, 4, sig, complex_=True)
    info = {}
    x1, x2, v1, v2, delta = place_pair_case3(S1, S2, details=info)
    assert info["branch"] == "cluster"
    pair_ok(x1, x2)
    assert delta == 1.0
    assert v1 @ v1 + v2 @ v2 == pytest.approx(2 * (1 - 0.49) / 0.49, rel=1e-10)
    S = np.vstack([S1, S2])
    assert in_span(S, np.concatenate([x1 + 1j * x2, v1 + 1j * v2]))


def test_case3_fallback_satisfies_constraints():
    rng = np.random.default_rng(8)
    S1, S2 = stacked_basis(rng, 6, 4, [0.9, 0.5, 0.0], complex_=True)
    info = {}
    x1, x2, v1, v2, delta = place_pair_case3(S1, S2, details=info)
    assert info["branch"] == "jacobi"
    pair_ok(x1, x2)
    S = np.vstack([S1, S2])
    assert in_span(S, np.concatenate([x1 + 1j * x2 / delta, v1 + 1j * v2 / delta]))


def test_case3_dependent_top_vector_mixes_directions():
    rng = np.random.default_rng(9)
    U = orthonormal(rng, 6, 2)  # real left singular vectors
    V = orthonormal(rng, 3, 3, complex_=True)
    P = orthonormal(rng, 4, 3, complex_=True)
    sig = np.array([0.9, 0.5, 0.0])
    S1 = np.hstack([U, np.zeros((6, 1))]) @ np.diag(sig) @ V.conj().T
    S2 = P @ np.diag(np.sqrt(1 - sig**2)) @ V.conj().T
    info = {}
    x1, x2, v1, v2, delta = place_pair_case3(S1, S2, details=info)
    assert info["branch"] == "jacobi-mixed"
    pair_ok(x1, x2)
    assert in_span(np.vstack([S1, S2]), np.concatenate([x1 + 1j * x2 / delta, v1 + 1j * v2 / delta]))


def test_case3_needs_rank_two():
    rng = np.random.default_rng(10)
    S1, S2 = stacked_basis(rng, 5, 3, [0.9, 0.0], complex_=True)
    with pytest.raises(InsufficientRank):
        place_pair_case3(S1, S2)


def _case4_instance(rng, d, n=6, q=5):
    sig = np.zeros(d)
    sig[0] = 0.6
    return stacked_basis(rng, n, q, sig, complex_=True)


def _objective(info, w0, W, y):
    c, s, n1, n2 = info["c"], info["s"], info["n1"], info["n2"]
    k = W.shape[1]
    w = w0 + W @ (y[:k] + 1j * y[k:])
    v1 = (c * w.real - s * w.imag) / n1
    v2 = (s * w.real + c * w.imag) / n2
    return v1 @ v1 + v2 @ v2


def _case4_parts(S1, S2):
    U, s, Vh = np.linalg.svd(S1)
    V = Vh.conj().T
    SV = S2 @ V
    return SV[:, 0] / s[0], SV[:, 1:]


def test_case4_without_free_parameters():
    rng = np.random.default_rng(11)
    S1, S2 = _case4_instance(rng, 1)
    info = {}
    x1, x2, v1, v2, delta = place_pair_case4(S1, S2, details=info)
    pair_ok(x1, x2)
    assert info["H"].shape == (0, 0)
    assert v1 @ v1 + v2 @ v2 == pytest.approx(info["zeta"], rel=1e-12)


def test_case4_quadratic_model_and_minimality():
    rng = np.random.default_rng(12)
    S1, S2 = _case4_instance(rng, 3)
    info = {}
    x1, x2, v1, v2, delta = place_pair_case4(S1, S2, details=info)
    pair_ok(x1, x2)
    H, g, zeta = info["H"], info["g"], info["zeta"]
    np.testing.assert_allclose(H, H.T, atol=1e-14)
    assert np.linalg.eigvalsh(H).min() > 0
    w0, W = _case4_parts(S1, S2)
    # the displayed quadratic reproduces the objective everywhere
    for _ in range(20):
        y = rng.standard_normal(4)
        assert _objective(info, w0, W, y) == pytest.approx(y @ H @ y + g @ y + zeta, rel=1e-10)
    best = info["objective"]
    assert best == pytest.approx(v1 @ v1 + v2 @ v2, rel=1e-12)
    assert best <= zeta + 1e-12
    for _ in range(1000):
        y = info["y"] + rng.standard_normal(4) * 10 ** rng.uniform(-3, 1)
        assert best <= _objective(info, w0, W, y) + 1e-12
    # central finite differences at the minimizer
    h = 1e-6
    grad = np.array([(_objective(info, w0, W, info["y"] + h * e)
                      - _objective(info, w0, W, info["y"] - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.linalg.norm(grad) <= 1e-6 * (1 + np.linalg.norm(g))


def test_case4_rejects_dependent_parts():
    rng = np.random.default_rng(13)
    u = orthonormal(rng, 5, 1)[:, 0] * np.exp(0.7j)
    V = orthonormal(rng, 2, 2, complex_=True)
    S1 = 0.5 * np.outer(u, V[:, 0].conj())
    S2 = orthonormal(rng, 3, 2, complex_=True) @ np.diag([np.sqrt(0.75), 1.0]) @ V.conj().T
    with pytest.raises(DependentRealImag):
        place_pair_case4(S1, S2)


def test_group_m_equals_n():
    acc = SchurAccumulator(2)
    assign_complex_group(acc, np.zeros((2, 2)), np.zeros((2, 0)), 1 + 1j, 1)
    np.testing.assert_allclose(acc.T, [[1, 1], [-1, 1]], atol=1e-15)
    result = assign(SystemPair(np.zeros((2, 2)), np.eye(2)), spec_from_values([1 + 1j, 1 - 1j]))
    Ac = result.closed_loop
    assert departure_from_normality(Ac, result.spec) <= 1e-12
    np.testing.assert_allclose(Ac, result.X @ result.T @ result.X.T, atol=1e-15)
    assert np.allclose(Ac, [[1, 1], [-1, 1]]) or np.allclose(Ac, [[1, -1], [1, 1]])


def test_single_input_two_pairs_uses_new_block():
    rng = np.random.default_rng(14)
    A, B = random_system(rng, 4, 1)
    result = assign(SystemPair(A, B), spec_from_values([1j, -1j, 1j, -1j]))
    assert result.group_structures == [(1, 1)]
    assert result.groups[0].cases == ["initial", "v"]
    # defective pair: eigenvalues are only accurate to about sqrt(eps)
    assert precs(result.spec, result.closed_loop).max_error <= 1e-6
    assert geometric_multiplicity(result.closed_loop, 1j) == 1


def test_semisimple_pair_group():
    rng = np.random.default_rng(15)
    A, B = random_system(rng, 9, 4)
    lam = 0.3 + 1.1j
    vals = [lam, lam.conjugate()] * 2 + list(rng.standard_normal(5))
    result = assign(SystemPair(A, B), spec_from_values(vals))
    assert geometric_multiplicity(result.closed_loop, lam) == 2


def test_pair_group_after_prefix_couples_and_stays_orthonormal():
    rng = np.random.default_rng(16)
    A, B = random_system(rng, 10, 3)
    Q2 = complement(B)
    acc = SchurAccumulator(10)
    assign_complex_group(acc, A, Q2, -0.5 + 2j, 2)
    assign_complex_group(acc, A, Q2, 1 - 1j, 3)
    assert acc.size == 10
    assert acc.orthonormality_error() <= 1e-10 * 10
    assert acc.constraint_residual(A, Q2) <= 1e-9 * np.linalg.norm(A)
    for blk in acc.blocks:
        D = acc.T[blk.start:blk.start + 2, blk.start:blk.start + 2]
        assert np.trace(D) / 2 == pytest.approx(blk.pole.real, abs=1e-12)
        assert np.linalg.det(D) == pytest.approx(abs(blk.pole) ** 2, rel=1e-12)
