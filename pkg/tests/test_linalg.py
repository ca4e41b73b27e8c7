import numpy as np
import pytest

from fisusc.linalg import (HermiticityError, eig_hermitian, hermitize,
                           min_eigenvalue, psd_check, tensor, trace_norm)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1j], [1j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def random_hermitian(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2.0


def test_eig_identity():
    w, V = eig_hermitian(np.eye(2))
    np.testing.assert_allclose(w, [1.0, 1.0])
    np.testing.assert_allclose(V @ V.conj().T, np.eye(2), atol=1e-14)


def test_eig_pauli_x():
    w, _ = eig_hermitian(SX)
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-14)


def test_eig_descending_and_reconstruction():
    rng = np.random.default_rng(7)
    H = random_hermitian(rng, 6)
    w, V = eig_hermitian(H)
    assert np.all(np.diff(w) <= 1e-14)
    np.testing.assert_allclose(V @ np.diag(w) @ V.conj().T, H, atol=1e-12)


def test_eig_reconstruction_property():
    # 100 random Hermitian matrices, dims 2..16
    rng = np.random.default_rng(123)
    for _ in range(100):
        dim = int(rng.integers(2, 17))
        H = random_hermitian(rng, dim)
        w, V = eig_hermitian(H)
        assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - H)) <= 1e-10 * dim
        assert np.max(np.abs(V.conj().T @ V - np.eye(dim))) <= 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(HermiticityError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_trace_norm_zero_and_pauli_z():
    assert trace_norm(np.zeros((3, 3))) == 0.0
    assert trace_norm(SZ) == pytest.approx(2.0, abs=1e-14)


def test_trace_norm_vs_singular_value_oracle():
    # for Hermitian H the trace norm equals the sum of singular values
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_hermitian(rng, 5)
        b = random_hermitian(rng, 5)
        A = a @ a.conj().T
        B = b @ b.conj().T
        H = A - B
        oracle = float(np.sum(np.linalg.svd(H, compute_uv=False)))
        assert trace_norm(H) == pytest.approx(oracle, abs=1e-10)


def test_trace_norm_dominates_trace():
    rng = np.random.default_rng(11)
    for _ in range(20):
        H = random_hermitian(rng, int(rng.integers(2, 8)))
        assert trace_norm(H) >= abs(np.real(np.trace(H))) - 1e-12


def test_tensor_identity_and_trace():
    np.testing.assert_allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))
    rng = np.random.default_rng(2)
    rho = random_hermitian(rng, 3)
    rho = rho @ rho.conj().T
    rho /= np.trace(rho)
    prod = tensor(rho, rho)
    assert np.trace(prod) == pytest.approx(1.0, abs=1e-12)


def test_tensor_pauli_spectrum():
    w, _ = eig_hermitian(tensor(SX, SZ))
    np.testing.assert_allclose(w, [1.0, 1.0, -1.0, -1.0], atol=1e-14)


def test_tensor_associativity():
    rng = np.random.default_rng(3)
    A, B, C = (random_hermitian(rng, d) for d in (2, 3, 2))
    lhs = tensor(tensor(A, B), C)
    rhs = tensor(A, tensor(B, C))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_psd_check():
    assert psd_check(np.eye(3), 1e-12)
    assert not psd_check(-np.eye(3), 1e-12)
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    proj = np.outer(plus, plus)
    # eigenvalues {1, 0}
    assert psd_check(proj, 1e-12)
    assert min_eigenvalue(proj) == pytest.approx(0.0, abs=1e-14)


def test_hermitize_symmetrizes_drift():
    H = SX + 1e-14 * np.array([[0.0, 1.0], [0.0, 0.0]])
    out = hermitize(H)
    assert np.max(np.abs(out - out.conj().T)) == 0.0
    assert not out.flags.writeable


def test_hermitize_rejects_asymmetry():
    with pytest.raises(HermiticityError):
        hermitize(SX + 1e-6 * np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        hermitize(np.zeros((2, 3)))
