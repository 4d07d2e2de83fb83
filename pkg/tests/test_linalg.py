import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magicsimplex.linalg import (
    EigenSolverError,
    hermitian_eigenvalues,
    is_psd,
    jacobi_eigh,
    kron,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
)
from magicsimplex.states import bell_projector

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def random_hermitian(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def random_density(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def pt_by_loops(rho, da, db):
    # index-by-index transpose of the second factor
    out = np.zeros_like(rho)
    for i, j, k, l in itertools.product(range(da), range(db), range(da), range(db)):
        out[i * db + l, k * db + j] = rho[i * db + j, k * db + l]
    return out


def ptrace_by_loops(rho, da, db):
    out = np.zeros((da, da), dtype=complex)
    for i, k, j in itertools.product(range(da), range(da), range(db)):
        out[i, k] += rho[i * db + j, k * db + j]
    return out


def test_kron_identity_and_entry():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    assert kron(Z, X)[0, 1] == 1
    rng = np.random.default_rng(0)
    assert kron(rng.normal(size=(3, 3)), rng.normal(size=(4, 4))).shape == (12, 12)


def test_kron_first_factor_slowest():
    a = np.diag([1.0, 2.0])
    b = np.diag([1.0, 10.0, 100.0])
    assert np.allclose(np.diag(kron(a, b)), [1, 10, 100, 2, 20, 200])


def test_partial_transpose_identity_invariant():
    rho = np.eye(4) / 4
    assert np.array_equal(partial_transpose(rho, (2, 2), 1), rho)


def test_partial_transpose_bell_spectrum():
    pt = partial_transpose(bell_projector(2, 0, 0), (2, 2), 1)
    assert np.allclose(np.linalg.eigvalsh(pt), [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_partial_transpose_matches_loops(da, db):
    rho = random_density(da * db, np.random.default_rng(da * 10 + db))
    assert np.allclose(partial_transpose(rho, (da, db), 1), pt_by_loops(rho, da, db), atol=0)


def test_partial_transpose_product_state():
    rng = np.random.default_rng(3)
    a, b = random_density(2, rng), random_density(3, rng)
    assert np.allclose(partial_transpose(np.kron(a, b), (2, 3), 1), np.kron(a, b.T))


def test_partial_transpose_shape_mismatch():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(6), (2, 2), 1)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), (2, 2), 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)]))
def test_partial_transpose_properties(seed, shape):
    rng = np.random.default_rng(seed)
    n = int(np.prod(shape))
    rho = random_density(n, rng)
    sub = int(rng.integers(len(shape)))
    pt = partial_transpose(rho, shape, sub)
    assert np.array_equal(partial_transpose(pt, shape, sub), rho)
    assert abs(np.trace(pt) - np.trace(rho)) < 1e-12
    assert np.abs(pt - pt.conj().T).max() < 1e-12


def test_partial_trace_bell_is_maximally_mixed():
    red = partial_trace(bell_projector(3, 0, 0), (3, 3), [0])
    assert np.allclose(red, np.eye(3) / 3, atol=1e-15)


def test_partial_trace_product_and_loops():
    rng = np.random.default_rng(5)
    a, b = random_density(3, rng), rng.normal(size=(2, 2))
    assert np.allclose(partial_trace(np.kron(a, b), (3, 2), [0]), a * np.trace(b))
    rho = random_density(6, rng)
    assert np.allclose(partial_trace(rho, (3, 2), [0]), ptrace_by_loops(rho, 3, 2))
    assert abs(np.trace(partial_trace(rho, (3, 2), [1])) - 1) < 1e-12


def test_partial_trace_rejects():
    with pytest.raises(ValueError):
        partial_trace(np.eye(6), (2, 2), [0])
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), [])


def test_eigenvalue_examples():
    assert np.allclose(hermitian_eigenvalues(np.eye(5), "jacobi"), np.ones(5))
    assert np.allclose(hermitian_eigenvalues(np.diag([3.0, -1.0, 2.0]), "jacobi"), [-1, 2, 3])
    pt = partial_transpose(bell_projector(3, 0, 0), (3, 3), 1)
    assert np.allclose(hermitian_eigenvalues(pt, "jacobi"), [-1 / 3] * 3 + [1 / 3] * 6, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 25])
def test_jacobi_reconstruction(n):
    m = random_hermitian(n, np.random.default_rng(n))
    w, v = jacobi_eigh(m)
    assert np.all(np.diff(w) >= 0)
    assert np.abs(m - v @ np.diag(w) @ v.conj().T).max() <= 1e-10
    assert np.abs(v.conj().T @ v - np.eye(n)).max() <= 1e-10
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-10)


def test_jacobi_degenerate_spectrum():
    rng = np.random.default_rng(11)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    m = q @ np.diag([1, 1, 1, -2, -2, 5]) @ q.conj().T
    assert np.allclose(jacobi_eigh(m)[0], [-2, -2, 1, 1, 1, 5], atol=1e-12)


def test_jacobi_rejects_non_hermitian_and_nonconvergence():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))
    with pytest.raises(EigenSolverError):
        jacobi_eigh(random_hermitian(5, np.random.default_rng(0)), max_sweeps=1)


def test_psd():
    assert is_psd(np.eye(4) / 4)
    assert is_psd(np.zeros((3, 3)))
    assert not is_psd(partial_transpose(bell_projector(2, 0, 0), (2, 2), 1))
    assert min_eigenvalue(np.diag([0.5, -1e-11]), "jacobi") == pytest.approx(-1e-11)
    assert is_psd(np.diag([0.5, -1e-11]), tol=1e-10)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        kron(np.array([[np.nan]]), np.eye(2))
