"""Dense complex linear algebra on tensor-product spaces.

Kronecker ordering is fixed throughout the package: the first factor varies
slowest, so basis index ``(i0, i1, ..., in)`` maps to
``i0 * (d1 * ... * dn) + ... + in``.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13


class EigenSolverError(RuntimeError):
    """Raised when the Jacobi iteration fails to converge."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more square matrices (first factor slowest)."""
    return reduce(np.kron, (as_matrix(m) for m in mats))


def _check_shape(rho: np.ndarray, shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise ValueError(f"invalid tensor shape {shape}")
    if int(np.prod(shape)) != rho.shape[0]:
        raise ValueError(
            f"tensor shape {shape} has product {int(np.prod(shape))}, "
            f"matrix dimension is {rho.shape[0]}"
        )
    return shape


def _as_index_set(subsystems, n: int) -> list[int]:
    if isinstance(subsystems, (int, np.integer)):
        subsystems = [subsystems]
    idx = sorted(set(int(s) for s in subsystems))
    for s in idx:
        if not 0 <= s < n:
            raise ValueError(f"subsystem {s} out of range for {n} factors")
    return idx


def partial_transpose(rho, shape: Sequence[int], subsystem) -> np.ndarray:
    """Transpose the indices of the chosen factor(s) only.

    ``subsystem`` may be a single index or an iterable of indices.
    """
    rho = as_matrix(rho)
    shape = _check_shape(rho, shape)
    n = len(shape)
    sub = _as_index_set(subsystem, n)
    t = rho.reshape(shape + shape)
    axes = list(range(2 * n))
    for s in sub:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(rho, shape: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``."""
    rho = as_matrix(rho)
    shape = _check_shape(rho, shape)
    n = len(shape)
    keep = _as_index_set(keep, n)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValueError("too many tensor factors")
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else row[i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    dk = int(np.prod([shape[i] for i in keep]))
    res = np.einsum("".join(row) + "".join(col) + "->" + out, rho.reshape(shape + shape))
    return res.reshape(dk, dk)


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(m)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max |m - m^H| = {dev:.3e})")
    return m


def jacobi_eigh(m, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic complex Jacobi eigensolver for Hermitian matrices.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns. Iteration stops once the Frobenius norm of the
    off-diagonal part drops below ``tol`` (relative to the matrix norm when
    that norm exceeds one).
    """
    a = check_hermitian(m).copy()
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                # rotate in the (p, q) plane to annihilate a[p, q]
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * vp + c * np.conj(phase) * vq
    else:
        raise EigenSolverError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(m, method: str = "lapack") -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    ``method="jacobi"`` runs the in-house cyclic Jacobi solver,
    ``method="lapack"`` defers to :func:`numpy.linalg.eigvalsh`.
    """
    m = check_hermitian(m)
    if method == "jacobi":
        return jacobi_eigh(m)[0]
    if method == "lapack":
        return np.linalg.eigvalsh(m)
    raise ValueError(f"unknown eigensolver {method!r}")


def min_eigenvalue(m, method: str = "lapack") -> float:
    m = check_hermitian(m)
    if m.shape[0] == 0:
        return 0.0
    return float(hermitian_eigenvalues(m, method)[0])


def is_psd(m, tol: float = PSD_TOL, method: str = "lapack") -> bool:
    return min_eigenvalue(m, method) >= -tol


def batched_min_eigenvalues(stack: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Smallest eigenvalue of every Hermitian matrix in a ``(N, n, n)`` stack."""
    stack = np.asarray(stack)
    out = np.empty(stack.shape[0])
    for start in range(0, stack.shape[0], chunk):
        out[start:start + chunk] = np.linalg.eigvalsh(stack[start:start + chunk])[:, 0]
    return out
