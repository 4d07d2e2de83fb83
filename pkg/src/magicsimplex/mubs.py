"""Mutually unbiased bases: construction, verification and JSON exchange.

A basis is stored as a ``(d, d)`` complex array whose *rows* are the basis
vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .galois import SUPPORTED_ORDERS, FieldSpec

MUB_TOL = 1e-10


@dataclass(frozen=True)
class Basis:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"a basis of C^d needs d vectors of length d, got shape {v.shape}")
        object.__setattr__(self, "vectors", v)

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    def orthonormality_deviation(self) -> float:
        g = self.vectors.conj() @ self.vectors.T
        return float(np.max(np.abs(g - np.eye(self.d))))

    def __eq__(self, other):
        return isinstance(other, Basis) and np.array_equal(self.vectors, other.vectors)

    __hash__ = None


@dataclass(frozen=True)
class MubSet:
    d: int
    bases: tuple[Basis, ...] = field(default_factory=tuple)

    def __post_init__(self):
        bases = tuple(b if isinstance(b, Basis) else Basis(b) for b in self.bases)
        for b in bases:
            if b.d != self.d:
                raise ValueError(f"basis of dimension {b.d} in a MUB set for d = {self.d}")
        if len(bases) > self.d + 1:
            raise ValueError(f"at most d + 1 = {self.d + 1} MUBs exist in dimension {self.d}")
        object.__setattr__(self, "bases", bases)

    def __len__(self):
        return len(self.bases)

    def subset(self, m: int) -> "MubSet":
        if not 1 <= m <= len(self.bases):
            raise ValueError(f"requested {m} bases, only {len(self.bases)} available")
        return MubSet(self.d, self.bases[:m])

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "bases": [
                [[[float(z.real), float(z.imag)] for z in vec] for vec in b.vectors]
                for b in self.bases
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MubSet":
        d = int(data["d"])
        bases = []
        for b in data["bases"]:
            arr = np.asarray(b, dtype=float)
            if arr.shape != (d, d, 2):
                raise ValueError(f"basis has shape {arr.shape}, expected ({d}, {d}, 2)")
            bases.append(Basis(arr[..., 0] + 1j * arr[..., 1]))
        return cls(d, tuple(bases))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "MubSet":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MubReport:
    count: int
    max_orthonormality_deviation: float
    max_unbiasedness_deviation: float
    passed: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def verify_mub(mubs: MubSet, tol: float = MUB_TOL) -> MubReport:
    """Check orthonormality of every basis and unbiasedness of every pair."""
    d = mubs.d
    for b in mubs.bases:
        if b.d != d:
            raise ValueError("bases of mixed dimension")
    ortho = max((b.orthonormality_deviation() for b in mubs.bases), default=0.0)
    unbiased = 0.0
    for i, a in enumerate(mubs.bases):
        for b in mubs.bases[i + 1:]:
            overlaps = np.abs(a.vectors.conj() @ b.vectors.T) ** 2
            unbiased = max(unbiased, float(np.max(np.abs(overlaps - 1.0 / d))))
    return MubReport(len(mubs), ortho, unbiased, ortho <= tol and unbiased <= tol)


def conjugate_basis(b: Basis) -> Basis:
    return Basis(b.vectors.conj())


def computational_basis(d: int) -> Basis:
    return Basis(np.eye(d, dtype=complex))


def fourier_basis(d: int) -> Basis:
    w = np.exp(2j * np.pi / d)
    k = np.arange(d)
    return Basis(w ** np.outer(k, k) / np.sqrt(d))


def _odd_prime_power_mubs(F: FieldSpec) -> list[Basis]:
    d, p = F.order, F.p
    elems = F.elements
    omega = np.exp(2j * np.pi / p)
    bases = [computational_basis(d)]
    for a in elems:
        vecs = np.empty((d, d), dtype=complex)
        for bi, b in enumerate(elems):
            for si, s in enumerate(elems):
                vecs[bi, si] = omega ** (a * s * s + b * s).trace().value()
        bases.append(Basis(vecs / np.sqrt(d)))
    return bases


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _qubit_pauli(u, v) -> np.ndarray:
    """Hermitian Pauli ``i^(u.v) X(u) Z(v)`` on ``len(u)`` qubits."""
    op = np.eye(1, dtype=complex)
    for ui, vi in zip(u, v):
        op = np.kron(op, np.linalg.matrix_power(_X, ui) @ np.linalg.matrix_power(_Z, vi))
    return 1j ** (int(np.dot(u, v)) % 4) * op


def _joint_eigenbasis(generators: list[np.ndarray]) -> Basis:
    """Joint eigenvectors of commuting Hermitian involutions generating a
    maximal stabilizer group, ordered by the sign pattern of the eigenvalues
    (all +1 first, generator 0 is the least significant bit)."""
    n = len(generators)
    d = generators[0].shape[0]
    ident = np.eye(d, dtype=complex)
    vecs = []
    for idx in range(2 ** n):
        proj = ident
        for j, g in enumerate(generators):
            sign = -1 if (idx >> j) & 1 else 1
            proj = proj @ (ident + sign * g) / 2
        col = int(np.argmax(np.real(np.diag(proj))))
        v = proj[:, col] / np.sqrt(np.real(proj[col, col]))
        vecs.append(_fix_phase(v))
    return Basis(np.array(vecs))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-9))
    return v * (abs(v[k]) / v[k])


def _even_prime_power_mubs(F: FieldSpec) -> list[Basis]:
    """Joint eigenbases of the d + 1 commuting classes of qubit Paulis.

    Pauli labels (a, b) in GF(2^m)^2 map to X(coords(a)) Z(tr(b x^j)_j); the
    lines {(0, b)} and {(a, lambda a)} through the origin are isotropic under
    the symplectic form and partition the nonidentity operators.
    """
    m = F.m
    powers = [F.element([1 if i == j else 0 for i in range(m)]) for j in range(m)]

    def z_coords(b):
        return [(b * e).trace().value() for e in powers]

    bases = [computational_basis(F.order)]
    for lam in F.elements:
        gens = [_qubit_pauli(list(a.coeffs), z_coords(lam * a)) for a in powers]
        bases.append(_joint_eigenbasis(gens))
    return bases


def build_complete_mub(d: int) -> MubSet:
    """d + 1 mutually unbiased bases in C^d, computational basis first."""
    if d not in SUPPORTED_ORDERS:
        raise ValueError(
            f"complete MUB sets are built for d in {set(SUPPORTED_ORDERS)}, got d = {d}"
        )
    F = FieldSpec.of_order(d)
    bases = _even_prime_power_mubs(F) if F.p == 2 else _odd_prime_power_mubs(F)
    return MubSet(d, tuple(bases))


def shift_clock_eigenbasis(d: int) -> Basis:
    """Eigenbasis of X Z with X|s> = |s+1>, Z|s> = w^s |s>.

    The eigenvector with eigenvalue ``lam`` has components
    ``lam^-s w^(s(s-1)/2) / sqrt(d)``; ``lam^d = (-1)^(d-1)``.
    """
    s = np.arange(d)
    vecs = []
    for r in range(d):
        theta = (2 * np.pi * r + (np.pi if d % 2 == 0 else 0.0)) / d
        vecs.append(np.exp(-1j * theta * s + 1j * np.pi * s * (s - 1) / d) / np.sqrt(d))
    return Basis(np.array(vecs))


def build_partial_mub_6() -> MubSet:
    """Computational, Fourier and shift-clock eigenbases in C^6."""
    mubs = MubSet(6, (computational_basis(6), fourier_basis(6), shift_clock_eigenbasis(6)))
    report = verify_mub(mubs)
    if not report.passed:
        raise ArithmeticError(f"d = 6 triple failed verification: {report}")
    return mubs


def build_mubs(d: int) -> MubSet:
    """Largest MUB set this package knows for ``d``."""
    return build_partial_mub_6() if d == 6 else build_complete_mub(d)
