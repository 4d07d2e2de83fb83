"""Weyl operators, Bell projectors and states of the magic simplex.

Bipartite states live on C^d (x) C^d with Alice first. The ``n``-pair states
live on ``(A1 B1)(A2 B2)...`` in that factor order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import kron

NORMALIZATION_TOL = 1e-12
MAX_MULTIPARTITE_DIM = 100


def weyl(d: int, k: int, l: int) -> np.ndarray:
    """``W_{k,l}|s> = w^(k(s-l)) |s-l>`` with ``w = exp(2 pi i / d)``."""
    w = np.exp(2j * np.pi / d)
    out = np.zeros((d, d), dtype=complex)
    for s in range(d):
        t = (s - l) % d
        out[t, s] = w ** ((k * t) % d)
    return out


def bell_state(d: int) -> np.ndarray:
    """Normalized maximally entangled vector ``sum_i |ii> / sqrt(d)``."""
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1.0
    return v / np.sqrt(d)


def bell_vector(d: int, k: int, l: int) -> np.ndarray:
    return kron(np.eye(d), weyl(d, k, l)) @ bell_state(d)


def bell_projector(d: int, k: int, l: int) -> np.ndarray:
    v = bell_vector(d, k, l)
    return np.outer(v, v.conj())


@lru_cache(maxsize=None)
def _bell_projectors(d: int) -> np.ndarray:
    out = np.empty((d, d, d * d, d * d), dtype=complex)
    for k in range(d):
        for l in range(d):
            out[k, l] = bell_projector(d, k, l)
    out.flags.writeable = False
    return out


def bell_projectors(d: int) -> np.ndarray:
    """All projectors as a read-only ``(d, d, d^2, d^2)`` array indexed ``[k, l]``."""
    return _bell_projectors(d)


@dataclass(frozen=True)
class SimplexCoefficients:
    """Weights ``c[k, l]`` of the Bell projectors ``P_{k,l}``."""

    d: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape != (self.d, self.d):
            raise ValueError(f"coefficients must have shape ({self.d}, {self.d}), got {c.shape}")
        if abs(c.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"coefficients sum to {c.sum():.15g}, not 1")
        object.__setattr__(self, "c", c)

    @property
    def min_coefficient(self) -> float:
        return float(self.c.min())

    def is_state(self, tol: float = 0.0) -> bool:
        """Membership in the simplex: every weight nonnegative."""
        return self.min_coefficient >= -tol


def simplex_state(coeffs: SimplexCoefficients | np.ndarray) -> np.ndarray:
    if not isinstance(coeffs, SimplexCoefficients):
        c = np.asarray(coeffs, dtype=float)
        coeffs = SimplexCoefficients(c.shape[0], c)
    return np.tensordot(coeffs.c, bell_projectors(coeffs.d), axes=([0, 1], [0, 1]))


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the one-pair family rho[d] (and its n-pair lift).

    ``q`` weights the shift classes ``2 .. d-2``, which are empty for
    ``d <= 3``; there it has no effect.
    """

    d: int
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be at least 2")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.q1, self.q2, self.q3, self.q)

    def to_json(self) -> dict:
        return {"d": self.d, "q1": self.q1, "q2": self.q2, "q3": self.q3, "q": self.q}


def q_block_columns(d: int) -> range:
    return range(2, d - 1)


def family_basis(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``(q1, q2, q3, q) -> c``: returns ``(c0, A)`` with
    ``c = c0 + A @ q`` and ``A`` of shape ``(d, d, 4)``."""
    n_q = len(q_block_columns(d))
    # the identity term spreads uniformly over all d^2 projectors
    alpha = np.array([-1.0 / (d * d - (d + 1)), -1.0 / (d + 1), -1.0, -float(n_q)])
    A = np.tile(alpha / d**2, (d, d, 1))
    A[0, 0, 0] += 1.0 / (d * d - (d + 1))
    A[1:, 0, 1] += 1.0 / ((d + 1) * (d - 1))
    A[:, 1 % d, 2] += 1.0 / d
    for z in q_block_columns(d):
        A[:, z, 3] += 1.0 / d
    c0 = np.full((d, d), 1.0 / d**2)
    return c0, A


def family_coefficient_array(d: int, q) -> np.ndarray:
    """Vectorized coefficients for parameter rows ``q[..., 4]``; shape ``(..., d, d)``."""
    c0, A = family_basis(d)
    return c0 + np.einsum("klj,...j->...kl", A, np.asarray(q, dtype=float))


def family_coefficients(params: FamilyParams) -> SimplexCoefficients:
    c = family_coefficient_array(params.d, params.as_tuple())
    # absorb float drift so the normalization check is exact to rounding
    c[-1, -1] += 1.0 - c.sum()
    return SimplexCoefficients(params.d, c)


def family_rho(params: FamilyParams) -> np.ndarray:
    return simplex_state(family_coefficients(params))


def _guard(d: int, n: int) -> None:
    if n < 2:
        raise ValueError("the n-pair simplex is defined for n >= 2 pairs")
    if d ** (2 * n) > MAX_MULTIPARTITE_DIM:
        raise ValueError(
            f"d^(2n) = {d ** (2 * n)} exceeds the dense size guard of {MAX_MULTIPARTITE_DIM}"
        )


@lru_cache(maxsize=None)
def _multipartite_vertices(d: int, n: int, site: int) -> np.ndarray:
    P = bell_projectors(d)
    p00 = sum(kron(*([P[k, l]] * n)) for k in range(d) for l in range(d)) / d**2
    out = np.empty((d, d) + p00.shape, dtype=complex)
    for k in range(d):
        for l in range(d):
            factors = [np.eye(d)] * (2 * n)
            factors[site] = weyl(d, k, l)
            U = kron(*factors)
            out[k, l] = U @ p00 @ U.conj().T
    out.flags.writeable = False
    return out


def multipartite_vertex(d: int, n: int, k: int, l: int, site: int = 1) -> np.ndarray:
    """Vertex state of the n-pair simplex.

    ``site`` is the tensor factor (0-based over ``A1 B1 A2 B2 ...``) that
    carries the Weyl operator; the default is Bob's half of the first pair.
    """
    _guard(d, n)
    if not 0 <= site < 2 * n:
        raise ValueError(f"site {site} out of range for {2 * n} factors")
    return _multipartite_vertices(d, n, site)[k % d, l % d].copy()


def multipartite_state(coeffs: SimplexCoefficients, n: int, site: int = 1) -> np.ndarray:
    _guard(coeffs.d, n)
    V = _multipartite_vertices(coeffs.d, n, site)
    return np.tensordot(coeffs.c, V, axes=([0, 1], [0, 1]))


def multipartite_family(params: FamilyParams, n: int = 2, site: int = 1) -> np.ndarray:
    return multipartite_state(family_coefficients(params), n, site)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in C^d."""
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def random_separable_state(d: int, rng: np.random.Generator, terms: int = 1,
                           vectors=None) -> np.ndarray:
    """Convex mixture of ``terms`` random product states on C^d (x) C^d.

    ``vectors``, when given, is a pool of unit vectors in C^d that local
    factors are drawn from (plus a small random tilt) instead of Haar.
    """
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d * d, d * d), dtype=complex)
    for w in weights:
        if vectors is None:
            a, b = random_pure_state(d, rng), random_pure_state(d, rng)
        else:
            a, b = (vectors[rng.integers(len(vectors))] for _ in range(2))
            tilt = 0.05 * rng.random()
            a = a + tilt * random_pure_state(d, rng)
            b = b + tilt * random_pure_state(d, rng)
            a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        v = np.kron(a, b)
        rho += w * np.outer(v, v.conj())
    return rho
