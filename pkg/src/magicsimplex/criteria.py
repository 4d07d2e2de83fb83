"""Entanglement verdicts: positivity, PPT and the MUB correlation witness."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg
from .mubs import Basis, MubSet, build_mubs, conjugate_basis
from .states import (
    FamilyParams,
    bell_projectors,
    family_coefficient_array,
    family_coefficients,
    simplex_state,
)

DISTRIBUTION_TOL = 1e-10
EXHAUSTIVE_LABELING_MAX_D = 5


def separable_bound(m: int, d: int) -> float:
    """Largest value of the m-basis witness reachable by separable states."""
    return 1.0 + (m - 1) / d


def _product_vectors(a: Basis, b: Basis) -> np.ndarray:
    # row i*d + j is |a_i> (x) |b_j>
    d = a.d
    return np.einsum("ia,jb->ijab", a.vectors, b.vectors).reshape(d * d, d * d)


def joint_distribution(rho, basis_a: Basis, basis_b: Basis) -> np.ndarray:
    """``P[i, j] = <a_i b_j| rho |a_i b_j>`` as a ``(d, d)`` real array."""
    rho = linalg.as_matrix(rho)
    d = basis_a.d
    if basis_b.d != d or rho.shape[0] != d * d:
        raise ValueError(
            f"state of dimension {rho.shape[0]} does not match bases of dimension "
            f"{basis_a.d} x {basis_b.d}"
        )
    V = _product_vectors(basis_a, basis_b)
    probs = np.einsum("xa,ab,xb->x", V.conj(), rho, V).real
    return probs.reshape(d, d)


def check_distribution(jd, tol: float = DISTRIBUTION_TOL) -> np.ndarray:
    jd = np.asarray(jd, dtype=float)
    if jd.ndim != 2 or jd.shape[0] != jd.shape[1]:
        raise ValueError(f"joint distribution must be square, got {jd.shape}")
    if jd.min() < -1e-12 or abs(jd.sum() - 1.0) > tol:
        raise ValueError("not a probability distribution")
    return jd


def mutual_predictability(jd, labeling=None) -> float:
    """Probability that Bob's outcome equals ``labeling[i]`` given Alice's ``i``."""
    jd = np.asarray(jd, dtype=float)
    d = jd.shape[0]
    perm = np.arange(d) if labeling is None else np.asarray(labeling, dtype=int)
    if sorted(perm.tolist()) != list(range(d)):
        raise ValueError(f"labeling {perm.tolist()} is not a permutation of 0..{d - 1}")
    return float(jd[np.arange(d), perm].sum())


@lru_cache(maxsize=None)
def _permutations(d: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(d))), dtype=int)


def optimal_labeling(jd) -> tuple[np.ndarray, float]:
    """Exact maximum of the mutual predictability over all relabelings."""
    jd = np.asarray(jd, dtype=float)
    rows, cols = linear_sum_assignment(jd, maximize=True)
    perm = np.empty(jd.shape[0], dtype=int)
    perm[rows] = cols
    return perm, float(jd[rows, cols].sum())


def best_predictabilities(jd: np.ndarray) -> np.ndarray:
    """Optimal predictability for every ``(d, d)`` slab of a ``(..., d, d)`` stack."""
    jd = np.asarray(jd, dtype=float)
    d = jd.shape[-1]
    flat = jd.reshape(-1, d, d)
    if d <= EXHAUSTIVE_LABELING_MAX_D:
        perms = _permutations(d)
        out = np.empty(flat.shape[0])
        step = max(1, 2_000_000 // (len(perms) * d))
        for s in range(0, flat.shape[0], step):
            block = flat[s:s + step]
            out[s:s + step] = block[:, np.arange(d), perms].sum(axis=-1).max(axis=-1)
    else:
        out = np.array([optimal_labeling(x)[1] for x in flat])
    return out.reshape(jd.shape[:-2])


@dataclass
class WitnessReport:
    m: int
    d: int
    predictabilities: list[float]
    labelings: list[list[int]]
    value: float
    bound: float
    detected: bool
    conjugate_bob: bool = True
    maximize_labels: bool = True

    @property
    def margin(self) -> float:
        return self.value - self.bound

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["margin"] = self.margin
        return out


def bob_bases(mubs: MubSet, conjugate_bob: bool = True) -> list[Basis]:
    return [conjugate_basis(b) if conjugate_bob else b for b in mubs.bases]


def mub_witness(rho, mubs: MubSet, conjugate_bob: bool = True,
                maximize_labels: bool = True) -> WitnessReport:
    """Sum of mutual predictabilities over the bases of ``mubs``.

    Bob measures the complex conjugate of Alice's basis unless
    ``conjugate_bob`` is off. Detection is strict: ``value > bound``.
    """
    rho = linalg.as_matrix(rho)
    if rho.shape[0] != mubs.d ** 2:
        raise ValueError(f"state of dimension {rho.shape[0]} needs MUBs of d^2, got d = {mubs.d}")
    preds, labs = [], []
    for a, b in zip(mubs.bases, bob_bases(mubs, conjugate_bob)):
        jd = joint_distribution(rho, a, b)
        if maximize_labels:
            perm, val = optimal_labeling(jd)
        else:
            perm = np.arange(mubs.d)
            val = mutual_predictability(jd, perm)
        preds.append(val)
        labs.append(perm.tolist())
    value = float(sum(preds))
    bound = separable_bound(len(mubs), mubs.d)
    return WitnessReport(len(mubs), mubs.d, preds, labs, value, bound, value > bound,
                         conjugate_bob, maximize_labels)


def witness_batch(rhos, mubs: MubSet, conjugate_bob: bool = True,
                  maximize_labels: bool = True) -> np.ndarray:
    """Witness values for a ``(N, d^2, d^2)`` stack of states."""
    rhos = np.asarray(rhos, dtype=complex)
    d = mubs.d
    if rhos.shape[-1] != d * d:
        raise ValueError("state dimension does not match the MUB set")
    V = np.stack([_product_vectors(a, b) for a, b in zip(mubs.bases, bob_bases(mubs, conjugate_bob))])
    jd = np.einsum("sxa,nab,sxb->nsx", V.conj(), rhos, V).real.reshape(len(rhos), len(mubs), d, d)
    if maximize_labels:
        preds = best_predictabilities(jd)
    else:
        preds = np.trace(jd, axis1=-2, axis2=-1)
    return preds.sum(axis=-1)


@dataclass
class PPTReport:
    min_eigenvalue: float
    is_ppt: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def ppt_check(rho, shape=None, cut=1, tol: float = linalg.PSD_TOL,
              method: str = "lapack") -> PPTReport:
    """Partial transpose over the factors in ``cut`` and test positivity."""
    rho = linalg.check_hermitian(rho, 1e-10)
    if shape is None:
        d = int(round(np.sqrt(rho.shape[0])))
        shape = (d, d)
    lam = linalg.min_eigenvalue(linalg.partial_transpose(rho, shape, cut), method)
    return PPTReport(lam, lam >= -tol)


@dataclass
class Classification:
    d: int
    positive: bool
    ppt: bool
    value: float
    bound: float
    detected: bool
    min_eigenvalue: float
    min_pt_eigenvalue: float
    min_coefficient: float | None = None
    params: dict | None = field(default=None)

    @property
    def bound_entangled(self) -> bool:
        return self.positive and self.ppt and self.detected

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["bound_entangled"] = self.bound_entangled
        return out


def classify(state, mubs: MubSet | None = None, tol: float = linalg.PSD_TOL,
             conjugate_bob: bool = True, maximize_labels: bool = True) -> Classification:
    """Positivity, PPT and witness verdicts for a bipartite state or a family point.

    For :class:`FamilyParams` input positivity is decided on the Bell
    coefficients; the spectral minimum is still reported.
    """
    min_coeff = params = None
    if isinstance(state, FamilyParams):
        coeffs = family_coefficients(state)
        rho = simplex_state(coeffs)
        min_coeff = coeffs.min_coefficient
        params = state.to_json()
    else:
        rho = linalg.check_hermitian(state, 1e-10)
    d = int(round(np.sqrt(rho.shape[0])))
    if d * d != rho.shape[0]:
        raise ValueError(f"dimension {rho.shape[0]} is not a square")
    mubs = mubs if mubs is not None else build_mubs(d)
    lam = linalg.min_eigenvalue(rho)
    positive = min_coeff >= -tol if min_coeff is not None else lam >= -tol
    ppt = ppt_check(rho, (d, d), 1, tol)
    w = mub_witness(rho, mubs, conjugate_bob, maximize_labels)
    return Classification(d, positive, ppt.is_ppt, w.value, w.bound, w.detected,
                          lam, ppt.min_eigenvalue, min_coeff, params)


class SimplexEvaluator:
    """Fast verdicts for Bell-diagonal states of one dimension and MUB set.

    Joint distributions and partial transposes are linear in the Bell
    weights, so both are precomputed per projector and contracted against
    batches of coefficient arrays.
    """

    def __init__(self, d: int, mubs: MubSet | None = None, conjugate_bob: bool = True,
                 maximize_labels: bool = True):
        self.d = d
        self.mubs = mubs if mubs is not None else build_mubs(d)
        if self.mubs.d != d:
            raise ValueError("MUB dimension does not match")
        self.conjugate_bob = conjugate_bob
        self.maximize_labels = maximize_labels
        P = bell_projectors(d)
        # J[s, k, l, i, j]: joint distribution of P_{k,l} in basis pair s
        J = np.empty((len(self.mubs), d, d, d, d))
        for s, (a, b) in enumerate(zip(self.mubs.bases, bob_bases(self.mubs, conjugate_bob))):
            V = _product_vectors(a, b)
            J[s] = np.einsum("xa,klab,xb->klx", V.conj(), P, V).real.reshape(d, d, d, d)
        self.joint = J
        self.pt_projectors = np.stack([
            linalg.partial_transpose(P[k, l], (d, d), 1) for k in range(d) for l in range(d)
        ]).reshape(d, d, d * d, d * d)
        # the partial transpose only couples |a b> and |a' b'> with a + b = a' + b' (mod d)
        a = np.arange(d)
        self._blocks = np.array([a * d + (sigma - a) % d for sigma in range(d)])
        self.pt_blocks = self.pt_projectors[:, :, self._blocks[:, :, None], self._blocks[:, None, :]]
        mask = np.ones((d * d, d * d), dtype=bool)
        for blk in self._blocks:
            mask[np.ix_(blk, blk)] = False
        if np.abs(self.pt_projectors[:, :, mask]).max(initial=0.0) > 1e-14:
            raise ArithmeticError("partial transpose is not block diagonal")

    @property
    def bound(self) -> float:
        return separable_bound(len(self.mubs), self.d)

    def distributions(self, c) -> np.ndarray:
        return np.einsum("...kl,sklij->...sij", np.asarray(c, dtype=float), self.joint)

    def witness(self, c) -> np.ndarray:
        jd = self.distributions(c)
        if self.maximize_labels:
            preds = best_predictabilities(jd)
        else:
            preds = np.trace(jd, axis1=-2, axis2=-1)
        return preds.sum(axis=-1)

    def pt_matrix(self, c) -> np.ndarray:
        return np.einsum("...kl,klab->...ab", np.asarray(c, dtype=float), self.pt_projectors)

    def min_pt_eigenvalue(self, c) -> np.ndarray:
        """Smallest eigenvalue of the partial transpose, block by block."""
        c = np.asarray(c, dtype=float)
        d = self.d
        flat = c.reshape(-1, d, d)
        out = np.empty(flat.shape[0])
        step = max(1, 2_000_000 // d**4)
        for s in range(0, flat.shape[0], step):
            blocks = np.einsum("nkl,klsij->nsij", flat[s:s + step], self.pt_blocks)
            out[s:s + step] = np.linalg.eigvalsh(blocks)[..., 0].min(axis=-1)
        return out.reshape(c.shape[:-2])

    def family_coefficients(self, q) -> np.ndarray:
        return family_coefficient_array(self.d, q)
