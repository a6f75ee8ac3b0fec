"""Involutory congruence certificates for lambda* = 1/2.

If Sigma2 = Q Sigma1 Q^T for an involutory Q (Q^2 = I), the pencil's
eigenvalues come in reciprocal pairs and lambda* = 1/2. Every
congruence Q (involutory or not) factors as Q = L2 F L1^{-1} with
Cholesky factors Sigma_k = L_k L_k^T and F orthogonal, which gives a
constructive parameterization of the whole congruence set.

The sufficient condition is cheap to certify (verify_witness) but the
search side is open in general; only the permutation subfamily (the
node-exchange operations the theory explicitly discusses) is searched,
exhaustively and in deterministic lexicographic order, up to a size
limit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .errors import (
    DimensionMismatchError,
    NotOrthogonalError,
    SizeLimitExceededError,
)
from .tree_model import SpdMatrix

WITNESS_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-10


@dataclass(frozen=True)
class CongruenceWitness:
    """A candidate Q with its two residuals: max|Q^2 - I| and
    max|Sigma2 - Q Sigma1 Q^T|. Accepted when both are <= 1e-8."""

    q: np.ndarray = field(repr=False)
    involutory_residual: float
    congruence_residual: float

    @property
    def accepted(self) -> bool:
        return (self.involutory_residual <= WITNESS_TOL
                and self.congruence_residual <= WITNESS_TOL)


def verify_witness(q: np.ndarray, s1: SpdMatrix, s2: SpdMatrix) -> CongruenceWitness:
    """Measure both residuals of Q against the pair; the caller checks
    `.accepted` (a rejected witness still reports its residuals)."""
    q = np.asarray(q, dtype=float)
    n = s1.dim
    if s2.dim != n or q.shape != (n, n):
        raise DimensionMismatchError(
            f"shapes {q.shape}, {s1.dim}, {s2.dim} are inconsistent")
    inv_res = float(np.max(np.abs(q @ q - np.eye(n))))
    cong_res = float(np.max(np.abs(s2.entries - q @ s1.entries @ q.T)))
    return CongruenceWitness(q=q, involutory_residual=inv_res,
                             congruence_residual=cong_res)


def construct_congruence(s1: SpdMatrix, s2: SpdMatrix, f: np.ndarray) -> np.ndarray:
    """Q = L2 F L1^{-1} for orthogonal F; always satisfies
    Sigma2 = Q Sigma1 Q^T (involution is not guaranteed)."""
    f = np.asarray(f, dtype=float)
    n = s1.dim
    if s2.dim != n or f.shape != (n, n):
        raise DimensionMismatchError(
            f"shapes {f.shape}, {s1.dim}, {s2.dim} are inconsistent")
    if np.max(np.abs(f @ f.T - np.eye(n))) > ORTHOGONALITY_TOL:
        raise NotOrthogonalError("F is not orthogonal within 1e-10")
    l1 = cholesky(s1.entries, lower=True)
    l2 = cholesky(s2.entries, lower=True)
    # Q = L2 F L1^{-1}  via  (L1^{-T} (L2 F)^T)^T
    return solve_triangular(l1, (l2 @ f).T, lower=True, trans="T").T


def find_involutory_permutation(
    s1: SpdMatrix, s2: SpdMatrix, n_limit: int = 8
) -> CongruenceWitness | None:
    """Exhaustive scan of involutory permutations (products of disjoint
    transpositions, identity included) for one satisfying
    Sigma2 = P Sigma1 P^T; first match in lexicographic order, or None."""
    n = s1.dim
    if s2.dim != n:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    if n > n_limit:
        raise SizeLimitExceededError(
            f"dim {n} exceeds the permutation search limit {n_limit}")
    for perm in itertools.permutations(range(n)):
        if any(perm[perm[i]] != i for i in range(n)):
            continue
        idx = list(perm)
        if np.max(np.abs(s2.entries - s1.entries[np.ix_(idx, idx)])) <= WITNESS_TOL:
            p = np.zeros((n, n))
            p[np.arange(n), idx] = 1.0
            return verify_witness(p, s1, s2)
    return None


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """QR of a Gaussian matrix with the R diagonal's signs fixed, so the
    output is a deterministic function of the rng state."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
