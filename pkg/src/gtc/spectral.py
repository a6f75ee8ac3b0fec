"""Chernoff information of an equal-entropy Gaussian pair from the
generalized eigenvalues of its covariance matrices.

For SPD (Sigma1, Sigma2) with equal determinants, the Chernoff
information is

    CI = 1/2 sum_i ln((1 - l*) sqrt(lam_i) + l* / sqrt(lam_i))

where {lam_i} are the eigenvalues of Sigma1 Sigma2^{-1} and l* is the
unique root in [0, 1] of

    sum_i 1 / (l + (1-l) lam_i) = sum_i lam_i / (l + (1-l) lam_i).

The eigensolve is always done on the symmetric reduced matrix
L^{-1} Sigma1 L^{-T} with Sigma2 = L L^T, never on the nonsymmetric
product Sigma1 Sigma2^{-1}: the spectra coincide and the symmetric
route guarantees real, stable output. l* is found by bisection on the
sign of the residual, which needs no monotonicity assumption.

Equal-entropy enforcement: the closed form above is only valid when
|Sigma1| = |Sigma2|; operations refuse (EntropyMismatchError) when the
log-determinants differ by more than 1e-9 rather than silently
misreport. The general unequal-determinant max-min definition lives in
the oracle module instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, eigh, solve_triangular

from ._solvers import bisect_root
from .errors import (
    DimensionMismatchError,
    EntropyMismatchError,
    NotSpdError,
    ParameterRangeError,
)
from .tree_model import SpdMatrix

ENTROPY_TOL = 1e-9

# spectra with every eigenvalue this close to 1 are treated as the
# identical-model degenerate case (l* := 0.5 by convention, CI = 0)
ALL_ONES_TOL = 1e-12


@dataclass(frozen=True)
class GenEigSpectrum:
    """Ascending generalized eigenvalues of an SPD pair, with the
    log-determinant difference ln|Sigma1| - ln|Sigma2| of the pair."""

    values: tuple[float, ...]
    log_det_ratio: float

    @property
    def n(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class ChernoffReport:
    """lambda*, CI in nats, the spectrum, and the equalized-trace residual
    |tr(Sigma1^-1 Sigma_l*) - tr(Sigma2^-1 Sigma_l*)|."""

    lambda_star: float
    ci: float
    spectrum: GenEigSpectrum
    trace_residual: float


def gen_eigs(s1: SpdMatrix, s2: SpdMatrix) -> GenEigSpectrum:
    """Eigenvalues of Sigma1 Sigma2^{-1} via the Cholesky-reduced
    symmetric problem; ascending order, multiples adjacent."""
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    L = cholesky(s2.entries, lower=True)
    half = solve_triangular(L, s1.entries, lower=True)
    reduced = solve_triangular(L, half.T, lower=True).T
    vals = eigh(0.5 * (reduced + reduced.T), eigvals_only=True)
    if vals[0] <= 0.0:
        raise NotSpdError(f"non-positive generalized eigenvalue {vals[0]!r}")
    return GenEigSpectrum(values=tuple(float(v) for v in vals),
                          log_det_ratio=s1.log_det - s2.log_det)


def kl(s1: SpdMatrix, s2: SpdMatrix) -> float:
    """D(N(0,Sigma1) || N(0,Sigma2)) in nats."""
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    c2 = cho_factor(s2.entries, lower=True)
    trace = float(np.trace(cho_solve(c2, s1.entries)))
    return 0.5 * (s2.log_det - s1.log_det) + 0.5 * trace - 0.5 * s1.dim


def sigma_lambda(s1: SpdMatrix, s2: SpdMatrix, lam: float) -> SpdMatrix:
    """The exponential-family member: inverse of
    lam * Sigma1^{-1} + (1-lam) * Sigma2^{-1}."""
    if not (0.0 <= lam <= 1.0):
        raise ParameterRangeError(f"lambda {lam} outside [0, 1]")
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    if lam == 1.0:
        return s1
    if lam == 0.0:
        return s2
    eye = np.eye(s1.dim)
    p1 = cho_solve(cho_factor(s1.entries, lower=True), eye)
    p2 = cho_solve(cho_factor(s2.entries, lower=True), eye)
    mix = lam * p1 + (1.0 - lam) * p2
    cf = cho_factor(0.5 * (mix + mix.T), lower=True)
    out = cho_solve(cf, eye)
    log_det = -2.0 * float(np.sum(np.log(np.diag(cf[0]))))
    return SpdMatrix.from_array(0.5 * (out + out.T), log_det=log_det)


def _residual(vals: np.ndarray):
    """LHS - RHS of the defining equation, as a function of lambda."""
    def g(lam: float) -> float:
        s = lam + (1.0 - lam) * vals
        return float(np.sum((1.0 - vals) / s))
    return g


def lambda_star(spec: GenEigSpectrum) -> float:
    """The unique root in [0, 1] equalizing the two trace sums.

    Under equal determinants the residual is >= 0 at lam=0 and <= 0 at
    lam=1 (AM-GM), so a sign-change bracket always exists; bisection to
    residual 1e-12. The all-ones spectrum solves the equation for every
    lambda and returns 0.5 by convention.
    """
    if abs(spec.log_det_ratio) > ENTROPY_TOL:
        raise EntropyMismatchError(
            f"log-determinants differ by {spec.log_det_ratio!r} (> {ENTROPY_TOL})")
    vals = spec.as_array()
    if np.max(np.abs(vals - 1.0)) <= ALL_ONES_TOL:
        return 0.5
    return bisect_root(_residual(vals), 0.0, 1.0)


def chernoff(s1: SpdMatrix, s2: SpdMatrix) -> ChernoffReport:
    """Chernoff information of an equal-entropy pair, with diagnostics."""
    spec = gen_eigs(s1, s2)
    ls = lambda_star(spec)
    vals = spec.as_array()
    rt = np.sqrt(vals)
    ci = 0.5 * float(np.sum(np.log((1.0 - ls) * rt + ls / rt)))
    slam = sigma_lambda(s1, s2, ls)
    t1 = float(np.trace(cho_solve(cho_factor(s1.entries, lower=True), slam.entries)))
    t2 = float(np.trace(cho_solve(cho_factor(s2.entries, lower=True), slam.entries)))
    return ChernoffReport(lambda_star=ls, ci=ci, spectrum=spec,
                          trace_residual=abs(t1 - t2))


def reciprocal_pairing(spec: GenEigSpectrum, tol: float = 1e-8) -> bool:
    """True iff the eigenvalue multiset equals its reciprocals within
    relative tol: sorted ascending, lam_i * lam_{n-1-i} must be 1."""
    vals = spec.as_array()
    prods = vals * vals[::-1]
    return bool(np.max(np.abs(prods - 1.0)) <= tol)
