"""Optimal linear dimension reduction for binary Gaussian testing.

A whitening transform P sends the pair to (diag(lam_i), I), so each
retained coordinate is an independent scalar test with variance ratio
lam_i. The optimal N_O x N projection keeps the k most informative
large eigenvalues and the N_O - k most informative small ones; only
the candidates k in [max(N_O + m - N, 0), min(m, N_O)] (m = number of
eigenvalues above 1) can be optimal, so the search space is tiny.

Reduced pairs generally lose the equal-determinant property, so the
reduced Chernoff information uses the max-min definition. On the
diagonal reduced pair both divergences are closed forms in the kept
eigenvalues mu_i and the stationarity condition is

    sum_i ((1 - mu_i) / (l + (1-l) mu_i) + ln mu_i) = 0,

which always brackets a sign change on [0, 1]; a scan plus
golden-section refinement covers any degenerate case where it does so
only weakly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular

from ._solvers import bisect_root, golden_max
from .errors import (
    DimensionMismatchError,
    ParameterRangeError,
    ToleranceExceededError,
)
from .spectral import gen_eigs
from .tree_model import SpdMatrix

PLAN_RESIDUAL_TOL = 1e-8

# reduced-CI ties are real (mu and 1/mu carry equal information); CI
# values this close count as tied and the smaller k wins
TIE_TOL = 1e-11


@dataclass(frozen=True)
class ReductionPlan:
    """Whitening matrix, chosen head count k, the projection A_k, the
    kept eigenvalues, and the reduced pair's Chernoff information."""

    p: np.ndarray = field(repr=False)
    k: int
    a_k: np.ndarray = field(repr=False)
    chosen: tuple[float, ...]
    reduced_ci: float
    reduced_lambda_star: float


def whitening_transform(s1: SpdMatrix, s2: SpdMatrix) -> tuple[np.ndarray, np.ndarray]:
    """P with P Sigma2 P^T = I and P Sigma1 P^T = diag(lam), rows
    ordered by descending eigenvalue (multiples adjacent)."""
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    L = cholesky(s2.entries, lower=True)
    half = solve_triangular(L, s1.entries, lower=True)
    reduced = solve_triangular(L, half.T, lower=True).T
    vals, vecs = eigh(0.5 * (reduced + reduced.T))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    linv = solve_triangular(L, np.eye(s1.dim), lower=True)
    return vecs.T @ linv, vals


def candidate_matrices(
    p: np.ndarray, spectrum: np.ndarray, n_o: int
) -> list[tuple[int, np.ndarray]]:
    """All possibly-optimal projections for output dimension n_o: for
    each admissible k, the rows of P carrying the k largest and the
    n_o - k smallest eigenvalues."""
    n = len(spectrum)
    if not (1 <= n_o <= n):
        raise ParameterRangeError(f"n_o {n_o} outside 1..{n}")
    if np.any(np.diff(spectrum) > 0):
        raise ParameterRangeError("spectrum must be sorted descending")
    m = int(np.sum(spectrum > 1.0))
    out = []
    for k in range(max(n_o + m - n, 0), min(m, n_o) + 1):
        rows = list(range(k)) + list(range(n - (n_o - k), n))
        out.append((k, p[rows]))
    return out


def _d_to_s1(lam: float, mu: np.ndarray) -> float:
    s = lam + (1.0 - lam) * mu
    return 0.5 * float(np.sum(np.log(s) + 1.0 / s - 1.0))


def _d_to_s2(lam: float, mu: np.ndarray) -> float:
    s = lam + (1.0 - lam) * mu
    return 0.5 * float(np.sum(np.log(s / mu) + mu / s - 1.0))


def reduced_ci(chosen) -> tuple[float, float]:
    """Chernoff information of the diagonal pair (diag(chosen), I) by
    the max-min definition; returns (ci, lambda)."""
    mu = np.asarray(list(chosen), dtype=float)
    if mu.size == 0 or np.any(mu <= 0.0) or not np.all(np.isfinite(mu)):
        raise ParameterRangeError("chosen eigenvalues must be positive and finite")
    if np.max(np.abs(mu - 1.0)) <= 1e-12:
        return 0.0, 0.5

    def h(lam: float) -> float:
        s = lam + (1.0 - lam) * mu
        return float(np.sum((1.0 - mu) / s + np.log(mu)))

    h0, h1 = h(0.0), h(1.0)
    if h0 > 0.0 > h1:
        lam = bisect_root(h, 0.0, 1.0)
    else:
        # no strict bracket: maximize min(D1, D2) directly
        grid = np.linspace(0.0, 1.0, 2048)
        vals = [min(_d_to_s1(x, mu), _d_to_s2(x, mu)) for x in grid]
        i = int(np.argmax(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        lam, _ = golden_max(lambda x: min(_d_to_s1(x, mu), _d_to_s2(x, mu)),
                            lo, hi, tol=1e-10)
    return min(_d_to_s1(lam, mu), _d_to_s2(lam, mu)), float(lam)


def optimal_reduction(s1: SpdMatrix, s2: SpdMatrix, n_o: int) -> ReductionPlan:
    """Best candidate projection by reduced CI; ties go to the smallest
    k. The plan's defining equations are re-verified before return."""
    p, spectrum = whitening_transform(s1, s2)
    best = None
    for k, a_k in candidate_matrices(p, spectrum, n_o):
        rows = list(range(k)) + list(range(len(spectrum) - (n_o - k), len(spectrum)))
        chosen = spectrum[rows]
        ci, lam = reduced_ci(chosen)
        if best is None or ci > best[0] + TIE_TOL:
            best = (ci, lam, k, a_k, chosen)
    ci, lam, k, a_k, chosen = best
    res2 = float(np.max(np.abs(a_k @ s2.entries @ a_k.T - np.eye(n_o))))
    res1 = float(np.max(np.abs(a_k @ s1.entries @ a_k.T - np.diag(chosen))))
    if max(res1, res2) > PLAN_RESIDUAL_TOL:
        raise ToleranceExceededError(
            f"projection residuals ({res1:.3e}, {res2:.3e}) exceed 1e-8")
    return ReductionPlan(p=p, k=k, a_k=a_k, chosen=tuple(float(c) for c in chosen),
                         reduced_ci=ci, reduced_lambda_star=lam)


def interlacing_check(s1: SpdMatrix, s2: SpdMatrix, drop: int, slack: float = 1e-8) -> bool:
    """Do the generalized eigenvalues of the pair with row/column `drop`
    (0-based) deleted interlace the parent eigenvalues?"""
    n = s1.dim
    if s2.dim != n:
        raise DimensionMismatchError(f"dims {s1.dim} and {s2.dim} differ")
    if n < 2:
        raise ParameterRangeError("interlacing needs dimension >= 2")
    if not (0 <= drop < n):
        raise ParameterRangeError(f"drop index {drop} outside 0..{n - 1}")
    parent = np.array(gen_eigs(s1, s2).values)
    sub1 = SpdMatrix.from_array(np.delete(np.delete(s1.entries, drop, 0), drop, 1))
    sub2 = SpdMatrix.from_array(np.delete(np.delete(s2.entries, drop, 0), drop, 1))
    child = np.array(gen_eigs(sub1, sub2).values)
    lower_ok = np.all(parent[:-1] <= child + slack)
    upper_ok = np.all(child <= parent[1:] + slack)
    return bool(lower_ok and upper_ok)
