"""Independent verification engines.

Everything here checks the analytic pipeline from a different
direction: a brute-force max-min scan over the mixing parameter using
dense Kullback-Leibler evaluations (no generalized eigenvalues), a
Monte Carlo estimate of the hypothesis-testing error exponent, a
random-projection baseline for the dimension-reduction optimality
claim, and a randomized search for dependent grafting chains that
break the partial ordering.

Reproducibility: every randomized engine derives per-unit substreams
from the base seed (per trial, per projection, per attempt), so
results are bit-identical across runs and across worker counts, and
error counting is integer reduction, immune to summation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky

from ._solvers import golden_max
from .errors import (
    EntropyMismatchError,
    GtcError,
    NotSpdError,
    ParameterRangeError,
)
from .graph_ops import (
    GraftingChain,
    GraftingOp,
    _component_after_cut,
    apply_graft,
    are_independent,
)
from .spectral import ENTROPY_TOL, chernoff, gen_eigs
from .tree_model import (
    GaussianTree,
    SpdMatrix,
    _random_tree,
    covariance_of,
    precision_of,
)

WILSON_Z = 1.959963984540054  # two-sided 95%

# cells with fewer observed errors than this are too noisy for the
# error-exponent regression and are excluded from the slope fit
MIN_ERRORS_FOR_FIT = 50


# -- max-min Chernoff information (definition-level oracle) -----------------

def _kl_terms(cov: SpdMatrix):
    prec = cho_solve(cho_factor(cov.entries, lower=True), np.eye(cov.dim))
    return prec, cov.log_det


def ci_maxmin_scan(s1: SpdMatrix, s2: SpdMatrix, grid: int = 256) -> tuple[float, float]:
    """max over lambda of min(D(S_lam||S1), D(S_lam||S2)) by grid scan
    plus golden-section refinement around the best cell.

    Works entirely through dense factorizations of S_lam, so it shares
    nothing with the generalized-eigenvalue route it is used to check.
    Does not require equal determinants. Returns (ci, lambda).
    """
    if grid < 64:
        raise ParameterRangeError(f"grid {grid} below the minimum 64")
    if s1.dim != s2.dim:
        raise ParameterRangeError(f"dims {s1.dim} and {s2.dim} differ")
    n = s1.dim
    p1, ld1 = _kl_terms(s1)
    p2, ld2 = _kl_terms(s2)
    eye = np.eye(n)

    def dmin(lam: float) -> float:
        mix = lam * p1 + (1.0 - lam) * p2
        cf = cho_factor(0.5 * (mix + mix.T), lower=True)
        ld_lam = -2.0 * float(np.sum(np.log(np.diag(cf[0]))))
        cov_lam = cho_solve(cf, eye)
        d1 = 0.5 * (ld1 - ld_lam + float(np.sum(p1 * cov_lam)) - n)
        d2 = 0.5 * (ld2 - ld_lam + float(np.sum(p2 * cov_lam)) - n)
        return min(d1, d2)

    xs = np.linspace(0.0, 1.0, grid)
    ys = [dmin(x) for x in xs]
    i = int(np.argmax(ys))
    if ys[i] <= 1e-15:
        return 0.0, 0.5
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, grid - 1)]
    lam, ci = golden_max(dmin, lo, hi, tol=1e-8)
    return float(ci), float(lam)


def _dmin_diag(lam: float, mu: np.ndarray) -> float:
    s = lam + (1.0 - lam) * mu
    d1 = 0.5 * float(np.sum(np.log(s) + 1.0 / s - 1.0))
    d2 = 0.5 * float(np.sum(np.log(s / mu) + mu / s - 1.0))
    return min(d1, d2)


def projection_ci(s1: SpdMatrix, s2: SpdMatrix, a: np.ndarray,
                  grid: int = 256) -> float:
    """Chernoff information of the projected pair (A S1 A^T, A S2 A^T)
    by max-min scan over the diagonalized closed forms."""
    a = np.asarray(a, dtype=float)
    try:
        r1 = SpdMatrix.from_array(a @ s1.entries @ a.T)
        r2 = SpdMatrix.from_array(a @ s2.entries @ a.T)
    except NotSpdError as exc:
        raise NotSpdError(f"projection is rank deficient: {exc}") from exc
    mu = gen_eigs(r1, r2).as_array()
    xs = np.linspace(0.0, 1.0, grid)
    ys = [_dmin_diag(x, mu) for x in xs]
    i = int(np.argmax(ys))
    if ys[i] <= 1e-15:
        return 0.0
    _, ci = golden_max(lambda x: _dmin_diag(x, mu),
                       xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)], tol=1e-8)
    return float(ci)


def random_projection_baseline(s1: SpdMatrix, s2: SpdMatrix, n_o: int,
                               count: int, seed: int) -> float:
    """Best Chernoff information among `count` seeded random full-rank
    N_O x N Gaussian projections; substream [seed, j] per projection."""
    n = s1.dim
    if not (1 <= n_o <= n):
        raise ParameterRangeError(f"n_o {n_o} outside 1..{n}")
    if count < 1:
        raise ParameterRangeError(f"count {count} must be >= 1")
    best = -np.inf
    for j in range(count):
        rng = np.random.default_rng([seed, j])
        a = rng.standard_normal((n_o, n))
        while np.linalg.matrix_rank(a) < n_o:
            a = rng.standard_normal((n_o, n))
        best = max(best, projection_ci(s1, s2, a, grid=64))
    return float(best)


# -- Monte Carlo error exponent ---------------------------------------------

@dataclass(frozen=True)
class PeCell:
    """Error-probability estimate at one sequence length."""

    t: int
    trials: int
    errors: int
    pe: float
    wilson_lo: float
    wilson_hi: float


@dataclass(frozen=True)
class SimulationReport:
    """Per-T error estimates with the fitted exponent slope and the
    predicted exponent (minimum pairwise Chernoff information)."""

    t_values: tuple[int, ...]
    pe_estimates: tuple[PeCell, ...]
    slope: float
    predicted: float
    trials: int
    seed: int

    def to_csv(self, precision: int = 10) -> str:
        fmt = f"{{:.{precision}g}}"
        lines = ["T,trials,errors,pe,wilson_lo,wilson_hi"]
        for c in self.pe_estimates:
            lines.append(
                f"{c.t},{c.trials},{c.errors},{fmt.format(c.pe)},"
                f"{fmt.format(c.wilson_lo)},{fmt.format(c.wilson_hi)}")
        lines.append(
            f"# slope={fmt.format(self.slope)} "
            f"predicted_ci={fmt.format(self.predicted)} "
            f"trials={self.trials} seed={self.seed}")
        return "\n".join(lines) + "\n"


def _wilson(errors: int, trials: int) -> tuple[float, float]:
    z2 = WILSON_Z * WILSON_Z
    p = errors / trials
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = WILSON_Z * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def _count_errors(seed: int, t_index: int, t: int, lo: int, hi: int,
                  chols: np.ndarray, precs: np.ndarray,
                  log_dets: np.ndarray) -> int:
    """Errors among trials [lo, hi): per-trial substream
    [seed, t_index, trial], max log-likelihood classification under
    uniform priors, ties to the lowest model index."""
    m = len(log_dets)
    errors = 0
    for trial in range(lo, hi):
        rng = np.random.default_rng([seed, t_index, trial])
        k = int(rng.integers(m))
        z = rng.standard_normal((chols.shape[1], t))
        x = chols[k] @ z
        s = x @ x.T
        quads = np.sum(precs * s, axis=(1, 2))
        scores = -0.5 * (t * log_dets + quads)
        if int(np.argmax(scores)) != k:
            errors += 1
    return errors


def mc_error_exponent(trees: list[GaussianTree], t_values, trials: int,
                      seed: int, threads: int = 1) -> SimulationReport:
    """Estimate the error exponent of max-likelihood classification
    among the trees and fit -ln(Pe)/T against T.

    Samples are Cholesky factors times i.i.d. standard normals; the
    true model per trial is uniform. T cells with fewer than 50
    observed errors are excluded from the slope fit. Identical output
    for any thread count.
    """
    if len(trees) < 2:
        raise ParameterRangeError("need at least 2 trees")
    if trials < 10_000:
        raise ParameterRangeError(f"trials {trials} below the minimum 10000")
    t_values = [int(t) for t in t_values]
    if not t_values or any(t < 1 for t in t_values):
        raise ParameterRangeError("t_values must be positive sequence lengths")
    n = trees[0].n
    if any(t.n != n for t in trees):
        raise ParameterRangeError("all trees must share the node count")
    lds = [t.log_det() for t in trees]
    if max(lds) - min(lds) > ENTROPY_TOL:
        raise EntropyMismatchError(
            f"tree log-determinants spread {max(lds) - min(lds):.3e} exceeds 1e-9")

    covs = [covariance_of(t) for t in trees]
    chols = np.stack([cholesky(c.entries, lower=True) for c in covs])
    precs = np.stack([precision_of(t).entries for t in trees])
    log_dets = np.array(lds)

    cells = []
    for t_index, t in enumerate(t_values):
        if threads > 1:
            bounds = np.linspace(0, trials, threads + 1).astype(int)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = pool.map(
                    lambda ab: _count_errors(seed, t_index, t, ab[0], ab[1],
                                             chols, precs, log_dets),
                    zip(bounds[:-1], bounds[1:]))
            errors = sum(parts)
        else:
            errors = _count_errors(seed, t_index, t, 0, trials,
                                   chols, precs, log_dets)
        lo, hi = _wilson(errors, trials)
        cells.append(PeCell(t=t, trials=trials, errors=errors,
                            pe=errors / trials, wilson_lo=lo, wilson_hi=hi))

    fit = [(c.t, -np.log(c.pe)) for c in cells if c.errors >= MIN_ERRORS_FOR_FIT]
    if len(fit) >= 2:
        xs = np.array([f[0] for f in fit], dtype=float)
        ys = np.array([f[1] for f in fit])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = float("nan")

    predicted = min(chernoff(covs[i], covs[j]).ci
                    for i in range(len(trees)) for j in range(i + 1, len(trees)))
    return SimulationReport(t_values=tuple(t_values), pe_estimates=tuple(cells),
                            slope=slope, predicted=float(predicted),
                            trials=trials, seed=seed)


# -- dependent-chain counterexample search ----------------------------------

@dataclass(frozen=True)
class CounterexampleInstance:
    """A dependent two-graft chain T1 <-> T2 <-> T3 found to violate
    the partial ordering: CI(T1,T3) < CI(T1,T2)."""

    attempt: int
    chain: GraftingChain = field(repr=False)
    lambda_star: float
    eigenvalues: tuple[float, ...]
    ci_t1_t3: float
    ci_t1_t2: float
    ci_t2_t3: float


def _sample_dependent_chain(rng: np.random.Generator) -> GraftingChain:
    """A 7-node chain whose second graft's backbone runs over the edge
    the first graft created.

    Core: path a-b-c; the first operation moves a (and its subtree)
    from b to c, the second moves b from c back to a, leaving the star
    at a. Core weights are drawn negative (their sign pattern controls
    which side of 1/2 the pair's lambda* falls on); the four
    decoration nodes attach uniformly at random with signed weights.
    """
    ids = [int(v) + 1 for v in rng.permutation(7)]
    a, b, c = ids[:3]
    u = -float(rng.uniform(0.1, 0.95))
    v = -float(rng.uniform(0.1, 0.95))
    edges = [(a, b, u), (b, c, v)]
    placed = [a, b, c]
    for d in ids[3:]:
        parent = placed[int(rng.integers(len(placed)))]
        w = float(rng.uniform(0.1, 0.95)) * float(rng.choice([-1.0, 1.0]))
        edges.append((parent, d, w))
        placed.append(d)
    base = GaussianTree(7, edges)
    return GraftingChain(base, [GraftingOp(a, b, c), GraftingOp(b, c, a)])


def search_dependent_counterexample(seed: int, attempts: int) -> CounterexampleInstance | None:
    """Sample dependent two-graft chains (substream [seed, k] per
    attempt) and return the first one with CI(T1,T3) < CI(T1,T2), or
    None on exhaustion.

    Found instances carry the T1-T3 report: lambda* lands above 1/2,
    the seven generalized eigenvalues split into four units plus three
    structural values, and CI(T2,T3) is the strict minimum.
    """
    if attempts < 1:
        raise ParameterRangeError(f"attempts {attempts} must be >= 1")
    for k in range(attempts):
        rng = np.random.default_rng([seed, k])
        chain = _sample_dependent_chain(rng)
        covs = [covariance_of(t) for t in chain.trees]
        ci_12 = chernoff(covs[0], covs[1]).ci
        rep_13 = chernoff(covs[0], covs[2])
        if rep_13.ci < ci_12:
            ci_23 = chernoff(covs[1], covs[2]).ci
            return CounterexampleInstance(
                attempt=k, chain=chain, lambda_star=rep_13.lambda_star,
                eigenvalues=rep_13.spectrum.values, ci_t1_t3=rep_13.ci,
                ci_t1_t2=ci_12, ci_t2_t3=ci_23)
    return None


# -- random instance generators ---------------------------------------------

def random_spd(rng: np.random.Generator, n: int) -> SpdMatrix:
    """A well-conditioned random SPD matrix (Wishart plus a ridge)."""
    a = rng.standard_normal((n, 2 * n))
    return SpdMatrix.from_array(a @ a.T / (2 * n) + 0.1 * np.eye(n))


def random_graft(rng: np.random.Generator, tree: GaussianTree) -> GraftingOp:
    """A uniformly-drawn valid grafting operation; needs n >= 3."""
    if tree.n < 3:
        raise ParameterRangeError("grafting needs at least 3 nodes")
    for _ in range(256):
        i, j, w = tree.edges[int(rng.integers(len(tree.edges)))]
        child, parent = (i, j) if int(rng.integers(2)) == 0 else (j, i)
        comp = _component_after_cut(tree, child, parent)
        targets = [q for q in range(1, tree.n + 1) if q not in comp and q != parent]
        if targets:
            return GraftingOp(child, parent, targets[int(rng.integers(len(targets)))], w)
    raise GtcError("no valid graft found")  # unreachable for valid trees


def random_equal_entropy_pair(
    rng: np.random.Generator, n: int, n_grafts: int,
    wmin: float = 0.1, wmax: float = 0.95,
) -> tuple[GaussianTree, GaussianTree]:
    """A random tree and a graft-derived partner; determinants match
    exactly because grafting preserves the weight multiset."""
    t1 = _random_tree(rng, n, wmin, wmax)
    t2 = t1
    for _ in range(n_grafts):
        t2 = apply_graft(t2, random_graft(rng, t2))
    return t1, t2


def sample_independent_chain(
    rng: np.random.Generator, n: int, n_ops: int,
    wmin: float = 0.1, wmax: float = 0.95, max_tries: int = 400,
) -> GraftingChain:
    """A random grafting chain that passes the independence test,
    built greedily with per-op rejection.

    Independence needs mutually disjoint anchor triples, so n must be
    at least 3 * n_ops (comfortably more for acceptable rejection
    rates)."""
    if n < 3 * n_ops and n_ops > 1:
        raise ParameterRangeError(
            f"{n_ops} independent ops need at least {3 * n_ops} nodes, got {n}")
    for _ in range(max_tries):
        base = _random_tree(rng, n, wmin, wmax)
        ops: list[GraftingOp] = []
        t = base
        ok = True
        for _ in range(n_ops):
            accepted = None
            for _ in range(max_tries):
                cand = random_graft(rng, t)
                if are_independent(base, ops + [cand]):
                    accepted = cand
                    break
            if accepted is None:
                ok = False
                break
            ops.append(accepted)
            t = apply_graft(t, accepted)
        if ok:
            return GraftingChain(base, ops)
    raise GtcError(
        f"could not build an independent chain of {n_ops} ops on {n} nodes")
