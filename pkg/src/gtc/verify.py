"""Seeded invariant battery behind the `verify` CLI verb.

Runs a reduced-size version of every invariant family from the test
suite (the full-size versions live in the acceptance tests) and prints
one PASS/FAIL line per check. Deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from . import closed_form, dimred, graph_ops, oracle, spectral, symmetry, tree_model


def _random_valid_tree(rng, nmin=4, nmax=10):
    return tree_model._random_tree(rng, int(rng.integers(nmin, nmax + 1)), 0.1, 0.95)


def _check_tree_algebra(rng):
    worst = 0.0
    for _ in range(100):
        t = _random_valid_tree(rng)
        cov = tree_model.covariance_of(t)
        prec = tree_model.precision_of(t)
        eye_res = np.max(np.abs(prec.entries @ cov.entries - np.eye(t.n)))
        sign, dense_ld = np.linalg.slogdet(cov.entries)
        ld_res = abs(cov.log_det - dense_ld) / max(abs(dense_ld), 1.0)
        worst = max(worst, eye_res, ld_res)
    return worst <= 1e-10, f"max residual {worst:.2e}"


def _shared_pair(rng, n_grafts=2):
    n = int(rng.integers(5, 11))
    return oracle.random_equal_entropy_pair(rng, n, n_grafts)


def _check_unit_eigenvalue_growth(rng):
    worst = 0.0
    for _ in range(60):
        t1, t2 = _shared_pair(rng)
        spec = spectral.gen_eigs(tree_model.covariance_of(t1), tree_model.covariance_of(t2))
        attach = int(rng.integers(1, t1.n + 1))
        w = float(rng.uniform(0.2, 0.9))
        g1 = graph_ops.apply_add_leaf(t1, attach, w)
        g2 = graph_ops.apply_add_leaf(t2, attach, w)
        grown = spectral.gen_eigs(tree_model.covariance_of(g1), tree_model.covariance_of(g2))
        expect = np.sort(np.append(spec.as_array(), 1.0))
        worst = max(worst, float(np.max(np.abs(grown.as_array() - expect))))
    return worst <= 1e-8, f"max spectrum drift {worst:.2e}"


def _check_ci_invariance(rng):
    worst = 0.0
    for _ in range(60):
        t1, t2 = _shared_pair(rng)
        r = spectral.chernoff(tree_model.covariance_of(t1), tree_model.covariance_of(t2))
        attach = int(rng.integers(1, t1.n + 1))
        g1 = graph_ops.apply_add_leaf(t1, attach, 0.5)
        g2 = graph_ops.apply_add_leaf(t2, attach, 0.5)
        r2 = spectral.chernoff(tree_model.covariance_of(g1), tree_model.covariance_of(g2))
        worst = max(worst, abs(r.ci - r2.ci), abs(r.lambda_star - r2.lambda_star))
    return worst <= 1e-9, f"max CI/lambda* drift {worst:.2e}"


def _check_simplify(rng):
    worst = 0.0
    for _ in range(30):
        t1, t2 = _shared_pair(rng, n_grafts=1)
        r = spectral.chernoff(tree_model.covariance_of(t1), tree_model.covariance_of(t2))
        s1, s2, _ = graph_ops.simplify_pair(t1, t2)
        rs = spectral.chernoff(tree_model.covariance_of(s1), tree_model.covariance_of(s2))
        worst = max(worst, abs(r.ci - rs.ci))
    return worst <= 1e-9, f"max CI drift {worst:.2e}"


def _check_congruence(rng):
    worst = 0.0
    for _ in range(30):
        t = _random_valid_tree(rng)
        s1 = tree_model.covariance_of(t)
        s2 = oracle.random_spd(rng, t.n)
        f = symmetry.random_orthogonal(rng, t.n)
        q = symmetry.construct_congruence(s1, s2, f)
        worst = max(worst, float(np.max(np.abs(s2.entries - q @ s1.entries @ q.T))))
    return worst <= 1e-8, f"max congruence residual {worst:.2e}"


def _check_involution_implies_half(rng):
    worst = 0.0
    for _ in range(30):
        t = _random_valid_tree(rng, 4, 7)
        s1 = tree_model.covariance_of(t)
        pairs = [(i, j) for i in range(t.n) for j in range(i + 1, t.n)]
        i, j = pairs[int(rng.integers(len(pairs)))]
        perm = list(range(t.n))
        perm[i], perm[j] = perm[j], perm[i]
        s2 = tree_model.SpdMatrix.from_array(
            s1.entries[np.ix_(perm, perm)], log_det=s1.log_det)
        w = symmetry.find_involutory_permutation(s1, s2)
        spec = spectral.gen_eigs(s1, s2)
        ok = (w is not None and w.accepted and spectral.reciprocal_pairing(spec))
        if not ok:
            return False, "missing witness or unpaired spectrum"
        worst = max(worst, abs(spectral.lambda_star(spec) - 0.5))
    return worst <= 1e-9, f"max |lambda* - 1/2| {worst:.2e}"


def _check_independent_chains(rng):
    worst_ls = 0.0
    worst_tr = 0.0
    for _ in range(30):
        n_ops = int(rng.integers(1, 4))
        chain = oracle.sample_independent_chain(
            rng, int(rng.integers(3 * n_ops + 2, 14)), n_ops)
        c1 = tree_model.covariance_of(chain.trees[0])
        c2 = tree_model.covariance_of(chain.trees[-1])
        rep = spectral.chernoff(c1, c2)
        worst_ls = max(worst_ls, abs(rep.lambda_star - 0.5))
        mid = spectral.sigma_lambda(c1, c2, 0.5)
        diff = (tree_model.precision_of(chain.trees[0]).entries
                - tree_model.precision_of(chain.trees[-1]).entries)
        worst_tr = max(worst_tr, abs(float(np.sum(mid.entries * diff))))
    ok = worst_ls <= 1e-8 and worst_tr <= 1e-8
    return ok, f"max |lambda*-1/2| {worst_ls:.2e}, max trace {worst_tr:.2e}"


def _check_marginal_monotone(rng):
    for _ in range(30):
        t1, t2 = _shared_pair(rng)
        c1 = tree_model.covariance_of(t1)
        c2 = tree_model.covariance_of(t2)
        full = spectral.chernoff(c1, c2).ci
        k = int(rng.integers(2, t1.n))
        keep = sorted(int(v) + 1 for v in rng.choice(t1.n, size=k, replace=False))
        marg, _ = oracle.ci_maxmin_scan(tree_model.marginal_covariance(c1, keep),
                                        tree_model.marginal_covariance(c2, keep),
                                        grid=64)
        if marg > full + 1e-9:
            return False, f"marginal CI {marg} exceeds full {full}"
    return True, "30 subsets"


def _check_partial_order(rng):
    for _ in range(10):
        n_ops = int(rng.integers(2, 5))
        chain = oracle.sample_independent_chain(rng, 3 * n_ops + 3, n_ops)
        mat = graph_ops.chain_pairwise_ci(chain)
        m = mat.shape[0]
        for p in range(m):
            for q in range(p + 1, m):
                for i in range(p, q + 1):
                    for j in range(i, q + 1):
                        if mat[i, j] > mat[p, q] + 1e-9:
                            return False, f"CI[{i},{j}] > CI[{p},{q}]"
        adj = graph_ops.chain_min_ci(chain)
        full = graph_ops.chain_min_ci(chain, force_exhaustive=True)
        if abs(adj[1] - full[1]) > 1e-12:
            return False, "adjacent-only min differs from exhaustive"
    return True, "10 chains"


def _check_oracle_equivalence(rng):
    worst = 0.0
    for _ in range(30):
        t1, t2 = _shared_pair(rng)
        c1 = tree_model.covariance_of(t1)
        c2 = tree_model.covariance_of(t2)
        ci, _ = oracle.ci_maxmin_scan(c1, c2, grid=128)
        worst = max(worst, abs(ci - spectral.chernoff(c1, c2).ci))
    return worst <= 1e-6, f"max |scan - closed form| {worst:.2e}"


def _check_closed_form_grid(rng):
    worst = 0.0
    for w1 in np.linspace(-0.9, 0.9, 7):
        for w2 in np.linspace(-0.9, 0.9, 7):
            if w1 == 0.0 or w2 == 0.0:
                continue
            pair = closed_form.ThreeNodePair(float(w1), float(w2))
            rep = spectral.chernoff(pair.sigma1, pair.sigma2)
            worst = max(worst, abs(rep.ci - closed_form.ci_3node(w1, w2)))
    return worst <= 1e-9, f"max |pipeline - Eq.7| {worst:.2e}"


def _check_dimred(rng):
    for _ in range(5):
        t1, t2 = _shared_pair(rng)
        c1 = tree_model.covariance_of(t1)
        c2 = tree_model.covariance_of(t2)
        p, lam = dimred.whitening_transform(c1, c2)
        r1 = np.max(np.abs(p @ c2.entries @ p.T - np.eye(c1.dim)))
        r2 = np.max(np.abs(p @ c1.entries @ p.T - np.diag(lam)))
        if max(r1, r2) > 1e-8:
            return False, f"whitening residual {max(r1, r2):.2e}"
        cis = [dimred.optimal_reduction(c1, c2, k).reduced_ci
               for k in range(1, c1.dim + 1)]
        if any(cis[i] > cis[i + 1] + 1e-8 for i in range(len(cis) - 1)):
            return False, "reduced CI not monotone in output dimension"
        n_o = max(1, c1.dim // 2)
        best = dimred.optimal_reduction(c1, c2, n_o).reduced_ci
        rand = oracle.random_projection_baseline(c1, c2, n_o, 50,
                                                 int(rng.integers(1 << 30)))
        if rand > best + 1e-8:
            return False, f"random projection {rand} beat optimal {best}"
        for drop in range(c1.dim):
            if not dimred.interlacing_check(c1, c2, drop):
                return False, f"interlacing failed at drop={drop}"
    return True, "5 pairs"


def _check_counterexample(rng):
    inst = oracle.search_dependent_counterexample(int(rng.integers(1 << 30)), 2000)
    if inst is None:
        return False, "no counterexample found in 2000 attempts"
    units = sum(1 for v in inst.eigenvalues if abs(v - 1.0) < 1e-6)
    ok = (inst.ci_t1_t3 < inst.ci_t1_t2
          and inst.ci_t2_t3 < inst.ci_t1_t3
          and 0.5 < inst.lambda_star
          and units == 4)
    return ok, (f"attempt {inst.attempt}: lambda*={inst.lambda_star:.4f}, "
                f"{units} unit eigenvalues")


CHECKS = [
    ("tree-algebra", _check_tree_algebra),
    ("adding-division-unit-eigenvalue", _check_unit_eigenvalue_growth),
    ("ci-invariance", _check_ci_invariance),
    ("simplify-preserves-ci", _check_simplify),
    ("congruence-construction", _check_congruence),
    ("involution-implies-half", _check_involution_implies_half),
    ("independent-chains-half", _check_independent_chains),
    ("marginal-monotone", _check_marginal_monotone),
    ("partial-order", _check_partial_order),
    ("oracle-equivalence", _check_oracle_equivalence),
    ("closed-form-grid", _check_closed_form_grid),
    ("dimension-reduction", _check_dimred),
    ("dependent-counterexample", _check_counterexample),
]


def run_battery(seed: int, out) -> bool:
    """Run every check against substreams of `seed`; print one line per
    check to `out`; True iff all pass."""
    all_ok = True
    for index, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, index])
        ok, detail = fn(rng)
        all_ok = all_ok and ok
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})", file=out)
    return all_ok
