"""Chernoff information between Gaussian trees.

Gaussian tree models, their closed-form covariance algebra, Chernoff
information via generalized eigenvalues, CI-preserving tree-pair
operations and grafting chains, involutory-congruence certificates,
optimal linear dimension reduction, and independent brute-force and
Monte Carlo verification engines.
"""

from .closed_form import ThreeNodePair, beta_of, ci_3node, enumerate_3node_patterns, lambda_max_3node
from .dimred import (
    ReductionPlan,
    candidate_matrices,
    interlacing_check,
    optimal_reduction,
    reduced_ci,
    whitening_transform,
)
from .graph_ops import (
    GraftingChain,
    GraftingOp,
    apply_add_leaf,
    apply_cut_leaf,
    apply_division,
    apply_graft,
    apply_merge_path,
    are_independent,
    chain_min_ci,
    chain_pairwise_ci,
    parse_chain,
    simplify_pair,
    write_chain,
)
from .oracle import (
    CounterexampleInstance,
    SimulationReport,
    ci_maxmin_scan,
    mc_error_exponent,
    projection_ci,
    random_projection_baseline,
    search_dependent_counterexample,
)
from .spectral import (
    ChernoffReport,
    GenEigSpectrum,
    chernoff,
    gen_eigs,
    kl,
    lambda_star,
    reciprocal_pairing,
    sigma_lambda,
)
from .symmetry import (
    CongruenceWitness,
    construct_congruence,
    find_involutory_permutation,
    verify_witness,
)
from .tree_model import (
    GaussianTree,
    SpdMatrix,
    covariance_of,
    marginal_covariance,
    parse_gtree,
    precision_of,
    random_tree,
    validate,
    write_gtree,
)

__version__ = "0.1.0"
