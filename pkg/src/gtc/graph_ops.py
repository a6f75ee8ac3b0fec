"""Tree-pair operations: adding, division, cutting, merging, grafting.

Adding a shared leaf or splitting a shared edge leaves the Chernoff
information of a tree pair unchanged (the pencil only gains a unit
eigenvalue), and so do the inverse operations. simplify_pair exploits
this to strip identical substructure until only the differing core
remains.

A grafting operation cuts edge (i, p) and re-attaches node i (with its
whole subtree) to node q at the same weight w, so the weight multiset
and hence the determinant are exactly preserved. Chains of grafts are
"independent" when each operation's anchors and backbone (the
old-parent to new-parent path) are untouched by every other
operation's edits; independent chains have lambda* = 1/2 between any
two member trees and carry a partial order on pairwise CI, which lets
the minimum be found among adjacent pairs only.

Chain file format: a gtree block for the base tree followed by lines
`G <i> <p> <q>` applied in order (the moved weight is implied by the
current tree).
"""

from __future__ import annotations

from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
    CycleError,
    EdgeNotFoundError,
    InapplicableChainError,
    InputError,
    NodeNotFoundError,
    NoOpError,
    NotALeafError,
    NotDegreeTwoError,
    ParseError,
    SplitInfeasibleError,
    WeightRangeError,
)
from .spectral import chernoff
from .tree_model import (
    WEIGHT_MAX,
    GaussianTree,
    covariance_of,
    parse_gtree,
    path_nodes,
    validate,
    write_gtree,
)

# identical-substructure matching quantum for simplify_pair: Prop.-4-style
# reductions require exactly shared structure, so weights must agree to
# this absolute tolerance before a cut or merge is allowed
SHARED_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class GraftingOp:
    """Cut edge (cut_child, old_parent), paste (cut_child, new_parent).

    weight is the moved edge's weight; None means "resolve from the
    tree at application time" (the chain file format implies it).
    """

    cut_child: int
    old_parent: int
    new_parent: int
    weight: float | None = None

    def inverse(self, resolved_weight: float | None = None) -> "GraftingOp":
        w = self.weight if resolved_weight is None else resolved_weight
        return GraftingOp(self.cut_child, self.new_parent, self.old_parent, w)


def apply_add_leaf(t: GaussianTree, attach: int, w: float) -> GaussianTree:
    """Append node n+1 as a leaf of `attach` with weight w."""
    validate(t)
    if not (1 <= attach <= t.n):
        raise NodeNotFoundError(f"attach node {attach} outside 1..{t.n}")
    if not (0.0 < abs(w) <= WEIGHT_MAX):
        raise WeightRangeError(f"leaf weight {w!r} outside 0 < |w| <= {WEIGHT_MAX}")
    out = GaussianTree(t.n + 1, t.edges + ((attach, t.n + 1, float(w)),))
    validate(out)
    return out


def apply_division(t: GaussianTree, p: int, q: int, w1: float) -> GaussianTree:
    """Split edge (p, q, w) into (p, n+1, w1) and (n+1, q, w/w1); the
    path product, and with it the covariance of the original nodes, is
    preserved."""
    validate(t)
    w = t.weight(p, q)
    if w is None:
        raise EdgeNotFoundError(f"no edge ({p},{q})")
    if w1 == 0.0 or not np.isfinite(w1):
        raise SplitInfeasibleError(f"split weight {w1!r} must be finite and nonzero")
    w2 = w / w1
    if abs(w1) > WEIGHT_MAX or abs(w2) > WEIGHT_MAX:
        raise SplitInfeasibleError(
            f"split ({w1!r}, {w2!r}) of weight {w!r} leaves the valid range")
    new = t.n + 1
    edges = [e for e in t.edges if (e[0], e[1]) != (min(p, q), max(p, q))]
    edges += [(p, new, float(w1)), (new, q, float(w2))]
    out = GaussianTree(t.n + 1, edges)
    validate(out)
    return out


def _drop_node(n: int, edges, removed: int) -> GaussianTree:
    """Relabel after deleting `removed`: ids above it shift down by one."""
    def relab(v: int) -> int:
        return v - 1 if v > removed else v
    return GaussianTree(n - 1, [(relab(i), relab(j), w) for i, j, w in edges])


def apply_cut_leaf(t: GaussianTree, leaf: int) -> GaussianTree:
    """Remove a degree-1 node; remaining ids compact order-preservingly."""
    validate(t)
    if not (1 <= leaf <= t.n):
        raise NodeNotFoundError(f"node {leaf} outside 1..{t.n}")
    if t.degree(leaf) != 1:
        raise NotALeafError(f"node {leaf} has degree {t.degree(leaf)}")
    edges = [e for e in t.edges if leaf not in (e[0], e[1])]
    out = _drop_node(t.n, edges, leaf)
    validate(out)
    return out


def apply_merge_path(t: GaussianTree, mid: int) -> GaussianTree:
    """Replace the 2-path p-mid-q by edge (p, q, w1*w2)."""
    validate(t)
    if not (1 <= mid <= t.n):
        raise NodeNotFoundError(f"node {mid} outside 1..{t.n}")
    nbrs = t.neighbors(mid)
    if len(nbrs) != 2:
        raise NotDegreeTwoError(f"node {mid} has degree {len(nbrs)}")
    (p, w1), (q, w2) = sorted(nbrs.items())
    merged = w1 * w2
    if merged == 0.0:
        raise WeightRangeError(f"merged weight of ({w1!r}, {w2!r}) underflows to 0")
    edges = [e for e in t.edges if mid not in (e[0], e[1])]
    edges.append((p, q, merged))
    out = _drop_node(t.n, edges, mid)
    validate(out)
    return out


def _component_after_cut(t: GaussianTree, child: int, parent: int) -> set[int]:
    """Nodes on `child`'s side once edge (child, parent) is removed."""
    comp = {child}
    stack = [child]
    while stack:
        x = stack.pop()
        for y in t.neighbors(x):
            if x == child and y == parent:
                continue
            if y not in comp:
                comp.add(y)
                stack.append(y)
    return comp


def apply_graft(t: GaussianTree, op: GraftingOp) -> GaussianTree:
    """Move edge (i, p, w) to (i, q, w); log-determinant exactly
    preserved since the weight multiset is unchanged."""
    validate(t)
    i, p, q = op.cut_child, op.old_parent, op.new_parent
    if q == p:
        raise NoOpError(f"graft of {i} from {p} to {p} is a no-op")
    if not (1 <= q <= t.n):
        raise NodeNotFoundError(f"paste target {q} outside 1..{t.n}")
    w = t.weight(i, p)
    if w is None:
        raise EdgeNotFoundError(f"no edge ({i},{p})")
    if op.weight is not None and op.weight != w:
        raise EdgeNotFoundError(
            f"edge ({i},{p}) has weight {w!r}, operation carries {op.weight!r}")
    if q in _component_after_cut(t, i, p):
        raise CycleError(f"paste target {q} lies in the subtree hanging off {i}")
    edges = [e for e in t.edges if (e[0], e[1]) != (min(i, p), max(i, p))]
    edges.append((i, q, w))
    out = GaussianTree(t.n, edges)
    validate(out)
    return out


def resolve(t: GaussianTree, op: GraftingOp) -> GraftingOp:
    """Fill in the moved weight from the tree the op applies to."""
    w = t.weight(op.cut_child, op.old_parent)
    if w is None:
        raise EdgeNotFoundError(f"no edge ({op.cut_child},{op.old_parent})")
    return GraftingOp(op.cut_child, op.old_parent, op.new_parent, w)


def _shared_leaf(t1: GaussianTree, t2: GaussianTree, node: int) -> bool:
    if t1.degree(node) != 1 or t2.degree(node) != 1:
        return False
    (n1, w1), = t1.neighbors(node).items()
    (n2, w2), = t2.neighbors(node).items()
    return n1 == n2 and abs(w1 - w2) <= SHARED_WEIGHT_TOL


def _shared_two_path(t1: GaussianTree, t2: GaussianTree, node: int) -> bool:
    nb1 = t1.neighbors(node)
    nb2 = t2.neighbors(node)
    if len(nb1) != 2 or len(nb2) != 2 or set(nb1) != set(nb2):
        return False
    return all(abs(nb1[k] - nb2[k]) <= SHARED_WEIGHT_TOL for k in nb1)


def simplify_pair(
    t1: GaussianTree, t2: GaussianTree
) -> tuple[GaussianTree, GaussianTree, dict[int, int]]:
    """Strip shared identical leaves (cut) and shared identical
    degree-2 nodes (merge) from both trees until no rule fires.

    The reduced pair provably has the same Chernoff information as the
    input pair. Returns the pair plus the relabel map from surviving
    original ids to new ids (shared by both trees, since every removal
    is shared). Never reduces below 2 nodes.
    """
    if t1.n != t2.n:
        raise InputError(f"trees have different node counts {t1.n} and {t2.n}")
    validate(t1)
    validate(t2)
    relabel = {v: v for v in range(1, t1.n + 1)}
    changed = True
    while changed and t1.n > 2:
        changed = False
        for node in range(1, t1.n + 1):
            if _shared_leaf(t1, t2, node):
                t1 = apply_cut_leaf(t1, node)
                t2 = apply_cut_leaf(t2, node)
            elif _shared_two_path(t1, t2, node):
                t1 = apply_merge_path(t1, node)
                t2 = apply_merge_path(t2, node)
            else:
                continue
            relabel = {
                orig: (cur - 1 if cur > node else cur)
                for orig, cur in relabel.items()
                if cur != node
            }
            changed = True
            break
    return t1, t2, relabel


def are_independent(base: GaussianTree, ops: list[GraftingOp]) -> bool:
    """Conservative independence test for a grafting sequence.

    Each operation's region is its anchor nodes plus its backbone path
    (old parent to new parent, in the tree it applies to). The sequence
    is independent iff no operation's region touches an edge created or
    removed by another operation. Conservatism can only demote a chain
    to the exhaustive CI scan, never break correctness.
    """
    regions: list[set[int]] = []
    edits: list[list[frozenset[int]]] = []
    t = base
    try:
        for op in ops:
            op = resolve(t, op)
            i, p, q = op.cut_child, op.old_parent, op.new_parent
            regions.append(set(path_nodes(t, p, q)) | {i, p, q})
            edits.append([frozenset((i, p)), frozenset((i, q))])
            t = apply_graft(t, op)
    except InputError as exc:
        raise InapplicableChainError(f"chain does not apply: {exc}") from exc
    for a in range(len(ops)):
        for b in range(len(ops)):
            if a == b:
                continue
            if any(edge & regions[a] for edge in edits[b]):
                return False
    return True


@dataclass(frozen=True)
class GraftingChain:
    """Base tree plus grafting operations; trees[k] is the state after
    the first k operations, so len(trees) == len(ops) + 1."""

    base: GaussianTree
    ops: tuple[GraftingOp, ...]
    trees: tuple[GaussianTree, ...]

    def __init__(self, base: GaussianTree, ops):
        validate(base)
        resolved = []
        trees = [base]
        t = base
        try:
            for op in ops:
                op = resolve(t, op)
                t = apply_graft(t, op)
                resolved.append(op)
                trees.append(t)
        except InputError as exc:
            raise InapplicableChainError(f"chain does not apply: {exc}") from exc
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "ops", tuple(resolved))
        object.__setattr__(self, "trees", tuple(trees))


def _pair_ci(covs, i, j) -> float:
    return chernoff(covs[i], covs[j]).ci


def chain_pairwise_ci(chain: GraftingChain, threads: int = 1) -> np.ndarray:
    """Symmetric matrix of CI(T_i || T_j); zero diagonal."""
    m = len(chain.trees)
    covs = [covariance_of(t) for t in chain.trees]
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(lambda ij: _pair_ci(covs, *ij), pairs))
    else:
        vals = [_pair_ci(covs, i, j) for i, j in pairs]
    out = np.zeros((m, m))
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return out


def chain_min_ci(
    chain: GraftingChain, force_exhaustive: bool = False, threads: int = 1
) -> tuple[tuple[int, int], float, str]:
    """Minimum pairwise CI over the chain.

    Independent chains only need the adjacent pairs (the partial order
    guarantees no farther pair can be smaller); dependent chains get
    the exhaustive scan. Returns ((i, j), value, method) with 0-based
    tree indices.
    """
    m = len(chain.trees)
    independent = (not force_exhaustive) and are_independent(chain.base, list(chain.ops))
    if independent:
        method = "adjacent-only"
        pairs = [(k, k + 1) for k in range(m - 1)]
    else:
        method = "exhaustive"
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    covs = [covariance_of(t) for t in chain.trees]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(lambda ij: _pair_ci(covs, *ij), pairs))
    else:
        vals = [_pair_ci(covs, i, j) for i, j in pairs]
    best = min(range(len(pairs)), key=lambda k: (vals[k], pairs[k]))
    return pairs[best], vals[best], method


def parse_chain(text: str) -> GraftingChain:
    """Parse a chain file: a gtree block then `G <i> <p> <q>` lines."""
    tree_lines = []
    ops: list[GraftingOp] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = body.split()
        if not toks:
            continue
        if toks[0] == "G":
            if len(toks) != 4:
                raise ParseError("expected: G <i> <p> <q>", lineno, 1)
            try:
                i, p, q = (int(x) for x in toks[1:])
            except ValueError:
                raise ParseError(f"bad node id in {body.strip()!r}", lineno, 1)
            ops.append(GraftingOp(i, p, q))
        else:
            if ops:
                raise ParseError("tree line after G lines", lineno, 1)
            tree_lines.append(raw)
    base = parse_gtree("\n".join(tree_lines) + "\n")
    return GraftingChain(base, ops)


def write_chain(chain: GraftingChain) -> str:
    out = write_gtree(chain.base)
    for op in chain.ops:
        out += f"G {op.cut_child} {op.old_parent} {op.new_parent}\n"
    return out
