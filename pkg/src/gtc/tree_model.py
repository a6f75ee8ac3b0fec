"""Normalized Gaussian tree models.

A tree G = (V, E, W) over nodes 1..N with N-1 weighted edges encodes a
zero-mean Gaussian vector with unit variances whose correlation between
nodes i and j is the product of edge weights along the unique i-j path.
The covariance of such a model has closed-form inverse and determinant:

    u_ij = -w_ij / (1 - w_ij^2)                    for edges,
    u_ij = 0                                       for non-adjacent pairs,
    u_ii = 1 + sum_p w_ip^2 / (1 - w_ip^2)         on the diagonal,
    |Sigma| = prod_edges (1 - w_ij^2).

Weights must satisfy 0 < |w| <= 0.999: |w| = 1 makes the covariance
singular and w = 0 disconnects the statistical tree, so both are
rejected to keep every downstream factorization well-posed.

File format (gtree, line-oriented, UTF-8, '#' starts a comment):

    N <count>
    E <i> <j> <w>     # exactly N-1 of these, whitespace-separated

All types are immutable after construction and all operations are pure
functions, so values are safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleError,
    DisconnectedError,
    DuplicateEdgeError,
    EmptySubsetError,
    NodeNotFoundError,
    NotSpdError,
    ParameterRangeError,
    ParseError,
    WeightRangeError,
)

WEIGHT_MAX = 0.999

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class GaussianTree:
    """A weighted tree on nodes 1..n. Edges are canonicalized to (i<j)
    and sorted, so equal trees compare and hash equal."""

    n: int
    edges: tuple[Edge, ...]

    def __init__(self, n: int, edges):
        object.__setattr__(self, "n", int(n))
        canon = tuple(sorted((min(i, j), max(i, j), float(w)) for i, j, w in edges))
        object.__setattr__(self, "edges", canon)

    def degree(self, node: int) -> int:
        return sum(1 for i, j, _ in self.edges if node in (i, j))

    def neighbors(self, node: int) -> dict[int, float]:
        out = {}
        for i, j, w in self.edges:
            if i == node:
                out[j] = w
            elif j == node:
                out[i] = w
        return out

    def weight(self, i: int, j: int) -> float | None:
        a, b = min(i, j), max(i, j)
        for x, y, w in self.edges:
            if (x, y) == (a, b):
                return w
        return None

    def log_det(self) -> float:
        """ln|Sigma| from the edge-product determinant formula."""
        return float(sum(np.log1p(-w * w) for _, _, w in self.edges))


@dataclass(frozen=True)
class SpdMatrix:
    """Dense symmetric positive-definite matrix with cached log-determinant."""

    entries: np.ndarray = field(repr=False)
    log_det: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_array(cls, a: np.ndarray, log_det: float | None = None) -> "SpdMatrix":
        """Validate symmetry (1e-12 absolute) and positive definiteness.

        log_det, when omitted, comes from the Cholesky factor; pass it
        explicitly where a sharper formula is available (tree models).
        """
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSpdError(f"expected a square matrix, got shape {a.shape}")
        if np.max(np.abs(a - a.T)) > 1e-12:
            raise NotSpdError("matrix is not symmetric within 1e-12")
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise NotSpdError("matrix is not positive definite") from exc
        if log_det is None:
            log_det = float(2.0 * np.sum(np.log(np.diag(chol))))
        a.flags.writeable = False
        return cls(entries=a, log_det=float(log_det))


def _adjacency(tree: GaussianTree) -> dict[int, dict[int, float]]:
    adj: dict[int, dict[int, float]] = {k: {} for k in range(1, tree.n + 1)}
    for i, j, w in tree.edges:
        adj[i][j] = w
        adj[j][i] = w
    return adj


def validate(tree: GaussianTree) -> None:
    """Raise unless the tree invariants hold: N >= 2, contiguous 1-based
    ids, exactly N-1 distinct edges, connected, acyclic, weights in
    (0, 0.999] by absolute value."""
    if tree.n < 2:
        raise ParameterRangeError(f"trees need at least 2 nodes, got {tree.n}")
    seen: set[tuple[int, int]] = set()
    for i, j, w in tree.edges:
        if i == j:
            raise CycleError(f"self-loop on node {i}")
        if not (1 <= i <= tree.n and 1 <= j <= tree.n):
            raise NodeNotFoundError(f"edge ({i},{j}) outside nodes 1..{tree.n}")
        if not np.isfinite(w) or w == 0.0 or abs(w) > WEIGHT_MAX:
            raise WeightRangeError(
                f"edge ({i},{j}) weight {w!r} outside 0 < |w| <= {WEIGHT_MAX}")
        if (i, j) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({i},{j})")
        seen.add((i, j))
    if len(tree.edges) > tree.n - 1:
        raise CycleError(f"{len(tree.edges)} edges on {tree.n} nodes implies a cycle")
    if len(tree.edges) < tree.n - 1:
        raise DisconnectedError(
            f"{len(tree.edges)} edges cannot connect {tree.n} nodes")
    # n-1 distinct edges: connected iff acyclic, so one BFS settles both
    adj = _adjacency(tree)
    reached = {1}
    stack = [1]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in reached:
                reached.add(y)
                stack.append(y)
    if len(reached) != tree.n:
        missing = sorted(set(range(1, tree.n + 1)) - reached)
        raise DisconnectedError(f"nodes {missing} unreachable from node 1")


def path_products(tree: GaussianTree, source: int) -> dict[int, float]:
    """Product of edge weights from source to every node, by BFS."""
    adj = _adjacency(tree)
    prod = {source: 1.0}
    stack = [source]
    while stack:
        x = stack.pop()
        for y, w in adj[x].items():
            if y not in prod:
                prod[y] = prod[x] * w
                stack.append(y)
    return prod


def path_nodes(tree: GaussianTree, a: int, b: int) -> list[int]:
    """The unique a-b path as a node list (inclusive of both ends)."""
    adj = _adjacency(tree)
    prev: dict[int, int | None] = {a: None}
    stack = [a]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                stack.append(y)
    if b not in prev:
        raise NodeNotFoundError(f"no path from {a} to {b}")
    out = [b]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])  # type: ignore[arg-type]
    out.reverse()
    return out


def covariance_of(tree: GaussianTree) -> SpdMatrix:
    """Normalized covariance: unit diagonal, path products off-diagonal."""
    validate(tree)
    n = tree.n
    sigma = np.eye(n)
    for s in range(1, n + 1):
        prod = path_products(tree, s)
        for t_, p in prod.items():
            sigma[s - 1, t_ - 1] = p
    return SpdMatrix.from_array(sigma, log_det=tree.log_det())


def precision_of(tree: GaussianTree) -> SpdMatrix:
    """Closed-form inverse covariance of a normalized Gaussian tree."""
    validate(tree)
    n = tree.n
    u = np.eye(n)
    for i, j, w in tree.edges:
        c = w / (1.0 - w * w)
        u[i - 1, j - 1] = u[j - 1, i - 1] = -c
        u[i - 1, i - 1] += w * c
        u[j - 1, j - 1] += w * c
    return SpdMatrix.from_array(u, log_det=-tree.log_det())


def marginal_covariance(cov: SpdMatrix, keep) -> SpdMatrix:
    """Gaussian marginal onto `keep` (1-based ids, order preserved):
    the principal submatrix."""
    keep = list(keep)
    if not keep:
        raise EmptySubsetError("keep must be a non-empty node subset")
    for k in keep:
        if not (1 <= k <= cov.dim):
            raise NodeNotFoundError(f"node {k} outside 1..{cov.dim}")
    if len(set(keep)) != len(keep):
        raise ParameterRangeError("keep contains duplicate nodes")
    idx = [k - 1 for k in keep]
    sub = cov.entries[np.ix_(idx, idx)]
    return SpdMatrix.from_array(sub)


_TOKEN = re.compile(r"\S+")


def _tokens(line: str):
    """(token, column) pairs, comments stripped."""
    body = line.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(body)]


def parse_gtree(text: str) -> GaussianTree:
    """Parse the gtree format; raises ParseError with position on bad
    syntax and the usual validation errors afterwards."""
    n = None
    edges: list[Edge] = []
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        tag, col = toks[0]
        if tag == "N":
            if n is not None:
                raise ParseError("duplicate N line", lineno, col)
            if len(toks) != 2:
                raise ParseError("expected: N <count>", lineno, col)
            try:
                n = int(toks[1][0])
            except ValueError:
                raise ParseError(f"bad node count {toks[1][0]!r}", lineno, toks[1][1])
        elif tag == "E":
            if n is None:
                raise ParseError("E line before N line", lineno, col)
            if len(toks) != 4:
                raise ParseError("expected: E <i> <j> <w>", lineno, col)
            try:
                i = int(toks[1][0])
                j = int(toks[2][0])
            except ValueError as exc:
                raise ParseError(f"bad node id: {exc}", lineno, toks[1][1])
            try:
                w = float(toks[3][0])
            except ValueError:
                raise ParseError(f"bad weight {toks[3][0]!r}", lineno, toks[3][1])
            edges.append((i, j, w))
        else:
            raise ParseError(f"unknown directive {tag!r}", lineno, col)
    if n is None:
        raise ParseError("missing N line", max(len(lines), 1), 1)
    tree = GaussianTree(n, edges)
    validate(tree)
    return tree


def write_gtree(tree: GaussianTree) -> str:
    """Canonical text form; weights as shortest round-trip decimals so
    parse(write(t)) == t bit-exactly."""
    out = [f"N {tree.n}"]
    for i, j, w in tree.edges:
        out.append(f"E {i} {j} {w!r}")
    return "\n".join(out) + "\n"


def random_tree(seed: int, n: int, wmin: float, wmax: float) -> GaussianTree:
    """Uniformly random labeled tree (random Prufer sequence) with |w|
    uniform in [wmin, wmax] and random sign; deterministic in seed."""
    if n < 2:
        raise ParameterRangeError(f"n must be >= 2, got {n}")
    if not (0.0 < wmin < wmax <= WEIGHT_MAX):
        raise ParameterRangeError(
            f"need 0 < wmin < wmax <= {WEIGHT_MAX}, got ({wmin}, {wmax})")
    rng = np.random.default_rng(seed)
    return _random_tree(rng, n, wmin, wmax)


def _random_tree(rng: np.random.Generator, n: int, wmin: float,
                 wmax: float) -> GaussianTree:
    """rng-driven variant for callers composing several random draws."""
    pairs = _prufer_edges(rng, n)
    mags = rng.uniform(wmin, wmax, size=n - 1)
    signs = rng.choice([-1.0, 1.0], size=n - 1)
    edges = [(i, j, float(m * s)) for (i, j), m, s in zip(pairs, mags, signs)]
    tree = GaussianTree(n, edges)
    validate(tree)
    return tree


def _prufer_edges(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    if n == 2:
        return [(1, 2)]
    seq = [int(x) for x in rng.integers(1, n + 1, size=n - 2)]
    degree = {v: 1 for v in range(1, n + 1)}
    for v in seq:
        degree[v] += 1
    edges = []
    avail = set(range(1, n + 1))
    for v in seq:
        leaf = min(u for u in avail if degree[u] == 1)
        edges.append((leaf, v))
        avail.remove(leaf)
        degree[leaf] -= 1
        degree[v] -= 1
    last = sorted(u for u in avail if degree[u] == 1)
    edges.append((last[0], last[1]))
    return edges
