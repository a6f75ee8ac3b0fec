"""Exact formulas for the 3-node bottleneck pair.

Two trees connected by one grafting operation reduce to a 3-node pair:
a path i-j-k against the star where k's edge has moved from j to i,
both carrying the same weights w1 (kept edge) and w2 (moved edge). The
pencil spectrum is {1, lam_max, 1/lam_max} with

    lam_max = (sqrt(beta) + w2) / (sqrt(beta) - w2),
    beta    = w2^2 + 2 (1 - w2^2) / (1 - w1),

lambda* = 1/2 (the pair is congruent under swapping i and j), and

    CI = 1/2 ln(1 + w2^2 (1 - w1) / (2 (1 - w2^2)))
       = ln(sqrt(lam_max) + 1/sqrt(lam_max)) - ln 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ParameterRangeError
from .tree_model import WEIGHT_MAX, GaussianTree, SpdMatrix, covariance_of


def _check_open_unit(name: str, w: float, allow_zero: bool) -> None:
    if not math.isfinite(w) or abs(w) >= 1.0 or (w == 0.0 and not allow_zero):
        bound = "|w| < 1" + ("" if allow_zero else ", w != 0")
        raise ParameterRangeError(f"{name} = {w!r} violates {bound}")


@dataclass(frozen=True)
class ThreeNodePair:
    """The canonical one-graft pair on nodes {1, 2, 3}: path 1-2-3
    (weights w1, w2) versus the star at 1 (same weights)."""

    w1: float
    w2: float
    tree1: GaussianTree = field(init=False, repr=False)
    tree2: GaussianTree = field(init=False, repr=False)

    def __post_init__(self):
        for name, w in (("w1", self.w1), ("w2", self.w2)):
            if not (0.0 < abs(w) <= WEIGHT_MAX):
                raise ParameterRangeError(
                    f"{name} = {w!r} outside 0 < |w| <= {WEIGHT_MAX}")
        object.__setattr__(self, "tree1",
                           GaussianTree(3, [(1, 2, self.w1), (2, 3, self.w2)]))
        object.__setattr__(self, "tree2",
                           GaussianTree(3, [(1, 2, self.w1), (1, 3, self.w2)]))

    @property
    def sigma1(self) -> SpdMatrix:
        return covariance_of(self.tree1)

    @property
    def sigma2(self) -> SpdMatrix:
        return covariance_of(self.tree2)


def beta_of(w1: float, w2: float) -> float:
    _check_open_unit("w1", w1, allow_zero=True)
    _check_open_unit("w2", w2, allow_zero=True)
    return w2 * w2 + 2.0 * (1.0 - w2 * w2) / (1.0 - w1)


def lambda_max_3node(w1: float, w2: float) -> float:
    """Largest generalized eigenvalue of the 3-node pair; the spectrum
    is {1, lam, 1/lam} either way, so negative w2 (which makes the raw
    ratio < 1) is canonicalized to max(lam, 1/lam)."""
    root = math.sqrt(beta_of(w1, w2))
    lam = (root + w2) / (root - w2)
    return max(lam, 1.0 / lam)


def ci_3node(w1: float, w2: float) -> float:
    """Chernoff information of the 3-node pair, in nats."""
    _check_open_unit("w1", w1, allow_zero=True)
    _check_open_unit("w2", w2, allow_zero=True)
    return 0.5 * math.log1p(0.5 * w2 * w2 / (1.0 - w2 * w2) * (1.0 - w1))


def enumerate_3node_patterns(w1: float, w2: float) -> list[GaussianTree]:
    """The six labeled 3-node trees with weight multiset {w1, w2}:
    three choices of center node, two weight placements each. Any two
    are connected by at most 3 grafting operations.

    The first two entries are the canonical ThreeNodePair members (path
    1-2-3, then the star at 1).
    """
    for name, w in (("w1", w1), ("w2", w2)):
        if not (0.0 < abs(w) <= WEIGHT_MAX):
            raise ParameterRangeError(f"{name} = {w!r} outside 0 < |w| <= {WEIGHT_MAX}")
    order = [(2, w1, w2), (1, w1, w2), (2, w2, w1),
             (1, w2, w1), (3, w1, w2), (3, w2, w1)]
    out = []
    for center, wa, wb in order:
        a, b = (x for x in (1, 2, 3) if x != center)
        out.append(GaussianTree(3, [(center, a, wa), (center, b, wb)]))
    return out
