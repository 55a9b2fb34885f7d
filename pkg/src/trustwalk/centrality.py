"""H-index style node importance on the friendship graph.

The improved score credits every neighbour whose degree reaches the focal
node's threshold ``k`` with ``1/deg(v)``, and credits a sub-threshold
neighbour ``u`` with ``1/(2 deg(v))`` for each of *its* neighbours (other than
``v``) that reaches ``k``.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


@dataclass(frozen=True)
class CentralityScore:
    node: int
    threshold_k: int
    impact: float
    classic_hindex: int


def avg_neighbor_degree(v, social) -> int:
    """Floor of the mean degree of ``v``'s neighbours."""
    nbrs = social.neighbors(v)
    if not nbrs:
        raise DomainError(f"node {v} has no neighbours")
    return sum(social.degree(u) for u in nbrs) // len(nbrs)


def classic_hindex(v, social) -> int:
    degs = sorted((social.degree(u) for u in social.neighbors(v)), reverse=True)
    h = 0
    for rank, d in enumerate(degs, 1):
        if d < rank:
            break
        h = rank
    return h


def _count_at_least(sorted_degrees, k) -> int:
    return len(sorted_degrees) - bisect_left(sorted_degrees, k)


class _DegreeIndex:
    """Degrees and sorted neighbour-degree lists, computed once per graph."""

    def __init__(self, social):
        self.social = social
        self.degree = {u: len(vs) for u, vs in social.adjacency.items()}
        self._nbr_degrees: dict[int, list[int]] = {}

    def deg(self, u) -> int:
        return self.degree.get(u, 0)

    def nbr_degrees(self, u) -> list[int]:
        cached = self._nbr_degrees.get(u)
        if cached is None:
            cached = sorted(self.deg(w) for w in self.social.neighbors(u))
            self._nbr_degrees[u] = cached
        return cached


def _half_units(v, index: _DegreeIndex):
    """Per-neighbour credit in half-units plus the threshold used."""
    nbrs = index.social.neighbors(v)
    if not nbrs:
        return 0, {}
    k = sum(index.deg(u) for u in nbrs) // len(nbrs)
    deg_v = index.deg(v)
    credit = {}
    for u in nbrs:
        if index.deg(u) >= k:
            credit[u] = 2
            continue
        # qualifying neighbours of u, not counting the focal node itself
        q = _count_at_least(index.nbr_degrees(u), k)
        if v in index.social.neighbors(u) and deg_v >= k:
            q -= 1
        credit[u] = q
    return k, credit


def impact_contributions(v, social, _index=None) -> dict[int, Fraction]:
    """Exact contribution of each neighbour of ``v`` to its impact factor."""
    index = _index or _DegreeIndex(social)
    _, credit = _half_units(v, index)
    d = index.deg(v)
    return {u: Fraction(c, 2 * d) for u, c in credit.items()}


def impact_factor(v, social, _index=None) -> float:
    index = _index or _DegreeIndex(social)
    _, credit = _half_units(v, index)
    if not credit:
        return 0.0
    # a single division keeps e.g. 3/10 exactly at 0.3
    return sum(credit.values()) / (2 * index.deg(v))


def centrality_score(v, social, _index=None) -> CentralityScore:
    index = _index or _DegreeIndex(social)
    k, credit = _half_units(v, index)
    impact = sum(credit.values()) / (2 * index.deg(v)) if credit else 0.0
    return CentralityScore(v, k, impact, classic_hindex(v, social))


def all_impact_factors(social, nodes=None) -> dict[int, float]:
    index = _DegreeIndex(social)
    nodes = social.nodes() if nodes is None else nodes
    return {v: impact_factor(v, social, index) for v in nodes}


def all_scores(social) -> list[CentralityScore]:
    index = _DegreeIndex(social)
    return [centrality_score(v, social, index) for v in social.nodes()]
