"""Pairwise user similarity over ratings and friendships.

Every function returns ``None`` when its denominator is empty or zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PairSimilarity:
    pearson: float | None
    sim_item: float | None
    sim_con: float | None
    sim_deg: float | None


@dataclass(frozen=True)
class CoRatingStats:
    """Sufficient statistics of two users' ratings over their co-rated items."""

    n: int = 0
    sum_a: float = 0.0
    sum_b: float = 0.0
    sum_aa: float = 0.0
    sum_bb: float = 0.0
    sum_ab: float = 0.0

    @classmethod
    def of(cls, items_a, items_b) -> "CoRatingStats":
        # sorted order makes the sums independent of argument order
        common = sorted(items_a.keys() & items_b.keys())
        n = len(common)
        sa = sb = saa = sbb = sab = 0.0
        for item in common:
            ra = items_a[item]
            rb = items_b[item]
            sa += ra
            sb += rb
            saa += ra * ra
            sbb += rb * rb
            sab += ra * rb
        return cls(n, sa, sb, saa, sbb, sab)

    def pearson(self) -> float | None:
        return pearson_from_sums(self.n, self.sum_a, self.sum_b,
                                 self.sum_aa, self.sum_bb, self.sum_ab)

    def sim_item(self) -> float | None:
        if self.n == 0:
            return None
        return (self.sum_a + self.sum_b) / self.n


def pearson_from_sums(n, sa, sb, saa, sbb, sab):
    # n*cov and n*var keep grid-valued ratings exact, so sign tests are stable
    if n < 2:
        return None
    var_a = n * saa - sa * sa
    var_b = n * sbb - sb * sb
    if var_a <= 0 or var_b <= 0:
        return None
    cov = n * sab - sa * sb
    r = cov / (math.sqrt(var_a) * math.sqrt(var_b))
    return min(1.0, max(-1.0, r))


def pearson(a, b, ratings) -> float | None:
    """Pearson correlation over the items both users rated.

    Means are taken over the co-rated items only. Undefined for fewer than
    two co-rated items or a constant co-rating vector.
    """
    return CoRatingStats.of(ratings.items_of(a), ratings.items_of(b)).pearson()


def sim_item(a, b, ratings) -> float | None:
    """Mean over co-rated items of the summed pair of ratings."""
    return CoRatingStats.of(ratings.items_of(a), ratings.items_of(b)).sim_item()


def mutual_friends(a, b, social) -> int:
    fa = social.neighbors(a)
    fb = social.neighbors(b)
    if len(fb) < len(fa):
        fa, fb = fb, fa
    fb = set(fb)
    return sum(1 for v in fa if v in fb)


def sim_con(a, b, social) -> float | None:
    """Share of ``a``'s friends who are also friends of ``b`` (asymmetric)."""
    deg_a = social.degree(a)
    if deg_a == 0:
        return None
    return mutual_friends(a, b, social) / deg_a


def sim_deg(a, b, social) -> float | None:
    """Summed degrees of ``a`` and ``b`` per mutual friend."""
    common = mutual_friends(a, b, social)
    if common == 0:
        return None
    return (social.degree(a) + social.degree(b)) / common


def pair_similarity(a, b, ratings, social) -> PairSimilarity:
    stats = CoRatingStats.of(ratings.items_of(a), ratings.items_of(b))
    return PairSimilarity(
        pearson=stats.pearson(),
        sim_item=stats.sim_item(),
        sim_con=sim_con(a, b, social),
        sim_deg=sim_deg(a, b, social),
    )
