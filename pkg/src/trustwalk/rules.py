"""Association-rule recommendations for queries no walk could rate.

The visited users' rated-item sets form the transactions. Rules whose
antecedent lies inside the target's own items point at consequent items the
target has not rated; those are kept if the visited raters scored them at or
above the target's interest threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DomainError


@dataclass(frozen=True)
class RuleConfig:
    min_support: float = 0.2
    min_confidence: float = 0.5
    top_k: int = 10
    # itemsets larger than this are not expanded; None mines exhaustively
    max_len: int | None = 3

    def __post_init__(self):
        for name in ("min_support", "min_confidence"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if self.top_k < 1:
            raise DomainError("top_k must be >= 1")
        if self.max_len is not None and self.max_len < 2:
            raise DomainError("max_len must be >= 2")


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset
    consequent: frozenset
    support: float
    confidence: float
    lift: float


@dataclass(frozen=True)
class InterestProfile:
    user: int
    threshold: float
    liked_items: frozenset


@dataclass(frozen=True)
class FallbackRecommendation:
    item: int
    score_evidence: float
    supporting_rule: AssociationRule
    rank_key: tuple

    def line(self) -> str:
        overlap, lift = self.rank_key
        return f"{self.item} {self.score_evidence:.4f} {overlap} {lift:.4f}"


def interest_threshold(user, ratings) -> int:
    """Floor of the user's mean rating."""
    values = list(ratings.items_of(user).values())
    if not values:
        raise DomainError(f"user {user} has no ratings")
    return math.floor(math.fsum(values) / len(values))


def interest_profile(user, ratings) -> InterestProfile:
    threshold = interest_threshold(user, ratings)
    liked = frozenset(i for i, r in ratings.items_of(user).items() if r >= threshold)
    return InterestProfile(user, threshold, liked)


def frequent_itemsets(transactions: Sequence[frozenset], min_support: float,
                      max_len: int | None = None) -> dict[frozenset, int]:
    """Level-wise (Apriori) search; maps each frequent itemset to its count.

    Itemsets must occur at least once, even with ``min_support == 0``.
    """
    n = len(transactions)
    if n == 0:
        raise DomainError("no transactions")

    def frequent(count):
        return count > 0 and count / n >= min_support

    counts: dict[frozenset, int] = {}
    for t in transactions:
        for item in t:
            key = frozenset((item,))
            counts[key] = counts.get(key, 0) + 1
    level = {s: c for s, c in counts.items() if frequent(c)}
    result = dict(level)
    size = 1
    while level and (max_len is None or size < max_len):
        prev = sorted(tuple(sorted(s)) for s in level)
        candidates = set()
        for i, a in enumerate(prev):
            for b in prev[i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = frozenset(a + (b[-1],))
                if all(frozenset(sub) in level for sub in combinations(sorted(cand), size)):
                    candidates.add(cand)
        size += 1
        if not candidates:
            break
        tally = dict.fromkeys(candidates, 0)
        for t in transactions:
            if len(t) < size:
                continue
            for cand in candidates:
                if cand <= t:
                    tally[cand] += 1
        level = {s: c for s, c in tally.items() if frequent(c)}
        result.update(level)
    return result


def mine_rules(transactions: Iterable[Iterable], min_support: float,
               min_confidence: float, max_len: int | None = None) -> list[AssociationRule]:
    """All rules ``A => B`` over frequent itemsets meeting both thresholds."""
    transactions = [frozenset(t) for t in transactions]
    n = len(transactions)
    itemsets = frequent_itemsets(transactions, min_support, max_len)
    rules = []
    for itemset, c_all in itemsets.items():
        if len(itemset) < 2:
            continue
        members = sorted(itemset)
        for r in range(1, len(members)):
            for ante in combinations(members, r):
                ante = frozenset(ante)
                cons = itemset - ante
                c_ante = itemsets[ante]
                c_cons = itemsets[cons]
                confidence = c_all / c_ante
                if confidence < min_confidence:
                    continue
                rules.append(AssociationRule(
                    ante, cons,
                    support=c_all / n,
                    confidence=confidence,
                    lift=(c_all * n) / (c_ante * c_cons),
                ))
    rules.sort(key=_rule_order)
    return rules


def _rule_order(rule):
    return (len(rule.antecedent) + len(rule.consequent), sorted(rule.antecedent),
            sorted(rule.consequent))


def support(itemset, transactions) -> float:
    itemset = frozenset(itemset)
    transactions = list(transactions)
    return sum(1 for t in transactions if itemset <= set(t)) / len(transactions)


def lift(rule: AssociationRule, transactions) -> float | None:
    """Confidence over the consequent's support; None when that support is 0."""
    transactions = list(transactions)
    cons = support(rule.consequent, transactions)
    if cons == 0:
        return None
    both = support(rule.antecedent | rule.consequent, transactions)
    ante = support(rule.antecedent, transactions)
    return (both / ante) / cons


def recommend_fallback(target, visited, ratings, config: RuleConfig | None = None
                       ) -> list[FallbackRecommendation]:
    config = config or RuleConfig()
    own = ratings.items_of(target)
    threshold = interest_threshold(target, ratings)
    others = sorted(v for v in visited if v != target)
    transactions = [frozenset(ratings.items_of(v)) for v in others]
    transactions = [t for t in transactions if t]
    if not transactions:
        return []
    rules = mine_rules(transactions, config.min_support, config.min_confidence, config.max_len)
    rules = [r for r in rules if r.lift >= 1 and r.antecedent <= own.keys()]
    rules.sort(key=lambda r: (-len(r.antecedent), -r.lift, sorted(r.antecedent),
                              sorted(r.consequent)))
    peers = set(others)
    best: dict[int, FallbackRecommendation] = {}
    rejected = set()
    for rule in rules:
        for item in sorted(rule.consequent):
            if item in own or item in best or item in rejected:
                continue
            scores = [r for u, r in ratings.raters_of(item).items() if u in peers]
            evidence = math.fsum(scores) / len(scores) if scores else -math.inf
            if evidence < threshold:
                rejected.add(item)
                continue
            best[item] = FallbackRecommendation(
                item, evidence, rule, (len(rule.antecedent), rule.lift))
    ranked = sorted(best.values(), key=lambda f: (f.rank_key, f.item), reverse=True)
    return ranked[:config.top_k]
