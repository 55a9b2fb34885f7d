from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import USER_X_ITEMS, USER_X_RATINGS
from oracles import brute_force_rules
from trustwalk.data import RatingScale, RatingTable
from trustwalk.errors import DomainError
from trustwalk.rules import (AssociationRule, RuleConfig, frequent_itemsets, interest_profile,
                             interest_threshold, lift, mine_rules, recommend_fallback, support)

CORPUS = [set("AB"), set("ABC"), set("BC"), set("AC")]


def find(rules, ante, cons):
    for rule in rules:
        if rule.antecedent == frozenset(ante) and rule.consequent == frozenset(cons):
            return rule
    return None


class TestInterestThreshold:
    def test_user_x(self):
        table = RatingTable.from_triples(
            [(7, i, r) for i, r in zip(USER_X_ITEMS, USER_X_RATINGS)])
        assert interest_threshold(7, table) == 3

    def test_constant(self):
        assert interest_threshold(1, RatingTable.from_triples([(1, 1, 5), (1, 2, 5)])) == 5

    def test_half_step(self):
        table = RatingTable.from_triples([(1, 1, 2.5)], RatingScale(0.5, 4.0, 0.5))
        assert interest_threshold(1, table) == 2

    def test_no_ratings(self):
        with pytest.raises(DomainError):
            interest_threshold(1, RatingTable())

    def test_profile(self):
        table = RatingTable.from_triples(
            [(7, i, r) for i, r in zip(USER_X_ITEMS, USER_X_RATINGS)])
        profile = interest_profile(7, table)
        assert profile.threshold == 3
        assert profile.liked_items == frozenset(USER_X_ITEMS) - {115}


class TestMineRules:
    def test_fixture(self):
        rule = find(mine_rules(CORPUS, 0.0, 0.0), "A", "B")
        assert rule.support == 0.5
        assert rule.confidence == 2 / 3
        assert rule.lift == 8 / 9

    def test_impossible_support(self):
        assert mine_rules(CORPUS, 1.0, 0.0) == []

    def test_singleton_corpus(self):
        rules = mine_rules([{"A", "B"}], 0.0, 0.0)
        assert {(tuple(r.antecedent), tuple(r.consequent)) for r in rules} == {
            (("A",), ("B",)), (("B",), ("A",))}
        assert all((r.support, r.confidence) == (1.0, 1.0) for r in rules)

    def test_empty_corpus(self):
        with pytest.raises(DomainError):
            mine_rules([], 0.1, 0.1)

    def test_bad_thresholds(self):
        with pytest.raises(DomainError):
            RuleConfig(min_support=1.5)
        with pytest.raises(DomainError):
            RuleConfig(top_k=0)

    def test_max_len(self):
        itemsets = frequent_itemsets([frozenset("ABC")] * 3, 0.5, max_len=2)
        assert max(len(s) for s in itemsets) == 2


class TestLift:
    def test_fixture(self):
        rule = find(mine_rules(CORPUS, 0.0, 0.0), "A", "B")
        assert lift(rule, CORPUS) == pytest.approx(8 / 9)

    def test_independent(self):
        corpus = [{"A", "B"}, {"A"}, {"B"}, set()]
        rule = find(mine_rules(corpus, 0.0, 0.0), "A", "B")
        assert rule.lift == 1.0

    def test_nested(self):
        # B only appears with A: lift = 1 / P(A)
        corpus = [{"A", "B"}, {"A"}, {"C"}, {"C"}]
        rule = find(mine_rules(corpus, 0.0, 0.0), "B", "A")
        assert rule.lift == 1 / support({"A"}, corpus) == 2.0

    def test_zero_consequent_support(self):
        rule = AssociationRule(frozenset("A"), frozenset("Z"), 0.0, 0.0, 0.0)
        assert lift(rule, CORPUS) is None


corpora = st.lists(st.frozensets(st.integers(0, 7), max_size=8), min_size=1, max_size=12)
thresholds = st.sampled_from([0.0, 0.1, 0.25, 1 / 3, 0.5, 0.75])


@settings(max_examples=150, deadline=None)
@given(corpora, thresholds, thresholds)
def test_rules_match_enumeration(corpus, min_support, min_confidence):
    mined = {(r.antecedent, r.consequent): r for r in mine_rules(corpus, min_support, min_confidence)}
    expected = brute_force_rules(corpus, min_support, min_confidence)
    assert mined.keys() == expected.keys()
    for key, (sup, conf, lift_value) in expected.items():
        rule = mined[key]
        assert (rule.support, rule.confidence, rule.lift) == (float(sup), float(conf), float(lift_value))


@settings(max_examples=100, deadline=None)
@given(corpora, thresholds)
def test_anti_monotone(corpus, min_support):
    itemsets = frequent_itemsets([frozenset(t) for t in corpus], min_support)
    for itemset, count in itemsets.items():
        assert count == sum(1 for t in corpus if itemset <= t)
        for r in range(1, len(itemset)):
            for sub in combinations(itemset, r):
                assert frozenset(sub) in itemsets


# -- fallback ----------------------------------------------------------------------


def scenario(item70_scores=(4, 3, 5)):
    """User X (id 0) plus visited users who share parts of X's profile and item 70."""
    triples = [(0, i, r) for i, r in zip(USER_X_ITEMS, USER_X_RATINGS)]
    shared = [(27, 33, 115, 178), (27, 33, 115, 178, 203), (33, 115, 178)]
    for user, (items, score) in enumerate(zip(shared, item70_scores), 1):
        triples += [(user, i, 4) for i in items] + [(user, 70, score)]
    triples += [(4, 500, 2), (4, 501, 2)]
    return RatingTable.from_triples(triples)


class TestRecommendFallback:
    def test_item_70(self):
        recs = recommend_fallback(0, {1, 2, 3, 4}, scenario(), RuleConfig())
        assert recs[0].item == 70
        assert recs[0].score_evidence == 4.0
        assert recs[0].supporting_rule.antecedent <= set(USER_X_ITEMS)
        assert recs[0].line().startswith("70 4.0000 ")

    def test_nothing_new(self):
        table = RatingTable.from_triples([(0, 1, 4), (0, 2, 3), (1, 1, 5), (1, 2, 4), (2, 1, 3)])
        assert recommend_fallback(0, {1, 2}, table) == []

    def test_below_threshold_moves_on(self):
        # item 70 averages 2.5 < 3; the next rule's consequent 80 is used instead
        table = scenario(item70_scores=(2, 3, 2.5))
        for user in (1, 2, 3):
            table.set(user, 80, 4)
        recs = recommend_fallback(0, {1, 2, 3}, table, RuleConfig())
        items = [r.item for r in recs]
        assert 70 not in items and 80 in items

    def test_invariants(self):
        table = scenario()
        threshold = interest_threshold(0, table)
        recs = recommend_fallback(0, {0, 1, 2, 3, 4}, table, RuleConfig(min_support=0.0, top_k=50))
        assert recs
        keys = [(r.rank_key, r.item) for r in recs]
        assert keys == sorted(keys, reverse=True)
        for rec in recs:
            assert rec.item not in table.items_of(0)
            assert rec.score_evidence >= threshold
            assert rec.supporting_rule.lift >= 1

    def test_top_k(self):
        table = scenario()
        for extra in range(900, 920):
            for user in (1, 2, 3):
                table.set(user, extra, 5)
        recs = recommend_fallback(0, {1, 2, 3}, table, RuleConfig(top_k=3))
        assert len(recs) == 3

    def test_exact_counts(self):
        recs = recommend_fallback(0, {1, 2, 3, 4}, scenario(), RuleConfig())
        overlap, best_lift = recs[0].rank_key
        assert overlap == len(recs[0].supporting_rule.antecedent)
        assert best_lift == float(Fraction(4, 3))
