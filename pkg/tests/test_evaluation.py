import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset
from oracles import AuditedRatings, walk_expectation
from trustwalk.data import MaskedRatings, RatingTable
from trustwalk.errors import DomainError
from trustwalk.evaluation import (BaselineEngine, EvalConfig, OracleEngine, WalkerEngine,
                                  baseline_cf_pearson, cf_weighted_offset, f_measure,
                                  loo_evaluate, mae, make_report, null_engine,
                                  precision_from_rmse, rmse, select_queries)
from trustwalk.synthetic import generate
from trustwalk.walker import WalkConfig


class TestMetrics:
    def test_mae(self):
        assert mae((4, 3, 5), (3.5, 3, 4)) == 0.5
        assert mae((1,), (5,)) == 4.0
        assert mae((2, 3), (2, 3)) == 0.0

    def test_rmse(self):
        assert rmse((4, 3, 5), (3.5, 3, 4)) == pytest.approx(math.sqrt(1.25 / 3), abs=1e-4)
        assert rmse((2, 3), (2, 3)) == 0.0

    @pytest.mark.parametrize("offset", [0.1, 0.3, 1 / 3, 0.7, 2.5])
    @pytest.mark.parametrize("n", [1, 3, 7, 1000])
    def test_constant_offset_exact(self, offset, n):
        assert rmse([0.0] * n, [offset] * n) == offset
        assert rmse([7.0] * n, [7.0 - offset] * n) == abs(7.0 - (7.0 - offset))

    @pytest.mark.parametrize("offset", [0.125, 0.5, 1.5, 3.0])
    def test_constant_offset_on_grid(self, offset):
        actual = [1 + (i % 5) for i in range(999)]
        assert rmse(actual, [a + offset for a in actual]) == offset

    @pytest.mark.parametrize("func", [mae, rmse])
    def test_bad_input(self, func):
        with pytest.raises(DomainError):
            func([], [])
        with pytest.raises(DomainError):
            func([1, 2], [1])

    @pytest.mark.parametrize("value, top, expected", [
        (0.5765, 4, 0.8559), (0.5955, 3, 0.8015), (0.5845, 9, 0.9350)])
    def test_precision(self, value, top, expected):
        assert precision_from_rmse(value, top) == pytest.approx(expected, abs=1e-4)

    def test_precision_negative_reported(self):
        assert precision_from_rmse(5.0, 4.0) == -0.25
        with pytest.raises(DomainError):
            precision_from_rmse(1.0, 0.0)

    def test_f_measure(self):
        assert f_measure(0.8, 0.9) == pytest.approx(0.8471, abs=1e-4)
        assert f_measure(1.0, 0.0) == 0.0
        assert f_measure(0.0, 0.0) == 0.0
        assert math.isnan(f_measure(math.nan, 0.5))


vectors = st.integers(1, 30).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-100, 100), min_size=n, max_size=n),
    st.lists(st.floats(-100, 100), min_size=n, max_size=n)))
unit = st.floats(0.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(vectors)
def test_mae_below_rmse(pair):
    a, p = pair
    assert mae(a, p) <= rmse(a, p) * (1 + 1e-12) + 1e-300


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_f_measure_properties(p, c):
    f = f_measure(p, c)
    assert f == f_measure(c, p)
    assert f <= 2 * min(p, c) + 1e-15
    assert f_measure(p, p) == pytest.approx(p, abs=1e-15)


class TestReport:
    def test_coverage(self):
        report = make_report([4, 3], [4, 3], 4, 4.0)
        assert report.coverage == 50.0 and report.precision == 1.0
        assert report.f_measure == pytest.approx(2 / 3)

    def test_line(self):
        report = make_report([4, 3, 5], [3.5, 3, 4], 3, 4.0)
        assert report.line("ep", 1.0) == (
            "ep 1.0000 3 3 0.5000 0.6455 100.0000 0.8386 0.9122")

    def test_table_aligned(self):
        table = make_report([1], [1], 1, 4.0).table("x", 0.25)
        assert table.splitlines()[0] == "dataset     x"
        assert "F-measure   1.0000" in table

    def test_empty(self):
        with pytest.raises(DomainError):
            make_report([], [], 0, 4.0)


class TestBaseline:
    def test_perfect_proxy(self):
        # same co-rated profile and the same overall mean (3)
        table = RatingTable.from_triples([(1, 1, 2), (1, 2, 4), (2, 1, 2), (2, 2, 4), (2, 3, 3)])
        assert baseline_cf_pearson(1, 3, table) == 3.0

    def test_no_rater(self):
        table = RatingTable.from_triples([(1, 1, 2), (2, 1, 4)])
        assert baseline_cf_pearson(1, 9, table) is None

    def test_two_neighbours(self):
        assert cf_weighted_offset(3.0, [(1.0, 1.0), (0.5, -1.0)]) == pytest.approx(3 + 1 / 3)

    def test_two_neighbours_end_to_end(self):
        # source mean 3; v2 correlates perfectly, v3 partially and sits at its own mean
        table = RatingTable.from_triples([
            (1, 1, 2), (1, 2, 3), (1, 3, 4),
            (2, 1, 2), (2, 2, 3), (2, 3, 4), (2, 9, 4),
            (3, 1, 1), (3, 2, 5), (3, 3, 4), (3, 4, 2), (3, 9, 3),
        ])
        mean3 = 3.0
        w3 = np.corrcoef([2, 3, 4], [1, 5, 4])[0, 1]
        expected = 3 + (1 * (4 - 3.25) + w3 * (3 - mean3)) / (1 + w3)
        assert baseline_cf_pearson(1, 9, table) == pytest.approx(expected)

    def test_clamped(self):
        table = RatingTable.from_triples([(1, 1, 4), (1, 2, 5), (2, 1, 1), (2, 2, 2), (2, 3, 5)])
        assert baseline_cf_pearson(1, 3, table) == 5.0


@pytest.fixture(scope="module")
def small_synthetic():
    return generate(n_users=60, community_size=12, friends_per_user=2, ratings_per_user=4,
                    community_items=8, tail_items=40, seed=3)


FAST = WalkConfig(num_walks=200, max_walks=400, seed=5)


class TestLOO:
    def test_oracle_engine(self, small_synthetic):
        report = loo_evaluate(small_synthetic, EvalConfig(), OracleEngine(small_synthetic))
        assert (report.mae, report.rmse, report.coverage, report.precision) == (0, 0, 100, 1)

    def test_null_engine(self, small_synthetic):
        report = loo_evaluate(small_synthetic, EvalConfig(), null_engine)
        assert report.coverage == 0 and report.f_measure == 0
        assert math.isnan(report.mae) and math.isnan(report.rmse)
        assert "nan" in report.line("x", 1.0)

    def test_empty_split(self):
        with pytest.raises(DomainError, match="empty evaluation split"):
            loo_evaluate(make_dataset([], [(1, 2)]), EvalConfig(), null_engine)

    def test_bad_config(self):
        with pytest.raises(DomainError):
            EvalConfig(fraction=0)
        with pytest.raises(DomainError):
            EvalConfig(threads=0)

    def test_fraction_split(self, small_synthetic):
        config = EvalConfig(fraction=0.25, seed=11)
        queries = select_queries(small_synthetic, config)
        assert queries == select_queries(small_synthetic, config)
        assert len({u for u, _, _ in queries}) == 15
        assert queries != select_queries(small_synthetic, EvalConfig(fraction=0.25, seed=12))

    def test_max_queries(self, small_synthetic):
        queries = select_queries(small_synthetic, EvalConfig(max_queries=10))
        assert len(queries) == 10
        assert queries == sorted(queries, key=list(small_synthetic.ratings).index)

    def test_threads_identical(self, small_synthetic):
        engine = WalkerEngine(small_synthetic, FAST)
        one = loo_evaluate(small_synthetic, EvalConfig(walk=FAST, max_queries=40), engine)
        many = loo_evaluate(small_synthetic, EvalConfig(walk=FAST, max_queries=40, threads=4),
                            engine)
        assert one == many

    def test_overlay_matches_rebuild(self, small_synthetic):
        config = EvalConfig(walk=FAST, max_queries=15)
        fast = loo_evaluate(small_synthetic, config, WalkerEngine(small_synthetic, FAST))
        slow = loo_evaluate(small_synthetic, config,
                            WalkerEngine(small_synthetic, FAST, full_rebuild=True))
        assert fast == slow

    def test_walker_sane(self, small_synthetic):
        report = loo_evaluate(small_synthetic, EvalConfig(walk=FAST),
                              WalkerEngine(small_synthetic, FAST))
        assert 0 < report.coverage <= 100
        assert report.mae <= report.rmse <= 4

    def test_baseline_runs(self, small_synthetic):
        report = loo_evaluate(small_synthetic, EvalConfig(), BaselineEngine())
        assert report.n_predicted <= report.n_tested

    @pytest.mark.parametrize("engine", ["walker", "baseline"])
    def test_no_leak(self, small_synthetic, engine):
        audits = []

        def audit(view):
            audits.append(AuditedRatings(view))
            return audits[-1]

        eng = WalkerEngine(small_synthetic, FAST) if engine == "walker" else BaselineEngine()
        loo_evaluate(small_synthetic, EvalConfig(walk=FAST, max_queries=60), eng, audit)
        assert len(audits) == 60
        assert sum(a.reads for a in audits) > 0
        assert [v for a in audits for v in a.violations] == []

    def test_audit_detects_leak(self, small_synthetic):
        user, item, _ = next(iter(small_synthetic.ratings))
        leaky = AuditedRatings(MaskedRatings(small_synthetic.ratings, user, item))
        leaky._view = small_synthetic.ratings
        leaky.get(user, item)
        assert leaky.violations


def eight_node_dataset():
    """Eight users on a ring with chords; every user rates a few shared items."""
    triples = [
        (0, 1, 4), (0, 2, 3), (0, 3, 5),
        (1, 1, 5), (1, 2, 3), (1, 4, 2),
        (2, 1, 3), (2, 3, 4), (2, 4, 1),
        (3, 2, 2), (3, 3, 5), (3, 5, 4),
        (4, 1, 4), (4, 5, 3), (4, 6, 2),
        (5, 2, 4), (5, 4, 3), (5, 6, 5),
        (6, 3, 2), (6, 5, 5), (6, 6, 4),
        (7, 1, 1), (7, 4, 4), (7, 6, 3),
    ]
    ring = [(i, (i + 1) % 8) for i in range(8)] + [(0, 4), (2, 6)]
    return make_dataset(triples, ring)


def test_loo_mae_matches_markov_oracle():
    dataset = eight_node_dataset()
    walk = WalkConfig(num_walks=10_000, max_walks=10_000, convergence_epsilon=0.0, seed=21)
    engine = WalkerEngine(dataset, walk)
    queries = list(dataset.ratings)
    exact, bound, predicted, actual = [], 0.0, [], []
    for user, item, truth in queries:
        view = MaskedRatings(dataset.ratings, user, item)
        net = engine.view_network(user, view)
        adjacency = np.zeros((net.n_nodes, net.n_nodes), bool)
        for edge in net.iter_edges():
            adjacency[net.index_of(edge.source), net.index_of(edge.target)] = True
        rated = {net.index_of(v): r for v, r in view.raters_of(item).items()}
        p_rated, mean, var = walk_expectation(net.weight_matrix(), net.index_of(user), rated,
                                              walk.max_depth, walk.bias_mode, adjacency)
        result = engine(user, item, view)
        if p_rated == 0:
            assert not result.covered
            continue
        assert result.covered
        se = math.sqrt(var / result.walks_rated)
        assert abs(result.value - mean) <= 4 * se + 1e-12
        exact.append(mean)
        predicted.append(result.value)
        actual.append(truth)
        bound += 4 * se
    assert len(predicted) >= 18
    report = loo_evaluate(dataset, EvalConfig(walk=walk), engine)
    assert report.mae == pytest.approx(mae(actual, predicted), abs=1e-12)
    assert abs(report.mae - mae(actual, exact)) <= bound / len(exact)
