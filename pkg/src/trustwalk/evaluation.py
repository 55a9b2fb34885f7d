"""Leave-one-out evaluation and accuracy/coverage metrics."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, MaskedRatings
from .errors import DomainError
from .network import NetworkConfig, TrustNetwork, build_network
from .similarity import pearson
from .walker import FALLBACK, PredictionResult, WalkConfig, predict

_log = logging.getLogger(__name__)


def _check_pair(actual, predicted):
    if len(actual) != len(predicted):
        raise DomainError(f"length mismatch: {len(actual)} vs {len(predicted)}")
    if not len(actual):
        raise DomainError("no predictions to score")


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    _check_pair(actual, predicted)
    return math.fsum(abs(a - p) for a, p in zip(actual, predicted)) / len(actual)


def rmse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    _check_pair(actual, predicted)
    errors = [abs(a - p) for a, p in zip(actual, predicted)]
    top = max(errors)
    if top == 0:
        return 0.0
    # scaling by the largest error keeps a constant offset exact
    return top * math.sqrt(math.fsum((e / top) ** 2 for e in errors) / len(errors))


def precision_from_rmse(rmse_value: float, rmse_max: float) -> float:
    if rmse_max <= 0:
        raise DomainError("rmse_max must be positive")
    return 1.0 - rmse_value / rmse_max


def f_measure(precision: float, coverage_fraction: float) -> float:
    """Harmonic mean of precision and coverage (as a fraction)."""
    if coverage_fraction == 0 or precision == 0:
        return 0.0
    if math.isnan(precision):
        return math.nan
    return 2 * precision * coverage_fraction / (precision + coverage_fraction)


@dataclass(frozen=True)
class EvalConfig:
    fraction: float = 1.0
    seed: int = 42
    walk: WalkConfig = field(default_factory=WalkConfig)
    rmse_max: float | None = None
    max_queries: int | None = None
    threads: int = 1
    fallback_covers: bool = False

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise DomainError("fraction must lie in (0, 1]")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")


@dataclass(frozen=True)
class EvalReport:
    n_tested: int
    n_predicted: int
    mae: float
    rmse: float
    coverage: float
    precision: float
    f_measure: float
    n_covered: int | None = None

    def line(self, dataset: str, fraction: float) -> str:
        return (f"{dataset} {fraction:.4f} {self.n_tested} {self.n_predicted} "
                f"{self.mae:.4f} {self.rmse:.4f} {self.coverage:.4f} "
                f"{self.precision:.4f} {self.f_measure:.4f}")

    def table(self, dataset: str, fraction: float) -> str:
        rows = [
            ("dataset", dataset),
            ("fraction", f"{fraction:.4f}"),
            ("tested", str(self.n_tested)),
            ("predicted", str(self.n_predicted)),
            ("MAE", f"{self.mae:.4f}"),
            ("RMSE", f"{self.rmse:.4f}"),
            ("coverage %", f"{self.coverage:.4f}"),
            ("precision", f"{self.precision:.4f}"),
            ("F-measure", f"{self.f_measure:.4f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def make_report(actual, predicted, n_tested, rmse_max, n_covered=None) -> EvalReport:
    if n_tested <= 0:
        raise DomainError("empty evaluation split")
    n_pred = len(predicted)
    covered = n_pred if n_covered is None else n_covered
    if n_pred:
        m, r = mae(actual, predicted), rmse(actual, predicted)
        prec = precision_from_rmse(r, rmse_max)
    else:
        m = r = prec = math.nan
    coverage = 100.0 * covered / n_tested
    return EvalReport(n_tested, n_pred, m, r, coverage, prec,
                      f_measure(prec, coverage / 100.0), n_covered)


# -- engines -------------------------------------------------------------------
#
# An engine is called as engine(user, item, ratings_view) and returns a
# PredictionResult, a float, or None (uncovered). The view already hides the
# held-out rating.


class WalkerEngine:
    """Random-walk predictor over a network built once from the full data.

    Each query recomputes the edges touching the held-out user against the
    masked view. ``full_rebuild`` instead rebuilds the network from the view.
    """

    def __init__(self, dataset: Dataset, walk: WalkConfig | None = None,
                 network: TrustNetwork | None = None,
                 network_config: NetworkConfig | None = None, full_rebuild=False):
        self.dataset = dataset
        self.walk = walk or WalkConfig()
        self.network_config = network_config or NetworkConfig()
        self.full_rebuild = full_rebuild
        self.network = network
        if network is None and not full_rebuild:
            self.network = build_network(dataset, self.network_config)

    def view_network(self, user, ratings) -> TrustNetwork:
        if self.full_rebuild:
            masked = Dataset(ratings.materialize(), self.dataset.social, self.dataset.name)
            return build_network(masked, self.network_config)
        return self.network.without_rating(user, ratings)

    def __call__(self, user, item, ratings) -> PredictionResult:
        return predict(user, item, self.view_network(user, ratings), ratings, self.walk)


def cf_weighted_offset(source_mean: float, neighbours) -> float | None:
    """``mean + sum w*(r - mean_v) / sum |w|`` over (weight, offset) pairs."""
    neighbours = list(neighbours)
    norm = math.fsum(abs(w) for w, _ in neighbours)
    if not neighbours or norm == 0:
        return None
    return source_mean + math.fsum(w * off for w, off in neighbours) / norm


def _mean(values):
    values = list(values)
    return math.fsum(values) / len(values)


def baseline_cf_pearson(source, item, ratings, k: int = 20) -> float | None:
    """User-based CF over the top-k positively correlated raters of ``item``."""
    own = ratings.items_of(source)
    if not own:
        return None
    scored = []
    for v, r in ratings.raters_of(item).items():
        if v == source:
            continue
        w = pearson(source, v, ratings)
        if w is not None and w > 0:
            scored.append((w, v, r))
    if not scored:
        return None
    scored.sort(key=lambda t: (-t[0], t[1]))
    terms = [(w, r - _mean(ratings.items_of(v).values())) for w, v, r in scored[:k]]
    value = cf_weighted_offset(_mean(own.values()), terms)
    return None if value is None else ratings.scale.clamp(value)


class BaselineEngine:
    def __init__(self, k: int = 20):
        self.k = k

    def __call__(self, user, item, ratings):
        return baseline_cf_pearson(user, item, ratings, self.k)


class OracleEngine:
    """Test hook: answers with the true rating from the unmasked table."""

    def __init__(self, dataset):
        self.base = dataset.ratings

    def __call__(self, user, item, ratings):
        return self.base.get(user, item)


def null_engine(user, item, ratings):
    return None


# -- leave-one-out ---------------------------------------------------------------


def select_queries(dataset: Dataset, config: EvalConfig) -> list[tuple[int, int, float]]:
    """Held-out (user, item, rating) triples for the configured user split."""
    rng = np.random.default_rng(config.seed)
    raters = [u for u in dataset.ratings.users() if dataset.ratings.items_of(u)]
    n_pick = int(round(config.fraction * len(raters)))
    if config.fraction < 1:
        chosen = set(rng.choice(raters, size=n_pick, replace=False).tolist()) if n_pick else set()
    else:
        chosen = set(raters)
    queries = [t for t in dataset.ratings if t[0] in chosen]
    if config.max_queries is not None and len(queries) > config.max_queries:
        keep = np.sort(rng.choice(len(queries), size=config.max_queries, replace=False))
        queries = [queries[i] for i in keep]
    return queries


def _outcome(result):
    """(value or None, covered?) for any engine return type."""
    if isinstance(result, PredictionResult):
        if result.covered:
            return result.value, True
        return None, result.kind == FALLBACK
    return result, False


def loo_evaluate(dataset: Dataset, config: EvalConfig, engine: Callable,
                 view_factory: Callable | None = None) -> EvalReport:
    """Hide each selected rating in turn, ask ``engine`` for it, and score.

    ``view_factory(view)`` may wrap the masked view handed to the engine
    (used to audit reads).
    """
    queries = select_queries(dataset, config)
    if not queries:
        raise DomainError("empty evaluation split")
    rmse_max = config.rmse_max or dataset.ratings.scale.rmse_max

    def run(query):
        user, item, _ = query
        view = MaskedRatings(dataset.ratings, user, item)
        if view_factory is not None:
            view = view_factory(view)
        return _outcome(engine(user, item, view))

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            outcomes = list(pool.map(run, queries))
    else:
        outcomes = [run(q) for q in queries]

    actual, predicted = [], []
    fallback_hits = 0
    for (user, item, truth), (value, fell_back) in zip(queries, outcomes):
        if value is not None:
            actual.append(truth)
            predicted.append(value)
        elif fell_back:
            fallback_hits += 1
    n_covered = len(predicted) + fallback_hits if config.fallback_covers else None
    _log.info("LOO: %d queries, %d predicted", len(queries), len(predicted))
    return make_report(actual, predicted, len(queries), rmse_max, n_covered)
