"""Biased random-walk rating prediction over a trust network.

A walk starts at the active user. At every node after the first it returns
the node's rating of the target item if there is one; otherwise, it may stop
with a probability that grows with the step count and with the weight of
the edge it just crossed, and it otherwise moves to a neighbour drawn in
proportion to trust. Walks never make more than ``max_depth`` moves.

Walks of one query are simulated together with numpy. Every random draw
comes from :mod:`trustwalk.streams`, keyed by (seed, user, item, walk index,
step), so results do not depend on batching or worker count.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SinkError
from .streams import WalkStream, derive_key, uniform_array, walk_keys

_log = logging.getLogger(__name__)

DIRECTIONAL = "directional"
SYMMETRIC = "symmetric-cci"
BIAS_MODES = (DIRECTIONAL, SYMMETRIC)

RATED = "rated"
STOPPED = "stopped"
DEPTH_EXHAUSTED = "depth_exhausted"
_KIND_CODES = {0: RATED, 1: STOPPED, 2: DEPTH_EXHAUSTED}

PREDICTED = "predicted"
FALLBACK = "fallback"
CANNOT_COVER = "cannot_cover"
KNOWN = "known"

_BATCH = 256
_WINDOW = 100
_MIN_RATED = 200


@dataclass(frozen=True)
class WalkConfig:
    max_depth: int = 6
    num_walks: int = 1000
    convergence_epsilon: float = 0.001
    max_walks: int = 10000
    seed: int = 42
    bias_mode: str = SYMMETRIC

    def __post_init__(self):
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.num_walks < 1 or self.max_walks < 1:
            raise DomainError("walk counts must be positive")
        if self.num_walks > self.max_walks:
            raise DomainError(f"num_walks {self.num_walks} exceeds max_walks {self.max_walks}")
        if self.convergence_epsilon < 0:
            raise DomainError("convergence_epsilon must be >= 0")
        if self.bias_mode not in BIAS_MODES:
            raise DomainError(f"unknown bias mode {self.bias_mode!r}")


@dataclass(frozen=True)
class WalkOutcome:
    kind: str
    rating: float | None
    visited: tuple[int, ...]
    positive_pearson_seen: bool


@dataclass
class PredictionResult:
    kind: str
    value: float | None = None
    walks_run: int = 0
    walks_rated: int = 0
    visited_union: frozenset = frozenset()
    positive_seen: bool = False
    fallback_candidates: list = field(default_factory=list)

    @property
    def covered(self) -> bool:
        return self.kind in (PREDICTED, KNOWN)


def sigmoid(t: float) -> float:
    return 1.0 / (1.0 + math.exp(-t))


def stop_probability(edge_weight_scaled: float, k: int) -> float:
    """Chance of halting at step ``k`` after crossing an edge of scaled weight."""
    return min(max(edge_weight_scaled * sigmoid(k), 0.0), 1.0)


def step_distribution(u, network, mode: str = SYMMETRIC) -> dict[int, float]:
    """Probability of moving from ``u`` to each of its neighbours.

    ``directional`` normalises the out-weights of ``u``. ``symmetric-cci``
    scores a neighbour ``v`` by ``W_uv / sum_u + W_vu / sum_v`` and
    normalises those scores.
    """
    i = network.index_of(u)
    lo, hi = network.indptr[i], network.indptr[i + 1]
    edges = [e for e in range(lo, hi) if network.present[e]]
    weights = [float(network.weight[e]) for e in edges]
    if mode == DIRECTIONAL:
        scores = weights
    elif mode == SYMMETRIC:
        out_u = sum(weights)
        scores = []
        for e, w in zip(edges, weights):
            forward = w / out_u if out_u > 0 else 0.0
            backward = 0.0
            r = network.rev[e]
            if r >= 0 and network.present[r]:
                j = network.dest[e]
                row = slice(network.indptr[j], network.indptr[j + 1])
                out_v = float(network.weight[row][network.present[row]].sum())
                if out_v > 0:
                    backward = float(network.weight[r]) / out_v
            scores.append(forward + backward)
    else:
        raise DomainError(f"unknown bias mode {mode!r}")
    total = sum(scores)
    if not edges or total <= 0:
        raise SinkError(f"user {u} has no out-edge with positive score")
    users = network.users
    return {int(users[network.dest[e]]): s / total for e, s in zip(edges, scores)}


class StepTables:
    """Flattened sampling tables for one network and bias mode.

    ``key[e] = row(e) + cumulative share of e within its row``; a draw ``x``
    in ``[0, 1)`` from node ``c`` picks the first edge whose key exceeds
    ``c + x``.
    """

    def __init__(self, network, mode):
        n = network.n_nodes
        src = network.source
        w = np.where(network.present, network.weight, 0.0)
        out_sum = np.bincount(src, weights=w, minlength=n)
        if mode == DIRECTIONAL:
            score = w
        elif mode == SYMMETRIC:
            with np.errstate(divide="ignore", invalid="ignore"):
                share = np.where(out_sum[src] > 0, w / out_sum[src], 0.0)
            rev = network.rev
            score = share + np.where(rev >= 0, share[np.maximum(rev, 0)], 0.0)
            score = np.where(network.present, score, 0.0)
        else:
            raise DomainError(f"unknown bias mode {mode!r}")
        indptr = network.indptr
        glob = np.concatenate([[0.0], np.cumsum(score)])
        base = glob[indptr[:-1]][src]
        total = (glob[indptr[1:]] - glob[indptr[:-1]])
        self.sink = ~(total > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            within = (glob[1:] - base) / total[src]
        within = np.where(self.sink[src], 0.0, within)
        self.key = src + within
        positive = np.flatnonzero(score > 0)
        last = np.full(n, -1, dtype=np.int64)
        np.maximum.at(last, src[positive], positive)
        self.last = last
        self.start = indptr[:-1]
        self.dest = network.dest
        self.weight = w

    def pick(self, nodes, draws):
        e = np.searchsorted(self.key, nodes + draws, side="right")
        return np.maximum(np.minimum(e, self.last[nodes]), self.start[nodes])


def step_tables(network, mode) -> StepTables:
    tables = network.cache.get(("steps", mode))
    if tables is None:
        tables = StepTables(network, mode)
        network.cache[("steps", mode)] = tables
    return tables


def single_walk(source, item, network, ratings, config: WalkConfig, stream: WalkStream) -> WalkOutcome:
    """One walk, step by step; matches the batched simulation draw for draw."""
    tables = step_tables(network, config.bias_mode)
    users = network.users
    s = network.index_of(source)
    positive = network.positive_neighbors(source)
    cur, k, arrived = s, 0, 0.0
    visited = [source]
    seen = False
    while True:
        if k > 0 and cur != s:
            r = ratings.get(int(users[cur]), item)
            if r is not None:
                return WalkOutcome(RATED, r, tuple(visited), seen)
        if k == config.max_depth:
            return WalkOutcome(DEPTH_EXHAUSTED, None, tuple(visited), seen)
        if k > 0 and stream.uniform(k, 0) < stop_probability(arrived / 4.0, k):
            return WalkOutcome(STOPPED, None, tuple(visited), seen)
        if tables.sink[cur]:
            return WalkOutcome(DEPTH_EXHAUSTED, None, tuple(visited), seen)
        draw = np.array([stream.uniform(k, 1)])
        e = int(tables.pick(np.array([cur]), draw)[0])
        cur = int(tables.dest[e])
        arrived = float(tables.weight[e])
        visited.append(int(users[cur]))
        seen = seen or bool(positive[cur])
        k += 1


@dataclass
class WalkBatch:
    """Per-walk results of a simulation; ``path`` holds node indices, -1 padded."""

    kind: np.ndarray
    value: np.ndarray
    positive_seen: np.ndarray
    path: np.ndarray

    def outcome(self, w, users) -> WalkOutcome:
        nodes = self.path[w][self.path[w] >= 0]
        value = None if np.isnan(self.value[w]) else float(self.value[w])
        return WalkOutcome(_KIND_CODES[int(self.kind[w])], value,
                           tuple(int(users[x]) for x in nodes), bool(self.positive_seen[w]))

    @property
    def rated(self) -> np.ndarray:
        return self.kind == 0


def _rated_vector(network, ratings, item, source_index):
    rated = np.full(network.n_nodes, np.nan)
    for user, r in ratings.raters_of(item).items():
        if user in network:
            rated[network.index_of(user)] = r
    rated[source_index] = np.nan
    return rated


def _simulate(tables, s, rated, positive, depth, query_key, first, last) -> WalkBatch:
    size = last - first
    keys = walk_keys(query_key, np.arange(first, last))
    cur = np.full(size, s, dtype=np.int64)
    arrived = np.zeros(size)
    kind = np.full(size, -1, dtype=np.int8)
    value = np.full(size, np.nan)
    seen = np.zeros(size, bool)
    path = np.full((size, depth + 1), -1, dtype=np.int64)
    path[:, 0] = s
    active = np.arange(size)
    for k in range(depth + 1):
        if k > 0:
            r = rated[cur[active]]
            hit = ~np.isnan(r)
            kind[active[hit]] = 0
            value[active[hit]] = r[hit]
            active = active[~hit]
        if k == depth:
            kind[active] = 2
            break
        if k > 0:
            p = np.clip(arrived[active] / 4.0 * sigmoid(k), 0.0, 1.0)
            stop = uniform_array(keys[active], k, 0) < p
            kind[active[stop]] = 1
            active = active[~stop]
        nodes = cur[active]
        sunk = tables.sink[nodes]
        kind[active[sunk]] = 2
        active = active[~sunk]
        nodes = nodes[~sunk]
        if not active.size:
            break
        e = tables.pick(nodes, uniform_array(keys[active], k, 1))
        nxt = tables.dest[e]
        cur[active] = nxt
        arrived[active] = tables.weight[e]
        path[active, k + 1] = nxt
        seen[active] |= positive[nxt]
    return WalkBatch(kind, value, seen, path)


def simulate(source, item, network, ratings, config: WalkConfig, first=0, last=None) -> WalkBatch:
    """Run walks ``first .. last-1`` of the query (source, item)."""
    last = config.num_walks if last is None else last
    s = network.index_of(source)
    tables = step_tables(network, config.bias_mode)
    rated = _rated_vector(network, ratings, item, s)
    positive = network.positive_neighbors(source)
    key = derive_key(config.seed, source, item)
    return _simulate(tables, s, rated, positive, config.max_depth, key, first, last)


def _converged_at(rated, values, eps) -> int | None:
    """First walk count at which the running rated mean has settled."""
    n = len(rated)
    if eps <= 0 or n <= _WINDOW:
        return None
    count = np.cumsum(rated)
    total = np.cumsum(np.where(rated, values, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = total / count
    now = np.arange(_WINDOW, n)
    then = now - _WINDOW
    ok = (count[now] >= _MIN_RATED) & (count[then] > 0)
    ok &= np.abs(mean[now] - mean[then]) < eps
    hits = np.flatnonzero(ok)
    return int(now[hits[0]]) + 1 if hits.size else None


def predict(source, item, network, ratings, config: WalkConfig | None = None,
            rules=None) -> PredictionResult:
    """Predict ``source``'s rating of ``item`` from repeated walks.

    ``rules`` (a :class:`trustwalk.rules.RuleConfig`) enables association-rule
    candidates when no walk found a rating but some visited user correlates
    positively with ``source``.
    """
    config = config or WalkConfig()
    s = network.index_of(source)
    known = ratings.get(source, item)
    if known is not None:
        return PredictionResult(KNOWN, float(known))
    tables = step_tables(network, config.bias_mode)
    rated = _rated_vector(network, ratings, item, s)
    positive = network.positive_neighbors(source)
    key = derive_key(config.seed, source, item)

    batches = []
    done = config.num_walks
    first = 0
    while first < config.num_walks:
        last = min(first + _BATCH, config.num_walks)
        batches.append(_simulate(tables, s, rated, positive, config.max_depth, key, first, last))
        first = last
        flags = np.concatenate([b.rated for b in batches])
        values = np.concatenate([b.value for b in batches])
        stop_at = _converged_at(flags, values, config.convergence_epsilon)
        if stop_at is not None:
            done = stop_at
            break
    flags = np.concatenate([b.rated for b in batches])[:done]
    values = np.concatenate([b.value for b in batches])[:done]
    seen = np.concatenate([b.positive_seen for b in batches])[:done]
    path = np.concatenate([b.path for b in batches])[:done]
    nodes = np.unique(path[path >= 0])
    visited = frozenset(int(u) for u in network.users[nodes])
    n_rated = int(flags.sum())
    any_positive = bool(seen.any())

    if n_rated:
        mean = math.fsum(values[flags]) / n_rated
        return PredictionResult(PREDICTED, ratings.scale.clamp(mean), done, n_rated,
                                visited, any_positive)
    if any_positive:
        candidates = []
        if rules is not None:
            from .rules import recommend_fallback

            candidates = recommend_fallback(source, visited - {source}, ratings, rules)
        return PredictionResult(FALLBACK, None, done, 0, visited, True, candidates)
    return PredictionResult(CANNOT_COVER, None, done, 0, visited, False)
