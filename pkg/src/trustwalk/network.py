"""Weighted trust network over users.

Two users are linked when they are friends, co-rated at least one item, or
share at least one friend. Each directed edge ``a -> b`` carries three
components

* ``alpha1``: item similarity of the pair, kept only when their rating
  correlation is positive,
* ``alpha2``: share of ``a``'s friends that ``b`` also has,
* ``alpha3``: H-index impact of the destination ``b``,

each min-max scaled over all edges (unless raw mode), and the weight
``2*alpha1 + alpha2 + alpha3``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .centrality import all_impact_factors, impact_factor
from .errors import DomainError, UnknownEntityError
from .similarity import CoRatingStats, mutual_friends, sim_con

_log = logging.getLogger(__name__)

POSITIVE = "positive"
NONPOSITIVE = "nonpositive"
UNDEFINED = "undefined"
_SIGN_NAMES = {1: POSITIVE, 0: NONPOSITIVE, -1: UNDEFINED}


@dataclass(frozen=True)
class NetworkConfig:
    raw_weights: bool = False


@dataclass(frozen=True)
class NormRecord:
    """Per-component (min, max) over existing edges, used for scaling."""

    mins: tuple[float, float, float]
    maxs: tuple[float, float, float]


@dataclass(frozen=True)
class TrustEdge:
    source: int
    target: int
    alpha1: float
    alpha2: float
    alpha3: float
    weight: float
    pearson_sign: str = UNDEFINED


def _sign_code(p) -> int:
    if p is None:
        return -1
    return 1 if p > 0 else 0


def _scale_component(raw, lo, hi):
    raw = np.asarray(raw, dtype=float)
    if hi > lo:
        return (raw - lo) / (hi - lo)
    return np.where(raw > 0, 1.0, 0.0)


def scale_value(raw: float, lo: float, hi: float) -> float:
    return float(_scale_component(raw, lo, hi))


def edge_exists(a, b, ratings, social) -> bool:
    """Union of the three linking criteria; symmetric in ``a`` and ``b``."""
    if a == b:
        return False
    if b in social.neighbors(a) or a in social.neighbors(b):
        return True
    if mutual_friends(a, b, social) > 0:
        return True
    return not ratings.items_of(a).keys().isdisjoint(ratings.items_of(b).keys())


def raw_components(a, b, ratings, social, impact=None):
    """Unscaled (alpha1, alpha2, alpha3) and the pearson sign code."""
    stats = CoRatingStats.of(ratings.items_of(a), ratings.items_of(b))
    code = _sign_code(stats.pearson())
    a1 = stats.sim_item() if code == 1 else 0.0
    a2 = sim_con(a, b, social) or 0.0
    a3 = impact_factor(b, social) if impact is None else impact
    return (float(a1), float(a2), float(a3)), code


def compute_edge_weight(a, b, dataset, norms: NormRecord | None) -> TrustEdge:
    """Weight of edge ``a -> b`` computed pair by pair.

    ``norms=None`` selects raw mode (no scaling).
    """
    raw, code = raw_components(a, b, dataset.ratings, dataset.social)
    if norms is None:
        alphas = raw
    else:
        alphas = tuple(
            scale_value(r, lo, hi) for r, lo, hi in zip(raw, norms.mins, norms.maxs)
        )
    weight = 2.0 * alphas[0] + alphas[1] + alphas[2]
    return TrustEdge(a, b, *alphas, weight, _SIGN_NAMES[code])


class TrustNetwork:
    """Directed weighted graph in CSR layout, rows and columns sorted by user id.

    ``present`` marks edges that exist; an absent slot keeps the CSR shape
    when a rating mask removes an edge, and always has zero weight.
    """

    def __init__(self, users, indptr, dest, alpha_raw, pearson_sign,
                 structural=None, present=None, raw=False):
        self.users = np.asarray(users, dtype=np.int64)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.dest = np.asarray(dest, dtype=np.int64)
        self.alpha_raw = np.asarray(alpha_raw, dtype=float).reshape(-1, 3)
        self.pearson_sign = np.asarray(pearson_sign, dtype=np.int8)
        n_edges = len(self.dest)
        self.structural = (np.ones(n_edges, bool) if structural is None
                           else np.asarray(structural, bool))
        self.present = np.ones(n_edges, bool) if present is None else np.asarray(present, bool)
        self.raw = raw
        self._index = {int(u): i for i, u in enumerate(self.users)}
        self.source = np.repeat(np.arange(len(self.users)), np.diff(self.indptr))
        self.rev = self._reverse_index()
        self._finish()
        self.cache: dict = {}

    # -- construction helpers -------------------------------------------------

    def _reverse_index(self):
        n = len(self.users)
        keys = self.source * n + self.dest
        back = self.dest * n + self.source
        pos = np.searchsorted(keys, back)
        pos = np.minimum(pos, max(len(keys) - 1, 0))
        found = keys[pos] == back if len(keys) else np.zeros(0, bool)
        return np.where(found, pos, -1)

    def _finish(self):
        live = self.present
        self.alpha = np.zeros_like(self.alpha_raw)
        if self.raw:
            self.norms = None
            self.alpha[live] = self.alpha_raw[live]
        else:
            if live.any():
                mins = self.alpha_raw[live].min(axis=0)
                maxs = self.alpha_raw[live].max(axis=0)
            else:
                mins = maxs = np.zeros(3)
            self.norms = NormRecord(tuple(map(float, mins)), tuple(map(float, maxs)))
            for c in range(3):
                self.alpha[live, c] = _scale_component(self.alpha_raw[live, c], mins[c], maxs[c])
        self.weight = 2.0 * self.alpha[:, 0] + self.alpha[:, 1] + self.alpha[:, 2]

    @classmethod
    def from_weighted_edges(cls, edges: Iterable[tuple[int, int, float]], nodes=()):
        """Raw-mode network with the given weights (each alpha set to w/4)."""
        edges = {(int(a), int(b)): float(w) for a, b, w in edges if a != b}
        users = sorted(set(nodes) | {u for e in edges for u in e})
        index = {u: i for i, u in enumerate(users)}
        order = sorted(edges, key=lambda e: (index[e[0]], index[e[1]]))
        counts = np.bincount([index[a] for a, _ in order], minlength=len(users))
        indptr = np.concatenate([[0], np.cumsum(counts)])
        dest = [index[b] for _, b in order]
        w = np.array([edges[e] for e in order], dtype=float) / 4.0
        alpha_raw = np.repeat(w[:, None], 3, axis=1)
        return cls(users, indptr, dest, alpha_raw, np.full(len(order), -1), raw=True)

    # -- queries ----------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.users)

    @property
    def n_edges(self) -> int:
        return int(self.present.sum())

    def __contains__(self, user) -> bool:
        return user in self._index

    def index_of(self, user) -> int:
        try:
            return self._index[user]
        except KeyError:
            raise UnknownEntityError(f"unknown user {user}") from None

    def _edge(self, e) -> TrustEdge:
        a1, a2, a3 = self.alpha[e]
        return TrustEdge(int(self.users[self.source[e]]), int(self.users[self.dest[e]]),
                         float(a1), float(a2), float(a3), float(self.weight[e]),
                         _SIGN_NAMES[int(self.pearson_sign[e])])

    def out_edges(self, user) -> list[TrustEdge]:
        i = self.index_of(user)
        return [self._edge(e) for e in range(self.indptr[i], self.indptr[i + 1])
                if self.present[e]]

    def edge(self, a, b) -> TrustEdge | None:
        i, j = self.index_of(a), self.index_of(b)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        e = lo + np.searchsorted(self.dest[lo:hi], j)
        if e < hi and self.dest[e] == j and self.present[e]:
            return self._edge(e)
        return None

    def iter_edges(self) -> Iterator[TrustEdge]:
        for e in np.flatnonzero(self.present):
            yield self._edge(e)

    def export_lines(self) -> Iterator[str]:
        for e in np.flatnonzero(self.present):
            a1, a2, a3 = self.alpha[e]
            yield (f"{self.users[self.source[e]]} {self.users[self.dest[e]]} "
                   f"{a1:.6f} {a2:.6f} {a3:.6f} {self.weight[e]:.6f}")

    def write_export(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.export_lines():
                fh.write(line + "\n")

    def weight_matrix(self) -> np.ndarray:
        """Dense weight matrix; for small graphs and checks only."""
        m = np.zeros((self.n_nodes, self.n_nodes))
        live = self.present
        m[self.source[live], self.dest[live]] = self.weight[live]
        return m

    def positive_neighbors(self, user) -> np.ndarray:
        """Boolean mask over nodes: positively correlated with ``user``."""
        i = self.index_of(user)
        mask = np.zeros(self.n_nodes, bool)
        sl = slice(self.indptr[i], self.indptr[i + 1])
        hit = (self.pearson_sign[sl] == 1) & self.present[sl]
        mask[self.dest[sl][hit]] = True
        return mask

    # -- rating masks -------------------------------------------------------------

    def without_rating(self, user, ratings) -> "TrustNetwork":
        """Copy with every rating-dependent term touching ``user`` recomputed.

        ``ratings`` is the (masked) view the copy should reflect. Only edges
        incident to ``user`` depend on its ratings; scaling is then redone
        over the surviving edges, which matches a full rebuild.
        """
        i = self.index_of(user)
        alpha_raw = self.alpha_raw.copy()
        sign = self.pearson_sign.copy()
        present = self.present.copy()
        mine = ratings.items_of(user)
        for e in range(self.indptr[i], self.indptr[i + 1]):
            other = int(self.users[self.dest[e]])
            stats = CoRatingStats.of(mine, ratings.items_of(other))
            code = _sign_code(stats.pearson())
            a1 = stats.sim_item() if code == 1 else 0.0
            alive = bool(self.structural[e]) or stats.n > 0
            for slot in (e, self.rev[e]):
                if slot < 0:
                    continue
                alpha_raw[slot, 0] = a1
                sign[slot] = code
                present[slot] = alive
        clone = object.__new__(TrustNetwork)
        clone.__dict__.update(self.__dict__)
        clone.alpha_raw = alpha_raw
        clone.pearson_sign = sign
        clone.present = present
        clone.cache = {}
        clone._finish()
        return clone


def _gather(matrix, rows, cols):
    if matrix is None or not len(rows):
        return np.zeros(len(rows))
    return np.asarray(matrix[rows, cols]).ravel().astype(float)


def build_network(dataset, config: NetworkConfig | None = None) -> TrustNetwork:
    """Build the full trust network for ``dataset``."""
    config = config or NetworkConfig()
    if dataset.is_empty():
        raise DomainError("empty dataset")
    users = dataset.users()
    n = len(users)
    index = {u: i for i, u in enumerate(users)}

    social = dataset.social
    s_rows = [index[a] for a, _ in social.edges()]
    s_cols = [index[b] for _, b in social.edges()]
    adj = sp.csr_matrix((np.ones(len(s_rows)), (s_rows, s_cols)), shape=(n, n))
    link = (adj + adj.T).tocsr()
    mutual = (adj @ adj.T).tocsr()

    triples = list(dataset.ratings)
    pattern = link + mutual
    co = sa_mat = saa_mat = sab_mat = None
    if triples:
        items = sorted({i for _, i, _ in triples})
        col = {it: j for j, it in enumerate(items)}
        r_rows = np.array([index[u] for u, _, _ in triples])
        r_cols = np.array([col[i] for _, i, _ in triples])
        vals = np.array([r for _, _, r in triples], dtype=float)
        shape = (n, len(items))
        rmat = sp.csr_matrix((vals, (r_rows, r_cols)), shape=shape)
        bmat = sp.csr_matrix((np.ones_like(vals), (r_rows, r_cols)), shape=shape)
        r2mat = sp.csr_matrix((vals * vals, (r_rows, r_cols)), shape=shape)
        co = (bmat @ bmat.T).tocsr()
        sa_mat = (rmat @ bmat.T).tocsr()
        saa_mat = (r2mat @ bmat.T).tocsr()
        sab_mat = (rmat @ rmat.T).tocsr()
        pattern = pattern + co
    pattern = sp.csr_matrix(pattern)
    pattern.setdiag(0)
    pattern.eliminate_zeros()
    pattern.sort_indices()
    indptr = pattern.indptr.astype(np.int64)
    dest = pattern.indices.astype(np.int64)
    rows = np.repeat(np.arange(n), np.diff(indptr))

    cnt = _gather(co, rows, dest)
    sa, sb = _gather(sa_mat, rows, dest), _gather(sa_mat, dest, rows)
    saa, sbb = _gather(saa_mat, rows, dest), _gather(saa_mat, dest, rows)
    sab = _gather(sab_mat, rows, dest)
    var_a = cnt * saa - sa * sa
    var_b = cnt * sbb - sb * sb
    defined = (cnt >= 2) & (var_a > 0) & (var_b > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = (cnt * sab - sa * sb) / (np.sqrt(var_a) * np.sqrt(var_b))
        item_sim = np.where(cnt > 0, (sa + sb) / cnt, 0.0)
    sign = np.where(defined, np.where(corr > 0, 1, 0), -1).astype(np.int8)

    deg = np.diff(adj.indptr).astype(float)
    n_mutual = _gather(mutual, rows, dest)
    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(deg[rows] > 0, n_mutual / deg[rows], 0.0)
    impact = all_impact_factors(social, users)
    impact_arr = np.array([impact[u] for u in users])

    alpha_raw = np.column_stack([
        np.where(sign == 1, item_sim, 0.0),
        share,
        impact_arr[dest],
    ])
    structural = (_gather(link, rows, dest) > 0) | (n_mutual > 0)
    net = TrustNetwork(users, indptr, dest, alpha_raw, sign, structural,
                       raw=config.raw_weights)
    _log.info("trust network: %d nodes, %d edges", net.n_nodes, net.n_edges)
    return net
