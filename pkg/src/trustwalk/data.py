"""Ratings, friendship graph and dataset ingestion.

Both input files are plain text, one record per line, whitespace separated.
Blank lines and lines starting with ``#`` are skipped.

* ratings: ``<user> <item> <rating>``
* social:  ``<user> <user> [0|1]``
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import DomainError, ParseError, ValidationError

_log = logging.getLogger(__name__)

_EMPTY: Mapping = MappingProxyType({})


@dataclass(frozen=True)
class RatingScale:
    """Closed rating interval plus the maximum error used to normalise RMSE.

    ``step == 0`` means ratings are continuous.
    """

    min: float = 1.0
    max: float = 5.0
    step: float = 1.0
    rmse_max: float | None = None

    def __post_init__(self):
        if not self.min < self.max:
            raise DomainError(f"scale min {self.min} must be below max {self.max}")
        if self.step < 0:
            raise DomainError("scale step must be >= 0")
        if self.step > 0:
            n = (self.max - self.min) / self.step
            if abs(n - round(n)) > 1e-9:
                raise DomainError(
                    f"scale span {self.max - self.min} is not a multiple of step {self.step}"
                )
        if self.rmse_max is None:
            object.__setattr__(self, "rmse_max", float(self.max - self.min))
        if not self.rmse_max > 0:
            raise DomainError("rmse_max must be positive")

    def contains(self, value: float) -> bool:
        return self.min <= value <= self.max

    def clamp(self, value: float) -> float:
        return min(max(value, self.min), self.max)


class RatingTable:
    """Sparse (user, item) -> rating map with per-user and per-item indices.

    The read interface (``get``, ``items_of``, ``raters_of``, iteration) is the
    only way the prediction code touches ratings, so views such as
    :class:`MaskedRatings` can stand in for a table.
    """

    def __init__(self, scale: RatingScale | None = None):
        self.scale = scale or RatingScale()
        self._by_user: dict[int, dict[int, float]] = {}
        self._by_item: dict[int, dict[int, float]] = {}
        self._n = 0

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[int, int, float]], scale=None):
        table = cls(scale)
        for user, item, rating in triples:
            table.set(user, item, rating)
        return table

    def set(self, user: int, item: int, rating: float) -> bool:
        """Store a rating; returns True if it replaced an existing one."""
        rating = float(rating)
        if not self.scale.contains(rating):
            raise ValidationError(
                f"rating {rating} outside scale [{self.scale.min}, {self.scale.max}]"
            )
        items = self._by_user.setdefault(user, {})
        replaced = item in items
        if not replaced:
            self._n += 1
        items[item] = rating
        self._by_item.setdefault(item, {})[user] = rating
        return replaced

    def ensure_user(self, user: int) -> None:
        self._by_user.setdefault(user, {})

    def get(self, user: int, item: int) -> float | None:
        return self._by_user.get(user, _EMPTY).get(item)

    def items_of(self, user: int) -> Mapping[int, float]:
        items = self._by_user.get(user)
        return _EMPTY if items is None else MappingProxyType(items)

    def raters_of(self, item: int) -> Mapping[int, float]:
        raters = self._by_item.get(item)
        return _EMPTY if raters is None else MappingProxyType(raters)

    def users(self) -> list[int]:
        return sorted(self._by_user)

    def items(self) -> list[int]:
        return sorted(self._by_item)

    def has_item(self, item: int) -> bool:
        return bool(self._by_item.get(item))

    def __len__(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        for user in sorted(self._by_user):
            items = self._by_user[user]
            for item in sorted(items):
                yield user, item, items[item]

    def __eq__(self, other):
        if not isinstance(other, RatingTable):
            return NotImplemented
        return self.scale == other.scale and list(self) == list(other)

    def check_indices(self) -> bool:
        """True iff the per-item index mirrors the per-user map."""
        forward = {(u, i, r) for u, its in self._by_user.items() for i, r in its.items()}
        backward = {(u, i, r) for i, us in self._by_item.items() for u, r in us.items()}
        return forward == backward and len(forward) == self._n


class MaskedRatings:
    """Read-only view of a rating table with one (user, item) pair hidden."""

    def __init__(self, base, user: int, item: int):
        self.base = base
        self.hidden = (user, item)
        self.scale = base.scale

    def get(self, user, item):
        if (user, item) == self.hidden:
            return None
        return self.base.get(user, item)

    def items_of(self, user):
        items = self.base.items_of(user)
        if user == self.hidden[0] and self.hidden[1] in items:
            return MappingProxyType({i: r for i, r in items.items() if i != self.hidden[1]})
        return items

    def raters_of(self, item):
        raters = self.base.raters_of(item)
        if item == self.hidden[1] and self.hidden[0] in raters:
            return MappingProxyType({u: r for u, r in raters.items() if u != self.hidden[0]})
        return raters

    def users(self):
        return self.base.users()

    def items(self):
        return [i for i in self.base.items() if self.raters_of(i)]

    def has_item(self, item):
        return bool(self.raters_of(item))

    def __len__(self):
        return len(self.base) - (self.base.get(*self.hidden) is not None)

    def __iter__(self):
        for user, item, rating in self.base:
            if (user, item) != self.hidden:
                yield user, item, rating

    def materialize(self) -> RatingTable:
        table = RatingTable.from_triples(self, self.scale)
        for user in self.base.users():
            table.ensure_user(user)
        return table


@dataclass
class SocialGraph:
    """Binary friendship/trust adjacency.

    ``adjacency[u]`` is the sorted tuple of users ``u`` links to. When
    ``directed`` is false the relation is kept symmetric.
    """

    adjacency: dict[int, tuple[int, ...]] = field(default_factory=dict)
    directed: bool = False

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], directed=False, nodes=()):
        adj: dict[int, set[int]] = {u: set() for u in nodes}
        loops = 0
        for a, b in edges:
            if a == b:
                loops += 1
                continue
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set())
            if not directed:
                adj[b].add(a)
        if loops:
            _log.warning("dropped %d self-loop(s)", loops)
        return cls({u: tuple(sorted(vs)) for u, vs in adj.items()}, directed)

    def neighbors(self, user: int) -> tuple[int, ...]:
        return self.adjacency.get(user, ())

    def degree(self, user: int) -> int:
        return len(self.adjacency.get(user, ()))

    def nodes(self) -> list[int]:
        return sorted(self.adjacency)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in sorted(self.adjacency):
            for v in self.adjacency[u]:
                yield u, v

    def n_edges(self) -> int:
        """Number of arcs; an undirected link counts twice."""
        return sum(len(vs) for vs in self.adjacency.values())

    def symmetrized(self) -> "SocialGraph":
        return SocialGraph.from_edges(self.edges(), directed=False, nodes=self.adjacency)

    def is_symmetric(self) -> bool:
        return all(u in self.adjacency.get(v, ()) for u, v in self.edges())


@dataclass
class Dataset:
    ratings: RatingTable
    social: SocialGraph
    name: str = "dataset"

    def __post_init__(self):
        for user in self.social.adjacency:
            self.ratings.ensure_user(user)

    def users(self) -> list[int]:
        return sorted(set(self.ratings.users()) | set(self.social.adjacency))

    def is_empty(self) -> bool:
        return len(self.ratings) == 0 and self.social.n_edges() == 0


def _records(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def _as_id(token, lineno, path):
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"expected integer id, got {token!r}", lineno, path) from None
    if value < 0:
        raise ParseError(f"negative id {value}", lineno, path)
    return value


def load_ratings(path, scale: RatingScale | None = None) -> RatingTable:
    """Read a ratings file; later duplicates of a (user, item) pair win."""
    table = RatingTable(scale)
    duplicates = 0
    for lineno, fields in _records(path):
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", lineno, path)
        user = _as_id(fields[0], lineno, path)
        item = _as_id(fields[1], lineno, path)
        try:
            rating = float(fields[2])
        except ValueError:
            raise ParseError(f"bad rating {fields[2]!r}", lineno, path) from None
        if not math.isfinite(rating):
            raise ParseError(f"bad rating {fields[2]!r}", lineno, path)
        try:
            duplicates += table.set(user, item, rating)
        except ValidationError as exc:
            raise ValidationError(str(exc), lineno, path) from None
    if duplicates:
        _log.warning("%s: %d duplicate rating line(s); kept last occurrence", path, duplicates)
    return table


def load_social(path, directed: bool = False) -> SocialGraph:
    edges = []
    for lineno, fields in _records(path):
        if len(fields) not in (2, 3):
            raise ParseError(f"expected 2 or 3 fields, got {len(fields)}", lineno, path)
        a = _as_id(fields[0], lineno, path)
        b = _as_id(fields[1], lineno, path)
        if len(fields) == 3:
            if fields[2] not in ("0", "1"):
                raise ParseError(f"trust value must be 0 or 1, got {fields[2]!r}", lineno, path)
            if fields[2] == "0":
                continue
        edges.append((a, b))
    return SocialGraph.from_edges(edges, directed=directed)


def load_dataset(ratings_path, social_path=None, scale=None, directed=False, name=None) -> Dataset:
    ratings = load_ratings(ratings_path, scale)
    social = load_social(social_path, directed) if social_path else SocialGraph(directed=directed)
    return Dataset(ratings, social, name or Path(ratings_path).stem)


def write_ratings(table, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for user, item, rating in table:
            fh.write(f"{user} {item} {rating!r}\n")


def write_social(graph: SocialGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in graph.edges():
            if graph.directed or a < b:
                fh.write(f"{a} {b} 1\n")


def sparsity(n_ratings, num_users: int, num_items: int) -> float:
    """Percentage of the user x item grid without a rating.

    ``n_ratings`` may be a count or anything with ``len``.
    """
    if num_users <= 0 or num_items <= 0:
        raise DomainError("sparsity needs at least one user and one item")
    count = n_ratings if isinstance(n_ratings, (int, float)) else len(n_ratings)
    return (1.0 - count / (num_users * num_items)) * 100.0
