"""Community-structured synthetic datasets for scale and determinism runs.

Users fall into communities. Friendships and rated items are mostly drawn
inside a user's community, and ratings mix user bias, item quality and a
per-community taste, rounded onto the integer 1..5 scale.

    python -m trustwalk.synthetic OUTDIR --users 5000 --seed 7
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .data import Dataset, RatingScale, RatingTable, SocialGraph, write_ratings, write_social


def generate(n_users=5000, community_size=50, friends_per_user=1, ratings_per_user=5,
             community_items=60, tail_items=20000, p_local=0.85, seed=7,
             name="synthetic") -> Dataset:
    rng = np.random.default_rng(seed)
    n_comm = max(1, n_users // community_size)
    community = np.arange(n_users) % n_comm
    members = [np.flatnonzero(community == c) for c in range(n_comm)]

    edges = []
    for u in range(n_users):
        for _ in range(friends_per_user):
            if rng.random() < p_local:
                v = int(rng.choice(members[community[u]]))
            else:
                v = int(rng.integers(n_users))
            if v != u:
                edges.append((u, v))
    social = SocialGraph.from_edges(edges, directed=False, nodes=range(n_users))

    local_base = tail_items
    quality = rng.normal(0, 0.7, size=tail_items + n_comm * community_items)
    taste = rng.normal(0, 0.6, size=(n_comm, community_items))
    bias = rng.normal(0, 0.5, size=n_users)
    table = RatingTable(RatingScale(1, 5, 1))
    for u in range(n_users):
        c = int(community[u])
        k = max(2, int(rng.poisson(ratings_per_user)))
        n_local = int(rng.binomial(k, 0.7))
        local = rng.choice(community_items, size=min(n_local, community_items), replace=False)
        tail = rng.choice(tail_items, size=k - len(local), replace=False)
        for j in local:
            item = local_base + c * community_items + int(j)
            score = 3 + bias[u] + quality[item] + taste[c, j] + rng.normal(0, 0.5)
            table.set(u, item, float(np.clip(np.rint(score), 1, 5)))
        for item in tail:
            score = 3 + bias[u] + quality[item] + rng.normal(0, 0.8)
            table.set(u, int(item), float(np.clip(np.rint(score), 1, 5)))
    return Dataset(table, social, name)


def write_dataset(dataset: Dataset, outdir) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ratings_path = outdir / "ratings.txt"
    social_path = outdir / "social.txt"
    write_ratings(dataset.ratings, ratings_path)
    write_social(dataset.social, social_path)
    return ratings_path, social_path


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir")
    parser.add_argument("--users", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    ratings_path, social_path = write_dataset(generate(args.users, seed=args.seed), args.outdir)
    print(ratings_path)
    print(social_path)


if __name__ == "__main__":
    main()
