"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 cannot cover,
3 unknown user or item, 4 data validation error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .centrality import all_scores
from .data import RatingScale, load_dataset, sparsity
from .errors import DataError, DomainError, UnknownEntityError
from .evaluation import (BaselineEngine, EvalConfig, OracleEngine, WalkerEngine,
                         loo_evaluate, null_engine)
from .network import NetworkConfig, build_network
from .rules import RuleConfig
from .walker import CANNOT_COVER, FALLBACK, KNOWN, PREDICTED, WalkConfig, predict

EXIT_OK, EXIT_USAGE, EXIT_CANNOT_COVER, EXIT_UNKNOWN, EXIT_DATA = 0, 1, 2, 3, 4
DEFAULT_SEED = 42

_log = logging.getLogger("trustwalk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_BOOL_KEYS = {"directed", "raw_weights", "baseline", "verbose"}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; keys use flag names with - or _."""
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key in _BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{path}:{lineno}: {key} expects a boolean")
            values[key] = value.lower() in ("true", "1", "yes")
        else:
            values[key] = value
    return values


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--ratings", help="ratings file: user item rating")
    p.add_argument("--social", help="social file: user user [0|1]")
    p.add_argument("--directed", action="store_true", help="keep social links directed")
    p.add_argument("--name", help="dataset name used in reports")
    p.add_argument("--scale-min", type=float, default=1.0)
    p.add_argument("--scale-max", type=float, default=5.0)
    p.add_argument("--scale-step", type=float, default=1.0)
    p.add_argument("--rmse-max", type=float, help="defaults to scale max - min")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--walks", type=int, default=1000)
    p.add_argument("--max-walks", type=int, default=10000)
    p.add_argument("--epsilon", type=float, default=0.001,
                   help="convergence threshold for early stopping; 0 disables")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--bias-mode", choices=["symmetric-cci", "directional"],
                   default="symmetric-cci")
    p.add_argument("--raw-weights", action="store_true")
    p.add_argument("--min-support", type=float, default=0.2)
    p.add_argument("--min-confidence", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--max-rule-len", type=int, default=3,
                   help="largest itemset expanded by the fallback miner (0 = unbounded)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def make_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="trustwalk", description="Trust-network rating prediction.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build and export the trust network")
    p = sub.add_parser("predict", parents=[common], help="predict one rating")
    p.add_argument("user", type=int)
    p.add_argument("item", type=int)
    p = sub.add_parser("evaluate", parents=[common], help="leave-one-out evaluation")
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--max-queries", type=int)
    p.add_argument("--baseline", action="store_true", help="also run the Pearson CF baseline")
    p.add_argument("--engine", choices=["walker", "oracle", "null"], default="walker",
                   help=argparse.SUPPRESS)
    sub.add_parser("centrality", parents=[common], help="per-user H-index impact")
    sub.add_parser("stats", parents=[common], help="dataset statistics")
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = make_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config(known.config)
        for action in parser._subparsers._group_actions:
            for subparser in action.choices.values():
                dests = {a.dest for a in subparser._actions}
                unknown = set(values) - dests
                if unknown:
                    raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
                subparser.set_defaults(**values)
    return parser.parse_args(argv)


# -- helpers ----------------------------------------------------------------------


def _load(args):
    if not args.ratings:
        raise UsageError("--ratings is required")
    for path in (args.ratings, args.social):
        if path and not Path(path).exists():
            raise UsageError(f"no such file: {path}")
    scale = RatingScale(args.scale_min, args.scale_max, args.scale_step, args.rmse_max)
    return load_dataset(args.ratings, args.social, scale, args.directed, args.name)


def _walk_config(args) -> WalkConfig:
    return WalkConfig(max_depth=args.depth, num_walks=args.walks, max_walks=args.max_walks,
                      convergence_epsilon=args.epsilon, seed=args.seed,
                      bias_mode=args.bias_mode)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _histogram(weights, upper) -> list[str]:
    upper = max(upper, float(weights.max()) if weights.size else 0.0, 1e-12)
    counts, edges = np.histogram(weights, bins=8, range=(0.0, upper))
    return [f"  [{lo:.4f}, {hi:.4f}) {c}" for lo, hi, c in zip(edges[:-1], edges[1:], counts)]


# -- commands ---------------------------------------------------------------------


def cmd_build(args) -> int:
    dataset = _load(args)
    network = build_network(dataset, NetworkConfig(raw_weights=args.raw_weights))
    out = _out_dir(args)
    network.write_export(out / "network.txt")
    n_items = len(dataset.ratings.items())
    lines = [
        f"nodes {network.n_nodes}",
        f"edges {network.n_edges}",
        f"ratings {len(dataset.ratings)}",
        f"items {n_items}",
    ]
    if n_items:
        lines.append(f"sparsity {sparsity(dataset.ratings, network.n_nodes, n_items):.4f}")
    lines.append("weight histogram")
    lines += _histogram(network.weight[network.present], 4.0)
    (out / "stats.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines[:2]))
    return EXIT_OK


def cmd_predict(args) -> int:
    dataset = _load(args)
    ratings = dataset.ratings
    if args.user not in dataset.users():
        print(f"unknown user {args.user}", file=sys.stderr)
        return EXIT_UNKNOWN
    if not ratings.has_item(args.item):
        print(f"unknown item {args.item}", file=sys.stderr)
        return EXIT_UNKNOWN
    network = build_network(dataset, NetworkConfig(raw_weights=args.raw_weights))
    rules = RuleConfig(args.min_support, args.min_confidence, args.top_k, args.max_rule_len or None)
    result = predict(args.user, args.item, network, ratings, _walk_config(args), rules)
    counts = f"walks_run={result.walks_run} walks_rated={result.walks_rated}"
    if result.kind in (PREDICTED, KNOWN):
        print(f"{result.kind} {result.value:.4f} {counts}")
        return EXIT_OK
    if result.kind == FALLBACK:
        print(f"fallback {counts} candidates={len(result.fallback_candidates)}")
        for rec in result.fallback_candidates:
            print(rec.line())
        return EXIT_OK
    assert result.kind == CANNOT_COVER
    print(f"cannot cover {counts}")
    return EXIT_CANNOT_COVER


def cmd_evaluate(args) -> int:
    dataset = _load(args)
    config = EvalConfig(fraction=args.fraction, seed=args.seed, walk=_walk_config(args),
                        rmse_max=args.rmse_max, max_queries=args.max_queries,
                        threads=args.threads)
    if args.engine == "oracle":
        engine = OracleEngine(dataset)
    elif args.engine == "null":
        engine = null_engine
    else:
        engine = WalkerEngine(dataset, config.walk,
                              network_config=NetworkConfig(raw_weights=args.raw_weights))
    runs = [("report.txt", dataset.name, engine)]
    if args.baseline:
        runs.append(("report_baseline.txt", f"{dataset.name}-cfpearson", BaselineEngine()))
    out = _out_dir(args)
    for filename, label, eng in runs:
        report = loo_evaluate(dataset, config, eng)
        line = report.line(label, args.fraction)
        text = report.table(label, args.fraction) + "\n\n" + line + "\n"
        (out / filename).write_text(text, encoding="utf-8")
        print(line)
    return EXIT_OK


def format_centrality(scores) -> list[str]:
    return [f"{s.node} {s.impact:.4f} {s.classic_hindex}" for s in scores]


def cmd_centrality(args) -> int:
    dataset = _load(args)
    lines = format_centrality(all_scores(dataset.social))
    text = "".join(line + "\n" for line in lines)
    (_out_dir(args) / "centrality.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args) -> int:
    dataset = _load(args)
    users = dataset.users()
    items = dataset.ratings.items()
    print(f"users {len(users)}")
    print(f"items {len(items)}")
    print(f"ratings {len(dataset.ratings)}")
    social = dataset.social
    print(f"social_links {social.n_edges() // (1 if social.directed else 2)}")
    if users and items:
        print(f"sparsity {sparsity(dataset.ratings, len(users), len(items)):.4f}")
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "centrality": cmd_centrality,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"trustwalk: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"trustwalk: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownEntityError as exc:
        print(f"trustwalk: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (DataError, DomainError) as exc:
        print(f"trustwalk: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
