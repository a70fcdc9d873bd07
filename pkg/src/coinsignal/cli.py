"""Command-line entry point: one subcommand per pipeline stage plus `all`.

Flags override the config file, which overrides built-in defaults. Exit
codes: 2 for a config problem, then one per stage (ingest 3, classify 4,
signals 5, network 6, econometrics 7, report 8).
"""

from __future__ import annotations

import argparse
import sys

from coinsignal.config import POPULATIONS, ConfigError, load_config
from coinsignal.pipeline import STAGES, Pipeline, StageError

_SUBCOMMAND_STAGES = {name: [name] for name in STAGES}
_SUBCOMMAND_STAGES["all"] = list(STAGES)

_DESCRIPTIONS = {
    "ingest": "load and validate tweets, prices, and the coin registry",
    "classify": "attach relevance and buy/not-buy labels to every tweet",
    "signals": "aggregate trailing-window counts into signal series",
    "network": "build co-mention and retweet networks, centralities, influencers",
    "granger": "per-lag causality scan of signal returns against price returns",
    "xcorr": "lagged cross-correlation tables over both horizons",
    "matrix": "dual-horizon return-correlation matrix with stationarity screen",
    "report": "corpus summary and the machine-readable report bundle",
    "all": "run every stage in order",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH",
                        help="TOML config file")
    common.add_argument("--out", metavar="DIR", help="output directory override")
    common.add_argument("--workers", type=int, metavar="N",
                        help="worker count for parallel scans")
    common.add_argument("--seed", type=int, metavar="N",
                        help="seed recorded in the manifest for simulation runs")
    common.add_argument("--population", choices=POPULATIONS,
                        help="restrict signal aggregation to one author class")

    parser = argparse.ArgumentParser(
        prog="coinsignal",
        description="batch analytics over a crypto tweet corpus and hourly prices",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, stages in _SUBCOMMAND_STAGES.items():
        sub.add_parser(name, parents=[common], help=_DESCRIPTIONS[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.population is not None:
        overrides["population"] = args.population
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    pipeline = Pipeline(cfg)
    try:
        out_dir = pipeline.run(_SUBCOMMAND_STAGES[args.command])
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for warning in sorted(set(pipeline.warnings)):
        print(f"warning: {warning}", file=sys.stderr)
    print(out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
