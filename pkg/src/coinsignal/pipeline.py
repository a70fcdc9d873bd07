"""End-to-end batch pipeline from raw corpus files to report artifacts.

Stages run in dependency order (ingest, classify, signals, network,
econometrics, report); each writes its own files exactly once, so a
failure later on never touches what an earlier stage produced. Every
derived quantity is a pure function of the inputs and the config, all
iteration orders are sorted, and floats are written with round-trip
repr, which makes repeated runs byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict

import numpy as np

from coinsignal import __version__
from coinsignal.config import PipelineConfig
from coinsignal.corpus import (
    DAY,
    HOUR,
    BucketSeries,
    detect_coin_mentions,
    format_timestamp,
    load_prices,
    load_registry,
    load_tweets,
    resample_prices,
)
from coinsignal.econometrics.adf import adf_test
from coinsignal.econometrics.granger import granger_scan
from coinsignal.econometrics.matrices import return_correlation_matrix
from coinsignal.econometrics.xcorr import best_lag_scan
from coinsignal.netgraph import (
    InfluencerCriteria,
    WeightedGraph,
    adjacency_matrix,
    build_comention_network,
    build_retweet_network,
    centrality,
    degree_share_core,
    degree_share_filter,
    derive_profiles,
    edge_weight_share_filter,
    filter_influencers,
    matrix_pearson,
    merge_profile_overrides,
    tag_similarity_matrix,
    top_k_union,
    write_edge_csv,
)
from coinsignal.signals import (
    BUY,
    MARKET,
    NOT_BUY,
    ClassifierProtocolError,
    ClassifierUnavailableError,
    ClassifierVerdict,
    aggregate_signal_counts,
    external_classify,
    lexicon_classify,
    load_lexicon,
    log_returns,
    social_signal_series,
)

STAGES = ("ingest", "classify", "signals", "network", "granger", "xcorr", "matrix", "report")

# one exit code per stage; the three econometrics subcommands share theirs
STAGE_EXIT = {
    "config": 2,
    "ingest": 3,
    "classify": 4,
    "signals": 5,
    "network": 6,
    "granger": 7,
    "xcorr": 7,
    "matrix": 7,
    "report": 8,
}

TOKEN_ENV_VAR = "COINSIGNAL_CLASSIFIER_TOKEN"

PRICE_FORMULAS = ("CP", "r_CP")
SIGNAL_FORMULAS = ("SS", "SS_crypto", "r_SS", "r_SS_crypto")

DIRECTION_NOTE = (
    "lag convention: the social signal leads, so a row at lag k pairs the "
    "signal k steps earlier with the price now; granger rows test whether "
    "signal returns help predict price returns"
)

_POPULATION_CLASS = {"influencers": "influencer", "news": "news"}


class StageError(RuntimeError):
    """A stage failed; carries the stage name and its exit code."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.exit_code = STAGE_EXIT[stage]
        super().__init__(f"{stage}: {message}")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _fmt(x) -> str:
    return repr(float(x))


def band_for(p: float, bands: tuple[float, ...]) -> str:
    """Tightest significance band the p-value satisfies, "" for none."""
    for b in bands:
        if p < b:
            return f"<{b:g}"
    return ""


def render_significance_table(rows, bands) -> dict:
    """Pivot per-(coin, lag) p-values into a banded lag-by-coin table.

    ``rows`` holds (coin, lag, p) triples with p None where the test
    could not run; those cells render as "n/a". Lags cover 1 up to the
    largest lag seen, coins become sorted columns.
    """
    by_key = {}
    coins = set()
    max_lag = 0
    for coin, lag, p in rows:
        coins.add(coin)
        max_lag = max(max_lag, lag)
        by_key[(coin, lag)] = p
    coin_order = sorted(coins)
    lags = list(range(1, max_lag + 1))
    cells = []
    for lag in lags:
        row = []
        for coin in coin_order:
            p = by_key.get((coin, lag))
            row.append("n/a" if p is None else band_for(p, bands))
        cells.append(row)
    return {
        "bands": [f"<{b:g}" for b in bands],
        "coins": coin_order,
        "lags": lags,
        "cells": cells,
    }


def summarize_corpus(tweets, verdicts, registry, *, mentions=None) -> dict:
    """Descriptive shares and counts; every share breakdown sums to 1.

    Per coin: how many tweets mention it, how the labeled ones split
    between buy and not-buy, and the buy:not-buy ratio (None when the
    denominator is zero).
    """
    if mentions is None:
        mentions = {t.id: detect_coin_mentions(t.text, registry) for t in tweets}
    n = len(tweets)
    class_counts: dict[str, int] = {}
    label_counts = {BUY: 0, NOT_BUY: 0, "irrelevant": 0}
    per_coin = {
        coin: {"mentions": 0, BUY: 0, NOT_BUY: 0} for coin in registry.coin_ids()
    }
    for tweet in tweets:
        class_counts[tweet.author_class] = class_counts.get(tweet.author_class, 0) + 1
        verdict = verdicts[tweet.id]
        key = verdict.label if verdict.relevant else "irrelevant"
        label_counts[key] += 1
        for coin in mentions.get(tweet.id, frozenset()):
            entry = per_coin[coin]
            entry["mentions"] += 1
            if verdict.relevant:
                entry[verdict.label] += 1

    coins = {}
    for coin in sorted(per_coin):
        entry = per_coin[coin]
        labeled = entry[BUY] + entry[NOT_BUY]
        coins[coin] = {
            "mentions": entry["mentions"],
            "buy": entry[BUY],
            "not_buy": entry[NOT_BUY],
            "buy_share": entry[BUY] / labeled if labeled else None,
            "not_buy_share": entry[NOT_BUY] / labeled if labeled else None,
            "buy_not_buy_ratio": entry[BUY] / entry[NOT_BUY] if entry[NOT_BUY] else None,
        }
    return {
        "tweets": n,
        "author_class_share": {
            cls: count / n for cls, count in sorted(class_counts.items())
        } if n else {},
        "signal_share": {
            "buy": label_counts[BUY] / n,
            "not_buy": label_counts[NOT_BUY] / n,
            "irrelevant": label_counts["irrelevant"] / n,
        } if n else {},
        "coins": coins,
    }


class Pipeline:
    """One run over one config; caches loaded inputs across stages."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.warnings: list[str] = []
        self.stage_rows: dict[str, dict] = {}
        self.stage_seconds: dict[str, float] = {}
        self._written: dict[str, list[str]] = {}
        self._written_json: set[str] = set()
        self._registry = None
        self._tweets = None
        self._rejections = None
        self._prices = None
        self._mentions = None
        self._verdicts = None
        self._grid = None
        self._counts = None
        self._ss = None
        self._ss_crypto = None
        self._comention = None
        self._retweet = None
        self._aligned: dict[str, dict] = {}

    # ---- lazy input loading, each failure owned by its stage ----

    def _ensure_ingest(self):
        if self._tweets is not None:
            return
        try:
            self._registry = load_registry(self.cfg.registry)
            self._tweets, self._rejections = load_tweets(self.cfg.tweets)
            self._prices = load_prices(self.cfg.prices)
        except (OSError, ValueError, KeyError) as exc:
            raise StageError("ingest", str(exc)) from exc
        if not self._prices:
            raise StageError("ingest", f"no price rows in {self.cfg.prices}")
        self._mentions = {
            t.id: detect_coin_mentions(t.text, self._registry) for t in self._tweets
        }

    def _read_labels(self, path: str) -> dict[str, ClassifierVerdict]:
        verdicts = {}
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            if header != _HEADERS["labels.csv"]:
                raise ValueError(f"unexpected header {header}")
            for row in reader:
                tweet_id, relevant, raw_label, label, source = row
                verdicts[tweet_id] = ClassifierVerdict(
                    relevant=relevant == "true",
                    label=label or None,
                    source=source,
                    raw_label=raw_label or None,
                )
        return verdicts

    def _classify_fresh(self) -> dict[str, ClassifierVerdict]:
        ccfg = self.cfg.classifier
        try:
            if ccfg.kind == "lexicon":
                lexicon = load_lexicon(ccfg.lexicon)
                return {
                    t.id: lexicon_classify(
                        t.text, lexicon, has_coin_mention=bool(self._mentions[t.id])
                    )
                    for t in self._tweets
                }
            verdicts = external_classify(
                [t.text for t in self._tweets],
                ccfg.endpoint,
                batch_size=ccfg.batch_size,
                timeout_s=ccfg.timeout_s,
                retries=ccfg.retries,
                backoff_s=ccfg.backoff_s,
                token=os.environ.get(TOKEN_ENV_VAR),
            )
        except (OSError, ValueError, ClassifierProtocolError, ClassifierUnavailableError) as exc:
            raise StageError("classify", str(exc)) from exc
        return {t.id: v for t, v in zip(self._tweets, verdicts)}

    def _ensure_verdicts(self):
        if self._verdicts is not None:
            return
        self._ensure_ingest()
        path = os.path.join(self.cfg.out_dir, "labels.csv")
        if os.path.exists(path):
            try:
                stored = self._read_labels(path)
            except (OSError, ValueError) as exc:
                self.warnings.append(f"classify: ignoring labels.csv ({exc})")
            else:
                if set(stored) == {t.id for t in self._tweets}:
                    self._verdicts = stored
                    return
                self.warnings.append(
                    "classify: ignoring labels.csv (tweet ids do not match the corpus)"
                )
        self._verdicts = self._classify_fresh()

    def _ensure_signals(self):
        if self._counts is not None:
            return
        self._ensure_verdicts()
        cfg = self.cfg
        if cfg.population == "pooled":
            population = self._tweets
        else:
            wanted = _POPULATION_CLASS[cfg.population]
            population = [t for t in self._tweets if t.author_class == wanted]
        price_lo = min(int(s.timestamps[0]) for s in self._prices.values())
        price_hi = max(int(s.timestamps[-1]) for s in self._prices.values())
        lo, hi = price_lo, price_hi
        if self._tweets:
            ceil_hour = lambda ts: -(-ts // HOUR) * HOUR
            lo = min(lo, ceil_hour(min(t.created_at for t in self._tweets)))
            hi = max(hi, ceil_hour(max(t.created_at for t in self._tweets)))
        n = (hi - lo) // HOUR + 1
        self._grid = BucketSeries(resolution="hourly", origin=lo, values=(0,) * n)
        try:
            self._counts = aggregate_signal_counts(
                population, self._verdicts, self._registry, self._grid,
                mentions=self._mentions,
            )
        except ValueError as exc:
            raise StageError("signals", str(exc)) from exc
        market = self._counts[MARKET]
        self._ss = {}
        self._ss_crypto = {}
        for coin in self._registry.coin_ids():
            self._ss[coin] = social_signal_series(self._counts[coin])
            self._ss_crypto[coin] = social_signal_series(self._counts[coin], market)

    def _ensure_networks(self):
        if self._comention is not None:
            return
        self._ensure_ingest()
        self._comention = build_comention_network(
            self._mentions[t.id] for t in self._tweets
        )
        self._retweet = build_retweet_network(self._tweets)

    def _aligned_series(self, coin: str, stage: str) -> dict:
        """Price and signal series on the coin's own hourly price grid.

        Returns raw hourly levels, their log returns, daily mean
        resamples, and daily returns, all pairwise aligned.
        """
        if coin in self._aligned:
            return self._aligned[coin]
        self._ensure_signals()
        ps = self._prices[coin]
        try:
            ps.require_contiguous()
        except ValueError as exc:
            raise StageError(stage, str(exc)) from exc
        grid_hours = self._grid.bucket_starts()
        pos = np.searchsorted(grid_hours, ps.timestamps)
        if pos[-1] >= len(grid_hours) or not np.array_equal(grid_hours[pos], ps.timestamps):
            raise StageError(stage, f"price hours for {coin} fall outside the signal grid")
        out = {"hours": ps.timestamps, ("CP", "hourly"): ps.prices.astype(np.float64)}
        for name, series_map in (("SS", self._ss), ("SS_crypto", self._ss_crypto)):
            out[(name, "hourly")] = np.asarray(series_map[coin].values, dtype=np.float64)[pos]

        daily = resample_prices(ps, "daily")
        out[("CP", "daily")] = np.asarray(daily.values, dtype=np.float64)
        start = int((daily.origin - self._grid.origin) // HOUR)
        span = len(daily.values) * (DAY // HOUR)
        for name in ("SS", "SS_crypto"):
            hourly = np.asarray(self._ss[coin].values if name == "SS"
                                else self._ss_crypto[coin].values, dtype=np.float64)
            block = hourly[start : start + span].reshape(len(daily.values), DAY // HOUR)
            out[(name, "daily")] = block.mean(axis=1)

        try:
            for name in ("CP", "SS", "SS_crypto"):
                for res in ("hourly", "daily"):
                    rs = log_returns(
                        out[(name, res)],
                        base="price" if name == "CP" else "social_signal",
                        coin_id=coin, resolution=res,
                    )
                    out[(f"r_{name}", res)] = np.asarray(rs.points, dtype=np.float64)
        except ValueError as exc:
            raise StageError(stage, str(exc)) from exc
        self._aligned[coin] = out
        return out

    # ---- output writing ----

    def _out_path(self, name: str) -> str:
        return os.path.join(self.cfg.out_dir, name)

    def _write_csv(self, name: str, header: list[str], rows) -> int:
        count = 0
        with open(self._out_path(name), "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
                count += 1
        self._written[name] = list(header)
        return count

    def _write_json(self, name: str, payload) -> None:
        with open(self._out_path(name), "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
            handle.write("\n")
        self._written_json.add(name)

    def _write_matrix_csv(self, name: str, coins, values, cell) -> None:
        rows = [[coin] + [cell(x) for x in values[i]] for i, coin in enumerate(coins)]
        self._write_csv(name, ["coin"] + list(coins), rows)

    # ---- stages ----

    def stage_ingest(self) -> dict:
        self._ensure_ingest()
        self._write_csv(
            "rejections.csv", _HEADERS["rejections.csv"],
            ([r.line, r.reason] for r in self._rejections),
        )
        mention_rows = []
        for tweet in self._tweets:
            for coin in sorted(self._mentions[tweet.id]):
                mention_rows.append([tweet.id, coin])
        self._write_csv("mentions.csv", _HEADERS["mentions.csv"], mention_rows)
        return {
            "tweets": len(self._tweets),
            "rejections": len(self._rejections),
            "mentions": len(mention_rows),
            "price_rows": sum(len(s.timestamps) for s in self._prices.values()),
        }

    def stage_classify(self) -> dict:
        self._ensure_verdicts()
        rows = []
        relevant = 0
        for tweet in self._tweets:
            v = self._verdicts[tweet.id]
            relevant += v.relevant
            rows.append([
                tweet.id,
                "true" if v.relevant else "false",
                v.raw_label or "",
                v.label or "",
                v.source,
            ])
        self._write_csv("labels.csv", _HEADERS["labels.csv"], rows)
        return {"labels": len(rows), "relevant": relevant}

    def stage_signals(self) -> dict:
        self._ensure_signals()
        rows = []
        for coin in sorted(self._counts):
            counts = self._counts[coin]
            if coin == MARKET:
                crypto_vals = None
            else:
                crypto_vals = self._ss_crypto[coin].values
            plain_vals = (
                self._ss[coin].values if coin != MARKET
                else social_signal_series(counts).values
            )
            for i, c in enumerate(counts):
                rows.append([
                    coin,
                    format_timestamp(c.window_end),
                    c.n_buy,
                    c.n_not_buy,
                    _fmt(plain_vals[i]),
                    "" if crypto_vals is None else _fmt(crypto_vals[i]),
                ])
        n = self._write_csv("signals.csv", _HEADERS["signals.csv"], rows)
        return {
            "rows": n,
            "coins": len(self._counts) - 1,
            "hours": len(self._grid.values),
        }

    def _influencer_candidates(self, scores) -> list[str]:
        if self.cfg.candidates:
            try:
                with open(self.cfg.candidates, encoding="utf-8") as handle:
                    return sorted({line.strip() for line in handle if line.strip()})
            except OSError as exc:
                raise StageError("network", str(exc)) from exc
        return sorted(top_k_union(scores, self.cfg.top_k))

    def _load_profile_overrides(self) -> dict[str, dict]:
        overrides: dict[str, dict] = {}
        try:
            with open(self.cfg.profiles, encoding="utf-8") as handle:
                for i, line in enumerate(handle, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    if not isinstance(row, dict) or not isinstance(row.get("author_id"), str):
                        raise ValueError(f"line {i}: profile rows need an author_id")
                    overrides[row["author_id"]] = row
        except (OSError, ValueError) as exc:
            raise StageError("network", f"profiles file: {exc}") from exc
        return overrides

    def stage_network(self) -> dict:
        self._ensure_networks()
        cfg = self.cfg
        write_edge_csv(self._comention, self._out_path("comention_edges.csv"))
        self._written["comention_edges.csv"] = _HEADERS["comention_edges.csv"]
        write_edge_csv(self._retweet, self._out_path("retweet_edges.csv"))
        self._written["retweet_edges.csv"] = _HEADERS["retweet_edges.csv"]

        graph = self._retweet.binarized() if cfg.binarize_retweet else self._retweet
        try:
            scores = [
                centrality(graph, metric, distance_mode=cfg.distance_mode, workers=cfg.workers)
                for metric in ("pagerank", "betweenness", "closeness")
            ]
        except ValueError as exc:
            raise StageError("network", str(exc)) from exc
        by_metric = [s.scores for s in scores]
        self._write_csv(
            "centrality.csv", _HEADERS["centrality.csv"],
            ([node] + [_fmt(m[node]) for m in by_metric] for node in sorted(graph.nodes)),
        )

        candidates = self._influencer_candidates(scores)
        profiles = derive_profiles(self._tweets)
        if cfg.profiles:
            profiles = merge_profile_overrides(profiles, self._load_profile_overrides())
        as_of = cfg.as_of
        if as_of is None:
            if not self._tweets:
                raise StageError("network", "empty corpus: cannot infer the as-of time")
            as_of = max(t.created_at for t in self._tweets)
        terms = cfg.description_terms
        criteria = InfluencerCriteria(
            min_followers=cfg.min_followers,
            min_avg_engagement=cfg.min_avg_engagement,
            activity_window_days=cfg.activity_window_days,
            description_filter=(
                (lambda bio: any(t in bio.lower() for t in terms)) if terms else None
            ),
        )
        accepted, reasons = filter_influencers(candidates, profiles, criteria, as_of=as_of)
        rows = []
        for author in candidates:
            profile = profiles.get(author)
            engagements = profile.recent_engagements if profile else ()
            rows.append([
                author,
                "" if profile is None or profile.followers is None else profile.followers,
                _fmt(sum(engagements) / len(engagements)) if engagements else "",
                "" if profile is None or profile.last_tweet_at is None
                else format_timestamp(profile.last_tweet_at),
                "true" if author in accepted else "false",
                reasons.get(author, ""),
            ])
        self._write_csv("influencers.csv", _HEADERS["influencers.csv"], rows)

        if cfg.filter_rule == "degree_share":
            filtered = degree_share_filter(self._comention, cfg.degree_share_theta)
        elif cfg.filter_rule == "degree_share_core":
            filtered = degree_share_core(self._comention, cfg.degree_share_theta)
        else:
            kept = edge_weight_share_filter(self._comention, cfg.edge_share_theta)
            filtered = WeightedGraph.from_edges(False, kept)
        write_edge_csv(filtered, self._out_path("comention_filtered_edges.csv"))
        self._written["comention_filtered_edges.csv"] = _HEADERS["comention_filtered_edges.csv"]

        coins_f = sorted(filtered.nodes)
        tags_json: dict = {"coins": coins_f, "rule": cfg.filter_rule}
        if coins_f:
            sim = tag_similarity_matrix(self._registry, coins_f)
            self._write_matrix_csv(
                "tag_similarity.csv", coins_f, sim.values, lambda x: f"{x:.6f}"
            )
            try:
                r, p = matrix_pearson(adjacency_matrix(filtered, coins_f), sim.values)
                tags_json.update({"r": r, "p": p})
            except ValueError as exc:
                tags_json.update({"r": None, "p": None, "error": str(exc)})
                self.warnings.append(f"network: tag-similarity comparison skipped ({exc})")
        else:
            self._write_matrix_csv("tag_similarity.csv", [], np.zeros((0, 0)), _fmt)
            tags_json.update({"r": None, "p": None, "error": "filtered network is empty"})
            self.warnings.append("network: filtered co-mention network is empty")
        self._write_json("adjacency_vs_tags.json", tags_json)

        return {
            "comention_edges": len(self._comention.edges),
            "retweet_edges": len(self._retweet.edges),
            "centrality_nodes": len(graph.nodes),
            "candidates": len(candidates),
            "influencers_accepted": len(accepted),
            "filtered_edges": len(filtered.edges),
        }

    def _granger_rows(self, signal_formula: str) -> list[tuple]:
        cfg = self.cfg
        rows = []
        for coin in sorted(self._prices):
            aligned = self._aligned_series(coin, "granger")
            cause = aligned[(signal_formula, "hourly")]
            effect = aligned[("r_CP", "hourly")]
            scan = granger_scan(
                cause, effect, max_lag=cfg.granger_max_lag,
                cause_id=f"{signal_formula}[{coin}]", effect_id=f"r_CP[{coin}]",
                workers=cfg.workers,
            )
            for row in scan:
                if row.ok:
                    rows.append((coin, row.lag, row.result.f_statistic, row.result.p_value))
                else:
                    rows.append((coin, row.lag, None, None))
                    self.warnings.append(
                        f"granger: {signal_formula} {coin} lag {row.lag}: {row.error}"
                    )
        return rows

    def _write_granger(self, name: str, table_base: str, signal_formula: str) -> int:
        bands = self.cfg.significance_bands
        rows = self._granger_rows(signal_formula)
        csv_rows = []
        for coin, lag, f, p in rows:
            if p is None:
                csv_rows.append([coin, lag, "", "", ""])
            else:
                csv_rows.append([coin, lag, _fmt(f), _fmt(p), band_for(p, bands)])
        n = self._write_csv(name, _HEADERS["granger.csv"], csv_rows)
        table = render_significance_table(
            [(coin, lag, p) for coin, lag, f, p in rows], bands
        )
        self._write_csv(
            f"{table_base}.csv", ["lag_hours"] + table["coins"],
            ([lag] + cells for lag, cells in zip(table["lags"], table["cells"])),
        )
        table["signal_formula"] = signal_formula
        table["direction"] = DIRECTION_NOTE
        self._write_json(f"{table_base}.json", table)
        return n

    def stage_granger(self) -> dict:
        self._ensure_signals()
        n_crypto = self._write_granger("granger.csv", "significance_table", "r_SS_crypto")
        n_plain = self._write_granger("granger_ss.csv", "significance_table_ss", "r_SS")
        return {"rows": n_crypto, "rows_ss": n_plain}

    def _stationarity_stamps(self, coin: str, aligned: dict) -> list[list]:
        """ADF rows for every raw-level series used by the lag tables."""
        out = []
        for name in ("CP", "SS", "SS_crypto"):
            for res in ("hourly", "daily"):
                series = aligned[(name, res)]
                try:
                    result = adf_test(series)
                except ValueError as exc:
                    self.warnings.append(f"xcorr: {name} {res} for {coin}: ADF not run ({exc})")
                    out.append([coin, name, res, "", "", "", "", "", "", ""])
                    continue
                if not result.reject["5%"]:
                    self.warnings.append(
                        f"xcorr: {name} {res} for {coin} fails the 5% stationarity "
                        "screen; raw-level correlation rows may be spurious"
                    )
                out.append([
                    coin, name, res,
                    _fmt(result.statistic), result.chosen_lag, result.n_obs,
                    _fmt(result.critical_values["1%"]),
                    _fmt(result.critical_values["5%"]),
                    _fmt(result.critical_values["10%"]),
                    "true" if result.reject["5%"] else "false",
                ])
        return out

    def stage_xcorr(self) -> dict:
        self._ensure_signals()
        cfg = self.cfg
        rows = []
        adf_rows = []
        for coin in sorted(self._prices):
            aligned = self._aligned_series(coin, "xcorr")
            adf_rows.extend(self._stationarity_stamps(coin, aligned))
            for pf in PRICE_FORMULAS:
                for sf in SIGNAL_FORMULAS:
                    series = {}
                    for res in ("hourly", "daily"):
                        price = aligned[(pf, res)]
                        signal = aligned[(sf, res)]
                        # a raw series paired with a returns series loses
                        # its first point so both sit on the same stamps
                        if len(price) > len(signal):
                            price = price[1:]
                        elif len(signal) > len(price):
                            signal = signal[1:]
                        series[res] = (price, signal)
                    result = best_lag_scan(
                        series["hourly"][0], series["hourly"][1],
                        series["daily"][0], series["daily"][1],
                        hourly_max=cfg.xcorr_hourly_max, daily_max=cfg.xcorr_daily_max,
                        pair=(pf, sf),
                    )
                    for res in ("hourly", "daily"):
                        scan = result.by_resolution[res]
                        max_lag = cfg.xcorr_hourly_max if res == "hourly" else cfg.xcorr_daily_max
                        for lag in range(0, max_lag + 1):
                            if lag in scan.values:
                                gamma = _fmt(scan.values[lag])
                            else:
                                gamma = ""
                                self.warnings.append(
                                    f"xcorr: {pf}/{sf} {coin} {res} lag {lag}: "
                                    f"{scan.errors[lag]}"
                                )
                            is_best = result.best == (res, lag, scan.values.get(lag))
                            rows.append([
                                pf, sf, coin, res, lag, gamma,
                                "true" if is_best else "false",
                            ])
        n = self._write_csv("xcorr.csv", _HEADERS["xcorr.csv"], rows)
        n_adf = self._write_csv("adf.csv", _HEADERS["adf.csv"], adf_rows)
        return {"rows": n, "adf_rows": n_adf}

    def stage_matrix(self) -> dict:
        self._ensure_signals()
        self._ensure_networks()
        registry = self._registry
        coins = sorted(
            c for c in registry.coin_ids()
            if c in self._prices and "stablecoin" not in registry.tags_for(c)
        )
        dropped = sorted(set(registry.coin_ids()) - set(coins))
        if dropped:
            self.warnings.append(
                "matrix: excluded (no prices or stablecoin): " + ", ".join(dropped)
            )
        if len(coins) < 2:
            raise StageError("matrix", f"need at least 2 priced non-stablecoin coins, have {len(coins)}")

        start = max(int(self._prices[c].timestamps[0]) for c in coins)
        end = min(int(self._prices[c].timestamps[-1]) for c in coins)
        if start >= end:
            raise StageError("matrix", "price series share no common span")
        hourly = {}
        weekly = {}
        weekly_buckets = {}
        for coin in coins:
            ps = self._prices[coin]
            try:
                ps.require_contiguous()
                lo = int((start - ps.timestamps[0]) // HOUR)
                hi = lo + (end - start) // HOUR + 1
                values = ps.prices[lo:hi].astype(np.float64)
                weekly_buckets[coin] = resample_prices(ps, "weekly")
                hourly[coin] = np.asarray(
                    log_returns(values, base="price", coin_id=coin, resolution="hourly").points
                )
            except ValueError as exc:
                raise StageError("matrix", str(exc)) from exc

        wstart = max(b.origin for b in weekly_buckets.values())
        wend = min(b.origin + (len(b.values) - 1) * b.width for b in weekly_buckets.values())
        if wstart >= wend:
            raise StageError("matrix", "price series share no common complete week")
        for coin in coins:
            b = weekly_buckets[coin]
            lo = (wstart - b.origin) // b.width
            hi = lo + (wend - wstart) // b.width + 1
            try:
                weekly[coin] = np.asarray(
                    log_returns(
                        np.asarray(b.values[lo:hi], dtype=np.float64),
                        base="price", coin_id=coin, resolution="weekly",
                    ).points
                )
            except ValueError as exc:
                raise StageError("matrix", str(exc)) from exc

        try:
            matrix = return_correlation_matrix(
                hourly, weekly, coins,
                skip_stationarity_check=self.cfg.allow_nonstationary,
            )
        except ValueError as exc:
            raise StageError("matrix", str(exc)) from exc
        for note in matrix.warnings:
            self.warnings.append(f"matrix: {note}")

        self._write_matrix_csv("matrix.csv", coins, matrix.values, lambda x: f"{x:.6f}")
        self._write_matrix_csv("matrix_pvalues.csv", coins, matrix.p_values, _fmt)

        m = len(coins)
        hourly_full = np.eye(m)
        weekly_full = np.eye(m)
        for i in range(m):
            for j in range(m):
                if i > j:
                    hourly_full[i, j] = hourly_full[j, i] = matrix.values[i, j]
                elif i < j:
                    weekly_full[i, j] = weekly_full[j, i] = matrix.values[i, j]
        adjacency = adjacency_matrix(self._comention, coins)
        returns_json: dict = {
            "coins": coins,
            "stationarity_override": matrix.stationarity_override,
        }
        for label, full in (("hourly", hourly_full), ("weekly", weekly_full)):
            try:
                r, p = matrix_pearson(adjacency, full)
                returns_json[label] = {"r": r, "p": p}
            except ValueError as exc:
                returns_json[label] = {"r": None, "p": None, "error": str(exc)}
                self.warnings.append(f"matrix: {label} adjacency comparison skipped ({exc})")
        self._write_json("adjacency_vs_returns.json", returns_json)
        return {"coins": m, "hourly_obs": len(hourly[coins[0]]), "weekly_obs": len(weekly[coins[0]])}

    def _require_artifact(self, name: str, producer: str) -> str:
        path = self._out_path(name)
        if not os.path.exists(path):
            raise StageError("report", f"missing {name}; run the {producer} stage first")
        return path

    def stage_report(self) -> dict:
        self._ensure_verdicts()
        summary = summarize_corpus(
            self._tweets, self._verdicts, self._registry, mentions=self._mentions
        )
        rows = [["tweets", "", summary["tweets"]]]
        for cls, share in summary["author_class_share"].items():
            rows.append(["author_class_share", cls, _fmt(share)])
        for key, share in summary["signal_share"].items():
            rows.append(["signal_share", key, _fmt(share)])
        for coin, entry in summary["coins"].items():
            rows.append(["mention_count", coin, entry["mentions"]])
            rows.append(["buy_count", coin, entry["buy"]])
            rows.append(["not_buy_count", coin, entry["not_buy"]])
            for key in ("buy_share", "not_buy_share", "buy_not_buy_ratio"):
                value = entry[key]
                rows.append([key, coin, "" if value is None else _fmt(value)])
        n = self._write_csv("corpus_summary.csv", _HEADERS["corpus_summary.csv"], rows)

        with open(self._require_artifact("adjacency_vs_tags.json", "network"),
                  encoding="utf-8") as handle:
            tags_json = json.load(handle)
        with open(self._require_artifact("adjacency_vs_returns.json", "matrix"),
                  encoding="utf-8") as handle:
            returns_json = json.load(handle)

        influencers = []
        with open(self._require_artifact("influencers.csv", "network"),
                  encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            for row in reader:
                influencers.append(row)

        def band_counts(name: str, producer: str) -> dict:
            counts: dict[str, int] = {}
            with open(self._require_artifact(name, producer),
                      encoding="utf-8", newline="") as handle:
                reader = csv.DictReader(handle)
                for row in reader:
                    key = row["band"] if row["p_value"] else "n/a"
                    counts[key or "none"] = counts.get(key or "none", 0) + 1
            return counts

        best_rows = []
        with open(self._require_artifact("xcorr.csv", "xcorr"),
                  encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            for row in reader:
                if row["is_best"] == "true":
                    best_rows.append({
                        "price_formula": row["price_formula"],
                        "signal_formula": row["signal_formula"],
                        "coin": row["coin"],
                        "resolution": row["resolution"],
                        "lag": int(row["lag"]),
                        "gamma": float(row["gamma"]),
                    })

        self._ensure_networks()
        report = {
            "version": __version__,
            "direction": DIRECTION_NOTE,
            "population": self.cfg.population,
            "corpus": summary,
            "network": {
                "comention": {
                    "nodes": len(self._comention.nodes),
                    "edges": len(self._comention.edges),
                    "total_weight": self._comention.total_edge_weight(),
                },
                "retweet": {
                    "nodes": len(self._retweet.nodes),
                    "edges": len(self._retweet.edges),
                },
                "filter_rule": self.cfg.filter_rule,
                "adjacency_vs_tags": tags_json,
            },
            "influencers": {
                "candidates": len(influencers),
                "accepted": sorted(
                    r["author_id"] for r in influencers if r["accepted"] == "true"
                ),
            },
            "granger": {
                "bands": [f"<{b:g}" for b in self.cfg.significance_bands],
                "r_SS_crypto": band_counts("granger.csv", "granger"),
                "r_SS": band_counts("granger_ss.csv", "granger"),
            },
            "xcorr_best": best_rows,
            "matrix": returns_json,
            "warnings": sorted(set(self.warnings)),
        }
        self._write_json("report.json", report)
        return {"summary_rows": n, "influencer_candidates": len(influencers)}

    # ---- driver ----

    _STAGE_FN = {
        "ingest": stage_ingest,
        "classify": stage_classify,
        "signals": stage_signals,
        "network": stage_network,
        "granger": stage_granger,
        "xcorr": stage_xcorr,
        "matrix": stage_matrix,
        "report": stage_report,
    }

    def _validate_outputs(self):
        for name, header in sorted(self._written.items()):
            with open(self._out_path(name), encoding="utf-8", newline="") as handle:
                first = next(csv.reader(handle), None)
            if first != header:
                raise StageError(
                    "report", f"schema check failed for {name}: header {first} != {header}"
                )
        for name in sorted(self._written_json):
            with open(self._out_path(name), encoding="utf-8") as handle:
                json.load(handle)

    def _input_digests(self) -> dict:
        cfg = self.cfg
        paths = {"tweets": cfg.tweets, "prices": cfg.prices, "registry": cfg.registry}
        if cfg.candidates:
            paths["candidates"] = cfg.candidates
        if cfg.profiles:
            paths["profiles"] = cfg.profiles
        if cfg.classifier.kind == "lexicon" and cfg.classifier.lexicon:
            paths["lexicon"] = cfg.classifier.lexicon
        out = {}
        for key in sorted(paths):
            path = paths[key]
            try:
                out[key] = {"path": path, "sha256": _sha256(path), "bytes": os.path.getsize(path)}
            except OSError:
                out[key] = {"path": path, "sha256": None, "bytes": None}
        return out

    def run(self, stages: list[str]) -> str:
        """Execute the given stages in canonical order; returns the out dir.

        Writes manifest.json describing this invocation once every stage
        has finished and every output passed its schema check.
        """
        ordered = [s for s in STAGES if s in stages]
        unknown = set(stages) - set(STAGES)
        if unknown:
            raise ValueError(f"unknown stages: {sorted(unknown)}")
        os.makedirs(self.cfg.out_dir, exist_ok=True)
        started = time.time()
        for stage in ordered:
            t0 = time.perf_counter()
            self.stage_rows[stage] = self._STAGE_FN[stage](self)
            self.stage_seconds[stage] = time.perf_counter() - t0
        self._validate_outputs()

        config_snapshot = asdict(self.cfg)
        manifest = {
            "version": __version__,
            "started_at": format_timestamp(int(started)),
            "finished_at": format_timestamp(int(time.time())),
            "stages_run": ordered,
            "config": config_snapshot,
            "inputs": self._input_digests(),
            "stages": {
                stage: {
                    "rows": self.stage_rows[stage],
                    "seconds": round(self.stage_seconds[stage], 3),
                }
                for stage in ordered
            },
            "outputs": {
                name: _sha256(self._out_path(name))
                for name in sorted(set(self._written) | self._written_json)
            },
            "warnings": sorted(set(self.warnings)),
        }
        with open(self._out_path("manifest.json"), "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")
        return self.cfg.out_dir


_HEADERS = {
    "rejections.csv": ["line", "reason"],
    "mentions.csv": ["tweet_id", "coin"],
    "labels.csv": ["tweet_id", "relevant", "raw_label", "label", "source"],
    "signals.csv": ["coin", "window_end", "n_buy", "n_not_buy", "ss", "ss_crypto"],
    "comention_edges.csv": ["u", "v", "weight"],
    "retweet_edges.csv": ["u", "v", "weight"],
    "comention_filtered_edges.csv": ["u", "v", "weight"],
    "centrality.csv": ["node", "pagerank", "betweenness", "closeness"],
    "influencers.csv": ["author_id", "followers", "avg_engagement", "last_tweet_at",
                        "accepted", "reason"],
    "granger.csv": ["coin", "lag_hours", "f_stat", "p_value", "band"],
    "xcorr.csv": ["price_formula", "signal_formula", "coin", "resolution", "lag",
                  "gamma", "is_best"],
    "adf.csv": ["coin", "series", "resolution", "statistic", "chosen_lag", "n_obs",
                "crit_1pct", "crit_5pct", "crit_10pct", "reject_5pct"],
    "corpus_summary.csv": ["metric", "group", "value"],
}


def run_pipeline(cfg: PipelineConfig, stages: list[str] | None = None) -> str:
    """Run the whole pipeline (or a subset of stages) for one config."""
    return Pipeline(cfg).run(list(stages) if stages else list(STAGES))
