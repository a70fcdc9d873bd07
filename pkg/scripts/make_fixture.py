"""Build the synthetic end-to-end fixture: corpus, prices, registry,
lexicon, profile overrides, and a config wired to relative paths.

Everything is drawn from one seeded generator, so the same seed always
produces byte-identical fixture files. Two price series get a planted
lag-2 dependence on the corpus's own signal returns, which the causality
scan should then recover.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os

import numpy as np

from coinsignal.corpus import (
    HOUR,
    BucketSeries,
    detect_coin_mentions,
    load_registry,
    load_tweets,
)
from coinsignal.signals import (
    aggregate_signal_counts,
    lexicon_classify,
    load_lexicon,
    social_signal_series,
)

T0 = 1704067200  # 2024-01-01 00:00 UTC, a Monday
WEEKS = 28
HOURS = WEEKS * 168
N_TWEETS = 10_000

COINS = [
    # (id, aliases, tags, base price, hourly vol, mention weight)
    ("BTC", ["btc", "bitcoin"], ["layer1", "store-of-value"], 42000.0, 0.0050, 0.30),
    ("ETH", ["eth", "ethereum"], ["layer1", "smart-contracts"], 2300.0, 0.0060, 0.20),
    ("SOL", ["sol", "solana"], ["layer1", "smart-contracts"], 98.0, 0.0090, 0.12),
    ("XRP", ["xrp", "ripple"], ["payments"], 0.52, 0.0080, 0.09),
    ("DOGE", ["doge", "dogecoin"], ["meme"], 0.08, 0.0110, 0.08),
    ("ADA", ["ada", "cardano"], ["layer1", "smart-contracts"], 0.45, 0.0080, 0.07),
    ("DOT", ["dot", "polkadot"], ["layer1", "interoperability"], 6.8, 0.0080, 0.05),
    ("BNB", ["bnb", "binance coin"], ["layer1", "exchange"], 310.0, 0.0060, 0.04),
    ("SHIB", ["shib", "shiba inu"], ["meme"], 1.0e-05, 0.0130, 0.03),
    ("USDT", ["usdt", "tether"], ["stablecoin", "payments"], 1.0, 0.0, 0.02),
]

# (coin, relative strength) of the planted lag-2 signal-return effect
PLANTS = {"BTC": 0.10, "SOL": 0.07}

RELEVANCE_TERMS = ["crypto", "market", "altcoin", "blockchain", "defi", "trading"]
BULLISH_TERMS = [
    "bullish", "moon", "mooning", "breakout", "rally",
    "accumulate", "undervalued", "buy the dip", "higher highs",
]
BEARISH_TERMS = [
    "bearish", "dump", "dumping", "crash", "capitulation",
    "overvalued", "sell pressure", "lower lows", "rugpull",
]

FILLERS = [
    "charts", "levels", "volume", "watching closely", "interesting setup",
    "today", "tonight", "thread below", "numbers incoming", "on my watchlist",
    "momentum building", "analysis posted", "data says a lot", "big week",
]
IRRELEVANT_TEXTS = [
    "having coffee and reading the paper",
    "great weather for a long run today",
    "new keyboard arrived and typing feels great",
    "weekend plans with the family sorted",
    "finally finished that novel everyone recommended",
    "my houseplants are thriving this spring",
    "caught a wonderful sunset from the balcony",
    "the bakery around the corner never disappoints",
]

MALFORMED = {
    997: "this is not json {",
    4998: '{"id": "broken1", "author_id": "inf001"}',
    9601: '{"id": "broken2", "author_id": "inf002", "author_class": "influencer", '
          '"created_at": "yesterday", "text": "hello crypto"}',
}


def rfc3339(epoch: int) -> str:
    return dt.datetime.fromtimestamp(epoch, dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def price_str(p: float) -> str:
    return f"{p:.10f}".rstrip("0").rstrip(".")


def make_authors(rng) -> list[dict]:
    authors = []
    for i in range(120):
        followers = int(np.exp(rng.normal(9.0, 1.1)))
        authors.append({
            "id": f"inf{i + 1:03d}",
            "class": "influencer",
            "followers": followers,
            "engagement_mu": float(np.exp(rng.normal(5.6, 0.9))),
            # a handful of accounts go quiet early, some barely engage
            "fade_after": 70 * 86400 if i % 17 == 3 else None,
        })
    # force a visible band of small accounts below the follower threshold
    for i in range(15):
        authors[i * 8]["followers"] = int(rng.integers(400, 4800))
    for i in range(15):
        authors.append({
            "id": f"news{i + 1:03d}",
            "class": "news",
            "followers": int(np.exp(rng.normal(11.5, 0.8))),
            "engagement_mu": float(np.exp(rng.normal(5.0, 0.7))),
            "fade_after": None,
        })
    return authors


def author_weights(authors, rng) -> np.ndarray:
    ranks = rng.permutation(len(authors))
    w = 1.0 / (ranks + 8.0)
    return w / w.sum()


def hour_weights(rng) -> np.ndarray:
    hours = np.arange(HOURS)
    daily = 1.0 + 0.55 * np.sin(2 * np.pi * (hours % 24) / 24 - 1.1)
    weekly = 1.0 + 0.20 * np.sin(2 * np.pi * (hours % 168) / 168)
    drift = 1.0 + 0.25 * hours / HOURS
    w = daily * weekly * drift
    return w / w.sum()


def bull_intensity(rng) -> dict[str, np.ndarray]:
    """Per-coin hidden bullishness path in [0.15, 0.85], smooth over hours."""
    out = {}
    for coin_id, *_ in COINS:
        steps = rng.normal(0.0, 0.03, size=HOURS)
        path = np.empty(HOURS)
        path[0] = 0.5
        for i in range(1, HOURS):
            path[i] = min(0.85, max(0.15, path[i - 1] + steps[i]))
        out[coin_id] = path
    return out


def sample_alias(rng, aliases: list[str]) -> str:
    alias = aliases[int(rng.integers(len(aliases)))]
    if " " not in alias and len(alias) <= 4:
        prefix = ("", "#", "$")[int(rng.integers(3))]
        body = alias.upper() if rng.random() < 0.6 else alias
        return prefix + body
    return alias.title() if rng.random() < 0.4 else alias


def compose_text(rng, kind: str, coin_ids: list[str], alias_map, label: str) -> str:
    words = []
    if kind == "irrelevant":
        return IRRELEVANT_TEXTS[int(rng.integers(len(IRRELEVANT_TEXTS)))]
    if kind == "market":
        words.append(RELEVANCE_TERMS[int(rng.integers(len(RELEVANCE_TERMS)))])
    for coin in coin_ids:
        words.append(sample_alias(rng, alias_map[coin]))
    if rng.random() < 0.35:
        words.append(RELEVANCE_TERMS[int(rng.integers(len(RELEVANCE_TERMS)))])
    if label == "bullish":
        picks = rng.choice(len(BULLISH_TERMS), size=int(rng.integers(1, 3)), replace=False)
        words.extend(BULLISH_TERMS[i] for i in picks)
    elif label == "bearish":
        picks = rng.choice(len(BEARISH_TERMS), size=int(rng.integers(1, 3)), replace=False)
        words.extend(BEARISH_TERMS[i] for i in picks)
    elif label == "tie":
        words.append(BULLISH_TERMS[int(rng.integers(len(BULLISH_TERMS)))])
        words.append(BEARISH_TERMS[int(rng.integers(len(BEARISH_TERMS)))])
    words.append(FILLERS[int(rng.integers(len(FILLERS)))])
    order = rng.permutation(len(words)) if rng.random() < 0.3 else np.arange(len(words))
    return " ".join(words[i] for i in order)


def make_tweets(rng, authors, out_dir: str) -> list[dict]:
    alias_map = {coin_id: aliases for coin_id, aliases, *_ in COINS}
    coin_ids = [c[0] for c in COINS]
    coin_w = np.array([c[5] for c in COINS])
    coin_w = coin_w / coin_w.sum()
    intensity = bull_intensity(rng)
    a_weights = author_weights(authors, rng)
    retweet_w = a_weights**1.8
    retweet_w = retweet_w / retweet_w.sum()

    hour_idx = rng.choice(HOURS, size=N_TWEETS, p=hour_weights(rng))
    offsets = rng.integers(0, 3600, size=N_TWEETS)
    stamps = np.sort(T0 + hour_idx * HOUR + offsets)

    tweets = []
    for i, ts in enumerate(stamps):
        ts = int(ts)
        author = authors[int(rng.choice(len(authors), p=a_weights))]
        for _ in range(10):
            if author["fade_after"] is None or ts < T0 + author["fade_after"]:
                break
            author = authors[int(rng.choice(len(authors), p=a_weights))]
        else:
            author = authors[-1]

        roll = rng.random()
        if roll < 0.08:
            kind, chosen = "irrelevant", []
        elif roll < 0.20:
            kind, chosen = "market", []
        else:
            kind = "coin"
            m = int(rng.choice([1, 2, 3], p=[0.72, 0.23, 0.05]))
            chosen = [coin_ids[j] for j in rng.choice(len(coin_ids), size=m,
                                                      replace=False, p=coin_w)]
        if kind == "irrelevant":
            label = "none"
        else:
            b = intensity[chosen[0]][(ts - T0) // HOUR] if chosen else 0.5
            roll = rng.random()
            if roll < 0.06:
                label = "tie"
            elif roll < 0.06 + b * 0.72:
                label = "bullish"
            elif roll < 0.06 + b * 0.72 + (1 - b) * 0.52:
                label = "bearish"
            else:
                label = "neutral"

        row = {
            "id": f"t{i + 1:05d}",
            "author_id": author["id"],
            "author_class": author["class"],
            "created_at": rfc3339(ts),
            "text": compose_text(rng, kind, chosen, alias_map, label),
        }
        if rng.random() < 0.65:
            growth = 1.0 + 0.1 * (ts - T0) / (HOURS * HOUR)
            row["followers"] = int(author["followers"] * growth)
        if rng.random() < 0.80:
            row["engagement"] = round(float(rng.gamma(2.0, author["engagement_mu"] / 2.0)), 1)
        if rng.random() < 0.12:
            target = authors[int(rng.choice(len(authors), p=retweet_w))]
            row["retweeted_author_id"] = target["id"]
        tweets.append(row)

    path = os.path.join(out_dir, "tweets.jsonl")
    with open(path, "w", encoding="utf-8") as handle:
        line_no = 0
        for row in tweets:
            if line_no in MALFORMED:
                handle.write(MALFORMED[line_no] + "\n")
                line_no += 1
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
            line_no += 1
    return tweets


def write_registry(out_dir: str) -> str:
    path = os.path.join(out_dir, "registry.json")
    payload = {
        "coins": [
            {"id": coin_id, "aliases": aliases, "tags": tags}
            for coin_id, aliases, tags, *_ in COINS
        ]
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    return path


def write_lexicon(out_dir: str) -> str:
    path = os.path.join(out_dir, "lexicon.toml")

    def toml_list(name, items):
        return f"{name} = [\n" + "".join(f'    "{t}",\n' for t in items) + "]\n"

    with open(path, "w", encoding="utf-8") as handle:
        handle.write(toml_list("relevance_terms", RELEVANCE_TERMS))
        handle.write(toml_list("bullish_terms", BULLISH_TERMS))
        handle.write(toml_list("bearish_terms", BEARISH_TERMS))
    return path


def write_profiles(rng, authors, out_dir: str) -> None:
    rows = []
    picks = rng.choice(len(authors), size=15, replace=False)
    bios = [
        "crypto analyst and educator",
        "markets, macro, and coffee",
        "on-chain data nerd",
        "trading full time since 2017",
        "newsletter on digital assets",
    ]
    for j, idx in enumerate(sorted(picks)):
        author = authors[int(idx)]
        row = {"author_id": author["id"]}
        if j % 3 != 2:
            row["followers"] = int(author["followers"] * 1.5) + 2500
        if j % 2 == 0:
            row["bio"] = bios[j % len(bios)]
        rows.append(row)
    with open(os.path.join(out_dir, "profiles.jsonl"), "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")


def signal_returns(out_dir: str) -> dict[str, np.ndarray]:
    """Standardized r_SS_crypto per planted coin, computed the same way
    the pipeline will compute it, via the library itself."""
    registry = load_registry(os.path.join(out_dir, "registry.json"))
    lexicon = load_lexicon(os.path.join(out_dir, "lexicon.toml"))
    tweets, _ = load_tweets(os.path.join(out_dir, "tweets.jsonl"))
    mentions = {t.id: detect_coin_mentions(t.text, registry) for t in tweets}
    verdicts = {
        t.id: lexicon_classify(t.text, lexicon, has_coin_mention=bool(mentions[t.id]))
        for t in tweets
    }
    grid = BucketSeries(resolution="hourly", origin=T0, values=(0,) * HOURS)
    counts = aggregate_signal_counts(tweets, verdicts, registry, grid, mentions=mentions)
    out = {}
    for coin in PLANTS:
        series = social_signal_series(counts[coin], counts["MARKET"])
        r = np.diff(np.log(np.asarray(series.values)))
        out[coin] = (r - r.mean()) / r.std()
    return out


def write_prices(rng, out_dir: str, planted: dict[str, np.ndarray]) -> None:
    factor = rng.standard_normal(HOURS - 1)
    series = {}
    for coin_id, _aliases, _tags, base, vol, _w in COINS:
        if coin_id == "USDT":
            noise = np.empty(HOURS)
            noise[0] = 0.0
            eps = rng.standard_normal(HOURS)
            for i in range(1, HOURS):
                noise[i] = 0.3 * noise[i - 1] + eps[i]
            series[coin_id] = 1.0 + 0.0004 * noise
            continue
        z = rng.standard_normal(HOURS - 1)
        returns = vol * (0.55 * factor + 0.45 * z)
        beta = PLANTS.get(coin_id)
        if beta is not None:
            shifted = np.zeros(HOURS - 1)
            shifted[2:] = planted[coin_id][:-2]
            returns = returns + vol * beta * shifted
        log_path = np.concatenate([[0.0], np.cumsum(returns)])
        series[coin_id] = base * np.exp(log_path)

    path = os.path.join(out_dir, "prices.csv")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("timestamp,coin,price\n")
        for coin_id in sorted(series):
            values = series[coin_id]
            for i in range(HOURS):
                handle.write(f"{rfc3339(T0 + i * HOUR)},{coin_id},{price_str(values[i])}\n")


def write_config(out_dir: str) -> None:
    content = """[inputs]
tweets = "tweets.jsonl"
prices = "prices.csv"
registry = "registry.json"
profiles = "profiles.jsonl"

[classifier]
kind = "lexicon"
lexicon = "lexicon.toml"

[network]
top_k = 12

# 27 weekly observations leave the unit-root screen underpowered, so the
# bundled run takes the recorded override; failures still land in the
# manifest warnings
[econometrics]
allow_nonstationary = true

[output]
dir = "out"

[run]
seed = 7
workers = 1
"""
    with open(os.path.join(out_dir, "config.toml"), "w", encoding="utf-8") as handle:
        handle.write(content)


def check_pools(out_dir: str) -> None:
    """No filler or sentiment word may collide with a coin alias, and no
    irrelevant text may trip the relevance terms; the fixture's ground
    truth depends on it."""
    registry = load_registry(os.path.join(out_dir, "registry.json"))
    for text in FILLERS + BULLISH_TERMS + BEARISH_TERMS + RELEVANCE_TERMS + IRRELEVANT_TEXTS:
        hits = detect_coin_mentions(text, registry)
        if hits:
            raise AssertionError(f"pool text {text!r} matches coins {sorted(hits)}")
    lexicon = load_lexicon(os.path.join(out_dir, "lexicon.toml"))
    for text in IRRELEVANT_TEXTS:
        verdict = lexicon_classify(text, lexicon)
        if verdict.relevant:
            raise AssertionError(f"irrelevant pool text {text!r} classifies as relevant")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--out",
        default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures"),
    )
    args = parser.parse_args()
    out_dir = os.path.normpath(args.out)
    os.makedirs(out_dir, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    write_registry(out_dir)
    write_lexicon(out_dir)
    check_pools(out_dir)
    authors = make_authors(rng)
    tweets = make_tweets(rng, authors, out_dir)
    write_profiles(rng, authors, out_dir)
    planted = signal_returns(out_dir)
    write_prices(rng, out_dir, planted)
    write_config(out_dir)
    print(f"fixture written to {out_dir}: {len(tweets)} tweets, "
          f"{len(COINS)} coins, {HOURS} hours")


if __name__ == "__main__":
    main()
