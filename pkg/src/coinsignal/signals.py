"""Tweet classification, trailing-window signal counts, and signal series.

Two classifier routes produce identical verdict structures: a local
lexicon matcher (deterministic, offline) and an external HTTP service
speaking a small JSON contract. Verdicts are three-class at the wire
(bullish, bearish, neutral) and collapse locally to the two-class
buy/not-buy scheme. Counting then slides a 24-hour half-open window
(t - 24h, t] over every clock hour, and the social signal smooths the
buy/not-buy ratio with +1 on both sides so it stays positive.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass

import numpy as np
import requests

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from coinsignal.corpus import HOUR, BucketSeries, CoinRegistry, Tweet, detect_coin_mentions

BUY = "buy"
NOT_BUY = "not_buy"
MARKET = "MARKET"
RAW_LABELS = ("bullish", "bearish", "neutral")
WINDOW_HOURS = 24


def collapse_label(raw_label: str) -> str:
    """Three-class to two-class: bullish is buy, everything else is not."""
    if raw_label not in RAW_LABELS:
        raise ValueError(f"unknown raw label {raw_label!r}")
    return BUY if raw_label == "bullish" else NOT_BUY


@dataclass(frozen=True)
class ClassifierVerdict:
    relevant: bool
    label: str | None
    source: str
    raw_label: str | None = None

    def __post_init__(self):
        if self.source not in ("lexicon", "external"):
            raise ValueError(f"unknown verdict source {self.source!r}")
        if self.relevant != (self.label is not None):
            raise ValueError("label must be present exactly when relevant")
        if self.label is not None and self.label not in (BUY, NOT_BUY):
            raise ValueError(f"unknown label {self.label!r}")
        if self.raw_label is not None and self.raw_label not in RAW_LABELS:
            raise ValueError(f"unknown raw label {self.raw_label!r}")


def _term_pattern(terms: frozenset[str]) -> re.Pattern | None:
    if not terms:
        return None
    ordered = sorted(terms, key=lambda t: (-len(t), t))
    body = "|".join(re.escape(t) for t in ordered)
    return re.compile(rf"(?<!\w)(?:{body})(?!\w)", re.IGNORECASE)


@dataclass(frozen=True)
class Lexicon:
    """Relevance plus bullish/bearish term lists with compiled matchers."""

    relevance_terms: frozenset[str]
    bullish_terms: frozenset[str]
    bearish_terms: frozenset[str]

    def __post_init__(self):
        overlap = self.bullish_terms & self.bearish_terms
        if overlap:
            raise ValueError(f"terms in both bullish and bearish lists: {sorted(overlap)}")
        for name in ("relevance_terms", "bullish_terms", "bearish_terms"):
            terms = getattr(self, name)
            if any(not t or t != t.lower() for t in terms):
                raise ValueError(f"{name} must be non-empty lowercase strings")
        object.__setattr__(self, "_relevance_re", _term_pattern(self.relevance_terms))
        object.__setattr__(self, "_bullish_re", _term_pattern(self.bullish_terms))
        object.__setattr__(self, "_bearish_re", _term_pattern(self.bearish_terms))


def load_lexicon(path: str) -> Lexicon:
    with open(path, "rb") as handle:
        payload = tomllib.load(handle)
    lists = {}
    for key in ("relevance_terms", "bullish_terms", "bearish_terms"):
        value = payload.get(key, [])
        if not isinstance(value, list) or any(not isinstance(t, str) for t in value):
            raise ValueError(f"{key} must be a list of strings")
        lists[key] = frozenset(t.lower() for t in value)
    return Lexicon(**lists)


def _count_matches(pattern: re.Pattern | None, text: str) -> int:
    return 0 if pattern is None else sum(1 for _ in pattern.finditer(text))


def lexicon_classify(
    text: str, lexicon: Lexicon, *, has_coin_mention: bool = False
) -> ClassifierVerdict:
    """Deterministic offline verdict from term occurrence counts.

    A text is relevant when it contains at least one relevance term or
    mentions a coin. Bullish beats bearish on raw occurrence count, ties
    fall to neutral, and the collapse maps only bullish to buy.
    """
    relevant = has_coin_mention or _count_matches(lexicon._relevance_re, text) > 0
    if not relevant:
        return ClassifierVerdict(relevant=False, label=None, source="lexicon")
    n_bullish = _count_matches(lexicon._bullish_re, text)
    n_bearish = _count_matches(lexicon._bearish_re, text)
    if n_bullish > n_bearish:
        raw = "bullish"
    elif n_bearish > n_bullish:
        raw = "bearish"
    else:
        raw = "neutral"
    return ClassifierVerdict(
        relevant=True, label=collapse_label(raw), source="lexicon", raw_label=raw
    )


class ClassifierProtocolError(RuntimeError):
    """The external service answered outside its wire contract."""


class ClassifierUnavailableError(RuntimeError):
    """Retries exhausted; carries the failed input range."""

    def __init__(self, message: str, batch_start: int, batch_end: int):
        self.batch_start = batch_start
        self.batch_end = batch_end
        super().__init__(f"{message} (texts {batch_start}..{batch_end})")


def _parse_verdicts(payload, expected: int) -> list[ClassifierVerdict]:
    if not isinstance(payload, dict) or not isinstance(payload.get("verdicts"), list):
        raise ClassifierProtocolError("response missing 'verdicts' list")
    rows = payload["verdicts"]
    if len(rows) != expected:
        raise ClassifierProtocolError(
            f"length mismatch: sent {expected} texts, got {len(rows)} verdicts"
        )
    out = []
    for row in rows:
        if not isinstance(row, dict) or not isinstance(row.get("relevant"), bool):
            raise ClassifierProtocolError(f"bad verdict row: {row!r}")
        if not row["relevant"]:
            out.append(ClassifierVerdict(relevant=False, label=None, source="external"))
            continue
        raw = row.get("label")
        if raw not in RAW_LABELS:
            raise ClassifierProtocolError(f"bad verdict label: {raw!r}")
        out.append(
            ClassifierVerdict(
                relevant=True, label=collapse_label(raw), source="external", raw_label=raw
            )
        )
    return out


def external_classify(
    texts: list[str],
    endpoint: str,
    *,
    batch_size: int = 64,
    timeout_s: float = 10.0,
    retries: int = 3,
    backoff_s: float = 0.5,
    token: str | None = None,
) -> list[ClassifierVerdict]:
    """Classify through the HTTP service, order-preserving.

    Batches of at most ``batch_size`` go out as {"texts": [...]};
    transient failures (connection errors, timeouts, 5xx) are retried
    with exponential backoff. Protocol violations are never retried, and
    exhaustion raises with the failed text range so the caller knows
    exactly what got no verdict. ``token``, when set, rides along as a
    bearer Authorization header.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if retries < 0:
        raise ValueError(f"retries must be >= 0, got {retries}")

    headers = {"Authorization": f"Bearer {token}"} if token else None
    verdicts: list[ClassifierVerdict] = []
    for start in range(0, len(texts), batch_size):
        batch = texts[start : start + batch_size]
        last_error = None
        for attempt in range(retries + 1):
            if attempt:
                time.sleep(backoff_s * 2 ** (attempt - 1))
            try:
                response = requests.post(
                    endpoint, json={"texts": batch}, timeout=timeout_s, headers=headers
                )
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if response.status_code >= 500:
                last_error = f"server error {response.status_code}"
                continue
            if response.status_code != 200:
                raise ClassifierProtocolError(
                    f"unexpected status {response.status_code}"
                )
            try:
                payload = response.json()
            except (ValueError, json.JSONDecodeError):
                raise ClassifierProtocolError("response body is not JSON") from None
            verdicts.extend(_parse_verdicts(payload, len(batch)))
            break
        else:
            raise ClassifierUnavailableError(
                f"classifier unreachable after {retries} retries: {last_error}",
                start,
                start + len(batch) - 1,
            )
    return verdicts


@dataclass(frozen=True)
class SignalCounts:
    """Labeled-tweet counts for one coin over (window_end - 24h, window_end]."""

    coin_id: str
    window_end: int
    n_buy: int
    n_not_buy: int

    def __post_init__(self):
        if self.n_buy < 0 or self.n_not_buy < 0:
            raise ValueError("counts must be non-negative")


def aggregate_signal_counts(
    tweets: list[Tweet],
    verdicts: dict[str, ClassifierVerdict],
    registry: CoinRegistry,
    grid: BucketSeries,
    *,
    mentions: dict[str, frozenset[str]] | None = None,
) -> dict[str, list[SignalCounts]]:
    """Trailing-24h counts per coin and per MARKET at every grid hour.

    A labeled tweet mentioning m >= 1 coins adds one full count to each
    of them; a relevant tweet mentioning none is market-level and counts
    under the MARKET key only. Irrelevant tweets count nowhere. Keys
    cover every registry coin (all-zero series included) plus MARKET.
    """
    if grid.resolution != "hourly":
        raise ValueError(f"grid must be hourly, got {grid.resolution}")
    if mentions is None:
        mentions = {
            t.id: detect_coin_mentions(t.text, registry) for t in tweets
        }

    stamps: dict[tuple[str, str], list[int]] = {}
    for tweet in tweets:
        verdict = verdicts.get(tweet.id)
        if verdict is None:
            raise ValueError(f"tweet {tweet.id} has no verdict")
        if not verdict.relevant:
            continue
        mentioned = mentions.get(tweet.id, frozenset())
        targets = sorted(mentioned) if mentioned else [MARKET]
        for coin in targets:
            stamps.setdefault((coin, verdict.label), []).append(tweet.created_at)

    hours = grid.bucket_starts()
    out: dict[str, list[SignalCounts]] = {}
    for coin in sorted(set(registry.coin_ids()) | {MARKET}):
        series = []
        per_label = {}
        for label in (BUY, NOT_BUY):
            times = np.array(sorted(stamps.get((coin, label), [])), dtype=np.int64)
            # half-open (t - 24h, t]: right side inclusive, left exclusive
            hi = np.searchsorted(times, hours, side="right")
            lo = np.searchsorted(times, hours - WINDOW_HOURS * HOUR, side="right")
            per_label[label] = hi - lo
        for i, hour in enumerate(hours):
            series.append(
                SignalCounts(
                    coin_id=coin,
                    window_end=int(hour),
                    n_buy=int(per_label[BUY][i]),
                    n_not_buy=int(per_label[NOT_BUY][i]),
                )
            )
        out[coin] = series
    return out


def social_signal(counts: SignalCounts) -> float:
    """Smoothed buy pressure (1 + n_buy) / (1 + n_not_buy)."""
    return (1.0 + counts.n_buy) / (1.0 + counts.n_not_buy)


def social_signal_with_market(
    coin_counts: SignalCounts, market_counts: SignalCounts
) -> float:
    """Coin counts widened by market-level counts in the same window."""
    if coin_counts.window_end != market_counts.window_end:
        raise ValueError(
            f"window mismatch: coin at {coin_counts.window_end}, "
            f"market at {market_counts.window_end}"
        )
    return (1.0 + coin_counts.n_buy + market_counts.n_buy) / (
        1.0 + coin_counts.n_not_buy + market_counts.n_not_buy
    )


@dataclass(frozen=True)
class SocialSignalSeries:
    """Hourly social-signal values for one coin; every value is positive."""

    coin_id: str
    variant: str
    window_ends: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if self.variant not in ("plain", "with_market"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if len(self.window_ends) != len(self.values):
            raise ValueError("window_ends and values differ in length")
        if any(v <= 0 for v in self.values):
            raise ValueError("social signal values must be positive")


def social_signal_series(
    coin_counts: list[SignalCounts],
    market_counts: list[SignalCounts] | None = None,
) -> SocialSignalSeries:
    """Assemble the hourly series, plain or market-adjusted."""
    if market_counts is None:
        values = tuple(social_signal(c) for c in coin_counts)
        variant = "plain"
    else:
        if len(market_counts) != len(coin_counts):
            raise ValueError("coin and market series differ in length")
        values = tuple(
            social_signal_with_market(c, m)
            for c, m in zip(coin_counts, market_counts)
        )
        variant = "with_market"
    return SocialSignalSeries(
        coin_id=coin_counts[0].coin_id if coin_counts else "",
        variant=variant,
        window_ends=tuple(c.window_end for c in coin_counts),
        values=values,
    )


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns r(t) = ln(v(t) / v(t-1)); one shorter than the source."""

    base: str
    coin_id: str
    resolution: str
    points: np.ndarray

    def __post_init__(self):
        if self.base not in ("price", "social_signal"):
            raise ValueError(f"unknown return base {self.base!r}")


def log_returns(
    values, *, base: str, coin_id: str, resolution: str
) -> ReturnSeries:
    """Log returns of a positive series; errors name the offending index."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("values must be 1-d")
    if arr.shape[0] < 2:
        raise ValueError(f"need at least 2 values for returns, got {arr.shape[0]}")
    bad = np.flatnonzero(~np.isfinite(arr) | (arr <= 0))
    if bad.size:
        raise ValueError(
            f"non-positive value at index {int(bad[0])}: {arr[int(bad[0])]!r}"
        )
    points = np.diff(np.log(arr))
    return ReturnSeries(base=base, coin_id=coin_id, resolution=resolution, points=points)
