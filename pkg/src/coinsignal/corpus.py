"""Tweet, price, and registry ingestion plus time-grid bucketing.

Everything concerning raw inputs lives here: parsing the JSONL tweet dump
with per-line rejection reporting, the coin registry with its alias
matcher, validated hourly price series, and the bucket grids (hourly,
daily, weekly) that downstream aggregation and resampling share. All
structures are immutable once built; readers may share them freely across
threads.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

HOUR = 3600
DAY = 24 * HOUR
WEEK = 7 * DAY

# epoch day zero is a Thursday; Mondays sit 3 days earlier
_WEEK_SHIFT = 3 * DAY

AUTHOR_CLASSES = ("influencer", "news")
RESOLUTIONS = ("hourly", "daily", "weekly")
_RESOLUTION_WIDTH = {"hourly": HOUR, "daily": DAY, "weekly": WEEK}


def parse_timestamp(text: str) -> int:
    """RFC 3339 instant to epoch seconds, normalized to UTC."""
    if not isinstance(text, str):
        raise ValueError(f"timestamp must be a string, got {type(text).__name__}")
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {text!r}") from exc
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a UTC offset")
    return int(parsed.timestamp())


def format_timestamp(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def truncate(epoch: int, resolution: str) -> int:
    """Start of the bucket containing ``epoch`` (weeks start Monday 00:00 UTC)."""
    if resolution == "hourly":
        return epoch - epoch % HOUR
    if resolution == "daily":
        return epoch - epoch % DAY
    if resolution == "weekly":
        return epoch - (epoch + _WEEK_SHIFT) % WEEK
    raise ValueError(f"unknown resolution {resolution!r}")


@dataclass(frozen=True)
class Tweet:
    """One corpus record. ``created_at`` is epoch seconds UTC."""

    id: str
    author_id: str
    author_class: str
    created_at: int
    text: str
    followers: int | None = None
    engagement: float | None = None
    retweeted_author_id: str | None = None

    def __post_init__(self):
        if self.author_class not in AUTHOR_CLASSES:
            raise ValueError(
                f"author_class must be one of {AUTHOR_CLASSES}, got {self.author_class!r}"
            )
        if self.followers is not None and self.followers < 0:
            raise ValueError(f"followers must be non-negative, got {self.followers}")
        if self.engagement is not None and self.engagement < 0:
            raise ValueError(f"engagement must be non-negative, got {self.engagement}")


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str


_REQUIRED_TWEET_KEYS = ("id", "author_id", "author_class", "created_at", "text")


def _tweet_from_record(record: dict) -> Tweet:
    for key in _REQUIRED_TWEET_KEYS:
        if key not in record:
            raise ValueError(f"missing field {key}")
    for key in ("id", "author_id", "text"):
        if not isinstance(record[key], str) or (key != "text" and not record[key]):
            raise ValueError(f"invalid field {key}")
    if record["author_class"] not in AUTHOR_CLASSES:
        raise ValueError("invalid field author_class")
    try:
        created = parse_timestamp(record["created_at"])
    except ValueError:
        raise ValueError("invalid field created_at") from None

    followers = record.get("followers")
    if followers is not None and (isinstance(followers, bool) or not isinstance(followers, int) or followers < 0):
        raise ValueError("invalid field followers")
    engagement = record.get("engagement")
    if engagement is not None:
        if isinstance(engagement, bool) or not isinstance(engagement, (int, float)) or engagement < 0:
            raise ValueError("invalid field engagement")
        engagement = float(engagement)
    retweeted = record.get("retweeted_author_id")
    if retweeted is not None and (not isinstance(retweeted, str) or not retweeted):
        raise ValueError("invalid field retweeted_author_id")

    return Tweet(
        id=record["id"],
        author_id=record["author_id"],
        author_class=record["author_class"],
        created_at=created,
        text=record["text"],
        followers=followers,
        engagement=engagement,
        retweeted_author_id=retweeted,
    )


def load_tweets(path: str) -> tuple[list[Tweet], list[Rejection]]:
    """Parse a JSONL tweet dump, skipping and reporting malformed lines.

    Valid records come back in file order. Every rejected line lands in
    the report with its 1-based line number and a reason; nothing is
    dropped silently. An unreadable file raises instead.
    """
    tweets: list[Tweet] = []
    rejections: list[Rejection] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError:
                rejections.append(Rejection(line_no, "invalid json"))
                continue
            if not isinstance(record, dict):
                rejections.append(Rejection(line_no, "not an object"))
                continue
            try:
                tweet = _tweet_from_record(record)
            except ValueError as exc:
                rejections.append(Rejection(line_no, str(exc)))
                continue
            if tweet.id in seen:
                rejections.append(Rejection(line_no, "duplicate id"))
                continue
            seen.add(tweet.id)
            tweets.append(tweet)
    return tweets, rejections


def write_tweets(tweets: list[Tweet], path: str) -> None:
    """Serialize a corpus back to JSONL; load_tweets inverts this exactly."""
    with open(path, "w", encoding="utf-8") as handle:
        for tweet in tweets:
            record = {
                "id": tweet.id,
                "author_id": tweet.author_id,
                "author_class": tweet.author_class,
                "created_at": format_timestamp(tweet.created_at),
                "text": tweet.text,
            }
            if tweet.followers is not None:
                record["followers"] = tweet.followers
            if tweet.engagement is not None:
                record["engagement"] = tweet.engagement
            if tweet.retweeted_author_id is not None:
                record["retweeted_author_id"] = tweet.retweeted_author_id
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class CoinEntry:
    coin_id: str
    aliases: tuple[str, ...]
    tags: tuple[str, ...]


@dataclass(frozen=True)
class CoinRegistry:
    """Coin catalogue with a compiled word-boundary alias matcher.

    Aliases match case-insensitively after an optional cashtag or hashtag
    prefix; matches embedded in longer words do not count. Longer aliases
    win the alternation so "binance coin" is not eaten by "coin".
    """

    coins: tuple[CoinEntry, ...]
    _alias_to_coin: dict = field(init=False, repr=False, compare=False)
    _matcher: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = [c.coin_id for c in self.coins]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate coin_id in registry")
        alias_map: dict[str, str] = {}
        for coin in self.coins:
            if not coin.aliases:
                raise ValueError(f"coin {coin.coin_id} has no aliases")
            for alias in coin.aliases:
                lowered = alias.lower()
                if not lowered:
                    raise ValueError(f"coin {coin.coin_id} has an empty alias")
                owner = alias_map.get(lowered)
                if owner is not None and owner != coin.coin_id:
                    raise ValueError(
                        f"alias {alias!r} maps to both {owner} and {coin.coin_id}"
                    )
                alias_map[lowered] = coin.coin_id
        # longest first so multiword aliases take precedence at a shared start
        ordered = sorted(alias_map, key=lambda a: (-len(a), a))
        pattern = "|".join(re.escape(a) for a in ordered)
        matcher = re.compile(rf"(?<!\w)[#$]?({pattern})(?!\w)", re.IGNORECASE)
        object.__setattr__(self, "_alias_to_coin", alias_map)
        object.__setattr__(self, "_matcher", matcher)

    def coin_ids(self) -> tuple[str, ...]:
        return tuple(c.coin_id for c in self.coins)

    def tags_for(self, coin_id: str) -> tuple[str, ...]:
        for coin in self.coins:
            if coin.coin_id == coin_id:
                return coin.tags
        raise KeyError(coin_id)


def load_registry(path: str) -> CoinRegistry:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict) or not isinstance(payload.get("coins"), list):
        raise ValueError("registry must be an object with a 'coins' list")
    entries = []
    for item in payload["coins"]:
        if not isinstance(item, dict) or "id" not in item or "aliases" not in item:
            raise ValueError(f"bad registry entry: {item!r}")
        entries.append(
            CoinEntry(
                coin_id=str(item["id"]),
                aliases=tuple(str(a) for a in item["aliases"]),
                tags=tuple(str(t) for t in item.get("tags", [])),
            )
        )
    return CoinRegistry(coins=tuple(entries))


def detect_coin_mentions(text: str, registry: CoinRegistry) -> frozenset[str]:
    """Deduplicated coin ids whose aliases appear in ``text``."""
    if not text:
        return frozenset()
    found = set()
    for match in registry._matcher.finditer(text):
        found.add(registry._alias_to_coin[match.group(1).lower()])
    return frozenset(found)


@dataclass(frozen=True)
class GroupStats:
    """Mention statistics for one tweet group; mean is None when empty."""

    group: str
    tweet_count: int
    mention_total: int
    mean: float | None
    histogram: dict[int, int]


def mention_statistics(
    tweets: list[Tweet],
    registry: CoinRegistry,
    split_by: str,
    *,
    labels: dict[str, str] | None = None,
) -> dict[str, GroupStats]:
    """Mean mentions per tweet and a mention-count histogram per group.

    ``split_by`` is "author_class" or "signal_label"; the latter needs a
    tweet-id to label mapping ("buy"/"not_buy", anything absent lands in
    "unlabeled"). Both enum groups are always reported; an empty group
    carries mean None rather than a fake zero.
    """
    if not tweets:
        raise ValueError("corpus is empty")
    if split_by == "author_class":
        groups = list(AUTHOR_CLASSES)
        def key(tweet: Tweet) -> str:
            return tweet.author_class
    elif split_by == "signal_label":
        if labels is None:
            raise ValueError("split_by=signal_label needs a labels mapping")
        groups = ["buy", "not_buy", "unlabeled"]
        def key(tweet: Tweet) -> str:
            return labels.get(tweet.id, "unlabeled")
    else:
        raise ValueError(f"unknown split_by {split_by!r}")

    counts: dict[str, list[int]] = {g: [] for g in groups}
    for tweet in tweets:
        counts.setdefault(key(tweet), []).append(
            len(detect_coin_mentions(tweet.text, registry))
        )

    out = {}
    for group in sorted(counts):
        values = counts[group]
        histogram: dict[int, int] = {}
        for v in values:
            histogram[v] = histogram.get(v, 0) + 1
        out[group] = GroupStats(
            group=group,
            tweet_count=len(values),
            mention_total=sum(values),
            mean=sum(values) / len(values) if values else None,
            histogram=dict(sorted(histogram.items())),
        )
    return out


@dataclass(frozen=True)
class PriceSeries:
    """Hour-aligned price history for one coin.

    Timestamps are epoch seconds on exact hour boundaries, strictly
    increasing; prices are positive. Gaps are permitted at construction
    and surface as errors only where an operation needs contiguity.
    """

    coin_id: str
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        px = np.asarray(self.prices, dtype=np.float64)
        if ts.ndim != 1 or px.ndim != 1 or ts.shape != px.shape:
            raise ValueError("timestamps and prices must be equally long 1-d arrays")
        if ts.size == 0:
            raise ValueError(f"empty price series for {self.coin_id}")
        if np.any(ts % HOUR != 0):
            bad = int(ts[np.argmax(ts % HOUR != 0)])
            raise ValueError(
                f"price timestamp not on an hour boundary: {format_timestamp(bad)}"
            )
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError(f"price timestamps not strictly increasing for {self.coin_id}")
        if np.any(~np.isfinite(px)) or np.any(px <= 0):
            raise ValueError(f"prices must be positive and finite for {self.coin_id}")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def gaps(self) -> list[tuple[int, int]]:
        """Missing-hour ranges as (first missing, last missing) pairs."""
        out = []
        steps = np.diff(self.timestamps)
        for i in np.flatnonzero(steps > HOUR):
            out.append((int(self.timestamps[i]) + HOUR, int(self.timestamps[i + 1]) - HOUR))
        return out

    def require_contiguous(self) -> None:
        gaps = self.gaps()
        if gaps:
            first, last = gaps[0]
            raise ValueError(
                f"price series for {self.coin_id} has a gap: missing hours "
                f"{format_timestamp(first)}..{format_timestamp(last)}"
            )


def load_prices(path: str) -> dict[str, PriceSeries]:
    """Read `timestamp,coin,price` CSV into per-coin hourly series."""
    rows: dict[str, list[tuple[int, float]]] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["timestamp", "coin", "price"]:
            raise ValueError(f"bad price header: {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"price line {line_no}: expected 3 columns, got {len(row)}")
            try:
                ts = parse_timestamp(row[0])
                price = float(row[2])
            except ValueError as exc:
                raise ValueError(f"price line {line_no}: {exc}") from None
            rows.setdefault(row[1], []).append((ts, price))

    series = {}
    for coin in sorted(rows):
        points = sorted(rows[coin])
        stamps = [p[0] for p in points]
        if len(set(stamps)) != len(stamps):
            raise ValueError(f"duplicate price timestamp for {coin}")
        series[coin] = PriceSeries(
            coin_id=coin,
            timestamps=np.array(stamps, dtype=np.int64),
            prices=np.array([p[1] for p in points], dtype=np.float64),
        )
    return series


@dataclass(frozen=True)
class BucketSeries:
    """Per-bucket aggregates on a fixed-width grid starting at ``origin``.

    Bucket i covers [origin + i*width, origin + (i+1)*width); the origin
    is aligned to its resolution, weeks starting Monday 00:00 UTC.
    """

    resolution: str
    origin: int
    values: tuple

    def __post_init__(self):
        if self.resolution not in RESOLUTIONS:
            raise ValueError(f"unknown resolution {self.resolution!r}")
        if self.origin != truncate(self.origin, self.resolution):
            raise ValueError("origin is not aligned to the resolution")

    @property
    def width(self) -> int:
        return _RESOLUTION_WIDTH[self.resolution]

    def bucket_index(self, epoch: int) -> int:
        return (epoch - self.origin) // self.width

    def bucket_starts(self) -> np.ndarray:
        return self.origin + self.width * np.arange(len(self.values), dtype=np.int64)


def bucket_tweet_counts(tweets: list[Tweet], resolution: str) -> BucketSeries:
    """Tweet counts per bucket; every tweet lands in exactly one bucket."""
    if not tweets:
        raise ValueError("corpus is empty")
    times = [t.created_at for t in tweets]
    origin = truncate(min(times), resolution)
    width = _RESOLUTION_WIDTH[resolution]
    n_buckets = (max(times) - origin) // width + 1
    counts = [0] * n_buckets
    for stamp in times:
        counts[(stamp - origin) // width] += 1
    return BucketSeries(resolution=resolution, origin=origin, values=tuple(counts))


def resample_prices(series: PriceSeries, resolution: str) -> BucketSeries:
    """Mean price per complete daily or weekly bucket.

    Partial buckets at either end are dropped. A gap anywhere in the
    series is an error naming the missing hour range, so every kept
    bucket mean covers its full complement of hours.
    """
    if resolution not in ("daily", "weekly"):
        raise ValueError(f"resample resolution must be daily or weekly, got {resolution!r}")
    series.require_contiguous()

    width = _RESOLUTION_WIDTH[resolution]
    per_hour = width // HOUR
    ts = series.timestamps
    first_full = truncate(int(ts[0]), resolution)
    if first_full < ts[0]:
        first_full += width
    # bucket must end on or before the last covered hour
    n_buckets = (int(ts[-1]) + HOUR - first_full) // width
    if n_buckets <= 0:
        raise ValueError(
            f"price series for {series.coin_id} does not cover one full "
            f"{resolution} bucket"
        )
    start_idx = int(np.searchsorted(ts, first_full))
    means = []
    for b in range(n_buckets):
        lo = start_idx + b * per_hour
        means.append(float(np.mean(series.prices[lo : lo + per_hour])))
    return BucketSeries(resolution=resolution, origin=first_full, values=tuple(means))
