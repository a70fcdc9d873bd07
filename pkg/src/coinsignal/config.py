"""Run configuration: one TOML file, CLI-flag overrides layered on top.

Input paths in the file are resolved relative to the file's own directory
so a checked-in fixture config works from any working directory; the
output directory is resolved against the working directory instead, since
that is where a caller expects run artifacts to land.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 has no stdlib TOML reader
    import tomli as tomllib

from coinsignal.corpus import parse_timestamp

POPULATIONS = ("pooled", "influencers", "news")
FILTER_RULES = ("degree_share", "degree_share_core", "edge_weight_share")
CLASSIFIER_KINDS = ("lexicon", "external")
DISTANCE_MODES = ("hop", "inverse_weight")


class ConfigError(ValueError):
    """Schema violation, carrying the offending ``section.key``."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "lexicon"
    lexicon: str | None = None
    endpoint: str | None = None
    batch_size: int = 64
    timeout_s: float = 10.0
    retries: int = 3
    backoff_s: float = 0.5


@dataclass(frozen=True)
class PipelineConfig:
    tweets: str = ""
    prices: str = ""
    registry: str = ""
    candidates: str | None = None
    profiles: str | None = None
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    population: str = "pooled"
    degree_share_theta: float = 0.01
    edge_share_theta: float = 0.01
    filter_rule: str = "degree_share"
    top_k: int = 10
    distance_mode: str = "hop"
    binarize_retweet: bool = False
    min_followers: int = 5000
    min_avg_engagement: float = 200.0
    activity_window_days: int = 90
    as_of: int | None = None
    description_terms: tuple[str, ...] = ()
    granger_max_lag: int = 24
    xcorr_hourly_max: int = 24
    xcorr_daily_max: int = 7
    significance_bands: tuple[float, ...] = (0.01, 0.05, 0.1)
    allow_nonstationary: bool = False
    out_dir: str = "out"
    seed: int = 0
    workers: int = 1


# section -> {toml key: (config attribute, expected type)}; bool checked
# before int because bool is an int subclass in Python
_SCHEMA = {
    "inputs": {
        "tweets": ("tweets", str),
        "prices": ("prices", str),
        "registry": ("registry", str),
        "candidates": ("candidates", str),
        "profiles": ("profiles", str),
    },
    "signals": {
        "population": ("population", str),
    },
    "network": {
        "degree_share_theta": ("degree_share_theta", float),
        "edge_share_theta": ("edge_share_theta", float),
        "filter_rule": ("filter_rule", str),
        "top_k": ("top_k", int),
        "distance_mode": ("distance_mode", str),
        "binarize_retweet": ("binarize_retweet", bool),
    },
    "influencer": {
        "min_followers": ("min_followers", int),
        "min_avg_engagement": ("min_avg_engagement", float),
        "activity_window_days": ("activity_window_days", int),
        "as_of": ("as_of", str),
        "description_terms": ("description_terms", list),
    },
    "econometrics": {
        "granger_max_lag": ("granger_max_lag", int),
        "xcorr_hourly_max": ("xcorr_hourly_max", int),
        "xcorr_daily_max": ("xcorr_daily_max", int),
        "significance_bands": ("significance_bands", list),
        "allow_nonstationary": ("allow_nonstationary", bool),
    },
    "output": {
        "dir": ("out_dir", str),
    },
    "run": {
        "seed": ("seed", int),
        "workers": ("workers", int),
    },
}

_CLASSIFIER_SCHEMA = {
    "kind": ("kind", str),
    "lexicon": ("lexicon", str),
    "endpoint": ("endpoint", str),
    "batch_size": ("batch_size", int),
    "timeout_s": ("timeout_s", float),
    "retries": ("retries", int),
    "backoff_s": ("backoff_s", float),
}


def _coerce(key: str, value, expected):
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true or false, got {value!r}")
        return value
    if expected is list:
        if not isinstance(value, list):
            raise ConfigError(key, f"expected a list, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def _apply_section(section: str, table: dict, schema: dict, out: dict) -> None:
    if not isinstance(table, dict):
        raise ConfigError(section, "expected a table")
    for key, value in table.items():
        if key not in schema:
            raise ConfigError(f"{section}.{key}", "unknown key")
        attr, expected = schema[key]
        out[attr] = _coerce(f"{section}.{key}", value, expected)


def _resolve(base_dir: str, path: str | None) -> str | None:
    # "" must survive untouched so validation can reject it by name
    if not path or os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Check every invariant, raising ConfigError naming the field."""
    for key, value in (
        ("inputs.tweets", cfg.tweets),
        ("inputs.prices", cfg.prices),
        ("inputs.registry", cfg.registry),
    ):
        if not value:
            raise ConfigError(key, "path must be non-empty")
    if cfg.population not in POPULATIONS:
        raise ConfigError(
            "signals.population", f"must be one of {POPULATIONS}, got {cfg.population!r}"
        )
    if cfg.classifier.kind not in CLASSIFIER_KINDS:
        raise ConfigError(
            "classifier.kind", f"must be one of {CLASSIFIER_KINDS}, got {cfg.classifier.kind!r}"
        )
    if cfg.classifier.kind == "lexicon" and not cfg.classifier.lexicon:
        raise ConfigError("classifier.lexicon", "required when kind is 'lexicon'")
    if cfg.classifier.kind == "external" and not cfg.classifier.endpoint:
        raise ConfigError("classifier.endpoint", "required when kind is 'external'")
    if cfg.classifier.batch_size < 1:
        raise ConfigError("classifier.batch_size", "must be >= 1")
    if cfg.classifier.retries < 1:
        raise ConfigError("classifier.retries", "must be >= 1")
    if cfg.classifier.timeout_s <= 0 or cfg.classifier.backoff_s < 0:
        raise ConfigError("classifier.timeout_s", "timeout must be > 0 and backoff >= 0")
    if cfg.filter_rule not in FILTER_RULES:
        raise ConfigError(
            "network.filter_rule", f"must be one of {FILTER_RULES}, got {cfg.filter_rule!r}"
        )
    if cfg.distance_mode not in DISTANCE_MODES:
        raise ConfigError(
            "network.distance_mode", f"must be one of {DISTANCE_MODES}, got {cfg.distance_mode!r}"
        )
    for key, theta in (
        ("network.degree_share_theta", cfg.degree_share_theta),
        ("network.edge_share_theta", cfg.edge_share_theta),
    ):
        if not 0.0 < theta < 1.0:
            raise ConfigError(key, f"must lie in (0, 1), got {theta}")
    if cfg.top_k < 1:
        raise ConfigError("network.top_k", "must be >= 1")
    if cfg.min_followers < 0 or cfg.min_avg_engagement < 0:
        raise ConfigError("influencer.min_followers", "thresholds must be >= 0")
    if cfg.activity_window_days < 1:
        raise ConfigError("influencer.activity_window_days", "must be >= 1")
    for key, lag in (
        ("econometrics.granger_max_lag", cfg.granger_max_lag),
        ("econometrics.xcorr_hourly_max", cfg.xcorr_hourly_max),
        ("econometrics.xcorr_daily_max", cfg.xcorr_daily_max),
    ):
        if lag < 1:
            raise ConfigError(key, f"must be >= 1, got {lag}")
    bands = cfg.significance_bands
    if not bands:
        raise ConfigError("econometrics.significance_bands", "must not be empty")
    for b in bands:
        if not 0.0 < b < 1.0:
            raise ConfigError(
                "econometrics.significance_bands", f"band {b} must lie in (0, 1)"
            )
    if any(b2 <= b1 for b1, b2 in zip(bands, bands[1:])):
        raise ConfigError(
            "econometrics.significance_bands", f"must be strictly increasing, got {list(bands)}"
        )
    if not cfg.out_dir:
        raise ConfigError("output.dir", "path must be non-empty")
    if cfg.workers < 1:
        raise ConfigError("run.workers", "must be >= 1")
    return cfg


def load_config(path: str, overrides: dict | None = None) -> PipelineConfig:
    """Parse and validate a TOML config file.

    ``overrides`` holds values from command-line flags (keys matching
    PipelineConfig attribute names) and wins over the file, which wins
    over defaults.
    """
    try:
        with open(path, "rb") as handle:
            payload = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML in {path}: {exc}") from exc

    values: dict = {}
    classifier_values: dict = {}
    for section, table in payload.items():
        if section == "classifier":
            _apply_section(section, table, _CLASSIFIER_SCHEMA, classifier_values)
        elif section in _SCHEMA:
            _apply_section(section, table, _SCHEMA[section], values)
        else:
            raise ConfigError(section, "unknown section")

    if "significance_bands" in values:
        raw = values["significance_bands"]
        for b in raw:
            if isinstance(b, bool) or not isinstance(b, (int, float)):
                raise ConfigError(
                    "econometrics.significance_bands", f"expected numbers, got {b!r}"
                )
        values["significance_bands"] = tuple(float(b) for b in raw)
    if "description_terms" in values:
        raw = values["description_terms"]
        for t in raw:
            if not isinstance(t, str):
                raise ConfigError("influencer.description_terms", f"expected strings, got {t!r}")
        values["description_terms"] = tuple(t.lower() for t in raw)
    if "as_of" in values:
        try:
            values["as_of"] = parse_timestamp(values["as_of"])
        except ValueError as exc:
            raise ConfigError("influencer.as_of", str(exc)) from exc

    base_dir = os.path.dirname(os.path.abspath(path))
    for attr in ("tweets", "prices", "registry", "candidates", "profiles"):
        if attr in values:
            values[attr] = _resolve(base_dir, values[attr])
    if "lexicon" in classifier_values:
        classifier_values["lexicon"] = _resolve(base_dir, classifier_values["lexicon"])

    cfg = PipelineConfig(classifier=ClassifierConfig(**classifier_values), **values)
    if overrides:
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown override")
        cfg = replace(cfg, **overrides)
    return validate_config(cfg)
