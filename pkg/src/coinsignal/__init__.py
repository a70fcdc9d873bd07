"""Batch analytics for crypto tweet corpora and hourly price data.

Turns a tweet corpus plus price history into hourly trading-signal series,
co-mention and retweet networks, and the statistical scans over them
(Granger causality, lagged cross-correlation, dual-horizon return
correlation, attribute similarity).
"""

__version__ = "0.1.0"
