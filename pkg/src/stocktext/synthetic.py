"""Planted-signal corpora: synthetic prices plus messages whose words
encode each trading day's direction, for end-to-end checks with a known
answer."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .labelling import BINARY, Alignment, LabelScheme, join_messages
from .market_data import OhlcBar, PriceSeries, fill_calendar
from .textprep.messages import RawMessage
from .textprep.pipeline import preprocess_many

UP_WORDS = ("breakout", "rally", "surge", "soaring", "bullish", "ripping", "green", "squeeze")
DOWN_WORDS = ("crash", "dump", "plunge", "bearish", "selloff", "tanking", "red", "collapse")
FILLER_WORDS = ("earnings", "chart", "volume", "today", "watch", "options", "week", "price", "trade", "market", "guidance", "analyst")
DECOR = ("", " https://example.com/post", " 🚀", " #StockMarket", " @trader99")


@dataclass(frozen=True)
class PlantedCorpus:
    series: PriceSeries
    messages: list[RawMessage]
    # direction of each observed trading day: True when close > open
    up_days: dict[dt.date, bool]


def planted_prices(n_days: int, rng: np.random.Generator, symbol: str = "SYN", start: dt.date = dt.date(2020, 1, 6)) -> tuple[PriceSeries, dict[dt.date, bool]]:
    """Weekday-only bars whose same-day move is always at least 1%, so all
    three labelling schemes agree on direction."""
    bars = []
    up_days = {}
    price = 100.0
    day = start
    while len(bars) < n_days:
        if day.weekday() < 5:
            up = bool(rng.random() < 0.5)
            move = rng.uniform(0.01, 0.03)
            open_ = round(price * rng.uniform(0.995, 1.005), 2)
            close = round(open_ * (1 + move if up else 1 - move), 2)
            high = round(max(open_, close) * 1.01, 2)
            low = round(min(open_, close) * 0.99, 2)
            volume = int(rng.integers(1_000_000, 5_000_000))
            bars.append(OhlcBar(day, open_, high, low, close, close, volume))
            up_days[day] = up
            price = close
        day += dt.timedelta(days=1)
    return PriceSeries(symbol, tuple(bars)), up_days


def planted_corpus(
    n_messages: int = 2000,
    n_days: int = 60,
    noise: float = 0.0,
    seed: int = 0,
    symbol: str = "SYN",
) -> PlantedCorpus:
    """Each message: the cashtag, three direction words, three filler words
    and optional decoration. With ``noise`` each word is independently
    replaced by a uniformly drawn word from the whole vocabulary."""
    rng = np.random.default_rng(seed)
    series, up_days = planted_prices(n_days, rng, symbol)
    days = sorted(up_days)
    everything = UP_WORDS + DOWN_WORDS + FILLER_WORDS
    messages = []
    for i in range(n_messages):
        day = days[int(rng.integers(len(days)))]
        pool = UP_WORDS if up_days[day] else DOWN_WORDS
        words = [pool[int(rng.integers(len(pool)))] for _ in range(3)]
        words += [FILLER_WORDS[int(rng.integers(len(FILLER_WORDS)))] for _ in range(3)]
        words = [everything[int(rng.integers(len(everything)))] if rng.random() < noise else w for w in words]
        order = rng.permutation(len(words))
        text = f"${symbol} " + " ".join(words[j] for j in order) + DECOR[int(rng.integers(len(DECOR)))]
        when = dt.datetime.combine(day, dt.time(13), tzinfo=dt.timezone.utc) + dt.timedelta(
            seconds=int(rng.integers(0, 7 * 3600))
        )
        messages.append(RawMessage(symbol, text, when, f"u{int(rng.integers(1, 500))}", str(100000 + i)))
    return PlantedCorpus(series, messages, up_days)


def planted_dataset(
    corpus: PlantedCorpus, scheme: LabelScheme = BINARY, alignment: Alignment = Alignment.SAME_DAY
) -> tuple[list[tuple[str, ...]], np.ndarray]:
    """Label, preprocess and return (token docs, integer labels) for a
    planted corpus, in message order."""
    labelled, _ = join_messages(corpus.messages, fill_calendar(corpus.series), scheme, alignment)
    cleaned = preprocess_many([m.message for m in labelled])
    docs = [c.tokens for c in cleaned]
    y = np.array([m.outcome.to_int(scheme) for m in labelled], dtype=np.int64)
    return docs, y
