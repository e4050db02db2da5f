"""Turn daily price moves into message labels.

Three schemes are supported:

* ``binary``: positive when the close beats the reference price, else negative.
* ``pct3``: percent change above +threshold is positive, below -threshold is
  negative, and the closed band in between is neutral.
* ``pct2``: as ``pct3``, but days in the neutral band are excluded and their
  messages dropped.

The reference price is the same day's open (``same-day``) or the previous
calendar day's close (``prev-day``) on a calendar-filled series.
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import io
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError
from .market_data import PriceSeries
from .textprep.messages import RawMessage, format_timestamp, parse_timestamp

LABELLED_HEADER = ("symbol", "message", "datetime", "user", "message_id", "pct_change", "label_int")


class SchemeKind(enum.Enum):
    BINARY = "binary"
    PCT_TWO = "pct2"
    PCT_THREE = "pct3"


@dataclass(frozen=True)
class LabelScheme:
    kind: SchemeKind
    threshold: float | None = None

    def __post_init__(self):
        if self.kind is SchemeKind.BINARY:
            if self.threshold is not None:
                raise ValidationError("binary scheme takes no threshold")
        else:
            if self.threshold is None:
                object.__setattr__(self, "threshold", 0.5)
            if not self.threshold > 0:
                raise ValidationError(f"threshold must be > 0, got {self.threshold}")

    @classmethod
    def parse(cls, name: str, threshold: float | None = None) -> "LabelScheme":
        kind = SchemeKind(name)
        return cls(kind, None if kind is SchemeKind.BINARY else threshold)

    @property
    def is_pct(self) -> bool:
        return self.kind is not SchemeKind.BINARY

    @property
    def codes(self) -> tuple[int, ...]:
        """Integer codes in ascending order; this is the class order used
        by confusion matrices and models."""
        return (-1, 0, 1) if self.kind is SchemeKind.PCT_THREE else (0, 1)


BINARY = LabelScheme(SchemeKind.BINARY)
PCT_TWO = LabelScheme(SchemeKind.PCT_TWO)
PCT_THREE = LabelScheme(SchemeKind.PCT_THREE)


class Alignment(enum.Enum):
    SAME_DAY = "same-day"
    PREV_DAY = "prev-day"


class Label(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    def to_int(self, scheme: LabelScheme) -> int:
        if self is Label.NEUTRAL and scheme.kind is not SchemeKind.PCT_THREE:
            raise ValidationError(f"neutral has no code under {scheme.kind.value}")
        if self is Label.POSITIVE:
            return 1
        if scheme.kind is SchemeKind.PCT_THREE:
            return -1 if self is Label.NEGATIVE else 0
        return 0

    @classmethod
    def from_int(cls, value: int, scheme: LabelScheme) -> "Label":
        if scheme.kind is SchemeKind.PCT_THREE:
            table = {1: cls.POSITIVE, 0: cls.NEUTRAL, -1: cls.NEGATIVE}
        else:
            table = {1: cls.POSITIVE, 0: cls.NEGATIVE}
        try:
            return table[int(value)]
        except KeyError:
            raise ValidationError(f"label code {value!r} invalid under {scheme.kind.value}") from None


class Excluded(enum.Enum):
    """Outcome of a pct2 day that falls inside the neutral band."""

    EXCLUDED = "excluded"


EXCLUDED = Excluded.EXCLUDED


@dataclass(frozen=True)
class DayLabel:
    date: dt.date
    scheme: LabelScheme
    alignment: Alignment
    pct_change: float | None
    outcome: Label | Excluded

    @property
    def excluded(self) -> bool:
        return self.outcome is EXCLUDED


@dataclass(frozen=True)
class LabelledMessage:
    symbol: str
    message: str
    datetime: dt.datetime
    user: str
    message_id: str
    outcome: Label
    date: dt.date
    pct_change: float | None = None

    @property
    def raw(self) -> RawMessage:
        return RawMessage(self.symbol, self.message, self.datetime, self.user, self.message_id)


def reference_prices(series: PriceSeries, date: dt.date, alignment: Alignment, prev_reference: str) -> tuple[float, float]:
    """Return (compared close, reference price) for ``date``."""
    bar = series.bar(date)
    if alignment is Alignment.SAME_DAY:
        return bar.close, bar.open
    prev_date = date - dt.timedelta(days=1)
    if prev_date not in series:
        raise ValidationError(f"prev-day alignment needs a bar for {prev_date}")
    prev = series.bar(prev_date)
    if prev_reference == "close":
        return bar.close, prev.close
    if prev_reference == "open":
        return bar.close, prev.open
    raise ValidationError(f"prev_reference must be 'close' or 'open', got {prev_reference!r}")


def pct_change(
    series: PriceSeries, date: dt.date, alignment: Alignment, *, prev_reference: str = "close"
) -> float:
    """Signed percent move of ``date``'s close against its reference price.

    ``prev_reference="open"`` switches the prev-day reference to the previous
    day's open instead of its close.
    """
    close, ref = reference_prices(series, date, alignment, prev_reference)
    assert ref > 0
    return 100.0 * (close - ref) / ref


def label_day(
    series: PriceSeries,
    date: dt.date,
    scheme: LabelScheme,
    alignment: Alignment,
    *,
    prev_reference: str = "close",
) -> DayLabel:
    if scheme.kind is SchemeKind.BINARY:
        # Binary prev-day always compares against the previous close.
        close, ref = reference_prices(series, date, alignment, "close")
        outcome = Label.POSITIVE if close > ref else Label.NEGATIVE
        return DayLabel(date, scheme, alignment, None, outcome)

    close, ref = reference_prices(series, date, alignment, prev_reference)
    pct = 100.0 * (close - ref) / ref
    # Band membership is decided exactly on the stored prices so results do
    # not hinge on rounding of the float percentage.
    exact = 100 * (Fraction(close) - Fraction(ref)) / Fraction(ref)
    threshold = Fraction(scheme.threshold)
    if exact > threshold:
        outcome: Label | Excluded = Label.POSITIVE
    elif exact < -threshold:
        outcome = Label.NEGATIVE
    elif scheme.kind is SchemeKind.PCT_THREE:
        outcome = Label.NEUTRAL
    else:
        outcome = EXCLUDED
    return DayLabel(date, scheme, alignment, pct, outcome)


def label_series(
    series: PriceSeries, scheme: LabelScheme, alignment: Alignment, *, prev_reference: str = "close"
) -> dict[dt.date, DayLabel]:
    """Label every date of ``series`` that has the data its alignment needs."""
    dates = [b.date for b in series.bars]
    if alignment is Alignment.PREV_DAY:
        dates = [d for d in dates if d - dt.timedelta(days=1) in series]
    return {d: label_day(series, d, scheme, alignment, prev_reference=prev_reference) for d in dates}


def message_date(timestamp: dt.datetime, tz_offset: float = 0.0) -> dt.date:
    """Calendar date of a UTC timestamp after shifting it by ``tz_offset`` hours."""
    if timestamp.tzinfo is not None:
        timestamp = timestamp.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return (timestamp + dt.timedelta(hours=tz_offset)).date()


def join_messages(
    messages: Sequence[RawMessage],
    series: PriceSeries,
    scheme: LabelScheme,
    alignment: Alignment,
    tz_offset: float = 0.0,
    *,
    prev_reference: str = "close",
) -> tuple[list[LabelledMessage], int]:
    """Attach each message's day label; returns (labelled, excluded count).

    Messages are kept in input order. Any message whose date has no label
    raises, listing every offending message id.
    """
    cache: dict[dt.date, DayLabel] = {}
    out: list[LabelledMessage] = []
    excluded = 0
    missing: list[str] = []
    for msg in messages:
        date = message_date(msg.datetime, tz_offset)
        day = cache.get(date)
        if day is None:
            try:
                day = label_day(series, date, scheme, alignment, prev_reference=prev_reference)
            except ValidationError:
                missing.append(msg.message_id)
                continue
            cache[date] = day
        if day.excluded:
            excluded += 1
            continue
        out.append(
            LabelledMessage(
                msg.symbol, msg.message, msg.datetime, msg.user, msg.message_id,
                day.outcome, date, day.pct_change,
            )
        )
    if missing:
        span = f"{series.start}..{series.end}" if len(series) else "empty series"
        raise ValidationError(
            f"{len(missing)} message(s) dated outside the price series ({span}): {', '.join(missing)}"
        )
    return out, excluded


def class_balance(labelled: Iterable[LabelledMessage]) -> dict[Label, float]:
    """Share of each label among the (non-excluded) labelled messages."""
    counts = Counter(m.outcome for m in labelled)
    total = sum(counts.values())
    if total == 0:
        raise ValidationError("class_balance of an empty dataset")
    return {label: counts[label] / total for label in Label if counts[label]}


def write_labelled_csv(rows: Iterable[LabelledMessage], scheme: LabelScheme) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LABELLED_HEADER)
    for m in rows:
        pct = "" if m.pct_change is None or not scheme.is_pct else repr(m.pct_change)
        writer.writerow(
            [m.symbol, m.message, format_timestamp(m.datetime), m.user, m.message_id, pct,
             m.outcome.to_int(scheme)]
        )
    return out.getvalue()


def read_labelled_csv(text: str, scheme: LabelScheme, tz_offset: float = 0.0) -> list[LabelledMessage]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != LABELLED_HEADER:
        raise ValidationError(f"expected labelled header {','.join(LABELLED_HEADER)}, got {header!r}")
    rows = []
    for i, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(LABELLED_HEADER):
            raise ValidationError(f"labelled row {i}: expected {len(LABELLED_HEADER)} fields")
        symbol, message, stamp, user, message_id, pct, code = row
        when = parse_timestamp(stamp)
        rows.append(
            LabelledMessage(
                symbol, message, when, user, message_id, Label.from_int(int(code), scheme),
                message_date(when, tz_offset), float(pct) if pct else None,
            )
        )
    return rows
