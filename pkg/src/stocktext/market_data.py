"""Daily OHLC price history: CSV ingestion, optional HTTP fetch, calendar fill.

Non-trading days (weekends, holidays) are filled with the midpoint of the
nearest observed bars on either side of the gap. Every day inside one gap
receives the same values; the fill never extrapolates past the first or last
observed bar.
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import math
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from typing import Iterable

from .errors import PipelineRuntimeError, ValidationError

OHLC_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")
PRICE_FIELDS = ("open", "high", "low", "close", "adj_close")

DATE_FORMATS = {"dmy": "%d/%m/%Y", "iso": "%Y-%m-%d"}


class OhlcError(ValidationError):
    """Malformed or inconsistent OHLC data."""


class FetchError(PipelineRuntimeError):
    """Base class for fetch failures."""


class TransportError(FetchError):
    """The endpoint could not be reached."""


class HttpStatusError(FetchError):
    """The endpoint answered with a non-success status."""


class EmptyBodyError(FetchError):
    """The endpoint answered successfully but with no content."""


class Provenance(enum.Enum):
    OBSERVED = "observed"
    IMPUTED = "imputed"


@dataclass(frozen=True)
class OhlcBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: int
    provenance: Provenance = Provenance.OBSERVED

    def __post_init__(self):
        for name in PRICE_FIELDS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise OhlcError(f"{self.date}: non-positive price {name}={value!r}")
        if self.volume < 0:
            raise OhlcError(f"{self.date}: negative volume {self.volume}")
        if not (self.low <= min(self.open, self.close) and max(self.open, self.close) <= self.high):
            raise OhlcError(
                f"{self.date}: low/high ordering violated "
                f"(low={self.low}, open={self.open}, close={self.close}, high={self.high})"
            )

    @property
    def observed(self) -> bool:
        return self.provenance is Provenance.OBSERVED


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    bars: tuple[OhlcBar, ...] = ()
    _by_date: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise OhlcError(f"dates not strictly increasing at {cur.date}")
        object.__setattr__(self, "_by_date", {b.date: b for b in self.bars})

    def __len__(self) -> int:
        return len(self.bars)

    def __contains__(self, date: dt.date) -> bool:
        return date in self._by_date

    def bar(self, date: dt.date) -> OhlcBar:
        try:
            return self._by_date[date]
        except KeyError:
            raise ValidationError(f"{self.symbol or 'series'}: no bar for {date}") from None

    @property
    def start(self) -> dt.date | None:
        return self.bars[0].date if self.bars else None

    @property
    def end(self) -> dt.date | None:
        return self.bars[-1].date if self.bars else None

    def observed_bars(self) -> list[OhlcBar]:
        return [b for b in self.bars if b.observed]


def _parse_volume(text: str) -> int:
    # Spreadsheet exports write large volumes as e.g. "1.17E+08".
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"volume {text!r} is not integral") from None
        return int(value)


def parse_ohlc_csv(text: str | Iterable[str], symbol: str = "", date_format: str = "iso") -> PriceSeries:
    """Parse a ``Date,Open,High,Low,Close,Adj Close,Volume`` CSV.

    ``date_format`` is ``"iso"`` (YYYY-MM-DD) or ``"dmy"`` (DD/MM/YYYY); there
    is no auto-detection. Row indices in error messages count data rows from 1.
    """
    if date_format not in DATE_FORMATS:
        raise ValidationError(f"unknown date_format {date_format!r}; expected one of {sorted(DATE_FORMATS)}")
    fmt = DATE_FORMATS[date_format]
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != OHLC_HEADER:
        raise OhlcError(f"expected header {','.join(OHLC_HEADER)}, got {header!r}")

    bars: dict[dt.date, OhlcBar] = {}
    for row_index, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(OHLC_HEADER):
            raise OhlcError(f"row {row_index}: expected {len(OHLC_HEADER)} fields, got {len(row)}")
        cells = [c.strip() for c in row]
        try:
            date = dt.datetime.strptime(cells[0], fmt).date()
            prices = [float(c) for c in cells[1:6]]
            volume = _parse_volume(cells[6])
        except ValueError as exc:
            raise OhlcError(f"row {row_index}: malformed row {row!r} ({exc})") from None
        if date in bars:
            raise OhlcError(f"row {row_index}: duplicate date {date}")
        try:
            bars[date] = OhlcBar(date, *prices, volume=volume)
        except OhlcError as exc:
            raise OhlcError(f"row {row_index}: {exc}") from None
    return PriceSeries(symbol, tuple(bars[d] for d in sorted(bars)))


def serialize_ohlc_csv(series: PriceSeries, date_format: str = "iso") -> str:
    """Inverse of :func:`parse_ohlc_csv`; floats are written with ``repr`` so
    the round trip is exact. Provenance is not part of the format."""
    fmt = DATE_FORMATS[date_format]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(OHLC_HEADER)
    for b in series.bars:
        writer.writerow([b.date.strftime(fmt), *(repr(getattr(b, f)) for f in PRICE_FIELDS), b.volume])
    return out.getvalue()


def fetch_ohlc(
    symbol: str,
    start: dt.date,
    end: dt.date,
    endpoint: str,
    *,
    allow_network: bool = False,
    timeout: float = 10.0,
) -> str:
    """Download the raw OHLC CSV body for ``symbol`` over ``[start, end]``.

    The request is ``GET {endpoint}/{symbol}?start=YYYY-MM-DD&end=YYYY-MM-DD``.
    The body is returned unparsed; hand it to :func:`parse_ohlc_csv`.
    """
    if not allow_network:
        raise ValidationError("network access is disabled; set allow_network to fetch")
    query = urllib.parse.urlencode({"start": start.isoformat(), "end": end.isoformat()})
    url = f"{endpoint.rstrip('/')}/{urllib.parse.quote(symbol)}?{query}"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise HttpStatusError(f"{url}: HTTP {exc.code}") from None
    except (urllib.error.URLError, OSError) as exc:
        raise TransportError(f"{url}: {exc}") from None
    text = body.decode("utf-8-sig")
    if not text.strip():
        raise EmptyBodyError(f"{url}: empty body")
    return text


def _midpoint_bar(date: dt.date, prev: OhlcBar, nxt: OhlcBar) -> OhlcBar:
    prices = {f: (getattr(prev, f) + getattr(nxt, f)) / 2 for f in PRICE_FIELDS}
    # half-up rounding on integer volumes
    volume = (prev.volume + nxt.volume + 1) // 2
    return OhlcBar(date, volume=volume, provenance=Provenance.IMPUTED, **prices)


def fill_calendar(series: PriceSeries) -> PriceSeries:
    """Give every calendar day between the first and last observed bar a bar.

    Imputed bars already present in the input are discarded and rebuilt from
    the observed ones, which makes the operation idempotent.
    """
    observed = series.observed_bars()
    if len(observed) < 2:
        raise ValidationError(f"fill_calendar needs at least 2 observed bars, got {len(observed)}")
    one_day = dt.timedelta(days=1)
    out: list[OhlcBar] = [observed[0]]
    for prev, nxt in zip(observed, observed[1:]):
        day = prev.date + one_day
        if day < nxt.date:
            template = _midpoint_bar(day, prev, nxt)
            while day < nxt.date:
                out.append(template if day == template.date else _replace_date(template, day))
                day += one_day
        out.append(nxt)
    filled = PriceSeries(series.symbol, tuple(out))
    assert filled.bars[0].observed and filled.bars[-1].observed
    return filled


def _replace_date(bar: OhlcBar, date: dt.date) -> OhlcBar:
    return OhlcBar(
        date, bar.open, bar.high, bar.low, bar.close, bar.adj_close, bar.volume, bar.provenance
    )

