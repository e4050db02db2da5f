"""StockTwits message records and their CSV form."""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from typing import Iterable

from ..errors import ValidationError

MESSAGE_HEADER = ("Symbol", "Message", "Datetime", "User", "Message_Id")


@dataclass(frozen=True)
class RawMessage:
    symbol: str
    message: str
    datetime: dt.datetime
    user: str
    message_id: str


def parse_timestamp(text: str) -> dt.datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    A trailing ``Z`` is accepted; naive timestamps are taken to be UTC.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        value = dt.datetime.fromisoformat(s)
    except ValueError:
        raise ValidationError(f"unparseable datetime {text!r}") from None
    if value.tzinfo is None:
        return value.replace(tzinfo=dt.timezone.utc)
    return value.astimezone(dt.timezone.utc)


def format_timestamp(value: dt.datetime) -> str:
    if value.tzinfo is not None:
        value = value.astimezone(dt.timezone.utc)
    return value.strftime("%Y-%m-%dT%H:%M:%SZ")


def read_messages_csv(text: str) -> list[RawMessage]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(h.strip().lstrip("\ufeff") for h in header) != MESSAGE_HEADER:
        raise ValidationError(f"expected header {','.join(MESSAGE_HEADER)}, got {header!r}")
    out: list[RawMessage] = []
    seen: set[str] = set()
    for i, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(MESSAGE_HEADER):
            raise ValidationError(f"message row {i}: expected {len(MESSAGE_HEADER)} fields, got {len(row)}")
        symbol, message, stamp, user, message_id = row
        try:
            when = parse_timestamp(stamp)
        except ValidationError as exc:
            raise ValidationError(f"message row {i} (id {message_id}): {exc}") from None
        if message_id in seen:
            raise ValidationError(f"message row {i}: duplicate Message_Id {message_id}")
        seen.add(message_id)
        out.append(RawMessage(symbol.strip(), message, when, user.strip(), message_id.strip()))
    return out


def write_messages_csv(messages: Iterable[RawMessage]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MESSAGE_HEADER)
    for m in messages:
        writer.writerow([m.symbol, m.message, format_timestamp(m.datetime), m.user, m.message_id])
    return out.getvalue()
