"""Tick parsing and resampling onto an evenly spaced 1-minute bid/ask grid.

Prices are held as integer multiples of ``10**-digits`` (pips, 5 digits for
EUR/USD by default) so every later comparison is exact.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_DIGITS = 5
DEFAULT_MAX_GAP = 120
SERIES_HEADER = ("minute_index", "iso_time", "bid", "ask", "filled")


class IngestError(ValueError):
    """Base class for ingestion failures."""


class ParseError(IngestError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TickValidationError(IngestError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyInputError(IngestError):
    pass


class UninitializedSlotError(IngestError):
    pass


class GapError(IngestError):
    def __init__(self, first_gap_minute: int):
        super().__init__(
            f"no tick for minute {first_gap_minute} ({_iso(first_gap_minute)})"
        )
        self.first_gap_minute = first_gap_minute


@dataclass(frozen=True)
class TickRecord:
    timestamp: int
    bid: Decimal
    ask: Decimal


@dataclass(frozen=True)
class FormatDescriptor:
    """Layout of a delimited tick file.

    ``columns`` names the column order; any column not called ``timestamp``,
    ``bid`` or ``ask`` is ignored. ``timestamp_format`` is ``"epoch"``
    (integer seconds, UTC) or a :func:`datetime.strptime` pattern interpreted
    as UTC.
    """

    columns: tuple[str, ...] = ("timestamp", "bid", "ask")
    delimiter: str = ","
    timestamp_format: str = "epoch"
    header: bool = False

    def __post_init__(self):
        missing = {"timestamp", "bid", "ask"} - set(self.columns)
        if missing:
            raise ValueError(f"format descriptor lacks columns: {sorted(missing)}")


@dataclass(frozen=True)
class PriceSeries:
    """Minute-grid bid/ask series; slot ``t`` is minute ``anchor + t``."""

    anchor: int
    bids: np.ndarray
    asks: np.ndarray
    filled: np.ndarray
    digits: int = DEFAULT_DIGITS
    interval_seconds: int = field(default=60, init=False)

    def __post_init__(self):
        bids = np.ascontiguousarray(self.bids, dtype=np.int64)
        asks = np.ascontiguousarray(self.asks, dtype=np.int64)
        filled = np.ascontiguousarray(self.filled, dtype=bool)
        if not (len(bids) == len(asks) == len(filled)) or len(bids) < 1:
            raise ValueError("bids, asks and filled must share a length >= 1")
        if np.any(bids <= 0):
            raise ValueError("prices must be positive")
        if np.any(bids > asks):
            bad = int(np.argmax(bids > asks))
            raise ValueError(f"bid > ask at slot {bad}")
        for name, arr in (("bids", bids), ("asks", asks), ("filled", filled)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.bids)

    @classmethod
    def from_prices(cls, bids, asks, anchor: int = 0, digits: int = DEFAULT_DIGITS):
        """Build an all-observed series from decimal prices (floats, strings or Decimals)."""
        b = [to_pips(p, digits) for p in bids]
        a = [to_pips(p, digits) for p in asks]
        return cls(anchor, np.array(b), np.array(a), np.zeros(len(b), bool), digits)

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for t in range(len(self)):
            m = self.anchor + t
            w.writerow(
                (
                    m,
                    _iso(m),
                    format_pips(int(self.bids[t]), self.digits),
                    format_pips(int(self.asks[t]), self.digits),
                    int(self.filled[t]),
                )
            )


def to_pips(value, digits: int = DEFAULT_DIGITS) -> int:
    """Convert a decimal price to integer pips; rejects extra precision."""
    d = Decimal(str(value)).scaleb(digits)
    if d != d.to_integral_value():
        raise ValueError(f"{value} has more than {digits} fractional digits")
    return int(d)


def format_pips(pips: int, digits: int = DEFAULT_DIGITS) -> str:
    return str(Decimal(pips).scaleb(-digits).quantize(Decimal(1).scaleb(-digits)))


def _iso(minute: int) -> str:
    return datetime.fromtimestamp(minute * 60, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def _text_lines(stream) -> Iterable[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if isinstance(stream, io.RawIOBase) or isinstance(stream, io.BufferedIOBase):
        return io.TextIOWrapper(stream, encoding="utf-8")
    return stream


def _parse_timestamp(text: str, fmt: str) -> int:
    if fmt == "epoch":
        return int(text)
    dt = datetime.strptime(text, fmt)
    return int(dt.replace(tzinfo=timezone.utc).timestamp())


def parse_ticks(
    stream: Union[bytes, str, IO], fmt: FormatDescriptor = FormatDescriptor()
) -> list[TickRecord]:
    """Parse delimited ``timestamp,bid,ask`` records, sorted stably by time."""
    reader = csv.reader(_text_lines(stream), delimiter=fmt.delimiter)
    pos = {name: fmt.columns.index(name) for name in ("timestamp", "bid", "ask")}
    width = max(pos.values()) + 1
    records = []
    for lineno, row in enumerate(reader, start=1):
        if fmt.header and lineno == 1:
            continue
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < width:
            raise ParseError(lineno, f"expected {len(fmt.columns)} columns, got {len(row)}")
        try:
            ts = _parse_timestamp(row[pos["timestamp"]].strip(), fmt.timestamp_format)
            bid = Decimal(row[pos["bid"]].strip())
            ask = Decimal(row[pos["ask"]].strip())
        except (ValueError, InvalidOperation) as exc:
            raise ParseError(lineno, f"malformed row {row!r}") from exc
        if not (bid.is_finite() and ask.is_finite()):
            raise ParseError(lineno, "non-finite price")
        if bid <= 0 or ask <= 0:
            raise TickValidationError(lineno, "prices must be positive")
        if bid > ask:
            raise TickValidationError(lineno, f"bid {bid} > ask {ask}")
        records.append(TickRecord(ts, bid, ask))
    if not records:
        raise EmptyInputError("no tick records in input")
    records.sort(key=lambda r: r.timestamp)
    return records


@dataclass(frozen=True)
class CarryForward:
    max_gap: int = DEFAULT_MAX_GAP


@dataclass(frozen=True)
class Strict:
    pass


GapPolicy = Union[CarryForward, Strict]


def resample(
    ticks: Sequence[TickRecord],
    gap_policy: GapPolicy = CarryForward(),
    digits: int = DEFAULT_DIGITS,
    start_minute: int | None = None,
) -> PriceSeries:
    series, _ = resample_with_report(ticks, gap_policy, digits, start_minute)
    return series


def resample_with_report(
    ticks: Sequence[TickRecord],
    gap_policy: GapPolicy = CarryForward(),
    digits: int = DEFAULT_DIGITS,
    start_minute: int | None = None,
) -> tuple[PriceSeries, int]:
    """Resample ticks by last observation carried forward.

    Minute boundary ``m`` takes the last tick with ``timestamp <= 60*m``. The
    grid runs from the first boundary at or after the first tick (or
    ``start_minute``) to the first boundary at or after the last tick.
    Returns the series and the number of slots discarded by gap splitting.
    """
    if not ticks:
        raise EmptyInputError("no ticks to resample")
    ts = np.array([t.timestamp for t in ticks], dtype=np.int64)
    if np.any(np.diff(ts) < 0):
        raise ValueError("ticks must be sorted by timestamp")
    bids = np.array([to_pips(t.bid, digits) for t in ticks], dtype=np.int64)
    asks = np.array([to_pips(t.ask, digits) for t in ticks], dtype=np.int64)

    first = -(-int(ts[0]) // 60) if start_minute is None else start_minute
    last = -(-int(ts[-1]) // 60)
    if first * 60 < ts[0]:
        raise UninitializedSlotError(
            f"minute {first} ({_iso(first)}) precedes the first tick"
        )
    if last < first:
        raise UninitializedSlotError("start minute lies after the last tick")
    minutes = np.arange(first, last + 1, dtype=np.int64)
    src = np.searchsorted(ts, minutes * 60, side="right") - 1
    filled = np.zeros(len(minutes), dtype=bool)
    filled[1:] = src[1:] == src[:-1]

    if isinstance(gap_policy, Strict):
        if filled.any():
            raise GapError(int(minutes[np.argmax(filled)]))
        keep = slice(0, len(minutes))
    elif isinstance(gap_policy, CarryForward):
        keep = _longest_segment(filled, gap_policy.max_gap)
    else:
        raise TypeError(f"unknown gap policy {gap_policy!r}")

    discarded = len(minutes) - (keep.stop - keep.start)
    if discarded:
        log.info("gap split discarded %d of %d slots", discarded, len(minutes))
    series = PriceSeries(
        int(minutes[keep.start]),
        bids[src[keep]],
        asks[src[keep]],
        filled[keep],
        digits,
    )
    return series, discarded


def _longest_segment(filled: np.ndarray, max_gap: int) -> slice:
    """Longest run of slots not interrupted by more than ``max_gap`` filled slots.

    Over-long filled runs are dropped entirely; the segment after one starts at
    the next observed slot.
    """
    n = len(filled)
    cuts = []  # (start, stop) of over-long filled runs
    i = 0
    while i < n:
        if filled[i]:
            j = i
            while j < n and filled[j]:
                j += 1
            if j - i > max_gap:
                cuts.append((i, j))
            i = j
        else:
            i += 1
    best = slice(0, 0)
    start = 0
    for lo, hi in cuts + [(n, n)]:
        if lo - start > best.stop - best.start:
            best = slice(start, lo)
        start = hi
    return best


def read_series_csv(stream: Union[str, IO[str]], digits: int = DEFAULT_DIGITS) -> PriceSeries:
    """Read a series written by :meth:`PriceSeries.to_csv`."""
    reader = csv.reader(_text_lines(stream))
    header = next(reader, None)
    if header is None or tuple(header) != SERIES_HEADER:
        raise ParseError(1, f"expected header {','.join(SERIES_HEADER)}")
    minutes, bids, asks, filled = [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            minutes.append(int(row[0]))
            bids.append(to_pips(row[2], digits))
            asks.append(to_pips(row[3], digits))
            filled.append(bool(int(row[4])))
        except (ValueError, IndexError, InvalidOperation) as exc:
            raise ParseError(lineno, f"malformed row {row!r}") from exc
    if not minutes:
        raise EmptyInputError("series file has no rows")
    if np.any(np.diff(minutes) != 1):
        raise ParseError(2, "minute_index must increase by exactly 1 per row")
    return PriceSeries(minutes[0], np.array(bids), np.array(asks), np.array(filled), digits)
