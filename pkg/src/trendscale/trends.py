"""Per-scale discrete trends of the ask price and their bit-packed tuples.

Scale ``i`` (1-based) is bit ``i - 1`` of the tuple; a set bit means the ask
rose strictly over the lag, a clear bit means it fell or stayed equal.
Tuples are packed little-endian into ``ceil(N / 64)`` uint64 words.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Sequence

import numpy as np

from .ingest import PriceSeries
from .schedule import ScaleSchedule

MAX_WIDTH = 128


class WindowError(IndexError):
    pass


class InsufficientHistoryError(ValueError):
    pass


def n_words(width: int) -> int:
    return (width + 63) // 64


@dataclass(frozen=True)
class TrendTuple:
    bits: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"tuple width must be in 1..{MAX_WIDTH}, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits exceed tuple width")

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> "TrendTuple":
        bits = 0
        for i, s in enumerate(signs):
            if s not in (-1, 1):
                raise ValueError(f"trend signs must be -1 or +1, got {s}")
            if s == 1:
                bits |= 1 << i
        return cls(bits, len(signs))

    def signs(self) -> list[int]:
        return [1 if self.bits >> i & 1 else -1 for i in range(self.width)]

    def sign(self, i: int) -> int:
        """Trend sign of scale ``i`` (1-based)."""
        return 1 if self.bits >> (i - 1) & 1 else -1

    def hex(self) -> str:
        return f"{self.bits:0{(self.width + 3) // 4}x}"


def counter(tup: TrendTuple) -> TrendTuple:
    """Counter-trend tuple: every sign flipped."""
    return TrendTuple(tup.bits ^ ((1 << tup.width) - 1), tup.width)


def homogeneity(tup: TrendTuple) -> Fraction:
    """``|sum of signs| / N`` as an exact fraction."""
    return Fraction(abs(2 * tup.bits.bit_count() - tup.width), tup.width)


def trend_at(series: PriceSeries, lag: int, t: int) -> int:
    if lag < 1 or t - lag < 0 or t >= len(series):
        raise WindowError(f"t={t}, lag={lag} outside series of length {len(series)}")
    return 1 if series.asks[t] > series.asks[t - lag] else -1


@dataclass(frozen=True)
class TrendMatrix:
    """Packed tuples for every minute ``t`` in ``[t_start, length)``.

    Row ``k`` of ``words`` is the tuple of minute ``t_start + k``.
    """

    words: np.ndarray
    schedule: ScaleSchedule
    length: int

    @property
    def t_start(self) -> int:
        return self.schedule.max_lag

    @property
    def width(self) -> int:
        return len(self.schedule)

    def __len__(self) -> int:
        return self.words.shape[0]

    def tuple_at(self, t: int) -> TrendTuple:
        k = t - self.t_start
        if not 0 <= k < len(self):
            raise WindowError(f"no tuple for minute {t}")
        return TrendTuple(words_to_int(self.words[k]), self.width)

    def bit_columns(self) -> np.ndarray:
        """Boolean array of shape ``(rows, N)``; column ``i`` is scale ``i + 1``."""
        return unpack_bits(self.words, self.width)

    def homogeneity_numerators(self) -> np.ndarray:
        """``N * H(t)`` per row, i.e. ``|2 popcount - N|``."""
        return homogeneity_numerators(self.words, self.width)

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "tuple_hex", "H"))
        nums = self.homogeneity_numerators()
        digits = (self.width + 3) // 4
        for k in range(len(self)):
            bits = words_to_int(self.words[k])
            h = Fraction(int(nums[k]), self.width)
            w.writerow((self.t_start + k, f"{bits:0{digits}x}", f"{float(h):.12f}"))


def words_to_int(row: np.ndarray) -> int:
    return sum(int(w) << (64 * j) for j, w in enumerate(row))


def unpack_bits(words: np.ndarray, width: int) -> np.ndarray:
    out = np.empty((words.shape[0], width), dtype=bool)
    for i in range(width):
        out[:, i] = (words[:, i // 64] >> np.uint64(i % 64)) & np.uint64(1)
    return out


def popcount_rows(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def homogeneity_numerators(words: np.ndarray, width: int) -> np.ndarray:
    return np.abs(2 * popcount_rows(words) - width)


def trend_matrix(series: PriceSeries, schedule: ScaleSchedule) -> TrendMatrix:
    width = len(schedule)
    if width > MAX_WIDTH:
        raise ValueError(f"schedule width {width} exceeds packing bound {MAX_WIDTH}")
    T = len(series)
    l_max = schedule.max_lag
    if T <= l_max:
        raise InsufficientHistoryError(
            f"series length {T} must exceed the largest lag {l_max}"
        )
    asks = series.asks
    now = asks[l_max:]
    words = np.zeros((T - l_max, n_words(width)), dtype=np.uint64)
    for i, lag in enumerate(schedule.lags):
        rose = now > asks[l_max - lag : T - lag]
        words[:, i // 64] |= rose.astype(np.uint64) << np.uint64(i % 64)
    words.flags.writeable = False
    return TrendMatrix(words, schedule, T)
