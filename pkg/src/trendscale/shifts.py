"""Three-valued currency rate shift over a holding horizon, net of the spread."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .ingest import PriceSeries
from .trends import WindowError

DEFAULT_HORIZONS = (15, 60, 240)


class InsufficientFutureError(ValueError):
    pass


@dataclass(frozen=True)
class ShiftSeries:
    """``values[t]`` is the shift opened at minute ``t``, for ``t`` in ``[0, t_end]``."""

    values: np.ndarray
    horizon: int
    length: int

    @property
    def t_end(self) -> int:
        return self.length - 1 - self.horizon

    def __len__(self) -> int:
        return len(self.values)

    def zero_fraction(self) -> float:
        return float(np.count_nonzero(self.values == 0)) / len(self.values)

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "S"))
        for t, s in enumerate(self.values.tolist()):
            w.writerow((t, s))


def shift_at(series: PriceSeries, t: int, horizon: int) -> int:
    if horizon < 1 or t < 0 or t + horizon >= len(series):
        raise WindowError(f"t={t}, horizon={horizon} outside series of length {len(series)}")
    bid, ask = series.bids, series.asks
    down = ask[t + horizon] < bid[t]
    up = bid[t + horizon] > ask[t]
    assert not (up and down), "bid <= ask makes both branches impossible"
    return -1 if down else 1 if up else 0


def shift_series(series: PriceSeries, horizon: int) -> ShiftSeries:
    T = len(series)
    if horizon < 1:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if T <= horizon:
        raise InsufficientFutureError(f"series length {T} must exceed horizon {horizon}")
    bid, ask = series.bids, series.asks
    n = T - horizon
    down = ask[horizon:] < bid[:n]
    up = bid[horizon:] > ask[:n]
    assert not np.any(up & down)
    values = up.astype(np.int8) - down.astype(np.int8)
    values.flags.writeable = False
    return ShiftSeries(values, horizon, T)
