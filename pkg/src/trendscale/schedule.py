"""Time-lag schedules ``l_1 < l_2 < ... < l_N`` in minutes."""

from __future__ import annotations

from dataclasses import dataclass


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScaleSchedule:
    """Ordered lags. Scale ``i`` (1-based, as in the literature) is ``lags[i - 1]``."""

    lags: tuple[int, ...]

    def __post_init__(self):
        lags = tuple(int(x) for x in self.lags)
        if not lags:
            raise ScheduleError("schedule must contain at least one lag")
        if lags[0] < 1:
            raise ScheduleError(f"lags must be positive, got {lags[0]}")
        for a, b in zip(lags, lags[1:]):
            if b <= a:
                raise ScheduleError(f"lags must be strictly increasing ({a} then {b})")
        object.__setattr__(self, "lags", lags)

    def __len__(self) -> int:
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)

    def lag(self, i: int) -> int:
        """Lag of scale ``i`` counted from 1."""
        if not 1 <= i <= len(self.lags):
            raise IndexError(f"scale index {i} outside 1..{len(self.lags)}")
        return self.lags[i - 1]

    @property
    def width(self) -> int:
        return len(self.lags)

    @property
    def max_lag(self) -> int:
        return self.lags[-1]

    def spec(self) -> str:
        if self == make_schedule(len(self)):
            return f"recur:{len(self)}"
        return ",".join(map(str, self.lags))


def make_schedule(n: int) -> ScaleSchedule:
    """First ``n`` lags of ``l_1=1, l_2=2, l_i = l_{i-2} + i``.

    Closed form: ``l_{2k-1} = k**2`` and ``l_{2k} = k*(k+1)``.
    """
    if n < 1:
        raise ScheduleError(f"schedule width must be >= 1, got {n}")
    lags = [1, 2][:n]
    for i in range(3, n + 1):
        lags.append(lags[i - 3] + i)
    return ScaleSchedule(tuple(lags))


def parse_schedule(text: str) -> ScaleSchedule:
    """Parse ``recur:N`` or an explicit comma-separated list such as ``1,5,30``."""
    text = text.strip()
    if text.startswith("recur:"):
        try:
            n = int(text[len("recur:"):])
        except ValueError:
            raise ScheduleError(f"bad schedule width in {text!r}") from None
        return make_schedule(n)
    try:
        lags = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ScheduleError(f"bad schedule {text!r}") from None
    return ScaleSchedule(lags)
