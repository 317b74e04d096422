"""Seedable synthetic bid/ask series used as null models and positive controls.

Random numbers come from numpy's ``PCG64`` bit generator (PCG XSL-RR 128/64)
seeded through ``SeedSequence(seed)``. Only the raw 64-bit output stream
(``PCG64.random_raw``) is consumed; numpy guarantees that stream is stable
across versions and platforms. Each minute step draws one word and moves the
mid price up when its top bit is set, down otherwise. All price dynamics run
in integer pips.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np

from .ingest import DEFAULT_DIGITS, PriceSeries

KINDS = ("random_walk", "drift", "mean_revert")
# 2004-10-01T00:00Z, so synthetic series sit on a plausible calendar.
DEFAULT_ANCHOR = 1096588800 // 60


class GeneratorSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "random_walk"
    length: int = 100_000
    seed: int = 42
    step_scale: int = 1
    spread: int = 2
    drift: int = 0
    reversion_strength: str = "0.1"
    anchor_price: int | None = None
    initial_price: int = 120_000
    anchor: int = DEFAULT_ANCHOR

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeneratorSpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.length < 2:
            raise GeneratorSpecError("length must be >= 2")
        if self.spread < 0 or self.spread % 2:
            raise GeneratorSpecError(f"spread must be a non-negative even pip count, got {self.spread}")
        if self.initial_price <= 0:
            raise GeneratorSpecError("initial_price must be positive")
        if self.step_scale < 0:
            raise GeneratorSpecError("step_scale must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise GeneratorSpecError("seed must fit in 64 unsigned bits")
        k = Fraction(self.reversion_strength)
        if self.kind == "mean_revert" and not 0 < k <= 1:
            raise GeneratorSpecError("reversion_strength must lie in (0, 1]")

    @classmethod
    def parse(cls, text: str, **overrides) -> "GeneratorSpec":
        """Parse ``kind=mean_revert,length=100000,seed=7,...``.

        A bare first token is taken as the kind; ``T`` and ``step`` are
        accepted as aliases for ``length`` and ``step_scale``.
        """
        aliases = {"T": "length", "step": "step_scale", "strength": "reversion_strength"}
        fields = {}
        for i, part in enumerate(p for p in text.split(",") if p.strip()):
            if "=" not in part:
                if i == 0:
                    fields["kind"] = part.strip()
                    continue
                raise GeneratorSpecError(f"expected key=value, got {part!r}")
            key, value = (s.strip() for s in part.split("=", 1))
            key = aliases.get(key, key)
            if key not in cls.__dataclass_fields__:
                raise GeneratorSpecError(f"unknown generator field {key!r}")
            fields[key] = value
        fields.update({k: v for k, v in overrides.items() if v is not None})
        typed = {}
        for key, value in fields.items():
            if key in ("kind", "reversion_strength"):
                typed[key] = str(value)
            else:
                try:
                    typed[key] = int(value)
                except ValueError:
                    raise GeneratorSpecError(f"{key} must be an integer, got {value!r}") from None
        return cls(**typed)

    def as_dict(self) -> dict:
        return asdict(self)

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return replace(self, seed=seed)


def up_moves(seed: int, n: int) -> np.ndarray:
    """``n`` fair coin flips (True = up) from the top bits of PCG64's raw stream."""
    raw = np.random.PCG64(seed).random_raw(n)
    return (raw >> np.uint64(63)).astype(bool)


def generate(spec: GeneratorSpec, digits: int = DEFAULT_DIGITS) -> PriceSeries:
    half = spec.spread // 2
    floor = 1 + half  # keeps bid >= 1 pip
    steps = np.where(up_moves(spec.seed, spec.length - 1), spec.step_scale, -spec.step_scale)
    if spec.kind == "drift":
        steps = steps + spec.drift
    mid = np.empty(spec.length, dtype=np.int64)
    mid[0] = max(spec.initial_price, floor)
    if spec.kind == "mean_revert":
        k = Fraction(spec.reversion_strength)
        target = spec.initial_price if spec.anchor_price is None else spec.anchor_price
        m = int(mid[0])
        for t, step in enumerate(steps.tolist(), start=1):
            m = max(m + round(k * (target - m)) + step, floor)
            mid[t] = m
    else:
        path = int(mid[0]) + np.concatenate(([0], np.cumsum(steps)))
        if path.min() >= floor:
            mid[:] = path
        else:
            m = int(mid[0])
            for t, step in enumerate(steps.tolist(), start=1):
                m = max(m + step, floor)
                mid[t] = m
    return PriceSeries(
        spec.anchor, mid - half, mid + half, np.zeros(spec.length, bool), digits
    )
