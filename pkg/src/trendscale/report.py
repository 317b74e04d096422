"""Plot-ready CSV writers for the statistics.

Values are exact fractions rendered with 12 decimals (round half even);
undefined values are written as ``NA``.
"""

from __future__ import annotations

import csv
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import IO, Iterable, Optional

from .stats import CollectiveCurve, MatchingProfile, SimilarityHistogram

NA = "NA"
_QUANTUM = Decimal("1e-12")


def fmt(value: Optional[Fraction]) -> str:
    if value is None:
        return NA
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(value.numerator) / Decimal(value.denominator)
        return str(d.quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))


def _writer(fh: IO[str]):
    return csv.writer(fh, lineterminator="\n")


MATCHING_HEADER = ("i", "l_i", "E_trend", "E_counter", "M_nonzero")


def write_matching(fh: IO[str], profile: Optional[MatchingProfile], lags=None) -> int:
    """Write one row per scale. ``profile=None`` writes ``NA`` rows for ``lags``."""
    w = _writer(fh)
    w.writerow(MATCHING_HEADER)
    if profile is None:
        for i, lag in enumerate(lags, start=1):
            w.writerow((i, lag, NA, NA, 0))
        return len(lags)
    for i, (lag, e, c) in enumerate(zip(profile.lags, profile.trend, profile.counter), start=1):
        w.writerow((i, lag, fmt(e), fmt(c), profile.m_nonzero))
    return len(profile.lags)


COLLECTIVE_HEADER = ("l_pr", "eps", "T", "count")


def write_collective(fh: IO[str], curves: Iterable[tuple[int, CollectiveCurve]]) -> int:
    w = _writer(fh)
    w.writerow(COLLECTIVE_HEADER)
    rows = 0
    for horizon, curve in curves:
        for e, v, c in zip(curve.eps, curve.values, curve.counts):
            w.writerow((horizon, fmt(e), fmt(v), c))
            rows += 1
    return rows


SIMILARITY_HEADER = ("N", "l_pr", "M", "r", "psi", "pairs")


def write_similarity(
    fh: IO[str], histograms: Iterable[tuple[int, int, int, SimilarityHistogram]]
) -> int:
    """Rows for each ``(N, l_pr, M, histogram)``; ``M`` is the (sub)sample size."""
    w = _writer(fh)
    w.writerow(SIMILARITY_HEADER)
    rows = 0
    for n, horizon, m, hist in histograms:
        for r in range(hist.width + 1):
            w.writerow((n, horizon, m, r, fmt(hist.psi(r)), hist.pairs[r]))
            rows += 1
    return rows
