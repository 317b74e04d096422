"""Matching average, collective response and tuple-similarity histogram.

All accumulators are integers; means are returned as :class:`fractions.Fraction`
so results are exact and independent of summation order. Undefined values
(empty conditioning sets, empty distance bins) are ``None``, never zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .shifts import ShiftSeries
from .trends import (
    TrendMatrix,
    TrendTuple,
    homogeneity_numerators,
    n_words,
    unpack_bits,
    words_to_int,
)

NAIVE_GUARD = 5000
SHIFT_CLASSES = (-1, 0, 1)


class AlignmentError(ValueError):
    pass


class UndefinedStatisticError(ValueError):
    pass


class OracleSizeError(ValueError):
    pass


@dataclass(frozen=True)
class AlignedSample:
    """Minutes where both the trend tuple and the shift are defined."""

    t_values: np.ndarray
    words: np.ndarray
    shifts: np.ndarray
    width: int
    lags: tuple[int, ...] = ()

    def __post_init__(self):
        if not (len(self.t_values) == self.words.shape[0] == len(self.shifts)):
            raise AlignmentError("t_values, tuples and shifts differ in length")

    def __len__(self) -> int:
        return len(self.t_values)

    @property
    def m_nonzero(self) -> int:
        return int(np.count_nonzero(self.shifts))

    @property
    def tuples(self) -> list[TrendTuple]:
        return [TrendTuple(words_to_int(w), self.width) for w in self.words]

    @classmethod
    def from_tuples(
        cls,
        tuples: Sequence[TrendTuple | int],
        shifts: Sequence[int],
        width: int | None = None,
        t_values: Sequence[int] | None = None,
    ) -> "AlignedSample":
        """Build a sample from plain tuples, mainly for tests and ad-hoc use."""
        bits = [t.bits if isinstance(t, TrendTuple) else int(t) for t in tuples]
        if width is None:
            if not tuples or not isinstance(tuples[0], TrendTuple):
                raise ValueError("width is required for raw integer tuples")
            width = tuples[0].width
        nw = n_words(width)
        words = np.zeros((len(bits), nw), dtype=np.uint64)
        mask = (1 << 64) - 1
        for k, b in enumerate(bits):
            if b >> width:
                raise ValueError(f"tuple {b:#x} exceeds width {width}")
            for j in range(nw):
                words[k, j] = (b >> (64 * j)) & mask
        s = np.asarray(shifts, dtype=np.int8)
        if np.any(np.abs(s) > 1):
            raise ValueError("shifts must lie in {-1, 0, +1}")
        t = np.arange(len(bits)) if t_values is None else np.asarray(t_values)
        return cls(np.asarray(t, dtype=np.int64), words, s, width)


def align(matrix: TrendMatrix, shifts: ShiftSeries) -> AlignedSample:
    if matrix.length != shifts.length:
        raise AlignmentError(
            f"trend matrix built on {matrix.length} minutes, shifts on {shifts.length}"
        )
    lo, hi = matrix.t_start, shifts.t_end
    n = max(hi - lo + 1, 0)
    return AlignedSample(
        np.arange(lo, lo + n, dtype=np.int64),
        matrix.words[:n],
        shifts.values[lo : lo + n],
        matrix.width,
        matrix.schedule.lags,
    )


def subsample(sample: AlignedSample, k: int, seed: int) -> AlignedSample:
    """Uniform subsample of ``k`` minutes without replacement, kept in time order.

    Minutes are ranked by PCG64 raw words so the choice is stable across numpy
    versions.
    """
    if k >= len(sample):
        return sample
    keys = np.random.PCG64(seed).random_raw(len(sample))
    idx = np.sort(np.argsort(keys, kind="stable")[:k])
    return AlignedSample(
        sample.t_values[idx], sample.words[idx], sample.shifts[idx], sample.width, sample.lags
    )


# ---------------------------------------------------------------- matching


@dataclass(frozen=True)
class MatchingProfile:
    lags: tuple[int, ...]
    trend: tuple[Fraction, ...]
    counter: tuple[Fraction, ...]
    matches: tuple[int, ...]
    m_nonzero: int


def _nonzero_bits(sample: AlignedSample):
    nz = sample.shifts != 0
    m = int(np.count_nonzero(nz))
    if m == 0:
        raise UndefinedStatisticError("no minute with a non-zero shift; matching average undefined")
    return unpack_bits(sample.words[nz], sample.width), sample.shifts[nz] > 0, m


def matching_average(sample: AlignedSample, i: int, variant: str = "trend") -> Fraction:
    """Mean agreement (+1 match, -1 mismatch) of scale ``i`` (1-based) with non-zero shifts."""
    if variant not in ("trend", "counter"):
        raise ValueError(f"variant must be 'trend' or 'counter', got {variant!r}")
    if not 1 <= i <= sample.width:
        raise IndexError(f"scale index {i} outside 1..{sample.width}")
    bits, up, m = _nonzero_bits(sample)
    col = bits[:, i - 1]
    if variant == "counter":
        col = ~col
    matches = int(np.count_nonzero(col == up))
    return Fraction(2 * matches - m, m)


def matching_profile(sample: AlignedSample) -> MatchingProfile:
    bits, up, m = _nonzero_bits(sample)
    matches = (bits == up[:, None]).sum(axis=0, dtype=np.int64).tolist()
    trend = tuple(Fraction(2 * k - m, m) for k in matches)
    # counter matches = m - matches
    counter = tuple(Fraction(2 * (m - k) - m, m) for k in matches)
    lags = sample.lags or tuple(range(1, sample.width + 1))
    return MatchingProfile(tuple(lags), trend, counter, tuple(matches), m)


# -------------------------------------------------------------- collective


@dataclass(frozen=True)
class CollectiveCurve:
    eps: tuple[Fraction, ...]
    values: tuple[Optional[Fraction], ...]
    counts: tuple[int, ...]


def default_eps_grid(width: int) -> list[Fraction]:
    """``1/N, 2/N, ..., 1, 1 + 1/N``."""
    return [Fraction(k, width) for k in range(1, width + 2)]


def collective_response(sample: AlignedSample, eps_grid: Iterable) -> CollectiveCurve:
    """Mean ``|S|`` over minutes with homogeneity strictly below each threshold."""
    grid = [Fraction(str(e)) if isinstance(e, float) else Fraction(e) for e in eps_grid]
    if not grid:
        raise ValueError("epsilon grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be strictly increasing")
    if grid[0] <= 0:
        raise ValueError("epsilon values must be positive")
    n = sample.width
    num = homogeneity_numerators(sample.words, n)  # H = num / n
    abs_s = np.abs(sample.shifts).astype(np.int64)
    # Counts of minutes and of |S| = 1 per homogeneity level num = 0..n
    level_count = np.bincount(num, minlength=n + 1)
    level_active = np.bincount(num, weights=None if len(num) == 0 else abs_s, minlength=n + 1)
    level_active = np.rint(level_active).astype(np.int64)
    values, counts = [], []
    for e in grid:
        # num / n < e  <=>  num * e.den < e.num * n
        sel = np.arange(n + 1) * e.denominator < e.numerator * n
        c = int(level_count[sel].sum())
        a = int(level_active[sel].sum())
        counts.append(c)
        values.append(Fraction(a, c) if c else None)
    return CollectiveCurve(tuple(grid), tuple(values), tuple(counts))


# -------------------------------------------------------------- similarity


@dataclass(frozen=True)
class TupleGroups:
    """Distinct tuples with total counts and per-shift-class counts.

    ``class_counts[:, k]`` counts shift ``SHIFT_CLASSES[k]`` (-1, 0, +1).
    """

    keys: np.ndarray
    counts: np.ndarray
    class_counts: np.ndarray
    width: int

    def __len__(self) -> int:
        return len(self.counts)


def build_tuple_index(sample: AlignedSample) -> TupleGroups:
    if len(sample) == 0:
        raise ValueError("cannot index an empty sample")
    keys, inverse = np.unique(sample.words, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    g = len(keys)
    class_counts = np.zeros((g, 3), dtype=np.int64)
    for k, s in enumerate(SHIFT_CLASSES):
        class_counts[:, k] = np.bincount(inverse[sample.shifts == s], minlength=g)
    counts = class_counts.sum(axis=1)
    return TupleGroups(keys, counts, class_counts, sample.width)


@dataclass(frozen=True)
class SimilarityHistogram:
    """Per Hamming distance ``r = 0..N``: unordered pair count and summed ``|S_i - S_j|``."""

    width: int
    pairs: tuple[int, ...]
    numerators: tuple[int, ...]

    def psi(self, r: int) -> Optional[Fraction]:
        p = self.pairs[r]
        return Fraction(self.numerators[r], p) if p else None

    @property
    def values(self) -> tuple[Optional[Fraction], ...]:
        return tuple(self.psi(r) for r in range(self.width + 1))

    @property
    def total_pairs(self) -> int:
        return sum(self.pairs)


# |s - s'| between shift classes, indexed like SHIFT_CLASSES
_ABS_DIFF = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=np.int64)


def _within_group(class_counts: np.ndarray) -> tuple[int, int]:
    n = class_counts.sum(axis=1)
    pairs = int((n * (n - 1) // 2).sum())
    c = class_counts
    num = int((c[:, 0] * c[:, 1] + c[:, 1] * c[:, 2] + 2 * c[:, 0] * c[:, 2]).sum())
    return pairs, num


def _histogram_pairs(groups: TupleGroups, block: int) -> tuple[list[int], list[int]]:
    """Sum over unordered group pairs ``u < v``, row blocks against the upper triangle."""
    n = groups.width
    nbins = n + 2  # bin n + 1 collects masked (v <= u) entries
    keys = groups.keys
    g = len(keys)
    counts = groups.counts
    c = groups.class_counts
    weighted = c @ _ABS_DIFF  # weighted[u, k] = sum_s c_u[s] |s - class_k|
    pairs = np.zeros(nbins, dtype=np.int64)
    nums = np.zeros(nbins, dtype=np.int64)
    col_w = [c[:, k].astype(np.float64) for k in range(3)]
    for a in range(0, g, block):
        b = min(a + block, g)
        rows = b - a
        d = np.zeros((rows, g - a), dtype=np.int64)
        for j in range(keys.shape[1]):
            d += np.bitwise_count(keys[a:b, j, None] ^ keys[None, a:, j])
        d[np.tril_indices(rows, 0, g - a)] = n + 1
        flat = (d + (np.arange(rows, dtype=np.int64) * nbins)[:, None]).ravel()
        # per[k][u, r] = sum over v of c_v[k] with distance r; exact in float64 (values <= sample size)
        per = [
            np.rint(
                np.bincount(flat, weights=np.broadcast_to(w[a:], (rows, g - a)).ravel(),
                            minlength=rows * nbins)
            ).astype(np.int64).reshape(rows, nbins)
            for w in col_w
        ]
        total = per[0] + per[1] + per[2]
        pairs += counts[a:b] @ total
        for k in range(3):
            nums += weighted[a:b, k] @ per[k]
    return pairs[: n + 1].tolist(), nums[: n + 1].tolist()


def _xor_convolution_bins(groups: TupleGroups) -> tuple[list[int], list[int]]:
    """Same sums via Walsh-Hadamard XOR-convolution over the full ``2**N`` tuple space."""
    n = groups.width
    size = 1 << n
    keys = groups.keys[:, 0].astype(np.int64)
    dense = np.zeros((3, size), dtype=np.int64)
    dense[:, keys] = groups.class_counts.T
    spec = _wht(dense)
    total = spec.sum(axis=0)
    # ordered-pair sums per XOR difference z
    stacked = np.stack([total * total, spec[0] * spec[1], spec[1] * spec[2], spec[0] * spec[2]])
    conv = _wht(stacked) >> n
    weight = np.bitwise_count(np.arange(size, dtype=np.uint64)).astype(np.int64)
    m = int(groups.counts.sum())
    binned = [_int_bincount(weight, row, n + 1) for row in conv]
    pairs = binned[0].copy()
    pairs[0] -= m  # self pairs
    pairs //= 2
    nums = binned[1] + binned[2] + 2 * binned[3]
    return pairs.tolist(), nums.tolist()


def _int_bincount(idx: np.ndarray, weights: np.ndarray, nbins: int) -> np.ndarray:
    out = np.zeros(nbins, dtype=np.int64)
    np.add.at(out, idx, weights)
    return out


def _wht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (length ``2**n``)."""
    a = a.copy()
    lead = a.shape[:-1]
    size = a.shape[-1]
    h = 1
    while h < size:
        v = a.reshape(*lead, size // (2 * h), 2, h)
        x = v[..., 0, :].copy()
        v[..., 0, :] += v[..., 1, :]
        v[..., 1, :] = x - v[..., 1, :]
        h *= 2
    return a


def _xor_route_ok(groups: TupleGroups) -> bool:
    n = groups.width
    m = int(groups.counts.sum())
    # int64 headroom: |spectrum product| <= m**2, inverse sums 2**n of those
    return n <= 24 and m * m * (1 << n) < 2**62


def similarity_histogram(
    groups: TupleGroups, width: int | None = None, method: str = "auto", block: int = 256
) -> SimilarityHistogram:
    """Pair counts and ``|S_i - S_j|`` sums per tuple Hamming distance, from grouped tuples.

    ``method="pairs"`` sums over all distinct-group pairs (``O(G**2)``);
    ``method="xor"`` uses a Walsh-Hadamard XOR-convolution over the ``2**N``
    tuple space and is only available for small ``N``. ``"auto"`` picks the
    cheaper one.
    """
    n = groups.width if width is None else width
    if n != groups.width:
        raise ValueError(f"width {n} does not match grouped tuples of width {groups.width}")
    if len(groups) == 0:
        raise ValueError("no groups")
    if method == "auto":
        g = len(groups)
        method = "xor" if _xor_route_ok(groups) and (n << n) < g * g else "pairs"
    if method == "xor":
        if not _xor_route_ok(groups):
            raise ValueError(f"xor route unavailable for width {n}")
        pairs, nums = _xor_convolution_bins(groups)
    elif method == "pairs":
        pairs, nums = _histogram_pairs(groups, block)
        p0, n0 = _within_group(groups.class_counts)
        pairs[0] += p0
        nums[0] += n0
    else:
        raise ValueError(f"unknown method {method!r}")
    return SimilarityHistogram(n, tuple(int(p) for p in pairs), tuple(int(x) for x in nums))


def similarity_histogram_naive(sample: AlignedSample, guard: int = NAIVE_GUARD) -> SimilarityHistogram:
    """Literal double loop over all unordered pairs of distinct minutes."""
    m = len(sample)
    if m > guard:
        raise OracleSizeError(f"sample of {m} exceeds oracle guard {guard}")
    n = sample.width
    tuples = [words_to_int(w) for w in sample.words]
    shifts = sample.shifts.tolist()
    pairs = [0] * (n + 1)
    nums = [0] * (n + 1)
    for i in range(m):
        ti, si = tuples[i], shifts[i]
        for j in range(i + 1, m):
            r = (ti ^ tuples[j]).bit_count()
            pairs[r] += 1
            nums[r] += abs(si - shifts[j])
    return SimilarityHistogram(n, tuple(pairs), tuple(nums))


def similarity_for_schedule(
    matrix: TrendMatrix, shifts: ShiftSeries, sample_size: int | None = None, seed: int = 0
) -> tuple[SimilarityHistogram, int]:
    """Convenience: align, optionally subsample, group and histogram. Returns (histogram, M)."""
    sample = align(matrix, shifts)
    if sample_size is not None:
        sample = subsample(sample, sample_size, seed)
    if len(sample) == 0:
        return SimilarityHistogram(matrix.width, (0,) * (matrix.width + 1), (0,) * (matrix.width + 1)), 0
    return similarity_histogram(build_tuple_index(sample)), len(sample)

