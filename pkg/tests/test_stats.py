from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trendscale.ingest import PriceSeries
from trendscale.schedule import make_schedule
from trendscale.shifts import shift_series
from trendscale.stats import (
    AlignedSample,
    AlignmentError,
    OracleSizeError,
    UndefinedStatisticError,
    align,
    build_tuple_index,
    collective_response,
    default_eps_grid,
    matching_average,
    matching_profile,
    similarity_histogram,
    similarity_histogram_naive,
    subsample,
)
from trendscale.trends import TrendTuple, trend_matrix

from nullcheck import flatness_z


def flat_series(n):
    p = np.full(n, 120000)
    return PriceSeries(0, p, p + 2, np.zeros(n, bool))


def sample_of(signs_rows, shifts):
    return AlignedSample.from_tuples([TrendTuple.from_signs(r) for r in signs_rows], shifts)


def random_sample(rng, m, width, distinct=None):
    hi = 1 << (width if distinct is None else min(width, distinct))
    bits = [int(x) for x in rng.integers(0, hi, m, dtype=np.uint64)] if width <= 63 else [
        int.from_bytes(rng.bytes(16), "little") >> (128 - width) for _ in range(m)
    ]
    return AlignedSample.from_tuples(bits, rng.integers(-1, 2, m), width=width)


# ------------------------------------------------------------------ align


def test_align_window():
    s = flat_series(100)
    sample = align(trend_matrix(s, make_schedule(6)), shift_series(s, 15))
    assert make_schedule(6).max_lag == 12
    assert sample.t_values.tolist() == list(range(12, 85))
    assert len(sample) == 73


def test_align_disjoint_windows_empty():
    s = flat_series(20)
    assert len(align(trend_matrix(s, make_schedule(6)), shift_series(s, 15))) == 0


def test_align_mismatched_sources():
    with pytest.raises(AlignmentError):
        align(trend_matrix(flat_series(50), make_schedule(3)), shift_series(flat_series(60), 5))


def test_align_contents():
    rng = np.random.default_rng(2)
    mid = 120000 + np.cumsum(rng.choice([-1, 1], 400))
    s = PriceSeries(0, mid - 1, mid + 1, np.zeros(400, bool))
    m, sh = trend_matrix(s, make_schedule(8)), shift_series(s, 7)
    sample = align(m, sh)
    for k, t in enumerate(sample.t_values.tolist()):
        assert sample.tuples[k] == m.tuple_at(t)
        assert sample.shifts[k] == sh.values[t]


# --------------------------------------------------------------- matching


def test_perfect_matching():
    sample = sample_of([[1, -1], [-1, 1], [1, 1]], [1, -1, 1])
    assert matching_average(sample, 1) == 1
    assert matching_average(sample, 1, "counter") == -1


def test_hand_example():
    sample = sample_of([[1], [-1], [1], [1]], [1, 0, -1, 1])
    assert matching_average(sample, 1) == Fraction(1, 3)
    assert matching_average(sample, 1, "counter") == Fraction(-1, 3)


def test_undefined_without_nonzero_shift():
    sample = sample_of([[1], [-1]], [0, 0])
    with pytest.raises(UndefinedStatisticError):
        matching_average(sample, 1)
    with pytest.raises(UndefinedStatisticError):
        matching_profile(sample)


def test_profile_all_ones():
    sample = sample_of([[1, 1, 1]] * 5, [1] * 5)
    p = matching_profile(sample)
    assert p.trend == (1, 1, 1) and p.counter == (-1, -1, -1) and p.m_nonzero == 5


def brute_matching(tuples, shifts, i, sign=1):
    vals = [1 if sign * t.sign(i) == s else -1 for t, s in zip(tuples, shifts) if s != 0]
    return Fraction(sum(vals), len(vals))


@given(st.integers(1, 128), st.integers(1, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_profile_matches_brute_force(width, m, seed):
    rng = np.random.default_rng(seed)
    sample = random_sample(rng, m, width)
    if sample.m_nonzero == 0:
        return
    p = matching_profile(sample)
    tuples, shifts = sample.tuples, sample.shifts.tolist()
    for i in range(1, width + 1):
        assert p.trend[i - 1] == brute_matching(tuples, shifts, i)
        assert p.counter[i - 1] == brute_matching(tuples, shifts, i, -1)
        assert p.counter[i - 1] == -p.trend[i - 1]
        assert -1 <= p.trend[i - 1] <= 1
    assert matching_average(sample, width, "counter") == p.counter[-1]


def test_null_matching_iid():
    rng = np.random.default_rng(20240101)
    m = 100_000
    sample = random_sample(rng, m, 16)
    p = matching_profile(sample)
    assert max(abs(e) for e in p.trend) < 0.02


# ------------------------------------------------------------- collective


def test_collective_hand_example():
    # N=2: bits 01 -> H=0, bits 11 -> H=1
    sample = AlignedSample.from_tuples([0b01, 0b11, 0b10, 0b00], [0, 1, -1, 1], width=2)
    curve = collective_response(sample, [Fraction(1, 2)])
    assert curve.values == (Fraction(1, 2),) and curve.counts == (2,)


def test_collective_vacuous_and_empty():
    n = 5
    sample = AlignedSample.from_tuples([0b00111, 0b11111, 0b00001], [1, 0, -1], width=n)
    curve = collective_response(sample, [Fraction(1, 2 * n), Fraction(1) + Fraction(1, n)])
    assert curve.values[0] is None and curve.counts[0] == 0
    assert curve.values[1] == Fraction(2, 3) and curve.counts[1] == 3


def test_collective_grid_validation():
    sample = AlignedSample.from_tuples([1], [1], width=2)
    for grid in ([], [0.5, 0.5], [0.6, 0.5], [0, 1]):
        with pytest.raises(ValueError):
            collective_response(sample, grid)


def test_default_grid():
    assert default_eps_grid(4) == [Fraction(k, 4) for k in range(1, 6)]


@given(st.integers(1, 100), st.integers(1, 80), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_collective_matches_brute_force(width, m, seed):
    rng = np.random.default_rng(seed)
    sample = random_sample(rng, m, width)
    grid = default_eps_grid(width)
    curve = collective_response(sample, grid)
    hs = [Fraction(abs(sum(t.signs())), width) for t in sample.tuples]
    abs_s = [abs(int(s)) for s in sample.shifts]
    for e, v, c in zip(grid, curve.values, curve.counts):
        sel = [a for h, a in zip(hs, abs_s) if h < e]
        assert c == len(sel)
        assert v == (Fraction(sum(sel), len(sel)) if sel else None)
        if v is not None:
            assert 0 <= v <= 1
    assert list(curve.counts) == sorted(curve.counts)
    assert curve.values[-1] == Fraction(sum(abs_s), m)


# ------------------------------------------------------------- similarity


def test_tuple_index_single_group():
    g = build_tuple_index(AlignedSample.from_tuples([5, 5, 5], [1, 1, 0], width=4))
    assert len(g) == 1 and g.counts.tolist() == [3]
    assert g.class_counts.tolist() == [[0, 1, 2]]


def test_tuple_index_all_distinct():
    g = build_tuple_index(AlignedSample.from_tuples(list(range(10)), [0] * 10, width=4))
    assert len(g) == 10 and (g.counts == 1).all()


def test_tuple_index_pigeonhole():
    g = build_tuple_index(random_sample(np.random.default_rng(42), 1000, 12))
    assert len(g) <= min(1000, 4096)
    assert g.counts.sum() == 1000
    assert (g.class_counts.sum(axis=1) == g.counts).all()


def test_single_pair():
    sample = AlignedSample.from_tuples([0b0000, 0b0111], [1, -1], width=4)
    for h in (similarity_histogram(build_tuple_index(sample)), similarity_histogram_naive(sample)):
        assert h.psi(3) == 2 and h.pairs[3] == 1
        assert all(h.psi(r) is None for r in (0, 1, 2, 4))


def test_equal_shifts_give_zero():
    sample = random_sample(np.random.default_rng(1), 300, 6)
    sample = AlignedSample(sample.t_values, sample.words, np.ones(300, np.int8), 6)
    h = similarity_histogram(build_tuple_index(sample))
    assert all(v == 0 for v in h.values if v is not None)


def test_naive_degenerate_sizes():
    for m in (0, 1):
        h = similarity_histogram_naive(AlignedSample.from_tuples([3] * m, [1] * m, width=3))
        assert h.values == (None,) * 4 and h.total_pairs == 0


def test_naive_guard():
    sample = random_sample(np.random.default_rng(0), 60, 4)
    with pytest.raises(OracleSizeError):
        similarity_histogram_naive(sample, guard=50)


@given(
    st.sampled_from([1, 3, 8, 12, 20, 64, 65, 100, 128]),
    st.integers(1, 300),
    st.sampled_from([None, 2, 5]),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=80, deadline=None)
def test_grouped_equals_naive(width, m, distinct, seed):
    sample = random_sample(np.random.default_rng(seed), m, width, distinct)
    naive = similarity_histogram_naive(sample)
    groups = build_tuple_index(sample)
    assert similarity_histogram(groups, width, method="pairs", block=7) == naive
    assert similarity_histogram(groups, width) == naive
    if width <= 20:
        assert similarity_histogram(groups, width, method="xor") == naive
    assert naive.total_pairs == comb(m, 2)
    assert all(0 <= v <= 2 for v in naive.values if v is not None)


def test_xor_route_rejects_wide_tuples():
    groups = build_tuple_index(random_sample(np.random.default_rng(0), 10, 40))
    with pytest.raises(ValueError):
        similarity_histogram(groups, method="xor")


def test_block_size_does_not_matter():
    sample = random_sample(np.random.default_rng(9), 1500, 10)
    groups = build_tuple_index(sample)
    ref = similarity_histogram(groups, method="pairs", block=1024)
    for block in (1, 3, 64):
        assert similarity_histogram(groups, method="pairs", block=block) == ref


def test_null_psi_flat_iid():
    rng = np.random.default_rng(77)
    sample = random_sample(rng, 20_000, 12)
    z, pairs = flatness_z(sample)
    populated = pairs > 0
    assert np.all(np.abs(z[populated]) < 5)


def test_subsample():
    sample = random_sample(np.random.default_rng(3), 500, 8)
    a = subsample(sample, 100, seed=7)
    b = subsample(sample, 100, seed=7)
    assert len(a) == 100
    assert a.t_values.tolist() == b.t_values.tolist()
    assert a.t_values.tolist() == sorted(set(a.t_values.tolist()))
    assert subsample(sample, 100, seed=8).t_values.tolist() != a.t_values.tolist()
    assert subsample(sample, 1000, seed=7) is sample
