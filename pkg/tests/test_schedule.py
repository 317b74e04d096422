import pytest

from trendscale.schedule import ScaleSchedule, ScheduleError, make_schedule, parse_schedule


def test_first_two_lags():
    assert make_schedule(2).lags == (1, 2)


def test_six_lags():
    assert make_schedule(6).lags == (1, 2, 4, 6, 9, 12)


def test_hundred_lags_closed_form():
    lags = make_schedule(100).lags
    assert lags[-1] == 2550
    for k in range(1, 51):
        assert lags[2 * k - 2] == k * k
        assert lags[2 * k - 1] == k * (k + 1)


def test_gaps_non_decreasing():
    lags = make_schedule(100).lags
    gaps = [b - a for a, b in zip(lags, lags[1:])]
    assert all(g2 >= g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_zero_width():
    with pytest.raises(ScheduleError):
        make_schedule(0)


@pytest.mark.parametrize(
    "text, lags",
    [("recur:3", (1, 2, 4)), ("1,5,30", (1, 5, 30)), (" recur:1 ", (1,))],
)
def test_parse(text, lags):
    assert parse_schedule(text).lags == lags


@pytest.mark.parametrize("text", ["3,2", "0,1", "1,1", "recur:x", "a,b", "recur:0"])
def test_parse_rejects(text):
    with pytest.raises(ScheduleError):
        parse_schedule(text)


def test_index_origin_one():
    s = make_schedule(4)
    assert s.lag(1) == 1 and s.lag(4) == 6
    with pytest.raises(IndexError):
        s.lag(0)


def test_spec_round_trip():
    assert make_schedule(7).spec() == "recur:7"
    assert ScaleSchedule((1, 5, 30)).spec() == "1,5,30"
