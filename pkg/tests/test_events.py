import numpy as np
import pytest

from meteor.events import (
    EventError,
    EventStream,
    LazyClockField,
    event_log_from_times,
    last_hit_before,
    load_binary,
    merged_events,
    next_hit_after_in_log,
    sample_event_log,
    save_binary,
    save_csv,
)
from meteor.graph import build_cycle


def test_zero_horizon_empty():
    log = sample_event_log(5, 0.0, 1)
    assert log.total_events == 0


def test_determinism():
    a = sample_event_log(10, 7.5, 123)
    b = sample_event_log(10, 7.5, 123)
    for v in range(10):
        assert np.array_equal(a.times[v], b.times[v])


def test_poisson_rate():
    # pooled event count over 20 seeds on C_100, horizon 50: mean 1 per
    # vertex per unit time, so the pooled ratio concentrates near 1
    total = sum(sample_event_log(100, 50.0, s).total_events for s in range(20))
    ratio = total / (20 * 100 * 50)
    assert 0.95 <= ratio <= 1.05


def test_negative_horizon_rejected():
    with pytest.raises(EventError):
        sample_event_log(3, -1.0, 0)


def test_times_strictly_increasing_in_range():
    log = sample_event_log(50, 20.0, 9)
    for v in range(50):
        t = log.times[v]
        if t.size:
            assert np.all(np.diff(t) > 0)
            assert t[0] > 0 and t[-1] <= 20.0


def test_merged_events_empty():
    log = sample_event_log(4, 0.0, 0)
    t, v = merged_events(log)
    assert t.size == 0 and v.size == 0


def test_merged_events_sorted_and_complete():
    log = sample_event_log(30, 10.0, 3)
    t, v = merged_events(log)
    assert t.size == log.total_events
    assert np.all(np.diff(t) >= 0)


def test_merged_tie_broken_by_vertex():
    log = event_log_from_times([[0.5], [], [], [0.5]], horizon=1.0)
    t, v = merged_events(log)
    assert list(v) == [0, 3]
    log2 = event_log_from_times([[], [0.5], [], [0.25]], horizon=1.0)
    t2, v2 = merged_events(log2)
    assert list(v2) == [3, 1]


def test_last_hit_before():
    log = event_log_from_times([[0.2, 0.7], []], horizon=1.0)
    assert last_hit_before(log, 0, 0.5) == 0.2
    assert last_hit_before(log, 0, 0.7) == 0.7
    assert last_hit_before(log, 1, 0.9) == -1.0
    with pytest.raises(EventError):
        last_hit_before(log, 0, 2.0)


def test_last_hit_before_monotone():
    log = sample_event_log(5, 10.0, 4)
    prev = -1.0
    for t in np.linspace(0, 10, 101):
        cur = last_hit_before(log, 2, float(t))
        assert cur >= prev
        prev = cur


def test_next_hit_after_in_log():
    log = event_log_from_times([[0.2, 0.7]], horizon=1.0)
    assert next_hit_after_in_log(log, 0, 0.0) == 0.2
    assert next_hit_after_in_log(log, 0, 0.2) == 0.7
    assert next_hit_after_in_log(log, 0, 0.7) is None


def test_binary_roundtrip(tmp_path):
    log = sample_event_log(12, 6.0, 77)
    path = tmp_path / "log.bin"
    save_binary(log, path)
    back = load_binary(path)
    assert back.n == log.n and back.horizon == log.horizon and back.seed == log.seed
    for v in range(12):
        assert np.array_equal(back.times[v], log.times[v])


def test_csv_export(tmp_path):
    log = sample_event_log(3, 2.0, 5)
    path = tmp_path / "log.csv"
    save_csv(log, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "time,vertex"
    assert len(lines) == 1 + log.total_events


def test_event_stream_rate():
    stream = EventStream(50, 11)
    times = [stream.next_event()[0] for _ in range(5000)]
    # mean global gap is 1/n
    gaps = np.diff([0.0] + times)
    assert abs(gaps.mean() - 1 / 50) < 0.002


def test_lazy_clock_field_deterministic_and_increasing():
    a = LazyClockField(100, 3)
    b = LazyClockField(100, 3)
    t = 0.0
    for _ in range(50):
        ta = a.next_hit_after(7, t)
        tb = b.next_hit_after(7, t)
        assert ta == tb and ta > t
        t = ta


def test_event_log_from_times_validation():
    with pytest.raises(EventError):
        event_log_from_times([[0.5, 0.5]], horizon=1.0)
    with pytest.raises(EventError):
        event_log_from_times([[1.5]], horizon=1.0)
