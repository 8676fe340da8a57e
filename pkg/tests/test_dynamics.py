import numpy as np
import pytest
from scipy.linalg import expm

from meteor.dynamics import (
    BudgetExceeded,
    DynamicsError,
    MassState,
    boundary_cone_clear,
    flat_state,
    heat_mean_oracle,
    hit,
    mass_via_paths,
    simulate,
    zero_pair_count,
    zero_set_check,
)
from meteor.events import event_log_from_times, rng_stream, sample_event_log
from meteor.graph import build_cycle, build_path


def test_hit_path_center():
    g = build_path(3)
    s = MassState(np.array([1.0, 1.0, 1.0]))
    out = hit(s, 1, g)
    assert np.allclose(out.masses, [1.5, 0.0, 1.5])
    # original untouched
    assert np.allclose(s.masses, [1.0, 1.0, 1.0])


def test_hit_zero_mass_noop():
    g = build_cycle(4)
    s = MassState(np.array([1.0, 0.0, 2.0, 1.0]))
    assert np.allclose(hit(s, 1, g).masses, s.masses)


def test_hit_cycle_atom():
    g = build_cycle(4)
    s = MassState(np.array([4.0, 0.0, 0.0, 0.0]))
    assert np.allclose(hit(s, 0, g).masses, [0.0, 2.0, 0.0, 2.0])


def test_negative_mass_rejected():
    with pytest.raises(DynamicsError):
        MassState(np.array([1.0, -0.1]))


def test_simulate_empty_log():
    g = build_cycle(5)
    s = flat_state(g)
    out = simulate(g, s, sample_event_log(g, 0.0, 1), 0.0)
    assert np.allclose(out.masses, s.masses)


def test_simulate_single_event():
    g = build_cycle(5)
    s = flat_state(g)
    log = event_log_from_times([[], [], [0.5], [], []], horizon=1.0)
    out = simulate(g, s, log, 1.0)
    assert np.allclose(out.masses, hit(s, 2, g).masses)
    assert out.time == 1.0


def test_simulate_conservation():
    g = build_cycle(5)
    rng = rng_stream(5, 0)
    s = MassState(rng.random(5) * 3)
    log = sample_event_log(g, 10.0, 21)
    out = simulate(g, s, log, 10.0)
    assert abs(out.total - s.total) <= 1e-9 * s.total


def test_simulate_t_end_beyond_horizon():
    g = build_cycle(3)
    with pytest.raises(DynamicsError):
        simulate(g, flat_state(g), sample_event_log(g, 1.0, 0), 2.0)


def test_paths_no_events():
    g = build_path(4)
    s = MassState(np.array([0.5, 1.0, 2.0, 0.25]))
    log = sample_event_log(g, 0.0, 0)
    assert mass_via_paths(g, s, log, 2, 0.0) == 2.0


def test_paths_single_self_event():
    g = build_path(4)
    s = flat_state(g)
    log = event_log_from_times([[], [0.4], [], []], horizon=1.0)
    assert mass_via_paths(g, s, log, 1, 1.0) == 0.0


def test_paths_line_window_example():
    # one event at vertex 1 at time 0.5: mass at vertex 0 becomes
    # 1 (constant path) + 1/2 (jump in from vertex 1) = 1.5
    g = build_path(6)
    s = flat_state(g)
    log = event_log_from_times([[], [0.5], [], [], [], []], horizon=1.0)
    assert mass_via_paths(g, s, log, 0, 1.0) == pytest.approx(1.5, abs=1e-12)
    assert simulate(g, s, log, 1.0).masses[0] == pytest.approx(1.5, abs=1e-12)


def test_paths_match_simulate_random():
    rng = rng_stream(99, 1)
    for trial in range(15):
        k = int(rng.integers(3, 13))
        g = build_cycle(k)
        log = sample_event_log(g, 6.0, 300 + trial)
        s = MassState(rng.random(k) * 2)
        T = float(rng.uniform(0.0, 6.0))
        end = simulate(g, s, log, T)
        for x in range(k):
            o = mass_via_paths(g, s, log, x, T)
            assert abs(o - end.masses[x]) <= 1e-9 * max(1.0, abs(o))


def test_paths_budget():
    g = build_cycle(12)
    log = sample_event_log(g, 6.0, 8)
    with pytest.raises(BudgetExceeded):
        mass_via_paths(g, flat_state(g), log, 0, 6.0, budget=3)


def test_boundary_cone_empty_log():
    g = build_path(20)
    log = sample_event_log(g, 0.0, 0)
    assert boundary_cone_clear(g, log, {10}, 0.0)


def test_boundary_cone_explicit_chain():
    # events at 1 then 2 then 3 carry influence from the boundary {0} to 4
    g = build_path(6)
    log = event_log_from_times([[0.1], [0.2], [0.3], [0.4], [], []], horizon=1.0)
    assert not boundary_cone_clear(g, log, {4}, 1.0, boundary={0})
    # with horizon cut before the chain completes, the set stays clear
    assert boundary_cone_clear(g, log, {4}, 0.25, boundary={0})


def test_boundary_cone_statistics():
    g = build_cycle(1000)
    obs = set(range(495, 505))
    clear = sum(
        boundary_cone_clear(g, sample_event_log(g, 5.0, s), obs, 5.0) for s in range(100)
    )
    assert clear >= 99


def test_zero_set_no_events():
    g = build_cycle(6)
    log = sample_event_log(g, 0.0, 0)
    assert zero_set_check(g, flat_state(g), log, 0.0)


def test_zero_set_single_event():
    g = build_cycle(6)
    log = event_log_from_times([[], [], [0.5], [], [], []], horizon=1.0)
    assert zero_set_check(g, flat_state(g), log, 1.0)


def test_zero_set_random():
    g = build_cycle(7)
    for seed in range(50):
        log = sample_event_log(g, 20.0, 1000 + seed)
        assert zero_set_check(g, flat_state(g), log, 20.0)


def test_zero_pair_count_cases():
    g = build_cycle(5)
    assert zero_pair_count(MassState(np.ones(5)), g) == 0
    assert zero_pair_count(MassState(np.zeros(5)), g) == 10
    gp = build_path(4)
    assert zero_pair_count(MassState(np.array([0.0, 0.0, 1.0, 1.0])), gp) == 2


def test_heat_oracle_t0_and_flat():
    g = build_cycle(5)
    s = MassState(np.array([2.0, 0.5, 1.0, 0.0, 1.5]))
    assert heat_mean_oracle(g, s, 0, 0.0) == 2.0
    flat = flat_state(g)
    for x in range(5):
        assert heat_mean_oracle(g, flat, x, 3.7) == pytest.approx(1.0, abs=1e-9)


def test_heat_oracle_against_expm():
    # independent evaluation through the matrix exponential
    g = build_cycle(3)
    m0 = np.array([3.0, 0.0, 0.0])
    P = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    for t in (0.5, 1.0, 2.0):
        ref = (expm(t * (P.T - np.eye(3))) @ m0)[0]
        assert heat_mean_oracle(g, MassState(m0), 0, t) == pytest.approx(ref, abs=1e-9)


def test_mean_flow_matches_heat_oracle():
    # Monte Carlo mean of the simulated mass converges to the kernel value
    g = build_cycle(3)
    s = MassState(np.array([3.0, 0.0, 0.0]))
    t = 1.0
    n = 4000
    vals = np.empty(n)
    for i in range(n):
        vals[i] = simulate(g, s, sample_event_log(g, t, 50_000 + i), t).masses[0]
    ci = 1.96 * vals.std(ddof=1) / np.sqrt(n)
    assert abs(vals.mean() - heat_mean_oracle(g, s, 0, t)) <= ci + 0.01
