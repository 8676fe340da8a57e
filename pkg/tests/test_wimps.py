import numpy as np
import pytest
from scipy import stats as sps

from meteor.dynamics import MassState, flat_state
from meteor.events import LazyClockField, event_log_from_times, sample_event_log
from meteor.graph import build_cycle, build_torus, torus_index
from meteor.wimps import (
    WimpError,
    mirror_couple,
    run_wimps,
    sample_initial_positions,
    third_moment_crosscheck,
    verify_prime_solution,
)


def test_initial_positions_follow_mass():
    # all mass on vertex 2: every walk starts there
    pos = sample_initial_positions(np.array([0.0, 0.0, 5.0, 0.0]), 50, 3)
    assert np.all(pos == 2)


def test_initial_positions_reject_zero_mass():
    with pytest.raises(WimpError):
        sample_initial_positions(np.zeros(4), 1, 0)


def test_walks_jump_only_at_own_hits():
    g = build_cycle(6)
    log = event_log_from_times([[], [], [0.3], [], [], []], horizon=1.0)
    s = MassState(np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]))
    sys = run_wimps(g, s, log, 3, 1.0, seed=7)
    for traj in sys.trajectories:
        assert traj[0] == (0.0, 2)
        assert len(traj) == 2
        assert traj[1][0] == 0.3
        assert traj[1][1] in (1, 3)


def test_colocated_pair_directions_independent():
    # two walks on the same vertex jump together but each picks its own
    # uniform neighbor: P(both land on the same given neighbor) = 1/4
    g = build_cycle(8)
    s = MassState(np.array([0, 0, 0, 8.0, 0, 0, 0, 0]))
    log = event_log_from_times([[], [], [], [0.5], [], [], [], []], horizon=1.0)
    both = 0
    n = 10_000
    for seed in range(n):
        sys = run_wimps(g, s, log, 2, 1.0, seed=seed)
        if sys.positions[0] == 2 and sys.positions[1] == 2:
            both += 1
    assert abs(both / n - 0.25) < 0.02


def test_marginal_holding_time_exponential():
    # the first jump time of a walk pinned at a vertex is Exp(1)
    g = build_cycle(5)
    s = MassState(np.array([5.0, 0, 0, 0, 0]))
    waits = []
    for seed in range(800):
        log = sample_event_log(g, 30.0, 40_000 + seed)
        sys = run_wimps(g, s, log, 1, 30.0, seed=seed)
        traj = sys.trajectories[0]
        if len(traj) > 1:
            waits.append(traj[1][0])
    assert len(waits) > 780
    assert sps.kstest(waits, "expon").pvalue > 0.01


def test_colocated_walks_share_jump_times():
    g = build_cycle(10)
    s = MassState(np.zeros(10))
    s.masses[4] = 10.0
    log = sample_event_log(g, 5.0, 901)
    sys = run_wimps(g, s, log, 4, 5.0, seed=11)
    # first jump time must be identical across all walks (same start vertex)
    firsts = {traj[1][0] for traj in sys.trajectories if len(traj) > 1}
    assert len(firsts) == 1


def test_jumps_land_on_clock_hits():
    g = build_cycle(9)
    log = sample_event_log(g, 8.0, 55)
    sys = run_wimps(g, flat_state(g), log, 5, 8.0, seed=2)
    for traj in sys.trajectories:
        for (t_prev, v_prev), (t_cur, v_cur) in zip(traj, traj[1:]):
            assert t_cur in log.times[v_prev]
            assert v_cur in g.neighbors(v_prev)


def test_run_wimps_determinism():
    g = build_cycle(12)
    log = sample_event_log(g, 6.0, 8)
    a = run_wimps(g, flat_state(g), log, 3, 6.0, seed=77)
    b = run_wimps(g, flat_state(g), log, 3, 6.0, seed=77)
    assert a.trajectories == b.trajectories


def test_prime_solution_all_dimensions():
    for d in range(1, 9):
        assert verify_prime_solution(d)


def test_prime_solution_rejects_bad_dimension():
    with pytest.raises(WimpError):
        verify_prime_solution(0)


def test_third_moment_trivial_cases():
    k = 10
    flat = [np.ones(k)] * 120
    lhs, rhs, gap = third_moment_crosscheck(flat)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0) and gap < 1e-12
    atom = np.zeros(k)
    atom[3] = k
    lhs, rhs, gap = third_moment_crosscheck([atom] * 120)
    assert lhs == pytest.approx(k**2) and rhs == pytest.approx(k**2)


def test_third_moment_monte_carlo_agrees():
    rng = np.random.default_rng(5)
    states = [rng.exponential(size=20) for _ in range(150)]
    lhs, rhs, gap = third_moment_crosscheck(states, seed=1, n_draws=4000)
    # MC estimate of the coincidence probability; loose but honest tolerance
    assert gap < 0.15


def test_third_moment_needs_samples():
    with pytest.raises(WimpError):
        third_moment_crosscheck([np.ones(4)] * 10)


def test_mirror_trivial_start():
    g = build_torus(31, 2)
    fld = LazyClockField(g.n, 1)
    z0 = torus_index((5, 5), 31)
    run = mirror_couple(g, z0, z0, fld, 10.0, seed=1)
    assert run.meeting_time == 0.0
    assert run.trajectories[0] == run.trajectories[1]


def test_mirror_meets_on_cycle():
    g = build_cycle(101)
    met = 0
    for s in range(30):
        fld = LazyClockField(g.n, 600 + s)
        run = mirror_couple(g, 50, 54, fld, 400.0, seed=600 + s, record=False)
        if run.meeting_time is not None:
            met += 1
    assert met >= 27


def test_mirror_post_meeting_equality():
    g = build_torus(41, 2)
    z0 = torus_index((20, 20), 41)
    for s in range(10):
        fld = LazyClockField(g.n, 7000 + s)
        run = mirror_couple(g, z0, z0 + 2, fld, 300.0, seed=7000 + s)
        if run.meeting_time is None:
            continue
        ta, tb = run.trajectories
        ia = next(i for i, (t, _) in enumerate(ta) if t == run.meeting_time)
        ib = next(i for i, (t, _) in enumerate(tb) if t == run.meeting_time)
        assert ta[ia:] == tb[ib:]


def test_mirror_jumps_on_field_hits():
    # every recorded jump time must be a hit of the vertex the walk occupied
    g = build_cycle(51)
    fld = LazyClockField(g.n, 42)
    run = mirror_couple(g, 10, 13, fld, 60.0, seed=42)
    for traj in run.trajectories:
        for (t_prev, v_prev), (t_cur, v_cur) in zip(traj, traj[1:]):
            if v_cur == v_prev:  # meeting-point record, not a jump
                continue
            hits = fld.hits_up_to(v_prev, t_cur)
            assert t_cur in hits
            assert (v_cur - v_prev) % 51 in (1, 50)  # single step on the cycle


def test_mirror_rejects_window():
    from meteor.graph import build_grid_window

    g = build_grid_window(5, 2)
    with pytest.raises(WimpError):
        mirror_couple(g, 0, 1, LazyClockField(g.n, 0), 1.0, seed=0)
