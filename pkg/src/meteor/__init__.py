"""Event-driven simulator and verification suite for mass redistribution
dynamics on graphs.

Each vertex of a finite graph carries a nonnegative mass; at independent
rate-1 Poisson times a vertex's mass is split equally among its neighbors
and zeroed.  The package provides the forward simulator, an exact backward
path oracle, coupled tracer/walk constructions, and statistical checks of
the stationary law's closed-form moments.
"""

from .graph import (
    Graph,
    GraphError,
    build_cycle,
    build_from_edges,
    build_grid_window,
    build_path,
    build_torus,
    load_edge_list,
    torus_coords,
    torus_index,
)
from .events import (
    EventError,
    EventLog,
    EventStream,
    LazyClockField,
    event_log_from_times,
    last_hit_before,
    load_binary,
    merged_events,
    rng_stream,
    sample_event_log,
    save_binary,
    save_csv,
)
from .dynamics import (
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
from .wimps import (
    CouplingRun,
    WimpError,
    WimpSystem,
    mirror_couple,
    run_wimps,
    third_moment_crosscheck,
    verify_prime_solution,
)
from .flowpaths import (
    FlowError,
    FlowLedger,
    PathRep,
    accumulate_flow,
    gamma_init,
    gamma_step,
    locate_tracer,
    track_tracer,
    winding_check,
)
from .support import (
    ReverseTrace,
    SupportError,
    forward_replay,
    in_U,
    in_U_star,
    op_R,
    op_T,
    replay_until_close,
    reverse_sequence,
)
from .stats import (
    MomentReport,
    StatsError,
    moment_report,
    sample_moments,
    scaling_test,
    stationary_sample,
    tail_estimate,
)

__version__ = "0.1.0"
