"""Link-level simulator and max-min optimizer for a transmissive-metasurface
stack feeding a hierarchical rate-splitting downlink."""

from .ao import SolveOptions, SolveState, evaluate, initialize, make_solve_options, solve
from .baselines import HbfConfig, SchemeId, run_scheme, solve_hbf, solve_non_precoding, solve_sim_rsma
from .channel import (
    ChannelSet,
    EffectiveChannel,
    PhaseConfig,
    compose_end_to_end,
    direct_bs_channel,
    effective_channel,
    feed_matrix,
    inter_layer_matrix,
    path_loss,
    rs_coefficient,
    steering_vector,
    stream_gains,
    synthesize_channels,
)
from .grouping import brute_force_grouping, greedy_refine, kmeans_partition, user_features
from .harness import SweepSpec, TrialResult, run_sweep, summarize, write_results
from .rsma import (
    Grouping,
    PowerAllocation,
    RateReport,
    rate_report,
    sinr_common,
    sinr_group,
    sinr_private,
    stream_rates,
    user_rate_vector,
    user_rates,
)
from .scenario import (
    Scenario,
    SimGeometry,
    UpaLayout,
    Vec3,
    build_upa_layout,
    dbm_to_watt,
    generate_clustered_users,
    make_scenario,
    parse_config_file,
    watt_to_dbm,
)
from .spsa import SpsaGains, gains_at, project_power, spsa_step, wrap_phase

__all__ = [name for name in dir() if not name.startswith("_")]
