"""Matching-pursuit device scheduling for over-the-air federated learning.

The package simulates analog gradient aggregation uplinks: a receive
beamformer and per-device inversion weights are co-designed with the
set of participating devices so that the aggregation error stays within
an equalization budget. Submodules:

- linalg: power-iteration singular pairs, Hermitian square roots
- channel: i.i.d. and correlated Rician channel generators
- coordination: zero-forcing transceiver design and error accounting
- scheduling: the matching-pursuit scheduler and its baselines
- irs: reflecting-surface tuning interleaved with scheduling
- fedavg: one-shot federated least squares over the analog channel
- experiments: TOML-driven Monte-Carlo harness with CSV output
- estimators: scikit-learn compatible wrappers
"""

from .channel import (
    IidChannelModel,
    NetworkGeometry,
    RicianNetworkModel,
    RicianParams,
    array_response,
    path_loss,
    sample_geometry,
    sample_iid_gaussian,
    sample_rician,
    spatial_covariance,
)
from .coordination import (
    OrthogonalChannelError,
    Schedule,
    SystemParams,
    aircomp_round,
    computation_error,
    gamma_from_db,
    zf_power_factor,
    zf_transmit_weights,
)
from .estimators import (
    ExhaustiveOracleScheduler,
    MatchingPursuitScheduler,
    RandomEliminationScheduler,
)
from .fedavg import (
    FlConfig,
    FlRound,
    FlTrace,
    LinearDataset,
    Partition,
    federated_average,
    local_ls_fit,
    make_linear_dataset,
    mse_loss,
    ota_aggregate,
    ota_efficiency,
    ota_fl_round,
    partition_heterogeneous,
    run_ota_fl,
)
from .irs import (
    IidIrsModelSampler,
    IrsChannelModel,
    QuadraticForm,
    bcd_phase_update,
    build_quadratic,
    effective_channel,
    schedule_mp_tuned,
)
from .linalg import (
    PowerIterationError,
    SingularPair,
    hermitian_sqrt,
    leading_left_singular_pair,
    random_unit_vector,
)
from .scheduling import (
    STATUS_EMPTY,
    STATUS_FEASIBLE,
    ScheduleOutcome,
    SchedulerStep,
    WeightPolicy,
    constraint_indicators,
    exhaustive_oracle,
    next_removal_index,
    schedule_mp,
    schedule_mp_bidirectional,
    schedule_random,
)
from .experiments import (
    CSV_HEADER,
    ExperimentResult,
    ExperimentSpec,
    ResultRow,
    SpecError,
    emit_csv,
    emit_plot,
    emit_trace_csv,
    read_csv,
    run_experiment,
    run_runtime_scaling,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
