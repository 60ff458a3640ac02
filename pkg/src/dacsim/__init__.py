"""dacsim: deterministic simulation lab for edge-based dynamic average consensus."""

from .analysis import (
    BoundReport,
    ErrorDiagnostics,
    InvalidGain,
    InvalidLevelSets,
    bound_report,
    delta_bound,
    diagnostics,
    finite_time_estimate,
    ultimate_bound,
    validate_alg2_condition,
)
from .engine import (
    ConfigInvalid,
    SimConfig,
    SimTrace,
    WindowTooLarge,
    chattering_index,
    run,
    run_pair_equivalence,
    steady_state_error,
)
from .graph import (
    DisconnectedGraph,
    IncidenceMatrix,
    SpectralData,
    Topology,
    TopologySchedule,
    build_incidence,
    connected_components,
    laplacian,
    spectral,
    verify_centering_identity,
)
from .protocols import (
    PROTOCOL_KINDS,
    DimensionMismatch,
    ProtocolParams,
    ProtocolState,
    derivative_alg1,
    derivative_alg2,
    derivative_alg2_transformed,
    derivative_baseline,
    output_alg1,
    output_alg2_transformed,
    realign_state,
)
from .scenario import Scenario, parse_scenario, scenario_hash, to_sim_config
from .signals import SignalBank, SignalSpec, benchmark_bank, constant_bank

__version__ = "0.1.0"
