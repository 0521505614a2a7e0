"""opinionlab: multi-topic opinion dynamics on directed stochastic block
models, their explicit mean-field approximation, and the experiments
that measure how fast the two agree."""

__version__ = "0.1.0"

from .model import ModelSpec, SpecError
from .graph import (
    GraphSample, InfluenceMatrix, empirical_shares, normalize_weights,
    read_graph, sample_graph, sample_labels, write_graph,
)
from .dynamics import (
    OpinionState, SignalFrame, TrajectoryRecord, closed_form_state, hop_weight,
    hop_weight_table, initial_state, sample_signal_frame, simulate, step,
)
from .meanfield import (
    MeanFieldModel, RegimeStats, StationarySampler, build_meanfield_model,
    deterministic_profile, expand_rows, intermediate_trajectory,
    meanfield_trajectory, mixing_matrix, no_inbound_prob, regime_stats,
    sample_stationary, share_mismatch, stationary_horizon, vertex_mixing_matrix,
)
from .gwtree import (
    GWTree, NeighborhoodDiagnostic, TreeBudgetError, a_s_profile, estimate_a_s,
    neighborhood_diagnostic, offspring_means, path_weight_sum, sample_tree,
    weighted_generation_sum,
)
from .metrics import (
    ChaosReport, ConcentrationCase, ConcentrationReport, ErrorCurve, ErrorPoint,
    StationarityReport, burn_in_steps, chaos_experiment, concentration_check,
    coupled_gap_run, error_experiment, matrix_inf_distance, parse_function,
    stationarity_experiment,
)
from .config import ConfigError, ExperimentConfig, parse_config, serialize_config, theta_value
from .harness import run
