"""Closed-form localization of a reflecting target from two recorded
reflection paths (departure/arrival angles plus ranged path lengths),
with the beam-training and ranging simulator used to evaluate it.

Modules: geom (projection solver), channel (arrays, codebooks, sweeps),
measure (ranging noise and the measurement table), sim (Monte Carlo
harness), cli (command-line front end).
"""

from .channel import (
    ChannelRealization,
    Codebook,
    UpaGeometry,
    array_response,
    aux_beam_refine,
    beam_sweep,
    build_codebook,
    received_snr,
)
from .geom import (
    DegenerateProjection,
    GeomError,
    InconsistentGeometry,
    PathObservation,
    ProjectionPlane,
    SceneType,
    SolveResult,
    SphericalAngles,
    Unsolvable,
    ZeroVector,
    angles_from_direction,
    classify_scene,
    clockwise_angle,
    direction_from_angles,
    localize,
    project,
    reflex_reduce,
    solve,
)
from .measure import (
    FtmConfig,
    MeasurementRecord,
    MeasurementTable,
    NoUsableHistory,
    ftm_distance,
    parse_records,
    parse_table,
    record_first_path,
    select_historical,
    serialize_table,
)
from .sim import (
    ExperimentConfig,
    ExperimentResult,
    Scenario,
    TrialResult,
    TrialRng,
    format_curve_csv,
    format_raw_csv,
    make_scenario_sampler,
    mean_distance_error,
    run_experiment,
    run_oracle_suite,
    run_trial,
    synthesize_observations,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "Codebook",
    "DegenerateProjection",
    "ExperimentConfig",
    "ExperimentResult",
    "FtmConfig",
    "GeomError",
    "InconsistentGeometry",
    "MeasurementRecord",
    "MeasurementTable",
    "NoUsableHistory",
    "PathObservation",
    "ProjectionPlane",
    "Scenario",
    "SceneType",
    "SolveResult",
    "SphericalAngles",
    "TrialResult",
    "TrialRng",
    "Unsolvable",
    "UpaGeometry",
    "ZeroVector",
    "angles_from_direction",
    "array_response",
    "aux_beam_refine",
    "beam_sweep",
    "build_codebook",
    "classify_scene",
    "clockwise_angle",
    "direction_from_angles",
    "format_curve_csv",
    "format_raw_csv",
    "ftm_distance",
    "localize",
    "make_scenario_sampler",
    "mean_distance_error",
    "parse_records",
    "parse_table",
    "project",
    "received_snr",
    "record_first_path",
    "reflex_reduce",
    "run_experiment",
    "run_oracle_suite",
    "run_trial",
    "select_historical",
    "serialize_table",
    "solve",
    "synthesize_observations",
]
