"""Pure-inertial dead reckoning for wheeled robots.

Thin wrapper around the C++ core: strapdown INS mechanization (3D and
planar), the MoRPI periodic-motion estimators, zero-order calibration, the
closed-form error model, and the synthetic IMU generator.
"""

from ._core import (  # noqa: F401
    CalibMode,
    CalibResult,
    CalibrationError,
    ComputationError,
    ConfigError,
    DEFAULT_GRAVITY,
    ErrorInputs,
    FormatConfig,
    ImuSequence,
    MonteCarloReport,
    MorpiMode,
    MorpiTrack,
    NavSolution,
    ParseError,
    PeakConfig,
    PeakSet,
    SensorSpec,
    StationaryWindow,
    StructuralError,
    TrajectoryShape,
    TrajectorySpec,
    TruthTrajectory,
    WeinbergGain,
    apply_calibration,
    calibrate,
    calibrated,
    corrupt,
    dead_reckon,
    detect_peaks,
    detect_stationary,
    endpoint_error,
    estimate_gain,
    generate_truth,
    imu_from_truth,
    ins_error_2d,
    ins_error_3d,
    load_gain,
    load_imu_file,
    mechanize_2d,
    mechanize_3d,
    monte_carlo_check,
    morpi_error,
    run_morpi,
    save_gain,
    save_imu_file,
    system_matrix,
    transition_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
