//! Orbit classification, scans and stability checks.

mod orbit;
mod projection;
mod scan;
mod stability;

pub use orbit::{
    classify_orbit, detect_equilibrium, detect_period, is_near_rational, recurrence_times, spectral_peaks, tail_speed,
    OrbitClass, OrbitDiagnostics, OrbitKind, OrbitSettings,
};
pub use projection::{project_with, projection_matrix, random_projection};
pub use scan::{
    bistability_scan, bistability_scan_from, cluster, lambda_sweep, random_starts, BistabilityReport,
    EquilibriumCluster, SweepRow, CLUSTER_TOL,
};
pub use stability::{
    check_coordinatewise_stability, stationarity_residual, StabilityReport, StabilityWitness, EQUILIBRIUM_TOL,
};
