//! Return-over-spend autobidding dynamics.
//!
//! Bidders scale their values by a multiplier `m_i` and the multipliers follow
//! `dm_i/dt = U_i(m)`, the bidder's quasi-linear utility. The crate evaluates
//! `U`, integrates the flow, classifies the resulting orbits, and compiles
//! linear systems and NOR networks into markets whose flows simulate them.

pub mod analysis;
pub mod builders;
pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod format;
pub mod gallery;
pub mod linear;
pub mod market;
pub mod quadrature;
pub mod seed;
pub mod utility;

pub use builders::{build_coupled, build_cycle, build_edge_item, build_repressilator, CouplingSpec, RepressionGraph};
pub use dynamics::{fundamental_identity_residual, integrate, integrate_with, Method, Settings, Trajectory};
pub use error::{Error, Result};
pub use format::{load_instance, save_instance};
pub use market::{
    normalize_targets, validate_instance, BidderId, ItemSpec, MarketInstance, MultiplierLimits, MultiplierVector,
    TieBreak, ValidationReport, ValueSpec,
};
pub use utility::{mc_utility, utilities, utility_gradient, Evaluator, QuadratureConfig};
pub use export::{read_trajectory_csv, write_orbit_svg, write_trajectory_csv};
