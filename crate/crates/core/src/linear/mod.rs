//! Linear systems compiled into fixed-value markets.

mod compile;
mod embed;
mod jordan;

pub use compile::{
    compile_competitive_to_ros, reference_solution, simulate_linear, AffineMap, LinearSimulation, LinearSystem,
    AUX_MULTIPLIER, BOX_HI, BOX_LO,
};
pub use embed::{
    competitive_embedding, is_purely_competitive, purely_competitive_from_jordan, CompetitiveEmbedding,
    EmbeddingMode, JordanBlock, CONDITION_LIMIT, INTERTWINING_TOL,
};
pub use jordan::{eigenvector_for, jordan_chain, jordan_lift, nonneg_for_eigenvalue};
