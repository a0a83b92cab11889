//! Criterion benchmarks for `rosdyn`; see `benches/`.
