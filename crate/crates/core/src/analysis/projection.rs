//! Random planar views of an orbit.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::Trajectory;
use crate::seed;

/// `2 x n` matrix of independent standard normal entries.
pub fn projection_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seed::rng(seed);
    DMatrix::from_fn(2, n, |_, _| rng.sample(StandardNormal))
}

pub fn project_with(traj: &Trajectory, j: &DMatrix<f64>) -> Vec<[f64; 2]> {
    traj.states
        .iter()
        .map(|s| {
            let (mut x, mut y) = (0.0, 0.0);
            for (k, &v) in s.iter().enumerate() {
                x += j[(0, k)] * v;
                y += j[(1, k)] * v;
            }
            [x, y]
        })
        .collect()
}

/// `J m(t)` for a seeded Gaussian `J`.
pub fn random_projection(traj: &Trajectory, seed: u64) -> Vec<[f64; 2]> {
    project_with(traj, &projection_matrix(traj.dim(), seed))
}
