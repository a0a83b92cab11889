//! Many-run scans: basins of equilibria and sweeps over lambda.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{integrate_with, Settings};
use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::seed;
use crate::utility::Evaluator;

use super::orbit::detect_equilibrium;

/// Tolerance for merging endpoints into one equilibrium.
pub const CLUSTER_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumCluster {
    /// Endpoint of the earliest run in the cluster.
    pub point: Vec<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BistabilityReport {
    /// Sorted lexicographically by point.
    pub clusters: Vec<EquilibriumCluster>,
    /// Runs that did not settle within the horizon.
    pub unconverged: usize,
}

/// Seeded uniform starts in `[lo, hi]^n`.
pub fn random_starts(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(lo..=hi)).collect()).collect()
}

/// Integrates from each start and groups the settled endpoints.
pub fn bistability_scan_from(inst: &MarketInstance, starts: &[Vec<f64>], settings: &Settings, eps: f64, window: f64) -> Result<BistabilityReport> {
    let eval = Evaluator::default();
    let ends: Vec<Option<Vec<f64>>> = starts
        .par_iter()
        .map(|m0| integrate_with(&eval, inst, m0, settings).map(|t| detect_equilibrium(&t, eps, window)))
        .collect::<Result<_>>()?;
    let unconverged = ends.iter().filter(|e| e.is_none()).count();
    let points: Vec<Vec<f64>> = ends.into_iter().flatten().collect();
    Ok(BistabilityReport {
        clusters: cluster(&points, CLUSTER_TOL),
        unconverged,
    })
}

/// `n_inits` seeded starts in `box_`.
pub fn bistability_scan(inst: &MarketInstance, n_inits: usize, box_: (f64, f64), seed: u64, settings: &Settings) -> Result<BistabilityReport> {
    if n_inits == 0 {
        return Err(Error::InvalidArgument("bistability scan needs at least one start".into()));
    }
    let starts = random_starts(inst.n_bidders(), n_inits, box_.0, box_.1, seed);
    bistability_scan_from(inst, &starts, settings, 1e-6, 10.0)
}

/// Single-linkage clusters under the sup norm.
pub fn cluster(points: &[Vec<f64>], tol: f64) -> Vec<EquilibriumCluster> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if d <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<(usize, EquilibriumCluster)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match clusters.iter_mut().find(|(r, _)| *r == root) {
            Some((_, c)) => c.count += 1,
            None => clusters.push((
                root,
                EquilibriumCluster {
                    point: points[i].clone(),
                    count: 1,
                },
            )),
        }
    }
    let mut out: Vec<EquilibriumCluster> = clusters.into_iter().map(|(_, c)| c).collect();
    out.sort_by(|a, b| {
        a.point
            .iter()
            .zip(&b.point)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    /// Range of the first multiplier after burn-in.
    pub min: f64,
    pub max: f64,
    pub converged: bool,
}

impl SweepRow {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// For each lambda, integrates `family(lambda)` from `m0` and records the
/// post-burn-in range of the first multiplier.
pub fn lambda_sweep<F>(family: F, grid: &[f64], m0: &[f64], settings: &Settings, burn_in: f64) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<MarketInstance> + Sync,
{
    if let Some(l) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidArgument(format!("lambda {l} is outside [0, 1]")));
    }
    let eval = Evaluator::default();
    grid.par_iter()
        .map(|&lambda| {
            let inst = family(lambda)?;
            let traj = integrate_with(&eval, &inst, m0, settings)?;
            let from = traj.tail_start(burn_in * traj.end_time());
            let first = traj.states[from..].iter().map(|s| s[0]);
            let (min, max) = first.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            Ok(SweepRow {
                lambda,
                min,
                max,
                converged: detect_equilibrium(&traj, 1e-6, 10.0).is_some(),
            })
        })
        .collect()
}
