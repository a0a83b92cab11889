//! Stationarity and coordinate-wise stability of fixed points.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::seed;
use crate::utility::Evaluator;

/// Largest residual accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;
/// Offset used to probe each side of a discontinuity.
const PROBE: f64 = 1e-7;
/// Coordinates this close to the equilibrium value are not judged.
const EXEMPT: f64 = 1e-9;

/// Right-hand side with native limits applied.
fn projected(eval: &Evaluator, inst: &MarketInstance, m: &[f64]) -> Result<Vec<f64>> {
    let mut u = eval.utilities(inst, m)?;
    for (&b, lim) in &inst.limits {
        if (m[b] >= lim.ceiling && u[b] > 0.0) || (m[b] <= lim.floor && u[b] < 0.0) {
            u[b] = 0.0;
        }
    }
    Ok(u)
}

/// Largest velocity at `m` over `coords` (all bidders when `None`).
///
/// A coordinate counts as stationary when `|U_i| <= tol`, or when `U_i` is
/// positive just below `m_i` and negative just above, so that the flow pins it
/// there.
pub fn stationarity_residual(inst: &MarketInstance, m: &[f64], coords: Option<&[usize]>) -> Result<f64> {
    let eval = Evaluator::default();
    let u = projected(&eval, inst, m)?;
    let all: Vec<usize> = (0..inst.n_bidders()).collect();
    let mut worst: f64 = 0.0;
    let mut probe = m.to_vec();
    for &i in coords.unwrap_or(&all) {
        if u[i].abs() <= EQUILIBRIUM_TOL {
            continue;
        }
        let d = PROBE * m[i].abs().max(1.0);
        probe[i] = m[i] - d;
        let below = projected(&eval, inst, &probe)?[i];
        probe[i] = m[i] + d;
        let above = projected(&eval, inst, &probe)?[i];
        probe[i] = m[i];
        if !(below > 0.0 && above < 0.0) {
            worst = worst.max(u[i].abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityWitness {
    pub point: Vec<f64>,
    pub coordinate: usize,
    /// `dm_i/dt` at `point`, which fails to point back toward the equilibrium.
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub samples: usize,
    pub witness: Option<StabilityWitness>,
}

/// Samples `samples` points within `eps` of `m_star` (moving only `coords`,
/// staying in `[1, inf)` and inside native limits) and checks that every
/// moved coordinate is pushed back toward its equilibrium value. Bidders who
/// value no item never move and are skipped.
pub fn check_coordinatewise_stability(
    inst: &MarketInstance,
    m_star: &[f64],
    eps: f64,
    samples: usize,
    seed: u64,
    coords: Option<&[usize]>,
) -> Result<StabilityReport> {
    if m_star.len() != inst.n_bidders() {
        return Err(Error::InvalidArgument(format!(
            "instance has {} bidders but the point has {} entries",
            inst.n_bidders(),
            m_star.len()
        )));
    }
    let all: Vec<usize> = (0..inst.n_bidders()).collect();
    let coords = coords.unwrap_or(&all);
    let residual = stationarity_residual(inst, m_star, Some(coords))?;
    if residual > EQUILIBRIUM_TOL {
        return Err(Error::NotEquilibrium { residual });
    }
    let eval = Evaluator::default();
    let mut rng = seed::rng(seed);
    let lo = |i: usize| inst.limits.get(&i).map_or(1.0, |l| l.floor.max(1.0));
    let hi = |i: usize| inst.limits.get(&i).map_or(f64::INFINITY, |l| l.ceiling);
    for sample in 0..samples {
        // Uniform in the ball, rejecting points outside the feasible box.
        let point = loop {
            let dir: Vec<f64> = coords.iter().map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                continue;
            }
            let r = eps * rng.random::<f64>().powf(1.0 / coords.len().max(1) as f64);
            let mut p = m_star.to_vec();
            for (&i, d) in coords.iter().zip(&dir) {
                p[i] += r * d / norm;
            }
            if coords.iter().all(|&i| p[i] >= lo(i) && p[i] <= hi(i)) {
                break p;
            }
        };
        let u = projected(&eval, inst, &point)?;
        for &i in coords.iter().filter(|&&i| inst.items.iter().any(|it| it.values.contains_key(&i))) {
            let offset = point[i] - m_star[i];
            let bad = (offset < -EXEMPT && u[i] <= 0.0) || (offset > EXEMPT && u[i] >= 0.0);
            if bad {
                return Ok(StabilityReport {
                    stable: false,
                    samples: sample + 1,
                    witness: Some(StabilityWitness {
                        point,
                        coordinate: i,
                        derivative: u[i],
                    }),
                });
            }
        }
    }
    Ok(StabilityReport {
        stable: true,
        samples,
        witness: None,
    })
}
