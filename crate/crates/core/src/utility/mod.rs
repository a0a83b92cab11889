//! Per-bidder quasi-linear utility `U_i(m)`.

mod bernstein;
mod discrete;
mod montecarlo;
mod smooth;

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::market::{ItemSpec, MarketInstance};
use crate::quadrature::GaussLegendre;

pub use bernstein::Bernstein;
pub use discrete::{discrete_outcome, ItemOutcome};
pub use montecarlo::{mc_utility, McEstimate};
pub use smooth::InnerMethod;

use smooth::SmoothEngine;

pub const DEFAULT_NODES: usize = 64;
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub inner: InnerMethod,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: DEFAULT_NODES,
            inner: InnerMethod::Exact,
        }
    }
}

/// Evaluates utilities with a fixed quadrature rule.
#[derive(Clone, Debug)]
pub struct Evaluator {
    rule: GaussLegendre,
    inner: InnerMethod,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self::new(QuadratureConfig::default()).expect("default rule is valid")
    }
}

impl Evaluator {
    pub fn new(config: QuadratureConfig) -> Result<Self> {
        Ok(Evaluator {
            rule: GaussLegendre::new(config.nodes)?,
            inner: config.inner,
        })
    }

    pub fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            nodes: self.rule.len(),
            inner: self.inner,
        }
    }

    fn engine(&self) -> SmoothEngine<'_> {
        SmoothEngine {
            rule: &self.rule,
            inner: self.inner,
        }
    }

    /// `U(m)` summed over all items, weighted by copies.
    pub fn utilities(&self, inst: &MarketInstance, m: &[f64]) -> Result<Vec<f64>> {
        let mut u = vec![0.0; inst.n_bidders()];
        self.utilities_into(inst, m, &mut u)?;
        Ok(u)
    }

    pub fn utilities_into(&self, inst: &MarketInstance, m: &[f64], u: &mut [f64]) -> Result<()> {
        self.utilities_impl(inst, m, u, None)
    }

    /// [`Evaluator::utilities_into`] that also writes the [`discrete_regime`] of `m`.
    pub fn utilities_and_regime(&self, inst: &MarketInstance, m: &[f64], u: &mut [f64], regime: &mut Vec<usize>) -> Result<()> {
        regime.clear();
        self.utilities_impl(inst, m, u, Some(regime))
    }

    fn utilities_impl(&self, inst: &MarketInstance, m: &[f64], u: &mut [f64], mut regime: Option<&mut Vec<usize>>) -> Result<()> {
        if m.len() != inst.n_bidders() || u.len() != inst.n_bidders() {
            return Err(Error::InvalidArgument(format!(
                "instance has {} bidders but got {} multipliers",
                inst.n_bidders(),
                m.len()
            )));
        }
        u.fill(0.0);
        let engine = self.engine();
        for (j, item) in inst.items.iter().enumerate() {
            if item.is_smooth() {
                engine.accumulate(item, m, inst.lambda, u);
            } else {
                let out = discrete::accumulate(item, m, inst.lambda, j, u)?;
                if let Some(r) = regime.as_deref_mut() {
                    r.extend_from_slice(&out.winners);
                    r.push(usize::MAX);
                }
            }
        }
        Ok(())
    }

    /// `U_bidder(m)` summed over the listed items only; `scratch` has one slot per bidder.
    pub fn partial_utility(&self, inst: &MarketInstance, items: &[usize], m: &[f64], bidder: usize, scratch: &mut [f64]) -> Result<f64> {
        scratch.fill(0.0);
        let engine = self.engine();
        for &j in items {
            let item = &inst.items[j];
            if item.is_smooth() {
                engine.accumulate(item, m, inst.lambda, scratch);
            } else {
                discrete::accumulate(item, m, inst.lambda, j, scratch)?;
            }
        }
        Ok(scratch[bidder])
    }

    /// Utility of each bidder from one smooth item, ignoring `copies`.
    pub fn smooth_item_utility(&self, item: &ItemSpec, m: &[f64], lambda: f64) -> Vec<f64> {
        let mut u = vec![0.0; m.len()];
        let single = ItemSpec {
            copies: 1.0,
            ..item.clone()
        };
        self.engine().accumulate(&single, m, lambda, &mut u);
        u
    }

    /// Central differences: entry `(i, j)` is `dU_i/dm_j`.
    pub fn utility_gradient(&self, inst: &MarketInstance, m: &[f64], h: f64) -> Result<DMatrix<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
        }
        let n = inst.n_bidders();
        let mut grad = DMatrix::zeros(n, n);
        let mut probe = m.to_vec();
        for j in 0..n {
            probe[j] = m[j] + h;
            let up = self.utilities(inst, &probe)?;
            probe[j] = m[j] - h;
            let down = self.utilities(inst, &probe)?;
            probe[j] = m[j];
            for i in 0..n {
                grad[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        Ok(grad)
    }
}

/// Winner sets of the fixed-value items, flattened with separators.
///
/// Fixed-value utilities are continuous wherever this stays constant, so a
/// change marks a possible jump in `U`.
pub fn discrete_regime(inst: &MarketInstance, m: &[f64], out: &mut Vec<usize>) -> Result<()> {
    out.clear();
    for (j, item) in inst.items.iter().enumerate() {
        if item.is_smooth() {
            continue;
        }
        let outcome = discrete_outcome(item, m, inst.lambda, j)?;
        out.extend_from_slice(&outcome.winners);
        out.push(usize::MAX);
    }
    Ok(())
}

fn shared() -> &'static Evaluator {
    static EVAL: OnceLock<Evaluator> = OnceLock::new();
    EVAL.get_or_init(Evaluator::default)
}

/// `U(m)` with the default quadrature.
pub fn utilities(inst: &MarketInstance, m: &[f64]) -> Result<Vec<f64>> {
    shared().utilities(inst, m)
}

pub fn smooth_item_utility(item: &ItemSpec, m: &[f64], lambda: f64, config: QuadratureConfig) -> Result<Vec<f64>> {
    Ok(Evaluator::new(config)?.smooth_item_utility(item, m, lambda))
}

pub fn utility_gradient(inst: &MarketInstance, m: &[f64], h: f64) -> Result<DMatrix<f64>> {
    shared().utility_gradient(inst, m, h)
}
