//! Fixed-value markets whose flow is `dm/dt = B(m - b)` on the operating box.
//!
//! Two auxiliary bidders `A` and `B` hold multiplier 2 and act as price
//! setters. Each off-diagonal `B_ik` becomes an item that `i` always wins
//! against `k`; the constant left over is built from `+-0.1` gadgets bought
//! from `A`.

use nalgebra::{DMatrix, DVector};

use super::embed::{competitive_embedding, is_purely_competitive, CompetitiveEmbedding, EmbeddingMode};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::market::{ItemSpec, MarketInstance};

pub const BOX_LO: f64 = 1.1;
pub const BOX_HI: f64 = 1.9;
pub const AUX_MULTIPLIER: f64 = 2.0;
const GADGET_UNIT: f64 = 0.1;

/// `m = offset + scale * z`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.offset).map(|(z, b)| b + self.scale * z).collect()
    }

    /// Centers each coordinate's range in the box and shrinks the widest range to fill it.
    pub fn fit(samples: &[Vec<f64>]) -> Result<Self> {
        let dim = samples.first().map_or(0, Vec::len);
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for z in samples {
            for (i, &x) in z.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::OrbitFit(format!("coordinate {i} is not finite")));
                }
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        let width = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let scale = if width > 0.0 { (BOX_HI - BOX_LO) / width } else { 1.0 };
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::OrbitFit(format!("orbit width {width:e} admits no positive scale")));
        }
        let mid = 0.5 * (BOX_LO + BOX_HI);
        let offset = lo.iter().zip(&hi).map(|(l, h)| mid - scale * 0.5 * (l + h)).collect();
        Ok(AffineMap { scale, offset })
    }
}

/// Bidders `y1..ym` followed by the auxiliary pair `A`, `B`.
pub fn compile_competitive_to_ros(b: &DMatrix<f64>, offset: &[f64]) -> Result<MarketInstance> {
    if !is_purely_competitive(b) {
        return Err(Error::InvalidArgument("matrix is not purely competitive".into()));
    }
    let m = b.nrows();
    if offset.len() != m {
        return Err(Error::InvalidArgument(format!("offset has {} entries, expected {m}", offset.len())));
    }
    let mut names: Vec<String> = (1..=m).map(|i| format!("y{i}")).collect();
    names.push("A".into());
    names.push("B".into());
    let (aux_a, aux_b) = (m, m + 1);

    let mut items = vec![
        ItemSpec::fixed([(aux_a, 2.0), (aux_b, 1.0)]),
        ItemSpec::fixed([(aux_b, 2.0), (aux_a, 1.0)]),
    ];
    for i in 0..m {
        let mut constant = 0.0;
        for k in 0..m {
            let w = -b[(i, k)];
            if k == i || w == 0.0 {
                continue;
            }
            // i outbids k, pays w * m_k and earns 2w: utility -w (m_k - 2).
            items.push(ItemSpec::fixed([(i, 2.0 * w), (k, w)]));
            constant += w * (offset[k] - 2.0);
        }
        push_constant(&mut items, i, aux_a, constant);
    }
    Ok(MarketInstance::new(names, items, 1.0))
}

/// Gadgets adding `amount` to bidder `i`'s utility on the box.
fn push_constant(items: &mut Vec<ItemSpec>, i: usize, aux: usize, amount: f64) {
    let bidder_value = if amount < 0.0 { 2.0 - GADGET_UNIT } else { 2.0 + GADGET_UNIT };
    let units = (amount.abs() / GADGET_UNIT + 1e-9).floor();
    for _ in 0..units as usize {
        items.push(ItemSpec::fixed([(i, bidder_value), (aux, 1.0)]));
    }
    let rest = amount.abs() - units * GADGET_UNIT;
    if rest > 1e-12 {
        let s = rest / GADGET_UNIT;
        items.push(ItemSpec::fixed([(i, s * bidder_value), (aux, s)]));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub x0: Vec<f64>,
    pub horizon: f64,
}

/// Everything needed to run and check a compiled linear system.
#[derive(Clone, Debug)]
pub struct LinearSimulation {
    pub instance: MarketInstance,
    pub embedding: CompetitiveEmbedding,
    pub map: AffineMap,
    /// Initial multipliers, auxiliaries included.
    pub m0: Vec<f64>,
    pub system: LinearSystem,
}

impl LinearSimulation {
    /// Predicted multipliers at time `t`, auxiliaries included.
    pub fn predict(&self, t: f64) -> Vec<f64> {
        let x = reference_solution(&self.system.a, &self.system.x0, t);
        let z = &self.embedding.t * x;
        let mut m = self.map.apply(z.as_slice());
        m.push(AUX_MULTIPLIER);
        m.push(AUX_MULTIPLIER);
        m
    }

    pub fn predicted_trajectory(&self, sample_every: f64) -> Trajectory {
        let mut traj = Trajectory::new(self.instance.bidders.clone());
        let steps = (self.system.horizon / sample_every - 1e-9).ceil() as usize;
        for k in 0..=steps {
            let t = (k as f64 * sample_every).min(self.system.horizon);
            traj.times.push(t);
            traj.states.push(self.predict(t));
        }
        traj
    }
}

/// `exp(tA) x0`.
pub fn reference_solution(a: &DMatrix<f64>, x0: &[f64], t: f64) -> DVector<f64> {
    (a * t).exp() * DVector::from_column_slice(x0)
}

pub const FIT_SAMPLES: usize = 4000;

pub fn simulate_linear(sys: &LinearSystem, mode: &EmbeddingMode) -> Result<LinearSimulation> {
    let n = sys.a.nrows();
    if sys.x0.len() != n {
        return Err(Error::InvalidArgument(format!("x0 has {} entries, expected {n}", sys.x0.len())));
    }
    if !(sys.horizon.is_finite() && sys.horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", sys.horizon)));
    }
    let embedding = competitive_embedding(&sys.a, mode)?;
    let samples: Vec<Vec<f64>> = (0..=FIT_SAMPLES)
        .map(|k| {
            let t = sys.horizon * k as f64 / FIT_SAMPLES as f64;
            (&embedding.t * reference_solution(&sys.a, &sys.x0, t)).as_slice().to_vec()
        })
        .collect();
    let map = AffineMap::fit(&samples)?;
    let instance = compile_competitive_to_ros(&embedding.b, &map.offset)?;
    let mut m0 = map.apply(&samples[0]);
    m0.push(AUX_MULTIPLIER);
    m0.push(AUX_MULTIPLIER);
    Ok(LinearSimulation {
        instance,
        embedding,
        map,
        m0,
        system: sys.clone(),
    })
}
