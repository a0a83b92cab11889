//! Scenarios behind the standard figures: repressilator cycles, coupled
//! repressilators, the compiled circle, NOR circuits and clocks.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::analysis::{random_starts, OrbitSettings};
use crate::builders::{build_coupled, build_cycle, CouplingSpec};
use crate::circuit::{build_clock, compile_network, default_gate_params, BooleanNetwork, CircuitMode, CompiledCircuit};
use crate::dynamics::Settings;
use crate::error::Result;
use crate::linear::{simulate_linear, EmbeddingMode, LinearSystem};
use crate::market::MarketInstance;
use crate::seed::derive_seed;

pub const SHARPNESS: u32 = 7;
/// Box for random starts on smooth instances.
pub const START_BOX: (f64, f64) = (1.1, 3.0);

/// The three mutually exclusive NOR constraints.
pub const THREE_NOR: &str = "X = NOR(Y, Z)\nY = NOR(Z, X)\nZ = NOR(X, Y)\n";

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub instance: MarketInstance,
    pub m0: Vec<f64>,
    pub settings: Settings,
    /// Coordinates drawn in the orbit plot; `None` draws a random projection.
    pub plot: Option<(usize, usize)>,
    /// True when every item has Beta values and no native limits apply.
    pub smooth: bool,
    pub orbit: OrbitSettings,
}

/// `m = (1.5, 1.5)` plus `0.4` times the unit circle, built from `dx/dt = [[0, -1], [1, 0]] x`.
pub fn circle_system() -> LinearSystem {
    LinearSystem {
        a: DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        x0: vec![1.0, 0.0],
        horizon: 4.0 * PI,
    }
}

pub fn three_nor() -> Result<BooleanNetwork> {
    BooleanNetwork::parse(THREE_NOR)
}

/// Variables drawn uniformly between floor and ceiling, auxiliaries at rest.
pub fn circuit_start(c: &CompiledCircuit, seed: u64) -> Vec<f64> {
    let vals = random_starts(c.variables.len(), 1, c.params.floor, c.params.ceiling, seed).remove(0);
    c.state(&vals)
}

fn smooth(name: &'static str, description: &'static str, inst: MarketInstance, horizon: f64, seed: u64) -> Scenario {
    let m0 = random_starts(inst.n_bidders(), 1, START_BOX.0, START_BOX.1, derive_seed(seed, name)).remove(0);
    Scenario {
        name,
        description,
        m0,
        settings: Settings::new(horizon).dt(0.01).sample_every(0.05),
        plot: (inst.n_bidders() == 2).then_some((0, 1)),
        instance: inst,
        smooth: true,
        orbit: OrbitSettings::default(),
    }
}

fn circuit(name: &'static str, description: &'static str, c: CompiledCircuit, horizon: f64, seed: u64) -> Scenario {
    let m0 = circuit_start(&c, derive_seed(seed, name));
    Scenario {
        name,
        description,
        m0,
        settings: Settings::new(horizon).dt(1e-3).sample_every(0.05),
        plot: None,
        instance: c.instance,
        smooth: false,
        orbit: OrbitSettings::default(),
    }
}

/// Every scenario at its default horizon. `scale` shrinks the horizons of the
/// long runs for smoke tests.
pub fn gallery(seed: u64, scale: f64) -> Result<Vec<Scenario>> {
    let params = default_gate_params();
    let circle = simulate_linear(&circle_system(), &EmbeddingMode::Numeric)?;
    let long = |t: f64| (t * scale).max(20.0);
    Ok(vec![
        smooth("two-cycle", "mutual repression of two bidders; converges", build_cycle(2, SHARPNESS)?, long(200.0), seed),
        smooth("three-cycle", "odd cycle; stable oscillation", build_cycle(3, SHARPNESS)?, long(200.0), seed),
        smooth("four-cycle", "even cycle; bistable", build_cycle(4, SHARPNESS)?, long(200.0), seed),
        smooth("five-cycle", "odd cycle; stable oscillation", build_cycle(5, SHARPNESS)?, long(400.0), seed),
        smooth(
            "coupling-a",
            "three coupled 3-cycles, edges 3->4, 5->7, 8->5",
            build_coupled(&CouplingSpec::preset_a(), SHARPNESS)?,
            long(500.0),
            seed,
        ),
        smooth(
            "coupling-b",
            "three coupled 3-cycles, edges 3->4, 5->7, 8->4",
            build_coupled(&CouplingSpec::preset_b(), SHARPNESS)?,
            long(500.0),
            seed,
        ),
        Scenario {
            name: "circle",
            description: "rotation dx/dt = (-x2, x1) compiled into 6 bidders and 26 items",
            // The lift has a growing mode off the image of T (eigenvalue +1), so
            // rounding error takes over after about five turns. The start is on
            // the orbit, so nothing is discarded as transient.
            settings: Settings::new(8.0 * PI).dt(1e-3).sample_every(0.01),
            m0: circle.m0,
            plot: Some((0, 1)),
            instance: circle.instance,
            smooth: false,
            orbit: OrbitSettings { burn_in: 0.0, ..OrbitSettings::default() },
        },
        circuit(
            "three-nor",
            "X = NOR(Y, Z), Y = NOR(Z, X), Z = NOR(X, Y) with reserve, floor and ceiling gadgets",
            compile_network(&three_nor()?, &params, CircuitMode::Full)?,
            30.0,
            seed,
        ),
        circuit("clock-3", "NOT cycle of length 3", build_clock(3, &params, CircuitMode::Simplified)?, long(500.0), seed),
        circuit("clock-9", "NOT cycle of length 9", build_clock(9, &params, CircuitMode::Simplified)?, long(500.0), seed),
    ])
}
