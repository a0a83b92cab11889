use rosdyn::analysis::{check_coordinatewise_stability, detect_equilibrium, stationarity_residual, EQUILIBRIUM_TOL};
use rosdyn::circuit::{compile_network, default_gate_params, CircuitMode, CompiledCircuit};
use rosdyn::gallery::{circuit_start, three_nor};
use rosdyn::{integrate, Settings};

fn compiled(mode: CircuitMode) -> CompiledCircuit {
    compile_network(&three_nor().unwrap(), &default_gate_params(), mode).unwrap()
}

/// Whether the Boolean point of `assignment` is a coordinate-wise stable equilibrium.
fn stable_at(c: &CompiledCircuit, assignment: &[bool], seed: u64) -> bool {
    let m = c.boolean_point(assignment);
    match check_coordinatewise_stability(&c.instance, &m, 0.1, 64, seed, Some(&c.variables)) {
        Ok(r) => r.stable,
        Err(_) => false,
    }
}

#[test]
fn boolean_points_are_equilibria_exactly_when_satisfying() {
    for mode in [CircuitMode::Full, CircuitMode::Simplified] {
        let c = compiled(mode);
        for bits in 0..8u32 {
            let a: Vec<bool> = (0..3).map(|k| bits >> k & 1 == 1).collect();
            let sat = c.network.satisfies(&a);
            assert_eq!(stable_at(&c, &a, u64::from(bits)), sat, "{mode:?} {a:?}");
            if sat {
                let r = stationarity_residual(&c.instance, &c.boolean_point(&a), Some(&c.variables)).unwrap();
                assert!(r <= EQUILIBRIUM_TOL, "{mode:?} {a:?}: {r}");
            }
        }
    }
}

#[test]
fn both_modes_settle_on_satisfying_assignments() {
    let full = compiled(CircuitMode::Full);
    let simple = compiled(CircuitMode::Simplified);
    let settings = Settings::new(30.0).dt(1e-3).sample_every(0.05);
    for k in 0..4 {
        let m_full = circuit_start(&full, 100 + k);
        let vars: Vec<f64> = full.variables.iter().map(|&b| m_full[b]).collect();
        let m_simple = simple.state(&vars);
        for (c, m0) in [(&full, m_full), (&simple, m_simple)] {
            let traj = integrate(&c.instance, &m0, &settings).unwrap();
            let eq = detect_equilibrium(&traj, 1e-6, 5.0).unwrap_or_else(|| panic!("{:?} from {vars:?}", c.mode));
            let a = c.read(&eq);
            assert!(c.network.satisfies(&a), "{:?} from {vars:?} read {a:?}", c.mode);
            for (&b, want) in c.variables.iter().zip(&a) {
                let target = if *want { c.params.high } else { c.params.low };
                assert!((eq[b] - target).abs() < 1e-2, "{:?}: {} vs {target}", c.mode, eq[b]);
            }
        }
    }
}

#[test]
fn auxiliaries_hold_still_along_a_run() {
    let c = compiled(CircuitMode::Full);
    let traj = integrate(&c.instance, &circuit_start(&c, 9), &Settings::new(10.0).dt(1e-3).sample_every(0.05)).unwrap();
    for m in &traj.states {
        for &(b, rest) in &c.aux {
            assert_eq!(m[b], rest);
        }
    }
}
