//! Instance sources and starting points given on the command line.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rosdyn::analysis::random_starts;
use rosdyn::builders::{build_coupled, build_cycle, CouplingSpec};
use rosdyn::circuit::{build_clock, compile_network, default_gate_params, BooleanNetwork, CircuitMode, CompiledCircuit};
use rosdyn::gallery::{circle_system, circuit_start, three_nor, START_BOX};
use rosdyn::linear::{simulate_linear, EmbeddingMode};
use rosdyn::seed::derive_seed;
use rosdyn::{load_instance, MarketInstance};

/// What `--instance` names: a JSON file or one of the built-in families.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    File(PathBuf),
    Cycle(usize),
    Coupling(String),
    Circle,
    ThreeNor,
    Clock(usize),
    Circuit(PathBuf),
}

impl Source {
    pub fn parse(s: &str) -> Result<Self> {
        let count = |v: &str| v.parse::<usize>().with_context(|| format!("'{s}': '{v}' is not a count"));
        Ok(match s.split_once(':') {
            Some(("cycle", n)) => Source::Cycle(count(n)?),
            Some(("clock", n)) => Source::Clock(count(n)?),
            Some(("coupling", name)) => Source::Coupling(name.to_string()),
            Some(("circuit", path)) => Source::Circuit(path.into()),
            _ if s == "circle" => Source::Circle,
            _ if s == "three-nor" => Source::ThreeNor,
            _ => Source::File(s.into()),
        })
    }
}

pub struct Resolved {
    pub instance: MarketInstance,
    pub circuit: Option<CompiledCircuit>,
    /// Start the instance was designed for, if any.
    pub natural_start: Option<Vec<f64>>,
}

impl Resolved {
    /// Seeded start: circuit variables between floor and ceiling with
    /// auxiliaries at rest, otherwise uniform in the start box clipped to any
    /// native limits.
    pub fn random_start(&self, seed: u64) -> Vec<f64> {
        if let Some(c) = &self.circuit {
            return circuit_start(c, seed);
        }
        let mut m = random_starts(self.instance.n_bidders(), 1, 0.0, 1.0, seed).remove(0);
        for (i, x) in m.iter_mut().enumerate() {
            let (mut lo, mut hi) = START_BOX;
            if let Some(l) = self.instance.limits.get(&i) {
                lo = lo.max(l.floor);
                hi = hi.min(l.ceiling).max(lo);
            }
            *x = lo + *x * (hi - lo);
        }
        m
    }

    /// `--m0` as given, or the natural start, or a start seeded from `op`.
    pub fn start(&self, m0: Option<&str>, global_seed: u64, op: &str) -> Result<Vec<f64>> {
        let n = self.instance.n_bidders();
        let m = match m0 {
            Some(spec) => match spec.strip_prefix("random:") {
                Some(seed) => {
                    let seed: u64 = seed.parse().with_context(|| format!("--m0 '{spec}': bad seed"))?;
                    self.random_start(derive_seed(seed, "m0"))
                }
                None => parse_list(spec).context("--m0")?,
            },
            None => match &self.natural_start {
                Some(m) => m.clone(),
                None => self.random_start(derive_seed(global_seed, op)),
            },
        };
        if m.len() != n {
            bail!("--m0 has {} entries but the instance has {n} bidders", m.len());
        }
        Ok(m)
    }
}

pub fn resolve(source: &Source, c: u32, mode: CircuitMode) -> Result<Resolved> {
    let plain = |instance| Resolved {
        instance,
        circuit: None,
        natural_start: None,
    };
    let compiled = |circuit: CompiledCircuit| Resolved {
        instance: circuit.instance.clone(),
        circuit: Some(circuit),
        natural_start: None,
    };
    let params = default_gate_params();
    Ok(match source {
        Source::File(path) => plain(load_instance(path)?),
        Source::Cycle(n) => plain(build_cycle(*n, c)?),
        Source::Coupling(name) => plain(build_coupled(&CouplingSpec::preset(name)?, c)?),
        Source::Circle => {
            let sim = simulate_linear(&circle_system(), &EmbeddingMode::Numeric)?;
            Resolved {
                instance: sim.instance,
                circuit: None,
                natural_start: Some(sim.m0),
            }
        }
        Source::ThreeNor => compiled(compile_network(&three_nor()?, &params, mode)?),
        Source::Clock(n) => compiled(build_clock(*n, &params, mode)?),
        Source::Circuit(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let net = BooleanNetwork::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            compiled(compile_network(&net, &params, mode)?)
        }
    })
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>().with_context(|| format!("'{x}' is not a number"))
        })
        .collect()
}

/// Rows separated by newlines or `;`, entries by commas or whitespace.
pub fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = s
        .split(['\n', ';'])
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<f64>().with_context(|| format!("'{x}' is not a number")))
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 {
        bail!("matrix is empty");
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        bail!("matrix must be square: row {} has {} entries, expected {n}", i + 1, r.len());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources() {
        assert_eq!(Source::parse("cycle:4").unwrap(), Source::Cycle(4));
        assert_eq!(Source::parse("coupling:A").unwrap(), Source::Coupling("A".into()));
        assert_eq!(Source::parse("circle").unwrap(), Source::Circle);
        assert_eq!(Source::parse("x.json").unwrap(), Source::File("x.json".into()));
        assert!(Source::parse("cycle:x").is_err());
    }

    #[test]
    fn matrices() {
        assert_eq!(parse_matrix("0 -1\n1 0\n").unwrap(), vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert_eq!(parse_matrix("0,-1;1,0").unwrap(), vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(parse_matrix("1 2\n3").is_err());
        assert!(parse_matrix("# nothing\n").is_err());
    }

    #[test]
    fn starts_respect_limits_and_circuits() {
        let r = resolve(&Source::Clock(3), 7, CircuitMode::Simplified).unwrap();
        let m = r.random_start(5);
        assert!(m.iter().all(|&x| (1.2..=3.0).contains(&x)));
        let full = resolve(&Source::ThreeNor, 7, CircuitMode::Full).unwrap();
        assert_eq!(full.instance.n_bidders(), 21);
        let m = full.start(Some("random:3"), 0, "t").unwrap();
        assert_eq!(m.iter().filter(|&&x| x == 1.0).count(), 18);
        assert!(full.start(Some("1,2"), 0, "t").is_err());
    }
}
