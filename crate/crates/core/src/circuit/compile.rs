//! NOR gates as markets.
//!
//! A gate with output `y` and inputs `x_1..x_k` is two items:
//!
//! * `L`: value `V` to each input and `C` to `y`, no reserve. `y` always wins
//!   it and pays `V max x`.
//! * `H`: value `T` to `y`, reserve `C`, ties against `y`. `y` wins it exactly
//!   when `y > low`, at a loss of `C - T`.
//!
//! So `U_y = C - V max x` below `low` (positive) and `V (threshold - max x)`
//! above it. Floors and ceilings keep every variable in `[floor, ceiling]`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::market::{BidderId, ItemSpec, MarketInstance, MultiplierLimits, TieBreak};

use super::network::BooleanNetwork;

/// Multiplier constants of the gate construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateParams {
    pub floor: f64,
    pub low: f64,
    pub threshold: f64,
    pub high: f64,
    pub ceiling: f64,
    pub v: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            floor: 1.2,
            low: 1.5,
            threshold: 2.1,
            high: 3.0,
            ceiling: 3.0,
            v: 1.0,
        }
    }
}

pub fn default_gate_params() -> GateParams {
    GateParams::default()
}

impl GateParams {
    pub fn t(&self) -> f64 {
        self.threshold * self.v
    }

    pub fn c(&self) -> f64 {
        self.low * self.threshold * self.v
    }

    /// Ordering chain plus the four gate inequalities.
    pub fn check(&self) -> Result<()> {
        let (t, c, v) = (self.t(), self.c(), self.v);
        let conds = [
            (1.0 <= self.floor, "1 <= floor"),
            (self.floor < self.low, "floor < low"),
            (self.low <= self.threshold, "low <= threshold"),
            (self.threshold < self.high, "threshold < high"),
            (self.high == self.ceiling, "high = ceiling"),
            (self.ceiling < self.low * self.threshold, "ceiling < low * threshold"),
            (v > 0.0, "V > 0"),
            (t - self.low * v >= 0.0, "T - low V >= 0"),
            (c - self.ceiling * v >= 0.0, "C - ceiling V >= 0"),
            (t - self.threshold * v <= 0.0, "T - threshold V <= 0"),
            (self.floor * c > self.ceiling * v, "floor C > ceiling V"),
            ((self.low * t - c).abs() <= 1e-12 * c, "low T = C"),
        ];
        match conds.iter().find(|(ok, _)| !ok) {
            None => Ok(()),
            Some((_, what)) => Err(Error::InvalidArgument(format!("gate parameters violate {what}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircuitMode {
    /// Native reserves and multiplier limits.
    Simplified,
    /// Reserves, floors and ceilings built from auxiliary bidders.
    Full,
}

/// Adds `L` and `H` for one gate and returns their item indices. `H` carries a native reserve.
pub fn compile_nor_gate(inst: &mut MarketInstance, inputs: &[BidderId], output: BidderId, params: &GateParams) -> (usize, usize) {
    let mut low_item = ItemSpec::fixed(inputs.iter().map(|&x| (x, params.v)));
    low_item.values.insert(output, crate::market::ValueSpec::Fixed(params.c()));
    inst.items.push(low_item);
    inst.items.push(
        ItemSpec::fixed([(output, params.t())])
            .with_reserve(params.c())
            .with_tie_break(TieBreak::Disfavor(output)),
    );
    (inst.items.len() - 2, inst.items.len() - 1)
}

/// Replaces the reserve of `item` by two auxiliary bidders who value it at
/// `reserve` and share a unit item between themselves; both settle at 1.
pub fn compile_reserve_gadget(inst: &mut MarketInstance, item: usize, label: &str) -> (BidderId, BidderId) {
    let reserve = std::mem::replace(&mut inst.items[item].reserve, 0.0);
    let a1 = inst.add_bidder(format!("{label}.r1"));
    let a2 = inst.add_bidder(format!("{label}.r2"));
    if reserve > 0.0 {
        let it = &mut inst.items[item];
        it.values.insert(a1, crate::market::ValueSpec::Fixed(reserve));
        it.values.insert(a2, crate::market::ValueSpec::Fixed(reserve));
    }
    inst.items.push(ItemSpec::fixed([(a1, 1.0), (a2, 1.0)]));
    (a1, a2)
}

/// Item `E` (value 1, reserve `floor`, ties for the bidder) and item `F`
/// (value `floor - 1`): net `floor - 1` below the floor, zero above it.
/// Returns the index of `E`, whose reserve is native.
pub fn compile_floor_gadget(inst: &mut MarketInstance, bidder: BidderId, floor: f64) -> usize {
    inst.items.push(
        ItemSpec::fixed([(bidder, 1.0)])
            .with_reserve(floor)
            .with_tie_break(TieBreak::Favor(bidder)),
    );
    let e = inst.items.len() - 1;
    inst.items.push(ItemSpec::fixed([(bidder, floor - 1.0)]));
    e
}

/// One item of value `big_m` with reserve `ceiling * big_m` and ties against
/// the bidder. Returns its index; the reserve is native.
pub fn compile_ceiling_gadget(inst: &mut MarketInstance, bidder: BidderId, ceiling: f64, big_m: f64) -> usize {
    inst.items.push(
        ItemSpec::fixed([(bidder, big_m)])
            .with_reserve(ceiling * big_m)
            .with_tie_break(TieBreak::Disfavor(bidder)),
    );
    inst.items.len() - 1
}

/// `10 * (total value of the bidder's other items) / (ceiling - 1)`.
pub fn ceiling_weight(inst: &MarketInstance, bidder: BidderId, ceiling: f64) -> f64 {
    let other: f64 = inst.items.iter().map(|it| it.copies * it.value_of(bidder).max_value()).sum();
    10.0 * other / (ceiling - 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit {
    pub instance: MarketInstance,
    pub network: BooleanNetwork,
    pub params: GateParams,
    pub mode: CircuitMode,
    /// Bidder index of each network variable.
    pub variables: Vec<BidderId>,
    /// Auxiliary bidders and the multiplier they rest at.
    pub aux: Vec<(BidderId, f64)>,
}

impl CompiledCircuit {
    /// Full multiplier vector with variables at `values` and auxiliaries at rest.
    pub fn state(&self, values: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.instance.n_bidders()];
        for (&b, &x) in self.variables.iter().zip(values) {
            m[b] = x;
        }
        for &(b, x) in &self.aux {
            m[b] = x;
        }
        m
    }

    /// `high` for true, `low` for false.
    pub fn boolean_point(&self, assignment: &[bool]) -> Vec<f64> {
        let vals: Vec<f64> = assignment
            .iter()
            .map(|&x| if x { self.params.high } else { self.params.low })
            .collect();
        self.state(&vals)
    }

    pub fn read(&self, m: &[f64]) -> Vec<bool> {
        read_assignment(m, &self.variables, self.params.threshold)
    }
}

pub fn compile_network(net: &BooleanNetwork, params: &GateParams, mode: CircuitMode) -> Result<CompiledCircuit> {
    params.check()?;
    let mut inst = MarketInstance::new(net.variables.clone(), Vec::new(), 1.0);
    let variables: Vec<BidderId> = (0..net.len()).collect();
    let mut aux = Vec::new();
    let mut high_items = Vec::new();
    for (y, ins) in net.inputs.iter().enumerate() {
        let (_, h) = compile_nor_gate(&mut inst, ins, y, params);
        high_items.push(h);
    }
    match mode {
        CircuitMode::Simplified => {
            inst.limits = variables
                .iter()
                .map(|&b| {
                    (
                        b,
                        MultiplierLimits {
                            floor: params.floor,
                            ceiling: params.ceiling,
                        },
                    )
                })
                .collect::<BTreeMap<_, _>>();
        }
        CircuitMode::Full => {
            let mut reserved = Vec::new();
            for (y, &h) in variables.iter().zip(&high_items) {
                reserved.push((h, format!("{}.H", net.variables[*y])));
                let e = compile_floor_gadget(&mut inst, *y, params.floor);
                reserved.push((e, format!("{}.E", net.variables[*y])));
            }
            // The ceiling weight depends on every other item of the bidder.
            for &y in &variables {
                let big_m = ceiling_weight(&inst, y, params.ceiling);
                let c = compile_ceiling_gadget(&mut inst, y, params.ceiling, big_m);
                reserved.push((c, format!("{}.ceil", net.variables[y])));
            }
            for (item, label) in reserved {
                let (a1, a2) = compile_reserve_gadget(&mut inst, item, &label);
                aux.push((a1, 1.0));
                aux.push((a2, 1.0));
            }
        }
    }
    inst.ensure_valid()?;
    Ok(CompiledCircuit {
        instance: inst,
        network: net.clone(),
        params: *params,
        mode,
        variables,
        aux,
    })
}

/// `X_i = m_i > threshold` over the variable bidders.
pub fn read_assignment(m: &[f64], variables: &[BidderId], threshold: f64) -> Vec<bool> {
    variables.iter().map(|&b| m[b] > threshold).collect()
}

/// Odd NOT cycle `X_i = NOT(X_{i+1})`.
pub fn build_clock(n: usize, params: &GateParams, mode: CircuitMode) -> Result<CompiledCircuit> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("clock length must be odd and at least 3, got {n}")));
    }
    compile_network(&BooleanNetwork::not_cycle(n), params, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::utilities;

    fn three_nor() -> BooleanNetwork {
        BooleanNetwork::parse("X = NOR(Y, Z)\nY = NOR(Z, X)\nZ = NOR(X, Y)").unwrap()
    }

    #[test]
    fn default_chain() {
        let p = default_gate_params();
        p.check().unwrap();
        assert!((p.t() - 2.1).abs() < 1e-15);
        assert!((p.c() - 3.15).abs() < 1e-12);
        assert!(p.t() - p.low * p.v >= 0.0);
        assert!((p.low * p.t() - p.c()).abs() < 1e-12);
        assert!(p.floor * p.c() > p.ceiling * p.v);
        let bad = GateParams { floor: 1.6, ..p };
        assert!(bad.check().is_err());
    }

    #[test]
    fn full_three_nor_has_21_bidders() {
        let c = compile_network(&three_nor(), &default_gate_params(), CircuitMode::Full).unwrap();
        assert_eq!(c.instance.n_bidders(), 21);
        assert_eq!(c.aux.len(), 18);
        let s = compile_network(&three_nor(), &default_gate_params(), CircuitMode::Simplified).unwrap();
        assert_eq!(s.instance.n_bidders(), 3);
        let empty = compile_network(&BooleanNetwork::parse("").unwrap(), &default_gate_params(), CircuitMode::Full).unwrap();
        assert_eq!((empty.instance.n_bidders(), empty.instance.items.len()), (0, 0));
    }

    #[test]
    fn auxiliaries_rest_with_zero_utility() {
        let c = compile_network(&three_nor(), &default_gate_params(), CircuitMode::Full).unwrap();
        for vals in [[3.0, 1.5, 1.5], [2.0, 2.5, 1.3], [2.9, 2.95, 3.0]] {
            let u = utilities(&c.instance, &c.state(&vals)).unwrap();
            for &(a, _) in &c.aux {
                assert_eq!(u[a], 0.0, "aux {} at {vals:?}", c.instance.bidders[a]);
            }
        }
    }

    #[test]
    fn reserve_gadget_inert_at_zero() {
        let mut inst = MarketInstance::numbered(1, vec![ItemSpec::fixed([(0, 1.0)])], 1.0);
        let (a1, a2) = compile_reserve_gadget(&mut inst, 0, "g");
        assert!(!inst.items[0].values.contains_key(&a1));
        let u = utilities(&inst, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((u[a1], u[a2]), (0.0, 0.0));
        assert_eq!(u[0], 1.0);
    }

    #[test]
    fn reserve_gadget_prices_at_r() {
        let mut inst = MarketInstance::numbered(1, vec![ItemSpec::fixed([(0, 2.0)]).with_reserve(1.5)], 1.0);
        let native = utilities(&inst, &[1.0]).unwrap()[0];
        compile_reserve_gadget(&mut inst, 0, "g");
        let u = utilities(&inst, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(u[0], native);
        assert_eq!(u[0], 0.5);
    }

    #[test]
    fn floor_and_ceiling_gadgets() {
        let p = default_gate_params();
        let mut inst = MarketInstance::numbered(1, vec![], 1.0);
        compile_floor_gadget(&mut inst, 0, p.floor);
        for m in [1.0, 1.1] {
            assert!((utilities(&inst, &[m]).unwrap()[0] - 0.2).abs() < 1e-12);
        }
        assert!(utilities(&inst, &[1.3]).unwrap()[0].abs() < 1e-12);

        let mut inst = MarketInstance::numbered(1, vec![ItemSpec::fixed([(0, 1.0)])], 1.0);
        let big_m = ceiling_weight(&inst, 0, p.ceiling);
        compile_ceiling_gadget(&mut inst, 0, p.ceiling, big_m);
        assert_eq!(utilities(&inst, &[p.ceiling]).unwrap()[0], 1.0);
        assert!(utilities(&inst, &[p.ceiling + 1e-9]).unwrap()[0] < -big_m);
    }

    #[test]
    fn gate_with_no_inputs_rises() {
        let p = default_gate_params();
        let net = BooleanNetwork::parse("A = NOR()").unwrap();
        let c = compile_network(&net, &p, CircuitMode::Simplified).unwrap();
        for y in [1.2, 1.5, 2.0, 2.9] {
            assert!(utilities(&c.instance, &[y]).unwrap()[0] > 0.0);
        }
    }

    #[test]
    fn read_assignment_is_strict() {
        assert_eq!(read_assignment(&[3.0, 1.5, 1.5], &[0, 1, 2], 2.1), vec![true, false, false]);
        assert_eq!(read_assignment(&[2.1], &[0], 2.1), vec![false]);
    }

    #[test]
    fn clock_lengths() {
        let p = default_gate_params();
        assert_eq!(build_clock(3, &p, CircuitMode::Simplified).unwrap().variables.len(), 3);
        assert_eq!(build_clock(9, &p, CircuitMode::Full).unwrap().variables.len(), 9);
        assert!(build_clock(4, &p, CircuitMode::Simplified).is_err());
    }
}
