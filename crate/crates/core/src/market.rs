//! Market instances: bidders, items and the auction mix.
//!
//! Values are stored already divided by each bidder's return-over-spend
//! target (see [`normalize_targets`]), so every bidder's constraint reads
//! `U_i >= 0` downstream.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

pub type BidderId = usize;

/// How a single bidder values an item.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueSpec {
    Zero,
    Fixed(f64),
    /// `scale * Beta(a, b)`; integer shape parameters keep the CDF polynomial.
    Beta { a: u32, b: u32, scale: f64 },
}

impl ValueSpec {
    pub fn beta(a: u32, b: u32) -> Self {
        ValueSpec::Beta { a, b, scale: 1.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ValueSpec::Zero) || matches!(self, ValueSpec::Fixed(v) if *v == 0.0)
    }

    pub fn is_beta(&self) -> bool {
        matches!(self, ValueSpec::Beta { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ValueSpec::Zero => 0.0,
            ValueSpec::Fixed(v) => v,
            ValueSpec::Beta { a, b, scale } => scale * f64::from(a) / f64::from(a + b),
        }
    }

    /// Upper end of the support.
    pub fn max_value(&self) -> f64 {
        match *self {
            ValueSpec::Zero => 0.0,
            ValueSpec::Fixed(v) => v,
            ValueSpec::Beta { scale, .. } => scale,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    UniformSplit,
    /// The named bidder wins any tie it is part of, including a tie with the reserve.
    Favor(BidderId),
    /// The named bidder loses any tie it is part of, including a tie with the reserve.
    Disfavor(BidderId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemSpec {
    pub values: BTreeMap<BidderId, ValueSpec>,
    pub reserve: f64,
    pub tie_break: TieBreak,
    /// Linear weight on the item's utility contribution.
    pub copies: f64,
}

impl ItemSpec {
    pub fn new(values: impl IntoIterator<Item = (BidderId, ValueSpec)>) -> Self {
        ItemSpec {
            values: values.into_iter().collect(),
            reserve: 0.0,
            tie_break: TieBreak::UniformSplit,
            copies: 1.0,
        }
    }

    pub fn fixed(values: impl IntoIterator<Item = (BidderId, f64)>) -> Self {
        Self::new(values.into_iter().map(|(b, v)| (b, ValueSpec::Fixed(v))))
    }

    pub fn with_reserve(mut self, reserve: f64) -> Self {
        self.reserve = reserve;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_copies(mut self, copies: f64) -> Self {
        self.copies = copies;
        self
    }

    pub fn is_smooth(&self) -> bool {
        self.values.values().any(ValueSpec::is_beta)
    }

    /// Bidders with a non-zero value specification.
    pub fn interested(&self) -> impl Iterator<Item = (BidderId, ValueSpec)> + '_ {
        self.values
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(&b, &v)| (b, v))
    }

    pub fn value_of(&self, bidder: BidderId) -> ValueSpec {
        self.values.get(&bidder).copied().unwrap_or(ValueSpec::Zero)
    }
}

/// Hard bounds on one bidder's multiplier, used by the simplified circuit
/// construction in place of floor/ceiling gadgets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierLimits {
    pub floor: f64,
    pub ceiling: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarketInstance {
    pub bidders: Vec<String>,
    pub items: Vec<ItemSpec>,
    /// 1 is a pure second-price auction, 0 a pure first-price auction.
    pub lambda: f64,
    pub limits: BTreeMap<BidderId, MultiplierLimits>,
}

impl MarketInstance {
    pub fn new(bidders: Vec<String>, items: Vec<ItemSpec>, lambda: f64) -> Self {
        MarketInstance {
            bidders,
            items,
            lambda,
            limits: BTreeMap::new(),
        }
    }

    /// An instance with bidders named `1..=n`.
    pub fn numbered(n: usize, items: Vec<ItemSpec>, lambda: f64) -> Self {
        Self::new((1..=n).map(|i| i.to_string()).collect(), items, lambda)
    }

    pub fn n_bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn bidder_index(&self, name: &str) -> Option<BidderId> {
        self.bidders.iter().position(|b| b == name)
    }

    pub fn add_bidder(&mut self, name: impl Into<String>) -> BidderId {
        self.bidders.push(name.into());
        self.bidders.len() - 1
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn is_smooth(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(ItemSpec::is_smooth)
    }

    pub fn has_smooth_items(&self) -> bool {
        self.items.iter().any(ItemSpec::is_smooth)
    }

    /// Item count weighted by `copies`.
    pub fn weighted_item_count(&self) -> f64 {
        self.items.iter().map(|it| it.copies).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }

    /// Returns an error naming the first violation, if any.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidInstance(v.to_string())),
        }
    }
}

/// A non-negative multiplier per bidder, in bidder order.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierVector(Vec<f64>);

impl MultiplierVector {
    pub fn new(values: Vec<f64>, n_bidders: usize) -> Result<Self> {
        if values.len() != n_bidders {
            return Err(Error::InvalidArgument(format!(
                "expected {n_bidders} multipliers, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "multiplier {i} must be finite and non-negative, got {}",
                values[i]
            )));
        }
        Ok(MultiplierVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for MultiplierVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub item: Option<usize>,
    pub bidder: Option<BidderId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.item, self.bidder) {
            (Some(i), Some(b)) => write!(f, "item {i}, bidder {b}: {}", self.message),
            (Some(i), None) => write!(f, "item {i}: {}", self.message),
            (None, Some(b)) => write!(f, "bidder {b}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    fn push(&mut self, item: Option<usize>, bidder: Option<BidderId>, message: impl Into<String>) {
        self.violations.push(Violation {
            item,
            bidder,
            message: message.into(),
        });
    }
}

/// Lists every structural violation; an empty report means the instance is usable.
pub fn validate_instance(inst: &MarketInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = inst.n_bidders();

    if !(0.0..=1.0).contains(&inst.lambda) {
        report.push(None, None, format!("lambda out of [0,1]: {}", inst.lambda));
    }
    for (i, name) in inst.bidders.iter().enumerate() {
        if inst.bidders[..i].contains(name) {
            report.push(None, Some(i), format!("duplicate bidder name '{name}'"));
        }
    }
    for (&b, lim) in &inst.limits {
        if b >= n {
            report.push(None, Some(b), "limits reference an unknown bidder");
        }
        if !(lim.floor.is_finite() && lim.ceiling.is_finite() && lim.floor < lim.ceiling) {
            report.push(None, Some(b), "limits need finite floor < ceiling");
        }
    }

    for (j, item) in inst.items.iter().enumerate() {
        let j = Some(j);
        let mut has_beta = false;
        let mut has_fixed = false;
        for (&b, spec) in &item.values {
            if b >= n {
                report.push(j, Some(b), "item references an unknown bidder");
            }
            match *spec {
                ValueSpec::Zero => {}
                ValueSpec::Fixed(v) => {
                    if !(v.is_finite() && v >= 0.0) {
                        report.push(j, Some(b), format!("fixed value must be finite and >= 0, got {v}"));
                    }
                    if v > 0.0 {
                        has_fixed = true;
                    }
                }
                ValueSpec::Beta { a, b: bb, scale } => {
                    has_beta = true;
                    if a < 1 || bb < 1 {
                        report.push(j, Some(b), format!("beta parameters must be >= 1, got ({a}, {bb})"));
                    }
                    if !(scale.is_finite() && scale > 0.0) {
                        report.push(j, Some(b), format!("beta scale must be positive, got {scale}"));
                    }
                }
            }
        }
        if item.interested().next().is_none() {
            report.push(j, None, "item has no interested bidder");
        }
        if !(item.reserve.is_finite() && item.reserve >= 0.0) {
            report.push(j, None, format!("reserve must be finite and >= 0, got {}", item.reserve));
        }
        if !(item.copies.is_finite() && item.copies > 0.0) {
            report.push(j, None, format!("copies must be positive, got {}", item.copies));
        }
        match item.tie_break {
            TieBreak::UniformSplit => {}
            TieBreak::Favor(b) | TieBreak::Disfavor(b) => {
                if item.value_of(b).is_zero() {
                    report.push(j, Some(b), "tie-break names a bidder with no value on the item");
                }
            }
        }
        if has_beta {
            if item.reserve != 0.0 {
                report.push(j, None, "smooth item with nonzero reserve");
            }
            if item.tie_break != TieBreak::UniformSplit {
                report.push(j, None, "smooth item with directed tie-break");
            }
            if has_fixed {
                report.push(j, None, "smooth item mixes fixed and beta values");
            }
        }
    }
    report
}

/// Divides every bidder's values by its target so that all targets become 1.
///
/// `raw[i][j]` is bidder `i`'s value for item `j`.
pub fn normalize_targets(raw: &[Vec<f64>], targets: &[f64]) -> Result<Vec<Vec<f64>>> {
    if raw.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} value rows but {} targets",
            raw.len(),
            targets.len()
        )));
    }
    raw.iter()
        .zip(targets)
        .enumerate()
        .map(|(i, (row, &tau))| {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::NonPositiveTarget { bidder: i, value: tau });
            }
            Ok(row.iter().map(|v| v / tau).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bidder() -> MarketInstance {
        MarketInstance::numbered(
            2,
            vec![
                ItemSpec::fixed([(0, 2.0), (1, 1.0)]),
                ItemSpec::fixed([(0, 1.0), (1, 2.0)]),
            ],
            1.0,
        )
    }

    #[test]
    fn normalize_divides_rows() {
        let out = normalize_targets(&[vec![4.0, 2.0]], &[2.0]).unwrap();
        assert_eq!(out, vec![vec![2.0, 1.0]]);
        let out = normalize_targets(&[vec![3.0], vec![5.0]], &[3.0, 5.0]).unwrap();
        assert_eq!(out, vec![vec![1.0], vec![1.0]]);
        let raw = vec![vec![0.3, 7.0], vec![1.5, 0.0]];
        assert_eq!(normalize_targets(&raw, &[1.0, 1.0]).unwrap(), raw);
    }

    #[test]
    fn normalize_rejects_bad_target() {
        let err = normalize_targets(&[vec![1.0], vec![1.0]], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveTarget { bidder: 1, .. }));
        assert!(err.to_string().contains("bidder 1"));
    }

    #[test]
    fn well_formed_instance_is_clean() {
        assert!(validate_instance(&two_bidder()).is_empty());
    }

    #[test]
    fn violations_are_listed() {
        let mut inst = two_bidder();
        inst.items.push(ItemSpec::new([(0, ValueSpec::Zero)]));
        let r = validate_instance(&inst);
        assert!(r.contains("item has no interested bidder"));
        assert_eq!(r.violations[0].item, Some(2));

        let mut inst = two_bidder();
        inst.items.push(ItemSpec::new([(0, ValueSpec::beta(2, 1))]).with_reserve(0.5));
        assert!(validate_instance(&inst).contains("smooth item with nonzero reserve"));

        let mut inst = two_bidder();
        inst.items[0].values.insert(5, ValueSpec::Fixed(1.0));
        assert!(validate_instance(&inst).contains("unknown bidder"));

        let inst = two_bidder().with_lambda(1.5);
        assert!(validate_instance(&inst).contains("lambda out of [0,1]"));
    }

    #[test]
    fn directed_ties_need_an_interested_bidder() {
        let mut inst = two_bidder();
        inst.items.push(ItemSpec::fixed([(0, 1.0)]).with_tie_break(TieBreak::Favor(1)));
        assert!(validate_instance(&inst).contains("tie-break"));
    }

    #[test]
    fn beta_summary_statistics() {
        let v = ValueSpec::Beta { a: 7, b: 14, scale: 3.0 };
        assert!((v.mean() - 1.0).abs() < 1e-15);
        assert_eq!(v.max_value(), 3.0);
    }

    #[test]
    fn multiplier_vector_checks_shape_and_sign() {
        assert!(MultiplierVector::new(vec![1.0, 2.0], 2).is_ok());
        assert!(MultiplierVector::new(vec![1.0], 2).is_err());
        assert!(MultiplierVector::new(vec![1.0, -0.1], 2).is_err());
        assert!(MultiplierVector::new(vec![f64::NAN, 1.0], 2).is_err());
    }
}
