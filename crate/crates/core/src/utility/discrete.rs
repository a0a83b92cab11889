//! Fixed-value items under the lambda-mixed auction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::market::{BidderId, ItemSpec, TieBreak, ValueSpec};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ItemOutcome {
    /// Allocation share per winning bidder; absent bidders get nothing.
    pub allocation: BTreeMap<BidderId, f64>,
    /// Total payment per winning bidder (share times unit price).
    pub payment: BTreeMap<BidderId, f64>,
    pub winners: Vec<BidderId>,
}

impl ItemOutcome {
    pub fn share(&self, bidder: BidderId) -> f64 {
        self.allocation.get(&bidder).copied().unwrap_or(0.0)
    }

    pub fn paid(&self, bidder: BidderId) -> f64 {
        self.payment.get(&bidder).copied().unwrap_or(0.0)
    }

    pub fn is_allocated(&self) -> bool {
        !self.winners.is_empty()
    }
}

/// Runs the auction for one fixed-value item.
///
/// `item_index` only labels the error for a smooth item.
pub fn discrete_outcome(item: &ItemSpec, m: &[f64], lambda: f64, item_index: usize) -> Result<ItemOutcome> {
    let mut bids: Vec<(BidderId, f64)> = Vec::with_capacity(item.values.len());
    for (&b, spec) in &item.values {
        match *spec {
            ValueSpec::Beta { .. } => return Err(Error::NotDiscrete { item: item_index }),
            ValueSpec::Zero => {}
            ValueSpec::Fixed(v) => {
                let bid = m.get(b).copied().unwrap_or(0.0) * v;
                let eligible = bid > 0.0
                    && (bid > item.reserve
                        || (bid == item.reserve && item.tie_break != TieBreak::Disfavor(b)));
                if eligible {
                    bids.push((b, bid));
                }
            }
        }
    }
    let mut out = ItemOutcome::default();
    let Some(top) = bids.iter().map(|&(_, x)| x).reduce(f64::max) else {
        return Ok(out);
    };
    let mut tied: Vec<BidderId> = bids.iter().filter(|&&(_, x)| x == top).map(|&(b, _)| b).collect();
    match item.tie_break {
        TieBreak::UniformSplit => {}
        TieBreak::Favor(k) => {
            if tied.contains(&k) {
                tied = vec![k];
            }
        }
        TieBreak::Disfavor(k) => {
            if tied.len() > 1 {
                tied.retain(|&b| b != k);
            }
        }
    }
    let share = 1.0 / tied.len() as f64;
    for &w in &tied {
        let second = bids
            .iter()
            .filter(|&&(b, _)| b != w)
            .map(|&(_, x)| x)
            .fold(item.reserve, f64::max);
        let unit_price = lambda * second + (1.0 - lambda) * top;
        out.allocation.insert(w, share);
        out.payment.insert(w, share * unit_price);
    }
    out.winners = tied;
    Ok(out)
}

/// Adds `copies * (value - payment)` of a fixed-value item into `u`.
pub(crate) fn accumulate(item: &ItemSpec, m: &[f64], lambda: f64, item_index: usize, u: &mut [f64]) -> Result<ItemOutcome> {
    let out = discrete_outcome(item, m, lambda, item_index)?;
    for &w in &out.winners {
        let v = match item.value_of(w) {
            ValueSpec::Fixed(v) => v,
            _ => 0.0,
        };
        u[w] += item.copies * (out.share(w) * v - out.paid(w));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(vals: &[(usize, f64)]) -> ItemSpec {
        ItemSpec::fixed(vals.iter().copied())
    }

    #[test]
    fn second_price_with_reserve() {
        let it = item(&[(0, 2.0), (1, 1.0)]).with_reserve(1.5);
        let out = discrete_outcome(&it, &[1.0, 1.0], 1.0, 0).unwrap();
        assert_eq!(out.winners, vec![0]);
        assert_eq!(out.paid(0), 1.5);
    }

    #[test]
    fn first_price_pays_own_bid() {
        let it = item(&[(0, 2.0), (1, 1.0)]);
        let out = discrete_outcome(&it, &[1.5, 1.0], 0.0, 0).unwrap();
        assert_eq!(out.paid(0), 3.0);
    }

    #[test]
    fn below_reserve_is_unallocated() {
        let it = item(&[(0, 1.0)]).with_reserve(2.0);
        let out = discrete_outcome(&it, &[1.0], 1.0, 0).unwrap();
        assert!(!out.is_allocated());
    }

    #[test]
    fn uniform_tie_splits() {
        let it = item(&[(0, 1.0), (1, 1.0)]);
        let out = discrete_outcome(&it, &[2.0, 2.0], 1.0, 0).unwrap();
        assert_eq!(out.share(0), 0.5);
        assert_eq!(out.paid(1), 1.0);
    }

    #[test]
    fn directed_ties() {
        let it = item(&[(0, 1.0), (1, 1.0)]).with_tie_break(TieBreak::Favor(1));
        let out = discrete_outcome(&it, &[2.0, 2.0], 1.0, 0).unwrap();
        assert_eq!(out.winners, vec![1]);
        assert_eq!(out.paid(1), 2.0);

        let it = item(&[(0, 1.0), (1, 1.0)]).with_tie_break(TieBreak::Disfavor(1));
        let out = discrete_outcome(&it, &[2.0, 2.0], 1.0, 0).unwrap();
        assert_eq!(out.winners, vec![0]);

        // Disfavor at the reserve leaves the item unsold.
        let it = item(&[(0, 1.0)]).with_reserve(2.0).with_tie_break(TieBreak::Disfavor(0));
        assert!(!discrete_outcome(&it, &[2.0], 1.0, 0).unwrap().is_allocated());
        // Favor at the reserve sells it.
        let it = item(&[(0, 1.0)]).with_reserve(2.0).with_tie_break(TieBreak::Favor(0));
        assert_eq!(discrete_outcome(&it, &[2.0], 1.0, 0).unwrap().paid(0), 2.0);
    }

    #[test]
    fn smooth_item_rejected() {
        let it = ItemSpec::new([(0, ValueSpec::beta(2, 1))]);
        assert!(matches!(discrete_outcome(&it, &[1.0], 1.0, 4), Err(Error::NotDiscrete { item: 4 })));
    }
}
