//! Expected utility on items with Beta-distributed values.
//!
//! With `M` the highest opposing bid and `G` its CDF, bidder `i` with bid
//! `m_i v` earns
//!
//! ```text
//! U_i = E_v[ v (1 - m_i) G(m_i v) + lambda * integral_0^{m_i v} G(x) dx ]
//! ```
//!
//! (integrate the expected second-price payment by parts). `G` is a product of
//! scaled Beta CDFs, hence piecewise polynomial with breakpoints at the
//! opponents' maximal bids. The outer expectation uses Gauss-Legendre on
//! pieces split at those breakpoints. With integer Beta parameters the
//! integrand is a polynomial on each piece, and the rule is shrunk to the
//! smallest one that integrates it exactly.

use crate::market::{ItemSpec, ValueSpec};
use crate::quadrature::{GaussLegendre, CACHED_MAX};

use super::bernstein::{binomial_row, Bernstein};

/// How the inner integral of `G` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InnerMethod {
    /// Antiderivatives of the piecewise Bernstein representation.
    #[default]
    Exact,
    /// A second Gauss-Legendre rule on `[0, m_i v]`, with `G` evaluated pointwise.
    Tensor,
}

struct Opponent {
    /// Maximal bid `m_s * scale_s`.
    reach: f64,
    cdf: Bernstein,
}

struct Piece {
    x0: f64,
    width: f64,
    g: Bernstein,
    /// Antiderivative of `g` in the local parameter.
    ig: Bernstein,
    /// Integral of `G` over `[0, x0]`.
    offset: f64,
}

/// Piecewise polynomial CDF of the highest opposing bid.
struct MaxBidCdf {
    pieces: Vec<Piece>,
    /// Beyond this point `G = 1`.
    reach: f64,
    total: f64,
}

impl MaxBidCdf {
    fn new(mut opps: Vec<Opponent>) -> Self {
        opps.sort_by(|a, b| a.reach.total_cmp(&b.reach));
        let mut pieces = Vec::new();
        let mut x0 = 0.0;
        let mut offset = 0.0;
        let mut first = 0;
        while first < opps.len() {
            let x1 = opps[first].reach;
            if x1 > x0 {
                let active = &opps[first..];
                let mut g = Bernstein::constant(1.0);
                for s in active {
                    g = g.mul(&s.cdf.restrict(x0 / s.reach, x1 / s.reach));
                }
                let ig = g.antiderivative();
                let width = x1 - x0;
                let next = offset + width * ig.eval(1.0);
                pieces.push(Piece { x0, width, g, ig, offset });
                offset = next;
                x0 = x1;
            }
            while first < opps.len() && opps[first].reach <= x0 {
                first += 1;
            }
        }
        MaxBidCdf {
            pieces,
            reach: x0,
            total: offset,
        }
    }

    /// `(G(y), integral_0^y G)`.
    fn eval(&self, y: f64) -> (f64, f64) {
        if y >= self.reach {
            return (1.0, self.total + (y - self.reach));
        }
        let p = self
            .pieces
            .iter()
            .rev()
            .find(|p| p.x0 <= y)
            .unwrap_or(&self.pieces[0]);
        let t = ((y - p.x0) / p.width).clamp(0.0, 1.0);
        (p.g.eval(t), p.offset + p.width * p.ig.eval(t))
    }

    #[cfg(test)]
    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().map(|p| p.x0 + p.width)
    }
}

fn pointwise_cdf(opps: &[Opponent], x: f64) -> f64 {
    opps.iter()
        .map(|s| if x >= s.reach { 1.0 } else { s.cdf.eval(x / s.reach) })
        .product()
}

/// `1 / B(a, b)` for integer parameters.
fn beta_norm(a: u32, b: u32) -> f64 {
    let n = (a + b - 2) as usize;
    (a + b - 1) as f64 * binomial_row(n)[(a - 1) as usize]
}

pub(crate) struct SmoothEngine<'r> {
    pub rule: &'r GaussLegendre,
    pub inner: InnerMethod,
}

impl SmoothEngine<'_> {
    /// Adds `copies * U_i` for every interested bidder into `u`.
    pub fn accumulate(&self, item: &ItemSpec, m: &[f64], lambda: f64, u: &mut [f64]) {
        let bidders: Vec<(usize, u32, u32, f64)> = item
            .values
            .iter()
            .filter_map(|(&b, spec)| match *spec {
                ValueSpec::Beta { a, b: bb, scale } if m.get(b).copied().unwrap_or(0.0) > 0.0 => {
                    Some((b, a, bb, scale))
                }
                _ => None,
            })
            .collect();
        for &(i, a, b, scale) in &bidders {
            let opps: Vec<Opponent> = bidders
                .iter()
                .filter(|o| o.0 != i)
                .map(|&(s, sa, sb, sscale)| Opponent {
                    reach: m[s] * sscale,
                    cdf: Bernstein::beta_cdf(sa, sb),
                })
                .collect();
            u[i] += item.copies * self.bidder_utility(a, b, scale, m[i], lambda, opps);
        }
    }

    fn bidder_utility(&self, a: u32, b: u32, scale: f64, mi: f64, lambda: f64, opps: Vec<Opponent>) -> f64 {
        let norm = beta_norm(a, b);
        let top = mi * scale;
        let pdf = |t: f64| norm * t.powi(a as i32 - 1) * (1.0 - t).powi(b as i32 - 1);

        let mut cuts: Vec<f64> = opps.iter().map(|o| o.reach / top).filter(|&c| c > 0.0 && c < 1.0).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut total = 0.0;
        match self.inner {
            InnerMethod::Exact => {
                // Between cuts the integrand is a polynomial in t, so a rule
                // with (degree + 2) / 2 nodes is already exact.
                let degree = (a + b - 1) as usize + opps.iter().map(|o| o.cdf.degree()).sum::<usize>();
                let needed = (degree + 2) / 2;
                let rule = if needed < self.rule.len() && needed >= 2 { GaussLegendre::cached(needed.min(CACHED_MAX)) } else { self.rule };
                let g = MaxBidCdf::new(opps);
                let mut lo = 0.0;
                for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
                    for (t, w) in rule.on(lo, hi) {
                        let v = scale * t;
                        let (gv, igv) = g.eval(mi * v);
                        total += w * pdf(t) * (v * (1.0 - mi) * gv + lambda * igv);
                    }
                    lo = hi;
                }
            }
            InnerMethod::Tensor => {
                let mut reaches: Vec<f64> = opps.iter().map(|o| o.reach).collect();
                reaches.sort_by(f64::total_cmp);
                let mut lo = 0.0;
                for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
                    for (t, w) in self.rule.on(lo, hi) {
                        let v = scale * t;
                        let y = mi * v;
                        let gv = pointwise_cdf(&opps, y);
                        let mut igv = 0.0;
                        let mut x0 = 0.0;
                        for x1 in reaches.iter().copied().filter(|&r| r < y).chain(std::iter::once(y)) {
                            if x1 > x0 {
                                igv += self.rule.integrate(x0, x1, |x| pointwise_cdf(&opps, x));
                            }
                            x0 = x1;
                        }
                        total += w * pdf(t) * (v * (1.0 - mi) * gv + lambda * igv);
                    }
                    lo = hi;
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizer_matches_small_cases() {
        // B(1,1) = 1, B(2,1) = 1/2, B(2,2) = 1/6, B(3,5) = 1/105.
        assert_eq!(beta_norm(1, 1), 1.0);
        assert_eq!(beta_norm(2, 1), 2.0);
        assert_eq!(beta_norm(2, 2), 6.0);
        assert_eq!(beta_norm(3, 5), 105.0);
    }

    #[test]
    fn max_bid_cdf_against_pointwise_product() {
        let opps = || {
            vec![
                Opponent { reach: 0.7, cdf: Bernstein::beta_cdf(2, 3) },
                Opponent { reach: 1.3, cdf: Bernstein::beta_cdf(4, 1) },
                Opponent { reach: 0.7, cdf: Bernstein::beta_cdf(1, 1) },
            ]
        };
        let g = MaxBidCdf::new(opps());
        assert_eq!(g.breakpoints().collect::<Vec<_>>(), vec![0.7, 1.3]);
        let o = opps();
        let rule = GaussLegendre::new(48).unwrap();
        for k in 0..=40 {
            let y = 1.6 * k as f64 / 40.0;
            let (gv, igv) = g.eval(y);
            assert!((gv - pointwise_cdf(&o, y)).abs() < 1e-13, "G at {y}");
            let want = rule.integrate(0.0, y.min(0.7), |x| pointwise_cdf(&o, x))
                + if y > 0.7 { rule.integrate(0.7, y.min(1.3), |x| pointwise_cdf(&o, x)) } else { 0.0 }
                + (y - 1.3).max(0.0);
            assert!((igv - want).abs() < 1e-13, "integral at {y}: {igv} vs {want}");
        }
    }

    #[test]
    fn exact_and_tensor_agree() {
        let rule = GaussLegendre::new(64).unwrap();
        let exact = SmoothEngine { rule: &rule, inner: InnerMethod::Exact };
        let tensor = SmoothEngine { rule: &rule, inner: InnerMethod::Tensor };
        let item = ItemSpec::new([
            (0, ValueSpec::beta(7, 14)),
            (1, ValueSpec::beta(14, 7)),
            (2, ValueSpec::Beta { a: 2, b: 3, scale: 1.5 }),
        ]);
        for m in [[1.5, 1.5, 1.5], [1.1, 2.7, 1.3], [2.0, 1.0, 3.0]] {
            for lambda in [1.0, 0.4, 0.0] {
                let (mut a, mut b) = (vec![0.0; 3], vec![0.0; 3]);
                exact.accumulate(&item, &m, lambda, &mut a);
                tensor.accumulate(&item, &m, lambda, &mut b);
                for i in 0..3 {
                    assert!((a[i] - b[i]).abs() < 1e-12, "bidder {i} at {m:?}, lambda {lambda}: {} vs {}", a[i], b[i]);
                }
            }
        }
    }
}
