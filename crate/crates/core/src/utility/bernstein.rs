//! Polynomials in Bernstein form on [0, 1].
//!
//! Integer-parameter Beta CDFs have non-negative Bernstein coefficients, and
//! so do their products, restrictions and antiderivatives. Evaluation keeps
//! every term positive, which avoids the cancellation of the monomial basis.

#[derive(Clone, Debug, PartialEq)]
pub struct Bernstein {
    coef: Vec<f64>,
    /// `coef[k] * C(n, k)`, cached for evaluation.
    scaled: Vec<f64>,
}

pub fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    // Round to the nearest integer to remove drift in the running product.
    for r in &mut row {
        *r = r.round();
    }
    row
}

impl Bernstein {
    pub fn new(coef: Vec<f64>) -> Self {
        assert!(!coef.is_empty(), "a Bernstein polynomial needs at least one coefficient");
        let binom = binomial_row(coef.len() - 1);
        let scaled = coef.iter().zip(&binom).map(|(c, b)| c * b).collect();
        Bernstein { coef, scaled }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// CDF of Beta(a, b) for integer a, b >= 1: `sum_{j=a}^{a+b-1} B_{j,a+b-1}(u)`.
    pub fn beta_cdf(a: u32, b: u32) -> Self {
        let n = (a + b - 1) as usize;
        Self::new((0..=n).map(|j| if j >= a as usize { 1.0 } else { 0.0 }).collect())
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.degree();
        if n == 0 {
            return self.coef[0];
        }
        let d = &self.scaled;
        if t <= 0.5 {
            let u = 1.0 - t;
            let s = t / u;
            let mut acc = d[n];
            for k in (0..n).rev() {
                acc = acc * s + d[k];
            }
            acc * u.powi(n as i32)
        } else {
            let s = (1.0 - t) / t;
            let mut acc = d[0];
            for &dk in &d[1..] {
                acc = acc * s + dk;
            }
            acc * t.powi(n as i32)
        }
    }

    /// The same polynomial reparametrized so that [t0, t1] maps onto [0, 1].
    pub fn restrict(&self, t0: f64, t1: f64) -> Self {
        if t0 == 0.0 && t1 == 1.0 {
            return self.clone();
        }
        let left = if t1 == 1.0 {
            self.coef.clone()
        } else {
            subdivide(&self.coef, t1).0
        };
        let out = if t0 == 0.0 {
            left
        } else {
            subdivide(&left, t0 / t1).1
        };
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (n, m) = (self.degree(), other.degree());
        let bn = binomial_row(n);
        let bm = binomial_row(m);
        let bnm = binomial_row(n + m);
        let mut out = vec![0.0; n + m + 1];
        for i in 0..=n {
            let pi = self.coef[i] * bn[i];
            if pi == 0.0 {
                continue;
            }
            for j in 0..=m {
                out[i + j] += pi * other.coef[j] * bm[j];
            }
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o /= bnm[k];
        }
        Self::new(out)
    }

    /// `t -> integral_0^t p`, one degree higher.
    pub fn antiderivative(&self) -> Self {
        let n1 = (self.degree() + 1) as f64;
        let mut out = Vec::with_capacity(self.coef.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for c in &self.coef {
            acc += c / n1;
            out.push(acc);
        }
        Self::new(out)
    }
}

/// de Casteljau split at `t`: coefficients on [0, t] and on [t, 1].
fn subdivide(coef: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = coef.len();
    let mut work = coef.to_vec();
    let mut left = Vec::with_capacity(n);
    let mut right = vec![0.0; n];
    left.push(work[0]);
    right[n - 1] = work[n - 1];
    for level in 1..n {
        for k in 0..(n - level) {
            work[k] = (1.0 - t) * work[k] + t * work[k + 1];
        }
        left.push(work[0]);
        right[n - 1 - level] = work[n - 1 - level];
    }
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{Beta, ContinuousCDF};

    fn naive(coef: &[f64], t: f64) -> f64 {
        let n = coef.len() - 1;
        let b = binomial_row(n);
        (0..=n)
            .map(|k| coef[k] * b[k] * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32))
            .sum()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_row(4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(binomial_row(0), vec![1.0]);
        assert_eq!(binomial_row(40)[20], 137_846_528_820.0);
    }

    #[test]
    fn beta_cdf_matches_incomplete_beta() {
        for (a, b) in [(1, 1), (2, 1), (7, 14), (14, 7), (3, 5)] {
            let p = Bernstein::beta_cdf(a, b);
            let oracle = Beta::new(f64::from(a), f64::from(b)).unwrap();
            for k in 0..=50 {
                let t = k as f64 / 50.0;
                assert!((p.eval(t) - oracle.cdf(t)).abs() < 1e-12, "({a},{b}) at {t}");
            }
        }
    }

    #[test]
    fn antiderivative_of_uniform_cdf() {
        // F(u) = u, so its antiderivative is u^2 / 2.
        let p = Bernstein::beta_cdf(1, 1).antiderivative();
        for t in [0.0, 0.3, 0.7, 1.0] {
            assert!((p.eval(t) - 0.5 * t * t).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn eval_matches_naive_sum(coef in prop::collection::vec(0.0f64..2.0, 1..25), t in 0.0f64..=1.0) {
            let p = Bernstein::new(coef.clone());
            prop_assert!((p.eval(t) - naive(&coef, t)).abs() < 1e-11);
        }

        #[test]
        fn restriction_reparametrizes(a in 1u32..12, b in 1u32..12, t0 in 0.0f64..0.5, len in 0.05f64..0.5, s in 0.0f64..=1.0) {
            let p = Bernstein::beta_cdf(a, b);
            let t1 = t0 + len;
            let r = p.restrict(t0, t1);
            prop_assert!((r.eval(s) - p.eval(t0 + s * (t1 - t0))).abs() < 1e-12);
        }

        #[test]
        fn product_matches_pointwise(a in 1u32..10, b in 1u32..10, c in 1u32..10, d in 1u32..10, t in 0.0f64..=1.0) {
            let p = Bernstein::beta_cdf(a, b);
            let q = Bernstein::beta_cdf(c, d);
            prop_assert!((p.mul(&q).eval(t) - p.eval(t) * q.eval(t)).abs() < 1e-12);
        }

        #[test]
        fn antiderivative_matches_quadrature(a in 1u32..10, b in 1u32..10, t in 0.0f64..=1.0) {
            let p = Bernstein::beta_cdf(a, b);
            let rule = crate::quadrature::GaussLegendre::new(32).unwrap();
            let want = rule.integrate(0.0, t, |x| p.eval(x));
            prop_assert!((p.antiderivative().eval(t) - want).abs() < 1e-13);
        }
    }
}
