//! Non-negative matrices realizing a prescribed eigenvalue or Jordan block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// 4x4 non-negative matrix having `lambda` as an eigenvalue with eigenvector
/// `(1, i, -1, -i)`.
///
/// With `S` the cyclic shift `(Sx)_k = x_{k+1}`, that vector is an eigenvector
/// of `S^p` with eigenvalue `i^p`, so `lambda` is a non-negative combination of
/// `I, S, S^2, S^3`, one power per sign of each part.
pub fn nonneg_for_eigenvalue(lambda: Complex64) -> DMatrix<f64> {
    let re_shift = if lambda.re >= 0.0 { 0 } else { 2 };
    let im_shift = if lambda.im >= 0.0 { 1 } else { 3 };
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..4 {
        m[(k, (k + re_shift) % 4)] += lambda.re.abs();
        m[(k, (k + im_shift) % 4)] += lambda.im.abs();
    }
    m
}

/// Eigenvector of [`nonneg_for_eigenvalue`] for `lambda`; real when `lambda` is real.
pub fn eigenvector_for(lambda: Complex64) -> DVector<Complex64> {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    if lambda.im == 0.0 {
        return DVector::from_vec(vec![one, 0.0 * one, -one, 0.0 * one]);
    }
    DVector::from_vec(vec![one, i, -one, -i])
}

/// `d x d` Jordan block with eigenvalue 1.
fn unit_jordan(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |r, c| if r == c || c == r + 1 { 1.0 } else { 0.0 })
}

/// Non-negative matrix containing a Jordan block of size `d` for `lambda`.
///
/// For `d > 1` this is `M_lambda (x) J_d`; at `lambda = 0` that product
/// vanishes, so the nilpotent shift of size `d` is used instead.
pub fn jordan_lift(lambda: Complex64, d: usize) -> crate::Result<DMatrix<f64>> {
    if d == 0 {
        return Err(crate::Error::InvalidArgument("Jordan block size must be at least 1".into()));
    }
    if d == 1 {
        return Ok(nonneg_for_eigenvalue(lambda));
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(unit_jordan(d) - DMatrix::identity(d, d));
    }
    Ok(nonneg_for_eigenvalue(lambda).kronecker(&unit_jordan(d)))
}

/// Jordan chain `q_1..q_d` of [`jordan_lift`]: `(K - lambda) q_1 = 0` and
/// `(K - lambda) q_j = q_{j-1}`.
pub fn jordan_chain(lambda: Complex64, d: usize) -> Vec<DVector<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    if d > 1 && lambda == zero {
        return (0..d)
            .map(|j| DVector::from_fn(d, |r, _| if r == j { Complex64::new(1.0, 0.0) } else { zero }))
            .collect();
    }
    let u = eigenvector_for(lambda);
    (0..d)
        .map(|j| {
            let e = DVector::from_fn(d, |r, _| if r == j { Complex64::new(1.0, 0.0) } else { zero });
            u.kronecker(&e) / lambda.powi(j as i32)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
        m.map(|x| c(x, 0.0))
    }

    #[test]
    fn displayed_matrices() {
        let m = nonneg_for_eigenvalue(c(2.0, 3.0));
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 3.0, 0.0, 0.0]);
        assert_eq!(m.row(3).iter().copied().collect::<Vec<_>>(), vec![3.0, 0.0, 0.0, 2.0]);
        let m = nonneg_for_eigenvalue(c(-2.0, 3.0));
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 3.0, 2.0, 0.0]);
        assert_eq!(m.row(2).iter().copied().collect::<Vec<_>>(), vec![2.0, 0.0, 0.0, 3.0]);
        assert_eq!(nonneg_for_eigenvalue(c(0.0, 0.0)), DMatrix::zeros(4, 4));
    }

    #[test]
    fn eigenpairs_in_every_quadrant() {
        for lam in [c(1.0, 2.0), c(-1.5, 0.5), c(0.3, -0.7), c(-2.0, -1.0), c(-3.0, 0.0), c(4.0, 0.0)] {
            let m = to_complex(&nonneg_for_eigenvalue(lam));
            let u = eigenvector_for(lam);
            assert!((&m * &u - &u * lam).norm() < 1e-14, "{lam}");
        }
    }

    #[test]
    fn chains_hold() {
        for (lam, d) in [(c(0.0, 1.0), 2), (c(-1.0, 0.5), 3), (c(2.0, 0.0), 2), (c(0.0, 0.0), 3)] {
            let k = to_complex(&jordan_lift(lam, d).unwrap());
            assert!(k.iter().all(|z| z.re >= 0.0));
            let chain = jordan_chain(lam, d);
            let shifted = &k - DMatrix::identity(k.nrows(), k.nrows()) * lam;
            assert!((&shifted * &chain[0]).norm() < 1e-13);
            for j in 1..d {
                assert!((&shifted * &chain[j] - &chain[j - 1]).norm() < 1e-13, "{lam} d={d} j={j}");
            }
        }
    }

    #[test]
    fn zero_size_rejected() {
        assert!(jordan_lift(c(1.0, 0.0), 0).is_err());
    }
}
