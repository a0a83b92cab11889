//! Purely competitive systems that simulate arbitrary linear systems.
//!
//! Given `dx/dt = Ax`, build a purely competitive `B` (zero diagonal,
//! non-positive elsewhere) and an injective `T` with `TA = BT`, so that
//! `y = Tx` solves `dy/dt = By`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::jordan::{jordan_chain, jordan_lift};
use crate::error::{Error, Result};

pub const INTERTWINING_TOL: f64 = 1e-10;
pub const CONDITION_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanBlock {
    pub lambda: Complex64,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(lambda: Complex64, size: usize) -> Self {
        JordanBlock { lambda, size }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompetitiveEmbedding {
    pub b: DMatrix<f64>,
    pub t: DMatrix<f64>,
}

impl CompetitiveEmbedding {
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        (&self.t * a - &self.b * &self.t).norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddingMode {
    /// Eigen-decompose `A` numerically; fails on defective or ill-conditioned matrices.
    Numeric,
    /// Caller-supplied Jordan data: `basis` holds the Jordan chains as
    /// columns, block by block, so that `A * basis = basis * J`.
    Exact { blocks: Vec<JordanBlock>, basis: DMatrix<Complex64> },
}

pub fn is_purely_competitive(b: &DMatrix<f64>) -> bool {
    b.is_square()
        && (0..b.nrows()).all(|i| (0..b.ncols()).all(|j| if i == j { b[(i, j)] == 0.0 } else { b[(i, j)] <= 0.0 }))
}

fn s_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0])
}

fn direct_sum(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Direct sum of the non-negative lifts, tensored with `[[0,-1],[-1,0]]`.
/// Its spectrum contains every listed eigenvalue.
pub fn purely_competitive_from_jordan(spec: &[JordanBlock]) -> Result<DMatrix<f64>> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("Jordan specification is empty".into()));
    }
    let lifts = spec.iter().map(|b| jordan_lift(b.lambda, b.size)).collect::<Result<Vec<_>>>()?;
    Ok(direct_sum(&lifts).kronecker(&s_matrix()))
}

/// A purely competitive block realizing `(lambda, d)` and its Jordan chain.
///
/// Eigenvalues with non-negative real part use `-K` where `K` realizes
/// `-lambda` with zero diagonal, which needs no doubling; the rest use `K (x) S`.
fn competitive_block(lambda: Complex64, d: usize) -> Result<(DMatrix<f64>, Vec<DVector<Complex64>>)> {
    if lambda.re >= 0.0 {
        // Lifting the conjugate keeps the rotation's block a forward 4-cycle;
        // the real lift then carries -lambda on the conjugated chain.
        let mu = (-lambda).conj();
        let k = jordan_lift(mu, d)?;
        let chain = jordan_chain(mu, d)
            .into_iter()
            .enumerate()
            .map(|(j, q)| {
                let q = q.map(|z| z.conj());
                if j % 2 == 0 {
                    -q
                } else {
                    q
                }
            })
            .collect();
        Ok((-k, chain))
    } else {
        let k = jordan_lift(lambda, d)?;
        let s = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let chain = jordan_chain(lambda, d).into_iter().map(|q| q.kronecker(&s)).collect();
        Ok((k.kronecker(&s_matrix()), chain))
    }
}

/// One block of the target plus the source-basis columns it absorbs.
struct Piece {
    b: DMatrix<f64>,
    /// `(column of P, chain vector in block coordinates)`.
    cols: Vec<(usize, DVector<Complex64>)>,
    /// Column of P holding the conjugate eigenvector, if shared.
    conj_col: Option<usize>,
}

fn assemble(a: &DMatrix<f64>, p: &DMatrix<Complex64>, pieces: Vec<Piece>) -> Result<CompetitiveEmbedding> {
    let n = a.nrows();
    let b = direct_sum(&pieces.iter().map(|pc| pc.b.clone()).collect::<Vec<_>>());
    let m = b.nrows();
    let mut q = DMatrix::<Complex64>::zeros(m, n);
    let mut at = 0;
    for pc in &pieces {
        for (col, v) in &pc.cols {
            q.view_mut((at, *col), (v.len(), 1)).copy_from(v);
            if let Some(cc) = pc.conj_col {
                q.view_mut((at, cc), (v.len(), 1)).copy_from(&v.map(|z| z.conj()));
            }
        }
        at += pc.b.nrows();
    }
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Embedding("eigenvector basis is singular".into()))?;
    let t = (q * p_inv).map(|z| z.re);
    let emb = CompetitiveEmbedding { b, t };
    verify(a, &emb)?;
    Ok(emb)
}

fn verify(a: &DMatrix<f64>, emb: &CompetitiveEmbedding) -> Result<()> {
    if !is_purely_competitive(&emb.b) {
        return Err(Error::Embedding("constructed matrix is not purely competitive".into()));
    }
    let r = emb.residual(a);
    if !(r <= INTERTWINING_TOL) {
        return Err(Error::Embedding(format!("||TA - BT||_F = {r:.3e} exceeds {INTERTWINING_TOL:e}")));
    }
    let rank = emb.t.clone().svd(false, false).rank(1e-9 * emb.t.norm().max(1.0));
    if rank != a.ncols() {
        return Err(Error::Embedding(format!("T has rank {rank}, expected {}", a.ncols())));
    }
    Ok(())
}

pub fn competitive_embedding(a: &DMatrix<f64>, mode: &EmbeddingMode) -> Result<CompetitiveEmbedding> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!("A must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("A has non-finite entries".into()));
    }
    match mode {
        EmbeddingMode::Exact { blocks, basis } => exact(a, blocks, basis),
        EmbeddingMode::Numeric => {
            if is_purely_competitive(a) {
                let emb = CompetitiveEmbedding {
                    b: a.clone(),
                    t: DMatrix::identity(a.nrows(), a.ncols()),
                };
                verify(a, &emb)?;
                return Ok(emb);
            }
            numeric(a)
        }
    }
}

fn exact(a: &DMatrix<f64>, blocks: &[JordanBlock], basis: &DMatrix<Complex64>) -> Result<CompetitiveEmbedding> {
    let n = a.nrows();
    let total: usize = blocks.iter().map(|b| b.size).sum();
    if total != n || basis.nrows() != n || basis.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "Jordan data covers {total} dimensions with a {}x{} basis, but A is {n}x{n}",
            basis.nrows(),
            basis.ncols()
        )));
    }
    // Check A P = P J block by block.
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let mut col = 0;
    let scale = 1.0 + a.norm();
    for blk in blocks {
        for j in 0..blk.size {
            let mut want = basis.column(col + j) * blk.lambda;
            if j > 0 {
                want += basis.column(col + j - 1);
            }
            let got = &ac * basis.column(col + j);
            if (got - want).norm() > 1e-9 * scale * basis.column(col + j).norm().max(1.0) {
                return Err(Error::Embedding(format!("basis column {} is not a Jordan chain vector for {}", col + j, blk.lambda)));
            }
        }
        col += blk.size;
    }
    let mut pieces = Vec::new();
    let mut col = 0;
    for blk in blocks {
        let (b, chain) = competitive_block(blk.lambda, blk.size)?;
        pieces.push(Piece {
            b,
            cols: chain.into_iter().enumerate().map(|(j, q)| (col + j, q)).collect(),
            conj_col: None,
        });
        col += blk.size;
    }
    assemble(a, basis, pieces)
}

/// Scales `v` so its first significant entry is exactly 1.
fn normalize_phase(v: DVector<Complex64>) -> DVector<Complex64> {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v.iter().find(|z| z.norm() > 1e-6 * big).copied().unwrap_or(Complex64::new(1.0, 0.0));
    v / pivot
}

fn numeric(a: &DMatrix<f64>) -> Result<CompetitiveEmbedding> {
    let n = a.nrows();
    let scale = 1.0 + a.norm();
    let mut eigs: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    for z in &mut eigs {
        if z.im.abs() <= 1e-10 * scale {
            z.im = 0.0;
        }
    }
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    // Group numerically equal eigenvalues.
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in eigs {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() <= 1e-8 * scale) {
            Some((_, k)) => *k += 1,
            None => clusters.push((z, 1)),
        }
    }

    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut pieces = Vec::new();
    for (lambda, k) in clusters {
        if lambda.im < 0.0 {
            continue;
        }
        let vectors = null_space(a, lambda, k, scale)?;
        for v in vectors {
            let col = columns.len();
            let (b, chain) = competitive_block(lambda, 1)?;
            columns.push(v.clone());
            let conj_col = if lambda.im > 0.0 {
                columns.push(v.map(|z| z.conj()));
                Some(col + 1)
            } else {
                None
            };
            pieces.push(Piece {
                b,
                cols: vec![(col, chain[0].clone())],
                conj_col,
            });
        }
    }
    if columns.len() != n {
        return Err(Error::IllConditioned { condition: f64::INFINITY });
    }
    let p = DMatrix::from_columns(&columns);
    let sv = p.clone().svd(false, false).singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition });
    }
    assemble(a, &p, pieces)
}

/// `k` independent eigenvectors for `lambda`, or an ill-conditioning error if the eigenspace is smaller.
fn null_space(a: &DMatrix<f64>, lambda: Complex64, k: usize, scale: f64) -> Result<Vec<DVector<Complex64>>> {
    let n = a.nrows();
    let tol = 1e-7 * scale;
    if lambda.im == 0.0 {
        let shifted = a - DMatrix::identity(n, n) * lambda.re;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        if svd.singular_values[order[k - 1]] > tol {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        Ok(order[..k]
            .iter()
            .map(|&r| {
                let v: DVector<f64> = vt.row(r).transpose();
                let pivot = v.iter().copied().find(|x| x.abs() > 1e-6 * v.amax()).unwrap_or(1.0);
                (v / pivot.signum()).map(|x| Complex64::new(x, 0.0))
            })
            .collect())
    } else {
        let shifted = a.map(|x| Complex64::new(x, 0.0)) - DMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        if svd.singular_values[order[k - 1]] > tol {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        Ok(order[..k].iter().map(|&r| normalize_phase(vt.row(r).adjoint())).collect())
    }
}
