//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every matrix function goes through a Hermitian eigendecomposition. The
//! eigenbasis returned by [`eigh`] is canonical: eigenvalues sorted in
//! descending order and, inside each degenerate cluster, a basis obtained by
//! Gram-Schmidt on projected standard basis vectors. Two calls on the same
//! input therefore produce bit-identical bases, which keeps typical projectors
//! and purifications reproducible.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative gap below which two eigenvalues are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all<'a, I>(factors: I) -> CMat
where
    I: IntoIterator<Item = &'a CMat>,
{
    let mut out = CMat::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn tensor_vec_all<'a, I>(factors: I) -> CVec
where
    I: IntoIterator<Item = &'a CVec>,
{
    let mut out = CVec::from_element(1, re(1.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

pub fn projector(v: &CVec) -> CMat {
    outer(v, v)
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entrywise deviation of `a` from `a†`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * re(0.5)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Hermitian eigendecomposition with descending eigenvalues and a canonical
/// eigenbasis.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> CVec {
        self.vectors.column(i).into_owned()
    }

    /// Rebuild `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = re(f(l));
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn eigh(a: &CMat) -> Eigh {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return Eigh {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let h = hermitian_part(a);
    let se = nalgebra::linalg::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let raw = CMat::from_fn(n, n, |r, col| se.eigenvectors[(r, order[col])]);

    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut vectors = CMat::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end - 1] - values[end]).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        let basis = canonical_cluster_basis(&raw.columns(start, end - start).into_owned());
        vectors.columns_mut(start, end - start).copy_from(&basis);
        start = end;
    }
    Eigh { values, vectors }
}

/// Canonical orthonormal basis of the span of the columns of `v`.
///
/// Works in the coordinates of `v`: the projection of `e_i` onto the span is
/// `v · conj(row_i)`. Greedily picks the standard vector with the largest
/// residual (smallest index among near-ties), so the result depends only on
/// the subspace.
fn canonical_cluster_basis(v: &CMat) -> CMat {
    let (d, k) = v.shape();
    if k == 0 {
        return v.clone();
    }
    let coords: Vec<CVec> = (0..d)
        .map(|i| CVec::from_fn(k, |j, _| v[(i, j)].conj()))
        .collect();
    let mut chosen: Vec<CVec> = Vec::with_capacity(k);
    let mut residual = coords.clone();
    for _ in 0..k {
        let norms: Vec<f64> = residual.iter().map(|r| r.norm()).collect();
        let best = norms.iter().cloned().fold(0.0f64, f64::max);
        let pick = norms
            .iter()
            .position(|&x| x >= best - 1e-8 * best.max(1e-300))
            .unwrap_or(0);
        let b = &residual[pick] / re(norms[pick]);
        for r in residual.iter_mut() {
            let proj = b.dotc(r);
            *r -= &b * proj;
        }
        chosen.push(b);
    }
    let mut out = CMat::zeros(d, k);
    for (j, b) in chosen.iter().enumerate() {
        out.column_mut(j).copy_from(&(v * b));
    }
    out
}

/// Eigenvalues only, descending.
pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    let h = hermitian_part(a);
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    eigvalsh(a).last().cloned().unwrap_or(0.0)
}

pub fn max_eigenvalue(a: &CMat) -> f64 {
    eigvalsh(a).first().cloned().unwrap_or(0.0)
}

/// Square root of a positive semidefinite matrix; small negative drift is clipped.
pub fn sqrtm_psd(a: &CMat) -> CMat {
    eigh(a).map(|l| l.max(0.0).sqrt())
}

/// `A^{-1/2}` on the support of `A` and zero on its kernel.
pub fn pinv_sqrt(a: &CMat, tol: f64) -> CMat {
    eigh(a).map(|l| if l > tol { 1.0 / l.sqrt() } else { 0.0 })
}

/// Projector onto the eigenvectors of `a` with eigenvalue above `tol`.
pub fn support_projector(a: &CMat, tol: f64) -> CMat {
    eigh(a).map(|l| if l > tol { 1.0 } else { 0.0 })
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.clone().singular_values().iter().cloned().collect()
}

/// `‖A‖₁ = Tr √(A A†)`, the sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    if a.is_square() && hermiticity_defect(a) <= 1e-13 * max_abs(a).max(1.0) {
        eigvalsh(a).iter().map(|l| l.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &CMat) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Index bookkeeping for reordering and tracing tensor factors.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For a split of the factors into `keep` (in the given order) and the rest
/// (in ascending order), returns `pos[t * d_keep + a]` = full index.
fn split_positions(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let st = strides(dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let d_keep: usize = keep.iter().map(|&i| dims[i]).product();
    let d_rest: usize = rest.iter().map(|&i| dims[i]).product();
    let mut pos = vec![0usize; d_keep * d_rest];
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| dims[i]).collect();
    let ks = strides(&keep_dims);
    let rs = strides(&rest_dims);
    for t in 0..d_rest {
        let mut base = 0;
        for (j, &f) in rest.iter().enumerate() {
            base += ((t / rs[j]) % rest_dims[j]) * st[f];
        }
        for a in 0..d_keep {
            let mut idx = base;
            for (j, &f) in keep.iter().enumerate() {
                idx += ((a / ks[j]) % keep_dims[j]) * st[f];
            }
            pos[t * d_keep + a] = idx;
        }
    }
    (d_keep, d_rest, pos)
}

pub(crate) fn check_factors(dims: &[usize], total: usize, keep: &[usize]) -> Result<()> {
    if dims.iter().product::<usize>() != total || dims.contains(&0) {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            dim: total,
        });
    }
    for (n, &k) in keep.iter().enumerate() {
        if k >= dims.len() || keep[..n].contains(&k) {
            return Err(Error::InvalidSubsystem {
                index: k,
                factors: dims.len(),
            });
        }
    }
    Ok(())
}

/// Partial trace of a square matrix over every factor not listed in `keep`.
/// The kept factors appear in the order given by `keep`.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_factors(dims, m.nrows(), keep)?;
    let (dk, dr, pos) = split_positions(dims, keep);
    let mut out = CMat::zeros(dk, dk);
    for t in 0..dr {
        let row = &pos[t * dk..(t + 1) * dk];
        for a in 0..dk {
            for b in 0..dk {
                out[(a, b)] += m[(row[a], row[b])];
            }
        }
    }
    Ok(out)
}

/// Reduced density matrix of the pure state `v` on the factors in `keep`.
pub fn reduced_from_vector(v: &CVec, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let m = vector_as_matrix(v, dims, keep)?;
    Ok(&m * m.adjoint())
}

/// Reshape `v` into a `(kept) × (rest)` matrix.
pub fn vector_as_matrix(v: &CVec, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_factors(dims, v.len(), keep)?;
    let (dk, dr, pos) = split_positions(dims, keep);
    Ok(CMat::from_fn(dk, dr, |a, t| v[pos[t * dk + a]]))
}

/// Reorder tensor factors: factor `j` of the result is factor `order[j]` of `v`.
pub fn permute_vector(v: &CVec, dims: &[usize], order: &[usize]) -> Result<CVec> {
    if order.len() != dims.len() {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            dim: v.len(),
        });
    }
    check_factors(dims, v.len(), order)?;
    let (dk, _, pos) = split_positions(dims, order);
    Ok(CVec::from_fn(dk, |a, _| v[pos[a]]))
}

/// Apply `op` (out × in) to factor `position` of `v`. Returns the new vector;
/// the factor dimension becomes `op.nrows()`.
pub fn apply_on_factor(v: &CVec, dims: &[usize], position: usize, op: &CMat) -> Result<CVec> {
    check_factors(dims, v.len(), &[position])?;
    if op.ncols() != dims[position] {
        return Err(Error::DimensionMismatch {
            expected: dims[position],
            got: op.ncols(),
        });
    }
    let left: usize = dims[..position].iter().product();
    let right: usize = dims[position + 1..].iter().product();
    let din = dims[position];
    let dout = op.nrows();
    let mut out = CVec::zeros(left * dout * right);
    for l in 0..left {
        for r in 0..right {
            for o in 0..dout {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..din {
                    acc += op[(o, i)] * v[(l * din + i) * right + r];
                }
                out[(l * dout + o) * right + r] = acc;
            }
        }
    }
    Ok(out)
}

pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b) * re(std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-random isometry `rows × cols` (`rows ≥ cols`), via QR with phase fix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = random_ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / re(d.norm()) } else { re(1.0) };
        for i in 0..rows {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    random_isometry(d, d, rng)
}

/// Random positive operator `0 ≤ A ≤ I`: a random unitary conjugating
/// uniformly drawn eigenvalues in [0, 1].
pub fn random_effect<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let u = random_unitary(d, rng);
    let diag = CMat::from_diagonal(&CVec::from_fn(d, |_, _| re(rng.random::<f64>())));
    &u * diag * u.adjoint()
}

/// Random positive semidefinite matrix of the given rank (Wishart).
pub fn random_psd<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let g = random_ginibre(d, rank, rng);
    &g * g.adjoint()
}
