//! Dense symmetric matrices, eigendecomposition, PSD projection and
//! eigenvalue perturbation bounds.
//!
//! Storage is a flat row-major buffer. Because every matrix held here is
//! symmetric, the same buffer is also a valid column-major view, which is how
//! it is handed to `faer` for the heavy kernels.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("buffer of length {len} cannot hold a {n}x{n} matrix")]
    BadBuffer { n: usize, len: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
}

/// Dense symmetric real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// All-ones matrix `J`.
    pub fn ones(n: usize) -> Self {
        Self::filled(n, 1.0)
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` and symmetrizes it as `(M + Mᵀ)/2`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        m
    }

    /// Wraps a row-major buffer, symmetrizing it.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::BadBuffer { n, len: data.len() });
        }
        let mut m = Self { n, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut data = Vec::with_capacity(n * n);
        for &a in v {
            for &b in v {
                data.push(a * b);
            }
        }
        Self { n, data }
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diagonal(blocks: &[SymMatrix]) -> Self {
        let n = blocks.iter().map(|b| b.n).sum();
        let mut m = Self::zeros(n);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    m.data[(offset + i) * n + offset + j] = b.get(i, j);
                }
            }
            offset += b.n;
        }
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn faer_ref(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.n, self.n)
    }

    pub(crate) fn from_faer(m: MatRef<'_, f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(i, j)])
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in indices {
            let row = self.row(i);
            for &j in indices {
                data.push(row[j]);
            }
        }
        Self { n: k, data }
    }

    /// Rectangular submatrix rows × cols, row-major.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            let row = self.row(i);
            out.extend(cols.iter().map(|&j| row[j]));
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, LinalgError> {
        self.check_same(other)?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same(&self, other: &Self) -> Result<(), LinalgError> {
        if self.n != other.n {
            return Err(LinalgError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    /// `self + s·I`.
    pub fn shift_diagonal(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += s;
        }
        out
    }

    /// Frobenius inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Returns a symmetric `n × n` matrix whose rows/columns are permuted:
    /// `out[perm[i]][perm[j]] = self[i][j]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[perm[i] * n + perm[j]] = self.data[i * n + j];
            }
        }
        out
    }
}

/// `max_ij |(A·B)_ij|` for symmetric `A`, `B` (the product itself is not
/// symmetric in general).
pub fn product_max_abs(a: &SymMatrix, b: &SymMatrix) -> Result<f64, LinalgError> {
    a.check_same(b)?;
    let n = a.n;
    let mut out = Mat::<f64>::zeros(n, n);
    matmul(
        out.as_mut(),
        Accum::Replace,
        a.faer_ref(),
        b.faer_ref(),
        1.0,
        Par::Seq,
    );
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            m = m.max(out[(i, j)].abs());
        }
    }
    Ok(m)
}

/// Full spectral decomposition with eigenvalues in non-increasing order.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    n: usize,
    values: Vec<f64>,
    /// Column-major: eigenvector `i` occupies `vectors[i*n .. (i+1)*n]`.
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// Columns `range` of U as a column-major `n × k` buffer.
    pub fn columns(&self, range: std::ops::RangeInclusive<usize>) -> (Vec<f64>, usize) {
        let (a, b) = (*range.start(), *range.end());
        (self.vectors[a * self.n..(b + 1) * self.n].to_vec(), b + 1 - a)
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }

    fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n;
        let kept: Vec<(usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &l)| (i, f(l)))
            .filter(|&(_, l)| l != 0.0)
            .collect();
        if kept.is_empty() {
            return SymMatrix::zeros(n);
        }
        // U_k · diag(w) · U_kᵀ
        let r = kept.len();
        let left = Mat::<f64>::from_fn(n, r, |i, c| {
            let (k, w) = kept[c];
            self.vectors[k * n + i] * w
        });
        let right = Mat::<f64>::from_fn(n, r, |i, c| self.vectors[kept[c].0 * n + i]);
        let mut out = Mat::<f64>::zeros(n, n);
        matmul(
            out.as_mut(),
            Accum::Replace,
            left.as_ref(),
            right.as_ref().transpose(),
            1.0,
            Par::Seq,
        );
        SymMatrix::from_faer(out.as_ref())
    }
}

/// Symmetric eigendecomposition.
///
/// Eigenvectors follow a fixed sign convention: the entry of largest
/// magnitude is positive, with ties going to the lowest index.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenSystem, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.n;
    if n == 0 {
        return Ok(EigenSystem {
            n,
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let evd = m
        .faer_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    // faer returns ascending order
    for k in (0..n).rev() {
        values.push(s[k]);
        let col = u.col(k);
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..n {
            let a = col[i].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        vectors.extend((0..n).map(|i| sign * col[i]));
    }
    Ok(EigenSystem { n, values, vectors })
}

/// Eigenvalues only, non-increasing.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Vec<f64>, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if m.n == 0 {
        return Ok(Vec::new());
    }
    let mut v = m
        .faer_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)?;
    v.reverse();
    Ok(v)
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues_sym(m)?.last().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(m: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues_sym(m)?.first().copied().unwrap_or(0.0))
}

/// Spectral norm `‖M‖_op = max |λ_i|`.
pub fn op_norm(m: &SymMatrix) -> Result<f64, LinalgError> {
    let v = eigenvalues_sym(m)?;
    Ok(v.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

/// Frobenius-nearest PSD matrix: `U Λ₊ Uᵀ`.
pub fn psd_project(m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let eig = eig_sym(m)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Result of an eigenvalue perturbation bound whose hypothesis may fail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PerturbationBound {
    Bound(f64),
    Inapplicable,
}

impl PerturbationBound {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Bound(v) => Some(v),
            Self::Inapplicable => None,
        }
    }

    pub fn is_applicable(self) -> bool {
        matches!(self, Self::Bound(_))
    }
}

/// Weyl's inequality: `|λ_t(M+H) − λ_t(M)| ≤ ‖H‖_op` for every `t`.
///
/// `t` is a 0-based rank index into the non-increasing spectrum.
pub fn weyl_bound(m: &SymMatrix, h: &SymMatrix, t: usize) -> Result<f64, LinalgError> {
    m.check_same(h)?;
    if t >= m.n {
        return Err(LinalgError::IndexOutOfRange { index: t, n: m.n });
    }
    op_norm(h)
}

/// Quantities shared by both refined bounds.
struct SpectralPieces {
    lambda_t: f64,
    lambda_next: f64,
    h_norm: f64,
    /// max |xᵀHx| over unit x in the column span handed in
    h_compressed: f64,
    /// ‖H U‖_op for the column block handed in
    h_times_u: f64,
}

fn spectral_pieces(
    m: &SymMatrix,
    h: &SymMatrix,
    t: usize,
    last: usize,
    first_col: usize,
) -> Result<SpectralPieces, LinalgError> {
    m.check_same(h)?;
    let n = m.n;
    if t > last {
        return Err(LinalgError::IndexOutOfRange { index: t, n: last + 1 });
    }
    if last + 1 >= n {
        return Err(LinalgError::IndexOutOfRange { index: last + 1, n });
    }
    let eig = eig_sym(m)?;
    let (u, k) = eig.columns(first_col..=last);
    let u = MatRef::from_column_major_slice(&u, n, k);
    let mut hu = Mat::<f64>::zeros(n, k);
    matmul(hu.as_mut(), Accum::Replace, h.faer_ref(), u, 1.0, Par::Seq);
    let mut compressed = Mat::<f64>::zeros(k, k);
    matmul(
        compressed.as_mut(),
        Accum::Replace,
        u.transpose(),
        hu.as_ref(),
        1.0,
        Par::Seq,
    );
    let mut gram = Mat::<f64>::zeros(k, k);
    matmul(
        gram.as_mut(),
        Accum::Replace,
        hu.as_ref().transpose(),
        hu.as_ref(),
        1.0,
        Par::Seq,
    );
    let compressed = SymMatrix::from_faer(compressed.as_ref());
    let gram = SymMatrix::from_faer(gram.as_ref());
    Ok(SpectralPieces {
        lambda_t: eig.value(t),
        lambda_next: eig.value(last + 1),
        h_norm: op_norm(h)?,
        h_compressed: op_norm(&compressed)?,
        h_times_u: max_eigenvalue(&gram)?.max(0.0).sqrt(),
    })
}

/// Upper bound on `λ_t(M+H)` using `h = max |xᵀHx|` over the span of the
/// top `T+1` eigenvectors (0-based `t ≤ T`, and `T + 1 < n`).
///
/// Hypothesis: `λ_t − λ_{T+1} > 2‖H‖ − h`.
pub fn eldridge_bound(
    m: &SymMatrix,
    h: &SymMatrix,
    t: usize,
    big_t: usize,
) -> Result<PerturbationBound, LinalgError> {
    let p = spectral_pieces(m, h, t, big_t, 0)?;
    let gap = p.lambda_t - p.lambda_next;
    if gap <= 2.0 * p.h_norm - p.h_compressed {
        return Ok(PerturbationBound::Inapplicable);
    }
    let denom = gap + p.h_compressed - p.h_norm;
    Ok(PerturbationBound::Bound(
        p.lambda_t + p.h_compressed + p.h_norm * p.h_norm / denom,
    ))
}

/// Sharper estimate of `λ_t(M+H)` that replaces `‖H‖²` in the numerator
/// by `‖H U_{t:T}‖²` and restricts `h` to the span of eigenvectors `t..=T`.
///
/// Hypothesis: `λ_t − λ_{T+1} > ‖H‖ − h − 2‖H U_{t:T}‖`.
///
/// Not a guaranteed upper bound: the `2‖H U_{t:T}‖` in the denominator is not
/// backed by the min-max argument and can push the value below `λ_t(M+H)`,
/// even when [`eldridge_bound`] applies too. [`repaired_bound`] drops it.
pub fn improved_bound(
    m: &SymMatrix,
    h: &SymMatrix,
    t: usize,
    big_t: usize,
) -> Result<PerturbationBound, LinalgError> {
    let p = spectral_pieces(m, h, t, big_t, t)?;
    let gap = p.lambda_t - p.lambda_next;
    if gap <= p.h_norm - p.h_compressed - 2.0 * p.h_times_u {
        return Ok(PerturbationBound::Inapplicable);
    }
    let denom = gap - p.h_norm + p.h_compressed + 2.0 * p.h_times_u;
    Ok(PerturbationBound::Bound(
        p.lambda_t + p.h_compressed + p.h_times_u * p.h_times_u / denom,
    ))
}

/// `λ_t + h + ‖H U_{t:T}‖² / (λ_t − λ_{T+1} − ‖H‖ + h)` with `h` over the span
/// of eigenvectors `t..=T`, valid when that denominator is positive.
///
/// Min-max over `x = αu + βu⊥` bounds `λ_t(M+H)` by the top eigenvalue of
/// `[[λ_t + h, c], [c, λ_{T+1} + ‖H‖]]` with `c = ‖H U_{t:T}‖`, and this is
/// its first-order upper estimate.
pub fn repaired_bound(
    m: &SymMatrix,
    h: &SymMatrix,
    t: usize,
    big_t: usize,
) -> Result<PerturbationBound, LinalgError> {
    let p = spectral_pieces(m, h, t, big_t, t)?;
    let denom = p.lambda_t - p.lambda_next - p.h_norm + p.h_compressed;
    if denom <= 0.0 {
        return Ok(PerturbationBound::Inapplicable);
    }
    Ok(PerturbationBound::Bound(
        p.lambda_t + p.h_compressed + p.h_times_u * p.h_times_u / denom,
    ))
}

/// Rank-one factor `y = √λ₁ v₁` oriented so that `1ᵀy ≥ 0`, or `None` when the
/// matrix is numerically of rank ≥ 2 (`λ₂ > rel_tol · max(λ₁, 1)`).
pub fn rank_one_factor(m: &SymMatrix, rel_tol: f64) -> Result<Option<Vec<f64>>, LinalgError> {
    let eig = eig_sym(m)?;
    if eig.n() == 0 {
        return Ok(Some(Vec::new()));
    }
    let l1 = eig.value(0);
    if eig.n() > 1 && eig.value(1) > rel_tol * l1.max(1.0) {
        return Ok(None);
    }
    let scale = l1.max(0.0).sqrt();
    let v = eig.vector(0);
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    Ok(Some(v.iter().map(|x| sign * scale * x).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values().len(), 3);
        for v in e.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn all_ones_spectrum_and_top_vector() {
        let e = eig_sym(&SymMatrix::ones(4)).unwrap();
        assert!((e.value(0) - 4.0).abs() < 1e-12);
        for k in 1..4 {
            assert!(e.value(k).abs() < 1e-12);
        }
        for x in e.vector(0) {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 8, 17, 64] {
            let m = random_sym(n, &mut rng);
            let e = eig_sym(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) < 1e-9);
            for w in e.values().windows(2) {
                assert!(w[0] >= w[1]);
            }
            for i in 0..n {
                let mv = m.mat_vec(e.vector(i));
                let res: f64 = mv
                    .iter()
                    .zip(e.vector(i))
                    .map(|(a, b)| (a - e.value(i) * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-8 * (1.0 + e.value(i).abs()));
                for j in 0..n {
                    let d: f64 = e.vector(i).iter().zip(e.vector(j)).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_sym(9, &mut rng);
        let e = eig_sym(&m).unwrap();
        for i in 0..9 {
            let v = e.vector(i);
            let (idx, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bi, bv), (k, x)| if x.abs() > bv { (k, x.abs()) } else { (bi, bv) });
            assert!(v[idx] > 0.0);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = SymMatrix::identity(3);
        m.set(0, 1, f64::NAN);
        assert_eq!(eig_sym(&m).unwrap_err(), LinalgError::NonFinite);
        let mut m = SymMatrix::identity(2);
        m.set(1, 1, f64::INFINITY);
        assert_eq!(eig_sym(&m).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn psd_projection_cases() {
        let d = SymMatrix::diagonal(&[1.0, -2.0]);
        let p = psd_project(&d).unwrap();
        assert!(p.max_abs_diff(&SymMatrix::diagonal(&[1.0, 0.0])) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_sym(6, &mut rng);
        let psd = psd_project(&b).unwrap();
        // idempotent
        assert!(psd_project(&psd).unwrap().max_abs_diff(&psd) < 1e-10);
        assert!(min_eigenvalue(&psd).unwrap() >= -1e-10);
    }

    #[test]
    fn psd_projection_residual_is_obtuse() {
        // ⟨Z, M − Π(M)⟩ ≤ 0 for every PSD Z characterizes the projection
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_sym(6, &mut rng);
        let resid = m.sub(&psd_project(&m).unwrap()).unwrap();
        for _ in 0..100 {
            let g: Vec<f64> = (0..36).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Z = G Gᵀ
            let z = SymMatrix::from_fn(6, |i, j| (0..6).map(|k| g[i * 6 + k] * g[j * 6 + k]).sum());
            assert!(z.inner(&resid) <= 1e-8);
        }
    }

    #[test]
    fn weyl_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_sym(5, &mut rng);
        assert_eq!(weyl_bound(&m, &SymMatrix::zeros(5), 0).unwrap(), 0.0);
        let eps = 0.37;
        let h = SymMatrix::identity(5).scale(eps);
        assert!((weyl_bound(&m, &h, 2).unwrap() - eps).abs() < 1e-14);
        let shifted = eigenvalues_sym(&m.add(&h).unwrap()).unwrap();
        let base = eigenvalues_sym(&m).unwrap();
        for (a, b) in shifted.iter().zip(&base) {
            assert!((a - b - eps).abs() < 1e-12);
        }
        assert!(matches!(
            weyl_bound(&m, &SymMatrix::zeros(4), 0),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            weyl_bound(&m, &h, 5),
            Err(LinalgError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn refined_bounds_reduce_to_eigenvalue_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_sym(6, &mut rng);
        let z = SymMatrix::zeros(6);
        let l = eigenvalues_sym(&m).unwrap();
        for (t, big_t) in [(0, 0), (1, 3), (2, 4)] {
            let e = eldridge_bound(&m, &z, t, big_t).unwrap();
            let i = improved_bound(&m, &z, t, big_t).unwrap();
            // with H = 0 the gap conditions read λ_t − λ_{T+1} > 0
            if l[t] > l[big_t + 1] {
                assert!((e.value().unwrap() - l[t]).abs() < 1e-12);
                assert!((i.value().unwrap() - l[t]).abs() < 1e-12);
                let r = repaired_bound(&m, &z, t, big_t).unwrap();
                assert!((r.value().unwrap() - l[t]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refined_bounds_guard_clause() {
        // tiny gap, large H acting away from the top eigenvector
        let m = SymMatrix::diagonal(&[1.0, 0.9, 0.0]);
        let h = SymMatrix::from_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 5.0],
            vec![0.0, 5.0, 0.0],
        ])
        .unwrap();
        assert_eq!(eldridge_bound(&m, &h, 0, 0).unwrap(), PerturbationBound::Inapplicable);
        assert_eq!(improved_bound(&m, &h, 0, 0).unwrap(), PerturbationBound::Inapplicable);
        assert!(eldridge_bound(&m, &h, 0, 2).is_err());
        assert!(improved_bound(&m, &h, 2, 1).is_err());
    }

    #[test]
    fn improved_estimate_can_undershoot() {
        // both hypotheses hold, yet λ₁(M+H) = 2.25 + √5.3125 ≈ 4.555 > 4 + 2.25/(6 − ‖H‖)
        let m = SymMatrix::diagonal(&[4.0, 0.0]);
        let h = SymMatrix::from_rows(&[vec![0.0, 1.5], vec![1.5, 0.5]]).unwrap();
        let actual = eigenvalues_sym(&m.add(&h).unwrap()).unwrap()[0];
        assert!((actual - (2.25 + 5.3125f64.sqrt())).abs() < 1e-12);
        let e = eldridge_bound(&m, &h, 0, 0).unwrap().value().unwrap();
        let i = improved_bound(&m, &h, 0, 0).unwrap().value().unwrap();
        let r = repaired_bound(&m, &h, 0, 0).unwrap().value().unwrap();
        let h_norm = op_norm(&h).unwrap();
        assert!((i - (4.0 + 2.25 / (7.0 - h_norm))).abs() < 1e-12);
        assert!(actual > i + 0.1);
        assert!(actual <= r && actual <= e);
        assert!((r - (4.0 + 2.25 / (4.0 - h_norm))).abs() < 1e-12);
    }

    #[test]
    fn rank_one_factor_recovers_vector() {
        let y = vec![0.5, 0.7, 0.9, 0.6];
        let f = rank_one_factor(&SymMatrix::outer(&y), 1e-4).unwrap().unwrap();
        for (a, b) in f.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(rank_one_factor(&SymMatrix::identity(3), 1e-4).unwrap().is_none());
    }

    #[test]
    fn submatrix_and_permutation() {
        let m = SymMatrix::from_fn(4, |i, j| (i * 4 + j) as f64 + (j * 4 + i) as f64);
        let s = m.principal_submatrix(&[3, 1]);
        assert_eq!(s.get(0, 0), m.get(3, 3));
        assert_eq!(s.get(0, 1), m.get(3, 1));
        let perm = [2, 0, 3, 1];
        let p = m.permute(&perm);
        assert_eq!(p.get(perm[1], perm[3]), m.get(1, 3));
        assert!(p.is_finite());
    }
}
