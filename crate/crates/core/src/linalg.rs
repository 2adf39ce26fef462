//! Dense complex linear algebra.
//!
//! Everything downstream works with square complex matrices acting on a
//! finite Hilbert space. Rectangular "particle table" spaces `M_{p×q}` are
//! flattened row-major, so `vec(a·v·b) = (a ⊗ bᵀ)·vec(v)`; every module uses
//! this single convention.

use std::ops::{Add, Mul, Neg, Sub};

pub use faer::c64;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Rank and residual thresholds shared by all span computations.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    /// Singular values below `rank * σ_max` are treated as zero.
    pub rank: f64,
    /// HS-norm residual below which a membership or identity is accepted.
    pub residual: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank: 1e-10,
            residual: 1e-9,
        }
    }
}

impl Tolerance {
    /// Single-number constructor used by the JSON formats: `rank = tol`,
    /// `residual = 10·tol`.
    pub fn from_rank(tol: f64) -> Self {
        Self {
            rank: tol,
            residual: 10.0 * tol,
        }
    }
}

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Dense complex matrix.
#[derive(Clone, Debug)]
pub struct ComplexMatrix {
    inner: Mat<c64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: Mat::identity(n, n),
        }
    }

    pub fn scalar(n: usize, z: c64) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { z } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[c64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "from_row_major",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| c64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[c64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// Matrix unit `e_ij` (zero-based indices) in `M_n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        Self::unit_rect(n, n, i, j)
    }

    pub fn unit_rect(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        Self::from_fn(rows, cols, |a, b| if a == i && b == j { ONE } else { ZERO })
    }

    pub fn from_mat(inner: Mat<c64>) -> Self {
        Self { inner }
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.inner.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: c64) {
        self.inner[(i, j)] = z;
    }

    pub fn entries_row_major(&self) -> Vec<c64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Writes `vec(self)` (row-major) into `out`.
    pub(crate) fn write_vec(&self, out: &mut [c64]) {
        let c = self.cols();
        for i in 0..self.rows() {
            for j in 0..c {
                out[i * c + j] = self.inner[(i, j)];
            }
        }
    }

    pub(crate) fn from_vec(rows: usize, cols: usize, v: &[c64]) -> Self {
        Self::from_fn(rows, cols, |i, j| v[i * cols + j])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.conjugate().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose().to_owned(),
        }
    }

    pub fn scale(&self, z: c64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| z * self.inner[(i, j)])
    }

    pub fn scale_real(&self, t: f64) -> Self {
        self.scale(c64::new(t, 0.0))
    }

    pub fn trace(&self) -> c64 {
        (0..self.rows().min(self.cols()))
            .map(|i| self.inner[(i, i)])
            .fold(ZERO, |a, b| a + b)
    }

    /// Hilbert–Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    /// `[a, b] = ab − ba`
    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// `{a, b} = ab + ba`
    pub fn anticommutator(a: &Self, b: &Self) -> Self {
        &(a * b) + &(b * a)
    }

    /// Kronecker product, `(a ⊗ b)[(i,k),(j,l)] = a[i,j]·b[k,l]`.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let (br, bc) = (b.rows(), b.cols());
        Self::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
            a.inner[(r / br, c / bc)] * b.inner[(r % br, c % bc)]
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[&Self]) -> Self {
        let rows: usize = blocks.iter().map(|b| b.rows()).sum();
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    out.inner[(r0 + i, c0 + j)] = b.inner[(i, j)];
                }
            }
            r0 += b.rows();
            c0 += b.cols();
        }
        out
    }

    /// HS distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).hs_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.distance(&self.adjoint()) <= tol
    }
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (0..self.rows())
                .all(|i| (0..self.cols()).all(|j| self.inner[(i, j)] == other.inner[(i, j)]))
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Materializes `v ↦ left·v·right` on row-major `p×q` matrices as a
/// `pq×pq` matrix, i.e. `left ⊗ rightᵀ`.
pub fn embed_left_right(left: &ComplexMatrix, right: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !left.is_square() {
        return Err(Error::NotSquare {
            context: "embed_left_right (left factor)",
            rows: left.rows(),
            cols: left.cols(),
        });
    }
    if !right.is_square() {
        return Err(Error::NotSquare {
            context: "embed_left_right (right factor)",
            rows: right.rows(),
            cols: right.cols(),
        });
    }
    Ok(ComplexMatrix::kron(left, &right.transpose()))
}

/// `tr(X†·Y)`.
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<c64> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            context: "hs_inner",
            expected: format!("{}x{}", x.rows(), x.cols()),
            found: format!("{}x{}", y.rows(), y.cols()),
        });
    }
    let mut acc = ZERO;
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            acc += x.inner[(i, j)].conj() * y.inner[(i, j)];
        }
    }
    Ok(acc)
}

/// HS-orthonormal basis of the complex span of `vectors`, by SVD of the
/// stacked coefficient matrix. The output size is the numerical rank at
/// threshold `tol·σ_max`.
pub fn orthonormalize(vectors: &[ComplexMatrix], tol: f64) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let (r, c) = (first.rows(), first.cols());
    if let Some(bad) = vectors.iter().find(|v| v.rows() != r || v.cols() != c) {
        return Err(Error::DimensionMismatch {
            context: "orthonormalize",
            expected: format!("{r}x{c}"),
            found: format!("{}x{}", bad.rows(), bad.cols()),
        });
    }
    let stacked = stack_columns(vectors);
    let range = range_basis(stacked.as_ref(), tol, 0.0)?;
    Ok((0..range.ncols())
        .map(|k| ComplexMatrix::from_vec(r, c, range.col_as_slice(k)))
        .collect())
}

/// Stacks `vec(v_k)` as the columns of a `rows·cols × k` matrix.
pub(crate) fn stack_columns(vectors: &[ComplexMatrix]) -> Mat<c64> {
    let len = vectors.first().map_or(0, |v| v.rows() * v.cols());
    let mut out = Mat::<c64>::zeros(len, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        v.write_vec(out.col_as_slice_mut(k));
    }
    out
}

fn svd_err(e: impl std::fmt::Debug) -> Error {
    Error::Decomposition(format!("{e:?}"))
}

/// Orthonormal basis of the column range of `a`, keeping singular values
/// `σ > tol·max(σ_max, floor)`.
pub(crate) fn range_basis(a: MatRef<'_, c64>, tol: f64, floor: f64) -> Result<Mat<c64>> {
    let (m, k) = a.shape();
    if m == 0 || k == 0 {
        return Ok(Mat::zeros(m, 0));
    }
    let svd = a.thin_svd().map_err(svd_err)?;
    let s = svd.S().column_vector();
    let smax = s[0].re.max(floor);
    if smax == 0.0 {
        return Ok(Mat::zeros(m, 0));
    }
    let rank = (0..s.nrows()).take_while(|&i| s[i].re > tol * smax).count();
    Ok(svd.U().subcols(0, rank).to_owned())
}

/// Orthonormal basis of the nullspace of `a` (as columns), treating
/// singular values `σ ≤ tol·max(σ_max, floor)` as zero.
pub(crate) fn null_basis(a: MatRef<'_, c64>, tol: f64, floor: f64) -> Result<Mat<c64>> {
    let (m, k) = a.shape();
    if k == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if m == 0 {
        return Ok(Mat::identity(k, k));
    }
    // tall inputs share singular values and right vectors with their R factor
    let svd = if m > k {
        let r = a.qr().thin_R().to_owned();
        r.svd().map_err(svd_err)?
    } else {
        a.svd().map_err(svd_err)?
    };
    let s = svd.S().column_vector();
    let smax = s[0].re.max(floor);
    let rank = if smax == 0.0 {
        0
    } else {
        (0..s.nrows()).take_while(|&i| s[i].re > tol * smax).count()
    };
    Ok(svd.V().subcols(rank, k - rank).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    /// Applies `v ↦ l·v·r` directly, no Kronecker form.
    fn direct(l: &ComplexMatrix, r: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
        &(l * v) * r
    }

    fn apply_vec(n: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
        let x = ComplexMatrix::from_row_major(v.rows() * v.cols(), 1, &v.entries_row_major()).unwrap();
        let y = n * &x;
        ComplexMatrix::from_row_major(v.rows(), v.cols(), &y.entries_row_major()).unwrap()
    }

    #[test]
    fn embed_identity_is_identity() {
        let e = embed_left_right(&ComplexMatrix::identity(3), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(6));
    }

    #[test]
    fn embed_projects_first_row() {
        let e = embed_left_right(&ComplexMatrix::unit(2, 0, 0), &ComplexMatrix::identity(2)).unwrap();
        let v = ComplexMatrix::from_row_major(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]).unwrap();
        let out = apply_vec(&e, &v);
        let want = ComplexMatrix::from_row_major(2, 2, &[c(1., 0.), c(2., 0.), ZERO, ZERO]).unwrap();
        assert_eq!(out, want);
    }

    #[test]
    fn embed_matches_direct_left_right_action_on_matrix_units() {
        let (p, q) = (3, 2);
        let l = pseudo_random(p, p, 1);
        let r = pseudo_random(q, q, 2);
        let e = embed_left_right(&l, &r).unwrap();
        for i in 0..p {
            for j in 0..q {
                let v = ComplexMatrix::unit_rect(p, q, i, j);
                assert!(apply_vec(&e, &v).distance(&direct(&l, &r, &v)) < 1e-13);
            }
        }
    }

    #[test]
    fn embed_composition_law() {
        let (a, c_) = (pseudo_random(3, 3, 3), pseudo_random(3, 3, 4));
        let (b, d) = (pseudo_random(2, 2, 5), pseudo_random(2, 2, 6));
        let lhs = &embed_left_right(&a, &b).unwrap() * &embed_left_right(&c_, &d).unwrap();
        // oracle: v ↦ A(C v D)B evaluated on every matrix unit
        for i in 0..3 {
            for j in 0..2 {
                let v = ComplexMatrix::unit_rect(3, 2, i, j);
                let want = direct(&a, &b, &direct(&c_, &d, &v));
                assert!(apply_vec(&lhs, &v).distance(&want) < 1e-12);
            }
        }
        let rhs = embed_left_right(&(&a * &c_), &(&d * &b)).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn embed_rejects_non_square() {
        let err = embed_left_right(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::identity(2));
        assert!(matches!(err, Err(Error::NotSquare { .. })));
    }

    #[test]
    fn hs_inner_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(hs_inner(&i3, &i3).unwrap(), c(3.0, 0.0));
        let e12 = ComplexMatrix::unit(2, 0, 1);
        let e21 = ComplexMatrix::unit(2, 1, 0);
        assert_eq!(hs_inner(&e12, &e12).unwrap(), ONE);
        assert_eq!(hs_inner(&e12, &e21).unwrap(), ZERO);
        let (x, y) = (pseudo_random(4, 4, 7), pseudo_random(4, 4, 8));
        let d = hs_inner(&x, &y).unwrap() - hs_inner(&y, &x).unwrap().conj();
        assert!(d.norm() < 1e-14);
        assert!(hs_inner(&x, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn orthonormalize_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(orthonormalize(&[i2.clone(), i2.scale_real(2.0)], 1e-10).unwrap().len(), 1);
        let e11 = ComplexMatrix::unit(2, 0, 0);
        let e22 = ComplexMatrix::unit(2, 1, 1);
        assert_eq!(orthonormalize(&[e11.clone(), e22.clone(), &e11 + &e22], 1e-10).unwrap().len(), 2);

        let sx = ComplexMatrix::from_row_major(2, 2, &[ZERO, ONE, ONE, ZERO]).unwrap();
        let sy = ComplexMatrix::from_row_major(2, 2, &[ZERO, c(0., -1.), c(0., 1.), ZERO]).unwrap();
        let basis = orthonormalize(&[sx, sy], 1e-10).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(hs_inner(&basis[0], &basis[1]).unwrap().norm() < 1e-12);
        for b in &basis {
            assert!((b.hs_norm() - 1.0).abs() < 1e-12);
        }
        assert!(orthonormalize(&[], 1e-10).unwrap().is_empty());
    }

    #[test]
    fn adjoint_is_involutive_exactly() {
        let m = pseudo_random(3, 5, 9);
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn null_basis_of_rank_deficient_matrix() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let n = null_basis(a.as_mat(), 1e-10, 0.0).unwrap();
        assert_eq!(n.ncols(), 2);
        let prod = a.as_mat() * &n;
        assert!(prod.norm_l2() < 1e-12);
    }
}
