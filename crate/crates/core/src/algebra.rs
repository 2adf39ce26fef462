//! Operator spaces and *-algebra arithmetic.
//!
//! An [`OperatorSpace`] is a complex-linear subspace of `M_n`, stored as an
//! HS-orthonormal basis. Generated algebras, commutants, intersections and
//! sums all return new spaces; nothing is mutated after construction.
//!
//! Real *-algebras are handled through their complex span: a real algebra and
//! its complexification have the same commutant, so only complex spans are
//! ever manipulated here.

use std::ops::Range;

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c64, null_basis, range_basis, stack_columns, ComplexMatrix, Tolerance, ZERO};

/// Columns processed per SVD when extending a basis.
const EXTEND_CHUNK: usize = 256;

/// Seed for the generic hermitian elements used to pre-reduce commutants.
const FRAME_SEED: u64 = 0x5eed_c0de;

/// Relative eigenvalue gap below which two eigenvalues are merged into one
/// cluster. Merging only enlarges the candidate space.
const CLUSTER_GAP: f64 = 1e-7;
/// Draws of the frame element before settling for the best separated one.
const FRAME_TRIES: usize = 6;
/// Relative eigenvalue gap at which a draw is accepted at once.
const WELL_SEPARATED: f64 = 1e-3;

/// Entries per constraint block; larger constraints are imposed in row chunks.
const CONSTRAINT_BUDGET: usize = 1 << 23;

/// HS-orthonormal basis of a complex subspace of `M_n`.
#[derive(Clone, Debug)]
pub struct OperatorSpace {
    n: usize,
    // n² × dim, column k = row-major vec of basis element k
    basis: Mat<c64>,
    tol: Tolerance,
}

impl OperatorSpace {
    pub fn zero(n: usize, tol: Tolerance) -> Self {
        Self {
            n,
            basis: Mat::zeros(n * n, 0),
            tol,
        }
    }

    /// All of `M_n`, spanned by matrix units.
    pub fn full(n: usize, tol: Tolerance) -> Self {
        Self {
            n,
            basis: Mat::identity(n * n, n * n),
            tol,
        }
    }

    pub fn scalars(n: usize, tol: Tolerance) -> Self {
        let id = ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt());
        Self {
            n,
            basis: stack_columns(&[id]),
            tol,
        }
    }

    /// Complex span of `elements`.
    pub fn span(n: usize, elements: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        check_members(n, elements, "OperatorSpace::span")?;
        Self::zero(n, tol).extend(elements)
    }

    /// Wraps columns that are already HS-orthonormal.
    pub(crate) fn from_orthonormal_columns(n: usize, basis: Mat<c64>, tol: Tolerance) -> Self {
        debug_assert_eq!(basis.nrows(), n * n);
        Self { n, basis, tol }
    }

    /// Builds a space from a basis that is claimed orthonormal (e.g. read
    /// back from JSON). The claim is checked and the basis re-orthonormalized
    /// if it fails.
    pub fn from_basis(n: usize, basis: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        check_members(n, basis, "OperatorSpace::from_basis")?;
        let cols = stack_columns(basis);
        let gram = cols.adjoint() * &cols;
        let k = basis.len();
        let dev = (&gram - Mat::<c64>::identity(k, k)).norm_max();
        if dev <= tol.rank.max(1e-12) {
            Ok(Self::from_orthonormal_columns(n, cols, tol))
        } else {
            Self::span(n, basis, tol)
        }
    }

    /// Ambient Hilbert space dimension.
    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub(crate) fn columns(&self) -> MatRef<'_, c64> {
        self.basis.as_ref()
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.n, self.n, self.basis.col_as_slice(k))
    }

    pub fn elements(&self) -> Vec<ComplexMatrix> {
        (0..self.dim()).map(|k| self.element(k)).collect()
    }

    /// Orthogonal projection of `x` onto the space.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = stack_columns(std::slice::from_ref(x));
        let coeffs = self.basis.adjoint() * &v;
        let p = &self.basis * &coeffs;
        ComplexMatrix::from_vec(self.n, self.n, p.col_as_slice(0))
    }

    /// HS norm of `x` minus its projection.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        x.distance(&self.project(x))
    }

    /// Membership test. The residual is absolute; the verdict compares it
    /// against `tol.residual · max(1, ‖x‖)`.
    pub fn contains(&self, x: &ComplexMatrix) -> Result<(bool, f64)> {
        self.check_ambient(x.rows(), "contains")?;
        let r = self.residual(x);
        Ok((r <= self.tol.residual * x.hs_norm().max(1.0), r))
    }

    /// Residual of every basis element of `other` against `self`, computed
    /// in one projection.
    fn residuals_of(&self, other: &OperatorSpace) -> Vec<f64> {
        if other.dim() == 0 {
            return Vec::new();
        }
        let mut r = other.basis.clone();
        if self.dim() > 0 {
            let coeffs = self.basis.adjoint() * &other.basis;
            r -= &self.basis * &coeffs;
        }
        (0..r.ncols()).map(|k| r.col(k).norm_l2()).collect()
    }

    /// Max residual of `other`'s basis against `self`; `other ⊆ self` iff it
    /// is within tolerance.
    pub fn contains_space(&self, other: &OperatorSpace) -> Result<(bool, f64)> {
        self.check_ambient(other.n, "contains_space")?;
        let r = self.residuals_of(other).into_iter().fold(0.0, f64::max);
        Ok((r <= self.tol.residual, r))
    }

    /// The basis element of `other` farthest from `self` (first index wins
    /// ties), together with its distance.
    pub fn farthest_element(&self, other: &OperatorSpace) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, r) in self.residuals_of(other).into_iter().enumerate() {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((k, r));
            }
        }
        best
    }

    /// `span(self ∪ candidates)`.
    pub fn extend(&self, candidates: &[ComplexMatrix]) -> Result<Self> {
        check_members(self.n, candidates, "OperatorSpace::extend")?;
        let norms: Vec<f64> = candidates.iter().map(ComplexMatrix::hs_norm).collect();
        let scale = norms.iter().fold(0.0f64, |a, &b| a.max(b));
        // large candidates first, so small ones meet a basis that already
        // holds their directions
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
        let sorted: Vec<ComplexMatrix> = order.iter().map(|&k| candidates[k].clone()).collect();
        let mut basis = self.basis.clone();
        for chunk in sorted.chunks(EXTEND_CHUNK) {
            let block = stack_columns(chunk);
            basis = extend_columns(basis, block.as_ref(), self.tol.rank, scale)?;
        }
        Ok(Self {
            n: self.n,
            basis,
            tol: self.tol,
        })
    }

    /// Like [`extend`](Self::extend) on raw columns; columns of norm at most
    /// `tol.rank · scale` are treated as zero.
    pub(crate) fn extend_from_columns(&self, block: MatRef<'_, c64>, scale: f64) -> Result<Self> {
        let mut basis = self.basis.clone();
        let mut start = 0;
        while start < block.ncols() {
            let len = EXTEND_CHUNK.min(block.ncols() - start);
            basis = extend_columns(basis, block.subcols(start, len), self.tol.rank, scale)?;
            start += len;
        }
        Ok(Self {
            n: self.n,
            basis,
            tol: self.tol,
        })
    }

    /// Image under an HS-isometric linear map (e.g. unitary conjugation).
    /// Orthonormality is preserved, so no re-orthonormalization happens.
    pub fn map_isometric(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let images: Vec<ComplexMatrix> = self.elements().iter().map(f).collect();
        Self {
            n: self.n,
            basis: stack_columns(&images),
            tol: self.tol,
        }
    }

    /// Image under an arbitrary map, re-orthonormalized.
    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        let images: Vec<ComplexMatrix> = self.elements().iter().map(f).collect();
        Self::span(self.n, &images, self.tol)
    }

    /// Whether `X ∈ S ⇒ X† ∈ S` within tolerance.
    pub fn is_star_closed(&self) -> bool {
        let adj = self.map_isometric(ComplexMatrix::adjoint);
        self.residuals_of(&adj)
            .into_iter()
            .all(|r| r <= self.tol.residual)
    }

    fn check_ambient(&self, n: usize, context: &'static str) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch {
                context,
                expected: format!("ambient {}", self.n),
                found: format!("ambient {n}"),
            });
        }
        Ok(())
    }
}

fn check_members(n: usize, elements: &[ComplexMatrix], context: &'static str) -> Result<()> {
    for e in elements {
        if e.rows() != n || e.cols() != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", e.rows(), e.cols()),
            });
        }
    }
    Ok(())
}

/// Appends to the orthonormal columns `q` an orthonormal basis of the part of
/// `block`'s span orthogonal to them. Thresholds are absolute: a column, or
/// its remainder after projecting out `q` twice, of norm at most `tol·scale`
/// counts as zero, and the remainders are orthonormalized by SVD with the
/// same floor. Normalizing small columns first would amplify their roundoff
/// into spurious directions.
fn extend_columns(q: Mat<c64>, block: MatRef<'_, c64>, tol: f64, scale: f64) -> Result<Mat<c64>> {
    let len = q.nrows();
    let floor = tol * scale;
    let kept: Vec<usize> = (0..block.ncols()).filter(|&k| block.col(k).norm_l2() > floor).collect();
    if kept.is_empty() {
        return Ok(q);
    }
    let mut p = Mat::<c64>::from_fn(len, kept.len(), |i, j| block[(i, kept[j])]);
    if q.ncols() > 0 {
        for _ in 0..2 {
            let coeffs = q.adjoint() * &p;
            p -= &q * &coeffs;
        }
    }
    let live: Vec<usize> = (0..p.ncols()).filter(|&k| p.col(k).norm_l2() > floor).collect();
    if live.is_empty() {
        return Ok(q);
    }
    let p = Mat::<c64>::from_fn(len, live.len(), |i, j| p[(i, live[j])]);
    let mut fresh = range_basis(p.as_ref(), tol, scale)?;
    if q.ncols() > 0 {
        let coeffs = q.adjoint() * &fresh;
        fresh -= &q * &coeffs;
        for k in 0..fresh.ncols() {
            let nrm = fresh.col(k).norm_l2();
            let mut col = fresh.col_mut(k);
            col *= faer::Scale(c64::new(1.0 / nrm, 0.0));
        }
    }
    let mut out = Mat::<c64>::zeros(len, q.ncols() + fresh.ncols());
    out.subcols_mut(0, q.ncols()).copy_from(&q);
    out.subcols_mut(q.ncols(), fresh.ncols()).copy_from(&fresh);
    Ok(out)
}

/// Complex *-algebra generated by `generators`: the span of all words in the
/// generators and their adjoints. The identity is only present if some word
/// produces it.
///
/// Computed as `P·S''` where `S = span(G ∪ G†)` and `P` is the projection onto
/// the joint range of the generators, i.e. the unit of the generated algebra.
/// The result is checked to be closed under multiplication by `S`.
pub fn generate_algebra(n: usize, generators: &[ComplexMatrix], tol: Tolerance) -> Result<OperatorSpace> {
    for g in generators {
        if !g.is_square() {
            return Err(Error::NotSquare {
                context: "generate_algebra",
                rows: g.rows(),
                cols: g.cols(),
            });
        }
    }
    check_members(n, generators, "generate_algebra")?;
    let mut seed: Vec<ComplexMatrix> = generators.to_vec();
    seed.extend(generators.iter().map(ComplexMatrix::adjoint));
    let base = OperatorSpace::span(n, &seed, tol)?;
    if base.dim() == 0 {
        return Ok(base);
    }
    // S + S·S generates the same algebra; its generic elements have far
    // fewer repeated eigenvalues, which keeps commutant frames small
    let elems = base.elements();
    let products: Vec<ComplexMatrix> = elems.iter().flat_map(|a| elems.iter().map(move |b| a * b)).collect();
    let quadratic = base.extend(&products)?;
    let unital = commutant(&commutant(&quadratic)?)?;
    let p = support_projection(&base)?;
    let algebra = match p {
        None => unital,
        Some(p) => unital.map(|x| x * &p)?,
    };

    // a generic element detects any basis element with a·b ∉ algebra
    let mut rng = ChaCha8Rng::seed_from_u64(FRAME_SEED ^ 1);
    let mut x = ComplexMatrix::zeros(n, n);
    for a in algebra.elements() {
        let z = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        x = &x + &a.scale(z);
    }
    let xn = x.hs_norm().max(f64::MIN_POSITIVE);
    let worst = base
        .elements()
        .iter()
        .flat_map(|b| [&x * b, b * &x])
        .map(|y| algebra.residual(&y) / xn)
        .fold(0.0, f64::max);
    if worst > tol.residual || algebra.dim() > n * n {
        return Err(Error::ClosureFailure(format!(
            "dimension {}, product residual {worst:.3e} exceeds {:.1e}",
            algebra.dim(),
            tol.residual
        )));
    }
    Ok(algebra)
}

/// Projection onto the joint range of the basis elements and their
/// adjoints, or `None` if that range is everything.
fn support_projection(base: &OperatorSpace) -> Result<Option<ComplexMatrix>> {
    let n = base.ambient();
    let mut m = ComplexMatrix::zeros(n, n);
    for b in base.elements() {
        m = &(&m + &(&b * &b.adjoint())) + &(&b.adjoint() * &b);
    }
    let evd = m
        .as_mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let vals = evd.S().column_vector();
    let top = (0..n).map(|i| vals[i].re).fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i].re > base.tol().rank * top).collect();
    if keep.len() == n {
        return Ok(None);
    }
    let u = evd.U();
    Ok(Some(ComplexMatrix::from_fn(n, n, |i, j| {
        keep.iter().map(|&k| u[(i, k)] * u[(j, k)].conj()).sum()
    })))
}

/// Breadth-first word closure: each round multiplies the newly found basis
/// directions on the right by the span of the generators and their adjoints,
/// until no new direction appears.
///
/// Rank decisions on words degrade when generators have spread-out spectra
/// (powers of an ill-conditioned matrix), so [`generate_algebra`] does not use
/// this; it serves as an independent check on small inputs.
pub fn word_closure(n: usize, generators: &[ComplexMatrix], tol: Tolerance) -> Result<OperatorSpace> {
    for g in generators {
        if !g.is_square() {
            return Err(Error::NotSquare {
                context: "word_closure",
                rows: g.rows(),
                cols: g.cols(),
            });
        }
    }
    check_members(n, generators, "word_closure")?;
    let mut seed: Vec<ComplexMatrix> = generators.to_vec();
    seed.extend(generators.iter().map(ComplexMatrix::adjoint));
    let base = OperatorSpace::span(n, &seed, tol)?;
    let base_elems = base.elements();
    let mut space = base.clone();
    let mut frontier: Vec<ComplexMatrix> = base_elems.clone();
    let max_rounds = n * n + 1;
    for _round in 0..max_rounds {
        if frontier.is_empty() {
            return Ok(space);
        }
        let before = space.dim();
        // products of unit-norm elements have norm at most 1
        let mut products = Mat::<c64>::zeros(n * n, EXTEND_CHUNK);
        let mut filled = 0;
        for f in &frontier {
            for g in &base_elems {
                (f * g).write_vec(products.col_as_slice_mut(filled));
                filled += 1;
                if filled == EXTEND_CHUNK {
                    space = space.extend_from_columns(products.as_ref(), 1.0)?;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            space = space.extend_from_columns(products.subcols(0, filled), 1.0)?;
        }
        if space.dim() > n * n {
            return Err(Error::ClosureFailure(format!(
                "dimension {} exceeds n² = {}; rank tolerance {:e} is too loose",
                space.dim(),
                n * n,
                tol.rank
            )));
        }
        frontier = (before..space.dim()).map(|k| space.element(k)).collect();
    }
    Err(Error::ClosureFailure(format!(
        "no fixed point after {max_rounds} rounds (dimension {})",
        space.dim()
    )))
}

/// Commutant `{X : [X, b] = 0 for all b ∈ S}`.
///
/// For *-closed `S` the search starts inside the commutant of a generic
/// hermitian element `H ∈ S`, i.e. block-diagonal matrices in an eigenbasis of
/// `H`. The remaining constraints (a second generic element, then every basis
/// element of `S`) are imposed one at a time as nullspaces of `X ↦ [X, b]`
/// restricted to the current candidates, so each SVD only sees the surviving
/// candidate set.
pub fn commutant(space: &OperatorSpace) -> Result<OperatorSpace> {
    let n = space.ambient();
    let tol = space.tol();
    if space.dim() == 0 {
        return Ok(OperatorSpace::full(n, tol));
    }
    let elems = space.elements();
    let frame = if space.is_star_closed() {
        Frame::spectral(&elems)?
    } else {
        Frame::trivial(n)
    };

    let mut constraints: Vec<ComplexMatrix> = Vec::with_capacity(elems.len() + 1);
    if let Some(h2) = &frame.probe {
        constraints.push(h2.clone());
    }
    constraints.extend(elems.iter().map(|b| frame.to_frame(b)));

    let r = frame.params.len();
    // Transposed coefficients: row j = candidate j, column p = parameter p.
    let mut coeff_t: Mat<c64> = Mat::identity(r, r);
    for b in &constraints {
        if coeff_t.nrows() == 0 {
            break;
        }
        let mut start = 0;
        while start < n * n && coeff_t.nrows() > 0 {
            let len = (CONSTRAINT_BUDGET / coeff_t.nrows()).clamp(1, n * n - start);
            let k = frame.constraint_matrix(b, coeff_t.as_ref(), start..start + len);
            start += len;
            let worst = (0..k.ncols()).map(|j| k.col(j).norm_l2()).fold(0.0, f64::max);
            if worst <= tol.residual * 1e-2 {
                continue;
            }
            let null = null_basis(k.as_ref(), tol.rank, 1.0)?;
            // new candidates = old candidates · null
            coeff_t = null.transpose() * &coeff_t;
        }
    }

    let basis = frame.materialize(coeff_t.as_ref());
    Ok(OperatorSpace::from_orthonormal_columns(n, basis, tol))
}

/// `S ∩ T`: vectors `Q_T y` whose component orthogonal to `S` vanishes,
/// from the nullspace of `(1 − P_S)·Q_T`.
pub fn intersect(s: &OperatorSpace, t: &OperatorSpace) -> Result<OperatorSpace> {
    if s.ambient() != t.ambient() {
        return Err(Error::DimensionMismatch {
            context: "intersect",
            expected: format!("ambient {}", s.ambient()),
            found: format!("ambient {}", t.ambient()),
        });
    }
    let n = s.ambient();
    let tol = s.tol();
    if s.dim() == 0 || t.dim() == 0 {
        return Ok(OperatorSpace::zero(n, tol));
    }
    let qs = s.columns();
    let qt = t.columns();
    let coeffs = qs.adjoint() * qt;
    let m = qt - qs * &coeffs;
    let null = null_basis(m.as_ref(), tol.rank, 1.0)?;
    let basis = qt * &null;
    // Q_T·y with orthonormal y is already orthonormal.
    Ok(OperatorSpace::from_orthonormal_columns(n, basis, tol))
}

/// `S + T`.
pub fn sum_spaces(s: &OperatorSpace, t: &OperatorSpace) -> Result<OperatorSpace> {
    if s.ambient() != t.ambient() {
        return Err(Error::DimensionMismatch {
            context: "sum_spaces",
            expected: format!("ambient {}", s.ambient()),
            found: format!("ambient {}", t.ambient()),
        });
    }
    s.extend_from_columns(t.columns(), 1.0)
}

/// Mutual containment; the residual is the worse of the two directions.
pub fn equal_spaces(s: &OperatorSpace, t: &OperatorSpace) -> Result<(bool, f64)> {
    let (a, ra) = s.contains_space(t)?;
    let (b, rb) = t.contains_space(s)?;
    Ok((a && b && s.dim() == t.dim(), ra.max(rb)))
}

pub fn contains(s: &OperatorSpace, x: &ComplexMatrix) -> Result<(bool, f64)> {
    s.contains(x)
}

/// `S ∩ S'`.
pub fn center(s: &OperatorSpace) -> Result<OperatorSpace> {
    intersect(s, &commutant(s)?)
}

/// Coordinates in which commutant candidates are parameterized: `X = V·Y·V†`
/// with `Y` block-diagonal over eigenvalue clusters of a generic hermitian
/// element of the space.
struct Frame {
    n: usize,
    v: Option<Mat<c64>>,
    // (row, col) of each free entry of Y
    params: Vec<(usize, usize)>,
    probe: Option<ComplexMatrix>,
}

impl Frame {
    fn trivial(n: usize) -> Self {
        let params = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        Self {
            n,
            v: None,
            params,
            probe: None,
        }
    }

    fn spectral(elems: &[ComplexMatrix]) -> Result<Self> {
        let n = elems[0].rows();
        let mut rng = ChaCha8Rng::seed_from_u64(FRAME_SEED);
        // eigenvectors are accurate to roughly ε/gap, so keep the draw whose
        // distinct eigenvalues are best separated
        let mut best: Option<(f64, Mat<c64>, Vec<(usize, usize)>)> = None;
        for _ in 0..FRAME_TRIES {
            let h = generic_hermitian(elems, &mut rng);
            let evd = h
                .as_mat()
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
            let vals: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i].re).collect();
            let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
            let mut clusters: Vec<(usize, usize)> = Vec::new();
            let mut start = 0;
            let mut min_gap = f64::INFINITY;
            for i in 1..=n {
                if i == n {
                    clusters.push((start, i));
                } else if vals[i] - vals[i - 1] > CLUSTER_GAP * scale {
                    min_gap = min_gap.min((vals[i] - vals[i - 1]) / scale);
                    clusters.push((start, i));
                    start = i;
                }
            }
            if best.as_ref().is_none_or(|b| min_gap > b.0) {
                best = Some((min_gap, evd.U().to_owned(), clusters));
            }
            if min_gap >= WELL_SEPARATED {
                break;
            }
        }
        let (_, v, clusters) = best.expect("at least one draw");
        let h2 = generic_hermitian(elems, &mut rng);
        let mut params = Vec::new();
        for &(a, b) in &clusters {
            for i in a..b {
                for j in a..b {
                    params.push((i, j));
                }
            }
        }
        let mut frame = Self {
            n,
            v: Some(v),
            params,
            probe: None,
        };
        frame.probe = Some(frame.to_frame(&h2));
        Ok(frame)
    }

    fn to_frame(&self, b: &ComplexMatrix) -> ComplexMatrix {
        match &self.v {
            None => b.clone(),
            Some(v) => ComplexMatrix::from_mat(v.adjoint() * b.as_mat() * v),
        }
    }

    /// Rows `rows` of `vec([Y_j, b])` for every candidate
    /// `Y_j = Σ_p coeff_t[j,p]·E_p`, one column per candidate. Rows that vanish
    /// identically for all candidates are dropped; they do not affect the
    /// nullspace.
    fn constraint_matrix(&self, b: &ComplexMatrix, coeff_t: MatRef<'_, c64>, rows: Range<usize>) -> Mat<c64> {
        let n = self.n;
        let cands = coeff_t.nrows();
        let off = rows.start;
        // kt[:, row - off] accumulates over parameters
        let mut kt = Mat::<c64>::zeros(cands, rows.len());
        let bm = b.as_mat();
        let mut cp = vec![ZERO; cands];
        for (p, &(s, t)) in self.params.iter().enumerate() {
            for (dst, z) in cp.iter_mut().zip(coeff_t.col(p).iter()) {
                *dst = *z;
            }
            if cp.iter().all(|z| *z == ZERO) {
                continue;
            }
            // E_st·b puts row t of b into row s
            for l in 0..n {
                let w = bm[(t, l)];
                if w != ZERO && rows.contains(&(s * n + l)) {
                    for (d, &c) in kt.col_as_slice_mut(s * n + l - off).iter_mut().zip(&cp) {
                        *d += w * c;
                    }
                }
            }
            // b·E_st puts column s of b into column t
            for i in 0..n {
                let w = bm[(i, s)];
                if w != ZERO && rows.contains(&(i * n + t)) {
                    for (d, &c) in kt.col_as_slice_mut(i * n + t - off).iter_mut().zip(&cp) {
                        *d -= w * c;
                    }
                }
            }
        }
        let norms: Vec<f64> = (0..rows.len()).map(|c| kt.col(c).norm_l2()).collect();
        let top = norms.iter().fold(0.0f64, |a, &b| a.max(b));
        let keep: Vec<usize> = (0..rows.len()).filter(|&c| norms[c] > 1e-15 * top).collect();
        Mat::from_fn(keep.len(), cands, |i, j| kt[(j, keep[i])])
    }

    /// Turns candidate coefficients into orthonormal `vec(X)` columns.
    fn materialize(&self, coeff_t: MatRef<'_, c64>) -> Mat<c64> {
        let n = self.n;
        let mut out = Mat::<c64>::zeros(n * n, coeff_t.nrows());
        for j in 0..coeff_t.nrows() {
            let mut y = Mat::<c64>::zeros(n, n);
            for (p, &(s, t)) in self.params.iter().enumerate() {
                y[(s, t)] = coeff_t[(j, p)];
            }
            let x = match &self.v {
                None => y,
                Some(v) => v * &y * v.adjoint(),
            };
            ComplexMatrix::from_mat(x).write_vec(out.col_as_slice_mut(j));
        }
        out
    }
}

fn generic_hermitian(elems: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let n = elems[0].rows();
    let mut h = ComplexMatrix::zeros(n, n);
    for b in elems {
        let bd = b.adjoint();
        let sym = &(b + &bd);
        let anti = (b - &bd).scale(c64::new(0.0, 1.0));
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        h = &(&h + &sym.scale_real(x)) + &anti.scale_real(y);
    }
    // exact hermitian symmetrization
    let hd = h.adjoint();
    (&h + &hd).scale_real(0.5)
}
