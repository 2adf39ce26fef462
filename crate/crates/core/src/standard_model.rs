//! The internal Standard Model triple on `H = C^{8×4} ⊗ C^N` and the
//! one-generation commutant and Hodge analysis.
//!
//! Basis index of particle-table slot `(row, col)` in generation `g` is
//! `(row·4 + col)·N + g`. Rows 0..4 are particles `ν_R, e_R, ν_L, e_L` (and
//! their quark partners in columns 1..4); rows 4..8 are antiparticles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{commutant, equal_spaces, intersect, sum_spaces, OperatorSpace};
use crate::error::{Error, Result};
use crate::linalg::{c64, embed_left_right, ComplexMatrix, Tolerance, ONE, ZERO};
use crate::spectral::{
    detect_signs, hodge_check_on, ko_dimension, spin_check_on, CliffordData, FiniteSpectralTriple,
    GradingSign, HodgeVerdict, MoritaVerdict, OrderVerdict, Sign, SignProfile, AntiUnitary,
};

const ROWS: usize = 8;
const COLS: usize = 4;
/// Dimension of one generation.
pub const GENERATION_DIM: usize = ROWS * COLS;

/// An element `(λ, q, m)` of the algebra. In the real algebra `λ′ = conj(λ)`
/// and `q` is quaternionic; the complexification frees both.
#[derive(Clone, Debug)]
pub struct SmElement {
    pub lambda: c64,
    pub lambda_prime: c64,
    pub q: ComplexMatrix,
    pub m: ComplexMatrix,
    pub complexified: bool,
}

impl SmElement {
    /// Real-algebra element with `q = [[α, β], [−conj β, conj α]]`.
    pub fn real(lambda: c64, alpha: c64, beta: c64, m: ComplexMatrix) -> Self {
        let q = ComplexMatrix::from_row_major(2, 2, &[alpha, beta, -beta.conj(), alpha.conj()])
            .expect("2x2");
        Self {
            lambda,
            lambda_prime: lambda.conj(),
            q,
            m,
            complexified: false,
        }
    }

    pub fn complex(lambda: c64, lambda_prime: c64, q: ComplexMatrix, m: ComplexMatrix) -> Self {
        Self {
            lambda,
            lambda_prime,
            q,
            m,
            complexified: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q.rows() != 2 || self.q.cols() != 2 || self.m.rows() != 3 || self.m.cols() != 3 {
            return Err(Error::InvalidParameter("q must be 2x2 and m 3x3".into()));
        }
        if !self.complexified {
            let q = &self.q;
            let dev = (q.get(1, 0) + q.get(0, 1).conj()).norm()
                + (q.get(1, 1) - q.get(0, 0).conj()).norm()
                + (self.lambda_prime - self.lambda.conj()).norm();
            if dev > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "element is not in the real algebra (deviation {dev:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// The 8×8 matrix acting on the left of the particle table.
    pub fn left_factor(&self) -> Result<ComplexMatrix> {
        self.validate()?;
        let mut l = ComplexMatrix::zeros(ROWS, ROWS);
        l.set(0, 0, self.lambda);
        l.set(1, 1, self.lambda_prime);
        for i in 0..2 {
            for j in 0..2 {
                l.set(2 + i, 2 + j, self.q.get(i, j));
            }
        }
        l.set(4, 4, self.lambda);
        for i in 0..3 {
            for j in 0..3 {
                l.set(5 + i, 5 + j, self.m.get(i, j));
            }
        }
        Ok(l)
    }
}

fn generation_lift(op: &ComplexMatrix, n_gen: usize) -> ComplexMatrix {
    if n_gen == 1 {
        op.clone()
    } else {
        ComplexMatrix::kron(op, &ComplexMatrix::identity(n_gen))
    }
}

/// `v ↦ L·v·R` on the particle table, diagonal in generations.
pub fn table_operator(left: &ComplexMatrix, right: &ComplexMatrix, n_gen: usize) -> Result<ComplexMatrix> {
    Ok(generation_lift(&embed_left_right(left, right)?, n_gen))
}

/// Representation of `a` by left multiplication.
pub fn build_pi(a: &SmElement, n_gen: usize) -> Result<ComplexMatrix> {
    table_operator(&a.left_factor()?, &ComplexMatrix::identity(COLS), n_gen)
}

/// The 15 matrix units of the complexified algebra `C ⊕ C ⊕ M_2 ⊕ M_3`.
pub fn complex_generators(n_gen: usize) -> Vec<ComplexMatrix> {
    let z2 = || ComplexMatrix::zeros(2, 2);
    let z3 = || ComplexMatrix::zeros(3, 3);
    let mut out = vec![
        SmElement::complex(ONE, ZERO, z2(), z3()),
        SmElement::complex(ZERO, ONE, z2(), z3()),
    ];
    for i in 0..2 {
        for j in 0..2 {
            out.push(SmElement::complex(ZERO, ZERO, ComplexMatrix::unit(2, i, j), z3()));
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            out.push(SmElement::complex(ZERO, ZERO, z2(), ComplexMatrix::unit(3, i, j)));
        }
    }
    out.iter().map(|a| build_pi(a, n_gen).expect("valid unit")).collect()
}

/// Yukawa couplings, each an `N×N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Yukawa {
    pub nu: ComplexMatrix,
    pub e: ComplexMatrix,
    pub u: ComplexMatrix,
    pub d: ComplexMatrix,
    pub r: ComplexMatrix,
}

impl Yukawa {
    pub fn scalar(nu: c64, e: c64, u: c64, d: c64, r: c64) -> Self {
        let s = |z| ComplexMatrix::scalar(1, z);
        Self {
            nu: s(nu),
            e: s(e),
            u: s(u),
            d: s(d),
            r: s(r),
        }
    }

    pub fn real(nu: f64, e: f64, u: f64, d: f64, r: f64) -> Self {
        let c = |x| c64::new(x, 0.0);
        Self::scalar(c(nu), c(e), c(u), c(d), c(r))
    }

    pub fn generations(&self) -> usize {
        self.nu.rows()
    }

    fn all(&self) -> [&ComplexMatrix; 5] {
        [&self.nu, &self.e, &self.u, &self.d, &self.r]
    }

    /// The one-generation values `(ν, e, u, d, R)`.
    pub fn scalars(&self) -> Option<[c64; 5]> {
        (self.generations() == 1).then(|| self.all().map(|m| m.get(0, 0)))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            nu: self.nu.scale_real(t),
            e: self.e.scale_real(t),
            u: self.u.scale_real(t),
            d: self.d.scale_real(t),
            r: self.r.scale_real(t),
        }
    }

    fn validate(&self) -> Result<usize> {
        let n = self.generations();
        if n == 0 {
            return Err(Error::InvalidParameter("empty Yukawa matrices".into()));
        }
        for m in self.all() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    context: "Yukawa matrices",
                    expected: format!("{n}x{n}"),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        let asym = self.r.distance(&self.r.transpose());
        if asym > 1e-12 * self.r.hs_norm().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "Majorana coupling must be symmetric (asymmetry {asym:.3e})"
            )));
        }
        Ok(n)
    }
}

/// Fixed-seed complex couplings for `n_gen` generations with condition
/// number below 10³; the Majorana coupling is symmetrized.
pub fn generic_yukawa(n_gen: usize, seed: u64) -> Yukawa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| loop {
        let m = ComplexMatrix::from_fn(n_gen, n_gen, |_, _| {
            c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        if condition_number(&m) < 1e3 {
            return m;
        }
    };
    let nu = draw(&mut rng);
    let e = draw(&mut rng);
    let u = draw(&mut rng);
    let d = draw(&mut rng);
    let r = loop {
        let a = draw(&mut rng);
        let s = (&a + &a.transpose()).scale_real(0.5);
        if condition_number(&s) < 1e3 {
            break s;
        }
    };
    Yukawa { nu, e, u, d, r }
}

fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = m.as_mat().singular_values().expect("svd");
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Dirac operator: Yukawa blocks between `R` and `L` rows, the Majorana
/// block between `ν_R` and its antiparticle, and their antiparticle images
/// acting on the right.
pub fn build_df(y: &Yukawa) -> Result<ComplexMatrix> {
    let n = y.validate()?;
    let dim = GENERATION_DIM * n;
    let idx = |row: usize, col: usize, g: usize| (row * COLS + col) * n + g;
    let mut d = ComplexMatrix::zeros(dim, dim);
    // block from slot (r2, c2) to slot (r1, c1) with generation matrix m
    let mut put = |r1: usize, c1: usize, r2: usize, c2: usize, m: &ComplexMatrix| {
        for g in 0..n {
            for h in 0..n {
                let (i, j) = (idx(r1, c1, g), idx(r2, c2, h));
                d.set(i, j, d.get(i, j) + m.get(g, h));
            }
        }
    };
    let mut pair = |r1: usize, c1: usize, r2: usize, c2: usize, m: &ComplexMatrix| {
        put(r1, c1, r2, c2, m);
        put(r2, c2, r1, c1, &m.adjoint());
    };
    // left Yukawa blocks: lepton column and quark columns
    for col in 0..COLS {
        let (up, down) = if col == 0 { (&y.nu, &y.e) } else { (&y.u, &y.d) };
        pair(2, col, 0, col, up);
        pair(3, col, 1, col, down);
    }
    pair(4, 0, 0, 0, &y.r);
    // antiparticle rows: v ↦ v·M with M[0,2] = conj(Υ), M[2,0] = Υᵀ
    for row in 4..ROWS {
        let (up, down) = if row == 4 { (&y.nu, &y.e) } else { (&y.u, &y.d) };
        pair(row, 2, row, 0, &up.conj());
        pair(row, 3, row, 1, &down.conj());
    }
    Ok(d)
}

/// Chirality: `+1` on right-handed particles, `−1` on left-handed ones, and
/// the opposite signs on antiparticles.
pub fn chi_f(n_gen: usize) -> ComplexMatrix {
    let mut diag = Vec::with_capacity(GENERATION_DIM * n_gen);
    for row in 0..ROWS {
        for col in 0..COLS {
            let s = match row {
                0 | 1 => 1.0,
                2 | 3 => -1.0,
                _ if col < 2 => -1.0,
                _ => 1.0,
            };
            diag.extend(std::iter::repeat_n(c64::new(s, 0.0), n_gen));
        }
    }
    ComplexMatrix::diag(&diag)
}

/// Real structure: complex conjugation composed with the swap of each
/// particle slot `(i, j)` with its antiparticle slot `(4 + j, i)`.
pub fn j_f(n_gen: usize) -> AntiUnitary {
    let dim = GENERATION_DIM * n_gen;
    let idx = |row: usize, col: usize, g: usize| (row * COLS + col) * n_gen + g;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for i in 0..4 {
        for j in 0..4 {
            for g in 0..n_gen {
                u.set(idx(i, j, g), idx(4 + j, i, g), ONE);
                u.set(idx(4 + j, i, g), idx(i, j, g), ONE);
            }
        }
    }
    AntiUnitary::new(u).expect("square")
}

/// The assembled triple together with its couplings.
#[derive(Clone, Debug)]
pub struct SmTriple {
    pub n_gen: usize,
    pub yukawa: Yukawa,
    pub triple: FiniteSpectralTriple,
}

/// Builds the triple and checks its structural identities, including
/// `DJ = JD` and the sign profile `(+, +, −)`.
pub fn build_sm_triple(y: &Yukawa, tol: Tolerance) -> Result<SmTriple> {
    let n_gen = y.validate()?;
    let triple = FiniteSpectralTriple::new(complex_generators(n_gen), build_df(y)?, tol)
        .with_grading(chi_f(n_gen))
        .with_real_structure(j_f(n_gen));
    triple.validate()?;
    let signs = detect_signs(&triple)?;
    let expected_up_to_d = |s: &SignProfile| {
        s.eps == Sign::Plus
            && s.eps_double_prime == GradingSign::Global(Sign::Minus)
            && s.eps_prime.is_none_or(|x| x == Sign::Plus)
    };
    if !expected_up_to_d(&signs) {
        return Err(Error::ClaimViolation(format!("sign profile {signs:?}")));
    }
    Ok(SmTriple {
        n_gen,
        yukawa: y.clone(),
        triple,
    })
}

/// `e_55 ⊗ (1 − e_11)`: lepton antiparticle row, quark columns.
pub fn no_go_witness(n_gen: usize) -> ComplexMatrix {
    let mut right = ComplexMatrix::identity(COLS);
    right.set(0, 0, ZERO);
    table_operator(&ComplexMatrix::unit(ROWS, 4, 4), &right, n_gen).expect("square")
}

/// Distance from the unit vector along `w` to `span{x} + s`.
pub fn distance_modulo(w: &ComplexMatrix, x: &ComplexMatrix, s: &OperatorSpace) -> Result<f64> {
    let ext = s.extend(std::slice::from_ref(x))?;
    let unit = w.scale_real(1.0 / w.hs_norm());
    Ok(ext.residual(&unit))
}

fn n_check(t: &SmTriple, what: &'static str) -> Result<()> {
    if t.n_gen != 1 {
        return Err(Error::InvalidParameter(format!("{what} is defined for one generation")));
    }
    Ok(())
}

/// Commutant C_F of the algebra in `M_8`: spanned by `e11, e15, e51, e55`,
/// `e22`, `e33 + e44`, `e66 + e77 + e88`.
pub fn c_f_pattern(tol: Tolerance) -> OperatorSpace {
    let u = |i, j| ComplexMatrix::unit(ROWS, i, j);
    let sum = |ks: &[usize]| ks.iter().fold(ComplexMatrix::zeros(ROWS, ROWS), |a, &k| &a + &u(k, k));
    let basis = [u(0, 0), u(0, 4), u(4, 0), u(4, 4), u(1, 1), sum(&[2, 3]), sum(&[5, 6, 7])];
    OperatorSpace::span(ROWS, &basis, tol).expect("8x8")
}

/// `a ⊗ e11 + diag(b, c) ⊗ e22 + diag(b, d) ⊗ (e33 + e44)` with
/// `a ∈ M_8`, `b, c, d ∈ M_4`.
pub fn jaj_commutant_pattern(tol: Tolerance) -> Result<OperatorSpace> {
    let e = |i, j| ComplexMatrix::unit(COLS, i, j);
    let e34 = &e(2, 2) + &e(3, 3);
    let mut basis = Vec::new();
    for i in 0..ROWS {
        for j in 0..ROWS {
            basis.push(table_operator(&ComplexMatrix::unit(ROWS, i, j), &e(0, 0), 1)?);
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            let top = ComplexMatrix::unit(ROWS, i, j);
            let bottom = ComplexMatrix::unit(ROWS, 4 + i, 4 + j);
            let b = &table_operator(&top, &e(1, 1), 1)? + &table_operator(&top, &e34, 1)?;
            basis.push(b);
            basis.push(table_operator(&bottom, &e(1, 1), 1)?);
            basis.push(table_operator(&bottom, &e34, 1)?);
        }
    }
    OperatorSpace::span(GENERATION_DIM, &basis, tol)
}

/// Dimensions of `A'`, `(JAJ)'`, their intersection and sum.
#[derive(Clone, Debug, Serialize)]
pub struct CommutantReport {
    pub algebra_dim: usize,
    pub commutant_dim: usize,
    pub jaj_commutant_dim: usize,
    pub intersection_dim: usize,
    pub intersection_center_dim: usize,
    pub sum_dim: usize,
    pub c_f_residual: f64,
    pub c_f_matches: bool,
    pub jaj_pattern_residual: f64,
    pub jaj_pattern_matches: bool,
}

/// Reference values: 112, 14, 210.
pub const COMMUTANT_DIM: usize = 112;
pub const INTERSECTION_DIM: usize = 14;
pub const SUM_DIM: usize = 210;

impl CommutantReport {
    /// Err on the first count that deviates from the reference value.
    pub fn verify(&self) -> Result<()> {
        let checks = [
            ("dim A'", COMMUTANT_DIM, self.commutant_dim),
            ("dim (JAJ)'", COMMUTANT_DIM, self.jaj_commutant_dim),
            ("dim A' ∩ (JAJ)'", INTERSECTION_DIM, self.intersection_dim),
            ("dim A' + (JAJ)'", SUM_DIM, self.sum_dim),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(Error::CountMismatch { what, expected, found });
            }
        }
        if !self.c_f_matches || !self.jaj_pattern_matches {
            return Err(Error::ClaimViolation("commutant pattern mismatch".into()));
        }
        Ok(())
    }
}

pub fn commutant_report(t: &SmTriple) -> Result<CommutantReport> {
    n_check(t, "commutant_report")?;
    let tol = t.triple.tol;
    let algebra = t.triple.algebra()?;
    let a_prime = commutant(&algebra)?;
    let j = t.triple.j()?;
    let jaj = j.conjugate_space(&algebra);
    let jaj_prime = commutant(&jaj)?;
    let meet = intersect(&a_prime, &jaj_prime)?;
    let meet_center = crate::algebra::center(&meet)?;
    let sum = sum_spaces(&a_prime, &jaj_prime)?;

    let left: Vec<ComplexMatrix> = [
        SmElement::complex(ONE, ZERO, ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3)),
        SmElement::complex(ZERO, ONE, ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3)),
    ]
    .iter()
    .chain(
        (0..4)
            .map(|k| SmElement::complex(ZERO, ZERO, ComplexMatrix::unit(2, k / 2, k % 2), ComplexMatrix::zeros(3, 3)))
            .collect::<Vec<_>>()
            .iter(),
    )
    .chain(
        (0..9)
            .map(|k| SmElement::complex(ZERO, ZERO, ComplexMatrix::zeros(2, 2), ComplexMatrix::unit(3, k / 3, k % 3)))
            .collect::<Vec<_>>()
            .iter(),
    )
    .map(|a| a.left_factor())
    .collect::<Result<_>>()?;
    let small = OperatorSpace::span(ROWS, &left, tol)?;
    let c_f = commutant(&small)?;
    let (c_f_matches, c_f_residual) = equal_spaces(&c_f, &c_f_pattern(tol))?;
    let (jaj_pattern_matches, jaj_pattern_residual) = equal_spaces(&jaj_prime, &jaj_commutant_pattern(tol)?)?;

    Ok(CommutantReport {
        algebra_dim: algebra.dim(),
        commutant_dim: a_prime.dim(),
        jaj_commutant_dim: jaj_prime.dim(),
        intersection_dim: meet.dim(),
        intersection_center_dim: meet_center.dim(),
        sum_dim: sum.dim(),
        c_f_residual,
        c_f_matches,
        jaj_pattern_residual,
        jaj_pattern_matches,
    })
}

/// The algebra `B = C ⊕ M_3 ⊕ M_4 ⊕ M_4`: `diag(λ, m)` on the antiparticle
/// rows, `a` on the lepton column and `b` on the quark columns of the
/// particle rows.
pub fn b_algebra(tol: Tolerance) -> Result<OperatorSpace> {
    let id = ComplexMatrix::identity(COLS);
    let e11 = ComplexMatrix::unit(COLS, 0, 0);
    let rest = &id - &e11;
    let mut basis = vec![table_operator(&ComplexMatrix::unit(ROWS, 4, 4), &id, 1)?];
    for i in 0..3 {
        for j in 0..3 {
            basis.push(table_operator(&ComplexMatrix::unit(ROWS, 5 + i, 5 + j), &id, 1)?);
        }
    }
    for right in [&e11, &rest] {
        for i in 0..4 {
            for j in 0..4 {
                basis.push(table_operator(&ComplexMatrix::unit(ROWS, i, j), right, 1)?);
            }
        }
    }
    OperatorSpace::span(GENERATION_DIM, &basis, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaStep {
    pub name: &'static str,
    pub holds: bool,
    pub residual: f64,
}

/// Hodge verdict through `B`, compared with the direct commutant test.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaBReport {
    pub steps: Vec<LemmaStep>,
    pub b_dim: usize,
    pub b_commutant_dim: usize,
    pub clifford_dim: usize,
    /// `Some` when steps (i) and (ii) hold, so that Hodge is equivalent to
    /// step (iii).
    pub hodge: Option<bool>,
    pub failed_step: Option<&'static str>,
    /// `Cl_D(A) = B`; equivalent to Hodge when the lemma applies.
    pub clifford_equals_b: bool,
    pub brute_force_hodge: bool,
    pub agrees: bool,
}

pub fn lemma_b_pathway(t: &SmTriple) -> Result<LemmaBReport> {
    let data = CliffordData::compute(&t.triple)?;
    lemma_b_on(t, &data)
}

fn lemma_b_on(t: &SmTriple, data: &CliffordData) -> Result<LemmaBReport> {
    n_check(t, "lemma_b_pathway")?;
    let tol = t.triple.tol;
    let j = t.triple.j()?;
    let b = b_algebra(tol)?;
    let jbj = j.conjugate_space(&b);
    let b_prime = commutant(&b)?;

    let (s1, r1) = b.contains_space(&data.clifford)?;
    let mut r_comm: f64 = 0.0;
    for x in b.elements() {
        for y in jbj.elements() {
            r_comm = r_comm.max(ComplexMatrix::commutator(&x, &y).hs_norm());
        }
    }
    let (eq2, r2) = equal_spaces(&jbj, &b_prime)?;
    let s2 = r_comm <= tol.residual && eq2 && b_prime.dim() == b.dim();
    let (s3, r3) = jbj.contains_space(&data.commutant)?;
    let (ceq, _) = equal_spaces(&data.clifford, &b)?;

    let steps = vec![
        LemmaStep { name: "clifford within B", holds: s1, residual: r1 },
        LemmaStep { name: "JBJ equals B'", holds: s2, residual: r_comm.max(r2) },
        LemmaStep { name: "clifford commutant within JBJ", holds: s3, residual: r3 },
    ];
    let failed_step = steps.iter().find(|s| !s.holds).map(|s| s.name);
    let hodge = (s1 && s2).then_some(s3);
    let brute = hodge_check_on(&t.triple, data)?.holds;
    Ok(LemmaBReport {
        steps,
        b_dim: b.dim(),
        b_commutant_dim: b_prime.dim(),
        clifford_dim: data.clifford.dim(),
        hodge,
        failed_step,
        clifford_equals_b: ceq,
        brute_force_hodge: brute,
        agrees: hodge == Some(brute) && ceq == brute,
    })
}

/// Sufficient condition for Hodge: all four couplings nonzero and
/// `|ν| ≠ |u|` or `|e| ≠ |d|`.
pub fn theorem_predicts(y: [c64; 5]) -> bool {
    let [nu, e, u, d, _] = y;
    let nonzero = [nu, e, u, d].iter().all(|z| z.norm() != 0.0);
    nonzero && (nu.norm() != u.norm() || e.norm() != d.norm())
}

/// Whether the point lies within `100·tol` (relative) of the boundary of the
/// condition without being on it.
pub fn near_boundary(y: [c64; 5], tol: Tolerance) -> bool {
    let [nu, e, u, d, _] = y;
    let scale = [nu, e, u, d].iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let margin = 100.0 * tol.rank * scale;
    let small = |x: f64| x > 0.0 && x <= margin;
    let dnu = (nu.norm() - u.norm()).abs();
    let de = (e.norm() - d.norm()).abs();
    let moduli = dnu <= margin && de <= margin && (dnu > 0.0 || de > 0.0);
    moduli || [nu, e, u, d].iter().any(|z| small(z.norm()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    #[serde(serialize_with = "serialize_params")]
    pub parameters: [c64; 5],
    pub predicted: bool,
    pub computed: bool,
    pub lemma_b: Option<bool>,
    pub near_degenerate: bool,
    pub clifford_dim: usize,
    pub commutant_dim: usize,
    pub runtime_ms: f64,
}

fn serialize_params<S: serde::Serializer>(p: &[c64; 5], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = p.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

impl ScanRow {
    /// A predicted Hodge point that fails away from the boundary, or the two
    /// methods disagreeing.
    pub fn is_disagreement(&self) -> bool {
        let theorem = self.predicted && !self.computed && !self.near_degenerate;
        theorem || self.lemma_b != Some(self.computed)
    }
}

fn scan_point(y: [c64; 5], tol: Tolerance) -> Result<ScanRow> {
    let start = Instant::now();
    let t = build_sm_triple(&Yukawa::scalar(y[0], y[1], y[2], y[3], y[4]), tol)?;
    let data = CliffordData::compute(&t.triple)?;
    let lemma = lemma_b_on(&t, &data)?;
    Ok(ScanRow {
        parameters: y,
        predicted: theorem_predicts(y),
        computed: lemma.brute_force_hodge,
        lemma_b: lemma.hodge,
        near_degenerate: near_boundary(y, tol),
        clifford_dim: data.clifford.dim(),
        commutant_dim: data.commutant.dim(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every grid point (in parallel); rows keep the grid order.
pub fn theorem_scan(grid: &[[c64; 5]], tol: Tolerance) -> Result<Vec<ScanRow>> {
    grid.par_iter().map(|&y| scan_point(y, tol)).collect()
}

/// All `(ν, e, u, d)` in `values⁴` with fixed `R`.
pub fn modulus_grid(values: &[f64], r: f64) -> Vec<[c64; 5]> {
    let c = |x: f64| c64::new(x, 0.0);
    let mut out = Vec::new();
    for &nu in values {
        for &e in values {
            for &u in values {
                for &d in values {
                    out.push([c(nu), c(e), c(u), c(d), c(r)]);
                }
            }
        }
    }
    out
}

fn fmt_c(z: c64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// CSV with a header row. `with_runtime = false` drops the timing column so
/// that output is reproducible byte for byte.
pub fn scan_csv(rows: &[ScanRow], with_runtime: bool) -> String {
    let mut out = String::from("parameters,predicted,computed,margin_flag,clifford_dim,commutant_dim");
    if with_runtime {
        out.push_str(",runtime_ms");
    }
    out.push('\n');
    for r in rows {
        let params: Vec<String> = r.parameters.iter().map(|&z| fmt_c(z)).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            params.join(";"),
            r.predicted,
            r.computed,
            if r.near_degenerate { "near-degenerate" } else { "clear" },
            r.clifford_dim,
            r.commutant_dim
        ));
        if with_runtime {
            out.push_str(&format!(",{:.1}", r.runtime_ms));
        }
        out.push('\n');
    }
    out
}

/// Dimensions and verdicts for a one-generation triple.
#[derive(Clone, Debug, Serialize)]
pub struct SmReport {
    pub generations: usize,
    pub commutants: Option<CommutantReport>,
    pub order0: OrderVerdict,
    pub order1: OrderVerdict,
    pub order2: OrderVerdict,
    pub signs: SignProfile,
    pub ko_dim: crate::spectral::KoDimension,
    pub clifford_dim: usize,
    pub clifford_commutant_dim: usize,
    pub spin: MoritaVerdict,
    pub witness_distance_to_reference: Option<f64>,
    pub hodge: HodgeVerdict,
    pub hodge_exploratory: bool,
    pub lemma_b: Option<LemmaBReport>,
    pub seed: Option<u64>,
}

fn sm_report_inner(t: &SmTriple, seed: Option<u64>) -> Result<SmReport> {
    let data = CliffordData::compute(&t.triple)?;
    let order = |k| crate::spectral::check_order_on(&t.triple, &data.algebra, k);
    let signs = detect_signs(&t.triple)?;
    let spin = spin_check_on(&t.triple, &data)?;
    let hodge = hodge_check_on(&t.triple, &data)?;
    let one = t.n_gen == 1;
    let witness_distance_to_reference = match (&spin.witness, one) {
        (Some(w), true) => {
            let j = t.triple.j()?;
            let jaj = data.algebra.map_isometric(|a| j.right_action(a));
            Some(distance_modulo(&w.operator, &no_go_witness(1), &jaj)?)
        }
        _ => None,
    };
    Ok(SmReport {
        generations: t.n_gen,
        commutants: if one { Some(commutant_report(t)?) } else { None },
        order0: order(0)?,
        order1: order(1)?,
        order2: hodge.order2.clone(),
        ko_dim: ko_dimension(&signs)?,
        signs,
        clifford_dim: data.clifford.dim(),
        clifford_commutant_dim: data.commutant.dim(),
        spin,
        witness_distance_to_reference,
        hodge,
        hodge_exploratory: !one,
        lemma_b: if one { Some(lemma_b_on(t, &data)?) } else { None },
        seed,
    })
}

/// Full one-generation report (counts, orders, signs, spin, Hodge, lemma B).
pub fn sm_report(t: &SmTriple) -> Result<SmReport> {
    n_check(t, "sm_report")?;
    sm_report_inner(t, None)
}

/// Three-generation report. Order 2 must hold and spin must fail; the Hodge
/// verdict is exploratory.
pub fn three_gen_report(y: &Yukawa, seed: Option<u64>, tol: Tolerance) -> Result<SmReport> {
    if y.generations() != 3 {
        return Err(Error::InvalidParameter(format!(
            "three_gen_report needs 3 generations, got {}",
            y.generations()
        )));
    }
    let t = build_sm_triple(y, tol)?;
    sm_report_inner(&t, seed)
}

impl SmReport {
    /// Err if a reference claim fails: counts (one generation), orders 0
    /// and 1, KO-dimension 6, and for three generations order 2 and the
    /// failure of spin.
    pub fn verify(&self) -> Result<()> {
        if let Some(c) = &self.commutants {
            c.verify()?;
        }
        if !self.order0.holds || !self.order1.holds {
            return Err(Error::ClaimViolation("order 0 or order 1 condition fails".into()));
        }
        if self.ko_dim.candidates != [6] {
            return Err(Error::ClaimViolation(format!("KO-dimension {:?}", self.ko_dim.candidates)));
        }
        if self.generations == 3 && (!self.order2.holds || self.spin.holds) {
            return Err(Error::ClaimViolation(format!(
                "three generations: order2 {}, spin {}",
                self.order2.holds, self.spin.holds
            )));
        }
        Ok(())
    }
}
