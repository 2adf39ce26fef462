//! Exterior algebra `ΛC^n` over one point: left and right Clifford actions,
//! the parity and Hodge gradings, and the two conjugations.
//!
//! Basis states are subsets `S ⊆ {0..n}` ordered by size, then
//! lexicographically; the metric is the identity.

use serde::Serialize;

use crate::algebra::{commutant, equal_spaces, generate_algebra};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, Tolerance, ONE, ZERO};
use crate::spectral::{grading_sign, ko_dimension, AntiUnitary, GradingSign, Sign, SignProfile};

/// Default upper bound on `n` for [`fiber_report`].
pub const DEFAULT_CAP: usize = 8;

/// Subset basis of `ΛC^n`.
#[derive(Clone, Debug)]
pub struct ExteriorBasis {
    n: usize,
    subsets: Vec<u32>,
    index: Vec<usize>,
}

impl ExteriorBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidParameter(format!("exterior degree n = {n} must be in 1..=16")));
        }
        let members = |s: u32| (0..n).filter(|&i| s >> i & 1 == 1).collect::<Vec<_>>();
        let mut subsets: Vec<u32> = (0..1u32 << n).collect();
        subsets.sort_by_key(|&s| (s.count_ones(), members(s)));
        let mut index = vec![0; subsets.len()];
        for (k, &s) in subsets.iter().enumerate() {
            index[s as usize] = k;
        }
        Ok(Self { n, subsets, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.subsets.len()
    }

    /// Bitmask of the `k`-th basis state.
    pub fn subset(&self, k: usize) -> u32 {
        self.subsets[k]
    }

    pub fn position(&self, subset: u32) -> usize {
        self.index[subset as usize]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.subsets[k].count_ones() as usize
    }

    fn full(&self) -> u32 {
        (1u32 << self.n) - 1
    }
}

/// `(−1)^{#{(i, j) : i ∈ S, j ∉ S, i > j}}`, the sign of the permutation
/// listing `S` and then its complement.
fn shuffle_sign(s: u32, n: usize) -> f64 {
    let mut inversions = 0;
    for i in 0..n {
        if s >> i & 1 == 1 {
            inversions += (0..i).filter(|&j| s >> j & 1 == 0).count();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Creation and annihilation operators and the structures built from them.
#[derive(Clone, Debug)]
pub struct FiberOps {
    pub basis: ExteriorBasis,
    pub wedge: Vec<ComplexMatrix>,
    pub contract: Vec<ComplexMatrix>,
}

impl FiberOps {
    pub fn new(n: usize) -> Result<Self> {
        let basis = ExteriorBasis::new(n)?;
        let d = basis.dim();
        let wedge: Vec<ComplexMatrix> = (0..n)
            .map(|j| {
                let mut w = ComplexMatrix::zeros(d, d);
                for k in 0..d {
                    let s = basis.subset(k);
                    if s >> j & 1 == 1 {
                        continue;
                    }
                    let below = (s & ((1u32 << j) - 1)).count_ones();
                    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                    w.set(basis.position(s | 1 << j), k, c64::new(sign, 0.0));
                }
                w
            })
            .collect();
        let contract = wedge.iter().map(ComplexMatrix::adjoint).collect();
        Ok(Self {
            basis,
            wedge,
            contract,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn check_len(&self, v: &[c64]) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "fiber vector",
                expected: format!("length {}", self.n()),
                found: format!("length {}", v.len()),
            });
        }
        Ok(())
    }

    fn combine(&self, v: &[c64], sign: f64) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (j, &z) in v.iter().enumerate() {
            let term = &self.wedge[j] + &self.contract[j].scale_real(sign);
            out = &out + &term.scale(z);
        }
        out
    }

    /// `λ(v) = v∧ − v⌟`.
    pub fn lambda(&self, v: &[c64]) -> Result<ComplexMatrix> {
        self.check_len(v)?;
        Ok(self.combine(v, -1.0))
    }

    /// `ρ(v) = (v∧ + v⌟)·χ`, with `χ` the parity grading.
    pub fn rho(&self, v: &[c64]) -> Result<ComplexMatrix> {
        self.check_len(v)?;
        Ok(&self.combine(v, 1.0) * &self.chi_parity())
    }

    /// `λ(e_j)` for each basis vector.
    pub fn lambda_generators(&self) -> Vec<ComplexMatrix> {
        (0..self.n()).map(|j| self.lambda(&unit_vector(self.n(), j)).expect("length n")).collect()
    }

    pub fn rho_generators(&self) -> Vec<ComplexMatrix> {
        (0..self.n()).map(|j| self.rho(&unit_vector(self.n(), j)).expect("length n")).collect()
    }

    /// `(−1)^{|S|}`.
    pub fn chi_parity(&self) -> ComplexMatrix {
        let diag: Vec<c64> = (0..self.dim())
            .map(|k| if self.basis.degree(k) % 2 == 0 { ONE } else { -ONE })
            .collect();
        ComplexMatrix::diag(&diag)
    }

    /// `S ↦ i^{k(k−1)+m}·σ(S, Sᶜ)·Sᶜ` for `n = 2m`, `k = |S|`.
    pub fn chi_hodge(&self) -> Result<ComplexMatrix> {
        let n = self.n();
        if n % 2 == 1 {
            return Err(Error::InvalidParameter(format!("Hodge grading needs even n, got {n}")));
        }
        let m = n / 2;
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            let s = self.basis.subset(k);
            let deg = self.basis.degree(k);
            let phase = i_power(deg * (deg.saturating_sub(1)) + m);
            let target = self.basis.position(self.basis.full() & !s);
            out.set(target, k, phase.scale(shuffle_sign(s, n)));
        }
        Ok(out)
    }

    /// Complex conjugation of forms.
    pub fn j_plain(&self) -> AntiUnitary {
        AntiUnitary::conjugation(self.dim())
    }

    /// `(−1)^{k(k−1)/2}` on degree `k`, composed with complex conjugation.
    pub fn j_prime(&self) -> AntiUnitary {
        let diag: Vec<c64> = (0..self.dim())
            .map(|k| {
                let deg = self.basis.degree(k);
                if (deg * deg.saturating_sub(1) / 2) % 2 == 0 {
                    ONE
                } else {
                    -ONE
                }
            })
            .collect();
        AntiUnitary::new(ComplexMatrix::diag(&diag)).expect("diagonal signs are unitary")
    }

    /// Projection onto the degree-`k` forms.
    pub fn degree_projection(&self, k: usize) -> ComplexMatrix {
        let diag: Vec<c64> = (0..self.dim())
            .map(|i| if self.basis.degree(i) == k { ONE } else { ZERO })
            .collect();
        ComplexMatrix::diag(&diag)
    }
}

fn i_power(e: usize) -> c64 {
    match e % 4 {
        0 => ONE,
        1 => c64::new(0.0, 1.0),
        2 => -ONE,
        _ => c64::new(0.0, -1.0),
    }
}

pub fn unit_vector(n: usize, j: usize) -> Vec<c64> {
    (0..n).map(|i| if i == j { ONE } else { ZERO }).collect()
}

pub fn lambda_op(n: usize, v: &[c64]) -> Result<ComplexMatrix> {
    FiberOps::new(n)?.lambda(v)
}

pub fn rho_op(n: usize, v: &[c64]) -> Result<ComplexMatrix> {
    FiberOps::new(n)?.rho(v)
}

pub fn chi_parity(n: usize) -> Result<ComplexMatrix> {
    Ok(FiberOps::new(n)?.chi_parity())
}

pub fn chi_hodge(n: usize) -> Result<ComplexMatrix> {
    FiberOps::new(n)?.chi_hodge()
}

pub fn j_plain(n: usize) -> Result<AntiUnitary> {
    Ok(FiberOps::new(n)?.j_plain())
}

pub fn j_prime(n: usize) -> Result<AntiUnitary> {
    Ok(FiberOps::new(n)?.j_prime())
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberSigns {
    /// `J² = ε` for the plain conjugation.
    pub eps: Sign,
    pub eps_j_prime: Sign,
    /// No operator `D` lives on a single fiber.
    pub eps_prime: &'static str,
    pub eps_pp_parity: GradingSign,
    pub eps_pp_hodge: Option<GradingSign>,
    pub eps_pp_parity_prime: GradingSign,
    pub eps_pp_hodge_prime: Option<GradingSign>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberDims {
    pub exterior: usize,
    pub lambda_algebra: usize,
    pub rho_algebra: usize,
    pub lambda_commutant: usize,
}

/// Worst residual of each identity, over basis vectors.
#[derive(Clone, Debug, Serialize)]
pub struct FiberResiduals {
    /// `{a_i, a_j†} = δ_ij`, `{a_i, a_j} = 0`.
    pub anticommutation: f64,
    /// `λ(e_i)λ(e_j) + λ(e_j)λ(e_i) = −2δ_ij` and the same for `ρ`.
    pub clifford: f64,
    pub lambda_rho_commute: f64,
    /// `J′λ(e_j)J′⁻¹ = ρ(e_j)`.
    pub j_prime_intertwines: f64,
    /// `χ² = 1`, `χ† = χ` and `χλ(e_j) = −λ(e_j)χ` for every grading.
    pub gradings: f64,
    /// `J′χ′ = (−1)^k χ′J′` on degree `k`, worst over `k`.
    pub graded_relation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    pub n: usize,
    pub m: Option<usize>,
    pub signs: FiberSigns,
    /// KO-dimensions matching `(ε, ε″)` of the Hodge grading with `J_Ω`.
    pub ko_candidates: Option<Vec<u8>>,
    /// `λ`-algebra and `ρ`-algebra are mutual commutants; `None` for odd n.
    pub morita: Option<bool>,
    pub morita_residual: f64,
    pub dims: FiberDims,
    pub residuals: FiberResiduals,
}

fn j_squared(j: &AntiUnitary, tol: f64) -> Result<Sign> {
    let u = j.unitary();
    let uu = u * &u.conj();
    let id = ComplexMatrix::identity(j.dim());
    if uu.distance(&id) <= tol {
        Ok(Sign::Plus)
    } else if uu.distance(&(-&id)) <= tol {
        Ok(Sign::Minus)
    } else {
        Err(Error::UndetectableSign("J^2".into()))
    }
}

fn expect_sign(what: &str, found: GradingSign, expected: GradingSign) -> Result<GradingSign> {
    if found != expected {
        return Err(Error::ClaimViolation(format!("{what}: expected {expected:?}, found {found:?}")));
    }
    Ok(found)
}

/// Signs, identities and the self-Morita property of `ΛC^n` for
/// `n ≤ cap`. Any sign differing from the expected value is an error.
pub fn fiber_report(n: usize, cap: usize, tol: Tolerance) -> Result<FiberReport> {
    if n > cap {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds the cap {cap}")));
    }
    let ops = FiberOps::new(n)?;
    let d = ops.dim();
    let id = ComplexMatrix::identity(d);
    let lam = ops.lambda_generators();
    let rho = ops.rho_generators();

    let mut anticommutation = 0.0f64;
    let mut clifford = 0.0f64;
    let mut commute = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let ac = ComplexMatrix::anticommutator(&ops.wedge[i], &ops.contract[j]);
            anticommutation = anticommutation
                .max(ac.distance(&id.scale_real(delta)))
                .max(ComplexMatrix::anticommutator(&ops.wedge[i], &ops.wedge[j]).hs_norm());
            let target = id.scale_real(-2.0 * delta);
            clifford = clifford
                .max(ComplexMatrix::anticommutator(&lam[i], &lam[j]).distance(&target))
                .max(ComplexMatrix::anticommutator(&rho[i], &rho[j]).distance(&target));
            commute = commute.max(ComplexMatrix::commutator(&lam[i], &rho[j]).hs_norm());
        }
    }
    let jp = ops.j_prime();
    let intertwine = (0..n)
        .map(|j| jp.conjugate(&lam[j]).distance(&rho[j]))
        .fold(0.0, f64::max);

    let parity = ops.chi_parity();
    let hodge = if n % 2 == 0 { Some(ops.chi_hodge()?) } else { None };
    let mut gradings = 0.0f64;
    for chi in std::iter::once(&parity).chain(hodge.as_ref()) {
        gradings = gradings.max((chi * chi).distance(&id)).max(chi.distance(&chi.adjoint()));
        for l in &lam {
            gradings = gradings.max(ComplexMatrix::anticommutator(chi, l).hs_norm());
        }
    }

    let res = tol.residual;
    let jo = ops.j_plain();
    let eps = j_squared(&jo, res)?;
    let eps_j_prime = j_squared(&jp, res)?;
    for (what, s) in [("J^2", eps), ("J'^2", eps_j_prime)] {
        if s != Sign::Plus {
            return Err(Error::ClaimViolation(format!("{what} = -1")));
        }
    }
    let plus = GradingSign::Global(Sign::Plus);
    let eps_pp_parity =
        expect_sign("parity grading with J", grading_sign(&parity, jo.unitary(), None, res)?, plus)?;
    let eps_pp_parity_prime =
        expect_sign("parity grading with J'", grading_sign(&parity, jp.unitary(), None, res)?, plus)?;

    let m = (n % 2 == 0).then_some(n / 2);
    let (eps_pp_hodge, eps_pp_hodge_prime, graded_relation) = match (&hodge, m) {
        (Some(chi), Some(m)) => {
            let expected = GradingSign::Global(if m % 2 == 0 { Sign::Plus } else { Sign::Minus });
            let plain = expect_sign("Hodge grading with J", grading_sign(chi, jo.unitary(), None, res)?, expected)?;
            let graded = expect_sign(
                "Hodge grading with J'",
                grading_sign(chi, jp.unitary(), Some(&parity), res)?,
                GradingSign::Graded {
                    even: Sign::Plus,
                    odd: Sign::Minus,
                },
            )?;
            // J'χ' x = U·conj(χ)·conj(x), χ'J' x = χ·U·conj(x); conj(x) keeps its degree
            let u = jp.unitary();
            let lhs = u * &chi.conj();
            let rhs = chi * u;
            let worst = (0..=n)
                .map(|k| {
                    let pk = ops.degree_projection(k);
                    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                    (&(&lhs - &rhs.scale_real(s)) * &pk).hs_norm()
                })
                .fold(0.0, f64::max);
            (Some(plain), Some(graded), Some(worst))
        }
        _ => (None, None, None),
    };

    let ko_candidates = match eps_pp_hodge {
        Some(s) => Some(
            ko_dimension(&SignProfile {
                eps,
                eps_prime: None,
                eps_double_prime: s,
            })?
            .candidates,
        ),
        None => None,
    };

    let lam_alg = generate_algebra(d, &lam, tol)?;
    let rho_alg = generate_algebra(d, &rho, tol)?;
    let lam_comm = commutant(&lam_alg)?;
    let (equal, morita_residual) = equal_spaces(&lam_comm, &rho_alg)?;

    Ok(FiberReport {
        n,
        m,
        signs: FiberSigns {
            eps,
            eps_j_prime,
            eps_prime: "out-of-scope",
            eps_pp_parity,
            eps_pp_hodge,
            eps_pp_parity_prime,
            eps_pp_hodge_prime,
        },
        ko_candidates,
        morita: m.map(|_| equal),
        morita_residual,
        dims: FiberDims {
            exterior: d,
            lambda_algebra: lam_alg.dim(),
            rho_algebra: rho_alg.dim(),
            lambda_commutant: lam_comm.dim(),
        },
        residuals: FiberResiduals {
            anticommutation,
            clifford,
            lambda_rho_commute: commute,
            j_prime_intertwines: intertwine,
            gradings,
            graded_relation,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order() {
        let b = ExteriorBasis::new(3).unwrap();
        let order: Vec<u32> = (0..b.dim()).map(|k| b.subset(k)).collect();
        assert_eq!(order, vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]);
    }

    #[test]
    fn lambda_one_dimensional() {
        let l = lambda_op(1, &[ONE]).unwrap();
        assert_eq!(l, ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]));
        assert_eq!(lambda_op(3, &[ZERO; 3]).unwrap(), ComplexMatrix::zeros(8, 8));
        assert!(lambda_op(2, &[ONE]).is_err());
    }

    #[test]
    fn parity_one_dimensional() {
        assert_eq!(chi_parity(1).unwrap(), ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]));
    }

    #[test]
    fn hodge_of_vacuum_in_two_dimensions() {
        let chi = chi_hodge(2).unwrap();
        // basis (∅, e1, e2, e1∧e2)
        assert_eq!(chi.get(3, 0), c64::new(0.0, 1.0));
        assert!(chi_hodge(3).is_err());
    }

    #[test]
    fn j_prime_signs_in_two_dimensions() {
        let u = j_prime(2).unwrap().unitary().clone();
        let diag: Vec<f64> = (0..4).map(|k| u.get(k, k).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, -1.0]);
        assert_eq!(j_plain(2).unwrap().unitary(), &ComplexMatrix::identity(4));
    }

    #[test]
    fn report_rejects_n_above_cap() {
        assert!(fiber_report(3, 2, Tolerance::default()).is_err());
    }
}
