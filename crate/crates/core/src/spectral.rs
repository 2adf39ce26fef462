//! Real spectral triples: axioms, order conditions, signs, KO-dimension and
//! the spin and Hodge verdicts.

use serde::{Serialize, Serializer};

use crate::algebra::{commutant, equal_spaces, generate_algebra, OperatorSpace};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};

/// Antiunitary `x ↦ U·conj(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiUnitary {
    u: ComplexMatrix,
}

impl AntiUnitary {
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                context: "AntiUnitary::new",
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        Ok(Self { u })
    }

    /// Plain complex conjugation.
    pub fn conjugation(n: usize) -> Self {
        Self {
            u: ComplexMatrix::identity(n),
        }
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    /// `‖U†U − 1‖`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (&self.u.adjoint() * &self.u).distance(&ComplexMatrix::identity(n))
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.u * &x.conj()
    }

    /// `J·a·J⁻¹ = U·conj(a)·U†`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.u * &a.conj()) * &self.u.adjoint()
    }

    /// `J·a†·J⁻¹ = U·aᵀ·U†`.
    pub fn right_action(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.u * &a.transpose()) * &self.u.adjoint()
    }

    /// `J·S·J⁻¹` for a whole space; the map is an HS isometry.
    pub fn conjugate_space(&self, s: &OperatorSpace) -> OperatorSpace {
        s.map_isometric(|x| self.conjugate(x))
    }

    /// The antiunitary `χJ`.
    pub fn after(&self, left: &ComplexMatrix) -> Self {
        Self { u: left * &self.u }
    }
}

/// Algebra generators, Dirac operator and optional grading and real
/// structure on `C^dim`.
///
/// `parity` is an optional second grading; it is only used to resolve a
/// blockwise sign when `χJ = ±Jχ` has no global sign.
#[derive(Clone, Debug)]
pub struct FiniteSpectralTriple {
    pub dim: usize,
    pub generators: Vec<ComplexMatrix>,
    pub d: ComplexMatrix,
    pub grading: Option<ComplexMatrix>,
    pub parity: Option<ComplexMatrix>,
    pub real: Option<AntiUnitary>,
    pub tol: Tolerance,
}

impl FiniteSpectralTriple {
    pub fn new(generators: Vec<ComplexMatrix>, d: ComplexMatrix, tol: Tolerance) -> Self {
        Self {
            dim: d.rows(),
            generators,
            d,
            grading: None,
            parity: None,
            real: None,
            tol,
        }
    }

    pub fn with_grading(mut self, chi: ComplexMatrix) -> Self {
        self.grading = Some(chi);
        self
    }

    pub fn with_parity(mut self, p: ComplexMatrix) -> Self {
        self.parity = Some(p);
        self
    }

    pub fn with_real_structure(mut self, j: AntiUnitary) -> Self {
        self.real = Some(j);
        self
    }

    pub fn j(&self) -> Result<&AntiUnitary> {
        self.real.as_ref().ok_or(Error::MissingStructure("real structure J"))
    }

    fn d_scale(&self) -> f64 {
        self.d.hs_norm().max(1.0)
    }

    /// Shapes plus the structural axioms: `D = D†`, `χ = χ†`, `χ² = 1`,
    /// `[χ, a] = 0`, `{χ, D} = 0`, `J` unitary. Returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        let shape = |m: &ComplexMatrix, what: &'static str| -> Result<()> {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: format!("{n}x{n}"),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            Ok(())
        };
        shape(&self.d, "D")?;
        for g in &self.generators {
            shape(g, "algebra generator")?;
        }
        let tol = self.tol.residual;
        let violation = |axiom: &str, residual: f64, scale: f64| -> Result<()> {
            if residual > tol * scale {
                return Err(Error::AxiomViolation {
                    axiom: axiom.to_string(),
                    residual,
                });
            }
            Ok(())
        };
        violation("D selfadjointness", self.d.distance(&self.d.adjoint()), self.d_scale())?;
        if let Some(chi) = &self.grading {
            shape(chi, "grading")?;
            violation("grading selfadjointness", chi.distance(&chi.adjoint()), 1.0)?;
            violation("grading involution", (chi * chi).distance(&ComplexMatrix::identity(n)), 1.0)?;
            for g in &self.generators {
                let r = ComplexMatrix::commutator(chi, g).hs_norm();
                violation("grading commutes with algebra", r, g.hs_norm().max(1.0))?;
            }
            let r = ComplexMatrix::anticommutator(chi, &self.d).hs_norm();
            violation("grading anticommutes with D", r, self.d_scale())?;
        }
        if let Some(p) = &self.parity {
            shape(p, "parity")?;
            violation("parity involution", (p * p).distance(&ComplexMatrix::identity(n)), 1.0)?;
        }
        if let Some(j) = &self.real {
            shape(j.unitary(), "real structure")?;
            violation("J unitarity", j.unitarity_residual(), 1.0)?;
        }
        Ok(())
    }

    /// Complex span of the generated algebra.
    pub fn algebra(&self) -> Result<OperatorSpace> {
        generate_algebra(self.dim, &self.generators, self.tol)
    }
}

/// `J·a†·J⁻¹`.
pub fn right_action(triple: &FiniteSpectralTriple, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(triple.j()?.right_action(a))
}

/// Outcome of an order condition: worst commutator norm over pairs of
/// algebra basis elements and the pair attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub residual: f64,
    pub witness: Option<(usize, usize)>,
}

/// Order-`k` condition checked on a basis of the generated algebra:
/// `[a, JbJ⁻¹]`, `[[D,a], JbJ⁻¹]` or `[[D,a], J[D,b]J⁻¹]`.
pub fn check_order(triple: &FiniteSpectralTriple, k: u8) -> Result<OrderVerdict> {
    let algebra = triple.algebra()?;
    check_order_on(triple, &algebra, k)
}

pub(crate) fn check_order_on(
    triple: &FiniteSpectralTriple,
    algebra: &OperatorSpace,
    k: u8,
) -> Result<OrderVerdict> {
    if k > 2 {
        return Err(Error::InvalidParameter(format!("order {k} is not 0, 1 or 2")));
    }
    let j = triple.j()?;
    let basis = algebra.elements();
    let d = &triple.d;
    let da: Vec<ComplexMatrix> = basis.iter().map(|a| ComplexMatrix::commutator(d, a)).collect();
    let left: &[ComplexMatrix] = if k == 0 { &basis } else { &da };
    let right: Vec<ComplexMatrix> = if k == 2 {
        da.iter().map(|x| j.conjugate(x)).collect()
    } else {
        basis.iter().map(|x| j.conjugate(x)).collect()
    };
    let mut worst = 0.0;
    let mut pair = None;
    for (p, l) in left.iter().enumerate() {
        for (q, r) in right.iter().enumerate() {
            let c = ComplexMatrix::commutator(l, r).hs_norm();
            if c > worst {
                worst = c;
                pair = Some((p, q));
            }
        }
    }
    let threshold = triple.tol.residual * triple.d_scale().powi(k as i32);
    let holds = worst <= threshold;
    Ok(OrderVerdict {
        holds,
        residual: worst,
        witness: if holds { None } else { pair },
    })
}

/// One of the three sign relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Self {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    fn times(self, other: Sign) -> Sign {
        Sign::from_value(self.value() * other.value())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

/// `ε″`: a global sign, a sign per parity block, or no grading at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradingSign {
    Global(Sign),
    Graded { even: Sign, odd: Sign },
    Absent,
}

impl Serialize for GradingSign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            GradingSign::Global(x) => x.serialize(s),
            GradingSign::Absent => s.serialize_none(),
            GradingSign::Graded { even, odd } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("even", even)?;
                m.serialize_entry("odd", odd)?;
                m.end()
            }
        }
    }
}

/// `(ε, ε′, ε″)`. `eps_prime` is `None` when both signs fit, i.e. `D ≈ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignProfile {
    pub eps: Sign,
    pub eps_prime: Option<Sign>,
    pub eps_double_prime: GradingSign,
}

fn pick_sign(plus: f64, minus: f64, threshold: f64, what: &str) -> Result<Option<Sign>> {
    match (plus <= threshold, minus <= threshold) {
        (true, true) => Ok(None),
        (true, false) => Ok(Some(Sign::Plus)),
        (false, true) => Ok(Some(Sign::Minus)),
        (false, false) => Err(Error::UndetectableSign(format!(
            "{what}: residual {plus:.3e} for +, {minus:.3e} for -"
        ))),
    }
}

/// `J² = ε`, `DJ = ε′JD`, `χJ = ε″Jχ`.
pub fn detect_signs(triple: &FiniteSpectralTriple) -> Result<SignProfile> {
    let j = triple.j()?;
    let n = triple.dim;
    let u = j.unitary();
    let tol = triple.tol.residual;
    let id = ComplexMatrix::identity(n);

    let uu = u * &u.conj();
    let eps = pick_sign(uu.distance(&id), uu.distance(&(-&id)), tol, "J^2")?
        .ok_or_else(|| Error::UndetectableSign("J^2".into()))?;

    // DJ x = D·U·conj(x), JD x = U·conj(D)·conj(x)
    let du = &triple.d * u;
    let udc = u * &triple.d.conj();
    let eps_prime = pick_sign(
        (&du - &udc).hs_norm(),
        (&du + &udc).hs_norm(),
        tol * triple.d_scale(),
        "DJ = ±JD",
    )?;

    let eps_double_prime = match &triple.grading {
        None => GradingSign::Absent,
        Some(chi) => grading_sign(chi, u, triple.parity.as_ref(), tol)?,
    };
    Ok(SignProfile {
        eps,
        eps_prime,
        eps_double_prime,
    })
}

pub(crate) fn grading_sign(
    chi: &ComplexMatrix,
    u: &ComplexMatrix,
    parity: Option<&ComplexMatrix>,
    tol: f64,
) -> Result<GradingSign> {
    let cu = chi * u;
    let ucc = u * &chi.conj();
    let plus = &cu - &ucc;
    let minus = &cu + &ucc;
    if let Some(s) = pick_sign(plus.hs_norm(), minus.hs_norm(), tol, "χJ = ±Jχ").ok().flatten() {
        return Ok(GradingSign::Global(s));
    }
    let Some(p) = parity else {
        return Err(Error::UndetectableSign(format!(
            "χJ = ±Jχ: residual {:.3e} for +, {:.3e} for -, no parity grading to split on",
            plus.hs_norm(),
            minus.hs_norm()
        )));
    };
    // x in the ±1 eigenspace of P means conj(x) = conj(P±)·conj(x)
    let n = chi.rows();
    let id = ComplexMatrix::identity(n);
    let half = |m: &ComplexMatrix| m.scale_real(0.5);
    let p_even = half(&(&id + p)).conj();
    let p_odd = half(&(&id - p)).conj();
    let block = |proj: &ComplexMatrix, what: &str| -> Result<Sign> {
        pick_sign(
            (&plus * proj).hs_norm(),
            (&minus * proj).hs_norm(),
            tol,
            what,
        )?
        .ok_or_else(|| Error::UndetectableSign(format!("{what}: empty block")))
    };
    Ok(GradingSign::Graded {
        even: block(&p_even, "χJ = ±Jχ on even block")?,
        odd: block(&p_odd, "χJ = ±Jχ on odd block")?,
    })
}

/// Sign columns `(ε, ε′, ε″)` for KO-dimensions 0..7; `None` marks the odd
/// columns without `ε″`.
const KO_TABLE: [(i8, i8, Option<i8>); 8] = [
    (1, 1, Some(1)),
    (1, -1, None),
    (-1, 1, Some(-1)),
    (-1, 1, None),
    (-1, 1, Some(1)),
    (-1, -1, None),
    (1, 1, Some(-1)),
    (1, 1, None),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KoDimension {
    pub candidates: Vec<u8>,
    pub generalized: bool,
}

/// KO-dimension mod 8 read from the sign table. A missing `ε′` matches
/// either value; a graded `ε″` yields the even columns matching each block.
pub fn ko_dimension(signs: &SignProfile) -> Result<KoDimension> {
    let eps = signs.eps.value();
    let eps_p = signs.eps_prime.map(Sign::value);
    let matches = |target: Option<i8>| -> Vec<u8> {
        KO_TABLE
            .iter()
            .enumerate()
            .filter(|(_, &(e, ep, epp))| e == eps && eps_p.is_none_or(|x| x == ep) && epp == target)
            .map(|(n, _)| n as u8)
            .collect()
    };
    let (candidates, generalized) = match signs.eps_double_prime {
        GradingSign::Global(s) => (matches(Some(s.value())), false),
        GradingSign::Absent => (matches(None), false),
        GradingSign::Graded { even, odd } => {
            let mut c = matches(Some(even.value()));
            c.extend(matches(Some(odd.value())));
            c.sort_unstable();
            c.dedup();
            (c, true)
        }
    };
    if candidates.is_empty() {
        return Err(Error::NoKoMatch(format!("{signs:?}")));
    }
    Ok(KoDimension {
        candidates,
        generalized,
    })
}

/// Signs for the real structure `χJ` in place of `J`.
pub fn signs_for_chi_j(signs: &SignProfile) -> Option<SignProfile> {
    let GradingSign::Global(epp) = signs.eps_double_prime else {
        return None;
    };
    Some(SignProfile {
        eps: signs.eps.times(epp),
        eps_prime: signs.eps_prime.map(|s| s.times(Sign::Minus)),
        eps_double_prime: signs.eps_double_prime,
    })
}

/// Algebra generated by the generators and the commutators `[D, a]`.
pub fn clifford(triple: &FiniteSpectralTriple) -> Result<OperatorSpace> {
    let mut gens = triple.generators.clone();
    for a in &triple.generators {
        gens.push(ComplexMatrix::commutator(&triple.d, a));
    }
    generate_algebra(triple.dim, &gens, triple.tol)
}

/// Where a witness was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    /// An element of `Cl_D(A)'` outside the target span.
    Commutant,
    /// An element of the target span outside `Cl_D(A)'`.
    Target,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub source: WitnessSource,
    pub operator: ComplexMatrix,
    pub distance: f64,
}

/// Result of a commutant-equality test `Cl_D(A)' = T`, with the reverse
/// equality `T' = Cl_D(A)` as a cross-check.
#[derive(Clone, Debug, Serialize)]
pub struct MoritaVerdict {
    pub holds: bool,
    pub residual: f64,
    pub reverse_holds: bool,
    pub reverse_residual: f64,
    pub commutant_dim: usize,
    pub target_dim: usize,
    pub witness: Option<Witness>,
}

fn morita(cl: &OperatorSpace, cl_prime: &OperatorSpace, target: &OperatorSpace) -> Result<MoritaVerdict> {
    let (holds, residual) = equal_spaces(cl_prime, target)?;
    let target_prime = commutant(target)?;
    let (reverse_holds, reverse_residual) = equal_spaces(&target_prime, cl)?;
    let witness = if holds {
        None
    } else {
        let (src, from, to) = match target.farthest_element(cl_prime) {
            Some((_, r)) if r > target.tol().residual => (WitnessSource::Commutant, cl_prime, target),
            _ => (WitnessSource::Target, target, cl_prime),
        };
        to.farthest_element(from).map(|(k, distance)| Witness {
            source: src,
            operator: from.element(k),
            distance,
        })
    };
    Ok(MoritaVerdict {
        holds,
        residual,
        reverse_holds,
        reverse_residual,
        commutant_dim: cl_prime.dim(),
        target_dim: target.dim(),
        witness,
    })
}

/// Spans used by the spin and Hodge checks, computed once.
pub struct CliffordData {
    pub algebra: OperatorSpace,
    pub clifford: OperatorSpace,
    pub commutant: OperatorSpace,
}

impl CliffordData {
    pub fn compute(triple: &FiniteSpectralTriple) -> Result<Self> {
        let algebra = triple.algebra()?;
        let clifford = clifford(triple)?;
        let commutant = commutant(&clifford)?;
        Ok(Self {
            algebra,
            clifford,
            commutant,
        })
    }
}

/// Spin: `Cl_D(A)' = span{J a† J⁻¹}`.
pub fn spin_check(triple: &FiniteSpectralTriple) -> Result<MoritaVerdict> {
    spin_check_on(triple, &CliffordData::compute(triple)?)
}

pub fn spin_check_on(triple: &FiniteSpectralTriple, data: &CliffordData) -> Result<MoritaVerdict> {
    let j = triple.j()?;
    let target = data.algebra.map_isometric(|a| j.right_action(a));
    morita(&data.clifford, &data.commutant, &target)
}

/// Hodge: order 2 holds and `Cl_D(A)' = J·Cl_D(A)·J⁻¹`.
#[derive(Clone, Debug, Serialize)]
pub struct HodgeVerdict {
    pub holds: bool,
    pub order2: OrderVerdict,
    pub morita: MoritaVerdict,
}

pub fn hodge_check(triple: &FiniteSpectralTriple) -> Result<HodgeVerdict> {
    hodge_check_on(triple, &CliffordData::compute(triple)?)
}

pub fn hodge_check_on(triple: &FiniteSpectralTriple, data: &CliffordData) -> Result<HodgeVerdict> {
    let j = triple.j()?;
    let order2 = check_order_on(triple, &data.algebra, 2)?;
    let target = j.conjugate_space(&data.clifford);
    let morita = morita(&data.clifford, &data.commutant, &target)?;
    Ok(HodgeVerdict {
        holds: order2.holds && morita.holds,
        order2,
        morita,
    })
}

/// Everything [`check_order`], [`detect_signs`], [`ko_dimension`],
/// [`spin_check`] and [`hodge_check`] produce for one triple.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub dim: usize,
    pub algebra_dim: usize,
    pub clifford_dim: usize,
    pub clifford_commutant_dim: usize,
    pub order0: Option<OrderVerdict>,
    pub order1: Option<OrderVerdict>,
    pub order2: Option<OrderVerdict>,
    pub signs: Option<SignProfile>,
    pub ko_dim: Option<KoDimension>,
    pub spin: Option<MoritaVerdict>,
    pub hodge: Option<HodgeVerdict>,
}

/// Validates `triple` and runs every check. Checks needing `J` are skipped
/// (reported as absent) when it is missing.
pub fn analyze(triple: &FiniteSpectralTriple) -> Result<PropertyReport> {
    triple.validate()?;
    let data = CliffordData::compute(triple)?;
    let mut report = PropertyReport {
        dim: triple.dim,
        algebra_dim: data.algebra.dim(),
        clifford_dim: data.clifford.dim(),
        clifford_commutant_dim: data.commutant.dim(),
        order0: None,
        order1: None,
        order2: None,
        signs: None,
        ko_dim: None,
        spin: None,
        hodge: None,
    };
    if triple.real.is_some() {
        report.order0 = Some(check_order_on(triple, &data.algebra, 0)?);
        report.order1 = Some(check_order_on(triple, &data.algebra, 1)?);
        let signs = detect_signs(triple)?;
        report.ko_dim = Some(ko_dimension(&signs)?);
        report.signs = Some(signs);
        report.spin = Some(spin_check_on(triple, &data)?);
        let hodge = hodge_check_on(triple, &data)?;
        report.order2 = Some(hodge.order2.clone());
        report.hodge = Some(hodge);
    }
    Ok(report)
}
