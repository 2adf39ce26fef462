//! JSON encodings: matrices as `{"rows", "cols", "entries": [[re, im], ...]}`
//! (row-major), operator spaces, and spectral triples.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::OperatorSpace;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, Tolerance};
use crate::spectral::{AntiUnitary, FiniteSpectralTriple};

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        let entries: Vec<c64> = r.entries.iter().map(|&[re, im]| c64::new(re, im)).collect();
        ComplexMatrix::from_row_major(r.rows, r.cols, &entries).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    dim: usize,
    tol: Tolerance,
    basis: Vec<ComplexMatrix>,
}

impl Serialize for OperatorSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr {
            dim: self.ambient(),
            tol: self.tol(),
            basis: self.elements(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SpaceRepr::deserialize(d)?;
        OperatorSpace::from_basis(r.dim, &r.basis, r.tol).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RealRepr {
    unitary: ComplexMatrix,
}

/// On-disk triple. `tol` is the rank tolerance; the residual tolerance is
/// derived from it.
#[derive(Serialize, Deserialize)]
struct TripleRepr {
    dim: usize,
    tol: f64,
    generators: Vec<ComplexMatrix>,
    #[serde(rename = "D")]
    d: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grading: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parity: Option<ComplexMatrix>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    j: Option<RealRepr>,
}

pub fn triple_to_json(t: &FiniteSpectralTriple) -> Result<String> {
    let repr = TripleRepr {
        dim: t.dim,
        tol: t.tol.rank,
        generators: t.generators.clone(),
        d: t.d.clone(),
        grading: t.grading.clone(),
        parity: t.parity.clone(),
        j: t.real.as_ref().map(|j| RealRepr {
            unitary: j.unitary().clone(),
        }),
    };
    Ok(serde_json::to_string(&repr)?)
}

pub fn triple_from_json(s: &str) -> Result<FiniteSpectralTriple> {
    let r: TripleRepr = serde_json::from_str(s)?;
    if !(r.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", r.tol)));
    }
    let mut t = FiniteSpectralTriple::new(r.generators, r.d, Tolerance::from_rank(r.tol));
    if t.dim != r.dim {
        return Err(Error::DimensionMismatch {
            context: "triple JSON",
            expected: format!("D of size {}", r.dim),
            found: format!("{}x{}", t.d.rows(), t.d.cols()),
        });
    }
    t.grading = r.grading;
    t.parity = r.parity;
    if let Some(j) = r.j {
        t.real = Some(AntiUnitary::new(j.unitary)?);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| c64::new(i as f64 + 0.1, j as f64 - 1.0 / 3.0));
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with("{\"rows\":2,\"cols\":3,\"entries\":[[0.1,"));
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrong_entry_count_is_an_error() {
        let bad = r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn space_round_trip() {
        let s = OperatorSpace::full(2, Tolerance::default());
        let text = serde_json::to_string(&s).unwrap();
        let back: OperatorSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dim(), 4);
        assert!(crate::algebra::equal_spaces(&s, &back).unwrap().0);
    }

    #[test]
    fn triple_round_trip() {
        let t = FiniteSpectralTriple::new(
            vec![ComplexMatrix::unit(2, 0, 0)],
            ComplexMatrix::zeros(2, 2),
            Tolerance::default(),
        )
        .with_grading(ComplexMatrix::identity(2))
        .with_real_structure(AntiUnitary::conjugation(2));
        let text = triple_to_json(&t).unwrap();
        let back = triple_from_json(&text).unwrap();
        assert_eq!(triple_to_json(&back).unwrap(), text);
        assert_eq!(back.tol, t.tol);
    }
}
