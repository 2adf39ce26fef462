#![allow(dead_code)]

use faer::Mat;
use ncgverify::algebra::OperatorSpace;
use ncgverify::spectral::{AntiUnitary, FiniteSpectralTriple};
use ncgverify::{c64, ComplexMatrix, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = random_matrix(n, n, rng);
    let q = a.as_mat().qr().compute_thin_Q();
    ComplexMatrix::from_mat(q)
}

pub fn conjugate_by(u: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    &(u * x) * &u.adjoint()
}

/// Dimension of `{X : [X, b] = 0}` from the stacked Kronecker form of all
/// constraints, one dense SVD.
pub fn dense_commutant_dim(n: usize, elems: &[ComplexMatrix], rank_tol: f64) -> usize {
    if elems.is_empty() {
        return n * n;
    }
    let nn = n * n;
    let mut k = Mat::<c64>::zeros(nn * elems.len(), nn);
    for (e, b) in elems.iter().enumerate() {
        // row-major vec: vec(Xb) = (I ⊗ bᵀ) vec(X), vec(bX) = (b ⊗ I) vec(X)
        for i in 0..n {
            for j in 0..n {
                let row = e * nn + i * n + j;
                for l in 0..n {
                    k[(row, i * n + l)] += b.get(l, j);
                    k[(row, l * n + j)] -= b.get(i, l);
                }
            }
        }
    }
    let s = k.singular_values().expect("svd");
    let top = s.iter().fold(0.0f64, |a, &b| a.max(b));
    nn - s.iter().filter(|&&x| x > rank_tol * top).count()
}

/// Matrix units of `⊕ M_{m_i} ⊗ I_{k_i}`, block `i` acting on `C^{m_i} ⊗ C^{k_i}`.
pub fn pattern_generators(pattern: &[(usize, usize)]) -> (usize, Vec<ComplexMatrix>) {
    let n: usize = pattern.iter().map(|&(m, k)| m * k).sum();
    let mut gens = Vec::new();
    let mut off = 0;
    for &(m, k) in pattern {
        for a in 0..m {
            for b in 0..m {
                let mut x = ComplexMatrix::zeros(n, n);
                for t in 0..k {
                    x.set(off + a * k + t, off + b * k + t, c64::new(1.0, 0.0));
                }
                gens.push(x);
            }
        }
        off += m * k;
    }
    (n, gens)
}

pub fn space(n: usize, elems: &[ComplexMatrix]) -> OperatorSpace {
    OperatorSpace::span(n, elems, Tolerance::default()).expect("span")
}

/// Every multiset of blocks `(m, k)` with `Σ m·k ≤ total`.
pub fn patterns(total: usize) -> Vec<Vec<(usize, usize)>> {
    let mut kinds = Vec::new();
    for m in 1..=total {
        for k in 1..=total / m {
            kinds.push((m, k));
        }
    }
    let mut out = Vec::new();
    fn grow(
        kinds: &[(usize, usize)],
        from: usize,
        left: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for i in from..kinds.len() {
            let (m, k) = kinds[i];
            if m * k <= left {
                cur.push((m, k));
                grow(kinds, i, left - m * k, cur, out);
                cur.pop();
            }
        }
    }
    grow(&kinds, 0, total, &mut Vec::new(), &mut out);
    out
}

/// The same triple in the basis `W·e_i`.
pub fn rotate(t: &FiniteSpectralTriple, w: &ComplexMatrix) -> FiniteSpectralTriple {
    let c = |x: &ComplexMatrix| conjugate_by(w, x);
    let mut out = FiniteSpectralTriple::new(t.generators.iter().map(c).collect(), c(&t.d), t.tol);
    out.grading = t.grading.as_ref().map(c);
    out.parity = t.parity.as_ref().map(c);
    out.real = t
        .real
        .as_ref()
        .map(|j| AntiUnitary::new(&(w * j.unitary()) * &w.transpose()).unwrap());
    out
}
