mod common;

use common::*;
use ncgverify::fiber::*;
use ncgverify::spectral::{GradingSign, Sign};
use ncgverify::{c64, ComplexMatrix, Tolerance};
use proptest::prelude::*;

/// Subsets of `{0..n}` as sorted index lists, ordered by size then
/// lexicographically.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Sign of the permutation sorting `list`, by counting inversions.
fn inversion_sign(list: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            if list[i] > list[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `e_j ∧ e_S`, moving `e_j` into place from the front.
fn wedge_oracle(n: usize, j: usize) -> ComplexMatrix {
    let subs = subsets(n);
    let pos = |s: &Vec<usize>| subs.iter().position(|t| t == s).unwrap();
    let mut w = ComplexMatrix::zeros(subs.len(), subs.len());
    for (k, s) in subs.iter().enumerate() {
        if s.contains(&j) {
            continue;
        }
        let mut list = vec![j];
        list.extend(s);
        let mut sorted = list.clone();
        sorted.sort_unstable();
        w.set(pos(&sorted), k, c64::new(inversion_sign(&list), 0.0));
    }
    w
}

/// `e_S ↦ i^{k(k−1)+m}·sign(S, Sᶜ)·e_{Sᶜ}`.
fn hodge_oracle(n: usize) -> ComplexMatrix {
    let subs = subsets(n);
    let pos = |s: &Vec<usize>| subs.iter().position(|t| t == s).unwrap();
    let m = n / 2;
    let mut out = ComplexMatrix::zeros(subs.len(), subs.len());
    for (k, s) in subs.iter().enumerate() {
        let comp: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
        let mut list = s.clone();
        list.extend(&comp);
        let e = s.len() * s.len().saturating_sub(1) + m;
        let phase = [c64::new(1.0, 0.0), c64::new(0.0, 1.0), c64::new(-1.0, 0.0), c64::new(0.0, -1.0)][e % 4];
        out.set(pos(&comp), k, phase.scale(inversion_sign(&list)));
    }
    out
}

fn vector(n: usize, seed: u64) -> Vec<c64> {
    let v = random_matrix(n, 1, &mut rng(seed));
    (0..n).map(|i| v.get(i, 0)).collect()
}

fn real_vector(n: usize, seed: u64) -> Vec<c64> {
    vector(n, seed).into_iter().map(|z| c64::new(z.re, 0.0)).collect()
}

#[test]
fn wedge_matches_the_sorting_oracle() {
    for n in 1..=5 {
        let ops = FiberOps::new(n).unwrap();
        for j in 0..n {
            assert_eq!(ops.wedge[j], wedge_oracle(n, j), "n = {n}, j = {j}");
            assert_eq!(ops.contract[j], wedge_oracle(n, j).adjoint());
        }
    }
}

#[test]
fn hodge_grading_matches_the_permutation_oracle() {
    for n in [2, 4, 6] {
        assert_eq!(chi_hodge(n).unwrap(), hodge_oracle(n), "n = {n}");
    }
    assert!(chi_hodge(3).is_err());
}

#[test]
fn canonical_anticommutation_up_to_eight() {
    for n in 1..=8 {
        let ops = FiberOps::new(n).unwrap();
        let id = ComplexMatrix::identity(ops.dim());
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let ac = ComplexMatrix::anticommutator(&ops.wedge[i], &ops.contract[j]);
                assert!(ac.distance(&id.scale_real(delta)) < 1e-12);
                assert!(ComplexMatrix::anticommutator(&ops.wedge[i], &ops.wedge[j]).hs_norm() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_relations(n in 1usize..=6, s in any::<u64>(), t in any::<u64>()) {
        let ops = FiberOps::new(n).unwrap();
        let (v, w) = (vector(n, s), vector(n, t));
        let dot: c64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let id = ComplexMatrix::identity(ops.dim());
        let target = id.scale(dot * -2.0);
        let (lv, lw) = (ops.lambda(&v).unwrap(), ops.lambda(&w).unwrap());
        let (rv, rw) = (ops.rho(&v).unwrap(), ops.rho(&w).unwrap());
        prop_assert!(ComplexMatrix::anticommutator(&lv, &lw).distance(&target) < 1e-11);
        prop_assert!(ComplexMatrix::anticommutator(&rv, &rw).distance(&target) < 1e-11);
        prop_assert!(ComplexMatrix::commutator(&lv, &rw).hs_norm() < 1e-11);
    }

    #[test]
    fn j_prime_carries_lambda_to_rho(n in 1usize..=6, s in any::<u64>()) {
        let ops = FiberOps::new(n).unwrap();
        let v = vector(n, s);
        let conj: Vec<c64> = v.iter().map(|z| z.conj()).collect();
        let lhs = ops.j_prime().conjugate(&ops.lambda(&v).unwrap());
        prop_assert!(lhs.distance(&ops.rho(&conj).unwrap()) < 1e-11);
    }

    #[test]
    fn gradings_are_odd_for_lambda(m in 1usize..=3, s in any::<u64>()) {
        let n = 2 * m;
        let ops = FiberOps::new(n).unwrap();
        let v = real_vector(n, s);
        let l = ops.lambda(&v).unwrap();
        let id = ComplexMatrix::identity(ops.dim());
        let parity = ops.chi_parity();
        let hodge = ops.chi_hodge().unwrap();
        for chi in [&parity, &hodge] {
            prop_assert!((chi * chi).distance(&id) < 1e-12);
            prop_assert!(chi.distance(&chi.adjoint()) < 1e-12);
            prop_assert!(ComplexMatrix::anticommutator(chi, &l).hs_norm() < 1e-11);
        }
        prop_assert!(ComplexMatrix::anticommutator(&parity, &ops.rho(&v).unwrap()).hs_norm() < 1e-11);
    }
}

#[test]
fn graded_relation_on_each_degree() {
    for n in [2, 4, 6] {
        let ops = FiberOps::new(n).unwrap();
        let chi = ops.chi_hodge().unwrap();
        let jp = ops.j_prime();
        for k in 0..ops.dim() {
            let mut e = ComplexMatrix::zeros(ops.dim(), 1);
            e.set(k, 0, c64::new(1.0, 0.0));
            let deg = ops.basis.degree(k);
            let s = if deg % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = jp.apply(&(&chi * &e));
            let rhs = (&chi * &jp.apply(&e)).scale_real(s);
            assert!(lhs.distance(&rhs) < 1e-12, "n = {n}, basis {k}");
        }
    }
}

#[test]
fn signs_and_ko_candidates() {
    let tol = Tolerance::default();
    let two = fiber_report(2, DEFAULT_CAP, tol).unwrap();
    assert_eq!(two.signs.eps, Sign::Plus);
    assert_eq!(two.signs.eps_pp_hodge, Some(GradingSign::Global(Sign::Minus)));
    assert_eq!(two.ko_candidates, Some(vec![6]));
    let four = fiber_report(4, DEFAULT_CAP, tol).unwrap();
    assert_eq!(four.signs.eps_pp_hodge, Some(GradingSign::Global(Sign::Plus)));
    assert_eq!(four.ko_candidates, Some(vec![0]));
    assert_eq!(
        four.signs.eps_pp_hodge_prime,
        Some(GradingSign::Graded {
            even: Sign::Plus,
            odd: Sign::Minus
        })
    );
}

#[test]
fn even_fibers_are_self_morita() {
    for n in [2, 4] {
        let r = fiber_report(n, DEFAULT_CAP, Tolerance::default()).unwrap();
        assert_eq!(r.morita, Some(true));
        let d = 1 << n;
        assert_eq!(
            (r.dims.exterior, r.dims.lambda_algebra, r.dims.rho_algebra, r.dims.lambda_commutant),
            (d, d, d, d)
        );
        assert!(r.residuals.graded_relation.unwrap() < 1e-12);
        assert!(r.residuals.clifford < 1e-11 && r.residuals.j_prime_intertwines < 1e-11);
    }
}

#[test]
fn odd_fibers_report_dimensions_only() {
    let r = fiber_report(3, DEFAULT_CAP, Tolerance::default()).unwrap();
    assert_eq!(r.m, None);
    assert_eq!(r.morita, None);
    assert_eq!(r.ko_candidates, None);
    assert_eq!(r.signs.eps_pp_hodge, None);
    assert_eq!(r.dims.exterior, 8);
}

#[test]
fn report_json_layout() {
    let r = fiber_report(2, DEFAULT_CAP, Tolerance::default()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["m"], 1);
    assert_eq!(v["signs"]["eps"], 1);
    assert_eq!(v["signs"]["eps_pp_hodge"], -1);
    assert_eq!(v["signs"]["eps_prime"], "out-of-scope");
    assert_eq!(v["morita"], true);
    assert_eq!(v["dims"]["exterior"], 4);
}

#[test]
fn cap_and_range_are_enforced() {
    assert!(fiber_report(9, DEFAULT_CAP, Tolerance::default()).is_err());
    assert!(fiber_report(0, DEFAULT_CAP, Tolerance::default()).is_err());
    assert!(FiberOps::new(17).is_err());
    assert!(lambda_op(3, &unit_vector(2, 0)).is_err());
}
