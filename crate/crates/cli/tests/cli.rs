use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ncgverify::json::triple_to_json;
use ncgverify::linalg::embed_left_right;
use ncgverify::spectral::{analyze, AntiUnitary, FiniteSpectralTriple};
use ncgverify::standard_model::{build_sm_triple, Yukawa};
use ncgverify::{c64, ComplexMatrix, Tolerance};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncgverify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `M_2` acting on itself by left multiplication, `J: x ↦ x†`.
fn regular_bimodule(d: ComplexMatrix) -> FiniteSpectralTriple {
    let id = ComplexMatrix::identity(2);
    let gens = (0..4)
        .map(|k| embed_left_right(&ComplexMatrix::unit(2, k / 2, k % 2), &id).unwrap())
        .collect();
    let u = ComplexMatrix::from_fn(4, 4, |r, c| {
        if c == (r % 2) * 2 + r / 2 {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    FiniteSpectralTriple::new(gens, d, Tolerance::default()).with_real_structure(AntiUnitary::new(u).unwrap())
}

#[test]
fn check_regular_bimodule() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m2.json");
    fs::write(&file, triple_to_json(&regular_bimodule(ComplexMatrix::zeros(4, 4))).unwrap()).unwrap();
    let out = run(&["check", path(&file)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["spin"]["holds"], true);
    assert_eq!(v["hodge"]["holds"], true);
    assert_eq!(v["algebra_dim"], 4);
}

#[test]
fn check_rejects_non_selfadjoint_dirac() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    fs::write(&file, triple_to_json(&regular_bimodule(ComplexMatrix::unit(4, 0, 1))).unwrap()).unwrap();
    let out = run(&["check", path(&file)]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("D selfadjointness") && err.contains("residual"), "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&run(&["check", path(&garbage)])), 2);
    assert_eq!(code(&run(&["check", path(&dir.path().join("missing.json"))])), 2);
    assert_eq!(code(&run(&["sm", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["sm", "--gens", "2"])), 2);
    assert_eq!(code(&run(&["sm", "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["fiber", "--n", "9"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn sm_hodge_verdicts() {
    let out = run(&["sm", "--ynu", "1", "--ye", "2", "--yu", "3", "--yd", "4", "--yr", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["hodge"]["holds"], true);
    assert_eq!(v["spin"]["holds"], false);
    assert_eq!(v["ko_dim"]["candidates"], serde_json::json!([6]));
    let c = &v["commutants"];
    assert_eq!((c["commutant_dim"].as_u64(), c["intersection_dim"].as_u64(), c["sum_dim"].as_u64()), (Some(112), Some(14), Some(210)));
    assert_eq!(v["lemma_b"]["steps"].as_array().unwrap().len(), 3);

    let out = run(&["sm", "--ynu", "1", "--ye", "2", "--yu", "1", "--yd", "2", "--yr", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["hodge"]["holds"], false);
}

#[test]
fn sm_accepts_complex_pairs_and_is_deterministic() {
    let args = ["sm", "--complex-pairs", "--ynu", "0.5,1", "--ye", "2,0", "--yu", "3,-1", "--yd", "4,0", "--yr", "1,0"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn export_then_check_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sm.json");
    let out = run(&["export-sm", "--out", path(&file), "--yu", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let checked = run(&["check", path(&file)]);
    assert_eq!(code(&checked), 0, "{}", stderr(&checked));

    let t = build_sm_triple(&Yukawa::real(1.0, 2.0, 5.0, 4.0, 1.0), Tolerance::default()).unwrap();
    let direct = serde_json::to_string_pretty(&analyze(&t.triple).unwrap()).unwrap();
    assert_eq!(String::from_utf8(checked.stdout).unwrap().trim_end(), direct);

    let v: Value = serde_json::from_str(&direct).unwrap();
    assert_eq!(v["ko_dim"]["candidates"], serde_json::json!([6]));
    assert_eq!(v["spin"]["holds"], false);
    assert!(v["spin"]["witness"].is_object());
}

#[test]
fn fiber_two_signs() {
    let out = run(&["fiber", "--n", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["signs"]["eps"], 1);
    assert_eq!(v["signs"]["eps_pp_hodge"], -1);
    assert_eq!(v["morita"], true);
    assert_eq!(v["dims"]["exterior"], 4);
}

#[test]
fn scan_writes_rows_in_grid_order() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, "[[1, 1, 2, 2, 1], [0, 1, 1, 1, 1], [1, [-1, 0], [0, 1], [0, -1], 1]]").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let r = run(&["sm-scan", "--grid", path(&grid), "--out", path(out), "--no-runtime"]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1;1;2;2;1,true,true,clear,"));
    assert!(lines[2].starts_with("0;1;1;1;1,false,false,"));
    assert!(lines[3].starts_with("1;-1;0+1i;0-1i;1,false,false,"));

    let modulus = dir.path().join("modulus.json");
    fs::write(&modulus, r#"{"values": [1, 2], "r": 1}"#).unwrap();
    let r = run(&["sm-scan", "--grid", path(&modulus), "--out", path(&a)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.lines().next().unwrap().ends_with(",runtime_ms"));

    fs::write(&grid, "[[1, 2, 3]]").unwrap();
    assert_eq!(code(&run(&["sm-scan", "--grid", path(&grid), "--out", path(&a)])), 2);
}

#[test]
fn three_generations_with_a_seed() {
    let out = run(&["three-gen", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["generations"], 3);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["order2"]["holds"], true);
    assert_eq!(v["spin"]["holds"], false);
    assert_eq!(v["hodge_exploratory"], true);
    assert!(v["commutants"].is_null());
}
