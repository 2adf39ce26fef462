use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ncgverify::fiber::{fiber_report, DEFAULT_CAP};
use ncgverify::json::{triple_from_json, triple_to_json};
use ncgverify::spectral::analyze;
use ncgverify::standard_model::{
    build_sm_triple, generic_yukawa, modulus_grid, scan_csv, sm_report, theorem_scan, three_gen_report,
    ScanRow, SmReport, Yukawa,
};
use ncgverify::{c64, ComplexMatrix, Error, Tolerance};

const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_COUNT: u8 = 4;
const EXIT_DISAGREEMENT: u8 = 5;

#[derive(Parser)]
#[command(name = "ncgverify", version, about = "Checks finite real spectral triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a triple stored as JSON.
    Check {
        file: PathBuf,
        /// Rank tolerance; overrides the file's `tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Build and analyze the internal Standard Model triple.
    Sm(Couplings),
    /// Compare predicted and computed Hodge verdicts over a grid of couplings.
    SmScan {
        /// JSON list of 5-tuples (numbers or [re, im] pairs), or
        /// {"values": [...], "r": x} for a modulus grid.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Leave out the runtime column so repeated scans are byte-identical.
        #[arg(long)]
        no_runtime: bool,
    },
    /// Three generations with seeded generic couplings.
    ThreeGen {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Exterior algebra sign and Morita report.
    Fiber {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Write the Standard Model triple as triple JSON.
    ExportSm {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        couplings: Couplings,
    },
}

/// Scalars for one generation (defaults 1, 2, 3, 4, 1) or Matrix JSON,
/// inline or as a file path, for several.
#[derive(Args)]
struct Couplings {
    #[arg(long, default_value_t = 1)]
    gens: usize,
    #[arg(long)]
    ynu: Option<String>,
    #[arg(long)]
    ye: Option<String>,
    #[arg(long)]
    yu: Option<String>,
    #[arg(long)]
    yd: Option<String>,
    #[arg(long)]
    yr: Option<String>,
    /// Read scalar couplings as `re,im`.
    #[arg(long)]
    complex_pairs: bool,
    /// Seeded generic couplings for several generations.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::InvalidParameter(_) => EXIT_INPUT,
            Error::CountMismatch { .. } => EXIT_COUNT,
            _ => EXIT_INVARIANT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Check { file, tol } => cmd_check(&file, tol),
        Command::Sm(c) => cmd_sm(&c),
        Command::SmScan {
            grid,
            out,
            tol,
            no_runtime,
        } => cmd_sm_scan(&grid, &out, tolerance(tol)?, !no_runtime),
        Command::ThreeGen { seed, tol } => {
            let report = three_gen_report(&generic_yukawa(3, seed), Some(seed), tolerance(tol)?)?;
            finish_sm(&report)
        }
        Command::Fiber { n, cap, tol } => {
            let report = fiber_report(n, cap, tolerance(tol)?)?;
            print_json(&report)?;
            eprintln!(
                "fiber n={n}: signs {}, morita {:?}",
                serde_json::to_string(&report.signs).map_err(Error::from)?,
                report.morita
            );
            Ok(())
        }
        Command::ExportSm { out, couplings } => {
            let (y, _) = couplings.yukawa()?;
            let t = build_sm_triple(&y, tolerance(couplings.tol)?)?;
            write_file(&out, &triple_to_json(&t.triple)?)?;
            eprintln!("wrote {} ({}-dimensional)", out.display(), t.triple.dim);
            Ok(())
        }
    }
}

fn tolerance(tol: f64) -> CliResult<Tolerance> {
    if !(tol > 0.0) {
        return Err(Failure::input(format!("tolerance must be positive, got {tol}")));
    }
    Ok(Tolerance::from_rank(tol))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
    Ok(())
}

fn cmd_check(file: &Path, tol: Option<f64>) -> CliResult<()> {
    let mut triple = triple_from_json(&read_file(file)?)?;
    if let Some(t) = tol {
        triple.tol = tolerance(t)?;
    }
    let report = analyze(&triple)?;
    print_json(&report)?;
    eprintln!(
        "dim {}, algebra {}, clifford {}, ko {:?}, spin {:?}, hodge {:?}",
        report.dim,
        report.algebra_dim,
        report.clifford_dim,
        report.ko_dim.as_ref().map(|k| &k.candidates),
        report.spin.as_ref().map(|s| s.holds),
        report.hodge.as_ref().map(|h| h.holds)
    );
    Ok(())
}

fn cmd_sm(c: &Couplings) -> CliResult<()> {
    let (y, seed) = c.yukawa()?;
    let tol = tolerance(c.tol)?;
    let report = match c.gens {
        1 => sm_report(&build_sm_triple(&y, tol)?)?,
        3 => three_gen_report(&y, seed, tol)?,
        n => return Err(Failure::input(format!("--gens must be 1 or 3, got {n}"))),
    };
    finish_sm(&report)
}

fn finish_sm(report: &SmReport) -> CliResult<()> {
    print_json(report)?;
    eprintln!(
        "generations {}: signs {}, ko {:?}, orders {}/{}/{}, spin {}, hodge {}{}",
        report.generations,
        serde_json::to_string(&report.signs).map_err(Error::from)?,
        report.ko_dim.candidates,
        report.order0.holds,
        report.order1.holds,
        report.order2.holds,
        report.spin.holds,
        report.hodge.holds,
        if report.hodge_exploratory { " (exploratory)" } else { "" }
    );
    report.verify()?;
    Ok(())
}

impl Couplings {
    fn flags(&self) -> [&Option<String>; 5] {
        [&self.ynu, &self.ye, &self.yu, &self.yd, &self.yr]
    }

    fn yukawa(&self) -> CliResult<(Yukawa, Option<u64>)> {
        let given = self.flags().iter().filter(|f| f.is_some()).count();
        if self.gens == 0 {
            return Err(Failure::input("--gens must be positive"));
        }
        if self.gens > 1 && given == 0 {
            let seed = self
                .seed
                .ok_or_else(|| Failure::input("several generations need --seed or all five coupling matrices"))?;
            return Ok((generic_yukawa(self.gens, seed), Some(seed)));
        }
        if self.gens > 1 && given < 5 {
            return Err(Failure::input("give all five coupling matrices or none"));
        }
        let defaults = [1.0, 2.0, 3.0, 4.0, 1.0];
        let mut m = Vec::with_capacity(5);
        for (flag, default) in self.flags().into_iter().zip(defaults) {
            m.push(match flag {
                None => ComplexMatrix::scalar(1, c64::new(default, 0.0)),
                Some(text) => self.parse_coupling(text)?,
            });
        }
        let [nu, e, u, d, r]: [ComplexMatrix; 5] = m.try_into().map_err(|_| Failure::input("five couplings"))?;
        Ok((Yukawa { nu, e, u, d, r }, None))
    }

    fn parse_coupling(&self, text: &str) -> CliResult<ComplexMatrix> {
        if let Some(z) = parse_scalar(text, self.complex_pairs) {
            return Ok(ComplexMatrix::scalar(1, z));
        }
        let json = if text.trim_start().starts_with('{') {
            text.to_string()
        } else {
            read_file(Path::new(text))?
        };
        serde_json::from_str(&json).map_err(|e| Failure::input(format!("coupling {text:?}: {e}")))
    }
}

fn parse_scalar(text: &str, pairs: bool) -> Option<c64> {
    if pairs {
        let (re, im) = text.split_once(',')?;
        Some(c64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
    } else {
        Some(c64::new(text.trim().parse().ok()?, 0.0))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> c64 {
        match *self {
            Entry::Real(x) => c64::new(x, 0.0),
            Entry::Complex([re, im]) => c64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridFile {
    Points(Vec<[Entry; 5]>),
    Modulus { values: Vec<f64>, r: f64 },
}

fn cmd_sm_scan(grid: &Path, out: &Path, tol: Tolerance, with_runtime: bool) -> CliResult<()> {
    let text = read_file(grid)?;
    let file: GridFile =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: not a grid: {e}", grid.display())))?;
    let points: Vec<[c64; 5]> = match file {
        GridFile::Points(p) => p.iter().map(|t| t.each_ref().map(Entry::value)).collect(),
        GridFile::Modulus { values, r } => modulus_grid(&values, r),
    };
    let rows = theorem_scan(&points, tol)?;
    write_file(out, &scan_csv(&rows, with_runtime))?;
    let near = rows.iter().filter(|r| r.near_degenerate).count();
    let verdict = check_scan(&rows);
    eprintln!(
        "{} points, {} near-degenerate, {}; wrote {}",
        rows.len(),
        near,
        match &verdict {
            Ok(()) => "no disagreements".to_string(),
            Err(f) => f.message.clone(),
        },
        out.display()
    );
    verdict
}

fn check_scan(rows: &[ScanRow]) -> CliResult<()> {
    let bad: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_disagreement()).collect();
    if bad.is_empty() {
        return Ok(());
    }
    Err(Failure {
        code: EXIT_DISAGREEMENT,
        message: format!("disagreement at grid rows {bad:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(predicted: bool, computed: bool, lemma_b: Option<bool>, near: bool) -> ScanRow {
        ScanRow {
            parameters: [c64::new(1.0, 0.0); 5],
            predicted,
            computed,
            lemma_b,
            near_degenerate: near,
            clifford_dim: 0,
            commutant_dim: 0,
            runtime_ms: 0.0,
        }
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        let code = |e: Error| Failure::from(e).code;
        assert_eq!(code(Error::InvalidParameter("x".into())), EXIT_INPUT);
        assert_eq!(code(serde_json::from_str::<u8>("x").unwrap_err().into()), EXIT_INPUT);
        assert_eq!(
            code(Error::CountMismatch {
                what: "dim A'",
                expected: 112,
                found: 111
            }),
            EXIT_COUNT
        );
        assert_eq!(
            code(Error::AxiomViolation {
                axiom: "D selfadjointness".into(),
                residual: 1.0
            }),
            EXIT_INVARIANT
        );
        assert_eq!(code(Error::ClaimViolation("x".into())), EXIT_INVARIANT);
    }

    #[test]
    fn scan_disagreements_exit_with_their_own_code() {
        assert!(check_scan(&[row(true, true, Some(true), false), row(false, false, Some(false), false)]).is_ok());
        // a failed prediction inside the margin is reported, not asserted
        assert!(check_scan(&[row(true, false, Some(false), true)]).is_ok());
        let f = check_scan(&[row(true, true, Some(true), false), row(true, false, Some(false), false)]).unwrap_err();
        assert_eq!(f.code, EXIT_DISAGREEMENT);
        assert!(f.message.contains("[1]"));
        // the two methods disagreeing
        assert_eq!(check_scan(&[row(false, false, Some(true), false)]).unwrap_err().code, EXIT_DISAGREEMENT);
    }
}
