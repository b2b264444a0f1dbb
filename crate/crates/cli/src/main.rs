use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use strata_core::exec::Mode;
use strata_core::filtration::{golden_tables, named_sequence, shape};
use strata_core::hecke::HeckeCase;
use strata_core::lattice::HermSpace;
use strata_core::matrix::Shape;
use strata_core::padic::{is_odd_prime, max_precision, Ctx};
use strata_core::suites::{self, SuiteReport, CHARPOLY_ROWS};
use strata_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "strata", version, about = "Lattice sequences, skew strata and Hecke relations for unramified U(2,2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the standard strict self-dual sequences with their allowed (n, e) rows.
    Sequences {
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
    },
    /// Print the exponent grids of a_k for k in a range.
    Filtration(FiltrationArgs),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FiltrationArgs {
    /// Sequence label: st4, st30, st31, st20, st21, st10, st11, L1 or L2.
    label: String,
    /// Inclusive range `a..b`, or a single level.
    #[arg(default_value = "0..1", value_parser = parse_range)]
    range: (i32, i32),
    #[arg(long, default_value_t = 3, value_parser = parse_prime)]
    p: u64,
    /// Compare against the shipped reference tables.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 3, value_parser = parse_prime)]
    p: u64,
    /// Hecke case; all three when omitted.
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(i32).range(1..))]
    m: i32,
    /// Working precision in p-adic digits for the lattice and strata suites.
    #[arg(long, env = "STRATA_PRECISION")]
    precision: Option<u16>,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    /// Random strata per catalogue row in the charpoly suite.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Suite {
    Goldens,
    Duality,
    Counts,
    Charpoly,
    Reduction,
    Indices,
    Hecke,
    Eta,
    Structure,
    Gauss,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    A,
    C,
    D,
}

impl From<CaseArg> for HeckeCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::A => HeckeCase::A,
            CaseArg::C => HeckeCase::C,
            CaseArg::D => HeckeCase::D,
        }
    }
}

fn parse_prime(s: &str) -> Result<u64, String> {
    let p: u64 = s.parse().map_err(|e| format!("{e}"))?;
    if is_odd_prime(p) && p < 128 {
        Ok(p)
    } else {
        Err(format!("{p} is not an odd prime below 128"))
    }
}

fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: i32 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: i32 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// Smallest working precision accepted for a run at level `m`.
fn min_precision(m: i32) -> u16 {
    12 + 2 * m.clamp(1, 100) as u16
}

#[derive(Serialize)]
struct CatalogueRow {
    sequence: &'static str,
    lattices: Vec<&'static str>,
    e: i32,
    d: Option<i32>,
    n: i32,
    gcd: i32,
    e_over_gcd: i32,
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn catalogue(c: &Ctx) -> Result<Vec<CatalogueRow>, Error> {
    let sp = HermSpace::split(c);
    CHARPOLY_ROWS
        .iter()
        .map(|&(s, n, _)| {
            let seq = s.build(c);
            let e = seq.e();
            let g = gcd(n, e);
            Ok(CatalogueRow {
                sequence: s.label(),
                lattices: s.subset().to_vec(),
                e,
                d: seq.self_duality_index(&sp, c)?,
                n,
                gcd: g,
                e_over_gcd: e / g,
            })
        })
        .collect()
}

fn cmd_sequences(output: Output) -> ExitCode {
    let c = Ctx::new(3, 20).expect("p = 3 context");
    let rows = match catalogue(&c) {
        Ok(r) => r,
        Err(e) => return error_exit(&e),
    };
    match output {
        Output::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serializable")),
        Output::Text => {
            println!("{:<6} {:<12} {:>2} {:>3} {:>9} {:>8}", "seq", "lattices", "e", "d", "gcd(n,e)", "e/gcd");
            for r in &rows {
                let d = r.d.map_or("-".to_string(), |d| d.to_string());
                println!(
                    "{:<6} {:<12} {:>2} {:>3} {:>9} {:>8}",
                    r.sequence,
                    r.lattices.join(","),
                    r.e,
                    d,
                    r.gcd,
                    r.e_over_gcd
                );
            }
        }
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct Grid {
    k: i32,
    shape: Shape<4>,
    /// `None` without `--check` or when no reference grid exists for `k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_reference: Option<bool>,
}

fn cmd_filtration(a: &FiltrationArgs) -> ExitCode {
    let c = match Ctx::new(a.p, 20) {
        Ok(c) => c,
        Err(e) => return error_exit(&e),
    };
    let Some(seq) = named_sequence(&c, &a.label) else {
        eprintln!("error: unknown sequence label {:?}", a.label);
        return ExitCode::from(EXIT_USAGE);
    };
    let reference = golden_tables().into_iter().find(|t| t.sequence == a.label);
    if a.check && reference.is_none() {
        eprintln!("error: no reference table for {:?}", a.label);
        return ExitCode::from(EXIT_USAGE);
    }
    let grids: Vec<Grid> = (a.range.0..=a.range.1)
        .map(|k| {
            let s = shape(&seq, k);
            let matches_reference = if a.check {
                reference.as_ref().and_then(|t| t.shapes.get(&k.to_string())).map(|want| *want == s)
            } else {
                None
            };
            Grid { k, shape: s, matches_reference }
        })
        .collect();
    match a.output {
        Output::Json => println!("{}", serde_json::to_string_pretty(&grids).expect("serializable")),
        Output::Text => {
            println!("{} (e = {})", a.label, seq.e());
            for g in &grids {
                let tag = match g.matches_reference {
                    Some(true) => "  matches reference",
                    Some(false) => "  DIFFERS from reference",
                    None => "",
                };
                println!("k = {}{tag}", g.k);
                for row in &g.shape {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
                    println!("  {}", cells.join(""));
                }
            }
        }
    }
    if grids.iter().any(|g| g.matches_reference == Some(false)) {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}

#[derive(Serialize)]
struct RunConfig {
    p: u64,
    precision: u16,
    case: Option<&'static str>,
    m: i32,
    seed: u64,
}

#[derive(Serialize)]
struct VerifyReport {
    config: RunConfig,
    passed: bool,
    suites: Vec<SuiteReport>,
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    required_precision: Option<u32>,
}

fn run_suite(suite: Suite, a: &VerifyArgs, c: &Ctx) -> Result<Vec<SuiteReport>, Error> {
    let mode = if a.sequential { Mode::Sequential } else { Mode::Auto };
    let cases: Vec<HeckeCase> = match a.case {
        Some(k) => vec![k.into()],
        None => vec![HeckeCase::C, HeckeCase::D, HeckeCase::A],
    };
    Ok(match suite {
        Suite::Goldens => vec![suites::goldens(c)],
        Suite::Duality => vec![suites::duality(c)],
        Suite::Counts => vec![suites::counts(c)?],
        Suite::Charpoly => vec![suites::charpoly(c, a.samples, a.seed, mode)?],
        Suite::Reduction => vec![suites::reduction(c, a.seed)?],
        Suite::Indices => vec![suites::indices(a.p, a.m)?],
        Suite::Hecke => cases.iter().map(|&k| suites::hecke(a.p, k, a.m, a.seed, mode)).collect::<Result<_, _>>()?,
        Suite::Eta => cases.iter().map(|&k| suites::eta(a.p, k, a.m, a.seed, a.m == 1)).collect::<Result<_, _>>()?,
        Suite::Structure => vec![suites::structure(a.p, a.m, a.seed)?],
        Suite::Gauss => vec![suites::gauss(&[a.p])?],
        Suite::All => {
            let mut out = Vec::new();
            for s in [
                Suite::Goldens,
                Suite::Duality,
                Suite::Counts,
                Suite::Charpoly,
                Suite::Reduction,
                Suite::Indices,
                Suite::Hecke,
                Suite::Eta,
                Suite::Structure,
                Suite::Gauss,
            ] {
                out.extend(run_suite(s, a, c)?);
            }
            out
        }
    })
}

fn cmd_verify(a: &VerifyArgs) -> ExitCode {
    let need = min_precision(a.m);
    let precision = a.precision.unwrap_or(need.max(20)).min(max_precision(a.p));
    if precision < need {
        let e = Error::precision(format!("run at m = {}", a.m), need as u32);
        return report_error(&e, a.output);
    }
    let c = match Ctx::new(a.p, precision) {
        Ok(c) => c,
        Err(e) => return report_error(&e, a.output),
    };
    let mut reports = match run_suite(a.suite, a, &c) {
        Ok(r) => r,
        Err(e) => return report_error(&e, a.output),
    };
    for r in &mut reports {
        r.checks.sort_by(|x, y| x.id.cmp(&y.id));
        r.relations.sort_by(|x, y| x.relation_id.cmp(&y.relation_id));
    }
    let passed = reports.iter().all(|r| r.passed());
    let report = VerifyReport {
        config: RunConfig { p: a.p, precision, case: a.case.map(|k| HeckeCase::from(k).label()), m: a.m, seed: a.seed },
        passed,
        suites: reports,
    };
    match a.output {
        Output::Json => println!("{}", serde_json::to_string_pretty(&report).expect("serializable")),
        Output::Text => print_text(&report),
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn print_text(r: &VerifyReport) {
    for s in &r.suites {
        let fails = s.failures();
        let verdict = if fails.is_empty() { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<14} {}/{} checks", s.suite, s.checks.len() - fails.len(), s.checks.len());
        for f in fails {
            println!("      failed {}: {}", f.id, f.detail);
        }
    }
    println!("overall: {}", if r.passed { "PASS" } else { "FAIL" });
}

fn report_error(e: &Error, output: Output) -> ExitCode {
    if output == Output::Json {
        let required_precision = match e {
            Error::PrecisionExhausted { required, .. } => Some(*required),
            _ => None,
        };
        let r = ErrorReport { error: e.to_string(), required_precision };
        println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
    }
    error_exit(e)
}

fn error_exit(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sequences { output } => cmd_sequences(*output),
        Command::Filtration(a) => cmd_filtration(a),
        Command::Verify(a) => cmd_verify(a),
    }
}
