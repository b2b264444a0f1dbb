//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion fails if any of its checks fails or if it exceeds its time
//! limit. Criteria listed in `KNOWN_FAILURES` are expected to fail, for a
//! reason printed with them; the process exits non-zero on any other failure,
//! and also if a known failure starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use strata_core::exec::Mode;
use strata_core::hecke::HeckeCase;
use strata_core::padic::Ctx;
use strata_core::suites::{self, Check, SuiteReport};
use strata_core::Result;

const P: u64 = 3;
const SEED: u64 = 20240601;
const PRECISION: u16 = 20;
const CHARPOLY_PER_ROW: usize = 500;

const LIMIT_GOLDENS: Duration = Duration::from_secs(1);
const LIMIT_DUALITY: Duration = Duration::from_secs(1);
const LIMIT_COUNTS: Duration = Duration::from_secs(60);
const LIMIT_CHARPOLY: Duration = Duration::from_secs(60);
const LIMIT_REDUCTION: Duration = Duration::from_secs(1);
const LIMIT_INDICES: Duration = Duration::from_secs(300);
const LIMIT_HECKE: Duration = Duration::from_secs(900);
const LIMIT_ETA: Duration = Duration::from_secs(60);
const LIMIT_STRUCTURE: Duration = Duration::from_secs(10);
const LIMIT_GAUSS: Duration = Duration::from_secs(1);

struct KnownFailure {
    number: u32,
    why: &'static str,
    /// The only check ids allowed to fail.
    covers: fn(&str) -> bool,
}

fn stated_case_d_twist(id: &str) -> bool {
    id.starts_with("d.") && id.contains(".twist.s2.") && !id.contains(".spread")
}

/// Criteria that fail for a documented mathematical reason.
const KNOWN_FAILURES: [KnownFailure; 1] = [KnownFailure {
    number: 7,
    why: "case d twisted s2 relation at m >= 2: the left side is spread over q double cosets \
          (nu_t = mu + p^(m-1) t sqrt(eps)), not the single coset with constant q^2 / -q^3; \
          the spread identity passes",
    covers: stated_case_d_twist,
}];

fn merge(name: &str, parts: Vec<SuiteReport>) -> SuiteReport {
    let mut out = SuiteReport { suite: name.into(), checks: Vec::new(), relations: Vec::new() };
    for p in parts {
        out.checks.extend(p.checks);
        out.relations.extend(p.relations);
    }
    out
}

fn summary(r: &SuiteReport) -> String {
    let fails: Vec<&Check> = r.failures();
    let total = r.checks.len();
    if fails.is_empty() {
        format!("{total}/{total} checks")
    } else {
        let ids: Vec<String> = fails.iter().take(8).map(|c| format!("{} ({})", c.id, c.detail)).collect();
        format!("{}/{total} checks; failing: {}", total - fails.len(), ids.join("; "))
    }
}

struct Outcome {
    number: u32,
    passed: bool,
    /// Failing check ids; `None` when the run errored or overran its limit.
    failing: Option<Vec<String>>,
}

fn run(number: u32, name: &str, limit: Duration, f: impl FnOnce() -> Result<SuiteReport>) -> Outcome {
    let start = Instant::now();
    let res = f();
    let t = start.elapsed();
    let (passed, detail, failing) = match res {
        Ok(r) => {
            let ids = r.failures().iter().map(|c| c.id.clone()).collect();
            (r.passed() && t <= limit, summary(&r), if t <= limit { Some(ids) } else { None })
        }
        Err(e) => (false, format!("error: {e}"), None),
    };
    let verdict = if passed { "PASS" } else { "FAIL" };
    let over = if t > limit { " (over time limit)" } else { "" };
    println!(
        "criterion {number:>2} {verdict}  {name}  [{:.2}s / {}s{over}]  {detail}",
        t.as_secs_f64(),
        limit.as_secs()
    );
    Outcome { number, passed, failing }
}

fn main() -> ExitCode {
    let c = Ctx::new(P, PRECISION).expect("context");
    let mode = Mode::Auto;
    let mut out = Vec::new();

    out.push(run(1, "filtration goldens", LIMIT_GOLDENS, || Ok(suites::goldens(&c))));
    out.push(run(2, "trace duality and sigma on standard sequences", LIMIT_DUALITY, || Ok(suites::duality(&c))));
    out.push(run(3, "quotient counting at p=3", LIMIT_COUNTS, || suites::counts(&c)));
    out.push(run(4, "characteristic polynomial case law", LIMIT_CHARPOLY, || {
        suites::charpoly(&c, CHARPOLY_PER_ROW, SEED, mode)
    }));
    out.push(run(5, "strict reduction cases a, b, c", LIMIT_REDUCTION, || suites::reduction(&c, SEED)));
    out.push(run(6, "coset index lemmas at q=3", LIMIT_INDICES, || {
        Ok(merge("indices", vec![suites::indices(P, 1)?, suites::indices(P, 2)?]))
    }));
    out.push(run(7, "Hecke relations at q=3", LIMIT_HECKE, || {
        let mut parts = Vec::new();
        for case in [HeckeCase::C, HeckeCase::D, HeckeCase::A] {
            for m in [1, 2] {
                parts.push(suites::hecke(P, case, m, SEED, mode)?);
            }
        }
        Ok(merge("hecke", parts))
    }));
    out.push(run(8, "eta consistency", LIMIT_ETA, || {
        let mut parts = Vec::new();
        for case in [HeckeCase::C, HeckeCase::D, HeckeCase::A] {
            for m in [1, 2] {
                parts.push(suites::eta(P, case, m, SEED, m == 1)?);
            }
        }
        Ok(merge("eta", parts))
    }));
    out.push(run(9, "graded ad(beta) and decomposition", LIMIT_STRUCTURE, || suites::structure(P, 1, SEED)));
    out.push(run(10, "Gauss sum at p in {3, 5}", LIMIT_GAUSS, || suites::gauss(&[3, 5])));

    let mut unexpected = 0;
    for o in &out {
        match KNOWN_FAILURES.iter().find(|k| k.number == o.number) {
            Some(k) if !o.passed => {
                let only_known = o.failing.as_ref().is_some_and(|ids| ids.iter().all(|id| (k.covers)(id)));
                if only_known {
                    println!("criterion {:>2} expected failure: {}", k.number, k.why);
                } else {
                    println!("criterion {:>2} fails beyond its documented failure", k.number);
                    unexpected += 1;
                }
            }
            Some(k) => {
                println!("criterion {:>2} is listed as a known failure but passed", k.number);
                unexpected += 1;
            }
            None if !o.passed => unexpected += 1,
            None => {}
        }
    }
    let passed = out.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected results", out.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
