//! Verification suites with uniform, serializable reports. Shared by the
//! command-line front end and the acceptance harness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cyclo::{norm_gauss_sum, Omega};
use crate::error::Result;
use crate::exec::Mode;
use crate::filtration::{
    check_golden_tables, enumerate_group_quotient, golden_tables, group_closure_order, quotient_count, shape,
    sigma_stable_check, trace_dual_check, QuotientPart,
};
use crate::hecke::{
    ad_graded, alternating_words, decomposition_dims, degenerate_beta, double_coset_separation, eta_negative_control, eta_relations, eta_support,
    family_a_zeta, family_c_s2, family_d_s2, group_facts, lemma_index_exponent, verify_all, zeta_index_exponent,
    CaseSetup, Flavor, GroupJ, HeckeCase, RelationReport, Verdict,
};
use crate::lattice::{HermSpace, LatticeSeq, StandardSeq, N0, N1, N1_DUAL, N2, PI_N1_DUAL};
use crate::matrix::M4;
use crate::padic::Ctx;
use crate::strata::{char_poly, charpoly_oracle, random_fundamental_skew, strict_reduction, ReductionCase};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(id: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { id: id.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationReport>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), checks: Vec::new(), relations: Vec::new() }
    }

    fn push(&mut self, id: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(id, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Filtration shapes against the shipped reference tables.
pub fn goldens(c: &Ctx) -> SuiteReport {
    let mut r = SuiteReport::new("goldens");
    let bad = check_golden_tables(c);
    for t in golden_tables() {
        let wrong: Vec<i32> = bad.iter().filter(|(s, _)| *s == t.sequence).map(|b| b.1).collect();
        r.push(format!("shapes.{}", t.sequence), wrong.is_empty(), format!("{} levels, mismatched k: {wrong:?}", t.shapes.len()));
    }
    r
}

/// `a_n^* = a_{1-n}` and `sigma(a_n) = a_n` over one period of each standard sequence.
pub fn duality(c: &Ctx) -> SuiteReport {
    let mut r = SuiteReport::new("duality");
    for s in StandardSeq::ALL {
        let seq = s.build(c);
        let dual: Vec<i32> = (0..seq.e()).filter(|&n| !trace_dual_check(&seq, n)).collect();
        let sig: Vec<i32> = (0..seq.e()).filter(|&n| !sigma_stable_check(&seq, n)).collect();
        r.push(format!("trace_dual.{}", s.label()), dual.is_empty(), format!("failing n: {dual:?}"));
        r.push(format!("sigma_stable.{}", s.label()), sig.is_empty(), format!("failing n: {sig:?}"));
    }
    r
}

/// Rows `(sequence, n, r)` of the quotient counting comparison.
pub const COUNT_ROWS: [(StandardSeq, i32, i32); 3] =
    [(StandardSeq::St20, 1, 0), (StandardSeq::St20, 3, 1), (StandardSeq::St4, 3, 1)];

/// `|P_{r+1}/P_{n+1}| = |g_{r+1}/g_{n+1}| = |g_{-n}/g_{-r}|`, the first also by enumeration.
pub fn counts(c: &Ctx) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("counts");
    for (s, n, rr) in COUNT_ROWS {
        let seq = s.build(c);
        let g = quotient_count(&seq, rr, n, QuotientPart::Group)?;
        let plus = quotient_count(&seq, rr, n, QuotientPart::SkewPlus)?;
        let minus = quotient_count(&seq, rr, n, QuotientPart::SkewMinus)?;
        let id = format!("{}.n{n}.r{rr}", s.label());
        r.push(format!("{id}.shape"), g == plus && plus == minus, format!("p^{g}, p^{plus}, p^{minus}"));
        let brute = enumerate_group_quotient(&seq, rr, n, c)?;
        r.push(format!("{id}.enumerated"), brute == g, format!("enumerated p^{brute}"));
        if c.p.pow(g as u32) <= 20_000 {
            let order = group_closure_order(&seq, rr, n, c, 20_000)?;
            r.push(format!("{id}.closure"), order as u64 == c.p.pow(g as u32), format!("closure order {order}"));
        }
    }
    Ok(r)
}

/// Rows `(sequence, n, e / gcd(e, n))` satisfying the gcd conditions of the catalogue.
pub const CHARPOLY_ROWS: [(StandardSeq, i32, i32); 8] = [
    (StandardSeq::St4, 1, 4),
    (StandardSeq::St30, 1, 3),
    (StandardSeq::St31, 2, 3),
    (StandardSeq::St20, 1, 2),
    (StandardSeq::St21, 3, 2),
    (StandardSeq::St10, 1, 1),
    (StandardSeq::St11, 2, 1),
    (StandardSeq::St21, 2, 1),
];

/// Random fundamental skew strata classified by the shape of `phi_beta`,
/// with the determinant oracle and the sigma-twist symmetry.
pub fn charpoly(c: &Ctx, per_row: usize, seed: u64, mode: Mode) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("charpoly");
    let rows: Vec<usize> = (0..CHARPOLY_ROWS.len()).collect();
    let results = crate::exec::map(mode, &rows, |&i| -> Result<Check> {
        let (s, n, eff) = CHARPOLY_ROWS[i];
        let seq = s.build(c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut violations = 0;
        for _ in 0..per_row {
            let st = random_fundamental_skew(&mut rng, &seq, n, c, 1000)?;
            let rep = char_poly(&st)?;
            let ok = rep.effective_period == eff
                && rep.case_label.is_some()
                && charpoly_oracle(&st)? == rep.phi
                && rep.phi.sign_twist(eff as usize) == rep.phi.conj();
            if !ok {
                violations += 1;
            }
        }
        Ok(Check::new(format!("{}.n{n}", s.label()), violations == 0, format!("{per_row} strata, {violations} violations")))
    });
    for x in results {
        r.checks.push(x?);
    }
    Ok(r)
}

/// `strict_reduction` on constructed inputs for each branch of the case split.
pub fn reduction(c: &Ctx, seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("reduction");
    let sp = HermSpace::split(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(ReductionCase, LatticeSeq<4>, i32)> = vec![
        (ReductionCase::A, StandardSeq::St20.build(c).doubled(&sp, c)?, 2),
        (ReductionCase::A, StandardSeq::St20.build(c).doubled(&sp, c)?, 6),
        (ReductionCase::B, StandardSeq::St21.build(c), 2),
        (ReductionCase::B, StandardSeq::St21.build_translated(c, 1), 2),
        (ReductionCase::C, LatticeSeq::from_exponents(c, &sp, vec![N0, N0, N1, PI_N1_DUAL])?, 2),
        (ReductionCase::C, LatticeSeq::from_exponents(c, &sp, vec![N1_DUAL, N1, N2, N2])?, 6),
    ];
    for (want, seq, n) in inputs {
        let st = random_fundamental_skew(&mut rng, &seq, n, c, 1000)?;
        let red = strict_reduction(&st, c)?;
        let (e, e2) = (seq.e() as i64, red.seq.e() as i64);
        let level = n as i64 * e2 == red.n as i64 * e;
        let before = shape(&seq, n + 1);
        let after = shape(&red.seq, red.n + 1);
        let contained = (0..4).all(|i| (0..4).all(|j| before[i][j] <= after[i][j]));
        r.push(
            format!("case_{:?}.e{e}.n{n}", want).to_lowercase(),
            red.case == want && level && contained,
            format!("got case {:?}, n' = {}, e' = {e2}", red.case, red.n),
        );
    }
    Ok(r)
}

fn word_matrix(s: &CaseSetup, w: &[u8]) -> Result<M4> {
    let mut g = M4::identity(&s.ctx);
    for &i in w {
        g = g * s.s(i)?;
    }
    Ok(g)
}

fn word_label(w: &[u8]) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.iter().map(|i| format!("s{i}")).collect()
    }
}

/// Coset indices against the lemmas; enumerated families against the indices.
pub fn indices(p: u64, m: i32) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(&format!("indices.m{m}"));
    for case in [HeckeCase::C, HeckeCase::D] {
        let s = CaseSetup::new(case, p, m)?;
        for flavor in [Flavor::J, Flavor::JPrime] {
            let gj = GroupJ::new(&s, flavor)?;
            for w in alternating_words(1) {
                let g = word_matrix(&s, &w)?;
                let want = lemma_index_exponent(case, flavor, &w).expect("alternating word");
                let got = gj.index_exponent(&g)?;
                let oracle = gj.index_exponent_full(&g)?;
                let reps = gj.cosets(&g)?.reps.len();
                r.push(
                    format!("{}.{}.{}", case.label(), flavor.label(), word_label(&w)),
                    got == want && oracle == want && reps as u64 == p.pow(want),
                    format!("lemma q^{want}, lattice q^{got}, oracle q^{oracle}, {reps} cosets"),
                );
            }
        }
    }
    let s = CaseSetup::new(HeckeCase::A, p, m)?;
    for flavor in [Flavor::J, Flavor::JPrime] {
        let gj = GroupJ::new(&s, flavor)?;
        for t in -2..=2 {
            let g = s.zeta(t)?;
            let want = zeta_index_exponent(flavor, t);
            let got = gj.index_exponent(&g)?;
            let oracle = gj.index_exponent_full(&g)?;
            let reps = gj.cosets(&g)?.reps.len();
            r.push(
                format!("a.{}.zeta^{t}", flavor.label()),
                got == want && oracle == want && reps as u64 == p.pow(want),
                format!("lemma q^{want}, lattice q^{got}, oracle q^{oracle}, {reps} cosets"),
            );
        }
    }
    if m == 1 {
        let s = CaseSetup::new(HeckeCase::D, p, 1)?;
        let (n, bad) = double_coset_separation(&s, 1, 1)?;
        r.push("d.double_cosets.short_words", bad.is_empty(), format!("{n} memberships, failures {bad:?}"));
    }
    // Explicit families: they need odd m (cases c, d) or even m (case a).
    let fams: Vec<(&str, HeckeCase, i32, M4Builder)> = vec![
        ("c.x(a,b,c)", HeckeCase::C, if m % 2 == 1 { m } else { 1 }, family_c_s2),
        ("d.x(a,A)", HeckeCase::D, if m % 2 == 1 { m } else { 1 }, family_d_s2),
        ("a.x(a,b,A)", HeckeCase::A, if m % 2 == 0 { m } else { 2 }, family_a_zeta),
    ];
    for (name, case, mm, build) in fams {
        let s = CaseSetup::new(case, p, mm)?;
        let gj = GroupJ::new(&s, Flavor::J)?;
        let g = if case == HeckeCase::A { s.zeta(1)? } else { s.s(2)? };
        let reps = build(&s)?;
        let n = reps.len();
        let want = p.pow(gj.index_exponent(&g)?);
        let kernel = reps.iter().map(|y| gj.psi(y).map(|v| v.is_one())).collect::<Result<Vec<_>>>()?;
        let transversal = gj.cosets_from(&g, reps).is_ok();
        r.push(
            format!("family.{name}.m{mm}"),
            n as u64 == want && transversal && kernel.iter().all(|&k| k),
            format!("{n} elements, index {want}, transversal {transversal}"),
        );
    }
    Ok(r)
}

type M4Builder = fn(&CaseSetup) -> Result<Vec<M4>>;

/// Every relation of both algebras for one case and level.
pub fn hecke(p: u64, case: HeckeCase, m: i32, seed: u64, mode: Mode) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(&format!("hecke.{}.m{m}", case.label()));
    let s = CaseSetup::new(case, p, m)?;
    for flavor in [Flavor::JPrime, Flavor::J] {
        for rep in verify_all(&s, flavor, seed, mode)? {
            r.push(
                format!("{}.m{m}", rep.relation_id),
                rep.verdict == Verdict::Pass,
                format!("{} witnesses, {} non-zero, max diff {}", rep.witness_count, rep.nonzero_witnesses, rep.max_coeff_diff),
            );
            r.relations.push(rep);
        }
    }
    Ok(r)
}

/// The generator scalings between the two algebras, as a formal check on the
/// relation lists and, when `supports` is set, on products of generators.
pub fn eta(p: u64, case: HeckeCase, m: i32, seed: u64, supports: bool) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(&format!("eta.{}.m{m}", case.label()));
    let s = CaseSetup::new(case, p, m)?;
    let (pairs, bad) = eta_relations(&s, seed)?;
    r.push(
        format!("{}.m{m}.relations", case.label()),
        pairs > 0 && bad.is_empty(),
        format!("{pairs} pairs, mismatches {bad:?}"),
    );
    let control = eta_negative_control(&s, seed)?;
    r.push(
        format!("{}.m{m}.unscaled_control", case.label()),
        control > 0,
        format!("{control} relations differ without the scalings"),
    );
    if supports {
        let (n, bad) = eta_support(&s)?;
        r.push(format!("{}.m{m}.supports", case.label()), bad.is_empty(), format!("{n} products, failures {bad:?}"));
    }
    Ok(r)
}

/// Graded `ad(beta)` isomorphisms, decomposition dimensions, lattice facts on `frakJ`.
pub fn structure(p: u64, m: i32, seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("structure");
    for case in [HeckeCase::C, HeckeCase::D, HeckeCase::A] {
        let s = CaseSetup::new(case, p, m)?;
        let period = s.seq.period() as i32;
        let mut bad_k = Vec::new();
        let mut control_fails = 0;
        let bad_beta = degenerate_beta(&s);
        for k in 0..period {
            if !ad_graded(&s, &s.beta, k)?.full_rank() {
                bad_k.push(k);
            }
            if !ad_graded(&s, &bad_beta, k)?.full_rank() {
                control_fails += 1;
            }
        }
        r.push(format!("{}.ad_beta", case.label()), bad_k.is_empty(), format!("{period} levels, failing k {bad_k:?}"));
        r.push(
            format!("{}.ad_beta.degenerate_control", case.label()),
            control_fails > 0,
            format!("degenerate element fails at {control_fails} levels"),
        );
        let mut bad = Vec::new();
        for k in 0..period {
            let d = decomposition_dims(&s, k)?;
            if !d.additive() {
                bad.push(k);
            }
        }
        r.push(format!("{}.decomposition", case.label()), bad.is_empty(), format!("failing k {bad:?}"));
        let f = group_facts(&s, seed)?;
        r.push(format!("{}.frak_j", case.label()), f.all(), format!("{f:?}"));
    }
    Ok(r)
}

/// `sum_{A in k_F} Omega(c A conj A) = -q` for every unit residue `c`.
pub fn gauss(primes: &[u64]) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("gauss");
    for &p in primes {
        for (name, w) in [("standard", Omega::standard(p, 1)), ("twisted", Omega::twisted(p, 2, 2))] {
            let mut bad = Vec::new();
            for c in 1..p as i64 {
                if norm_gauss_sum(&w, c)?.as_integer() != Some(-(p as i64)) {
                    bad.push(c);
                }
            }
            r.push(format!("p{p}.{name}"), bad.is_empty(), format!("failing c {bad:?}"));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_suites_pass() {
        let c = Ctx::new(3, 20).unwrap();
        assert!(goldens(&c).passed());
        assert!(duality(&c).passed());
        assert!(gauss(&[3]).unwrap().passed());
        let red = reduction(&c, 1).unwrap();
        assert!(red.passed(), "{:?}", red.failures());
    }
}
