use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::algebra::{Factor, GenKind, Hecke};
use super::families::{family_a_zeta, family_c_s2, family_d_s2};
use super::group::{Flavor, GroupJ};
use super::indices::{lemma_index_exponent, zeta_index_exponent};
use super::setup::{CaseSetup, ElemE, HeckeCase};
use crate::cyclo::{CycSum, RootArg};
use crate::error::{Error, Result};
use crate::exec::{self, Mode};
use crate::matrix::M4;
use crate::padic::Quad;

/// Number of seeded random witnesses per relation.
pub const RANDOM_WITNESSES: usize = 20;
/// Cap on the first-level expansion witnesses taken from the leading factor.
pub const EXPANSION_WITNESSES: usize = 8;

#[derive(Clone, Debug)]
pub struct FactorSpec {
    pub name: String,
    pub kind: GenKind,
    pub g: M4,
    /// Explicit coset representatives, checked when compiled.
    pub reps: Option<Vec<M4>>,
}

/// `coeff * phase * f_{g_1} * ... * f_{g_k}`.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: i64,
    pub phase: Option<RootArg>,
    pub word: Vec<FactorSpec>,
}

/// `sum lhs = sum rhs` in the Hecke algebra of one flavour.
#[derive(Clone, Debug)]
pub struct Relation {
    pub id: String,
    pub flavor: Flavor,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationReport {
    pub case: HeckeCase,
    pub m: i32,
    pub p: u64,
    pub relation_id: String,
    pub verdict: Verdict,
    pub witness_count: usize,
    /// Largest coefficient of `lhs(h) - rhs(h)` in the `zeta_p` basis over all witnesses.
    pub max_coeff_diff: i64,
    /// Witnesses at which the left side is non-zero.
    pub nonzero_witnesses: usize,
}

fn mu_values(s: &CaseSetup) -> Vec<(String, ElemE)> {
    let c = &s.ctx;
    let se = c.sqrt_eps();
    match s.case {
        HeckeCase::C => vec![
            ("se".into(), s.e_const(se)),
            ("2se".into(), s.e_const(c.qint(2) * se)),
            ("(1+pe)se".into(), ElemE { a: se, b: se }),
        ],
        _ => vec![
            ("se".into(), ElemE::from_f(se)),
            ("2se".into(), ElemE::from_f(c.qint(2) * se)),
            ("(1+p)se".into(), ElemE::from_f((c.qone() + c.qpi(1)) * se)),
        ],
    }
}

struct Builder<'a> {
    s: &'a CaseSetup,
    flavor: Flavor,
    q: i64,
}

impl<'a> Builder<'a> {
    fn id(&self, rest: &str) -> String {
        let side = match self.flavor {
            Flavor::J => "f",
            Flavor::JPrime => "e",
        };
        format!("{}.{side}.{rest}", self.s.case.label())
    }

    fn qpow(&self, k: u32) -> i64 {
        self.q.pow(k)
    }

    fn index(&self, word: &[u8]) -> u32 {
        lemma_index_exponent(self.s.case, self.flavor, word).expect("alternating word")
    }

    fn plain(&self, name: impl Into<String>, g: M4) -> FactorSpec {
        FactorSpec { name: name.into(), kind: GenKind::Plain, g, reps: None }
    }

    fn refl(&self, i: u8) -> Result<FactorSpec> {
        let g = self.s.s(i)?;
        let odd = self.s.m % 2 == 1;
        let reps = match (self.flavor, self.s.case, i) {
            (Flavor::J, HeckeCase::C, 2) if odd => Some(family_c_s2(self.s)?),
            (Flavor::J, HeckeCase::D, 2) if odd => Some(family_d_s2(self.s)?),
            _ => None,
        };
        let kind = if i == 1 { GenKind::S1 } else { GenKind::S2 };
        Ok(FactorSpec { name: format!("s{i}"), kind, g, reps })
    }

    fn zeta(&self, t: i32) -> Result<FactorSpec> {
        let g = self.s.zeta(t)?;
        let reps = if self.flavor == Flavor::J && t == 1 && self.s.m % 2 == 0 { Some(family_a_zeta(self.s)?) } else { None };
        Ok(FactorSpec { name: format!("zeta^{t}"), kind: GenKind::Zeta(t), g, reps })
    }

    fn u(&self, label: &str, mu: ElemE) -> Result<FactorSpec> {
        Ok(self.plain(format!("u({label})"), self.s.u(mu)?))
    }

    fn ul(&self, label: &str, mu: ElemE) -> Result<FactorSpec> {
        Ok(self.plain(format!("ul({label})"), self.s.ul(mu)?))
    }

    fn h(&self, label: &str, nu: ElemE) -> Result<FactorSpec> {
        Ok(self.plain(format!("h({label})"), self.s.h(nu)?))
    }

    fn term(coeff: i64, word: Vec<FactorSpec>) -> Term {
        Term { coeff, phase: None, word }
    }

    fn rel(&self, rest: &str, lhs: Vec<Term>, rhs: Vec<Term>) -> Relation {
        Relation { id: self.id(rest), flavor: self.flavor, lhs, rhs }
    }

    fn pe(&self) -> Quad {
        self.s.pi_e_square()
    }

    fn se_int(&self, x: i64) -> Quad {
        self.s.ctx.qint(x) * self.s.ctx.sqrt_eps()
    }

    /// Relations shared by all cases: scalars from `J'` and products inside `B'`.
    fn common(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Relation>> {
        let gp = GroupJ::new(self.s, Flavor::JPrime)?;
        let k = gp.random_element(rng)?;
        let phase = gp.psi(&k)?;
        let unit = self.rel(
            "unit.k",
            vec![Self::term(1, vec![self.plain("k", k)])],
            vec![Term { coeff: 1, phase: Some(phase), word: vec![] }],
        );
        let (b1, b2) = match self.s.case {
            HeckeCase::A => (gp.random_level_element(rng, 1, true)?, gp.random_level_element(rng, 1, true)?),
            _ => {
                let c = &self.s.ctx;
                let nu = ElemE::from_f(c.qint(2) + c.sqrt_eps());
                (self.s.h(nu)?, self.s.u(mu_values(self.s)[0].1)?)
            }
        };
        let mult = self.rel(
            "mult.b",
            vec![Self::term(1, vec![self.plain("b1", b1), self.plain("b2", b2)])],
            vec![Self::term(1, vec![self.plain("b1b2", b1 * b2)])],
        );
        Ok(vec![unit, mult])
    }

    /// `f_s * f_k = f_{s k s^{-1}} * f_s` for `k = h(nu)`.
    fn swaps(&self) -> Result<Vec<Relation>> {
        let c = &self.s.ctx;
        let nu = match self.s.case {
            HeckeCase::C => ElemE { a: c.qint(2) + c.sqrt_eps(), b: c.qone() },
            _ => ElemE::from_f(c.qint(2) + c.sqrt_eps()),
        };
        let k = self.h("nu", nu)?;
        let mut out = Vec::new();
        for i in [1u8, 2] {
            let s = self.refl(i)?;
            let conj = self.plain(format!("s{i} h(nu) s{i}^-1"), s.g * k.g * s.g.inverse()?);
            out.push(self.rel(
                &format!("swap.s{i}"),
                vec![Self::term(1, vec![s.clone(), k.clone()])],
                vec![Self::term(1, vec![conj, s])],
            ));
        }
        Ok(out)
    }

    fn case_c(&self) -> Result<Vec<Relation>> {
        let s = self.s;
        let m = s.m as u32;
        let (s1, s2) = (self.refl(1)?, self.refl(2)?);
        let (i1, i2) = (self.index(&[1]), self.index(&[2]));
        let mut out = Vec::new();

        let pe1 = s.pi_e_pow(2 * m - 1);
        let sum1: Vec<Term> = (0..self.q)
            .map(|x| {
                let mu = pe1.mul(&s.e_const(self.se_int(x)), self.pe());
                Ok(Self::term(self.qpow(i1), vec![self.ul(&format!("pe^{}*{x}se", 2 * m - 1), mu)?]))
            })
            .collect::<Result<_>>()?;
        out.push(self.rel("square.s1", vec![Self::term(1, vec![s1.clone(), s1.clone()])], sum1));

        let pe2 = s.pi_e_pow(2 * m - 2);
        let sum2: Vec<Term> = (0..self.q)
            .map(|x| {
                let mu = pe2.mul(&s.e_const(self.se_int(x)), self.pe());
                Ok(Self::term(self.qpow(i2), vec![self.u(&format!("pe^{}*{x}se", 2 * m - 2), mu)?]))
            })
            .collect::<Result<_>>()?;
        out.push(self.rel("square.s2", vec![Self::term(1, vec![s2.clone(), s2.clone()])], sum2));

        let pi_e = s.pi_e_pow(1);
        let c2 = match self.flavor {
            Flavor::JPrime => self.qpow(i2),
            Flavor::J => self.qpow(2),
        };
        for (label, mu) in mu_values(s) {
            let mi = mu.inv(self.pe())?;
            let il = format!("{label}^-1");
            out.push(self.rel(
                &format!("twist.s1.{label}"),
                vec![Self::term(1, vec![s1.clone(), self.u(&label, mu)?, s1.clone()])],
                vec![Self::term(
                    self.qpow(i1),
                    vec![self.u(&il, mi)?, s1.clone(), self.h(&label, mu)?, self.u(&il, mi)?],
                )],
            ));
            let a = pi_e.mul(&mu, self.pe());
            let b = pi_e.mul(&mi, self.pe());
            let lb = format!("pe*{il}");
            out.push(self.rel(
                &format!("twist.s2.{label}"),
                vec![Self::term(1, vec![s2.clone(), self.ul(&format!("pe*{label}"), a)?, s2.clone()])],
                vec![Self::term(
                    c2,
                    vec![self.ul(&lb, b)?, s2.clone(), self.h(&format!("-{il}"), mi.neg())?, self.ul(&lb, b)?],
                )],
            ));
        }
        Ok(out)
    }

    fn case_d(&self) -> Result<Vec<Relation>> {
        let s = self.s;
        let c = &s.ctx;
        let (s1, s2) = (self.refl(1)?, self.refl(2)?);
        let (i1, i2) = (self.index(&[1]), self.index(&[2]));
        let f_side = self.flavor == Flavor::J;
        let mut out = Vec::new();
        out.push(self.rel(
            "square.s1",
            vec![Self::term(1, vec![s1.clone(), s1.clone()])],
            vec![Self::term(self.qpow(i1), vec![])],
        ));
        if s.m >= 2 {
            let sum: Vec<Term> = (0..self.q * self.q)
                .map(|x| {
                    let mu = ElemE::from_f(c.qpi(s.m - 2) * self.se_int(x));
                    Ok(Self::term(self.qpow(i2), vec![self.u(&format!("p^{}*{x}se", s.m - 2), mu)?]))
                })
                .collect::<Result<_>>()?;
            out.push(self.rel("square.s2", vec![Self::term(1, vec![s2.clone(), s2.clone()])], sum));
        } else {
            // (sum_y c_1 f_s2 f_h(-1/y) + c_0 f_1)(sum_x f_u(x sqrt eps)); c_1 = 1, c_0 = q^2 on
            // the e side and c_1 = -q, c_0 = q^4 after rescaling s2 by -1/q
            let (c1, c0) = if f_side { (-self.q, self.qpow(4)) } else { (1, self.qpow(2)) };
            let mut rhs = Vec::new();
            for x in 0..self.q {
                let ux = self.u(&format!("{x}se"), ElemE::from_f(self.se_int(x)))?;
                for y in 1..self.q {
                    let nu = (-self.se_int(y)).inv()?;
                    rhs.push(Self::term(c1, vec![s2.clone(), self.h(&format!("-1/({y}se)"), ElemE::from_f(nu))?, ux.clone()]));
                }
                rhs.push(Self::term(c0, vec![ux]));
            }
            out.push(self.rel("square.s2.small", vec![Self::term(1, vec![s2.clone(), s2.clone()])], rhs));
        }
        for (label, mu) in mu_values(s) {
            let mi = ElemE::from_f(mu.a.inv()?);
            let il = format!("{label}^-1");
            let k1 = if f_side { -self.q } else { 1 };
            out.push(self.rel(
                &format!("twist.s1.{label}"),
                vec![Self::term(1, vec![s1.clone(), self.u(&label, mu)?, s1.clone()])],
                vec![Self::term(k1, vec![self.u(&il, mi)?, s1.clone(), self.h(&label, mu)?, self.u(&il, mi)?])],
            ));
            if s.m >= 2 {
                let a = ElemE::from_f(c.qpi(1) * mu.a);
                let b = ElemE::from_f(c.qpi(1) * mi.a);
                let lb = format!("p*{il}");
                let k2 = if f_side { -self.qpow(3) } else { self.qpow(i2) };
                let lhs = vec![Self::term(1, vec![s2.clone(), self.ul(&format!("p*{label}"), a)?, s2.clone()])];
                out.push(self.rel(
                    &format!("twist.s2.{label}"),
                    lhs.clone(),
                    vec![Self::term(
                        k2,
                        vec![self.ul(&lb, b)?, s2.clone(), self.h(&format!("-{il}"), mi.neg())?, self.ul(&lb, b)?],
                    )],
                ));
                // the same total spread over the q double cosets of nu_t = mu + p^{m-1} t sqrt eps
                let j = s.m - 1;
                let mut rhs = Vec::new();
                for t in 0..self.q {
                    let nu = mu.a + c.qpi(j) * self.se_int(t);
                    let ni = ElemE::from_f(nu.inv()?);
                    let bl = format!("p/({label}+p^{j}*{t}se)");
                    let ub = self.ul(&bl, ElemE::from_f(c.qpi(1) * ni.a))?;
                    let hh = self.h(&format!("-1/({label}+p^{j}*{t}se)"), ni.neg())?;
                    rhs.push(Self::term(k2 / self.q, vec![ub.clone(), s2.clone(), hh, ub]));
                }
                out.push(self.rel(&format!("twist.s2.{label}.spread"), lhs, rhs));
            }
        }
        Ok(out)
    }

    fn case_a(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Relation>> {
        let (z, zi) = (self.zeta(1)?, self.zeta(-1)?);
        let k = self.qpow(zeta_index_exponent(self.flavor, 1));
        let b = GroupJ::new(self.s, Flavor::JPrime)?.random_level_element(rng, 1, true)?;
        let b = self.plain("b", b);
        Ok(vec![
            self.rel("inverse.left", vec![Self::term(1, vec![zi.clone(), z.clone()])], vec![Self::term(k, vec![])]),
            self.rel("inverse.right", vec![Self::term(1, vec![z.clone(), zi])], vec![Self::term(k, vec![])]),
            self.rel("central.b", vec![Self::term(1, vec![b.clone(), z.clone()])], vec![Self::term(1, vec![z, b])]),
        ])
    }
}

/// The relations of the stated presentations for one flavour, in a fixed order.
pub fn relations(s: &CaseSetup, flavor: Flavor, seed: u64) -> Result<Vec<Relation>> {
    let b = Builder { s, flavor, q: s.q() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = b.common(&mut rng)?;
    match s.case {
        HeckeCase::C => {
            out.extend(b.swaps()?);
            out.extend(b.case_c()?);
        }
        HeckeCase::D => {
            out.extend(b.swaps()?);
            out.extend(b.case_d()?);
        }
        HeckeCase::A => out.extend(b.case_a(&mut rng)?),
    }
    Ok(out)
}

struct Compiled {
    lhs: Vec<(CycSum, Vec<Factor>)>,
    rhs: Vec<(CycSum, Vec<Factor>)>,
}

fn compile_side(h: &Hecke, side: &[Term]) -> Result<Vec<(CycSum, Vec<Factor>)>> {
    let p = h.gj.setup.ctx.p;
    side.iter()
        .map(|t| {
            let mut c = CycSum::int(p, 1, t.coeff);
            if let Some(r) = t.phase {
                c = c.mul_root(r);
            }
            let word = t
                .word
                .iter()
                .map(|f| match &f.reps {
                    Some(reps) => h.factor_with_reps(&f.name, f.kind, &f.g, reps.clone()),
                    None => h.factor(&f.name, f.kind, &f.g),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((c, word))
        })
        .collect()
}

fn eval_side(h: &Hecke, side: &[(CycSum, Vec<Factor>)], x: &M4) -> Result<CycSum> {
    let mut acc = CycSum::zero(h.gj.setup.ctx.p, 1);
    for (c, word) in side {
        let v = h.eval_word(word, x)?;
        if !v.is_zero() {
            acc = &acc + &(&v * c);
        }
    }
    Ok(acc)
}

fn word_product(s: &CaseSetup, word: &[Factor]) -> M4 {
    word.iter().fold(M4::identity(&s.ctx), |acc, f| acc * *f.g())
}

fn witnesses(h: &Hecke, rel: &Compiled, seed: u64) -> Result<Vec<M4>> {
    let s = &h.gj.setup;
    let mut out: Vec<M4> = Vec::new();
    for (_, word) in rel.rhs.iter().chain(&rel.lhs) {
        out.push(word_product(s, word));
    }
    if let Some((_, word)) = rel.lhs.first() {
        if let Some(first) = word.first() {
            let base = word_product(s, word);
            let step = (first.fam.reps.len() / EXPANSION_WITNESSES).max(1);
            for y in first.fam.reps.iter().step_by(step).take(EXPANSION_WITNESSES) {
                out.push(*y * base);
            }
        }
    }
    let mut alphabet: Vec<M4> = Vec::new();
    for (_, word) in rel.lhs.iter().chain(&rel.rhs) {
        for f in word {
            if !alphabet.iter().any(|g| g == f.g()) {
                alphabet.push(*f.g());
            }
        }
    }
    let centralizer = h.gj.flavor == Flavor::JPrime;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_WITNESSES {
        let mut w = h.gj.random_element(&mut rng)?;
        if !alphabet.is_empty() {
            for _ in 0..rng.gen_range(0..=3) {
                w = w * alphabet[rng.gen_range(0..alphabet.len())];
            }
        }
        if rng.gen_bool(0.5) {
            w = w * h.gj.random_level_element(&mut rng, 1, centralizer)?;
        }
        out.push(w * h.gj.random_element(&mut rng)?);
    }
    Ok(out)
}

/// Evaluates both sides at every witness and compares exactly.
pub fn verify_relation(h: &Hecke, rel: &Relation, seed: u64, mode: Mode) -> Result<RelationReport> {
    if rel.flavor != h.gj.flavor {
        return Err(Error::InvalidInput("relation and algebra have different flavours".into()));
    }
    let compiled = Compiled { lhs: compile_side(h, &rel.lhs)?, rhs: compile_side(h, &rel.rhs)? };
    let pts = witnesses(h, &compiled, seed)?;
    let vals = exec::map(mode, &pts, |x| -> Result<(CycSum, CycSum)> {
        Ok((eval_side(h, &compiled.lhs, x)?, eval_side(h, &compiled.rhs, x)?))
    });
    let mut max_diff = 0;
    let mut nonzero = 0;
    for v in vals {
        let (l, r) = v?;
        if !l.is_zero() {
            nonzero += 1;
        }
        max_diff = max_diff.max((&l - &r).max_abs_coeff());
    }
    let s = &h.gj.setup;
    Ok(RelationReport {
        case: s.case,
        m: s.m,
        p: s.ctx.p,
        relation_id: rel.id.clone(),
        verdict: if max_diff == 0 { Verdict::Pass } else { Verdict::Fail },
        witness_count: pts.len(),
        max_coeff_diff: max_diff,
        nonzero_witnesses: nonzero,
    })
}

/// All relations of one flavour.
pub fn verify_all(s: &CaseSetup, flavor: Flavor, seed: u64, mode: Mode) -> Result<Vec<RelationReport>> {
    let h = Hecke::new(GroupJ::new(s, flavor)?);
    let rels = relations(s, flavor, seed)?;
    let mut seeds: HashMap<String, u64> = HashMap::new();
    rels.iter()
        .enumerate()
        .map(|(i, r)| {
            let sd = *seeds.entry(r.id.clone()).or_insert(seed.wrapping_add(1 + i as u64));
            verify_relation(&h, r, sd, mode)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_descriptive() {
        for case in [HeckeCase::A, HeckeCase::C, HeckeCase::D] {
            for m in [1, 2] {
                let s = CaseSetup::new(case, 3, m).unwrap();
                for fl in [Flavor::J, Flavor::JPrime] {
                    let rels = relations(&s, fl, 1).unwrap();
                    let mut ids: Vec<_> = rels.iter().map(|r| r.id.clone()).collect();
                    ids.sort();
                    ids.dedup();
                    assert_eq!(ids.len(), rels.len());
                    assert!(ids.iter().all(|i| i.starts_with(case.label())));
                }
            }
        }
    }

    #[test]
    fn case_c_square_s2_at_m1() {
        let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
        let h = Hecke::new(GroupJ::new(&s, Flavor::J).unwrap());
        let rel = relations(&s, Flavor::J, 1).unwrap().into_iter().find(|r| r.id == "c.f.square.s2").unwrap();
        let rep = verify_relation(&h, &rel, 7, Mode::Sequential).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        assert!(rep.nonzero_witnesses > 0);
    }
}
