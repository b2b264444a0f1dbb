use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::group::{CosetFamily, GroupJ};
use crate::cyclo::CycSum;
use crate::error::Result;
use crate::matrix::M4;

/// How a generator is rescaled by the comparison map between the two algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    S1,
    S2,
    Zeta(i32),
    /// Elements of `B'` normalizing `(J, Psi)`, and other unscaled factors.
    Plain,
}

/// The basis element `f_g` with the coset data needed to evaluate it.
#[derive(Clone, Debug)]
pub struct Factor {
    pub name: String,
    pub kind: GenKind,
    pub fam: Arc<CosetFamily>,
}

impl Factor {
    pub fn g(&self) -> &M4 {
        &self.fam.g
    }
}

/// Evaluation of products of basis elements of `H(G // J, Psi)` with
/// `vol(J) = 1`.
pub struct Hecke {
    pub gj: GroupJ,
    cache: Mutex<HashMap<String, Arc<CosetFamily>>>,
}

impl Hecke {
    pub fn new(gj: GroupJ) -> Self {
        Hecke { gj, cache: Mutex::new(HashMap::new()) }
    }

    fn zero(&self) -> CycSum {
        CycSum::zero(self.gj.setup.ctx.p, 1)
    }

    /// `f_g`, with families cached by name.
    pub fn factor(&self, name: &str, kind: GenKind, g: &M4) -> Result<Factor> {
        if let Some(f) = self.cache.lock().expect("cache").get(name) {
            return Ok(Factor { name: name.into(), kind, fam: f.clone() });
        }
        let fam = Arc::new(self.gj.cosets(g)?);
        self.cache.lock().expect("cache").insert(name.into(), fam.clone());
        Ok(Factor { name: name.into(), kind, fam })
    }

    /// `f_g` from supplied representatives, checked against the index.
    pub fn factor_with_reps(&self, name: &str, kind: GenKind, g: &M4, reps: Vec<M4>) -> Result<Factor> {
        let fam = Arc::new(self.gj.cosets_from(g, reps)?);
        self.cache.lock().expect("cache").insert(name.into(), fam.clone());
        Ok(Factor { name: name.into(), kind, fam })
    }

    /// `f_1(h)`.
    pub fn eval_one(&self, h: &M4) -> Result<CycSum> {
        if self.gj.contains(h)? {
            Ok(CycSum::root(self.gj.psi_unchecked(h)?.inv()))
        } else {
            Ok(self.zero())
        }
    }

    pub fn eval_factor(&self, f: &Factor, h: &M4) -> Result<CycSum> {
        Ok(match self.gj.eval_basis(&f.fam, h)? {
            Some(r) => CycSum::root(r),
            None => self.zero(),
        })
    }

    /// `(f_{g_1} * ... * f_{g_k})(h)`; the empty word is `f_1`.
    ///
    /// `(f_g * F)(h) = sum_i Psi(y_i)^{-1} F((y_i g)^{-1} h)`.
    pub fn eval_word(&self, word: &[Factor], h: &M4) -> Result<CycSum> {
        match word {
            [] => self.eval_one(h),
            [f] => self.eval_factor(f, h),
            [f, rest @ ..] => {
                let mut acc = self.zero();
                for (probe, pi) in f.fam.probes.iter().zip(&f.fam.psi_inv) {
                    let v = self.eval_word(rest, &(*probe * *h))?;
                    if !v.is_zero() {
                        acc = &acc + &v.mul_root(*pi);
                    }
                }
                Ok(acc)
            }
        }
    }

    pub fn eval(&self, x: &HeckeElt, h: &M4) -> Result<CycSum> {
        let mut acc = self.zero();
        for (f, c) in &x.terms {
            let v = self.eval_factor(f, h)?;
            if !v.is_zero() {
                acc = &acc + &(&v * c);
            }
        }
        Ok(acc)
    }

    fn eval_product(&self, a: &HeckeElt, b: &HeckeElt, h: &M4) -> Result<CycSum> {
        let mut acc = self.zero();
        for (f, c) in &a.terms {
            let mut inner = self.zero();
            for (probe, pi) in f.fam.probes.iter().zip(&f.fam.psi_inv) {
                let v = self.eval(b, &(*probe * *h))?;
                if !v.is_zero() {
                    inner = &inner + &v.mul_root(*pi);
                }
            }
            acc = &acc + &(&inner * c);
        }
        Ok(acc)
    }

    pub fn basis(&self, f: &Factor) -> HeckeElt {
        HeckeElt { terms: vec![(f.clone(), CycSum::int(self.gj.setup.ctx.p, 1, 1))] }
    }

    /// `f_1`.
    pub fn unit(&self) -> Result<HeckeElt> {
        let one = M4::identity(&self.gj.setup.ctx);
        Ok(self.basis(&self.factor("1", GenKind::Plain, &one)?))
    }

    /// Whether `h` lies in one of the double cosets already in `found`.
    fn locate(&self, found: &[Factor], h: &M4) -> Result<Option<usize>> {
        for (i, f) in found.iter().enumerate() {
            if self.gj.eval_basis(&f.fam, h)?.is_some() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Exact convolution. The support of `f_a * f_b` lies in
    /// `J a J b J = U_z J a z b J`, with `z` running over inverses of the
    /// representatives of `J / (J cap a^{-1} J a)`.
    pub fn convolve(&self, a: &HeckeElt, b: &HeckeElt) -> Result<HeckeElt> {
        let mut cosets: Vec<Factor> = Vec::new();
        for (fa, _) in &a.terms {
            let ga_inv = fa.fam.g_inv;
            let back = self.gj.cosets(&ga_inv)?;
            for (fb, _) in &b.terms {
                for y in &back.reps {
                    let h = *fa.g() * y.inverse()? * *fb.g();
                    if self.locate(&cosets, &h)?.is_none() {
                        let fam = Arc::new(self.gj.cosets(&h)?);
                        cosets.push(Factor { name: format!("conv{}", cosets.len()), kind: GenKind::Plain, fam });
                    }
                }
            }
        }
        let mut terms = Vec::new();
        for f in cosets {
            let v = self.eval_product(a, b, f.g())?;
            if !v.is_zero() {
                terms.push((f, v));
            }
        }
        Ok(HeckeElt { terms })
    }

    /// `f^*(x) = conj f(x^{-1})`, so that `f_g^* = f_{g^{-1}}`.
    pub fn star(&self, x: &HeckeElt) -> Result<HeckeElt> {
        let mut terms = Vec::new();
        for (f, c) in &x.terms {
            let fam = Arc::new(self.gj.cosets(&f.fam.g_inv)?);
            terms.push((Factor { name: format!("{}^-1", f.name), kind: f.kind, fam }, c.conj()));
        }
        Ok(HeckeElt { terms })
    }

    /// Equality of two elements: both are combinations of basis functions,
    /// so comparing at every base point of either support suffices.
    pub fn equal(&self, a: &HeckeElt, b: &HeckeElt) -> Result<bool> {
        for (f, _) in a.terms.iter().chain(&b.terms) {
            if self.eval(a, f.g())? != self.eval(b, f.g())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `sum_k c_k f_{g_k}` over distinct double cosets.
#[derive(Clone, Debug)]
pub struct HeckeElt {
    pub terms: Vec<(Factor, CycSum)>,
}

impl HeckeElt {
    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, k: i64) -> HeckeElt {
        HeckeElt { terms: self.terms.iter().map(|(f, c)| (f.clone(), c.scale(k))).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::group::Flavor;
    use crate::hecke::setup::{CaseSetup, HeckeCase};

    fn hecke(case: HeckeCase, m: i32) -> Hecke {
        let s = CaseSetup::new(case, 3, m).unwrap();
        Hecke::new(GroupJ::new(&s, Flavor::J).unwrap())
    }

    #[test]
    fn unit_is_idempotent() {
        let h = hecke(HeckeCase::C, 1);
        let one = h.unit().unwrap();
        let sq = h.convolve(&one, &one).unwrap();
        assert_eq!(sq.support_size(), 1);
        assert!(h.equal(&sq, &one).unwrap());
    }

    #[test]
    fn zeta_inverse_pair_in_case_a() {
        let h = hecke(HeckeCase::A, 1);
        let s = &h.gj.setup;
        let z = h.basis(&h.factor("zeta", GenKind::Zeta(1), &s.zeta(1).unwrap()).unwrap());
        let zi = h.basis(&h.factor("zeta^-1", GenKind::Zeta(-1), &s.zeta(-1).unwrap()).unwrap());
        let one = h.unit().unwrap();
        let want = one.scale(81);
        for (a, b) in [(&zi, &z), (&z, &zi)] {
            let prod = h.convolve(a, b).unwrap();
            assert!(h.equal(&prod, &want).unwrap(), "{:?}", prod.terms.iter().map(|t| &t.1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn s1_square_in_case_d() {
        let h = hecke(HeckeCase::D, 1);
        let s1 = h.basis(&h.factor("s1", GenKind::S1, &h.gj.setup.s(1).unwrap()).unwrap());
        let prod = h.convolve(&s1, &s1).unwrap();
        assert!(h.equal(&prod, &h.unit().unwrap().scale(9)).unwrap());
    }

    #[test]
    fn star_inverts_basis_elements() {
        let h = hecke(HeckeCase::C, 1);
        let s = &h.gj.setup;
        let s1 = s.s(1).unwrap();
        let s2 = s.s(2).unwrap();
        let g = s1 * s2;
        let f = h.basis(&h.factor("s1s2", GenKind::Plain, &g).unwrap());
        let fs = h.star(&f).unwrap();
        let direct = h.basis(&h.factor("s2s1", GenKind::Plain, &(s2 * s1)).unwrap());
        assert!(h.equal(&fs, &direct).unwrap());
    }
}
