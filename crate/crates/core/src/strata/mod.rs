//! Strata `[Lambda, n, r, beta]`, their characteristic polynomials, splitting,
//! reduction to standard sequences, normal forms and formal intertwining.

mod charpoly;
mod hensel;
mod normal;
mod reduction;

pub use charpoly::{
    berkowitz, char_poly, charpoly_oracle, classify_phi, newton_single_slope, y_beta, CaseLabel, CharPolyReport,
};
pub use hensel::{hensel_lift, hensel_split, primary_parts, QPoly, SplitData};
pub use normal::{g_of, normalize_beta, st20_beta, DForm, NormalCase, NormalForm, NormalParams, St20Blocks};
pub use reduction::{reduce_sequence, strict_reduction, Reduction, ReductionCase};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{filtration_shape, random_skew, shape};
use crate::lattice::LatticeSeq;
use crate::matrix::{Mat, M4};
use crate::padic::{Ctx, Padic, Quad};
use crate::zp_lattice::{flatten, shape_generators, ZpModule};

/// A stratum in `A = M_4(F)`; `beta` is given exactly, the stratum is its
/// class modulo `a_{-r}`.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub seq: LatticeSeq<4>,
    pub n: i32,
    pub r: i32,
    pub beta: M4,
}

impl Stratum {
    pub fn new(seq: LatticeSeq<4>, n: i32, r: i32, beta: M4) -> Result<Self> {
        if !(n > r && r >= 0) {
            return Err(Error::InvalidStratum(format!("need n > r >= 0, got n = {n}, r = {r}")));
        }
        match filtration_shape(&seq, -n).contains(&beta) {
            Some(true) => {}
            Some(false) => return Err(Error::InvalidStratum(format!("beta is not in a_{{-{n}}}"))),
            None => return Err(Error::precision("membership of beta in a_{-n}", 1)),
        }
        Ok(Stratum { seq, n, r, beta })
    }

    /// Self-dual sequence and `sigma(beta) = -beta`.
    pub fn is_skew(&self) -> bool {
        self.seq.duality_index().is_some() && (self.beta + self.beta.sigma()).is_zero()
    }

    /// `beta_1 - beta_2 in a_{-r}`.
    pub fn equivalent(&self, o: &Stratum) -> Result<bool> {
        if self.n != o.n || self.r != o.r {
            return Err(Error::InvalidInput("strata have different (n, r)".into()));
        }
        if self.seq.exponents() != o.seq.exponents() || !same_frame(&self.seq, &o.seq) {
            return Err(Error::InvalidInput("strata live on different lattice sequences".into()));
        }
        filtration_shape(&self.seq, -self.r)
            .contains(&(self.beta - o.beta))
            .ok_or_else(|| Error::precision("stratum equivalence", 1))
    }

    /// Conjugate stratum `[g Lambda, n, r, Ad(g) beta]`; with a similitude `g`
    /// the sequence is rebuilt from `g Lambda` whenever `g` is unitary.
    pub fn conjugate(&self, g: &M4, c: &Ctx) -> Result<Stratum> {
        let gi = g.inverse()?;
        let sp = crate::lattice::HermSpace::split(c);
        let seq = self.seq.act_and_translate(g, 0, &sp, c)?;
        Stratum::new(seq, self.n, self.r, M4::ad(g, &gi, &self.beta))
    }
}

fn same_frame(a: &LatticeSeq<4>, b: &LatticeSeq<4>) -> bool {
    match (a.frame(), b.frame()) {
        (None, None) => true,
        (Some((g, _)), Some((h, _))) => g == h,
        _ => false,
    }
}

/// Sample a skew `beta in g_{-n}` for which `[seq, n, n-1, beta]` is fundamental.
pub fn random_fundamental_skew<R: Rng + ?Sized>(
    rng: &mut R,
    seq: &LatticeSeq<4>,
    n: i32,
    c: &Ctx,
    max_tries: usize,
) -> Result<Stratum> {
    if seq.frame().is_some() {
        return Err(Error::Unsupported("sampling on framed sequences".into()));
    }
    let bounds = shape(seq, -n);
    for _ in 0..max_tries {
        let beta = random_skew(rng, &bounds, c)?;
        let st = Stratum::new(seq.clone(), n, n - 1, beta)?;
        if char_poly(&st)?.fundamental {
            return Ok(st);
        }
    }
    Err(Error::InvalidInput(format!("no fundamental stratum found in {max_tries} samples")))
}

/// `g_k = a_k cap {x : sigma(x) = -x}` as a `Z_p`-module, frame applied.
pub fn skew_module(seq: &LatticeSeq<4>, k: i32, c: &Ctx) -> Result<ZpModule> {
    let half = c.qint(2).inv()?;
    let gens: Vec<M4> = shape_generators(&shape(seq, k), c)
        .into_iter()
        .map(|x| match seq.frame() {
            None => x,
            Some((g, gi)) => M4::ad(g, gi, &x),
        })
        .map(|x| (x - x.sigma()).scale(half))
        .collect();
    Ok(ZpModule::from_matrices(&gens))
}

/// Formal intertwining by the linear criterion
/// `beta - Ad(g) beta in g_{-r} + Ad(g) g_{-r}`.
pub fn intertwines(g: &M4, st: &Stratum, c: &Ctx) -> Result<bool> {
    let gi = g.inverse()?;
    let base = skew_module(&st.seq, -st.r, c)?;
    let moved = ZpModule::from_matrices(&base.basis_matrices().iter().map(|x| M4::ad(g, &gi, x)).collect::<Vec<_>>());
    let diff = st.beta - M4::ad(g, &gi, &st.beta);
    base.sum(&moved)
        .contains(&flatten(&diff))
        .ok_or_else(|| Error::precision("intertwining membership", st.r.unsigned_abs() + 1))
}

/// The same question by search: run over representatives `Y` of
/// `Ad(g) g_{-r} / (Ad(g) g_{-r} cap g_{-r})` and test
/// `beta - Ad(g) beta - Y in a_{-r}` entrywise.
pub fn intertwines_by_search(g: &M4, st: &Stratum, c: &Ctx, limit: u64) -> Result<bool> {
    let gi = g.inverse()?;
    let base = skew_module(&st.seq, -st.r, c)?;
    let moved = ZpModule::from_matrices(&base.basis_matrices().iter().map(|x| M4::ad(g, &gi, x)).collect::<Vec<_>>());
    let inter = moved.intersect(&base);
    let diff = st.beta - M4::ad(g, &gi, &st.beta);
    let target = filtration_shape(&st.seq, -st.r);
    for rep in moved.quotient_reps(&inter, c, limit)? {
        let y = crate::zp_lattice::unflatten(&rep);
        match target.contains(&(diff - y)) {
            Some(true) => return Ok(true),
            Some(false) => {}
            None => return Err(Error::precision("intertwining search", 1)),
        }
    }
    Ok(false)
}

/// One entry as `(valuation, unit digits, relative precision)`; exact zero is `null`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicJson(pub Option<(i32, u64, u16)>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumJson {
    pub sequence: String,
    pub p: u64,
    pub n: i32,
    pub r: i32,
    /// `beta[i][j] = (re, im)` with value `re + im sqrt(eps)`.
    pub beta: Vec<Vec<(PadicJson, PadicJson)>>,
}

fn padic_json(x: &Padic) -> PadicJson {
    if x.is_exact_zero() {
        PadicJson(None)
    } else {
        PadicJson(Some((x.val(), x.unit(), x.rel_prec())))
    }
}

fn padic_from_json(p: u64, x: &PadicJson) -> Padic {
    match x.0 {
        None => Padic::exact_zero(p),
        Some((v, u, prec)) if prec == 0 => {
            let _ = u;
            Padic::zero_mod(p, v)
        }
        Some((v, u, prec)) => Padic::from_parts(p, prec, v, u),
    }
}

impl StratumJson {
    pub fn from_stratum(label: &str, st: &Stratum) -> Self {
        let beta = st
            .beta
            .a
            .iter()
            .map(|row| row.iter().map(|q| (padic_json(&q.re), padic_json(&q.im))).collect())
            .collect();
        StratumJson { sequence: label.to_string(), p: st.beta.p(), n: st.n, r: st.r, beta }
    }

    pub fn to_stratum(&self, c: &Ctx) -> Result<Stratum> {
        if self.p != c.p {
            return Err(Error::InvalidInput(format!("stratum is over p = {}, context p = {}", self.p, c.p)));
        }
        let seq = crate::filtration::named_sequence(c, &self.sequence)
            .ok_or_else(|| Error::InvalidInput(format!("unknown sequence label {}", self.sequence)))?;
        if self.beta.len() != 4 || self.beta.iter().any(|r| r.len() != 4) {
            return Err(Error::InvalidInput("beta must be 4x4".into()));
        }
        let beta = Mat::from_fn(|i, j| {
            let (re, im) = &self.beta[i][j];
            Quad::new(padic_from_json(c.p, re), padic_from_json(c.p, im))
        });
        Stratum::new(seq, self.n, self.r, beta)
    }
}
