use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::setup::CaseSetup;
use crate::cyclo::{Omega, RootArg};
use crate::error::{Error, Result};
use crate::filtration::{filtration_shape, shape, trace_to_base, ShapeLattice};
use crate::lattice::cayley;
use crate::matrix::M4;
use crate::zp_lattice::{flatten, shape_generators, unflatten, Hermite, ZpModule};

/// Which Hecke algebra: `H(G // J, Psi)` or `H(G' // J', Psi')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    J,
    JPrime,
}

impl Flavor {
    pub fn label(&self) -> &'static str {
        match self {
            Flavor::J => "J",
            Flavor::JPrime => "J'",
        }
    }
}

/// Largest quotient enumerated explicitly.
pub const COSET_LIMIT: u64 = 3u64.pow(12);

/// `a'_k = s(a_k)` as a `Z_p`-module.
pub fn prime_part(setup: &CaseSetup, k: i32) -> ZpModule {
    let gens: Vec<M4> = shape_generators(&shape(&setup.seq, k), &setup.ctx).iter().map(|x| setup.split.s(x)).collect();
    ZpModule::from_matrices(&gens)
}

/// `a_k^perp = (1 - s)(a_k)`.
pub fn perp_part(setup: &CaseSetup, k: i32) -> ZpModule {
    let gens: Vec<M4> =
        shape_generators(&shape(&setup.seq, k), &setup.ctx).iter().map(|x| *x - setup.split.s(x)).collect();
    ZpModule::from_matrices(&gens)
}

/// `L cap g` for a sigma-stable module `L`.
pub fn skew_part(l: &ZpModule, setup: &CaseSetup) -> Result<ZpModule> {
    let half = setup.ctx.qint(2).inv()?;
    let gens: Vec<M4> = l.basis_matrices().iter().map(|x| (*x - x.sigma()).scale(half)).collect();
    Ok(ZpModule::from_matrices(&gens))
}

/// `g L g^{-1}`.
pub fn conjugate_module(l: &ZpModule, g: &M4, g_inv: &M4) -> ZpModule {
    let gens: Vec<M4> = l.basis_matrices().iter().map(|x| *g * *x * *g_inv).collect();
    ZpModule::from_matrices(&gens)
}

fn min_val(l: &ZpModule) -> i32 {
    l.rows().iter().flatten().filter(|x| !x.is_zero()).map(|x| x.val()).min().unwrap_or(0)
}

/// `J = (1 + frakJ) cap G` with `frakJ = a'_n + a^perp_{[n/2]+1}`, or
/// `J' = (1 + a'_n) cap G'`, together with `Psi(x) = Omega(tr(beta (x - 1)))`.
#[derive(Clone, Debug)]
pub struct GroupJ {
    pub setup: CaseSetup,
    pub flavor: Flavor,
    pub frak: ZpModule,
    pub frak_skew: ZpModule,
    outer: ShapeLattice<4>,
    inner: ShapeLattice<4>,
    pub omega: Omega,
}

/// Left coset representatives `y_i` of `J / (J cap g J g^{-1})`, so that
/// `JgJ` is the disjoint union of the `y_i g J`.
#[derive(Clone, Debug)]
pub struct CosetFamily {
    pub g: M4,
    pub g_inv: M4,
    pub reps: Vec<M4>,
    /// `Psi(y_i)^{-1}`, the value of `f_g` at `y_i g`.
    pub psi_inv: Vec<RootArg>,
    /// `(y_i g)^{-1}`.
    pub probes: Vec<M4>,
    pub index_exponent: u32,
}

impl GroupJ {
    pub fn new(setup: &CaseSetup, flavor: Flavor) -> Result<Self> {
        let n = setup.n;
        let h = setup.half_level();
        let prime = prime_part(setup, n);
        let frak = match flavor {
            Flavor::J => prime.sum(&perp_part(setup, h)),
            Flavor::JPrime => prime,
        };
        let frak_skew = skew_part(&frak, setup)?;
        let outer = match flavor {
            Flavor::J => filtration_shape(&setup.seq, h),
            Flavor::JPrime => filtration_shape(&setup.seq, n),
        };
        Ok(GroupJ {
            setup: setup.clone(),
            flavor,
            frak,
            frak_skew,
            outer,
            inner: filtration_shape(&setup.seq, n),
            omega: Omega::standard(setup.ctx.p, 1),
        })
    }

    pub fn q(&self) -> i64 {
        self.setup.q()
    }

    /// `x in J` for a group element `x` (of `G'` in the primed flavour).
    pub fn contains(&self, x: &M4) -> Result<bool> {
        let d = *x - M4::identity(&self.setup.ctx);
        match self.outer.contains(&d) {
            None => return Err(Error::precision("J membership", self.setup.ctx.prec as u32 + 1)),
            Some(false) => return Ok(false),
            Some(true) => {}
        }
        let (xb, xp) = self.setup.split.project(&d);
        match self.flavor {
            Flavor::J => self.inner.contains(&xb).ok_or_else(|| Error::precision("J membership", self.setup.ctx.prec as u32 + 1)),
            Flavor::JPrime => Ok(xp.is_zero()),
        }
    }

    /// `Psi(x)` for `x` already known to lie in `J`.
    pub fn psi_unchecked(&self, x: &M4) -> Result<RootArg> {
        let d = *x - M4::identity(&self.setup.ctx);
        self.omega.eval(&trace_to_base(&(self.setup.beta * d)))
    }

    pub fn psi(&self, x: &M4) -> Result<RootArg> {
        if !self.contains(x)? {
            return Err(Error::InvalidInput(format!("element is not in {}", self.flavor.label())));
        }
        self.psi_unchecked(x)
    }

    /// `frakJ cap g frakJ g^{-1}`.
    pub fn meet(&self, g: &M4, g_inv: &M4) -> ZpModule {
        self.frak.intersect(&conjugate_module(&self.frak, g, g_inv))
    }

    /// `log_q [JgJ : J] = log_q [g cap frakJ : g cap frakJ cap g frakJ g^{-1}]`.
    pub fn index_exponent(&self, g: &M4) -> Result<u32> {
        let g_inv = g.inverse()?;
        let m = skew_part(&self.meet(g, &g_inv), &self.setup)?;
        let e = self.frak_skew.index_exponent(&m)?;
        u32::try_from(e).map_err(|_| Error::InternalInconsistency("negative index".into()))
    }

    /// The same index from the full (non-skew) lattices: the skew part has
    /// exactly half the `Z_p`-length because `sqrt eps` swaps the two eigenspaces of sigma.
    pub fn index_exponent_full(&self, g: &M4) -> Result<u32> {
        let g_inv = g.inverse()?;
        let e = self.frak.index_exponent(&self.meet(g, &g_inv))?;
        if e % 2 != 0 {
            return Err(Error::InternalInconsistency("odd full index".into()));
        }
        Ok((e / 2) as u32)
    }

    /// Element of `J` from a skew element of `frakJ`.
    pub fn from_skew(&self, x: &M4) -> Result<M4> {
        cayley(x, &self.setup.ctx)
    }

    fn random_in<R: Rng + ?Sized>(&self, rng: &mut R, l: &ZpModule) -> Result<M4> {
        let c = &self.setup.ctx;
        let mut v = vec![c.zero(); 32];
        for row in l.rows() {
            let k = c.int(rng.gen_range(0..(c.p.pow(3) as i64)));
            for (a, b) in v.iter_mut().zip(row) {
                *a = *a + k * *b;
            }
        }
        self.from_skew(&unflatten(&v))
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<M4> {
        self.random_in(rng, &self.frak_skew)
    }

    /// Random element of `P_{Lambda,k}`, inside `G'` when `centralizer` is set.
    pub fn random_level_element<R: Rng + ?Sized>(&self, rng: &mut R, k: i32, centralizer: bool) -> Result<M4> {
        let l = if centralizer {
            skew_part(&prime_part(&self.setup, k), &self.setup)?
        } else {
            ZpModule::skew_part_of_shape(&shape(&self.setup.seq, k), &self.setup.ctx)?
        };
        self.random_in(rng, &l)
    }

    /// Coset representatives from a complement of the skew parts, in the
    /// fixed order of the adapted basis. When the Cayley images of the
    /// additive representatives collide, the transversal is grown instead
    /// by left multiplication with the one-parameter generators.
    pub fn cosets(&self, g: &M4) -> Result<CosetFamily> {
        let g_inv = g.inverse()?;
        let meet = self.meet(g, &g_inv);
        let m_skew = skew_part(&meet, &self.setup)?;
        let want = self.setup.ctx.p.pow(self.frak_skew.index_exponent(&m_skew)? as u32) as usize;
        let add = self.frak_skew.quotient_reps(&m_skew, &self.setup.ctx, COSET_LIMIT)?;
        let reps: Vec<M4> = add.iter().map(|v| self.from_skew(&unflatten(v))).collect::<Result<_>>()?;
        let keyer = CosetKeyer::new(self, &meet)?;
        let reps = if keyer.count(&reps)? == want {
            reps
        } else {
            let gens: Vec<M4> = self
                .frak_skew
                .quotient_gens(&m_skew)?
                .iter()
                .map(|(l, _)| self.from_skew(&unflatten(l)))
                .collect::<Result<_>>()?;
            self.grow_transversal(&keyer, &gens, want)?
        };
        self.family(g, g_inv, reps, &keyer, &m_skew)
    }

    fn grow_transversal(&self, keyer: &CosetKeyer, gens: &[M4], want: usize) -> Result<Vec<M4>> {
        let one = M4::identity(&self.setup.ctx);
        let mut seen = HashSet::new();
        seen.insert(keyer.key(&one)?);
        let mut reps = vec![one];
        let mut i = 0;
        while i < reps.len() && reps.len() < want {
            let r = reps[i];
            for x in gens {
                let y = *x * r;
                if seen.insert(keyer.key(&y)?) {
                    reps.push(y);
                    if reps.len() == want {
                        break;
                    }
                }
            }
            i += 1;
        }
        Ok(reps)
    }

    /// Use the given representatives after checking them.
    pub fn cosets_from(&self, g: &M4, reps: Vec<M4>) -> Result<CosetFamily> {
        let g_inv = g.inverse()?;
        let meet = self.meet(g, &g_inv);
        let m_skew = skew_part(&meet, &self.setup)?;
        let keyer = CosetKeyer::new(self, &meet)?;
        self.family(g, g_inv, reps, &keyer, &m_skew)
    }

    fn family(&self, g: &M4, g_inv: M4, reps: Vec<M4>, keyer: &CosetKeyer, m_skew: &ZpModule) -> Result<CosetFamily> {
        let idx = self.frak_skew.index_exponent(m_skew)?;
        let want = self.setup.ctx.p.pow(idx as u32) as usize;
        if reps.len() != want {
            return Err(Error::InternalInconsistency(format!(
                "{} representatives for an index of {want}",
                reps.len()
            )));
        }
        for y in &reps {
            if !self.contains(y)? {
                return Err(Error::InternalInconsistency("coset representative outside J".into()));
            }
        }
        let distinct = keyer.count(&reps)?;
        if distinct != want {
            return Err(Error::InternalInconsistency(format!(
                "representatives fall into {distinct} cosets of J cap gJg^-1, expected {want}"
            )));
        }
        let psi_inv = reps.iter().map(|y| self.psi_unchecked(y).map(|r| r.inv())).collect::<Result<_>>()?;
        let probes = reps.iter().map(|y| g_inv * y.inverse().expect("unitary")).collect();
        Ok(CosetFamily { g: *g, g_inv, reps, psi_inv, probes, index_exponent: idx as u32 })
    }

    /// Number of distinct cosets `y K`, `K = (1 + M) cap G`, among `reps`.
    pub fn count_distinct(&self, reps: &[M4], meet: &ZpModule) -> Result<usize> {
        CosetKeyer::new(self, meet)?.count(reps)
    }

    /// `f_g(h)` from the family of `g`: `Psi(y_i)^{-1} Psi(j)^{-1}` when
    /// `h = y_i g j`, `None` off `JgJ`.
    pub fn eval_basis(&self, fam: &CosetFamily, h: &M4) -> Result<Option<RootArg>> {
        for (probe, pi) in fam.probes.iter().zip(&fam.psi_inv) {
            let j = *probe * *h;
            if self.contains(&j)? {
                return Ok(Some(pi.mul(self.psi_unchecked(&j)?.inv())));
            }
        }
        Ok(None)
    }

    /// Samples `k` in `J cap g J g^{-1}` and checks `Psi(k) = Psi(g^{-1} k g)`.
    pub fn intertwines<R: Rng + ?Sized>(&self, g: &M4, rng: &mut R, samples: usize) -> Result<bool> {
        let g_inv = g.inverse()?;
        let meet = self.meet(g, &g_inv);
        let m_skew = skew_part(&meet, &self.setup)?;
        for _ in 0..samples {
            let k = self.random_in(rng, &m_skew)?;
            let k2 = g_inv * k * *g;
            if !self.contains(&k)? || !self.contains(&k2)? {
                return Err(Error::InternalInconsistency("sample outside J cap gJg^-1".into()));
            }
            if self.psi_unchecked(&k)? != self.psi_unchecked(&k2)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Canonical labels for the cosets `y K`, `K = (1 + M) cap G`, through the
/// Hermite form of the affine lattice `y + yM`.
struct CosetKeyer {
    /// Set when `frakJ M subset M`, so that `yM = M` for every `y` in `J`.
    fixed: Option<Hermite>,
    basis: Vec<M4>,
    shift: i32,
}

impl CosetKeyer {
    fn new(gj: &GroupJ, meet: &ZpModule) -> Result<Self> {
        let shift = min_val(&gj.frak).min(0);
        let basis = meet.basis_matrices();
        let stable = gj
            .frak
            .basis_matrices()
            .iter()
            .all(|a| basis.iter().all(|b| meet.contains_matrix(&(*a * *b)) == Some(true)));
        let fixed = if stable { Some(Hermite::new(32, meet.rows().to_vec(), shift)?) } else { None };
        Ok(CosetKeyer { fixed, basis, shift })
    }

    fn key(&self, y: &M4) -> Result<Vec<u64>> {
        if let Some(h) = &self.fixed {
            return h.reduce(&flatten(y));
        }
        let gens: Vec<_> = self.basis.iter().map(|b| flatten(&(*y * *b))).collect();
        let h = Hermite::new(32, gens, self.shift)?;
        let mut key = h.key()?;
        key.extend(h.reduce(&flatten(y))?);
        Ok(key)
    }

    fn count(&self, reps: &[M4]) -> Result<usize> {
        let mut seen = HashSet::new();
        for y in reps {
            seen.insert(self.key(y)?);
        }
        Ok(seen.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::setup::HeckeCase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn psi_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in [HeckeCase::A, HeckeCase::C, HeckeCase::D] {
            let s = CaseSetup::new(case, 3, 1).unwrap();
            let gj = GroupJ::new(&s, Flavor::J).unwrap();
            for _ in 0..20 {
                let x = gj.random_element(&mut rng).unwrap();
                let y = gj.random_element(&mut rng).unwrap();
                assert!(s.is_unitary(&x));
                assert!(gj.contains(&x).unwrap());
                let xy = x * y;
                assert!(gj.contains(&xy).unwrap());
                assert_eq!(gj.psi(&xy).unwrap(), gj.psi(&x).unwrap().mul(gj.psi(&y).unwrap()));
            }
        }
    }

    #[test]
    fn identity_cosets_and_index() {
        let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
        let gj = GroupJ::new(&s, Flavor::J).unwrap();
        let one = M4::identity(&s.ctx);
        assert_eq!(gj.index_exponent(&one).unwrap(), 0);
        let fam = gj.cosets(&one).unwrap();
        assert_eq!(fam.reps.len(), 1);
    }

    #[test]
    fn s2_index_in_case_c() {
        let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
        let gj = GroupJ::new(&s, Flavor::J).unwrap();
        let s2 = s.s(2).unwrap();
        assert_eq!(gj.index_exponent(&s2).unwrap(), 3);
        assert_eq!(gj.index_exponent_full(&s2).unwrap(), 3);
        let fam = gj.cosets(&s2).unwrap();
        assert_eq!(fam.reps.len(), 27);
    }
}
