use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{filtration_shape, named_sequence};
use crate::lattice::{HermSpace, LatticeSeq, StandardSeq};
use crate::matrix::M4;
use crate::padic::{max_precision, Ctx, Padic, Quad};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeckeCase {
    /// Split: `st_20`, `beta` with residue eigenvalues `lambda != conj lambda`.
    A,
    /// Ramified quadratic `E = F[beta]` on the period-8 sequence `L2`.
    C,
    /// `beta` vanishing on a plane, period-8 sequence `L1`.
    D,
}

impl HeckeCase {
    pub fn label(&self) -> &'static str {
        match self {
            HeckeCase::A => "a",
            HeckeCase::C => "c",
            HeckeCase::D => "d",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "a" => Some(HeckeCase::A),
            "c" => Some(HeckeCase::C),
            "d" => Some(HeckeCase::D),
            _ => None,
        }
    }
}

/// A coordinate block `V_j` with `beta|V_j` squaring to `c_j` (`None` when
/// `beta|V_j = 0`).
#[derive(Clone, Debug)]
pub struct Block {
    pub idx: Vec<usize>,
    pub square: Option<Quad>,
}

/// `A = B + B^perp` through `s(X) = sum_j pi_j(P_j X P_j)`, where
/// `pi_j(Y) = (Y + beta Y beta_j^{-1}) / 2` on blocks where `beta` is invertible.
#[derive(Clone, Debug)]
pub struct CentralizerSplit {
    pub beta: M4,
    pub blocks: Vec<Block>,
    half: Quad,
    /// `beta_j^{-1} = beta P_j / c_j`, summed over the invertible blocks.
    inv_parts: Vec<(Vec<usize>, M4)>,
}

impl CentralizerSplit {
    pub fn new(beta: M4, blocks: Vec<Vec<usize>>, c: &Ctx) -> Result<Self> {
        let sq = beta * beta;
        let mut out = Vec::new();
        let mut inv_parts = Vec::new();
        for idx in blocks {
            let mut proj = M4::zero(c);
            for &i in &idx {
                proj.a[i][i] = c.qone();
            }
            let bj = beta * proj;
            if bj.is_zero() {
                out.push(Block { idx, square: None });
                continue;
            }
            let cj = sq.a[idx[0]][idx[0]];
            if !(sq * proj - proj.scale(cj)).is_zero() {
                return Err(Error::InvalidInput("beta restricted to a block does not square to a scalar".into()));
            }
            inv_parts.push((idx.clone(), bj.scale(cj.inv()?)));
            out.push(Block { idx, square: Some(cj) });
        }
        let covered: usize = out.iter().map(|b| b.idx.len()).sum();
        if covered != 4 {
            return Err(Error::InvalidInput("blocks do not partition the coordinates".into()));
        }
        Ok(CentralizerSplit { beta, blocks: out, half: c.qint(2).inv()?, inv_parts })
    }

    fn compress(x: &M4, idx: &[usize]) -> M4 {
        let p = x.p();
        let z = Quad::new(Padic::exact_zero(p), Padic::exact_zero(p));
        let mut out = M4::from_fn(|_, _| z);
        for &i in idx {
            for &j in idx {
                out.a[i][j] = x.a[i][j];
            }
        }
        out
    }

    /// The `B`-component `s(X)`.
    pub fn s(&self, x: &M4) -> M4 {
        let mut acc: Option<M4> = None;
        for blk in &self.blocks {
            let y = Self::compress(x, &blk.idx);
            let part = match blk.square {
                None => y,
                Some(_) => {
                    let inv = &self.inv_parts.iter().find(|(i, _)| *i == blk.idx).expect("block inverse").1;
                    (y + self.beta * y * *inv).scale(self.half)
                }
            };
            acc = Some(match acc {
                None => part,
                Some(a) => a + part,
            });
        }
        acc.expect("at least one block")
    }

    /// `(X', X^perp)` with `X = X' + X^perp`.
    pub fn project(&self, x: &M4) -> (M4, M4) {
        let xb = self.s(x);
        (xb, *x - xb)
    }
}

/// The pinned data of one of the three Hecke computations.
#[derive(Clone, Debug)]
pub struct CaseSetup {
    pub case: HeckeCase,
    pub m: i32,
    /// Level of the stratum on `Lambda`: `8m - 4` for cases c and d, `2m - 1` for case a.
    pub n: i32,
    /// `2m - 1`, the level on `st_20`.
    pub n_prime: i32,
    pub seq: LatticeSeq<4>,
    pub beta: M4,
    pub split: CentralizerSplit,
    /// `alpha` (case c), `d` (case d) or `lambda` (case a).
    pub param: Quad,
    pub ctx: Ctx,
}

impl CaseSetup {
    /// Default parameters `alpha = 1`, `d = 1`, `lambda = sqrt eps`.
    pub fn new(case: HeckeCase, p: u64, m: i32) -> Result<Self> {
        let c = Ctx::new(p, max_precision(p))?;
        let param = match case {
            HeckeCase::A => c.sqrt_eps(),
            _ => c.qone(),
        };
        Self::with_param(case, p, m, param)
    }

    pub fn with_param(case: HeckeCase, p: u64, m: i32, param: Quad) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidInput(format!("m = {m} must be positive")));
        }
        let c = Ctx::new(p, max_precision(p))?;
        let n_prime = 2 * m - 1;
        let pm = c.qpi(-m);
        let pi = c.qpi(1);
        let se = c.sqrt_eps();
        let one = c.qone();
        let (seq, n, beta, blocks, want_d) = match case {
            HeckeCase::C => {
                if param.val() != 0 || !param.im.is_exact_zero() {
                    return Err(Error::InvalidInput("alpha must be a unit of o_0".into()));
                }
                let mut b = M4::zero(&c);
                b.a[0][2] = one;
                b.a[1][3] = -one;
                b.a[2][0] = pi * param;
                b.a[3][1] = -(pi * param);
                let seq = named_sequence(&c, "L2").expect("L2");
                (seq, 8 * m - 4, b.scale(pm), vec![vec![0, 1, 2, 3]], 2)
            }
            HeckeCase::D => {
                if param.val() != 0 || !param.im.is_exact_zero() {
                    return Err(Error::InvalidInput("d must be a unit of o_0".into()));
                }
                let mut b = M4::zero(&c);
                b.a[0][3] = se;
                b.a[3][0] = pi * param * se;
                let seq = named_sequence(&c, "L1").expect("L1");
                (seq, 8 * m - 4, b.scale(pm), vec![vec![1, 2], vec![0, 3]], 3)
            }
            HeckeCase::A => {
                if param.val() != 0 || !(param - param.conj()).val_at_least(1).map(|b| !b).unwrap_or(false) {
                    return Err(Error::InvalidInput("lambda must be integral with lambda != conj lambda mod p".into()));
                }
                let mut b = M4::zero(&c);
                b.a[0][2] = one;
                b.a[1][3] = -one;
                b.a[2][0] = pi * param;
                b.a[3][1] = -(pi * param.conj());
                let seq = StandardSeq::St20.build(&c);
                (seq, n_prime, b.scale(pm), vec![vec![0, 2], vec![1, 3]], 0)
            }
        };
        if filtration_shape(&seq, -n).contains(&beta) != Some(true) || !(beta + beta.sigma()).is_zero() {
            return Err(Error::InternalInconsistency("beta is not in g_{-n}".into()));
        }
        if seq.duality_index() != Some(want_d) {
            return Err(Error::InternalInconsistency(format!(
                "duality index {:?}, expected {want_d}",
                seq.duality_index()
            )));
        }
        let split = CentralizerSplit::new(beta, blocks, &c)?;
        Ok(CaseSetup { case, m, n, n_prime, seq, beta, split, param, ctx: c })
    }

    pub fn q(&self) -> i64 {
        self.ctx.q() as i64
    }

    /// `[n/2] + 1`.
    pub fn half_level(&self) -> i32 {
        self.n / 2 + 1
    }

    pub fn herm(&self) -> HermSpace<4> {
        HermSpace::split(&self.ctx)
    }

    pub fn is_unitary(&self, g: &M4) -> bool {
        self.herm().is_unitary(g, &self.ctx)
    }

    pub fn in_centralizer(&self, g: &M4) -> bool {
        (self.beta * *g - *g * self.beta).is_zero()
    }

    fn need(&self, case: HeckeCase, what: &str) -> Result<()> {
        if self.case == case {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is defined for case {} only", case.label())))
        }
    }

    // ---- case c: E = F[beta] and the identification M_2(E) = B ----

    /// `varpi_E^2 = varpi alpha eps`.
    pub fn pi_e_square(&self) -> Quad {
        let c = &self.ctx;
        c.qpi(1) * self.param * c.qint(c.eps() as i64)
    }

    /// The image in `B` of a `2 x 2` matrix over `E`.
    pub fn embed_e(&self, x: &[[ElemE; 2]; 2]) -> Result<M4> {
        self.need(HeckeCase::C, "the M_2(E) identification")?;
        let c = &self.ctx;
        let se = c.sqrt_eps();
        let sei = se.inv()?;
        let eps = c.qint(c.eps() as i64);
        let pa = c.qpi(1) * self.param;
        let [[p0, p1], [p2, p3]] = x;
        let (a, xx) = (p0.a, p0.b);
        let (b, y) = (p1.a, p1.b);
        let (cc, z) = (p2.a, p2.b);
        let (d, w) = (p3.a, p3.b);
        Ok(M4 {
            a: [
                [a, -(b * sei), xx * se, y],
                [-(cc * se), d, -(eps * z), -(w * se)],
                [pa * xx * se, -(pa * y), a, b * sei],
                [pa * eps * z, -(pa * w * se), cc * se, d],
            ],
        })
    }

    pub fn e_const(&self, a: Quad) -> ElemE {
        ElemE { a, b: self.ctx.qzero() }
    }

    /// `varpi_E^k` for `k >= 0`.
    pub fn pi_e_pow(&self, k: u32) -> ElemE {
        let c = &self.ctx;
        let mut out = ElemE { a: c.qone(), b: c.qzero() };
        let pe = ElemE { a: c.qzero(), b: c.qone() };
        for _ in 0..k {
            out = out.mul(&pe, self.pi_e_square());
        }
        out
    }

    fn e_matrix(&self, a: ElemE, b: ElemE, cc: ElemE, d: ElemE) -> Result<M4> {
        self.embed_e(&[[a, b], [cc, d]])
    }

    // ---- generators ----

    /// The affine reflections `s_1`, `s_2` (cases c and d).
    pub fn s(&self, i: u8) -> Result<M4> {
        let c = &self.ctx;
        let (z, one) = (c.qzero(), c.qone());
        match (self.case, i) {
            (HeckeCase::C, 1) => {
                let (e0, e1) = (self.e_const(z), self.e_const(one));
                self.e_matrix(e0, e1, e1, e0)
            }
            (HeckeCase::C, 2) => {
                let e0 = self.e_const(z);
                let pe = ElemE { a: z, b: one };
                let pe_inv = pe.inv(self.pi_e_square())?;
                self.e_matrix(e0, pe_inv, pe, e0)
            }
            (HeckeCase::D, 1) => {
                let mut g = M4::zero(c);
                g.a[0][0] = one;
                g.a[1][2] = one;
                g.a[2][1] = one;
                g.a[3][3] = one;
                Ok(g)
            }
            (HeckeCase::D, 2) => {
                let mut g = M4::zero(c);
                g.a[0][0] = one;
                g.a[1][2] = c.qpi(-1);
                g.a[2][1] = c.qpi(1);
                g.a[3][3] = one;
                Ok(g)
            }
            _ => Err(Error::Unsupported(format!("s_{i} in case {}", self.case.label()))),
        }
    }

    /// `zeta^t` (case a).
    pub fn zeta(&self, t: i32) -> Result<M4> {
        self.need(HeckeCase::A, "zeta")?;
        let c = &self.ctx;
        let mut g = M4::zero(c);
        g.a[0][2] = (c.qpi(1) * self.param).inv()?;
        g.a[1][3] = c.qone();
        g.a[2][0] = c.qone();
        g.a[3][1] = c.qpi(1) * self.param.conj();
        let base = if t >= 0 { g } else { g.inverse()? };
        let mut out = M4::identity(c);
        for _ in 0..t.unsigned_abs() {
            out = out * base;
        }
        Ok(out)
    }

    /// `u(mu)` for `mu` in `E` (case c, as `ElemE`) or in `F` (case d, via `mu.a`).
    pub fn u(&self, mu: ElemE) -> Result<M4> {
        let c = &self.ctx;
        match self.case {
            HeckeCase::C => {
                let (e0, e1) = (self.e_const(c.qzero()), self.e_const(c.qone()));
                self.e_matrix(e1, mu, e0, e1)
            }
            HeckeCase::D => {
                let mut g = M4::identity(c);
                g.a[1][2] = mu.a;
                Ok(g)
            }
            HeckeCase::A => Err(Error::Unsupported("u(mu) in case a".into())),
        }
    }

    /// The lower unipotent `u_(mu)`.
    pub fn ul(&self, mu: ElemE) -> Result<M4> {
        let c = &self.ctx;
        match self.case {
            HeckeCase::C => {
                let (e0, e1) = (self.e_const(c.qzero()), self.e_const(c.qone()));
                self.e_matrix(e1, e0, mu, e1)
            }
            HeckeCase::D => {
                let mut g = M4::identity(c);
                g.a[2][1] = mu.a;
                Ok(g)
            }
            HeckeCase::A => Err(Error::Unsupported("u_(mu) in case a".into())),
        }
    }

    /// `h(nu) = diag(nu, sigma(nu)^{-1})`.
    pub fn h(&self, nu: ElemE) -> Result<M4> {
        let c = &self.ctx;
        match self.case {
            HeckeCase::C => {
                let e0 = self.e_const(c.qzero());
                let inv = nu.conj().inv(self.pi_e_square())?;
                self.e_matrix(nu, e0, e0, inv)
            }
            HeckeCase::D => {
                let mut g = M4::identity(c);
                g.a[1][1] = nu.a;
                g.a[2][2] = nu.a.conj().inv()?;
                Ok(g)
            }
            HeckeCase::A => Err(Error::Unsupported("h(nu) in case a".into())),
        }
    }
}

/// `a + varpi_E b` with `a, b` in `F`; in case d only `a` is used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElemE {
    pub a: Quad,
    pub b: Quad,
}

impl ElemE {
    pub fn from_f(a: Quad) -> Self {
        let p = a.p();
        ElemE { a, b: Quad::new(Padic::exact_zero(p), Padic::exact_zero(p)) }
    }

    pub fn mul(&self, o: &ElemE, pi_e_sq: Quad) -> ElemE {
        ElemE { a: self.a * o.a + pi_e_sq * self.b * o.b, b: self.a * o.b + self.b * o.a }
    }

    /// The conjugation of `E / E_0`: `varpi_E` is fixed.
    pub fn conj(&self) -> ElemE {
        ElemE { a: self.a.conj(), b: self.b.conj() }
    }

    pub fn neg(&self) -> ElemE {
        ElemE { a: -self.a, b: -self.b }
    }

    pub fn inv(&self, pi_e_sq: Quad) -> Result<ElemE> {
        let nrm = self.a * self.a - pi_e_sq * self.b * self.b;
        let ni = nrm.inv()?;
        Ok(ElemE { a: self.a * ni, b: -(self.b * ni) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_e(c: &Ctx, rng: &mut ChaCha8Rng) -> ElemE {
        ElemE { a: c.random_quad(rng, 0), b: c.random_quad(rng, 0) }
    }

    #[test]
    fn setups_build() {
        for case in [HeckeCase::A, HeckeCase::C, HeckeCase::D] {
            for m in [1, 2] {
                let s = CaseSetup::new(case, 3, m).unwrap();
                assert_eq!(s.split.s(&s.beta), s.beta);
            }
        }
    }

    #[test]
    fn projection_is_idempotent_bimodule_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for case in [HeckeCase::A, HeckeCase::C, HeckeCase::D] {
            let s = CaseSetup::new(case, 3, 1).unwrap();
            let c = s.ctx;
            for _ in 0..5 {
                let x: M4 = M4::from_fn(|_, _| c.random_quad(&mut rng, 0));
                let (xb, xp) = s.split.project(&x);
                assert_eq!(s.split.s(&xb), xb);
                assert!(s.split.s(&xp).is_zero());
                assert!(s.in_centralizer(&xb));
                // B-bimodule: s(b X) = b s(X) for b in B
                let b = s.split.s(&M4::from_fn(|_, _| c.random_quad(&mut rng, 0)));
                assert_eq!(s.split.s(&(b * x)), b * xb);
                // sigma-stable
                assert_eq!(s.split.s(&x.sigma()), xb.sigma());
            }
        }
    }

    #[test]
    fn e_identification_is_an_algebra_map() {
        let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
        let c = s.ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pe2 = s.pi_e_square();
        // varpi_E = varpi^m beta sqrt(eps)
        let pe = s.embed_e(&[[ElemE { a: c.qzero(), b: c.qone() }, s.e_const(c.qzero())], [
            s.e_const(c.qzero()),
            ElemE { a: c.qzero(), b: c.qone() },
        ]])
        .unwrap();
        assert_eq!(pe, s.beta.shift(s.m).scale(c.sqrt_eps()));
        for _ in 0..5 {
            let x = [[rand_e(&c, &mut rng), rand_e(&c, &mut rng)], [rand_e(&c, &mut rng), rand_e(&c, &mut rng)]];
            let y = [[rand_e(&c, &mut rng), rand_e(&c, &mut rng)], [rand_e(&c, &mut rng), rand_e(&c, &mut rng)]];
            let mut xy = [[s.e_const(c.qzero()); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    xy[i][j] = ElemE {
                        a: x[i][0].mul(&y[0][j], pe2).a + x[i][1].mul(&y[1][j], pe2).a,
                        b: x[i][0].mul(&y[0][j], pe2).b + x[i][1].mul(&y[1][j], pe2).b,
                    };
                }
            }
            let ex = s.embed_e(&x).unwrap();
            assert_eq!(ex * s.embed_e(&y).unwrap(), s.embed_e(&xy).unwrap());
            assert!(s.in_centralizer(&ex));
            let sx = [[x[1][1].conj(), x[0][1].conj()], [x[1][0].conj(), x[0][0].conj()]];
            assert_eq!(ex.sigma(), s.embed_e(&sx).unwrap());
        }
    }

    #[test]
    fn generators_are_unitary_and_centralize() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2] {
            for case in [HeckeCase::C, HeckeCase::D] {
                let s = CaseSetup::new(case, 3, m).unwrap();
                let c = s.ctx;
                let mu = s.e_const(c.sqrt_eps().scale(c.int(2)));
                let nu = ElemE { a: c.quad(1, 1), b: if case == HeckeCase::C { c.qone() } else { c.qzero() } };
                for g in [s.s(1).unwrap(), s.s(2).unwrap(), s.u(mu).unwrap(), s.ul(mu).unwrap(), s.h(nu).unwrap()] {
                    assert!(s.is_unitary(&g), "{case:?} {g:?}");
                    assert!(s.in_centralizer(&g));
                }
                let _ = rand_e(&c, &mut rng);
            }
            let s = CaseSetup::new(HeckeCase::A, 3, m).unwrap();
            let z = s.zeta(1).unwrap();
            assert!(s.is_unitary(&z));
            assert!(s.in_centralizer(&z));
            assert_eq!(s.zeta(1).unwrap() * s.zeta(-1).unwrap(), M4::identity(&s.ctx));
        }
    }

    #[test]
    fn s2_is_an_involution_in_case_c() {
        let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
        let s2 = s.s(2).unwrap();
        assert_eq!(s2 * s2, M4::identity(&s.ctx));
        let c = s.ctx;
        assert_eq!(s2.a[0][3], (c.qpi(1) * s.param * c.qint(c.eps() as i64)).inv().unwrap());
    }
}
