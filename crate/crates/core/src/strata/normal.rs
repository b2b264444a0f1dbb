use serde::{Deserialize, Serialize};

use super::{char_poly, CaseLabel, Stratum};
use crate::error::{Error, Result};
use crate::filtration::filtration_shape;
use crate::kf::{KPoly, Kf};
use crate::lattice::{HermSpace, StandardSeq};
use crate::matrix::{Mat, M2, M4};
use crate::padic::{Ctx, Quad};

/// Which residual characteristic polynomial on `st20` is being normalized:
/// `a` is `(X - l)^2 (X - conj l)^2`, `c` is `(X - u)^4`, `d` is `(X - u)^2 X^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalCase {
    A,
    C,
    D,
}

/// The three normal forms of case `d`, told apart by the ranks of the
/// residues of `X` and `Z`: `(1, 1)`, `(2, 1)` and `(1, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DForm {
    Plain,
    UpperExtra,
    LowerExtra,
}

/// Template entries of a skew `beta` on `st20`:
/// `X = [[C, a s], [b s, -conj C]]`, `Z = [[D, c s], [d s, -conj D]]`, `s = sqrt(eps)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct St20Blocks {
    pub cc: Quad,
    pub a: Quad,
    pub b: Quad,
    pub dd: Quad,
    pub c: Quad,
    pub d: Quad,
}

impl St20Blocks {
    pub fn x(&self, ctx: &Ctx) -> M2 {
        let s = ctx.sqrt_eps();
        Mat { a: [[self.cc, self.a * s], [self.b * s, -self.cc.conj()]] }
    }

    pub fn z(&self, ctx: &Ctx) -> M2 {
        let s = ctx.sqrt_eps();
        Mat { a: [[self.dd, self.c * s], [self.d * s, -self.dd.conj()]] }
    }
}

/// `beta = p^{-m} [[0, X], [p Z, 0]]` in 2x2 blocks.
pub fn st20_beta(c: &Ctx, m: i32, blocks: &St20Blocks) -> M4 {
    let (x, z) = (blocks.x(c), blocks.z(c));
    let mut b = M4::zero(c);
    for i in 0..2 {
        for j in 0..2 {
            b.a[i][j + 2] = x.a[i][j].shift(-m);
            b.a[i + 2][j] = z.a[i][j].shift(1 - m);
        }
    }
    b
}

/// `g(Y) = diag(Y, S conj(Y)^{-t} S)`, an element of `P_0(st20)`.
pub fn g_of(y: &M2, c: &Ctx) -> Result<M4> {
    let w = y.conj_transpose().inverse()?;
    let sws = Mat { a: [[w.a[1][1], w.a[1][0]], [w.a[0][1], w.a[0][0]]] };
    let mut g = M4::zero(c);
    g.embed([0, 1], y);
    g.embed([2, 3], &sws);
    Ok(g)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub lambda: Option<(u64, u64)>,
    pub u: Option<u64>,
    pub c: Option<u64>,
    pub d: Option<u64>,
    pub d_form: Option<DForm>,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub case: NormalCase,
    /// The normal form itself, built from small-integer lifts of the residue parameters.
    pub beta: M4,
    /// `Ad(g) beta_in`, exactly; it differs from `beta` by an element of `a_{1-n}`.
    pub conjugated: M4,
    pub conjugator: M4,
    pub params: NormalParams,
}

type K2 = [[Kf; 2]; 2];

fn k2_mul(x: &K2, y: &K2) -> K2 {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][0] * y[0][j] + x[i][1] * y[1][j]))
}

fn k2_rank(x: &K2) -> usize {
    let det = x[0][0] * x[1][1] - x[0][1] * x[1][0];
    if !det.is_zero() {
        2
    } else if x.iter().flatten().any(|v| !v.is_zero()) {
        1
    } else {
        0
    }
}

struct Residues {
    x: K2,
    z: K2,
}

fn residues(beta: &M4, m: i32) -> Result<Residues> {
    let mut x = [[Kf::zero(beta.p()); 2]; 2];
    let mut z = x;
    for i in 0..2 {
        for j in 0..2 {
            x[i][j] = Kf::reduce(&beta.a[i][j + 2].shift(m))?;
            z[i][j] = Kf::reduce(&beta.a[i + 2][j].shift(m - 1))?;
        }
    }
    Ok(Residues { x, z })
}

/// Residual action of `g(Y)`: `X -> Y X S conj(Y)^t S`, `Z -> S conj(Y)^{-t} S Z Y^{-1}`.
fn act(y: &K2, r: &Residues) -> Option<Residues> {
    let det = y[0][0] * y[1][1] - y[0][1] * y[1][0];
    let di = det.inv().ok()?;
    let yi: K2 = [[y[1][1] * di, -y[0][1] * di], [-y[1][0] * di, y[0][0] * di]];
    // S conj(Y)^t S has entries conj(Y)[1-j][1-i]
    let syts: K2 = std::array::from_fn(|i| std::array::from_fn(|j| y[1 - j][1 - i].conj()));
    let syits: K2 = std::array::from_fn(|i| std::array::from_fn(|j| yi[1 - j][1 - i].conj()));
    Some(Residues { x: k2_mul(&k2_mul(y, &r.x), &syts), z: k2_mul(&k2_mul(&syits, &r.z), &yi) })
}

fn half_system(v: u64, p: u64) -> bool {
    v >= 1 && v <= (p - 1) / 2
}

/// Check the residues against the target of `case`; returns the parameters.
fn matches(case: NormalCase, form: Option<DForm>, r: &Residues, p: u64) -> Option<NormalParams> {
    let zero = Kf::zero(p);
    let one = Kf::one(p);
    let s = Kf::sqrt_eps(p);
    let x_diag = r.x == [[one, zero], [zero, -one]];
    match case {
        NormalCase::A => {
            let l = r.z[0][0];
            let ok = x_diag && r.z[0][1].is_zero() && r.z[1][0].is_zero() && !l.in_base() && half_system(l.b, p);
            ok.then(|| NormalParams { lambda: Some((l.a, l.b)), ..Default::default() })
        }
        NormalCase::C => {
            let u = r.z[0][0];
            let c = r.z[0][1];
            let ok = x_diag && r.z[1][0].is_zero() && u.in_base() && !u.is_zero() && c.in_sqrt_eps_line();
            ok.then(|| NormalParams { u: Some(u.a), c: Some(c.b), ..Default::default() })
        }
        NormalCase::D => {
            let form = form?;
            let xt = match form {
                DForm::UpperExtra => [[zero, s], [s, zero]],
                _ => [[zero, s], [zero, zero]],
            };
            let z_extra = if form == DForm::LowerExtra { s } else { zero };
            let d = r.z[1][0];
            let ok = r.x == xt
                && r.z[0][0].is_zero()
                && r.z[1][1].is_zero()
                && r.z[0][1] == z_extra
                && d.in_sqrt_eps_line()
                && !d.is_zero();
            ok.then(|| NormalParams { d: Some(d.b), d_form: Some(form), ..Default::default() })
        }
    }
}

fn expected_label(case: NormalCase) -> CaseLabel {
    match case {
        NormalCase::A => CaseLabel::E2a,
        NormalCase::C => CaseLabel::E2c,
        NormalCase::D => CaseLabel::E2b,
    }
}

/// Conjugate a fundamental skew stratum on `st20` by some `g(Y)` into the
/// normal form of `case`, searching `Y` over `GL_2(k_F)` in a fixed order.
pub fn normalize_beta(st: &Stratum, case: NormalCase, c: &Ctx) -> Result<NormalForm> {
    if st.seq.frame().is_some() || st.seq.exponents() != StandardSeq::St20.exponents().as_slice() {
        return Err(Error::InvalidInput("normal forms are defined on st20".into()));
    }
    if st.n % 2 == 0 || st.n < 1 {
        return Err(Error::InvalidInput("n must be odd and positive".into()));
    }
    if !st.is_skew() {
        return Err(Error::InvalidInput("stratum is not skew".into()));
    }
    let rep = char_poly(st)?;
    let p = c.p;
    if !rep.fundamental || rep.case_label != Some(expected_label(case)) {
        return Err(Error::InvalidInput(format!("characteristic polynomial {:?} does not match case {case:?}", rep.phi)));
    }
    let x = KPoly::x_pow(p, 1);
    if case == NormalCase::D && rep.phi.divmod(&(&x * &x)).1 != KPoly::new(p, vec![]) {
        return Err(Error::InvalidInput("case d needs X^2 to divide phi".into()));
    }
    let m = (st.n + 1) / 2;
    let res = residues(&st.beta, m)?;
    let form = match (case, k2_rank(&res.x), k2_rank(&res.z)) {
        (NormalCase::D, 1, 1) => Some(DForm::Plain),
        (NormalCase::D, 2, 1) => Some(DForm::UpperExtra),
        (NormalCase::D, 1, 2) => Some(DForm::LowerExtra),
        (NormalCase::D, rx, rz) => {
            return Err(Error::NormalizationFailure(format!("case d with residue ranks ({rx}, {rz})")));
        }
        _ => None,
    };
    let all = Kf::all(p);
    let mut found = None;
    'search: for &y00 in &all {
        for &y01 in &all {
            for &y10 in &all {
                for &y11 in &all {
                    let y = [[y00, y01], [y10, y11]];
                    let Some(r) = act(&y, &res) else { continue };
                    if let Some(params) = matches(case, form, &r, p) {
                        found = Some((y, params));
                        break 'search;
                    }
                }
            }
        }
    }
    let Some((y, params)) = found else {
        return Err(Error::NormalizationFailure(format!("no g(Y) reaches the case {case:?} form")));
    };
    let ylift: M2 = Mat::from_fn(|i, j| y[i][j].lift(c));
    let g = g_of(&ylift, c)?;
    let gi = g.inverse()?;
    let conjugated = M4::ad(&g, &gi, &st.beta);
    let q = |v: Option<u64>| c.qint(v.unwrap_or(0) as i64);
    let zero = c.qzero();
    let one = c.qone();
    let blocks = match case {
        NormalCase::A => {
            let (la, lb) = params.lambda.unwrap();
            St20Blocks { cc: one, a: zero, b: zero, dd: c.quad(la as i64, lb as i64), c: zero, d: zero }
        }
        NormalCase::C => St20Blocks { cc: one, a: zero, b: zero, dd: q(params.u), c: q(params.c), d: zero },
        NormalCase::D => {
            let f = params.d_form.unwrap();
            St20Blocks {
                cc: zero,
                a: one,
                b: if f == DForm::UpperExtra { one } else { zero },
                dd: zero,
                c: if f == DForm::LowerExtra { one } else { zero },
                d: q(params.d),
            }
        }
    };
    let beta = st20_beta(c, m, &blocks);
    // checks: g in P_0, Ad(g) beta_in congruent to beta modulo a_{1-n}
    let a0 = filtration_shape(&st.seq, 0);
    if a0.contains(&g) != Some(true) || a0.contains(&gi) != Some(true) || !HermSpace::split(c).is_unitary(&g, c) {
        return Err(Error::InternalInconsistency("conjugator is not in P_0".into()));
    }
    if filtration_shape(&st.seq, 1 - st.n).contains(&(conjugated - beta)) != Some(true) {
        return Err(Error::InternalInconsistency("conjugated beta is not congruent to the normal form".into()));
    }
    Ok(NormalForm { case, beta, conjugated, conjugator: g, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{random_skew, shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> Ctx {
        Ctx::new(3, 16).unwrap()
    }

    fn st20() -> crate::lattice::LatticeSeq<4> {
        StandardSeq::St20.build(&ctx())
    }

    /// Conjugate by a random `g(Y)` and add noise from `a_{1-n}` (skew).
    fn disguise(beta: M4, n: i32, rng: &mut ChaCha8Rng) -> M4 {
        let c = ctx();
        let y: M2 = loop {
            let y = Mat::from_fn(|_, _| c.random_quad(rng, 0));
            if !y.det().is_zero() && y.det().val() == 0 {
                break y;
            }
        };
        let g = g_of(&y, &c).unwrap();
        let noise = random_skew(rng, &shape(&st20(), 1 - n), &c).unwrap();
        M4::ad(&g, &g.inverse().unwrap(), &beta) + noise
    }

    #[test]
    fn template_is_skew() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let r = |rng: &mut ChaCha8Rng| c.random_quad(rng, 0);
        let re = |rng: &mut ChaCha8Rng| Quad::new(c.random_integral(rng, 0), c.zero());
        let b = St20Blocks { cc: r(&mut rng), a: re(&mut rng), b: re(&mut rng), dd: r(&mut rng), c: re(&mut rng), d: re(&mut rng) };
        let beta = st20_beta(&c, 2, &b);
        assert!((beta + beta.sigma()).is_zero());
        assert!(Stratum::new(st20(), 3, 2, beta).unwrap().is_skew());
    }

    #[test]
    fn case_a_recovers_diagonal_form() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let lam = c.quad(1, 1);
        let b = St20Blocks { cc: c.qone(), a: c.qzero(), b: c.qzero(), dd: lam, c: c.qzero(), d: c.qzero() };
        for m in [1, 2] {
            let n = 2 * m - 1;
            let st = Stratum::new(st20(), n, n - 1, disguise(st20_beta(&c, m, &b), n, &mut rng)).unwrap();
            let nf = normalize_beta(&st, NormalCase::A, &c).unwrap();
            let (la, lb) = nf.params.lambda.unwrap();
            assert!(half_system(lb, 3));
            assert_eq!(la, 1);
            let back = Stratum::new(st20(), n, n - 1, nf.beta).unwrap();
            assert!((nf.beta + nf.beta.sigma()).is_zero());
            assert_eq!(char_poly(&back).unwrap().phi, char_poly(&st).unwrap().phi);
        }
    }

    #[test]
    fn case_c_from_antidiagonal_x() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        // X = [[0, s], [s, 0]], Z = [[0, s], [s, 0]]: XZ = eps * 1 is scalar
        let one = c.qone();
        let z = c.qzero();
        let b = St20Blocks { cc: z, a: one, b: one, dd: z, c: one, d: one };
        let st = Stratum::new(st20(), 1, 0, disguise(st20_beta(&c, 1, &b), 1, &mut rng)).unwrap();
        let nf = normalize_beta(&st, NormalCase::C, &c).unwrap();
        assert_eq!(nf.params.u, Some(c.eps() % 3));
        let r = residues(&nf.beta, 1).unwrap();
        assert!(r.z[1][0].is_zero());
    }

    #[test]
    fn case_d_three_forms() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let one = c.qone();
        let z = c.qzero();
        for (bb, cc, want) in [(z, z, DForm::Plain), (one, z, DForm::UpperExtra), (z, one, DForm::LowerExtra)] {
            let d = c.qint(1 + rng.gen_range(0..2));
            let b = St20Blocks { cc: z, a: one, b: bb, dd: z, c: cc, d };
            let st = Stratum::new(st20(), 3, 2, disguise(st20_beta(&c, 2, &b), 3, &mut rng)).unwrap();
            let nf = normalize_beta(&st, NormalCase::D, &c).unwrap();
            assert_eq!(nf.params.d_form, Some(want));
            assert_eq!(nf.params.d, Some(d.re.unit() % 3));
            // u = d eps is the non-zero root of phi
            let u = Kf::new(3, (d.re.unit() * c.eps()) as i64, 0);
            let roots = char_poly(&st).unwrap().phi.roots();
            assert!(roots.contains(&(u, 2)));
        }
    }
}
