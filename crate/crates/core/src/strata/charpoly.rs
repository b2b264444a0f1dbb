use serde::{Deserialize, Serialize};

use super::Stratum;
use crate::error::{Error, Result};
use crate::filtration::filtration_shape;
use crate::kf::{leibniz_charpoly, KMat, KPoly, Kf};
use crate::matrix::{Mat, M4};
use crate::padic::{Ctx, Quad};

/// Coefficients of `det(X - A)`, constant term first, by the division-free
/// Berkowitz recursion.
pub fn berkowitz<const N: usize>(a: &Mat<N>) -> Vec<Quad> {
    let one = unit_like(&a.a[0][0]);
    let zero = one - one;
    // descending coefficients of the running principal minor's char poly
    let mut vect = vec![one, -a.a[0][0]];
    for r in 1..N {
        let mut t = vec![one, -a.a[r][r]];
        let mut v: Vec<Quad> = (0..r).map(|i| a.a[i][r]).collect();
        for _ in 0..r {
            let mut rc = zero;
            for i in 0..r {
                rc = rc + a.a[r][i] * v[i];
            }
            t.push(-rc);
            v = (0..r)
                .map(|i| {
                    let mut s = zero;
                    for j in 0..r {
                        s = s + a.a[i][j] * v[j];
                    }
                    s
                })
                .collect();
        }
        let mut next = vec![zero; r + 2];
        for i in 0..r + 2 {
            for j in 0..=r.min(i) {
                next[i] = next[i] + t[i - j] * vect[j];
            }
        }
        vect = next;
    }
    vect.reverse();
    vect
}

fn unit_like(x: &Quad) -> Quad {
    let p = x.p();
    let prec = crate::padic::max_precision(p);
    Quad::new(crate::padic::Padic::from_i64(p, prec, 1), crate::padic::Padic::exact_zero(p))
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Shape of `phi_beta` for skew fundamental strata, by `e / gcd(e, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    E4,
    E3,
    E2a,
    E2b,
    E2c,
    E1,
}

impl CaseLabel {
    pub fn label(&self) -> &'static str {
        match self {
            CaseLabel::E4 => "e4",
            CaseLabel::E3 => "e3",
            CaseLabel::E2a => "e2a",
            CaseLabel::E2b => "e2b",
            CaseLabel::E2c => "e2c",
            CaseLabel::E1 => "e1",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CharPolyReport {
    pub y: M4,
    /// Characteristic polynomial of `y` over `F`, constant term first.
    pub big_phi: Vec<Quad>,
    pub phi: KPoly,
    pub fundamental: bool,
    /// `n / e` in lowest terms.
    pub level: (i32, i32),
    /// `e / gcd(e, n)`.
    pub effective_period: i32,
    /// `None` when the stratum is not skew or `phi` has none of the expected shapes.
    pub case_label: Option<CaseLabel>,
}

/// `y_beta = p^{n/k} beta^{e/k}` with `k = gcd(e, n)`.
pub fn y_beta(st: &Stratum) -> Result<M4> {
    let e = st.seq.e();
    let k = gcd(e, st.n);
    let mut y = st.beta;
    for _ in 1..e / k {
        y = y * st.beta;
    }
    let y = y.shift(st.n / k);
    match filtration_shape(&st.seq, 0).contains(&y) {
        Some(true) => Ok(y),
        Some(false) => Err(Error::InternalInconsistency("y_beta is not in a_0".into())),
        None => Err(Error::precision("y_beta membership in a_0", 1)),
    }
}

pub fn char_poly(st: &Stratum) -> Result<CharPolyReport> {
    if filtration_shape(&st.seq, -st.n).contains(&st.beta) != Some(true) {
        return Err(Error::InvalidStratum("beta is not in a_{-n}".into()));
    }
    let y = y_beta(st)?;
    // In the frame of the sequence `y` is integral, so the expansion loses no digits to denominators.
    let big_phi = match st.seq.frame() {
        Some((g, gi)) => berkowitz(&(*gi * y * *g)),
        None => berkowitz(&y),
    };
    let coeffs: Vec<Kf> = big_phi.iter().map(Kf::reduce).collect::<Result<_>>()?;
    let p = st.beta.p();
    let phi = KPoly::new(p, coeffs);
    let fundamental = phi != KPoly::x_pow(p, 4);
    let e = st.seq.e();
    let k = gcd(e, st.n);
    let g = gcd(st.n, e);
    let eff = e / k;
    let case_label = if st.is_skew() { classify_phi(&phi, eff) } else { None };
    Ok(CharPolyReport { y, big_phi, phi, fundamental, level: (st.n / g, e / g), effective_period: eff, case_label })
}

/// Independent route to `phi_beta`: move `y_beta` into `M_4(o_F)` by the
/// diagonal of `Lambda(0)`, reduce and expand the determinant.
pub fn charpoly_oracle(st: &Stratum) -> Result<KPoly> {
    let y = y_beta(st)?;
    let p = y.p();
    let c = Ctx::new(p, crate::padic::max_precision(p))?;
    let y = match st.seq.frame() {
        None => y,
        Some((g, gi)) => *gi * y * *g,
    };
    let lam = st.seq.exponent(0);
    let d = M4::diag(&c, lam.map(|v| c.qpi(v)));
    let di = M4::diag(&c, lam.map(|v| c.qpi(-v)));
    let z = di * y * d;
    let mut m: KMat<4> = [[Kf::zero(p); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = Kf::reduce(&z.a[i][j])?;
        }
    }
    Ok(leibniz_charpoly(&m))
}

/// Match `phi` against the expected shape for effective period `eff`.
pub fn classify_phi(phi: &KPoly, eff: i32) -> Option<CaseLabel> {
    let p = phi.p;
    if phi.degree() != Some(4) || phi.coeff(4) != Kf::one(p) {
        return None;
    }
    match eff {
        4 => {
            let roots = phi.roots();
            (roots.len() == 1 && roots[0].1 == 4 && roots[0].0.in_base()).then_some(CaseLabel::E4)
        }
        3 => {
            let x = KPoly::x_pow(p, 1);
            phi.roots()
                .iter()
                .filter(|(r, m)| *m >= 3 && r.in_sqrt_eps_line())
                .any(|(r, _)| &KPoly::linear(*r).pow(3) * &x == *phi)
                .then_some(CaseLabel::E3)
        }
        2 => {
            for a in Kf::base_field(p) {
                for b in Kf::base_field(p) {
                    let q = KPoly::new(p, vec![b, a, Kf::one(p)]);
                    if &q * &q != *phi {
                        continue;
                    }
                    let roots = q.roots();
                    return Some(match roots.as_slice() {
                        [(_, 2)] => CaseLabel::E2c,
                        [(r, 1), _] if !r.in_base() => CaseLabel::E2a,
                        _ => CaseLabel::E2b,
                    });
                }
            }
            None
        }
        1 => {
            let ok = phi.coeff(3).in_sqrt_eps_line()
                && phi.coeff(2).in_base()
                && phi.coeff(1).in_sqrt_eps_line()
                && phi.coeff(0).in_base();
            ok.then_some(CaseLabel::E1)
        }
        _ => None,
    }
}

/// For `gcd(n, e) = 1`: the Newton polygon of the characteristic polynomial
/// of `beta` over `F` is a single segment of slope `-n/e` ending at `v(det) = -4n/e`.
/// With `e = 4` this makes `F[beta]` a totally ramified field of degree 4.
pub fn newton_single_slope(st: &Stratum) -> Result<bool> {
    let e = st.seq.e();
    if gcd(e, st.n) != 1 || 4 % e != 0 {
        return Err(Error::InvalidInput("needs gcd(n, e) = 1 and e | 4".into()));
    }
    let chi = berkowitz(&st.beta);
    // v(c_i) >= -(4 - i) n / e, with equality at i = 0
    let c0 = chi[0];
    if c0.is_zero() || c0.val() * e != -4 * st.n {
        return Ok(false);
    }
    for (i, ci) in chi.iter().enumerate().take(4).skip(1) {
        if ci.is_exact_zero() {
            continue;
        }
        let bound = -(4 - i as i32) * st.n;
        if ci.is_zero() {
            if ci.val() * e < bound {
                return Err(Error::precision("Newton polygon coefficient", 1));
            }
            continue;
        }
        if ci.val() * e < bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::StandardSeq;
    use crate::strata::random_fundamental_skew;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn berkowitz_matches_leibniz_on_integral_matrices() {
        let c = Ctx::new(5, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m: M4 = Mat::from_fn(|_, _| c.random_quad(&mut rng, 0));
            let b: Vec<Kf> = berkowitz(&m).iter().map(|x| Kf::reduce(x).unwrap()).collect();
            let mut k: KMat<4> = [[Kf::zero(5); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    k[i][j] = Kf::reduce(&m.a[i][j]).unwrap();
                }
            }
            assert_eq!(KPoly::new(5, b), leibniz_charpoly(&k));
        }
    }

    #[test]
    fn zero_beta_is_not_fundamental() {
        let c = Ctx::new(3, 12).unwrap();
        let st = Stratum::new(StandardSeq::St4.build(&c), 1, 0, M4::zero(&c)).unwrap();
        let r = char_poly(&st).unwrap();
        assert!(!r.fundamental);
        assert_eq!(r.phi, KPoly::x_pow(3, 4));
    }

    #[test]
    fn case_law_small_sample() {
        let c = Ctx::new(3, 14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows = [
            (StandardSeq::St4, 1, 4),
            (StandardSeq::St30, 1, 3),
            (StandardSeq::St31, 2, 3),
            (StandardSeq::St20, 1, 2),
            (StandardSeq::St21, 3, 2),
            (StandardSeq::St10, 1, 1),
            (StandardSeq::St11, 2, 1),
            (StandardSeq::St21, 2, 1),
        ];
        for (s, n, eff) in rows {
            let seq = s.build(&c);
            for _ in 0..10 {
                let st = random_fundamental_skew(&mut rng, &seq, n, &c, 500).unwrap();
                let r = char_poly(&st).unwrap();
                assert_eq!(r.effective_period, eff);
                assert!(r.case_label.is_some(), "{} n={n}: {:?}", s.label(), r.phi);
                assert_eq!(charpoly_oracle(&st).unwrap(), r.phi);
                // sigma(y) = (-1)^e' y
                assert_eq!(r.phi.sign_twist(eff as usize), r.phi.conj());
            }
        }
    }

    #[test]
    fn totally_ramified_on_st4() {
        let c = Ctx::new(3, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let seq = StandardSeq::St4.build(&c);
        for n in [1, 3, 5] {
            let st = random_fundamental_skew(&mut rng, &seq, n, &c, 500).unwrap();
            assert!(newton_single_slope(&st).unwrap());
        }
    }
}
