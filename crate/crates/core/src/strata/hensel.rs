use std::ops::{Add, Mul, Sub};

use super::{char_poly, Stratum};
use crate::error::{Error, Result};
use crate::kf::{KPoly, Kf};
use crate::matrix::M4;
use crate::padic::{Ctx, Quad};

/// Polynomial over `F`, constant term first. Not trimmed: the length is
/// the formal degree plus one.
#[derive(Clone, Debug, PartialEq)]
pub struct QPoly {
    pub c: Vec<Quad>,
}

impl QPoly {
    pub fn lift(f: &KPoly, c: &Ctx) -> Self {
        let mut v: Vec<Quad> = f.c.iter().map(|x| x.lift(c)).collect();
        if v.is_empty() {
            v.push(c.qzero());
        }
        QPoly { c: v }
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.c.truncate(len.max(1));
        self
    }

    /// Division by a monic polynomial.
    pub fn divmod_monic(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree();
        let zero = d.c[0] - d.c[0];
        if self.c.len() <= dd {
            return (QPoly { c: vec![zero] }, self.clone());
        }
        let mut r = self.c.clone();
        let n = r.len();
        let mut q = vec![zero; n - dd];
        for i in (dd..n).rev() {
            let f = r[i];
            q[i - dd] = f;
            for j in 0..=dd {
                r[i - dd + j] = r[i - dd + j] - f * d.c[j];
            }
        }
        r.truncate(dd.max(1));
        if dd == 0 {
            r = vec![zero];
        }
        (QPoly { c: q }, QPoly { c: r })
    }

    pub fn reduce(&self) -> Result<KPoly> {
        let p = self.c[0].p();
        Ok(KPoly::new(p, self.c.iter().map(Kf::reduce).collect::<Result<_>>()?))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// Horner evaluation at a matrix.
    pub fn eval_mat(&self, y: &M4, c: &Ctx) -> M4 {
        let mut acc = M4::scalar(c, *self.c.last().unwrap());
        for a in self.c.iter().rev().skip(1) {
            acc = acc * *y + M4::scalar(c, *a);
        }
        acc
    }

    fn set_monic(mut self, c: &Ctx) -> Self {
        let l = self.c.len() - 1;
        self.c[l] = c.qone();
        self
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        let zero = self.c[0] - self.c[0];
        QPoly {
            c: (0..n)
                .map(|i| *self.c.get(i).unwrap_or(&zero) + *o.c.get(i).unwrap_or(&zero))
                .collect(),
        }
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        let zero = self.c[0] - self.c[0];
        QPoly {
            c: (0..n)
                .map(|i| *self.c.get(i).unwrap_or(&zero) - *o.c.get(i).unwrap_or(&zero))
                .collect(),
        }
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        let zero = self.c[0] - self.c[0];
        let mut c = vec![zero; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        QPoly { c }
    }
}

/// Quadratic Hensel lifting of `f = g0 h0 (mod p)` with `g0`, `h0` coprime
/// and monic; returns `(g, h, s, t)` with `f = g h` and `s g + t h = 1` at
/// working precision.
pub fn hensel_lift(f: &QPoly, g0: &KPoly, h0: &KPoly, c: &Ctx) -> Result<(QPoly, QPoly, QPoly, QPoly)> {
    let (d, s0, t0) = KPoly::ext_gcd(g0, h0);
    if d.degree() != Some(0) {
        return Err(Error::InvalidInput("residue factors are not coprime".into()));
    }
    if &(g0 * h0) != &f.reduce()? {
        return Err(Error::InvalidInput("residue factors do not multiply to f".into()));
    }
    let (dg, dh) = (g0.degree().unwrap(), h0.degree().unwrap());
    let mut g = QPoly::lift(g0, c);
    let mut h = QPoly::lift(h0, c);
    let mut s = QPoly::lift(&s0, c);
    let mut t = QPoly::lift(&t0, c);
    let one = QPoly { c: vec![c.qone()] };
    let mut reached = 1u32;
    while reached < c.prec as u32 {
        let e = f - &(&g * &h);
        let (q, r) = (&s * &e).divmod_monic(&h);
        let g1 = (&(&g + &(&t * &e)) + &(&q * &g)).truncate(dg + 1).set_monic(c);
        let h1 = (&h + &r).truncate(dh + 1).set_monic(c);
        let b = &(&(&s * &g1) + &(&t * &h1)) - &one;
        let (cq, dr) = (&s * &b).divmod_monic(&h1);
        let s1 = (&s - &dr).truncate(dh.max(1));
        let t1 = (&(&t - &(&t * &b)) - &(&cq * &g1)).truncate(dg.max(1));
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        reached *= 2;
    }
    if !(f - &(&g * &h)).is_zero() {
        return Err(Error::precision("Hensel lifting: f - g h did not vanish", c.prec as u32));
    }
    Ok((g, h, s, t))
}

/// The primary factors of `phi` over `k_F`: `(X - r)^m` for each root in
/// the order of [`Kf::all`], then powers of irreducible monic quadratics,
/// then whatever is left.
pub fn primary_parts(phi: &KPoly) -> Vec<KPoly> {
    let p = phi.p;
    let mut rest = phi.monic();
    let mut out = Vec::new();
    for (r, m) in phi.roots() {
        let part = KPoly::linear(r).pow(m);
        rest = rest.divmod(&part).0;
        out.push(part);
    }
    if rest.degree().unwrap_or(0) >= 2 {
        'quad: for a in Kf::all(p) {
            for b in Kf::all(p) {
                if rest.degree().unwrap_or(0) < 2 {
                    break 'quad;
                }
                let q = KPoly::new(p, vec![b, a, Kf::one(p)]);
                let mut part = KPoly::constant(Kf::one(p));
                loop {
                    let (quo, rem) = rest.divmod(&q);
                    if !rem.is_zero() {
                        break;
                    }
                    rest = quo;
                    part = &part * &q;
                }
                if part.degree() != Some(0) {
                    out.push(part);
                }
            }
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        out.push(rest);
    }
    out
}

#[derive(Clone, Debug)]
pub struct SplitData {
    /// Residue primary factors of `phi_beta`.
    pub factors: Vec<KPoly>,
    /// Their monic lifts dividing the characteristic polynomial of `y_beta` over `F`.
    pub lifted: Vec<QPoly>,
    /// `P_j` with image `V^j = ker f_j(y_beta)`.
    pub projectors: Vec<M4>,
    pub dims: Vec<usize>,
    /// `components[j][i]`: an `o_F`-basis of `Lambda(i) cap V^j`, `i` over one period.
    pub components: Vec<Vec<Vec<[Quad; 4]>>>,
    /// `beta P_j`, the restriction of `beta` to `V^j` extended by zero.
    pub betas: Vec<M4>,
    /// `f(V^i, V^j) = 0` for `i != j`.
    pub orthogonal: bool,
}

impl SplitData {
    /// For a one-dimensional component: does `(V^j, f)` represent 1? Over an
    /// unramified extension this is the parity of `v(f(v, v))`.
    pub fn represents_one(&self, j: usize) -> Result<bool> {
        if self.dims[j] != 1 {
            return Err(Error::InvalidInput("component is not one-dimensional".into()));
        }
        let v = self.components[j][0][0];
        let mut f = v[0] - v[0];
        for i in 0..4 {
            f = f + v[i].conj() * v[3 - i];
        }
        if f.is_zero() {
            return Err(Error::InternalInconsistency("isotropic vector in a one-dimensional component".into()));
        }
        Ok(f.val() % 2 == 0)
    }

    /// `f(V^i, V^i) = 0`: the component is totally isotropic.
    pub fn is_isotropic(&self, j: usize) -> bool {
        let p = self.projectors[j];
        (p.sigma() * p).is_zero()
    }
}

/// Split a stratum along the coprime primary factors of `phi_beta`.
pub fn hensel_split(st: &Stratum, c: &Ctx) -> Result<SplitData> {
    let rep = char_poly(st)?;
    let factors = primary_parts(&rep.phi);
    if factors.len() < 2 {
        return Err(Error::NotSplittable);
    }
    let f = QPoly { c: rep.big_phi.clone() };
    let y = rep.y;
    let mut lifted = Vec::new();
    let mut projectors = Vec::new();
    for j in 0..factors.len() {
        let mut other = KPoly::constant(Kf::one(c.p));
        for (i, fi) in factors.iter().enumerate() {
            if i != j {
                other = &other * fi;
            }
        }
        let (g, h, _s, t) = hensel_lift(&f, &factors[j], &other, c)?;
        projectors.push(t.eval_mat(&y, c) * h.eval_mat(&y, c));
        lifted.push(g);
    }
    let id = M4::identity(c);
    let mut total = M4::zero(c);
    for (i, pi) in projectors.iter().enumerate() {
        total = total + *pi;
        for (j, pj) in projectors.iter().enumerate() {
            let want = if i == j { *pi } else { M4::zero(c) };
            if !(*pi * *pj - want).is_zero() {
                return Err(Error::InternalInconsistency(format!("projectors {i}, {j} are not orthogonal idempotents")));
            }
        }
        if !(pi.commutator(&st.beta)).is_zero() {
            return Err(Error::InternalInconsistency("projector does not commute with beta".into()));
        }
        if crate::filtration::filtration_shape(&st.seq, 0).contains(pi) != Some(true) {
            return Err(Error::InternalInconsistency("projector is not in a_0".into()));
        }
    }
    if !(total - id).is_zero() {
        return Err(Error::InternalInconsistency("projectors do not sum to 1".into()));
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.degree().unwrap()).collect();
    let mut components = Vec::new();
    for (j, pj) in projectors.iter().enumerate() {
        let mut per = Vec::new();
        for i in 0..st.seq.e() {
            let b = *st.seq.lattice(i).basis();
            let img = *pj * b;
            let cols: Vec<[Quad; 4]> = (0..4).map(|k| std::array::from_fn(|r| img.a[r][k])).collect();
            let basis = column_basis(cols, c)?;
            if basis.len() != dims[j] {
                return Err(Error::InternalInconsistency("component rank differs from factor degree".into()));
            }
            per.push(basis);
        }
        components.push(per);
    }
    // Lambda(i) is the direct sum of its components
    for i in 0..st.seq.e() as usize {
        let cols: Vec<[Quad; 4]> = components.iter().flat_map(|comp| comp[i].iter().copied()).collect();
        let m = M4::from_fn(|r, k| cols[k][r]);
        let l = crate::lattice::Lattice::from_basis(&m, c)?;
        if l != st.seq.lattice(i as i32) {
            return Err(Error::InternalInconsistency(format!("Lambda({i}) is not the sum of its components")));
        }
    }
    let mut orthogonal = true;
    for i in 0..projectors.len() {
        for j in 0..projectors.len() {
            if i != j && !(projectors[i].sigma() * projectors[j]).is_zero() {
                orthogonal = false;
            }
        }
    }
    let betas = projectors.iter().map(|p| st.beta * *p).collect();
    Ok(SplitData { factors, lifted, projectors, dims, components, betas, orthogonal })
}

/// Echelon basis over `o_F` of the module spanned by `cols`.
fn column_basis(mut cols: Vec<[Quad; 4]>, c: &Ctx) -> Result<Vec<[Quad; 4]>> {
    let mut out = Vec::new();
    for row in 0..4 {
        cols.retain(|v| !v.iter().all(|x| x.is_zero()));
        let Some((bi, _)) = cols.iter().enumerate().filter(|(_, v)| !v[row].is_zero()).min_by_key(|(_, v)| v[row].val())
        else {
            continue;
        };
        let piv = cols.swap_remove(bi);
        let inv = piv[row].inv()?;
        for v in cols.iter_mut() {
            if v[row].is_zero() {
                continue;
            }
            let f = v[row] * inv;
            for r in 0..4 {
                v[r] = v[r] - f * piv[r];
            }
            v[row] = c.qzero();
        }
        out.push(piv);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::StandardSeq;
    use crate::strata::{random_fundamental_skew, CaseLabel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hensel_lifts_a_residue_factorisation() {
        let c = Ctx::new(5, 20).unwrap();
        // f = (X - 1)(X - 2)(X^2 + 2) + 5 X
        let k = |a| Kf::new(5, a, 0);
        let g0 = &KPoly::linear(k(1)) * &KPoly::linear(k(2));
        let h0 = KPoly::new(5, vec![k(2), k(0), k(1)]);
        let mut f = QPoly::lift(&(&g0 * &h0), &c);
        f.c[1] = f.c[1] + c.qint(5);
        let (g, h, s, t) = hensel_lift(&f, &g0, &h0, &c).unwrap();
        assert!((&f - &(&g * &h)).is_zero());
        let one = QPoly { c: vec![c.qone()] };
        assert!((&(&(&s * &g) + &(&t * &h)) - &one).is_zero());
        assert_eq!(g.reduce().unwrap(), g0);
    }

    #[test]
    fn three_dimensional_split_and_parity() {
        let c = Ctx::new(3, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (s, even) in [(StandardSeq::St30, true), (StandardSeq::St31, false)] {
            let seq = s.build(&c);
            assert_eq!(seq.duality_index().unwrap() % 2 == 0, even);
            let st = random_fundamental_skew(&mut rng, &seq, 1, &c, 500).unwrap();
            let sd = hensel_split(&st, &c).unwrap();
            let mut dims = sd.dims.clone();
            dims.sort();
            assert_eq!(dims, vec![1, 3]);
            assert!(sd.orthogonal);
            let zero_part = sd.factors.iter().position(|f| *f == KPoly::x_pow(3, 1)).unwrap();
            assert_eq!(sd.represents_one(zero_part).unwrap(), even);
        }
    }

    #[test]
    fn two_by_two_split_is_orthogonal() {
        let c = Ctx::new(3, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let seq = StandardSeq::St20.build(&c);
        let mut found = 0;
        for _ in 0..400 {
            let st = random_fundamental_skew(&mut rng, &seq, 1, &c, 500).unwrap();
            if char_poly(&st).unwrap().case_label != Some(CaseLabel::E2b) {
                continue;
            }
            let sd = hensel_split(&st, &c).unwrap();
            assert_eq!(sd.dims, vec![2, 2]);
            let q = sd.projectors[0].sigma() * sd.projectors[1];
            assert!(sd.orthogonal, "{:?} {:?} {:?}", sd.factors, q.vals(), q.abs_prec());
            found += 1;
            if found == 3 {
                break;
            }
        }
        assert_eq!(found, 3);
    }
}
