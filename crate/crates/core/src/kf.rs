//! The residue field `k_F = F_p[sqrt eps]` and polynomials over it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::padic::{nonsquare, Quad};

/// `a + b sqrt(eps)` with `a, b` in `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Kf {
    pub a: u64,
    pub b: u64,
    pub p: u64,
}

impl Kf {
    pub fn new(p: u64, a: i64, b: i64) -> Self {
        let m = p as i64;
        Kf { a: a.rem_euclid(m) as u64, b: b.rem_euclid(m) as u64, p }
    }

    pub fn zero(p: u64) -> Self {
        Kf { a: 0, b: 0, p }
    }

    pub fn one(p: u64) -> Self {
        Kf { a: 1, b: 0, p }
    }

    pub fn sqrt_eps(p: u64) -> Self {
        Kf { a: 0, b: 1, p }
    }

    /// Every element, `a` varying slowest.
    pub fn all(p: u64) -> Vec<Kf> {
        (0..p).flat_map(|a| (0..p).map(move |b| Kf { a, b, p })).collect()
    }

    /// The prime field `k_0`.
    pub fn base_field(p: u64) -> Vec<Kf> {
        (0..p).map(|a| Kf { a, b: 0, p }).collect()
    }

    /// Reduction of an integral element of `F`.
    pub fn reduce(x: &Quad) -> Result<Self> {
        let p = x.p();
        let a = x.re.to_u64_mod(1).ok_or_else(|| Error::precision("reduction to the residue field", 1))?;
        let b = x.im.to_u64_mod(1).ok_or_else(|| Error::precision("reduction to the residue field", 1))?;
        Ok(Kf { a, b, p })
    }

    pub fn lift(&self, c: &crate::padic::Ctx) -> Quad {
        c.quad(self.a as i64, self.b as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn in_base(&self) -> bool {
        self.b == 0
    }

    /// Element of `k_0 sqrt(eps)`.
    pub fn in_sqrt_eps_line(&self) -> bool {
        self.a == 0
    }

    pub fn conj(self) -> Self {
        Kf { b: (self.p - self.b) % self.p, ..self }
    }

    pub fn pow(self, mut k: u64) -> Self {
        let mut acc = Kf::one(self.p);
        let mut base = self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("inverse of zero in k_F".into()));
        }
        Ok(self.pow(self.p * self.p - 2))
    }
}

impl Add for Kf {
    type Output = Kf;
    fn add(self, o: Kf) -> Kf {
        Kf { a: (self.a + o.a) % self.p, b: (self.b + o.b) % self.p, p: self.p }
    }
}

impl Sub for Kf {
    type Output = Kf;
    fn sub(self, o: Kf) -> Kf {
        self + (-o)
    }
}

impl Neg for Kf {
    type Output = Kf;
    fn neg(self) -> Kf {
        Kf { a: (self.p - self.a) % self.p, b: (self.p - self.b) % self.p, p: self.p }
    }
}

impl Mul for Kf {
    type Output = Kf;
    fn mul(self, o: Kf) -> Kf {
        let p = self.p;
        let e = nonsquare(p);
        let a = (self.a * o.a + e * (self.b * o.b % p)) % p;
        let b = (self.a * o.b + self.b * o.a) % p;
        Kf { a, b, p }
    }
}

impl fmt::Debug for Kf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "{b}s"),
            (a, b) => write!(f, "{a}+{b}s"),
        }
    }
}

/// Polynomial over `k_F`, coefficients from the constant term up, trimmed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KPoly {
    pub p: u64,
    pub c: Vec<Kf>,
}

impl KPoly {
    pub fn new(p: u64, mut c: Vec<Kf>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        KPoly { p, c }
    }

    pub fn constant(x: Kf) -> Self {
        KPoly::new(x.p, vec![x])
    }

    /// `X - a`.
    pub fn linear(a: Kf) -> Self {
        KPoly::new(a.p, vec![-a, Kf::one(a.p)])
    }

    pub fn x_pow(p: u64, k: usize) -> Self {
        let mut c = vec![Kf::zero(p); k + 1];
        c[k] = Kf::one(p);
        KPoly::new(p, c)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Kf {
        self.c.get(i).copied().unwrap_or(Kf::zero(self.p))
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = KPoly::constant(Kf::one(self.p));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: Kf) -> Kf {
        self.c.iter().rev().fold(Kf::zero(self.p), |acc, &a| acc * x + a)
    }

    pub fn conj(&self) -> Self {
        KPoly::new(self.p, self.c.iter().map(|x| x.conj()).collect())
    }

    /// `f((-1)^k X)`.
    pub fn sign_twist(&self, k: usize) -> Self {
        if k % 2 == 0 {
            return self.clone();
        }
        KPoly::new(self.p, self.c.iter().enumerate().map(|(i, &x)| if i % 2 == 1 { -x } else { x }).collect())
    }

    pub fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let li = l.inv().expect("non-zero leading coefficient");
                KPoly::new(self.p, self.c.iter().map(|&x| x * li).collect())
            }
        }
    }

    pub fn divmod(&self, d: &KPoly) -> (KPoly, KPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.c[dd].inv().unwrap();
        let mut r = self.c.clone();
        let n = r.len();
        if n <= dd {
            return (KPoly::new(self.p, vec![]), self.clone());
        }
        let mut q = vec![Kf::zero(self.p); n - dd];
        for i in (dd..n).rev() {
            let f = r[i] * lead_inv;
            q[i - dd] = f;
            for j in 0..=dd {
                r[i - dd + j] = r[i - dd + j] - f * d.c[j];
            }
        }
        (KPoly::new(self.p, q), KPoly::new(self.p, r))
    }

    pub fn gcd(&self, o: &KPoly) -> KPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, u, v)` with `u a + v b = g = gcd(a, b)` monic.
    pub fn ext_gcd(a: &KPoly, b: &KPoly) -> (KPoly, KPoly, KPoly) {
        let p = a.p;
        let one = KPoly::constant(Kf::one(p));
        let zero = KPoly::new(p, vec![]);
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (one.clone(), zero.clone());
        let (mut t0, mut t1) = (zero, one);
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1);
            r0 = r1;
            r1 = r;
            let s = &s0 - &(&q * &s1);
            s0 = s1;
            s1 = s;
            let t = &t0 - &(&q * &t1);
            t0 = t1;
            t1 = t;
        }
        let l = r0.c.last().copied().unwrap_or(Kf::one(p)).inv().unwrap_or(Kf::one(p));
        let sc = KPoly::constant(l);
        (&r0 * &sc, &s0 * &sc, &t0 * &sc)
    }

    /// Roots in `k_F` with multiplicity, in the order of [`Kf::all`].
    pub fn roots(&self) -> Vec<(Kf, usize)> {
        let mut out = Vec::new();
        for x in Kf::all(self.p) {
            let lin = KPoly::linear(x);
            let mut f = self.clone();
            let mut mult = 0;
            loop {
                let (q, r) = f.divmod(&lin);
                if !r.is_zero() || f.degree().unwrap_or(0) == 0 {
                    break;
                }
                mult += 1;
                f = q;
            }
            if mult > 0 {
                out.push((x, mult));
            }
        }
        out
    }
}

impl Add for &KPoly {
    type Output = KPoly;
    fn add(self, o: &KPoly) -> KPoly {
        let n = self.c.len().max(o.c.len());
        KPoly::new(self.p, (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &KPoly {
    type Output = KPoly;
    fn sub(self, o: &KPoly) -> KPoly {
        let n = self.c.len().max(o.c.len());
        KPoly::new(self.p, (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &KPoly {
    type Output = KPoly;
    fn mul(self, o: &KPoly) -> KPoly {
        if self.is_zero() || o.is_zero() {
            return KPoly::new(self.p, vec![]);
        }
        let mut c = vec![Kf::zero(self.p); self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        KPoly::new(self.p, c)
    }
}

impl fmt::Debug for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| match i {
                0 => format!("{x:?}"),
                1 => format!("({x:?})X"),
                _ => format!("({x:?})X^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Square matrix over `k_F`.
pub type KMat<const N: usize> = [[Kf; N]; N];

/// Characteristic polynomial `det(X - M)` by the Leibniz expansion over `k_F[X]`.
pub fn leibniz_charpoly<const N: usize>(m: &KMat<N>) -> KPoly {
    let p = m[0][0].p;
    let mut total = KPoly::new(p, vec![]);
    let mut perm: Vec<usize> = (0..N).collect();
    permutations(&mut perm, 0, &mut |sigma: &[usize], sign: bool| {
        let mut term = KPoly::constant(Kf::one(p));
        for (i, &j) in sigma.iter().enumerate() {
            let entry = if i == j {
                KPoly::new(p, vec![-m[i][j], Kf::one(p)])
            } else {
                KPoly::constant(-m[i][j])
            };
            term = &term * &entry;
        }
        total = if sign { &total + &term } else { &total - &term };
    }, true);
    total
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool), sign: bool) {
    if k == v.len() {
        f(v, sign);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f, if i == k { sign } else { !sign });
        v.swap(k, i);
    }
}

/// Rank of a matrix over `k_F`, rows given as vectors.
pub fn rank(rows: &[Vec<Kf>]) -> usize {
    let mut m: Vec<Vec<Kf>> = rows.to_vec();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for col in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(r, piv);
        let inv = m[r][col].inv().unwrap();
        for j in 0..cols {
            m[r][j] = m[r][j] * inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col];
                for j in 0..cols {
                    let t = m[r][j];
                    m[i][j] = m[i][j] - f * t;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms() {
        let p = 5;
        for x in Kf::all(p) {
            if !x.is_zero() {
                assert_eq!(x * x.inv().unwrap(), Kf::one(p));
            }
            assert_eq!(x.conj().conj(), x);
            assert_eq!(x.pow(p), x.conj());
        }
    }

    #[test]
    fn roots_with_multiplicity() {
        let p = 3;
        let a = Kf::new(p, 1, 1);
        let f = &KPoly::linear(a).pow(2) * &KPoly::linear(Kf::zero(p));
        assert_eq!(f.roots(), vec![(Kf::zero(p), 1), (a, 2)]);
    }

    #[test]
    fn leibniz_of_companion() {
        let p = 3;
        let z = Kf::zero(p);
        let o = Kf::one(p);
        let s = Kf::sqrt_eps(p);
        // companion of X^2 - s
        let m: KMat<2> = [[z, s], [o, z]];
        assert_eq!(leibniz_charpoly(&m), KPoly::new(p, vec![-s, z, o]));
    }

    #[test]
    fn bezout_identity() {
        let p = 3;
        let f = KPoly::linear(Kf::one(p)).pow(2);
        let g = KPoly::linear(Kf::new(p, 2, 0)).pow(2);
        let (d, u, v) = KPoly::ext_gcd(&f, &g);
        assert_eq!(d, KPoly::constant(Kf::one(p)));
        assert_eq!(&(&u * &f) + &(&v * &g), d);
    }
}
