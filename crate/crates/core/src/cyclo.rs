//! Values of additive characters as exact elements of `Z[zeta_{p^M}]`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::padic::{pow_u64, Padic};

/// `zeta_{p^M}^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootArg {
    pub exponent: u64,
    pub p: u64,
    pub m: u32,
}

impl RootArg {
    pub fn one(p: u64, m: u32) -> Self {
        RootArg { exponent: 0, p, m }
    }

    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.m)
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0
    }

    pub fn mul(self, o: Self) -> Self {
        debug_assert_eq!((self.p, self.m), (o.p, o.m));
        RootArg { exponent: (self.exponent + o.exponent) % self.modulus(), ..self }
    }

    pub fn inv(self) -> Self {
        let n = self.modulus();
        RootArg { exponent: (n - self.exponent) % n, ..self }
    }

    /// Multiplicative order of the root of unity.
    pub fn order(&self) -> u64 {
        let n = self.modulus();
        let mut k = 1;
        while (self.exponent * k) % n != 0 {
            k *= self.p;
        }
        k
    }
}

/// The additive character of `Q_p` trivial on `pZ_p` and non-trivial on `Z_p`,
/// twisted by a unit: `x -> Omega(u x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Omega {
    pub p: u64,
    pub m: u32,
    pub twist: i64,
}

impl Omega {
    pub fn standard(p: u64, m: u32) -> Self {
        Omega { p, m, twist: 1 }
    }

    pub fn twisted(p: u64, m: u32, twist: i64) -> Self {
        assert!(twist.rem_euclid(p as i64) != 0, "twist must be a unit");
        Omega { p, m, twist }
    }

    /// Requires `v(x) >= 1 - M`.
    pub fn eval(&self, x: &Padic) -> Result<RootArg> {
        let m = self.m;
        if x.is_zero() && x.val() >= 1 {
            return Ok(RootArg::one(self.p, m));
        }
        let y = if self.twist == 1 {
            *x
        } else {
            *x * Padic::from_i64(self.p, x.rel_prec().max(1), self.twist)
        };
        if y.val() < 1 - m as i32 {
            return Err(Error::precision(
                format!("character argument of valuation {} needs M >= {}", y.val(), 1 - y.val()),
                (1 - y.val()) as u32,
            ));
        }
        // Omega(y) = zeta_{p^M}^{p^M frac(y / p)}
        let z = y.shift(-1);
        if z.abs_prec() < 0 {
            return Err(Error::precision("character argument", (-z.val()) as u32));
        }
        Ok(RootArg { exponent: z.frac_scaled(m)?, p: self.p, m })
    }
}

/// `sum c_e zeta_{p^M}^e` with integer coefficients, kept in the canonical
/// basis `zeta^e`, `0 <= e < (p-1) p^(M-1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycSum {
    p: u64,
    m: u32,
    coeffs: BTreeMap<u64, i64>,
}

impl CycSum {
    pub fn zero(p: u64, m: u32) -> Self {
        CycSum { p, m, coeffs: BTreeMap::new() }
    }

    pub fn int(p: u64, m: u32, c: i64) -> Self {
        let mut s = CycSum::zero(p, m);
        s.push(0, c);
        s
    }

    pub fn root(r: RootArg) -> Self {
        let mut s = CycSum::zero(r.p, r.m);
        s.push(r.exponent, 1);
        s
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn basis_len(&self) -> u64 {
        (self.p - 1) * pow_u64(self.p, self.m - 1)
    }

    fn push(&mut self, e: u64, c: i64) {
        if c == 0 {
            return;
        }
        let full = pow_u64(self.p, self.m);
        let e = e % full;
        let phi = self.basis_len();
        if e < phi {
            self.bump(e, c);
        } else {
            // zeta^(r + (p-1) p^(M-1)) = -sum_{j < p-1} zeta^(r + j p^(M-1))
            let step = pow_u64(self.p, self.m - 1);
            let r = e - phi;
            for j in 0..self.p - 1 {
                self.bump(r + j * step, -c);
            }
        }
    }

    fn bump(&mut self, e: u64, c: i64) {
        let entry = self.coeffs.entry(e).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coeffs.remove(&e);
        }
    }

    /// Re-reduce from raw coefficients; idempotent on reduced values.
    pub fn from_raw(p: u64, m: u32, raw: impl IntoIterator<Item = (u64, i64)>) -> Self {
        let mut s = CycSum::zero(p, m);
        for (e, c) in raw {
            s.push(e, c);
        }
        s
    }

    pub fn add_root(&mut self, r: RootArg, c: i64) {
        self.push(r.exponent, c);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, i64> {
        &self.coeffs
    }

    /// Integer value if the sum is rational.
    pub fn as_integer(&self) -> Option<i64> {
        match self.coeffs.len() {
            0 => Some(0),
            1 => self.coeffs.get(&0).copied(),
            _ => None,
        }
    }

    pub fn max_abs_coeff(&self) -> i64 {
        self.coeffs.values().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return CycSum::zero(self.p, self.m);
        }
        CycSum { p: self.p, m: self.m, coeffs: self.coeffs.iter().map(|(&e, &c)| (e, c * k)).collect() }
    }

    pub fn mul_root(&self, r: RootArg) -> Self {
        CycSum::from_raw(self.p, self.m, self.coeffs.iter().map(|(&e, &c)| (e + r.exponent, c)))
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Self {
        let n = pow_u64(self.p, self.m);
        CycSum::from_raw(self.p, self.m, self.coeffs.iter().map(|(&e, &c)| ((n - e) % n, c)))
    }

    /// Divide by an integer; `None` unless every coefficient is divisible.
    pub fn div_exact(&self, k: i64) -> Option<Self> {
        if self.coeffs.values().all(|c| c % k == 0) {
            Some(CycSum { p: self.p, m: self.m, coeffs: self.coeffs.iter().map(|(&e, &c)| (e, c / k)).collect() })
        } else {
            None
        }
    }
}

impl Add for &CycSum {
    type Output = CycSum;
    fn add(self, o: &CycSum) -> CycSum {
        let mut s = self.clone();
        for (&e, &c) in &o.coeffs {
            s.bump(e, c);
        }
        s
    }
}

impl Sub for &CycSum {
    type Output = CycSum;
    fn sub(self, o: &CycSum) -> CycSum {
        let mut s = self.clone();
        for (&e, &c) in &o.coeffs {
            s.bump(e, -c);
        }
        s
    }
}

impl Neg for &CycSum {
    type Output = CycSum;
    fn neg(self) -> CycSum {
        self.scale(-1)
    }
}

impl Mul for &CycSum {
    type Output = CycSum;
    fn mul(self, o: &CycSum) -> CycSum {
        let mut s = CycSum::zero(self.p, self.m);
        for (&e1, &c1) in &self.coeffs {
            for (&e2, &c2) in &o.coeffs {
                s.push(e1 + e2, c1 * c2);
            }
        }
        s
    }
}

impl fmt::Debug for CycSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| if *e == 0 { format!("{c}") } else { format!("{c}*z^{e}") })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Display for CycSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `sum_{A in k_F} Omega(c N(A))` computed by enumerating `k_F = F_p[sqrt eps]`.
pub fn norm_gauss_sum(omega: &Omega, c: i64) -> Result<CycSum> {
    let p = omega.p;
    let eps = crate::padic::nonsquare(p) as i64;
    let mut s = CycSum::zero(p, omega.m);
    for a in 0..p as i64 {
        for b in 0..p as i64 {
            let norm = a * a - eps * b * b;
            let x = Padic::from_i64(p, 4, c * norm);
            s.add_root(omega.eval(&x)?, 1);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(p: u64, n: i64) -> Padic {
        Padic::from_i64(p, 10, n)
    }

    #[test]
    fn omega_is_trivial_on_p() {
        let w = Omega::standard(3, 2);
        assert!(w.eval(&int(3, 3)).unwrap().is_one());
        assert!(w.eval(&int(3, 27)).unwrap().is_one());
    }

    #[test]
    fn omega_of_one_is_a_cube_root() {
        let w = Omega::standard(3, 2);
        let r = w.eval(&int(3, 1)).unwrap();
        assert_eq!(r.exponent, 3);
        assert!(r.mul(r).mul(r).is_one());
    }

    #[test]
    fn omega_of_inverse_p_has_order_p_squared() {
        let w = Omega::standard(3, 2);
        let r = w.eval(&int(3, 1).shift(-1)).unwrap();
        assert_eq!(r.order(), 9);
    }

    #[test]
    fn omega_rejects_singular_arguments() {
        let w = Omega::standard(3, 2);
        assert!(w.eval(&int(3, 1).shift(-2)).is_err());
    }

    #[test]
    fn cyclotomic_relation_reduces_to_zero() {
        let s = CycSum::from_raw(3, 2, (0..3).map(|j| (j * 3, 1)));
        assert!(s.is_zero());
        let all = CycSum::from_raw(5, 1, (0..5).map(|j| (j, 1)));
        assert!(all.is_zero());
    }

    #[test]
    fn reduction_is_idempotent() {
        let s = CycSum::from_raw(3, 2, [(7, 2), (8, -1), (1, 5)]);
        let again = CycSum::from_raw(3, 2, s.coeffs().iter().map(|(&e, &c)| (e, c)));
        assert_eq!(s, again);
        assert!(s.coeffs().keys().all(|&e| e < 6));
    }

    #[test]
    fn gauss_sum_equals_minus_q() {
        for p in [3u64, 5] {
            for twist in [1i64, 2] {
                let w = Omega::twisted(p, 2, twist);
                for c in 1..p as i64 {
                    assert_eq!(norm_gauss_sum(&w, c).unwrap().as_integer(), Some(-(p as i64)));
                }
            }
        }
    }
}
