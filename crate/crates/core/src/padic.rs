//! Floating-point style p-adic numbers over `Q_p` and its unramified quadratic
//! extension `Q_p(sqrt eps)`.
//!
//! A [`Padic`] is `p^val * (unit + O(p^prec))` with `unit` coprime to `p`.
//! A value with `prec == 0` is a zero known only modulo `p^val`; the exact zero
//! carries `val == i32::MAX`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};

const EXACT_ZERO: i32 = i32::MAX;

/// Largest `k` with `p^k < 2^63`, so that unit sums never overflow `u64`.
pub fn max_precision(p: u64) -> u16 {
    let mut k = 0u16;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        k += 1;
    }
    k
}

#[inline]
pub fn pow_u64(p: u64, k: u32) -> u64 {
    p.pow(k)
}

const fn smallest_nonsquares() -> [u8; 128] {
    let mut out = [0u8; 128];
    let mut p = 3usize;
    while p < 128 {
        let mut is_prime = true;
        let mut d = 2usize;
        while d * d <= p {
            if p % d == 0 {
                is_prime = false;
            }
            d += 1;
        }
        if is_prime {
            let mut e = 2usize;
            'search: while e < p {
                let mut x = 1usize;
                while x < p {
                    if (x * x) % p == e {
                        e += 1;
                        continue 'search;
                    }
                    x += 1;
                }
                out[p] = e as u8;
                break;
            }
        }
        p += 2;
    }
    out
}

static NONSQUARE: [u8; 128] = smallest_nonsquares();

/// The smallest positive integer that is a non-square unit modulo `p`.
pub fn nonsquare(p: u64) -> u64 {
    assert!(p < 128 && NONSQUARE[p as usize] != 0, "unsupported prime {p}");
    NONSQUARE[p as usize] as u64
}

pub fn is_odd_prime(p: u64) -> bool {
    p >= 3 && p % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

#[derive(Clone, Copy)]
pub struct Padic {
    unit: u64,
    val: i32,
    p: u16,
    prec: u16,
}

impl Padic {
    pub fn exact_zero(p: u64) -> Self {
        Padic { unit: 0, val: EXACT_ZERO, p: p as u16, prec: 0 }
    }

    /// A zero known modulo `p^val`.
    pub fn zero_mod(p: u64, val: i32) -> Self {
        Padic { unit: 0, val, p: p as u16, prec: 0 }
    }

    fn normalized(p: u64, val: i32, mut unit: u64, mut prec: u32) -> Self {
        if prec == 0 {
            return Padic::zero_mod(p, val);
        }
        let m = pow_u64(p, prec);
        unit %= m;
        if unit == 0 {
            return Padic::zero_mod(p, val.saturating_add(prec as i32));
        }
        let mut v = val;
        while unit % p == 0 {
            unit /= p;
            v += 1;
            prec -= 1;
        }
        Padic { unit, val: v, p: p as u16, prec: prec as u16 }
    }

    pub fn from_i64(p: u64, prec: u16, n: i64) -> Self {
        if n == 0 {
            return Padic::exact_zero(p);
        }
        let mut v = 0;
        let mut a = n.unsigned_abs();
        while a % p == 0 {
            a /= p;
            v += 1;
        }
        let m = pow_u64(p, prec as u32);
        let mut u = a % m;
        if n < 0 {
            u = (m - u) % m;
        }
        Padic::normalized(p, v, u, prec as u32)
    }

    /// `p^val * unit` with `unit` taken modulo `p^prec`.
    pub fn from_parts(p: u64, prec: u16, val: i32, unit: u64) -> Self {
        Padic::normalized(p, val, unit, prec as u32)
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    /// Lower bound on the valuation; exact when the value is non-zero.
    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn rel_prec(&self) -> u16 {
        self.prec
    }

    /// The value is known modulo `p^abs_prec`.
    pub fn abs_prec(&self) -> i32 {
        self.val.saturating_add(self.prec as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.prec == 0
    }

    pub fn is_exact_zero(&self) -> bool {
        self.val == EXACT_ZERO
    }

    /// `Some(v >= b)`, or `None` when a zero is known too coarsely to decide.
    pub fn val_at_least(&self, b: i32) -> Option<bool> {
        if self.val >= b {
            Some(true)
        } else if self.prec == 0 {
            None
        } else {
            Some(false)
        }
    }

    pub fn unit_residue(&self) -> u64 {
        self.unit % self.p()
    }

    pub fn neg(self) -> Self {
        if self.prec == 0 {
            return self;
        }
        let m = pow_u64(self.p(), self.prec as u32);
        Padic { unit: m - self.unit, ..self }
    }

    pub fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        let p = self.p();
        let abs = self.abs_prec().min(o.abs_prec());
        if self.prec == 0 && o.prec == 0 {
            return Padic::zero_mod(p, abs.min(self.val.min(o.val)));
        }
        if self.prec == 0 {
            return o.truncate_abs(abs);
        }
        if o.prec == 0 {
            return self.truncate_abs(abs);
        }
        let v = self.val.min(o.val);
        if v >= abs {
            return Padic::zero_mod(p, abs);
        }
        let k = (abs - v) as u32;
        let m = pow_u64(p, k);
        let term = |x: &Padic| -> u64 {
            let shift = (x.val - v) as u32;
            if shift >= k {
                0
            } else {
                ((x.unit % m) as u128 * pow_u64(p, shift) as u128 % m as u128) as u64
            }
        };
        let s = (term(&self) + term(&o)) % m;
        Padic::normalized(p, v, s, k)
    }

    /// Forget digits at or above `p^abs`.
    pub fn truncate_abs(self, abs: i32) -> Self {
        if abs >= self.abs_prec() {
            return self;
        }
        if self.val >= abs {
            return Padic::zero_mod(self.p(), abs);
        }
        Padic::normalized(self.p(), self.val, self.unit, (abs - self.val) as u32)
    }

    pub fn mul(self, o: Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        let p = self.p();
        if self.is_exact_zero() || o.is_exact_zero() {
            return Padic::exact_zero(p);
        }
        let v = self.val + o.val;
        if self.prec == 0 || o.prec == 0 {
            return Padic::zero_mod(p, v);
        }
        let k = self.prec.min(o.prec) as u32;
        let m = pow_u64(p, k) as u128;
        let u = ((self.unit as u128 % m) * (o.unit as u128 % m) % m) as u64;
        Padic { unit: u, val: v, p: self.p, prec: k as u16 }
    }

    /// Multiply by `p^k`.
    pub fn shift(self, k: i32) -> Self {
        if self.is_exact_zero() {
            return self;
        }
        Padic { val: self.val + k, ..self }
    }

    pub fn inv(self) -> Result<Self> {
        if self.prec == 0 {
            return Err(Error::precision("p-adic inversion of an indistinguishable zero", 1));
        }
        let m = pow_u64(self.p(), self.prec as u32);
        Ok(Padic { unit: inv_mod(self.unit, m), val: -self.val, ..self })
    }

    /// Digits of the value strictly below `p^b`, as an exact rational whose
    /// higher digits are zero; its relative precision is `prec`.
    pub fn digits_below(self, b: i32, prec: u16) -> Result<Self> {
        if self.val >= b {
            return Ok(Padic::exact_zero(self.p()));
        }
        if self.abs_prec() < b {
            return Err(Error::precision(
                "digit truncation",
                (b - self.val).max(0) as u32,
            ));
        }
        let m = pow_u64(self.p(), (b - self.val) as u32);
        Ok(Padic::normalized(self.p(), self.val, self.unit % m, (b - self.val) as u32)
            .with_prec(prec))
    }

    /// Reinterpret the known digits as exact, padded with zeros to `prec` digits.
    fn with_prec(self, prec: u16) -> Self {
        if self.prec == 0 {
            return self;
        }
        Padic { prec, ..self }
    }

    /// Class modulo `p^b` as `(val, unit mod p^(b-val))`; `(b, 0)` for zero.
    pub fn residue_key(&self, b: i32) -> Option<(i32, u64)> {
        if self.val >= b {
            return Some((b, 0));
        }
        if self.abs_prec() < b {
            return None;
        }
        Some((self.val, self.unit % pow_u64(self.p(), (b - self.val) as u32)))
    }

    /// The integer in `[0, p^k)` congruent to an integral value modulo `p^k`.
    pub fn to_u64_mod(&self, k: u32) -> Option<u64> {
        if self.val >= k as i32 {
            return Some(0);
        }
        if self.val < 0 || self.abs_prec() < k as i32 {
            return None;
        }
        let m = pow_u64(self.p(), k);
        Some(((self.unit as u128 * pow_u64(self.p(), self.val as u32) as u128) % m as u128) as u64)
    }

    /// Fractional part of `self` scaled by `p^k`: the integer `t` in `[0, p^k)`
    /// with `self = t / p^k (mod Z_p)`. Requires `v(self) >= -k`.
    pub fn frac_scaled(&self, k: u32) -> Result<u64> {
        if self.val >= 0 {
            return Ok(0);
        }
        if self.val < -(k as i32) {
            return Err(Error::precision("character argument too singular", (-self.val) as u32));
        }
        if self.abs_prec() < 0 {
            return Err(Error::precision("character argument", (-self.val) as u32));
        }
        let d = (-self.val) as u32;
        let t = self.unit % pow_u64(self.p(), d);
        Ok(t * pow_u64(self.p(), k - d))
    }

    pub fn random_integral<R: Rng + ?Sized>(rng: &mut R, p: u64, prec: u16, min_val: i32) -> Self {
        let m = pow_u64(p, prec as u32);
        let u = rng.gen_range(0..m);
        Padic::normalized(p, min_val, u, prec as u32).with_prec_if_nonzero(prec)
    }

    fn with_prec_if_nonzero(self, prec: u16) -> Self {
        if self.prec == 0 {
            Padic::exact_zero(self.p())
        } else {
            self.with_prec(prec)
        }
    }
}

impl PartialEq for Padic {
    /// Equality up to the common known precision.
    fn eq(&self, o: &Self) -> bool {
        self.sub(*o).is_zero()
    }
}

impl fmt::Debug for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            write!(f, "0")
        } else if self.prec == 0 {
            write!(f, "O({}^{})", self.p, self.val)
        } else {
            write!(f, "{}*{}^{}+O({}^{})", self.unit, self.p, self.val, self.p, self.abs_prec())
        }
    }
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Padic {
    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }
}

impl Add for Padic {
    type Output = Padic;
    fn add(self, o: Padic) -> Padic {
        Padic::add(self, o)
    }
}

impl Sub for Padic {
    type Output = Padic;
    fn sub(self, o: Padic) -> Padic {
        Padic::sub(self, o)
    }
}

impl Mul for Padic {
    type Output = Padic;
    fn mul(self, o: Padic) -> Padic {
        Padic::mul(self, o)
    }
}

impl Neg for Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        Padic::neg(self)
    }
}

/// `re + im * sqrt(eps)` in the unramified quadratic extension.
#[derive(Clone, Copy, PartialEq)]
pub struct Quad {
    pub re: Padic,
    pub im: Padic,
}

impl Quad {
    pub fn new(re: Padic, im: Padic) -> Self {
        Quad { re, im }
    }

    pub fn p(&self) -> u64 {
        self.re.p()
    }

    pub fn eps(&self) -> u64 {
        nonsquare(self.p())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re.is_exact_zero() && self.im.is_exact_zero()
    }

    pub fn val(&self) -> i32 {
        self.re.val().min(self.im.val())
    }

    pub fn val_at_least(&self, b: i32) -> Option<bool> {
        match (self.re.val_at_least(b), self.im.val_at_least(b)) {
            (Some(true), Some(true)) => Some(true),
            (Some(false), _) | (_, Some(false)) => Some(false),
            _ => None,
        }
    }

    pub fn abs_prec(&self) -> i32 {
        self.re.abs_prec().min(self.im.abs_prec())
    }

    pub fn conj(self) -> Self {
        Quad { re: self.re, im: -self.im }
    }

    fn eps_padic(&self) -> Padic {
        Padic::from_i64(self.p(), max_precision(self.p()), self.eps() as i64)
    }

    /// `(x + conj x, x * conj x)`, both in `Q_p`.
    pub fn trace_and_norm(self) -> (Padic, Padic) {
        (self.re + self.re, self.norm())
    }

    pub fn norm(self) -> Padic {
        let e = self.eps_padic();
        self.re * self.re - e * self.im * self.im
    }

    pub fn scale(self, c: Padic) -> Self {
        Quad { re: self.re * c, im: self.im * c }
    }

    pub fn shift(self, k: i32) -> Self {
        Quad { re: self.re.shift(k), im: self.im.shift(k) }
    }

    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::precision("inversion in F of an indistinguishable zero", 1));
        }
        let n = self.norm().inv()?;
        Ok(self.conj().scale(n))
    }

    pub fn digits_below(self, b: i32, prec: u16) -> Result<Self> {
        Ok(Quad { re: self.re.digits_below(b, prec)?, im: self.im.digits_below(b, prec)? })
    }

    pub fn residue_key(&self, b: i32) -> Option<[(i32, u64); 2]> {
        Some([self.re.residue_key(b)?, self.im.residue_key(b)?])
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_exact_zero() {
            write!(f, "{:?}", self.re)
        } else {
            write!(f, "({:?} + {:?}*sqrt(eps))", self.re, self.im)
        }
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, o: Quad) -> Quad {
        Quad { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, o: Quad) -> Quad {
        Quad { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, o: Quad) -> Quad {
        let e = self.eps_padic();
        Quad {
            re: self.re * o.re + e * self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { re: -self.re, im: -self.im }
    }
}

/// Construction context: the prime and the working precision in digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    pub p: u64,
    pub prec: u16,
}

impl Ctx {
    pub fn new(p: u64, prec: u16) -> Result<Self> {
        if !is_odd_prime(p) || p >= 128 {
            return Err(Error::InvalidInput(format!("p = {p} must be an odd prime below 128")));
        }
        let cap = max_precision(p);
        if prec == 0 || prec > cap {
            return Err(Error::precision(
                format!("working precision {prec} exceeds the u64 capacity {cap} for p = {p}"),
                prec as u32,
            ));
        }
        Ok(Ctx { p, prec })
    }

    /// Default working precision `2(n + e) + 4`, capped at the word-size limit.
    pub fn default_precision(p: u64, n: u32, e: u32) -> u16 {
        let want = 2 * (n + e) + 4;
        (want.min(max_precision(p) as u32)) as u16
    }

    pub fn eps(&self) -> u64 {
        nonsquare(self.p)
    }

    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn int(&self, n: i64) -> Padic {
        Padic::from_i64(self.p, self.prec, n)
    }

    pub fn pi_pow(&self, k: i32) -> Padic {
        self.int(1).shift(k)
    }

    pub fn zero(&self) -> Padic {
        Padic::exact_zero(self.p)
    }

    pub fn qint(&self, n: i64) -> Quad {
        Quad::new(self.int(n), self.zero())
    }

    pub fn quad(&self, re: i64, im: i64) -> Quad {
        Quad::new(self.int(re), self.int(im))
    }

    pub fn qzero(&self) -> Quad {
        Quad::new(self.zero(), self.zero())
    }

    pub fn qone(&self) -> Quad {
        self.qint(1)
    }

    pub fn sqrt_eps(&self) -> Quad {
        self.quad(0, 1)
    }

    /// `p^k` as an element of F.
    pub fn qpi(&self, k: i32) -> Quad {
        Quad::new(self.pi_pow(k), self.zero())
    }

    pub fn random_integral<R: Rng + ?Sized>(&self, rng: &mut R, min_val: i32) -> Padic {
        Padic::random_integral(rng, self.p, self.prec, min_val)
    }

    pub fn random_quad<R: Rng + ?Sized>(&self, rng: &mut R, min_val: i32) -> Quad {
        Quad::new(self.random_integral(rng, min_val), self.random_integral(rng, min_val))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> Ctx {
        Ctx::new(3, 20).unwrap()
    }

    #[test]
    fn sqrt_eps_squares_to_eps() {
        let c = ctx();
        let s = c.sqrt_eps() * c.sqrt_eps();
        assert!(s.im.is_zero());
        assert_eq!(s.re, c.int(2));
    }

    #[test]
    fn valuation_is_additive() {
        let c = ctx();
        let x = c.pi_pow(2) * c.int(7);
        assert_eq!(x.val(), 2);
    }

    #[test]
    fn inverse_of_one_plus_p_is_geometric_series() {
        let c = Ctx::new(3, 6).unwrap();
        let x = c.int(4).inv().unwrap();
        // 1 - 3 + 9 - 27 + 81 - 243 reduced mod 3^6 = 729.
        let series: i64 = (0..6).map(|k| (-3i64).pow(k)).sum();
        assert_eq!(x.to_u64_mod(6).unwrap(), series.rem_euclid(729) as u64);
        assert_eq!(x * c.int(4), c.int(1));
    }

    #[test]
    fn conj_fixes_base_field_and_negates_sqrt_eps() {
        let c = ctx();
        assert_eq!(c.sqrt_eps().conj(), -c.sqrt_eps());
        assert_eq!(c.qint(5).conj(), c.qint(5));
    }

    #[test]
    fn norm_of_random_elements_lies_in_base_field() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = c.random_quad(&mut rng, -2);
            let n = x * x.conj();
            assert!(n.im.is_zero());
            let (t, nn) = x.trace_and_norm();
            assert_eq!(t, (x + x.conj()).re);
            assert_eq!(nn, n.re);
        }
    }

    #[test]
    fn trace_and_norm_examples() {
        let c = ctx();
        let (t, n) = c.sqrt_eps().trace_and_norm();
        assert!(t.is_zero());
        assert_eq!(n, c.int(-2));
        let (t, n) = c.qone().trace_and_norm();
        assert_eq!(t, c.int(2));
        assert_eq!(n, c.int(1));
    }

    #[test]
    fn cancellation_loses_precision_honestly() {
        let c = ctx();
        let a = c.int(1) + c.pi_pow(5);
        let d = a - c.int(1);
        assert_eq!(d.val(), 5);
        assert_eq!(d.rel_prec(), 15);
    }

    #[test]
    fn indistinguishable_zero_cannot_be_inverted() {
        let c = ctx();
        let z = c.int(3) - c.int(3);
        assert!(matches!(z.inv(), Err(Error::PrecisionExhausted { .. })));
        assert!(c.qzero().inv().is_err());
    }

    #[test]
    fn nonsquares_match_euler_criterion() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let e = nonsquare(p);
            let mut acc = 1u64;
            for _ in 0..(p - 1) / 2 {
                acc = acc * e % p;
            }
            assert_eq!(acc, p - 1, "eps = {e} is not a nonsquare mod {p}");
            for s in 2..e {
                assert!((1..p).any(|x| x * x % p == s));
            }
        }
    }

    #[test]
    fn precision_caps() {
        assert_eq!(max_precision(3), 39);
        assert_eq!(max_precision(5), 27);
        assert!(Ctx::new(3, 40).is_err());
        assert!(Ctx::new(4, 10).is_err());
    }
}
