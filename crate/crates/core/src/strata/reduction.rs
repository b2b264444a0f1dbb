use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{char_poly, Stratum};
use crate::error::{Error, Result};
use crate::filtration::shape;
use crate::lattice::{HermSpace, LatticeSeq, StandardSeq, N0, N1, N1_DUAL, N2, PI_N1_DUAL};
use crate::padic::Ctx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionCase {
    /// `Lambda(2Z) = Lambda(2Z + 1)`: halve the sequence.
    A,
    /// The two sets are disjoint: a translate of `st21`.
    B,
    /// Neither: period 4 with `n = 2 mod 4`, replaced by `st20`.
    C,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub case: ReductionCase,
    pub seq: LatticeSeq<4>,
    pub n: i32,
}

/// Lattice class modulo `p^Z`: exponents shifted to start at 0.
fn class(x: [i32; 4]) -> [i32; 4] {
    x.map(|v| v - x[0])
}

fn parity_classes(seq: &LatticeSeq<4>, parity: i32) -> BTreeSet<[i32; 4]> {
    (0..seq.e()).filter(|i| i % 2 == parity).map(|i| class(seq.exponent(i))).collect()
}

/// Smallest `|k| <= 2e` with `exponent(i + k) = target[i]` over one period.
fn find_translate(seq: &LatticeSeq<4>, target: &[[i32; 4]]) -> Option<i32> {
    let e = seq.e();
    if target.len() != e as usize {
        return None;
    }
    (-2 * e..=2 * e).find(|&k| (0..e).all(|i| seq.exponent(i + k) == target[i as usize]))
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// The lattice-level reduction for a standard C-sequence and `gcd(e, n) = 2`.
/// Postconditions `n / e = n' / e'` and `a_{n+1} >= a_{n'+1}(Lambda')` are
/// verified before returning.
pub fn reduce_sequence(seq: &LatticeSeq<4>, n: i32, c: &Ctx) -> Result<Reduction> {
    if seq.frame().is_some() {
        return Err(Error::ClassificationFailure("the sequence is not standard (it has a frame)".into()));
    }
    if !seq.is_c_sequence() {
        return Err(Error::ClassificationFailure("not a C-sequence".into()));
    }
    if gcd(seq.e(), n) != 2 {
        return Err(Error::ClassificationFailure(format!("gcd(e, n) = gcd({}, {n}) is not 2", seq.e())));
    }
    let sp = HermSpace::split(c);
    let even = parity_classes(seq, 0);
    let odd = parity_classes(seq, 1);
    let e = seq.e();
    let (case, out, n2) = if even == odd {
        if !(0..e / 2).all(|i| seq.exponent(2 * i) == seq.exponent(2 * i + 1)) {
            return Err(Error::ClassificationFailure("equal parity classes but Lambda(2i) != Lambda(2i+1)".into()));
        }
        let exps: Vec<[i32; 4]> = (0..e / 2).map(|i| seq.exponent(2 * i)).collect();
        let out = LatticeSeq::from_exponents(c, &sp, exps)?;
        if !out.is_strict() || out.duality_index().is_none() {
            return Err(Error::ClassificationFailure("halved sequence is not strict self-dual".into()));
        }
        (ReductionCase::A, out, n / 2)
    } else if even.is_disjoint(&odd) {
        let st21 = StandardSeq::St21.exponents();
        if find_translate(seq, &st21).is_none() {
            return Err(Error::ClassificationFailure("disjoint parity classes but not a translate of st21".into()));
        }
        (ReductionCase::B, seq.clone(), n)
    } else {
        let b2 = [N0, N0, N1, PI_N1_DUAL];
        let b3 = [N1_DUAL, N1, N2, N2];
        if e != 4 || (find_translate(seq, &b2).is_none() && find_translate(seq, &b3).is_none()) {
            return Err(Error::ClassificationFailure("overlapping parity classes outside the two period-4 shapes".into()));
        }
        if n.rem_euclid(4) != 2 {
            return Err(Error::ClassificationFailure(format!("n = {n} is not 2 mod 4")));
        }
        (ReductionCase::C, StandardSeq::St20.build(c), n / 2)
    };
    if (n as i64) * (out.e() as i64) != (n2 as i64) * (e as i64) {
        return Err(Error::InternalInconsistency("levels differ".into()));
    }
    let big = shape(seq, n + 1);
    let small = shape(&out, n2 + 1);
    if !(0..4).all(|i| (0..4).all(|j| big[i][j] <= small[i][j])) {
        return Err(Error::InternalInconsistency("a_{n+1} does not contain a_{n'+1}".into()));
    }
    Ok(Reduction { case, seq: out, n: n2 })
}

/// Reduction of a fundamental stratum on a C-sequence.
pub fn strict_reduction(st: &Stratum, c: &Ctx) -> Result<Reduction> {
    if !char_poly(st)?.fundamental {
        return Err(Error::ClassificationFailure("stratum is not fundamental".into()));
    }
    reduce_sequence(&st.seq, st.n, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::random_fundamental_skew;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> Ctx {
        Ctx::new(3, 20).unwrap()
    }

    #[test]
    fn doubled_st20_halves() {
        let c = ctx();
        let sp = HermSpace::split(&c);
        let seq = StandardSeq::St20.build(&c).doubled(&sp, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let st = random_fundamental_skew(&mut rng, &seq, 2, &c, 500).unwrap();
        let r = strict_reduction(&st, &c).unwrap();
        assert_eq!(r.case, ReductionCase::A);
        assert_eq!(r.n, 1);
        assert_eq!(r.seq.exponents(), StandardSeq::St20.exponents().as_slice());
    }

    #[test]
    fn st21_even_n_stays() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k in [0, 1] {
            let seq = StandardSeq::St21.build_translated(&c, k);
            let st = random_fundamental_skew(&mut rng, &seq, 2, &c, 500).unwrap();
            let r = strict_reduction(&st, &c).unwrap();
            assert_eq!(r.case, ReductionCase::B);
            assert_eq!(r.n, 2);
        }
    }

    #[test]
    fn period_four_goes_to_st20() {
        let c = ctx();
        let sp = HermSpace::split(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for exps in [vec![N0, N0, N1, PI_N1_DUAL], vec![N1_DUAL, N1, N2, N2]] {
            let seq = LatticeSeq::from_exponents(&c, &sp, exps).unwrap();
            assert!(seq.is_c_sequence());
            for n in [2, 6] {
                let st = random_fundamental_skew(&mut rng, &seq, n, &c, 500).unwrap();
                let r = strict_reduction(&st, &c).unwrap();
                assert_eq!(r.case, ReductionCase::C);
                assert_eq!(r.n, n / 2);
            }
        }
    }

    #[test]
    fn wrong_gcd_is_reported() {
        let c = ctx();
        let seq = StandardSeq::St21.build(&c);
        let err = reduce_sequence(&seq, 3, &c).unwrap_err();
        assert!(matches!(err, Error::ClassificationFailure(_)));
    }
}
