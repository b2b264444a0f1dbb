//! The filtrations `a_k(Lambda)` of `A = M_N(F)`, their skew parts, the
//! valuation `nu_Lambda`, trace duality and the characters `psi_b`.

use std::collections::{BTreeMap, HashSet};

use serde::Deserialize;

use crate::cyclo::{Omega, RootArg};
use crate::error::{Error, Result};
use crate::lattice::{HermSpace, LatticeSeq, StandardSeq, N0, N1, N2, PI_N1_DUAL};
use crate::matrix::{Mat, Shape, M4};
use crate::padic::{Ctx, Quad};

/// `floor(a / b)` for `b > 0`.
pub fn floor_div(a: i32, b: i32) -> i32 {
    a.div_euclid(b)
}

/// Entrywise bounds of `a_k` for the diagonal part of `seq`:
/// `bound(r, c) = max_i (lambda_{i+k}[r] - lambda_i[c])`.
pub fn shape<const N: usize>(seq: &LatticeSeq<N>, k: i32) -> Shape<N> {
    let e = seq.e();
    std::array::from_fn(|r| {
        std::array::from_fn(|c| (0..e).map(|i| seq.exponent(i + k)[r] - seq.exponent(i)[c]).max().unwrap())
    })
}

/// An `o_F`-lattice in `M_N(F)` given by entrywise bounds, optionally
/// conjugated by a frame `g`: the lattice is `Ad(g)` of the shape.
#[derive(Clone, Debug)]
pub struct ShapeLattice<const N: usize> {
    pub bounds: Shape<N>,
    pub frame: Option<(Mat<N>, Mat<N>)>,
}

impl<const N: usize> ShapeLattice<N> {
    pub fn plain(bounds: Shape<N>) -> Self {
        ShapeLattice { bounds, frame: None }
    }

    fn untwist(&self, x: &Mat<N>) -> Mat<N> {
        match &self.frame {
            None => *x,
            Some((g, gi)) => *gi * *x * *g,
        }
    }

    pub fn contains(&self, x: &Mat<N>) -> Option<bool> {
        self.untwist(x).in_shape(&self.bounds)
    }
}

pub fn filtration_shape<const N: usize>(seq: &LatticeSeq<N>, k: i32) -> ShapeLattice<N> {
    ShapeLattice { bounds: shape(seq, k), frame: seq.frame().cloned() }
}

/// `nu_Lambda(x) = sup {n : x in a_n}`; `None` stands for infinity. Entries
/// known only as zero modulo `p^v` contribute the bound `v`.
pub fn nu<const N: usize>(seq: &LatticeSeq<N>, x: &Mat<N>) -> Option<i64> {
    let y = match seq.frame() {
        None => *x,
        Some((g, gi)) => *gi * *x * *g,
    };
    let e = seq.e() as i64;
    let base: Vec<Shape<N>> = (0..seq.e()).map(|k| shape(seq, k)).collect();
    let mut best: Option<i64> = None;
    for r in 0..N {
        for c in 0..N {
            let q = y.a[r][c];
            if q.is_exact_zero() {
                continue;
            }
            let v = q.val() as i64;
            let entry = (0..e).map(|k| k + e * (v - base[k as usize][r][c] as i64)).max().unwrap();
            best = Some(best.map_or(entry, |b| b.min(entry)));
        }
    }
    best
}

/// Image of a shape under `sigma(X)_{ij} = conj X_{N-1-j, N-1-i}`.
pub fn sigma_shape<const N: usize>(s: &Shape<N>) -> Shape<N> {
    std::array::from_fn(|i| std::array::from_fn(|j| s[N - 1 - j][N - 1 - i]))
}

/// `Gamma^* = {X : tr(X Gamma) in p_0}` for a shape: `1 - b[j][i]`.
pub fn trace_dual_shape<const N: usize>(s: &Shape<N>) -> Shape<N> {
    std::array::from_fn(|i| std::array::from_fn(|j| 1 - s[j][i]))
}

/// `a_n^* = a_{1-n}` for the given sequence.
pub fn trace_dual_check<const N: usize>(seq: &LatticeSeq<N>, n: i32) -> bool {
    trace_dual_shape(&shape(seq, n)) == shape(seq, 1 - n)
}

/// `sigma(a_n) = a_n`.
pub fn sigma_stable_check<const N: usize>(seq: &LatticeSeq<N>, n: i32) -> bool {
    sigma_shape(&shape(seq, n)) == shape(seq, n)
}

/// Position orbits of `sigma` on matrix entries: pairs and fixed points.
pub fn sigma_orbits<const N: usize>() -> (Vec<((usize, usize), (usize, usize))>, Vec<(usize, usize)>) {
    let mut pairs = Vec::new();
    let mut fixed = Vec::new();
    for i in 0..N {
        for j in 0..N {
            let partner = (N - 1 - j, N - 1 - i);
            if partner == (i, j) {
                fixed.push((i, j));
            } else if (i, j) < partner {
                pairs.push(((i, j), partner));
            }
        }
    }
    (pairs, fixed)
}

/// `log_q |(g cap lo) / (g cap hi)|` for sigma-stable shapes `hi >= lo`:
/// a sigma-pair counts `2 (hi - lo)`, a fixed position counts `hi - lo`.
pub fn skew_count_exponent<const N: usize>(lo: &Shape<N>, hi: &Shape<N>) -> i64 {
    let (pairs, fixed) = sigma_orbits::<N>();
    let pair: i64 = pairs.iter().map(|&((i, j), _)| 2 * (hi[i][j] - lo[i][j]) as i64).sum();
    let fix: i64 = fixed.iter().map(|&(i, j)| (hi[i][j] - lo[i][j]) as i64).sum();
    pair + fix
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientPart {
    /// `P_{r+1} / P_{n+1}`
    Group,
    /// `g_{r+1} / g_{n+1}`
    SkewPlus,
    /// `g_{-n} / g_{-r}`
    SkewMinus,
}

fn check_window(r: i32, n: i32) -> Result<()> {
    if !(n >= r && r >= floor_div(n, 2) && floor_div(n, 2) >= 0) {
        return Err(Error::InvalidInput(format!("need n >= r >= [n/2] >= 0, got n = {n}, r = {r}")));
    }
    Ok(())
}

/// `log_q` of the requested quotient, from shape bounds. The group count is
/// telescoped over the graded pieces `P_k / P_{k+1}`, each of which is
/// counted by its skew graded piece.
pub fn quotient_count<const N: usize>(seq: &LatticeSeq<N>, r: i32, n: i32, part: QuotientPart) -> Result<i64> {
    check_window(r, n)?;
    Ok(match part {
        QuotientPart::Group => {
            (r + 1..=n).map(|k| skew_count_exponent(&shape(seq, k), &shape(seq, k + 1))).sum()
        }
        QuotientPart::SkewPlus => skew_count_exponent(&shape(seq, r + 1), &shape(seq, n + 1)),
        QuotientPart::SkewMinus => skew_count_exponent(&shape(seq, -n), &shape(seq, -r)),
    })
}

/// All `x in o_F / p_F^k` scaled by `p^lo`, i.e. representatives of
/// `p^lo o_F / p^hi o_F`.
pub fn residues(c: &Ctx, lo: i32, hi: i32) -> Vec<Quad> {
    let k = (hi - lo).max(0) as u32;
    let m = c.p.pow(k) as i64;
    let mut out = Vec::with_capacity((m * m) as usize);
    for a in 0..m {
        for b in 0..m {
            out.push(c.quad(a, b).shift(lo));
        }
    }
    out
}

/// Count classes `1 + Y`, `Y in a_{r+1} / a_{n+1}`, satisfying the unitary
/// condition `Y + sigma(Y) + Y sigma(Y) in a_{n+1}`. The quadratic term lies in
/// `a_{2r+2}`; once that is checked to sit inside `a_{n+1}` the condition
/// splits over sigma-orbits of positions, and each orbit is enumerated.
pub fn enumerate_group_quotient<const N: usize>(seq: &LatticeSeq<N>, r: i32, n: i32, c: &Ctx) -> Result<i64> {
    check_window(r, n)?;
    let lo = shape(seq, r + 1);
    let hi = shape(seq, n + 1);
    let quad = shape(seq, 2 * r + 2);
    if !(0..N).all(|i| (0..N).all(|j| quad[i][j] >= hi[i][j])) {
        return Err(Error::InternalInconsistency("a_{2r+2} is not inside a_{n+1}".into()));
    }
    let (pairs, fixed) = sigma_orbits::<N>();
    let mut total: i64 = 0;
    for ((i, j), (k, l)) in pairs {
        let xs = residues(c, lo[i][j], hi[i][j]);
        let ys = residues(c, lo[k][l], hi[k][l]);
        let mut count = 0i64;
        for x in &xs {
            for y in &ys {
                // (Y + sigma Y)_{ij} = Y_ij + conj Y_kl
                let s = *x + y.conj();
                if s.val_at_least(hi[i][j]) == Some(true) {
                    count += 1;
                }
            }
        }
        total += log_q(count, c.p)?;
    }
    for (i, j) in fixed {
        let xs = residues(c, lo[i][j], hi[i][j]);
        let count = xs.iter().filter(|x| (**x + x.conj()).val_at_least(hi[i][j]) == Some(true)).count() as i64;
        total += log_q(count, c.p)?;
    }
    Ok(total)
}

fn log_q(count: i64, p: u64) -> Result<i64> {
    let mut k = 0;
    let mut x = count;
    while x > 1 && x % p as i64 == 0 {
        x /= p as i64;
        k += 1;
    }
    if x != 1 {
        return Err(Error::InternalInconsistency(format!("{count} is not a power of {p}")));
    }
    Ok(k)
}

/// Residue key of a matrix modulo the shape `hi`.
pub fn residue_key<const N: usize>(x: &Mat<N>, hi: &Shape<N>) -> Option<Vec<(i32, u64)>> {
    let mut key = Vec::with_capacity(2 * N * N);
    for i in 0..N {
        for j in 0..N {
            key.extend(x.a[i][j].residue_key(hi[i][j])?);
        }
    }
    Some(key)
}

/// Canonical representative of `x` modulo the shape `hi`.
pub fn reduce_mod<const N: usize>(x: &Mat<N>, hi: &Shape<N>, c: &Ctx) -> Result<Mat<N>> {
    let mut out = *x;
    for i in 0..N {
        for j in 0..N {
            out.a[i][j] = x.a[i][j].digits_below(hi[i][j], c.prec)?;
        }
    }
    Ok(out)
}

/// Close the images of unitary generators of `P_{r+1}` in `P_{r+1}/P_{n+1}`
/// under multiplication; returns the group order. Generators are Cayley
/// transforms of a residue basis of `g_{r+1} / g_{n+1}`. Also checks that
/// `x -> x - 1` is injective on the classes, with image in the skew part.
pub fn group_closure_order(seq: &LatticeSeq<4>, r: i32, n: i32, c: &Ctx, limit: usize) -> Result<usize> {
    check_window(r, n)?;
    let lo = shape(seq, r + 1);
    let hi = shape(seq, n + 1);
    let gens = skew_generators(&lo, &hi, c)?;
    let one = M4::identity(c);
    let mut seen = HashSet::new();
    let mut skew_keys = HashSet::new();
    let mut frontier = vec![one];
    seen.insert(residue_key(&one, &hi).unwrap());
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y = reduce_mod(&(x * *g), &hi, c)?;
            let key = residue_key(&y, &hi).ok_or_else(|| Error::precision("group closure", hi[0][0] as u32))?;
            if seen.insert(key) {
                let d = y - one;
                let skew_defect = d + d.sigma();
                if skew_defect.in_shape(&hi) != Some(true) {
                    return Err(Error::InternalInconsistency("x - 1 is not skew modulo a_{n+1}".into()));
                }
                skew_keys.insert(residue_key(&reduce_mod(&d, &hi, c)?, &hi).unwrap());
                frontier.push(y);
                if seen.len() > limit {
                    return Err(Error::Unsupported(format!("group closure exceeded {limit} elements")));
                }
            }
        }
    }
    if skew_keys.len() + 1 != seen.len() {
        return Err(Error::InternalInconsistency("x -> x - 1 is not injective".into()));
    }
    Ok(seen.len())
}

/// Cayley transforms of the skew elements `t E_ij - conj(t) E_kl` and
/// `sqrt(eps) p^v E_ii'` spanning `g_lo / g_hi`, with `t` in `{p^v, p^v sqrt eps}`.
fn skew_generators(lo: &Shape<4>, hi: &Shape<4>, c: &Ctx) -> Result<Vec<M4>> {
    let (pairs, fixed) = sigma_orbits::<4>();
    let mut out = Vec::new();
    for ((i, j), (k, l)) in pairs {
        for v in lo[i][j]..hi[i][j] {
            for t in [c.qpi(v), c.qpi(v) * c.sqrt_eps()] {
                let x = M4::unit(c, i, j, t) - M4::unit(c, k, l, t.conj());
                out.push(crate::lattice::cayley(&x, c)?);
            }
        }
    }
    for (i, j) in fixed {
        for v in lo[i][j]..hi[i][j] {
            let x = M4::unit(c, i, j, c.qpi(v) * c.sqrt_eps());
            out.push(crate::lattice::cayley(&x, c)?);
        }
    }
    Ok(out)
}

/// `tr_{A/F_0}(X) = tr_{F/F_0}(tr X)`.
pub fn trace_to_base<const N: usize>(x: &Mat<N>) -> crate::padic::Padic {
    let t = x.trace();
    t.re + t.re
}

/// The character `p -> Omega(tr_{A/F_0}(b (p - 1)))` of `P_{r+1} / P_{n+1}`.
#[derive(Clone, Debug)]
pub struct CharacterPsi {
    pub b: M4,
    pub r: i32,
    pub n: i32,
    pub seq: LatticeSeq<4>,
    pub omega: Omega,
}

impl CharacterPsi {
    pub fn new(b: M4, r: i32, n: i32, seq: LatticeSeq<4>) -> Result<Self> {
        check_window(r, n)?;
        if filtration_shape(&seq, -n).contains(&b) != Some(true) {
            return Err(Error::InvalidInput("b is not in a_{-n}".into()));
        }
        if !(b + b.sigma()).is_zero() {
            return Err(Error::InvalidInput("b is not skew".into()));
        }
        let omega = Omega::standard(b.p(), (n + 2) as u32);
        Ok(CharacterPsi { b, r, n, seq, omega })
    }

    pub fn eval(&self, x: &M4, c: &Ctx) -> Result<RootArg> {
        let d = *x - M4::identity(c);
        if filtration_shape(&self.seq, self.r + 1).contains(&d) != Some(true) {
            return Err(Error::InvalidInput("x is not in P_{r+1}".into()));
        }
        if !HermSpace::split(c).is_unitary(x, c) {
            return Err(Error::InvalidGroupElement("x is not unitary".into()));
        }
        self.omega.eval(&trace_to_base(&(self.b * d)))
    }
}

/// Random element of `g_k`: uniform entries in the shape, then `(X - sigma X) / 2`.
pub fn random_skew<R: rand::Rng + ?Sized>(rng: &mut R, bounds: &Shape<4>, c: &Ctx) -> Result<M4> {
    let x: M4 = Mat::from_fn(|i, j| c.random_quad(rng, bounds[i][j]));
    let half = c.qint(2).inv()?;
    Ok((x - x.sigma()).scale(half))
}

/// The two lattice sequences of period 8 used in the Hecke computations, by label.
pub fn named_sequence(c: &Ctx, label: &str) -> Option<LatticeSeq<4>> {
    let sp = HermSpace::split(c);
    match label {
        "L2" => LatticeSeq::from_exponents(c, &sp, vec![N0, N0, N0, N1, N2, N2, N2, PI_N1_DUAL]).ok(),
        "L1" => LatticeSeq::from_exponents(c, &sp, vec![N0, N0, N0, N0, N1, N2, N2, PI_N1_DUAL]).ok(),
        other => StandardSeq::from_label(other).map(|s| s.build(c)),
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct GoldenTable {
    pub sequence: String,
    pub lattices: Vec<String>,
    pub shapes: BTreeMap<String, Shape<4>>,
}

#[derive(Clone, Debug, Deserialize)]
struct GoldenFile {
    version: u32,
    tables: Vec<GoldenTable>,
}

const GOLDEN_JSON: &str = include_str!("../data/filtration_tables.json");

/// Reference filtration tables shipped with the crate.
pub fn golden_tables() -> Vec<GoldenTable> {
    let f: GoldenFile = serde_json::from_str(GOLDEN_JSON).expect("embedded table file parses");
    assert_eq!(f.version, 1);
    f.tables
}

/// Compare every golden table with the computed shapes; returns mismatches as
/// `(sequence, k)`.
pub fn check_golden_tables(c: &Ctx) -> Vec<(String, i32)> {
    let mut bad = Vec::new();
    for t in golden_tables() {
        let seq = named_sequence(c, &t.sequence).expect("known label");
        for (k, want) in &t.shapes {
            let k: i32 = k.parse().expect("integer key");
            if shape(&seq, k) != *want {
                bad.push((t.sequence.clone(), k));
            }
        }
    }
    bad
}
