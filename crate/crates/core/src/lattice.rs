//! Hermitian spaces, `o_F`-lattices and periodic lattice sequences.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Mat, M4};
use crate::padic::{Ctx, Quad};

/// A hermitian space `(F^N, f)` with `f(x, y) = x^dagger G y`.
#[derive(Clone, Copy, Debug)]
pub struct HermSpace<const N: usize> {
    pub gram: Mat<N>,
    gram_inv: Mat<N>,
}

impl<const N: usize> HermSpace<N> {
    pub fn new(gram: Mat<N>) -> Result<Self> {
        if gram.conj_transpose() != gram {
            return Err(Error::InvalidInput("Gram matrix is not hermitian".into()));
        }
        let gram_inv = gram.inverse()?;
        Ok(HermSpace { gram, gram_inv })
    }

    /// The form with antidiagonal Gram matrix of ones.
    pub fn split(c: &Ctx) -> Self {
        let z = c.qzero();
        let one = c.qone();
        let g = Mat::from_fn(|i, j| if i + j == N - 1 { one } else { z });
        HermSpace { gram: g, gram_inv: g }
    }

    /// Adjoint `G^{-1} X^dagger G`.
    pub fn sigma(&self, x: &Mat<N>) -> Mat<N> {
        self.gram_inv * x.conj_transpose() * self.gram
    }

    /// `g sigma(g) = 1` up to the given absolute precision.
    pub fn is_unitary(&self, g: &Mat<N>, c: &Ctx) -> bool {
        let d = *g * self.sigma(g) - Mat::identity(c);
        let target = (c.prec as i32 / 2).max(1);
        d.in_shape(&[[target; N]; N]).unwrap_or(false)
    }
}

impl HermSpace<2> {
    /// `conj(x1) y1 + p conj(x2) y2`, the anisotropic plane.
    pub fn f0(c: &Ctx) -> Self {
        HermSpace::new(Mat::diag(c, [c.qone(), c.qpi(1)])).unwrap()
    }

    /// `conj(x1) y2 + conj(x2) y1`, the hyperbolic plane.
    pub fn f1(c: &Ctx) -> Self {
        HermSpace::split(c)
    }
}

/// `true` when the 2-dimensional space contains no isotropic vector,
/// detected by the parity of `v(det G)`.
pub fn plane_is_anisotropic(sp: &HermSpace<2>) -> bool {
    sp.gram.det().val().rem_euclid(2) == 1
}

/// An `o_F`-lattice with its basis in column Hermite form: lower triangular,
/// pivots `p^v`, entries below a pivot reduced modulo that pivot.
#[derive(Clone, Copy)]
pub struct Lattice<const N: usize> {
    basis: Mat<N>,
    pivots: [i32; N],
}

impl<const N: usize> Lattice<N> {
    pub fn from_basis(b: &Mat<N>, c: &Ctx) -> Result<Self> {
        let mut m = *b;
        let mut pivots = [0i32; N];
        for i in 0..N {
            let j = (i..N)
                .filter(|&j| !m.a[i][j].is_zero())
                .min_by_key(|&j| m.a[i][j].val())
                .ok_or_else(|| Error::precision("lattice basis is singular at working precision", 1))?;
            swap_cols(&mut m, i, j);
            let v = m.a[i][i].val();
            pivots[i] = v;
            let scale = c.qpi(v) * m.a[i][i].inv()?;
            for r in 0..N {
                m.a[r][i] = m.a[r][i] * scale;
            }
            m.a[i][i] = c.qpi(v);
            for j in i + 1..N {
                let f = m.a[i][j] * c.qpi(-v);
                if f.is_exact_zero() {
                    continue;
                }
                for r in 0..N {
                    m.a[r][j] = m.a[r][j] - f * m.a[r][i];
                }
                m.a[i][j] = c.qzero();
            }
        }
        for r in 0..N {
            for col in 0..r {
                let x = m.a[r][col];
                let rem = x.digits_below(pivots[r], c.prec)?;
                let t = (x - rem) * c.qpi(-pivots[r]);
                if !t.is_exact_zero() {
                    for rr in r..N {
                        m.a[rr][col] = m.a[rr][col] - t * m.a[rr][r];
                    }
                }
                m.a[r][col] = rem;
            }
        }
        Ok(Lattice { basis: m, pivots })
    }

    /// `p^{e_1} o_F e_1 + ... + p^{e_N} o_F e_N`.
    pub fn diagonal(c: &Ctx, exps: [i32; N]) -> Self {
        let m = Mat::diag(c, exps.map(|e| c.qpi(e)));
        Lattice { basis: m, pivots: exps }
    }

    pub fn basis(&self) -> &Mat<N> {
        &self.basis
    }

    pub fn pivots(&self) -> [i32; N] {
        self.pivots
    }

    /// Exponent vector when the basis is diagonal.
    pub fn diagonal_exponents(&self) -> Option<[i32; N]> {
        for i in 0..N {
            for j in 0..N {
                if i != j && !self.basis.a[i][j].is_exact_zero() && !self.basis.a[i][j].is_zero() {
                    return None;
                }
            }
        }
        Some(self.pivots)
    }

    /// Canonical comparison key: pivots and reduced sub-diagonal residues.
    pub fn key(&self) -> Option<Vec<(i32, u64)>> {
        let mut k: Vec<(i32, u64)> = self.pivots.iter().map(|&v| (v, 0)).collect();
        for r in 0..N {
            for col in 0..r {
                k.extend(self.basis.a[r][col].residue_key(self.pivots[r])?);
            }
        }
        Some(k)
    }

    pub fn scale(&self, k: i32) -> Self {
        Lattice { basis: self.basis.shift(k), pivots: self.pivots.map(|v| v + k) }
    }

    pub fn act(&self, g: &Mat<N>, c: &Ctx) -> Result<Self> {
        Lattice::from_basis(&(*g * self.basis), c)
    }

    /// `L^# = {v : f(v, L) in o_F}`, with basis `((G B)^dagger)^{-1}`.
    pub fn dual(&self, sp: &HermSpace<N>, c: &Ctx) -> Result<Self> {
        let m = (sp.gram * self.basis).conj_transpose().inverse()?;
        Lattice::from_basis(&m, c)
    }

    /// `other` is contained in `self`.
    pub fn contains(&self, other: &Lattice<N>) -> Result<bool> {
        let coords = self.basis.inverse()? * other.basis;
        coords.in_shape_strict(&[[0; N]; N])
    }

    /// `log_q [self : other]` for `other` contained in `self`.
    pub fn index_exponent(&self, other: &Lattice<N>) -> Result<i64> {
        if !self.contains(other)? {
            return Err(Error::InvalidInput("index of a non-sublattice".into()));
        }
        let s: i32 = other.pivots.iter().sum::<i32>() - self.pivots.iter().sum::<i32>();
        Ok(2 * s as i64)
    }
}

fn swap_cols<const N: usize>(m: &mut Mat<N>, i: usize, j: usize) {
    if i != j {
        for r in 0..N {
            m.a[r].swap(i, j);
        }
    }
}

impl<const N: usize> PartialEq for Lattice<N> {
    fn eq(&self, o: &Self) -> bool {
        match (self.key(), o.key()) {
            (Some(a), Some(b)) => a == b,
            _ => self.contains(o).unwrap_or(false) && o.contains(self).unwrap_or(false),
        }
    }
}

impl<const N: usize> fmt::Debug for Lattice<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.diagonal_exponents() {
            Some(e) => write!(f, "Lattice{e:?}"),
            None => write!(f, "Lattice{:?}", self.basis),
        }
    }
}

/// A periodic decreasing sequence `i -> Lambda(i)` with
/// `Lambda(i + e) = p Lambda(i)`, stored as `g` applied to diagonal lattices.
#[derive(Clone, Debug)]
pub struct LatticeSeq<const N: usize> {
    exps: Vec<[i32; N]>,
    frame: Option<(Mat<N>, Mat<N>)>,
    slice: Vec<Lattice<N>>,
    duality: Option<i32>,
}

impl<const N: usize> LatticeSeq<N> {
    /// Build from one period of diagonal exponent vectors, validating that
    /// the sequence decreases; `d` is computed.
    pub fn from_exponents(c: &Ctx, sp: &HermSpace<N>, exps: Vec<[i32; N]>) -> Result<Self> {
        if exps.is_empty() {
            return Err(Error::InvalidInput("empty lattice sequence".into()));
        }
        let slice = exps.iter().map(|&e| Lattice::diagonal(c, e)).collect();
        let mut s = LatticeSeq { exps, frame: None, slice, duality: None };
        s.validate()?;
        s.duality = s.compute_duality(sp, c)?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let e = self.period();
        for i in 0..e {
            let next = self.lattice(i as i32 + 1);
            if !self.slice[i].contains(&next)? {
                return Err(Error::InvalidInput(format!("Lambda({i}) does not contain Lambda({})", i + 1)));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.slice.len()
    }

    pub fn e(&self) -> i32 {
        self.slice.len() as i32
    }

    pub fn duality_index(&self) -> Option<i32> {
        self.duality
    }

    pub fn frame(&self) -> Option<&(Mat<N>, Mat<N>)> {
        self.frame.as_ref()
    }

    /// Diagonal exponent vectors of one period, before applying the frame.
    pub fn exponents(&self) -> &[[i32; N]] {
        &self.exps
    }

    /// Exponent vector of `Lambda(i)` for any integer `i` (frame ignored).
    pub fn exponent(&self, i: i32) -> [i32; N] {
        let e = self.e();
        let (q, r) = (i.div_euclid(e), i.rem_euclid(e));
        self.exps[r as usize].map(|v| v + q)
    }

    pub fn lattice(&self, i: i32) -> Lattice<N> {
        let e = self.e();
        self.slice[i.rem_euclid(e) as usize].scale(i.div_euclid(e))
    }

    pub fn is_strict(&self) -> bool {
        (0..self.e()).all(|i| self.lattice(i) != self.lattice(i + 1))
    }

    fn compute_duality(&self, sp: &HermSpace<N>, c: &Ctx) -> Result<Option<i32>> {
        let e = self.e();
        let duals: Vec<Lattice<N>> = (0..e).map(|i| self.lattice(i).dual(sp, c)).collect::<Result<_>>()?;
        for d in -2 * e..=2 * e {
            if (0..e).all(|i| duals[i as usize] == self.lattice(d - i)) {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    /// `d` with `Lambda(i)^# = Lambda(d - i)` for all `i`, recomputed from the lattices.
    pub fn self_duality_index(&self, sp: &HermSpace<N>, c: &Ctx) -> Result<Option<i32>> {
        self.compute_duality(sp, c)
    }

    /// `(g Lambda + k)(i) = g Lambda(i + k)`.
    pub fn act_and_translate(&self, g: &Mat<N>, k: i32, sp: &HermSpace<N>, c: &Ctx) -> Result<Self> {
        if !sp.is_unitary(g, c) {
            return Err(Error::InvalidGroupElement("g sigma(g) != 1".into()));
        }
        let e = self.e();
        let exps: Vec<[i32; N]> = (0..e).map(|i| self.exponent(i + k)).collect();
        let (frame, g_total) = match &self.frame {
            None => ((*g, g.inverse()?), *g),
            Some((h, _)) => {
                let t = *g * *h;
                ((t, t.inverse()?), t)
            }
        };
        let slice = exps
            .iter()
            .map(|&x| Lattice::diagonal(c, x).act(&g_total, c))
            .collect::<Result<Vec<_>>>()?;
        let mut s = LatticeSeq { exps, frame: Some(frame), slice, duality: None };
        s.validate()?;
        s.duality = s.compute_duality(sp, c)?;
        Ok(s)
    }

    /// Replace one lattice of the period; used to build negative controls.
    pub fn with_slice(&self, i: usize, exps: [i32; N], sp: &HermSpace<N>, c: &Ctx) -> Result<Self> {
        let mut e = self.exps.clone();
        e[i] = exps;
        LatticeSeq::from_exponents(c, sp, e)
    }

    /// `Lambda'(2i) = Lambda'(2i + 1) = Lambda(i)`.
    pub fn doubled(&self, sp: &HermSpace<N>, c: &Ctx) -> Result<Self> {
        let exps = self.exps.iter().flat_map(|&x| [x, x]).collect();
        LatticeSeq::from_exponents(c, sp, exps)
    }

    /// C-sequence: self-dual, even period, odd `d`, and
    /// `Lambda(2i + 1) != Lambda(2i + 2)`.
    pub fn is_c_sequence(&self) -> bool {
        let Some(d) = self.duality else { return false };
        self.e() % 2 == 0
            && d.rem_euclid(2) == 1
            && (0..self.e() / 2).all(|i| self.lattice(2 * i + 1) != self.lattice(2 * i + 2))
    }
}

/// Classification of a 2-dimensional hermitian space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneType {
    Anisotropic,
    Isotropic,
}

/// Read off the plane type from the parity of `d` of a strict self-dual
/// sequence of period 2.
pub fn classify_2dim(seq: &LatticeSeq<2>) -> Result<PlaneType> {
    let d = seq
        .duality_index()
        .ok_or_else(|| Error::InvalidInput("sequence is not self-dual".into()))?;
    if seq.e() != 2 || !seq.is_strict() {
        return Err(Error::InvalidInput("need a strict sequence of period 2".into()));
    }
    Ok(if d.rem_euclid(2) == 1 { PlaneType::Anisotropic } else { PlaneType::Isotropic })
}

/// The seven standard strict self-dual sequences in the split 4-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StandardSeq {
    #[serde(rename = "st4")]
    St4,
    #[serde(rename = "st30")]
    St30,
    #[serde(rename = "st31")]
    St31,
    #[serde(rename = "st20")]
    St20,
    #[serde(rename = "st21")]
    St21,
    #[serde(rename = "st10")]
    St10,
    #[serde(rename = "st11")]
    St11,
}

pub const N0: [i32; 4] = [0, 0, 0, 0];
pub const N1: [i32; 4] = [0, 0, 0, 1];
pub const N2: [i32; 4] = [0, 0, 1, 1];
pub const N1_DUAL: [i32; 4] = [-1, 0, 0, 0];
/// `p N_1^#`.
pub const PI_N1_DUAL: [i32; 4] = [0, 1, 1, 1];

impl StandardSeq {
    pub const ALL: [StandardSeq; 7] = [
        StandardSeq::St4,
        StandardSeq::St30,
        StandardSeq::St31,
        StandardSeq::St20,
        StandardSeq::St21,
        StandardSeq::St10,
        StandardSeq::St11,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            StandardSeq::St4 => "st4",
            StandardSeq::St30 => "st30",
            StandardSeq::St31 => "st31",
            StandardSeq::St20 => "st20",
            StandardSeq::St21 => "st21",
            StandardSeq::St10 => "st10",
            StandardSeq::St11 => "st11",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        StandardSeq::ALL.into_iter().find(|x| x.label() == s)
    }

    /// The subset of `{N_0, N_1, N_2}` the sequence runs through.
    pub fn subset(&self) -> &'static [&'static str] {
        match self {
            StandardSeq::St4 => &["N0", "N1", "N2"],
            StandardSeq::St30 => &["N0", "N1"],
            StandardSeq::St31 => &["N1", "N2"],
            StandardSeq::St20 => &["N0", "N2"],
            StandardSeq::St21 => &["N1"],
            StandardSeq::St10 => &["N0"],
            StandardSeq::St11 => &["N2"],
        }
    }

    pub fn exponents(&self) -> Vec<[i32; 4]> {
        match self {
            StandardSeq::St4 => vec![N0, N1, N2, PI_N1_DUAL],
            StandardSeq::St30 => vec![N0, N1, PI_N1_DUAL],
            StandardSeq::St31 => vec![N1, N2, PI_N1_DUAL],
            StandardSeq::St20 => vec![N0, N2],
            StandardSeq::St21 => vec![N1, PI_N1_DUAL],
            StandardSeq::St10 => vec![N0],
            StandardSeq::St11 => vec![N2],
        }
    }

    pub fn build(&self, c: &Ctx) -> LatticeSeq<4> {
        LatticeSeq::from_exponents(c, &HermSpace::split(c), self.exponents()).expect("standard sequence")
    }

    /// Build the translate `i -> Lambda(i + k)`.
    pub fn build_translated(&self, c: &Ctx, k: i32) -> LatticeSeq<4> {
        let base = self.build(c);
        let exps = (0..base.e()).map(|i| base.exponent(i + k)).collect();
        LatticeSeq::from_exponents(c, &HermSpace::split(c), exps).expect("standard sequence")
    }
}

/// Standard sequence built from a subset of `{N_0, N_1, N_2}`: the chain
/// `N_0 > N_1 > N_2 > p N_1^# > p N_0` restricted to the chosen lattices and
/// their duals.
pub fn sequence_from_subset(c: &Ctx, subset: &[usize]) -> Result<LatticeSeq<4>> {
    // N_1 forces its scaled dual p N_1^# into the period; N_0 and N_2 are self-dual up to scaling.
    let mut chosen = [false; 4];
    for &s in subset {
        match s {
            0 => chosen[0] = true,
            1 => {
                chosen[1] = true;
                chosen[3] = true;
            }
            2 => chosen[2] = true,
            _ => return Err(Error::InvalidInput(format!("no lattice N{s}"))),
        }
    }
    let chain = [N0, N1, N2, PI_N1_DUAL];
    let exps: Vec<[i32; 4]> = (0..4).filter(|&i| chosen[i]).map(|i| chain[i]).collect();
    LatticeSeq::from_exponents(c, &HermSpace::split(c), exps)
}

/// Cayley transform `(1 + X/2)(1 - X/2)^{-1}`, unitary for skew `X`.
pub fn cayley<const N: usize>(x: &Mat<N>, c: &Ctx) -> Result<Mat<N>> {
    let half = c.qint(2).inv()?;
    let hx = x.scale(half);
    let one = Mat::identity(c);
    Ok((one + hx) * (one - hx).inverse()?)
}

/// Random element of the unitary group of the split form: products of Cayley
/// transforms of random integral skew matrices and signed permutations.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, c: &Ctx) -> Result<M4> {
    let mut g = M4::identity(c);
    for _ in 0..2 {
        let x: M4 = Mat::from_fn(|_, _| c.random_quad(rng, 0));
        let skew = x - x.sigma();
        g = g * cayley(&skew, c)?;
        let w = weyl_elements(c)[rng.gen_range(0..8)];
        g = g * w;
    }
    Ok(g)
}

/// A few elements of the monomial part of the unitary group.
pub fn weyl_elements(c: &Ctx) -> Vec<M4> {
    let z = c.qzero();
    let one = c.qone();
    let perm = |sig: [usize; 4], diag: [Quad; 4]| -> M4 {
        Mat::from_fn(|i, j| if sig[j] == i { diag[j] } else { z })
    };
    let pi = c.qpi(1);
    let ipi = c.qpi(-1);
    vec![
        M4::identity(c),
        perm([3, 2, 1, 0], [one; 4]),
        perm([0, 2, 1, 3], [one; 4]),
        perm([1, 0, 3, 2], [one; 4]),
        perm([0, 2, 1, 3], [one, ipi, pi, one]),
        perm([3, 1, 2, 0], [ipi, one, one, pi]),
        M4::diag(c, [pi, one, one, ipi]),
        M4::diag(c, [c.sqrt_eps(), one, one, c.sqrt_eps().conj().inv().unwrap()]),
    ]
}
