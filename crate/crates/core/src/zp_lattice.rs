//! Finitely generated `Z_p`-submodules of `Q_p^D`, used for lattices in
//! `A = M_4(F)` viewed as `Q_p^32`.

use crate::error::{Error, Result};
use crate::matrix::{Mat, Shape, M4};
use crate::padic::{Ctx, Padic, Quad};

/// Position of the real (`0`) or `sqrt eps` (`1`) coordinate of entry `(r, c)`.
pub fn coord(r: usize, c: usize, part: usize) -> usize {
    2 * (4 * r + c) + part
}

pub fn flatten(x: &M4) -> Vec<Padic> {
    let mut v = Vec::with_capacity(32);
    for r in 0..4 {
        for c in 0..4 {
            v.push(x.a[r][c].re);
            v.push(x.a[r][c].im);
        }
    }
    v
}

pub fn unflatten(v: &[Padic]) -> M4 {
    Mat::from_fn(|r, c| Quad::new(v[coord(r, c, 0)], v[coord(r, c, 1)]))
}

/// A `Z_p`-module in row echelon form: pivot columns strictly increase and
/// the pivot of each row has minimal valuation in its column.
#[derive(Clone, Debug)]
pub struct ZpModule {
    dim: usize,
    rows: Vec<Vec<Padic>>,
    pivots: Vec<usize>,
}

impl ZpModule {
    pub fn from_generators(dim: usize, gens: Vec<Vec<Padic>>) -> Self {
        let (rows, pivots) = echelon(dim, gens);
        ZpModule { dim, rows, pivots }
    }

    pub fn from_matrices(gens: &[M4]) -> Self {
        ZpModule::from_generators(32, gens.iter().map(flatten).collect())
    }

    /// The shape lattice `{X : v(X_rc) >= b_rc}` as a `Z_p`-module.
    pub fn from_shape(bounds: &Shape<4>, c: &Ctx) -> Self {
        ZpModule::from_matrices(&shape_generators(bounds, c))
    }

    /// `g cap L` for a sigma-stable shape lattice `L`.
    pub fn skew_part_of_shape(bounds: &Shape<4>, c: &Ctx) -> Result<Self> {
        let half = c.qint(2).inv()?;
        let gens: Vec<M4> = shape_generators(bounds, c).iter().map(|x| (*x - x.sigma()).scale(half)).collect();
        Ok(ZpModule::from_matrices(&gens))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Padic>] {
        &self.rows
    }

    pub fn basis_matrices(&self) -> Vec<M4> {
        self.rows.iter().map(|r| unflatten(r)).collect()
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    fn pivot_vals(&self) -> Vec<i32> {
        self.rows.iter().zip(&self.pivots).map(|(r, &c)| r[c].val()).collect()
    }

    /// `Some(v in self)`, `None` when precision does not decide.
    pub fn contains(&self, v: &[Padic]) -> Option<bool> {
        let mut w = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            // earlier columns are already cleared
            if w[pc].is_zero() {
                continue;
            }
            let f = w[pc] * row[pc].inv().ok()?;
            if f.val() < 0 {
                return Some(false);
            }
            for j in pc..self.dim {
                w[j] = w[j] - f * row[j];
            }
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(true)
        } else {
            Some(false)
        }
    }

    pub fn contains_matrix(&self, x: &M4) -> Option<bool> {
        self.contains(&flatten(x))
    }

    pub fn contains_module(&self, o: &ZpModule) -> Option<bool> {
        let mut all = true;
        for r in &o.rows {
            match self.contains(r) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => all = false,
            }
        }
        if all {
            Some(true)
        } else {
            None
        }
    }

    pub fn sum(&self, o: &ZpModule) -> ZpModule {
        let mut gens = self.rows.clone();
        gens.extend(o.rows.iter().cloned());
        ZpModule::from_generators(self.dim, gens)
    }

    /// Zassenhaus: echelon `[A | A ; B | 0]`; rows with vanishing left half
    /// span `A cap B` in the right half.
    pub fn intersect(&self, o: &ZpModule) -> ZpModule {
        let d = self.dim;
        let zero = Padic::exact_zero(self.p());
        let mut gens = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.extend(r.iter().copied());
            gens.push(v);
        }
        for r in &o.rows {
            let mut v = r.clone();
            v.extend(std::iter::repeat(zero).take(d));
            gens.push(v);
        }
        let (rows, pivots) = echelon(2 * d, gens);
        let inter = rows
            .into_iter()
            .zip(pivots)
            .filter(|(_, pc)| *pc >= d)
            .map(|(r, _)| r[d..].to_vec())
            .collect();
        ZpModule::from_generators(d, inter)
    }

    fn p(&self) -> u64 {
        self.rows.first().map(|r| r[0].p()).unwrap_or(3)
    }

    /// `log_p [self : sub]` for `sub` a full-rank submodule of `self`.
    pub fn index_exponent(&self, sub: &ZpModule) -> Result<i64> {
        if self.pivots != sub.pivots {
            return Err(Error::InvalidInput("modules do not span the same space".into()));
        }
        if self.contains_module(sub) != Some(true) {
            return Err(Error::InvalidInput("not a submodule".into()));
        }
        let a: i64 = self.pivot_vals().iter().map(|&v| v as i64).sum();
        let b: i64 = sub.pivot_vals().iter().map(|&v| v as i64).sum();
        Ok(b - a)
    }

    /// Coordinates of `v` in the echelon basis; valid when `v` lies in the span.
    pub fn coordinates(&self, v: &[Padic]) -> Result<Vec<Padic>> {
        let mut w = v.to_vec();
        let mut out = Vec::with_capacity(self.rows.len());
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = if w[pc].is_zero() { Padic::exact_zero(row[pc].p()) } else { w[pc] * row[pc].inv()? };
            for j in pc..self.dim {
                w[j] = w[j] - f * row[j];
            }
            out.push(f);
        }
        Ok(out)
    }

    /// The pairs `(l_i, a_i)` with `a_i > 0` behind [`ZpModule::quotient_reps`].
    pub fn quotient_gens(&self, sub: &ZpModule) -> Result<Vec<(Vec<Padic>, u32)>> {
        let coords: Vec<Vec<Padic>> = sub.rows.iter().map(|r| self.coordinates(r)).collect::<Result<_>>()?;
        let r = self.rows.len();
        let (t, tp) = echelon(r, coords);
        if tp.len() != r || tp.iter().enumerate().any(|(i, &pc)| pc != i) {
            return Err(Error::InvalidInput("quotient is not finite".into()));
        }
        Ok((0..r)
            .map(|i| (self.rows[i].clone(), t[i][i].val().max(0) as u32))
            .filter(|(_, a)| *a > 0)
            .collect())
    }

    /// Representatives `sum c_i l_i`, `0 <= c_i < p^{a_i}`, of `self / sub`,
    /// with `l_i` adapted to `sub`. Errors above `limit` elements.
    pub fn quotient_reps(&self, sub: &ZpModule, c: &Ctx, limit: u64) -> Result<Vec<Vec<Padic>>> {
        let coords: Vec<Vec<Padic>> = sub.rows.iter().map(|r| self.coordinates(r)).collect::<Result<_>>()?;
        let r = self.rows.len();
        let (t, tp) = echelon(r, coords);
        if tp.len() != r || tp.iter().enumerate().any(|(i, &pc)| pc != i) {
            return Err(Error::InvalidInput("quotient is not finite".into()));
        }
        let exps: Vec<u32> = (0..r).map(|i| t[i][i].val().max(0) as u32).collect();
        let total: u64 = exps.iter().try_fold(1u64, |acc, &a| acc.checked_mul(c.p.checked_pow(a)?)).unwrap_or(u64::MAX);
        if total > limit {
            return Err(Error::Unsupported(format!("quotient has {total} elements, above {limit}")));
        }
        let mut out = vec![vec![Padic::exact_zero(c.p); self.dim]];
        for (i, &a) in exps.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let m = c.p.pow(a) as i64;
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for base in &out {
                for k in 0..m {
                    let f = c.int(k);
                    let v: Vec<Padic> = base.iter().zip(&self.rows[i]).map(|(b, l)| *b + f * *l).collect();
                    next.push(v);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

/// Hermite normal form of a `Z_p`-lattice scaled by `p^{-shift}` into `Z_p^D`:
/// pivots are `p^k` up to a unit-free normalisation and the entries above a
/// pivot are reduced to integers in `[0, p^k)`. Two lattices agree iff their
/// [`Hermite::key`]s agree; points of one affine class `x + L` share
/// [`Hermite::reduce`].
#[derive(Clone, Debug)]
pub struct Hermite {
    dim: usize,
    shift: i32,
    rows: Vec<Vec<Padic>>,
    pivots: Vec<(usize, u32)>,
}

impl Hermite {
    /// `shift` must not exceed the smallest valuation among the generators.
    pub fn new(dim: usize, gens: Vec<Vec<Padic>>, shift: i32) -> Result<Self> {
        let mut gens: Vec<Vec<Padic>> = gens.into_iter().map(|g| g.into_iter().map(|x| x.shift(-shift)).collect()).collect();
        gens.retain(|g| !g.iter().all(|x| x.is_zero()));
        let mut rows: Vec<Vec<Padic>> = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..dim {
            let best = gens
                .iter()
                .enumerate()
                .filter(|(_, g)| !g[col].is_zero())
                .min_by_key(|(_, g)| g[col].val())
                .map(|(i, _)| i);
            let Some(bi) = best else { continue };
            let mut prow = gens.swap_remove(bi);
            let k = prow[col].val();
            if k < 0 {
                return Err(Error::InvalidInput("generators are not integral after the shift".into()));
            }
            let f = prow[col].inv()?.shift(k);
            for x in prow.iter_mut() {
                *x = *x * f;
            }
            let inv = prow[col].inv()?;
            for g in gens.iter_mut() {
                if g[col].is_zero() {
                    continue;
                }
                let f = g[col] * inv;
                for j in col..dim {
                    g[j] = g[j] - f * prow[j];
                }
                g[col] = Padic::exact_zero(prow[col].p());
            }
            gens.retain(|g| !g.iter().all(|x| x.is_zero()));
            rows.push(prow);
            pivots.push((col, k as u32));
        }
        let mut h = Hermite { dim, shift, rows, pivots };
        for j in 0..h.rows.len() {
            let (cj, kj) = h.pivots[j];
            let rj = h.rows[j].clone();
            for i in 0..j {
                let (_, t) = split_digits(&h.rows[i][cj], kj)?;
                if let Some(t) = t {
                    for col in cj..h.dim {
                        h.rows[i][col] = h.rows[i][col] - t * rj[col];
                    }
                }
            }
        }
        Ok(h)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Canonical description of the lattice.
    pub fn key(&self) -> Result<Vec<u64>> {
        let mut out = vec![self.shift as i64 as u64, self.rows.len() as u64];
        for (j, &(cj, kj)) in self.pivots.iter().enumerate() {
            out.push(cj as u64);
            out.push(kj as u64);
            for i in 0..j {
                out.push(digits(&self.rows[i][cj], kj)?);
            }
        }
        Ok(out)
    }

    /// Canonical representative of `x + L`, given over the pivot columns.
    pub fn reduce(&self, x: &[Padic]) -> Result<Vec<u64>> {
        let mut w: Vec<Padic> = x.iter().map(|v| v.shift(-self.shift)).collect();
        let mut out = Vec::with_capacity(self.pivots.len());
        for (j, &(cj, kj)) in self.pivots.iter().enumerate() {
            let (r, t) = split_digits(&w[cj], kj)?;
            if let Some(t) = t {
                for col in cj..self.dim {
                    w[col] = w[col] - t * self.rows[j][col];
                }
            }
            out.push(r);
        }
        Ok(out)
    }
}

fn digits(x: &Padic, k: u32) -> Result<u64> {
    if x.is_exact_zero() || k == 0 {
        return Ok(0);
    }
    x.to_u64_mod(k).ok_or_else(|| Error::precision("Hermite reduction digits", k))
}

/// `x = r + p^k t` with `r` in `[0, p^k)`; `t` is `None` when zero.
fn split_digits(x: &Padic, k: u32) -> Result<(u64, Option<Padic>)> {
    if x.is_zero() && x.val() >= k as i32 {
        return Ok((0, None));
    }
    let r = digits(x, k)?;
    let rest = *x - Padic::from_i64(x.p(), crate::padic::max_precision(x.p()), r as i64);
    if rest.is_zero() {
        return Ok((r, None));
    }
    Ok((r, Some(rest.shift(-(k as i32)))))
}

/// Generators `p^b E_rc` and `p^b sqrt(eps) E_rc`.
pub fn shape_generators(bounds: &Shape<4>, c: &Ctx) -> Vec<M4> {
    let mut out = Vec::with_capacity(32);
    for r in 0..4 {
        for col in 0..4 {
            out.push(M4::unit(c, r, col, c.qpi(bounds[r][col])));
            out.push(M4::unit(c, r, col, c.qpi(bounds[r][col]) * c.sqrt_eps()));
        }
    }
    out
}

fn echelon(dim: usize, mut gens: Vec<Vec<Padic>>) -> (Vec<Vec<Padic>>, Vec<usize>) {
    let mut rows = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..dim {
        let best = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| !g[col].is_zero())
            .min_by_key(|(_, g)| g[col].val())
            .map(|(i, _)| i);
        let Some(bi) = best else { continue };
        let prow = gens.swap_remove(bi);
        let inv = prow[col].inv().expect("non-zero pivot");
        for g in gens.iter_mut() {
            if g[col].is_zero() {
                continue;
            }
            let f = g[col] * inv;
            for j in col..dim {
                g[j] = g[j] - f * prow[j];
            }
            g[col] = Padic::exact_zero(prow[col].p());
        }
        gens.retain(|g| !g.iter().all(|x| x.is_zero()));
        rows.push(prow);
        pivots.push(col);
    }
    (rows, pivots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_index_and_membership() {
        let c = Ctx::new(3, 20).unwrap();
        let a = ZpModule::from_shape(&[[0; 4]; 4], &c);
        let b = ZpModule::from_shape(&[[1; 4]; 4], &c);
        assert_eq!(a.index_exponent(&b).unwrap(), 32);
        assert_eq!(a.contains_matrix(&M4::identity(&c)), Some(true));
        assert_eq!(b.contains_matrix(&M4::identity(&c)), Some(false));
    }

    #[test]
    fn intersection_of_shapes_is_entrywise_max() {
        let c = Ctx::new(3, 20).unwrap();
        let mut s1 = [[0; 4]; 4];
        let mut s2 = [[0; 4]; 4];
        s1[0][1] = 2;
        s2[0][1] = 1;
        s2[3][2] = 3;
        let i = ZpModule::from_shape(&s1, &c).intersect(&ZpModule::from_shape(&s2, &c));
        let mut want = s1;
        want[3][2] = 3;
        let w = ZpModule::from_shape(&want, &c);
        assert_eq!(i.index_exponent(&w).unwrap(), 0);
        assert_eq!(w.index_exponent(&i).unwrap(), 0);
    }

    #[test]
    fn quotient_reps_count() {
        let c = Ctx::new(3, 20).unwrap();
        let a = ZpModule::from_shape(&[[0; 4]; 4], &c);
        let mut s = [[0; 4]; 4];
        s[1][2] = 1;
        let b = ZpModule::from_shape(&s, &c);
        let reps = a.quotient_reps(&b, &c, 100).unwrap();
        assert_eq!(reps.len(), 9);
    }
}
