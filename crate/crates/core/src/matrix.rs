//! Small square matrices over `F`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::padic::{Ctx, Padic, Quad};

/// Integer matrix of entrywise valuation bounds.
pub type Shape<const N: usize> = [[i32; N]; N];

#[derive(Clone, Copy, PartialEq)]
pub struct Mat<const N: usize> {
    pub a: [[Quad; N]; N],
}

pub type M4 = Mat<4>;
pub type M2 = Mat<2>;

impl<const N: usize> Mat<N> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Quad) -> Self {
        Mat { a: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))) }
    }

    pub fn zero(c: &Ctx) -> Self {
        let z = c.qzero();
        Mat { a: [[z; N]; N] }
    }

    pub fn identity(c: &Ctx) -> Self {
        Self::scalar(c, c.qone())
    }

    pub fn scalar(c: &Ctx, x: Quad) -> Self {
        let z = c.qzero();
        Mat::from_fn(|i, j| if i == j { x } else { z })
    }

    pub fn diag(c: &Ctx, d: [Quad; N]) -> Self {
        let z = c.qzero();
        Mat::from_fn(|i, j| if i == j { d[i] } else { z })
    }

    /// The matrix unit `E_ij` scaled by `x`.
    pub fn unit(c: &Ctx, i: usize, j: usize, x: Quad) -> Self {
        let mut m = Self::zero(c);
        m.a[i][j] = x;
        m
    }

    /// Matrix with integer entries `re + im sqrt(eps)` given as pairs.
    pub fn from_ints(c: &Ctx, rows: [[(i64, i64); N]; N]) -> Self {
        Mat::from_fn(|i, j| c.quad(rows[i][j].0, rows[i][j].1))
    }

    pub fn p(&self) -> u64 {
        self.a[0][0].p()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(|i, j| self.a[j][i])
    }

    pub fn conj(&self) -> Self {
        Mat::from_fn(|i, j| self.a[i][j].conj())
    }

    pub fn conj_transpose(&self) -> Self {
        Mat::from_fn(|i, j| self.a[j][i].conj())
    }

    /// `S conj(X)^t S` with `S` the antidiagonal matrix of ones, i.e. the
    /// adjoint for the form with Gram matrix `S`.
    pub fn sigma(&self) -> Self {
        Mat::from_fn(|i, j| self.a[N - 1 - j][N - 1 - i].conj())
    }

    pub fn trace(&self) -> Quad {
        let mut t = self.a[0][0];
        for i in 1..N {
            t = t + self.a[i][i];
        }
        t
    }

    pub fn scale(&self, x: Quad) -> Self {
        Mat::from_fn(|i, j| x * self.a[i][j])
    }

    pub fn scale_padic(&self, x: Padic) -> Self {
        Mat::from_fn(|i, j| self.a[i][j].scale(x))
    }

    /// Multiply by `p^k`.
    pub fn shift(&self, k: i32) -> Self {
        Mat::from_fn(|i, j| self.a[i][j].shift(k))
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().flatten().all(|x| x.is_zero())
    }

    pub fn vals(&self) -> Shape<N> {
        std::array::from_fn(|i| std::array::from_fn(|j| self.a[i][j].val()))
    }

    /// Entrywise `v(x_ij) >= bound_ij`; `None` if some entry is undecidable.
    pub fn in_shape(&self, bound: &Shape<N>) -> Option<bool> {
        let mut undecided = false;
        for i in 0..N {
            for j in 0..N {
                match self.a[i][j].val_at_least(bound[i][j]) {
                    Some(false) => return Some(false),
                    None => undecided = true,
                    Some(true) => {}
                }
            }
        }
        if undecided {
            None
        } else {
            Some(true)
        }
    }

    /// As [`Mat::in_shape`] but an undecidable entry is an error.
    pub fn in_shape_strict(&self, bound: &Shape<N>) -> Result<bool> {
        self.in_shape(bound).ok_or_else(|| Error::precision("shape membership", min_abs_needed(bound)))
    }

    /// Minimum valuation over the entries.
    pub fn min_val(&self) -> i32 {
        self.a.iter().flatten().map(|x| x.val()).min().unwrap()
    }

    /// Smallest absolute precision among the entries.
    pub fn abs_prec(&self) -> i32 {
        self.a.iter().flatten().map(|x| x.abs_prec()).min().unwrap()
    }

    pub fn commutator(&self, o: &Self) -> Self {
        *self * *o - *o * *self
    }

    pub fn det(&self) -> Quad {
        // Gaussian elimination over the field with valuation pivoting.
        let mut m = *self;
        let mut det = one_like(&m.a[0][0]);
        for col in 0..N {
            let piv = (col..N)
                .filter(|&r| !m.a[r][col].is_zero())
                .min_by_key(|&r| m.a[r][col].val());
            let Some(piv) = piv else {
                return m.a[0][0].scale(Padic::exact_zero(self.p()));
            };
            if piv != col {
                m.a.swap(piv, col);
                det = -det;
            }
            let inv = m.a[col][col].inv().expect("non-zero pivot");
            det = det * m.a[col][col];
            for r in col + 1..N {
                let f = m.a[r][col] * inv;
                for c in col..N {
                    m.a[r][c] = m.a[r][c] - f * m.a[col][c];
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self> {
        let mut m = *self;
        let one = one_like(&m.a[0][0]);
        let zero = one - one;
        let mut inv = Mat::from_fn(|i, j| if i == j { one } else { zero });
        for col in 0..N {
            let piv = (col..N)
                .filter(|&r| !m.a[r][col].is_zero())
                .min_by_key(|&r| m.a[r][col].val())
                .ok_or_else(|| Error::precision("matrix inversion: singular at working precision", 1))?;
            m.a.swap(piv, col);
            inv.a.swap(piv, col);
            let pinv = m.a[col][col].inv()?;
            for c in 0..N {
                m.a[col][c] = m.a[col][c] * pinv;
                inv.a[col][c] = inv.a[col][c] * pinv;
            }
            for r in 0..N {
                if r == col {
                    continue;
                }
                let f = m.a[r][col];
                if f.is_exact_zero() {
                    continue;
                }
                for c in 0..N {
                    m.a[r][c] = m.a[r][c] - f * m.a[col][c];
                    inv.a[r][c] = inv.a[r][c] - f * inv.a[col][c];
                }
            }
        }
        Ok(inv)
    }

    /// Conjugation `g X g^{-1}` given `g^{-1}`.
    pub fn ad(g: &Self, g_inv: &Self, x: &Self) -> Self {
        *g * *x * *g_inv
    }

    /// Block embedding of a smaller matrix at rows/cols `idx`.
    pub fn embed<const K: usize>(&mut self, idx: [usize; K], b: &Mat<K>) {
        for (bi, &i) in idx.iter().enumerate() {
            for (bj, &j) in idx.iter().enumerate() {
                self.a[i][j] = b.a[bi][bj];
            }
        }
    }

    pub fn block<const K: usize>(&self, rows: [usize; K], cols: [usize; K]) -> Mat<K> {
        Mat::from_fn(|i, j| self.a[rows[i]][cols[j]])
    }
}

fn one_like(x: &Quad) -> Quad {
    let p = x.p();
    let prec = crate::padic::max_precision(p);
    Quad::new(Padic::from_i64(p, prec, 1), Padic::exact_zero(p))
}

fn min_abs_needed<const N: usize>(b: &Shape<N>) -> u32 {
    b.iter().flatten().copied().max().unwrap_or(0).max(1) as u32
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = Quad;
    fn index(&self, (i, j): (usize, usize)) -> &Quad {
        &self.a[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quad {
        &mut self.a[i][j]
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Mat::from_fn(|i, j| self.a[i][j] + o.a[i][j])
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Mat::from_fn(|i, j| self.a[i][j] - o.a[i][j])
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Mat::from_fn(|i, j| -self.a[i][j])
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Mat::from_fn(|i, j| {
            let mut s: Option<Quad> = None;
            for k in 0..N {
                let a = self.a[i][k];
                let b = o.a[k][j];
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                let t = a * b;
                s = Some(match s {
                    None => t,
                    Some(acc) => acc + t,
                });
            }
            s.unwrap_or_else(|| {
                let p = self.p();
                Quad::new(Padic::exact_zero(p), Padic::exact_zero(p))
            })
        })
    }
}

impl<const N: usize> fmt::Debug for Mat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for row in &self.a {
            writeln!(f, "  {:?}", row)?;
        }
        write!(f, "]")
    }
}

/// Pretty grid of an integer shape.
pub fn format_shape<const N: usize>(s: &Shape<N>) -> String {
    let mut out = String::new();
    for row in s {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Entrywise shape addition of a constant.
pub fn shape_add<const N: usize>(s: &Shape<N>, k: i32) -> Shape<N> {
    std::array::from_fn(|i| std::array::from_fn(|j| s[i][j] + k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(c: &Ctx, rng: &mut ChaCha8Rng) -> M4 {
        Mat::from_fn(|_, _| c.random_quad(rng, 0))
    }

    #[test]
    fn inverse_multiplies_back() {
        let c = Ctx::new(3, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random(&c, &mut rng);
            let Ok(inv) = m.inverse() else { continue };
            let prod = m * inv - M4::identity(&c);
            assert!(prod.in_shape(&[[10; 4]; 4]).unwrap_or(false), "{prod:?}");
        }
    }

    #[test]
    fn sigma_is_an_anti_involution() {
        let c = Ctx::new(3, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random(&c, &mut rng);
        let y = random(&c, &mut rng);
        assert_eq!(x.sigma().sigma(), x);
        assert_eq!((x * y).sigma(), y.sigma() * x.sigma());
        assert_eq!(M4::identity(&c).sigma(), M4::identity(&c));
    }

    #[test]
    fn det_of_diagonal() {
        let c = Ctx::new(3, 20).unwrap();
        let d = M4::diag(&c, [c.qint(2), c.qint(3), c.qint(5), c.sqrt_eps()]);
        assert_eq!(d.det(), c.quad(0, 30));
    }
}
