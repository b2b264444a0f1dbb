use super::setup::{CaseSetup, HeckeCase};
use crate::error::{Error, Result};
use crate::matrix::M4;
use crate::padic::Quad;

fn need(s: &CaseSetup, case: HeckeCase, odd: bool) -> Result<i32> {
    if s.case != case || (s.m % 2 == 1) != odd {
        return Err(Error::Unsupported(format!(
            "this family needs case {} with m {}",
            case.label(),
            if odd { "odd" } else { "even" }
        )));
    }
    Ok(if odd { (s.m - 1) / 2 } else { s.m / 2 })
}

/// Residues of `o_F / p_F` as `x + y sqrt eps`.
pub fn residues_of_o_f(s: &CaseSetup) -> Vec<Quad> {
    let p = s.q();
    (0..p).flat_map(|x| (0..p).map(move |y| (x, y))).map(|(x, y)| s.ctx.quad(x, y)).collect()
}

/// Case c, `m = 2k + 1`: the element `x(a, b, c)` with `a, b` the
/// coefficients of `sqrt eps`.
pub fn x_abc(s: &CaseSetup, a: i64, b: i64, cc: i64) -> Result<M4> {
    let k = need(s, HeckeCase::C, true)?;
    let c = &s.ctx;
    let se = c.sqrt_eps();
    let eps = c.qint(c.eps() as i64);
    let (a, b, cc) = (c.qint(a) * se, c.qint(b) * se, c.qint(cc));
    let mut g = M4::identity(c);
    g.a[1][0] = c.qpi(k + 1) * a - c.qpi(s.m) * cc * eps;
    g.a[1][2] = c.qpi(k) * s.param.inv()? * b;
    g.a[3][0] = c.qpi(k + 1) * b;
    g.a[3][2] = c.qpi(k + 1) * a + c.qpi(s.m) * cc * eps;
    Ok(g)
}

/// All `x(a, b, c)`, `a, b, c` in `F_q`, with `a` varying slowest.
pub fn family_c_s2(s: &CaseSetup) -> Result<Vec<M4>> {
    let p = s.q();
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for cc in 0..p {
                out.push(x_abc(s, a, b, cc)?);
            }
        }
    }
    Ok(out)
}

/// Case d, `m = 2k + 1`: `x(a, A)` with `a` in `o_0 / p_0^2`, `A` in `o_F / p_F`.
pub fn x_a_big_a(s: &CaseSetup, a: i64, big_a: Quad) -> Result<M4> {
    let k = need(s, HeckeCase::D, true)?;
    let c = &s.ctx;
    let mut g = M4::identity(c);
    g.a[2][0] = c.qpi(k + 1) * big_a;
    g.a[2][1] = c.qpi(s.m) * c.qint(a) * c.sqrt_eps();
    g.a[3][1] = -(c.qpi(k + 1) * big_a.conj());
    Ok(g)
}

pub fn family_d_s2(s: &CaseSetup) -> Result<Vec<M4>> {
    let p = s.q();
    let mut out = Vec::new();
    for a in 0..p * p {
        for big_a in residues_of_o_f(s) {
            out.push(x_a_big_a(s, a, big_a)?);
        }
    }
    Ok(out)
}

/// Case a, `m = 2k`: `x(a, b, A)` with `a, b` in `o_0 / p_0`, `A` in `o_F / p_F`.
pub fn x_ab_big_a(s: &CaseSetup, a: i64, b: i64, big_a: Quad) -> Result<M4> {
    let k = need(s, HeckeCase::A, false)?;
    let c = &s.ctx;
    let se = c.sqrt_eps();
    let mut g = M4::identity(c);
    g.a[1][0] = c.qpi(k) * big_a;
    g.a[1][2] = c.qpi(k) * c.qint(a) * se;
    g.a[3][0] = c.qpi(k + 1) * c.qint(b) * se;
    g.a[3][2] = -(c.qpi(k) * big_a.conj());
    Ok(g)
}

pub fn family_a_zeta(s: &CaseSetup) -> Result<Vec<M4>> {
    let p = s.q();
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for big_a in residues_of_o_f(s) {
                out.push(x_ab_big_a(s, a, b, big_a)?);
            }
        }
    }
    Ok(out)
}
