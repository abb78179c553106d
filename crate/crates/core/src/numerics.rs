//! Precision context and generic kernels: finite differences, Sturm-bisection
//! eigenvalues for symmetric tridiagonal matrices, and an embedded
//! Runge–Kutta integrator.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug)]
pub struct PrecisionContext {
    pub mantissa_bits: u32,
    /// Unit roundoff, 2^(1 − bits).
    pub eps: Real,
    pub residual_tol: Real,
    /// Relative step for 5-point stencils, eps^(1/5).
    pub diff_step_scale: Real,
}

pub fn make_context(mantissa_bits: u32) -> Result<PrecisionContext> {
    if mantissa_bits < 64 {
        return Err(Error::InvalidParam(format!(
            "mantissa_bits must be >= 64, got {mantissa_bits}"
        )));
    }
    let p = mantissa_bits;
    let eps = Real::exp2i(p, 1 - p as i32);
    let residual_tol = eps.sqrt();
    let diff_step_scale = eps.pow(&(Real::one(p) / 5));
    Ok(PrecisionContext { mantissa_bits, eps, residual_tol, diff_step_scale })
}

impl PrecisionContext {
    pub fn bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn real(&self, v: f64) -> Real {
        Real::from_f64(self.mantissa_bits, v)
    }

    pub fn int(&self, v: i64) -> Real {
        Real::from_int(self.mantissa_bits, v)
    }

    /// Same context at a different width.
    pub fn widened(&self, bits: u32) -> PrecisionContext {
        make_context(bits.max(64)).expect("width >= 64")
    }

    /// Tolerance for derivatives taken with `differentiate`: the O(h^4)
    /// truncation bound 10³·(z·diff_step_scale)^4, floored at residual_tol
    /// for second-derivative roundoff.
    pub fn fd_tol(&self, z: &Real) -> Real {
        let h = z * &self.diff_step_scale;
        let trunc = h.powi(4) * 1000;
        trunc.max(self.residual_tol.clone())
    }
}

/// Five abscissae z0 + jh, j = −2..2, with h = z0·diff_step_scale.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub h: Real,
    pub points: Vec<Real>,
}

impl Stencil {
    /// Points are formed at `prec` bits so a wider evaluation sees the
    /// same abscissae exactly.
    pub fn new(z0: &Real, ctx: &PrecisionContext, prec: u32) -> Result<Self> {
        if !z0.is_positive() {
            return Err(Error::InvalidParam("differentiate needs z0 > 0".into()));
        }
        let z0 = z0.with_prec(prec);
        let h = &z0 * ctx.diff_step_scale.with_prec(prec);
        let points = (-2..=2i64).map(|j| &z0 + &h * j).collect();
        Ok(Stencil { h, points })
    }

    /// Combines values f(points[i]) into the derivative of order 1 or 2.
    pub fn combine(&self, v: &[Real], order: u32) -> Result<Real> {
        let h = &self.h;
        match order {
            1 => Ok((&v[0] - &v[4] + (&v[3] - &v[1]) * 8) / (h * 12)),
            2 => Ok(((&v[1] + &v[3]) * 16 - (&v[0] + &v[4]) - &v[2] * 30) / (h.square() * 12)),
            _ => Err(Error::InvalidParam(format!("derivative order {order} not supported"))),
        }
    }
}

/// Central 5-point finite difference of order 1 or 2 at `z0`, step
/// h = z0·diff_step_scale.
pub fn differentiate<F>(f: F, z0: &Real, order: u32, ctx: &PrecisionContext) -> Result<Real>
where
    F: Fn(&Real) -> Result<Real>,
{
    let st = Stencil::new(z0, ctx, z0.prec().max(ctx.bits()))?;
    if order != 1 && order != 2 {
        return st.combine(&[], order);
    }
    let mut v = Vec::with_capacity(5);
    for (i, x) in st.points.iter().enumerate() {
        if order == 1 && i == 2 {
            v.push(Real::zero(x.prec()));
        } else {
            v.push(f(x)?);
        }
    }
    st.combine(&v, order)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly less
/// than `x` (Sturm count via the LDLᵀ pivots).
fn sturm_count(diag: &[Real], off_sq: &[Real], x: &Real, tiny: &Real) -> usize {
    let mut count = 0;
    let mut d = Real::one(x.prec());
    for i in 0..diag.len() {
        d = if i == 0 {
            &diag[0] - x
        } else {
            &diag[i] - x - &off_sq[i - 1] / &d
        };
        if d.is_zero() {
            d = tiny.clone();
        }
        if d.is_negative() {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of a symmetric tridiagonal matrix, increasing, by Sturm
/// bisection to width max(|λ|, 1)·eps·2^16.
pub fn tridiag_eigen(diag: &[Real], offdiag: &[Real], ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let n = diag.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidParam(format!(
            "offdiag length {} does not match diag length {}",
            offdiag.len(),
            n
        )));
    }
    let p = ctx.bits();
    let diag: Vec<Real> = diag.iter().map(|d| d.with_prec(p)).collect();
    let off_sq: Vec<Real> = offdiag.iter().map(|e| e.with_prec(p).square()).collect();

    // Gershgorin interval
    let mut lo = diag[0].clone();
    let mut hi = diag[0].clone();
    for i in 0..n {
        let mut r = Real::zero(p);
        if i > 0 {
            r += offdiag[i - 1].abs();
        }
        if i + 1 < n {
            r += offdiag[i].abs();
        }
        lo = lo.min(&diag[i] - &r);
        hi = hi.max(&diag[i] + &r);
    }
    let pad = (hi.clone() - &lo).abs() * 1e-3 + 1e-30;
    lo -= &pad;
    hi += &pad;

    let tiny = &ctx.eps * &ctx.eps;
    let width_scale = &ctx.eps * 65536;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // k-th eigenvalue: smallest x with count(x) > k
        let mut a = match out.last() {
            Some(prev) => Real::clone(prev),
            None => lo.clone(),
        };
        let mut b = hi.clone();
        loop {
            let mid = (&a + &b) / 2;
            let scale = mid.abs().max(Real::one(p));
            if (&b - &a) <= &scale * &width_scale || mid == a || mid == b {
                break;
            }
            if sturm_count(&diag, &off_sq, &mid, &tiny) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push((a + b) / 2);
    }
    for w in out.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::PrecisionExhausted(
                "eigenvalues not separated at this precision".into(),
            ));
        }
    }
    Ok(out)
}

/// Solves the small dense system A·x = rhs by Gaussian elimination with
/// partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<Real>>, mut rhs: Vec<Real>) -> Result<Vec<Real>> {
    let n = rhs.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty range");
        if a[piv][k].is_zero() {
            return Err(Error::Degenerate("singular linear system".into()));
        }
        a.swap(k, piv);
        rhs.swap(k, piv);
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
            let t = &f * &rhs[k];
            rhs[i] -= t;
        }
    }
    let mut x = vec![Real::zero(rhs[0].prec()); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            acc -= &a[k][j] * &x[j];
        }
        x[k] = acc / &a[k][k];
    }
    Ok(x)
}

/// One accepted step of the integrator.
pub type Sample = (Real, Vec<Real>);

// Dormand–Prince 5(4) tableau
const DP_C: [(i64, i64); 7] = [(0, 1), (1, 5), (3, 10), (4, 5), (8, 9), (1, 1), (1, 1)];
const DP_A: [[(i64, i64); 6]; 7] = [
    [(0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(1, 5), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(3, 40), (9, 40), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(44, 45), (-56, 15), (32, 9), (0, 1), (0, 1), (0, 1)],
    [(19372, 6561), (-25360, 2187), (64448, 6561), (-212, 729), (0, 1), (0, 1)],
    [(9017, 3168), (-355, 33), (46732, 5247), (49, 176), (-5103, 18656), (0, 1)],
    [(35, 384), (0, 1), (500, 1113), (125, 192), (-2187, 6784), (11, 84)],
];
const DP_B5: [(i64, i64); 7] =
    [(35, 384), (0, 1), (500, 1113), (125, 192), (-2187, 6784), (11, 84), (0, 1)];
const DP_B4: [(i64, i64); 7] = [
    (5179, 57600),
    (0, 1),
    (7571, 16695),
    (393, 640),
    (-92097, 339200),
    (187, 2100),
    (1, 40),
];

fn frac(p: u32, (n, d): (i64, i64)) -> Real {
    Real::from_int(p, n) / d
}

/// Adaptive Dormand–Prince integration of y′ = field(z, y) from z0 to z1.
///
/// The local error estimate (max-norm of the 5th/4th order difference) is
/// kept at or below `tol` on every accepted step. Returns all accepted
/// samples, starting with (z0, y0) and ending exactly at z1.
pub fn integrate_ode<F>(
    field: F,
    y0: &[Real],
    z0: &Real,
    z1: &Real,
    tol: &Real,
    ctx: &PrecisionContext,
) -> Result<Vec<Sample>>
where
    F: Fn(&Real, &[Real]) -> Result<Vec<Real>>,
{
    if !tol.is_positive() {
        return Err(Error::InvalidParam("tol must be positive".into()));
    }
    let p = ctx.bits();
    let mut z = z0.with_prec(p);
    let mut y: Vec<Real> = y0.iter().map(|v| v.with_prec(p)).collect();
    let mut out = vec![(z.clone(), y.clone())];
    let span = z1 - &z;
    if span.is_zero() {
        return Ok(out);
    }
    let dir = if span.is_negative() { -1 } else { 1 };
    let a: Vec<Vec<Real>> =
        DP_A.iter().map(|row| row.iter().map(|&q| frac(p, q)).collect()).collect();
    let b5: Vec<Real> = DP_B5.iter().map(|&q| frac(p, q)).collect();
    let e: Vec<Real> = DP_B5.iter().zip(DP_B4.iter()).map(|(&x, &w)| frac(p, x) - frac(p, w)).collect();
    let c: Vec<Real> = DP_C.iter().map(|&q| frac(p, q)).collect();

    let min_h = span.abs() * &ctx.eps * 1024;
    let mut h = span.abs() / 100 * dir;
    let mut k1 = field(&z, &y)?;
    loop {
        let rem = z1 - &z;
        if rem.is_zero() {
            break;
        }
        let last = (&h - &rem).abs() < min_h || h.abs() >= rem.abs();
        if last {
            h = rem.clone();
        }
        if h.abs() < min_h {
            return Err(Error::StepUnderflow { z: z.to_decimal(20) });
        }
        let mut ks = vec![k1.clone()];
        for s in 1..7 {
            let zs = &z + &c[s] * &h;
            let ys: Vec<Real> = (0..y.len())
                .map(|i| {
                    let mut acc = y[i].clone();
                    for (j, kj) in ks.iter().enumerate() {
                        if !a[s][j].is_zero() {
                            acc += &a[s][j] * &kj[i] * &h;
                        }
                    }
                    acc
                })
                .collect();
            ks.push(field(&zs, &ys)?);
        }
        let y_new: Vec<Real> = (0..y.len())
            .map(|i| {
                let mut acc = y[i].clone();
                for (j, kj) in ks.iter().enumerate().take(6) {
                    acc += &b5[j] * &kj[i] * &h;
                }
                acc
            })
            .collect();
        let mut err = Real::zero(p);
        for i in 0..y.len() {
            let mut acc = Real::zero(p);
            for (j, kj) in ks.iter().enumerate() {
                acc += &e[j] * &kj[i];
            }
            err = err.max((acc * &h).abs());
        }
        if err <= *tol {
            z = if last { z1.with_prec(p) } else { &z + &h };
            y = y_new;
            k1 = ks.pop().expect("seven stages");
            out.push((z.clone(), y.clone()));
        }
        // step controller, safety 0.9, growth clamped to [0.2, 5]
        let factor = if err.is_zero() {
            5.0
        } else {
            let r = (tol / &err).to_f64();
            (0.9 * r.powf(0.2)).clamp(0.2, 5.0)
        };
        h = &h * factor;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(b: u32) -> PrecisionContext {
        make_context(b).unwrap()
    }

    #[test]
    fn context_defaults() {
        let c = ctx(64);
        assert_eq!(c.eps, Real::exp2i(64, -63));
        let c = ctx(256);
        assert_eq!(c.eps, Real::exp2i(256, -255));
        assert!(c.residual_tol > 0.0 && c.residual_tol < 1.0);
        assert!(make_context(32).is_err());
    }

    #[test]
    fn differentiate_polynomials_and_exp() {
        let c = ctx(256);
        let sq = |x: &Real| Ok(x.square());
        let d1 = differentiate(sq, &c.int(1), 1, &c).unwrap();
        assert!((d1 - 2).abs() < c.residual_tol);
        let d2 = differentiate(sq, &c.int(3), 2, &c).unwrap();
        assert!((d2 - 2).abs() < c.residual_tol);
        let quartic = |x: &Real| Ok(x.powi(4) - x.powi(3) * 2 + 1);
        let d1 = differentiate(quartic, &c.real(0.7), 1, &c).unwrap();
        let exact = 4.0 * 0.343 - 6.0 * 0.49;
        assert!((d1 - exact).abs() < 1e-12);

        let one = c.int(1);
        let h = &one * &c.diff_step_scale;
        let de = differentiate(|x: &Real| Ok(x.exp()), &one, 1, &c).unwrap();
        assert!((de - one.exp()).abs() <= h.powi(4) * 10);
    }

    #[test]
    fn tridiag_small_cases() {
        let c = ctx(128);
        let r = |v: f64| c.real(v);
        let e = tridiag_eigen(&[r(5.0)], &[], &c).unwrap();
        assert_eq!(e.len(), 1);
        assert!((&e[0] - 5).abs() < 1e-30);

        let e = tridiag_eigen(&[r(0.0), r(0.0)], &[r(1.0)], &c).unwrap();
        assert!((&e[0] + 1).abs() < 1e-30 && (&e[1] - 1).abs() < 1e-30);

        let e = tridiag_eigen(&[r(2.0), r(2.0), r(2.0)], &[r(1.0), r(1.0)], &c).unwrap();
        let s2 = c.int(2).sqrt();
        let want = [2 - s2.clone(), c.int(2), 2 + s2];
        for (x, w) in e.iter().zip(want.iter()) {
            assert!((x - w).abs() < 1e-30);
        }
    }

    #[test]
    fn ode_closed_forms() {
        let c = ctx(128);
        let tol = c.real(1e-14);
        let traj = integrate_ode(
            |_z, y| Ok(vec![y[0].clone()]),
            &[c.int(1)],
            &c.real(0.1),
            &c.int(1),
            &tol,
            &c,
        )
        .unwrap();
        let (zf, yf) = traj.last().unwrap();
        assert_eq!(*zf, 1.0);
        assert!((&yf[0] - c.real(0.9).exp()).abs() < 1e-12);

        let traj = integrate_ode(
            |_z, _y| Ok(vec![c.int(0)]),
            &[c.real(3.5)],
            &c.int(1),
            &c.int(7),
            &tol,
            &c,
        )
        .unwrap();
        assert!(traj.iter().all(|(_, y)| y[0] == 3.5));

        let traj = integrate_ode(
            |z, _y| Ok(vec![z.recip()]),
            &[c.int(0)],
            &c.int(1),
            &c.int(2),
            &tol,
            &c,
        )
        .unwrap();
        let ln2 = c.int(2).ln();
        assert!((&traj.last().unwrap().1[0] - ln2).abs() < 1e-12);
    }

    #[test]
    fn dense_solve() {
        let c = ctx(128);
        let r = |v: f64| c.real(v);
        let a = vec![vec![r(0.0), r(2.0)], vec![r(3.0), r(1.0)]];
        let x = solve_dense(a, vec![r(4.0), r(5.0)]).unwrap();
        assert!((&x[0] - 1).abs() < 1e-30 && (&x[1] - 2).abs() < 1e-30);
    }

    #[test]
    fn ode_empty_span() {
        let c = ctx(64);
        let traj =
            integrate_ode(|_z, y| Ok(y.to_vec()), &[c.int(2)], &c.int(1), &c.int(1), &c.real(1e-8), &c)
                .unwrap();
        assert_eq!(traj.len(), 1);
    }
}
