//! Zeros of P_n and S_n, Gauss rules for the truncated weight, the
//! electrostatic equilibrium conditions and the motion of zeros in z.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{FunctionalParams, MomentTable};
use crate::numerics::{integrate_ode, make_context, tridiag_eigen, PrecisionContext};
use crate::polyeval::{eval_p, Family};
use crate::real::Real;
use crate::recurrence::{recurrence_from_moments, RecurrenceTable, Tables};

#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub n: usize,
    pub family: Family,
    pub points: Vec<Real>,
    pub params: FunctionalParams,
}

fn jacobi_zeros(a: &[Real], b: &[Real], n: usize, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let off: Vec<Real> = (1..n)
        .map(|k| {
            if a[k].is_positive() {
                Ok(a[k].sqrt())
            } else {
                Err(Error::PrecisionExhausted(format!("recurrence coefficient {k} is not positive")))
            }
        })
        .collect::<Result<_>>()?;
    tridiag_eigen(&b[..n], &off, ctx)
}

/// Zeros of P_n as eigenvalues of the Jacobi matrix, each checked against
/// |P_n(x)| ≤ residual_tol·|P′_n(x)|·spacing.
pub fn zeros(n: usize, t: &RecurrenceTable) -> Result<ZeroSet> {
    if n == 0 || n > t.n_max {
        return Err(Error::OutOfRange(format!("zeros of P_{n} need 1 <= n <= N = {}", t.n_max)));
    }
    let pts = jacobi_zeros(&t.a, &t.b, n, &t.ctx)?;
    for (k, x) in pts.iter().enumerate() {
        let mut gap = t.params.z.clone();
        if k > 0 {
            gap = gap.min(x - &pts[k - 1]);
        }
        if k + 1 < n {
            gap = gap.min(&pts[k + 1] - x);
        }
        let e = eval_p(n, x, t)?;
        if e.value.abs() > &t.ctx.residual_tol * e.d1.abs() * gap {
            return Err(Error::PrecisionExhausted(format!("zero {k} of P_{n} fails verification")));
        }
    }
    Ok(ZeroSet { n, family: Family::P, points: pts, params: t.params.clone() })
}

/// Zeros of S_m: ±√ of the zeros of P_{m/2} for even m, and 0 together with
/// ±√ of the zeros of Q_{(m−1)/2} for odd m.
pub fn zeros_s(m: usize, tb: &Tables) -> Result<ZeroSet> {
    let k = m / 2;
    let ctx = tb.ctx();
    let inner = if m % 2 == 0 {
        if k > tb.n_max() {
            return Err(Error::OutOfRange(format!("S_{m} needs P_{k}")));
        }
        jacobi_zeros(&tb.rec.a, &tb.rec.b, k, ctx)?
    } else {
        if k > tb.sym.d.len() {
            return Err(Error::OutOfRange(format!("S_{m} needs Q_{k}")));
        }
        jacobi_zeros(&tb.sym.c, &tb.sym.d, k, ctx)?
    };
    let mut pts: Vec<Real> = inner.iter().rev().map(|u| -u.sqrt()).collect();
    if m % 2 == 1 {
        pts.push(Real::zero(ctx.bits()));
    }
    pts.extend(inner.iter().map(|u| u.sqrt()));
    Ok(ZeroSet { n: m, family: Family::S, points: pts, params: tb.rec.params.clone() })
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: ZeroSet,
    pub weights: Vec<Real>,
}

impl QuadratureRule {
    /// Σ w_k x_k^d.
    pub fn apply_monomial(&self, d: usize) -> Real {
        let p = self.weights[0].prec();
        self.nodes
            .points
            .iter()
            .zip(&self.weights)
            .fold(Real::zero(p), |acc, (x, w)| acc + w * x.powi(d as i32))
    }
}

/// n-point Gauss rule, w_k = h_{n−1}/(P_{n−1}(x_k)P′_n(x_k)), checked for
/// positivity and for exactness on x^0 … x^{2n−1} against the moments,
/// relative to max(ℓ_0, ℓ_d).
pub fn gauss_rule(n: usize, t: &RecurrenceTable, moments: &MomentTable) -> Result<QuadratureRule> {
    let nodes = zeros(n, t)?;
    if moments.n_max() + 1 < 2 * n {
        return Err(Error::OutOfRange(format!("exactness check needs moments through {}", 2 * n - 1)));
    }
    let mut weights = Vec::with_capacity(n);
    for (k, x) in nodes.points.iter().enumerate() {
        let w = &t.h[n - 1] / (eval_p(n - 1, x, t)?.value * eval_p(n, x, t)?.d1);
        if !w.is_positive() {
            return Err(Error::PrecisionExhausted(format!("weight {k} is not positive")));
        }
        weights.push(w);
    }
    let rule = QuadratureRule { nodes, weights };
    let l0 = &moments.values[0];
    for d in 0..2 * n {
        let ld = &moments.values[d];
        let err = (rule.apply_monomial(d) - ld).abs();
        if err > &t.ctx.residual_tol * l0.clone().max(ld.clone()) {
            return Err(Error::PrecisionExhausted(format!("Gauss rule is not exact on x^{d}")));
        }
    }
    Ok(rule)
}

/// Per-zero equilibrium residuals, each normalized by the sum of the
/// absolute values of its terms.
///
/// P_n: Σ_{j≠k} 2/(x_j−x_k) − 1/(x_k−z) − 1/x_k + 1/(x_k−β_{n−1}) + 1 − α/x_k,
/// with β_{n−1} = 2n+α+z+1 − b_n.
/// S_m: Σ_{j≠k} 2/(y_j−y_k) + 1/(y_k−ρ) + 1/(y_k+ρ) − 1/(y_k−√z) − 1/(y_k+√z)
/// + 2y_k − (2α+1)/y_k with ρ² = m+z+α+1 − γ_m − γ_{m+1}; the origin, a
/// zero of odd S_m, takes part in the pair sums but gets no residual.
pub fn electrostatic_residual(n: usize, which: Family, tb: &Tables) -> Result<Vec<Real>> {
    let (z, al) = (tb.z(), tb.alpha());
    let p = tb.ctx().bits();
    let guard = Real::exp2i(p, -(p as i32) / 4);
    let (pts, fixed): (Vec<Real>, Box<dyn Fn(&Real) -> Vec<Real>>) = match which {
        Family::P => {
            if n > tb.n_max() {
                return Err(Error::OutOfRange(format!("electrostatics of P_{n} need b_{n}")));
            }
            let beta = al + z + (2 * n + 1) as i64 - &tb.rec.b[n];
            let zs = zeros(n, &tb.rec)?.points;
            for x in &zs {
                if (x - &beta).abs() < &guard * &beta {
                    return Err(Error::Degenerate("a zero coincides with beta".into()));
                }
            }
            let (z, al) = (z.clone(), al.clone());
            (
                zs,
                Box::new(move |x: &Real| {
                    vec![
                        -(x - &z).recip(),
                        -x.recip(),
                        (x - &beta).recip(),
                        Real::one(x.prec()),
                        -(&al / x),
                    ]
                }),
            )
        }
        Family::S => {
            if n + 1 >= tb.sym.gamma.len() {
                return Err(Error::OutOfRange(format!("electrostatics of S_{n} need gamma_{}", n + 1)));
            }
            let rho2 = al + z + (n + 1) as i64 - &tb.sym.gamma[n] - &tb.sym.gamma[n + 1];
            if !rho2.is_positive() {
                return Err(Error::Degenerate(format!("rho^2_{n} is not positive")));
            }
            let rho = rho2.sqrt();
            let sz = z.sqrt();
            let al = al.clone();
            let zs = zeros_s(n, tb)?.points;
            (
                zs,
                Box::new(move |y: &Real| {
                    vec![
                        (y - &rho).recip(),
                        (y + &rho).recip(),
                        -(y - &sz).recip(),
                        -(y + &sz).recip(),
                        y * 2,
                        -((&al * 2 + 1) / y),
                    ]
                }),
            )
        }
        Family::Q => return Err(Error::InvalidParam("electrostatics are defined for P and S".into())),
    };
    let mut out = Vec::with_capacity(pts.len());
    for (k, x) in pts.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let mut terms = fixed(x);
        for (j, y) in pts.iter().enumerate() {
            if j != k {
                terms.push(Real::from_int(p, 2) / (y - x));
            }
        }
        let mut s = Real::zero(p);
        let mut m = Real::zero(p);
        for t in &terms {
            s += t;
            m += t.abs();
        }
        out.push(s.abs() / m);
    }
    Ok(out)
}

/// (z/2)(1 + cos((n+1−k)π/(n+1))), k = 1..n, in increasing order.
pub fn chebyshev_asymptote(n: usize, z: &Real) -> Vec<Real> {
    let pi = Real::pi(z.prec());
    (1..=n)
        .map(|k| z / 2 * (1 + (&pi * (n + 1 - k) as i64 / (n + 1) as i64).cos()))
        .collect()
}

/// max_k |x_{n,k} − asymptote_k| / z.
pub fn chebyshev_error(zs: &ZeroSet) -> Real {
    let z = &zs.params.z;
    let approx = chebyshev_asymptote(zs.n, z);
    zs.points
        .iter()
        .zip(&approx)
        .fold(Real::zero(z.prec()), |m, (x, y)| m.max((x - y).abs() / z))
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowPoint {
    #[serde(serialize_with = "crate::series::decimal")]
    pub z: Real,
    #[serde(serialize_with = "crate::series::decimal")]
    pub x: Real,
}

#[derive(Clone, Debug)]
pub struct Flow {
    pub trajectory: Vec<FlowPoint>,
    /// |x(z1) − x_{n,k}(z1)| against the directly computed zero
    pub endpoint_error: Real,
    pub monotone: bool,
}

/// Precision of the tables rebuilt inside the flow field.
pub const FLOW_BITS: u32 = 128;

fn flow_b(n: usize, params: &FunctionalParams, z: &Real, ctx: &PrecisionContext) -> Result<Real> {
    let t = recurrence_from_moments(n, &params.with_z(z), ctx)?;
    Ok(t.b[n].clone())
}

/// Integrates ẋ = (x/z)·C_{n−1}(z, z)/C_{n−1}(x, z) for the k-th zero
/// (1-based, increasing) of P_n from z0 to z1, with C_{n−1}(x, z) ∝ x + b_n(z) − (2n+α+z+1). b_n is recomputed at
/// every field evaluation at 128 bits; the endpoint is compared with the
/// zero computed at full precision.
pub fn zero_flow(
    n: usize,
    k: usize,
    params: &FunctionalParams,
    z0: &Real,
    z1: &Real,
    tol: &Real,
    ctx: &PrecisionContext,
) -> Result<Flow> {
    if k == 0 || k > n {
        return Err(Error::InvalidParam(format!("zero index must satisfy 1 <= k <= n, got k = {k}")));
    }
    if !z0.is_positive() || z1 < z0 {
        return Err(Error::InvalidParam("flow needs 0 < z0 <= z1".into()));
    }
    let start = recurrence_from_moments(n, &params.at_bits(ctx.bits()).with_z(&z0.with_prec(ctx.bits())), ctx)?;
    let x0 = zeros(n, &start)?.points[k - 1].clone();
    let fast = make_context(FLOW_BITS)?;
    let fparams = params.at_bits(FLOW_BITS);
    let al = fparams.alpha.clone();
    let field = |z: &Real, y: &[Real]| -> Result<Vec<Real>> {
        let b = flow_b(n, &fparams, z, &fast)?;
        let shift = &b - (&al + z + (2 * n + 1) as i64);
        let den = &y[0] + &shift;
        if den.is_zero() {
            return Err(Error::Degenerate(format!("C_(n-1)(x, z) vanishes at z = {}", z.to_decimal(12))));
        }
        Ok(vec![&y[0] / z * (z + &shift) / den])
    };
    let samples = integrate_ode(field, &[x0.with_prec(FLOW_BITS)], &z0.with_prec(FLOW_BITS), &z1.with_prec(FLOW_BITS), tol, &fast)?;
    let trajectory: Vec<FlowPoint> = samples
        .into_iter()
        .map(|(z, y)| FlowPoint { z, x: y[0].clone() })
        .collect();
    let monotone = trajectory.windows(2).all(|w| w[1].x >= w[0].x);
    if !monotone {
        eprintln!("warning: x_{{{n},{k}}}(z) is not increasing on the sampled steps");
    }
    let end = recurrence_from_moments(n, &params.at_bits(ctx.bits()).with_z(&z1.with_prec(ctx.bits())), ctx)?;
    let x1 = zeros(n, &end)?.points[k - 1].clone();
    let endpoint_error = (&trajectory.last().expect("at least one sample").x - &x1).abs();
    Ok(Flow { trajectory, endpoint_error, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{moment_table, Variant};
    use crate::recurrence::Backend;

    fn tables(a: &str, z: &str, n: usize, bits: u32) -> Tables {
        let p = FunctionalParams::parse(a, z, Variant::L, bits).unwrap();
        let c = make_context(bits).unwrap();
        Tables::build(n, &p, &c, Backend::Moment).unwrap()
    }

    #[test]
    fn low_degree_zeros() {
        let tb = tables("0", "1", 6, 256);
        let t = &tb.rec;
        let z1 = zeros(1, t).unwrap();
        assert!((&z1.points[0] - &t.b[0]).abs() < 1e-60);
        assert!((&z1.points[0] - 0.418023).abs() < 1e-6);
        // quadratic formula for (x−b_0)(x−b_1) − a_1
        let s = &t.b[0] + &t.b[1];
        let disc = ((&t.b[0] - &t.b[1]).square() + &t.a[1] * 4).sqrt();
        let z2 = zeros(2, t).unwrap();
        assert!((&z2.points[0] - (&s - &disc) / 2).abs() < 1e-60);
        assert!((&z2.points[1] - (&s + &disc) / 2).abs() < 1e-60);
    }

    #[test]
    fn interlacing_and_support() {
        let tb = tables("-0.5", "3", 12, 256);
        let mut prev: Option<Vec<Real>> = None;
        for n in 1..=12 {
            let zs = zeros(n, &tb.rec).unwrap().points;
            assert!(zs[0] > 0.0 && zs[n - 1] < 3.0);
            if let Some(p) = &prev {
                for k in 0..n - 1 {
                    assert!(zs[k] < p[k] && p[k] < zs[k + 1]);
                }
            }
            prev = Some(zs);
        }
    }

    #[test]
    fn s_zeros_are_symmetric() {
        let tb = tables("1", "1", 6, 256);
        for m in 1..=9 {
            let zs = zeros_s(m, &tb).unwrap().points;
            assert_eq!(zs.len(), m);
            for k in 0..m {
                assert!((&zs[k] + &zs[m - 1 - k]).abs() < 1e-60);
            }
            assert!(zs[m - 1] < tb.z().sqrt());
        }
    }

    #[test]
    fn gauss_rule_exactness_boundary() {
        let tb = tables("0", "1", 6, 256);
        let p = &tb.rec.params;
        let m = moment_table(12, p, tb.ctx()).unwrap();
        let r1 = gauss_rule(1, &tb.rec, &m).unwrap();
        assert!((&r1.weights[0] - &m.values[0]).abs() < 1e-60);
        let r3 = gauss_rule(3, &tb.rec, &m).unwrap();
        assert!((r3.apply_monomial(5) - &m.values[5]).abs() < 1e-60);
        let r2 = gauss_rule(2, &tb.rec, &m).unwrap();
        assert!((r2.apply_monomial(4) - &m.values[4]).abs() > 1e-10);
    }

    #[test]
    fn equilibrium() {
        let tb = tables("0", "1", 6, 256);
        let tol = &tb.ctx().residual_tol;
        for n in [1, 3, 5] {
            for r in electrostatic_residual(n, Family::P, &tb).unwrap() {
                assert!(r < *tol, "P n={n}");
            }
        }
        let tb = tables("1", "1", 6, 256);
        for m in [3, 4, 7] {
            let r = electrostatic_residual(m, Family::S, &tb).unwrap();
            for x in &r {
                assert!(*x < *tol, "S m={m}");
            }
            let k = r.len();
            for i in 0..k {
                assert!((&r[i] - &r[k - 1 - i]).abs() < 1e-60);
            }
        }
    }

    #[test]
    fn flow_reaches_the_recomputed_zero() {
        let ctx = make_context(256).unwrap();
        let p = FunctionalParams::parse("0", "1", Variant::L, 256).unwrap();
        let tol = Real::from_f64(256, 1e-10);
        let z0 = Real::from_f64(256, 1.0);
        let f = zero_flow(1, 1, &p, &z0, &Real::from_f64(256, 2.0), &tol, &ctx).unwrap();
        assert!(f.endpoint_error < 1e-9, "{}", f.endpoint_error);
        assert!(f.monotone);
        let same = zero_flow(2, 1, &p, &z0, &z0, &tol, &ctx).unwrap();
        assert_eq!(same.trajectory.len(), 1);
    }

    #[test]
    fn chebyshev_limit_improves() {
        let mut last = None;
        for n in [10, 20, 40] {
            let p = FunctionalParams::parse("0", "1", Variant::L, 256).unwrap();
            let c = make_context(256).unwrap();
            let t = recurrence_from_moments(n, &p, &c).unwrap();
            let e = chebyshev_error(&zeros(n, &t).unwrap());
            if let Some(l) = last {
                assert!(e < l);
            }
            last = Some(e);
        }
    }
}
