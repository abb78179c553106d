//! Moments ℓ_m = γ̂(m+α+1, z) of the truncated gamma functional and the
//! Stieltjes-function ODE.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{differentiate, PrecisionContext};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// ⟨ℓ, p⟩ = ∫₀^z p(x) x^α e^{−x} dx
    L,
    /// the functional x·ℓ
    XL,
}

impl Variant {
    /// Offset added to the moment index when reading base moments.
    pub fn shift(self) -> usize {
        match self {
            Variant::L => 0,
            Variant::XL => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionalParams {
    pub alpha: Real,
    pub z: Real,
    pub variant: Variant,
    // decimal sources, so that wider contexts re-round from the literal
    alpha_src: Option<String>,
    z_src: Option<String>,
}

impl FunctionalParams {
    /// Parses α and z from decimal literals at `bits` precision.
    pub fn parse(alpha: &str, z: &str, variant: Variant, bits: u32) -> Result<Self> {
        let a = Real::parse(bits, alpha)
            .ok_or_else(|| Error::InvalidParam(format!("alpha is not a number: {alpha:?}")))?;
        let zz = Real::parse(bits, z)
            .ok_or_else(|| Error::InvalidParam(format!("z is not a number: {z:?}")))?;
        let p = FunctionalParams {
            alpha: a,
            z: zz,
            variant,
            alpha_src: Some(alpha.trim().to_string()),
            z_src: Some(z.trim().to_string()),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_reals(alpha: Real, z: Real, variant: Variant) -> Result<Self> {
        let p = FunctionalParams { alpha, z, variant, alpha_src: None, z_src: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0) {
            return Err(Error::InvalidParam(format!(
                "alpha must satisfy alpha > -1, got {}",
                self.alpha.to_decimal(20)
            )));
        }
        if !self.z.is_positive() {
            return Err(Error::InvalidParam(format!(
                "z must satisfy z > 0, got {}",
                self.z.to_decimal(20)
            )));
        }
        Ok(())
    }

    /// The same functional with α and z at `bits` precision.
    pub fn at_bits(&self, bits: u32) -> Self {
        let re = |src: &Option<String>, v: &Real| match src {
            Some(s) => Real::parse(bits, s).expect("validated literal"),
            None => v.with_prec(bits),
        };
        FunctionalParams {
            alpha: re(&self.alpha_src, &self.alpha),
            z: re(&self.z_src, &self.z),
            variant: self.variant,
            alpha_src: self.alpha_src.clone(),
            z_src: self.z_src.clone(),
        }
    }

    /// Same α and variant at a different truncation point.
    pub fn with_z(&self, z: &Real) -> Self {
        FunctionalParams {
            alpha: self.alpha.clone(),
            z: z.clone(),
            variant: self.variant,
            alpha_src: self.alpha_src.clone(),
            z_src: None,
        }
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        FunctionalParams { variant, ..self.clone() }
    }

    pub fn alpha_text(&self) -> String {
        self.alpha_src.clone().unwrap_or_else(|| self.alpha.to_decimal(40))
    }

    pub fn z_text(&self) -> String {
        self.z_src.clone().unwrap_or_else(|| self.z.to_decimal(40))
    }

    /// Effective exponent offset: moment m of this functional is
    /// γ̂(m + α + 1 + shift, z).
    fn base(&self, m: usize) -> Real {
        &self.alpha + (m + 1 + self.variant.shift()) as i64
    }
}

/// Bits lost to cancellation in the alternating series at this z.
fn series_guard(z: &Real) -> u32 {
    (z.to_f64() * std::f64::consts::LOG2_E).ceil().max(0.0) as u32 + 16
}

const MAX_TERMS: usize = 100_000;

/// γ̂(a, z) = z^a Σ_k (−z)^k / ((a+k) k!) at `bits` working precision.
fn lower_gamma_series(a: &Real, z: &Real, bits: u32) -> Result<Real> {
    let a = a.with_prec(bits);
    let z = z.with_prec(bits);
    let eps = Real::exp2i(bits, 1 - bits as i32);
    let mut t = Real::one(bits); // (−z)^k / k!
    let mut sum = a.recip();
    let mut k: usize = 0;
    loop {
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::NonConvergence { terms: MAX_TERMS });
        }
        t = -(t * &z) / k as i64;
        let term = &t / (&a + k as i64);
        sum += &term;
        let next = (&t * &z / (k + 1) as i64).abs() / (&a + (k + 1) as i64).abs();
        if k >= 8 && next < &eps * sum.abs() {
            break;
        }
    }
    Ok((a * z.ln()).exp() * sum)
}

/// ℓ_m by the power series, rounded to the context precision.
pub fn moment_series(m: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<Real> {
    params.validate()?;
    let w = ctx.bits() + series_guard(&params.z);
    let p = params.at_bits(w);
    Ok(lower_gamma_series(&p.base(m), &p.z, w)?.with_prec(ctx.bits()))
}

#[derive(Clone, Debug)]
pub struct MomentTable {
    pub params: FunctionalParams,
    pub values: Vec<Real>,
    pub ctx: PrecisionContext,
    /// Extra bits carried by the forward recurrence.
    pub guard_bits: u32,
}

impl MomentTable {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Positivity, the one-step bound ℓ_{m+1} < (m+α+1)ℓ_m, and positivity
    /// of the leading Hankel determinants of orders 1..3.
    pub fn check_invariants(&self) -> Result<()> {
        let v = &self.values;
        for (m, x) in v.iter().enumerate() {
            if !x.is_positive() {
                return Err(Error::PrecisionExhausted(format!("moment {m} is not positive")));
            }
        }
        for m in 0..v.len().saturating_sub(1) {
            if v[m + 1] >= &v[m] * self.params.base(m) {
                return Err(Error::PrecisionExhausted(format!(
                    "moment bound l_(m+1) < (m+alpha+1) l_m fails at m = {m}"
                )));
            }
        }
        for order in 1..=3usize {
            if 2 * order - 2 < v.len() {
                let h: Vec<Vec<Real>> = (0..order)
                    .map(|i| (0..order).map(|j| v[i + j].clone()).collect())
                    .collect();
                if !det(h).is_positive() {
                    return Err(Error::PrecisionExhausted(format!(
                        "Hankel determinant of order {order} is not positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn det(mut a: Vec<Vec<Real>>) -> Real {
    // Gaussian elimination, fine for order ≤ 3
    let n = a.len();
    let mut d = Real::one(a[0][0].prec());
    for k in 0..n {
        let piv = a[k][k].clone();
        if piv.is_zero() {
            return piv;
        }
        d *= &piv;
        for i in k + 1..n {
            let f = &a[i][k] / &piv;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Estimated bits lost by the forward moment recurrence up to index `m`:
/// the dominant solution Γ(m+α+1) grows against the minimal one.
fn recurrence_loss(base: &Real, ell: &Real) -> u32 {
    let lg = base.ln_gamma() - ell.abs().ln();
    let bits = lg.to_f64() * std::f64::consts::LOG2_E;
    bits.max(0.0).ceil() as u32
}

/// ℓ_0 … ℓ_N: ℓ_0, ℓ_1 from the series, the rest from the forward
/// recurrence ℓ_{n+2} = (n+z+2+α)ℓ_{n+1} − z(n+α+1)ℓ_n carried with guard
/// bits; every entry is cross-checked against the series.
pub fn moment_table(n: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<MomentTable> {
    params.validate()?;
    if n < 1 {
        return Err(Error::InvalidParam("moment table needs N >= 1".into()));
    }
    let shift = params.variant.shift();
    let top = n + shift;
    let bits = ctx.bits();
    let base_params = params.with_variant(Variant::L);

    let wr = bits + series_guard(&params.z);
    let pr = base_params.at_bits(wr);
    let series: Vec<Real> = (0..=top)
        .map(|m| lower_gamma_series(&pr.base(m), &pr.z, wr))
        .collect::<Result<_>>()?;
    let mut guard =
        (0..=top).map(|m| recurrence_loss(&pr.base(m), &series[m])).max().unwrap_or(0) + 32;

    for attempt in 0..2 {
        let w = bits + guard;
        let p = base_params.at_bits(w);
        let ws = w + series_guard(&params.z);
        let ps = base_params.at_bits(ws);
        let mut rec: Vec<Real> = vec![lower_gamma_series(&ps.base(0), &ps.z, ws)?.with_prec(w)];
        if top >= 1 {
            rec.push(lower_gamma_series(&ps.base(1), &ps.z, ws)?.with_prec(w));
        }
        for k in 0..top.saturating_sub(1) {
            let next = (&p.z + &p.alpha + (k + 2) as i64) * &rec[k + 1]
                - &p.z * (&p.alpha + (k + 1) as i64) * &rec[k];
            rec.push(next);
        }
        let mut bad = None;
        for m in 0..=top {
            let rel = (&rec[m] - &series[m]).abs() / series[m].abs();
            if rel > ctx.residual_tol {
                bad = Some(m);
                break;
            }
        }
        match bad {
            None => {
                let values = rec[shift..].iter().map(|v| v.with_prec(bits)).collect();
                let t = MomentTable { params: params.at_bits(bits), values, ctx: ctx.clone(), guard_bits: guard };
                t.check_invariants()?;
                return Ok(t);
            }
            Some(m) if attempt == 1 => {
                return Err(Error::PrecisionExhausted(format!(
                    "moment recurrence drifts from the series at m = {}",
                    m as i64 - shift as i64
                )));
            }
            Some(_) => guard *= 2,
        }
    }
    unreachable!("loop returns on the second attempt")
}

/// |z·dℓ_m/dz − (m+α+1)ℓ_m + ℓ_{m+1}| with the derivative by finite
/// differences of the series.
pub fn theta_moment_residual(m: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<Real> {
    let f = |zz: &Real| moment_series(m, &params.with_z(zz), ctx);
    let d = differentiate(f, &params.z, 1, ctx)?;
    let lm = moment_series(m, params, ctx)?;
    let lm1 = moment_series(m + 1, params, ctx)?;
    Ok((&params.z * d - params.base(m) * &lm + lm1).abs())
}

/// Residual of (t²−zt)S′ + (t²−(z+α)t+zα)S − (t−z−α−1)ℓ_0 − ℓ_1 for the
/// degree-N truncation S = Σ_{n≤N} ℓ_n/t^{n+1}.
pub fn stieltjes_ode_residual(
    t: &Real,
    n: usize,
    params: &FunctionalParams,
    ctx: &PrecisionContext,
) -> Result<Real> {
    if params.variant != Variant::L {
        return Err(Error::InvalidParam("the Stieltjes ODE is stated for variant l".into()));
    }
    if n < 4 {
        return Err(Error::InvalidParam("Stieltjes truncation needs N >= 4".into()));
    }
    if t.abs() <= params.z {
        return Err(Error::InvalidParam("Stieltjes expansion needs |t| > z".into()));
    }
    let tab = moment_table(n, params, ctx)?;
    let l = &tab.values;
    let (z, a) = (&tab.params.z, &tab.params.alpha);
    let t = t.with_prec(ctx.bits());
    let mut s = Real::zero(ctx.bits());
    let mut ds = Real::zero(ctx.bits());
    let mut tp = t.recip(); // t^{-(k+1)}
    for (k, lk) in l.iter().enumerate() {
        s += lk * &tp;
        ds -= lk * &tp / &t * (k + 1) as i64;
        tp = tp / &t;
    }
    let lhs = (&t * &t - z * &t) * ds + (&t * &t - (z + a) * &t + z * a) * s;
    let rhs = (&t - z - a - 1) * &l[0] + &l[1];
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_context;

    fn params(a: &str, z: &str) -> FunctionalParams {
        FunctionalParams::parse(a, z, Variant::L, 256).unwrap()
    }

    #[test]
    fn closed_form_first_moments() {
        let ctx = make_context(256).unwrap();
        let p = params("0", "1");
        let e1 = Real::one(256).exp().recip();
        let l0 = moment_series(0, &p, &ctx).unwrap();
        assert!((&l0 - (1 - e1.clone())).abs() < &ctx.eps * 16);
        let l1 = moment_series(1, &p, &ctx).unwrap();
        assert!((&l1 - (1 - e1 * 2)).abs() < &ctx.eps * 16);
        assert_eq!(&l0.to_decimal(15), "0.632120558828558");
    }

    #[test]
    fn table_matches_hand_recurrence() {
        let ctx = make_context(256).unwrap();
        let p = params("0", "1");
        let t = moment_table(2, &p, &ctx).unwrap();
        let want = &t.values[1] * 3 - &t.values[0];
        assert!((&t.values[2] - want).abs() < &ctx.eps * 16);
        assert_eq!(t.values[2].to_decimal(15), "0.160602794142788");
    }

    #[test]
    fn xl_shifts_by_one() {
        let ctx = make_context(192).unwrap();
        let p = params("0.5", "2");
        let l = moment_table(6, &p, &ctx).unwrap();
        let xl = moment_table(5, &p.with_variant(Variant::XL), &ctx).unwrap();
        for m in 0..=5 {
            assert_eq!(xl.values[m], l.values[m + 1]);
        }
    }

    #[test]
    fn log_convex_at_large_z() {
        let ctx = make_context(256).unwrap();
        let t = moment_table(20, &params("0", "10"), &ctx).unwrap();
        let ratios: Vec<Real> = t.values.windows(2).map(|w| &w[1] / &w[0]).collect();
        assert!(ratios.windows(2).all(|r| r[1] > r[0]));
    }

    #[test]
    fn approaches_complete_gamma() {
        let ctx = make_context(256).unwrap();
        for a in ["0", "1.7"] {
            let p = params(a, "30");
            let t = moment_table(5, &p, &ctx).unwrap();
            let mut g = (&p.alpha + 1).gamma();
            for m in 0..=5 {
                if m > 0 {
                    g *= &p.alpha + m as i64;
                }
                let r = &t.values[m] / &g;
                assert!(r < 1.0 && r > 1.0 - 1e-6, "alpha={a} m={m}");
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FunctionalParams::parse("-1", "1", Variant::L, 64).is_err());
        assert!(FunctionalParams::parse("0", "0", Variant::L, 64).is_err());
        assert!(FunctionalParams::parse("x", "1", Variant::L, 64).is_err());
    }

    #[test]
    fn theta_identity() {
        let ctx = make_context(256).unwrap();
        for (m, a, z) in [(0, "0", "1"), (3, "0.5", "2"), (0, "-0.5", "0.25")] {
            let p = params(a, z);
            let r = theta_moment_residual(m, &p, &ctx).unwrap();
            let lm = moment_series(m, &p, &ctx).unwrap();
            assert!(r <= &ctx.residual_tol * lm, "m={m} a={a} z={z}");
        }
    }

    #[test]
    fn stieltjes_tail_bound() {
        let ctx = make_context(256).unwrap();
        let p = params("0", "1");
        let t = Real::from_int(256, 10);
        let r = stieltjes_ode_residual(&t, 20, &p, &ctx).unwrap();
        let l21 = moment_series(21, &p, &ctx).unwrap();
        let bound = l21 / t.powi(21) * 200;
        assert!(r <= bound, "{r} vs {bound}");
        let r40 = stieltjes_ode_residual(&t, 40, &p, &ctx).unwrap();
        assert!(r40 * &t <= r);
    }
}
