//! Three-term recurrence data for ℓ and x·ℓ, and the symmetric coefficients
//! γ_n. Two independent constructions: Gram–Schmidt on raw moments, and a
//! discretized Stieltjes procedure on a Gauss–Jacobi rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{moment_table, FunctionalParams, Variant};
use crate::numerics::{make_context, tridiag_eigen, PrecisionContext};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Moment,
    Discretized,
}

/// xP_n = P_{n+1} + b_nP_n + a_nP_{n−1} for 0 ≤ n ≤ N.
#[derive(Clone, Debug)]
pub struct RecurrenceTable {
    pub params: FunctionalParams,
    pub n_max: usize,
    /// a_0 … a_N with a_0 = 0
    pub a: Vec<Real>,
    pub b: Vec<Real>,
    /// h_n = ⟨ℓ, P_n²⟩
    pub h: Vec<Real>,
    /// σ_n = −[x^{n−1}] P_n
    pub sigma: Vec<Real>,
    pub ctx: PrecisionContext,
    pub backend: Backend,
}

/// Suggested mantissa width for degree N: 64 + ceil(3.5·N·log2(10)/3).
pub fn default_bits(n: usize) -> u32 {
    64 + (3.5 * n as f64 * std::f64::consts::LOG2_10 / 3.0).ceil() as u32
}

impl RecurrenceTable {
    /// The table invariants: a_0 = 0, a_n, h_n > 0, a_n = h_n/h_{n−1},
    /// 0 < b_n < z, σ_0 = 0, b_n = σ_{n+1} − σ_n and 0 < σ_n < n·z.
    pub fn check_invariants(&self) -> Result<()> {
        let tol = &self.ctx.residual_tol;
        let z = &self.params.z;
        let fail = |what: &str, n: usize| {
            Err(Error::PrecisionExhausted(format!("{what} fails at n = {n}")))
        };
        if !self.a[0].is_zero() {
            return fail("a_0 = 0", 0);
        }
        if !self.sigma[0].is_zero() {
            return fail("sigma_0 = 0", 0);
        }
        for n in 0..=self.n_max {
            if !self.h[n].is_positive() {
                return fail("h_n > 0", n);
            }
            if n >= 1 {
                if !self.a[n].is_positive() {
                    return fail("a_n > 0", n);
                }
                let r = &self.h[n] / &self.h[n - 1];
                if (&r - &self.a[n]).abs() > tol * &self.a[n] {
                    return fail("a_n = h_n/h_(n-1)", n);
                }
                if !self.sigma[n].is_positive() || self.sigma[n] >= z * n as i64 {
                    return fail("0 < sigma_n < n z", n);
                }
            }
            if !self.b[n].is_positive() || self.b[n] >= *z {
                return fail("0 < b_n < z", n);
            }
            if n < self.n_max {
                let d = &self.sigma[n + 1] - &self.sigma[n];
                if (&d - &self.b[n]).abs() > tol * &self.b[n] {
                    return fail("b_n = sigma_(n+1) - sigma_n", n);
                }
            }
        }
        Ok(())
    }

    fn rounded(mut self, ctx: &PrecisionContext) -> Self {
        let p = ctx.bits();
        for v in [&mut self.a, &mut self.b, &mut self.h, &mut self.sigma] {
            for x in v.iter_mut() {
                *x = x.with_prec(p);
            }
        }
        self.params = self.params.at_bits(p);
        self.ctx = ctx.clone();
        self
    }
}

/// Monic P_0 … P_{N+1} from raw moments by the Stieltjes form of
/// Gram–Schmidt, at working precision `w`. Returns the table and the largest
/// number of bits lost to cancellation in any h_n.
fn gram_schmidt(n: usize, params: &FunctionalParams, w: u32) -> Result<(RecurrenceTable, u32)> {
    let wctx = make_context(w)?;
    let p = params.at_bits(w);
    let mom = moment_table(2 * n + 2, &p, &wctx)?;
    let l = &mom.values;
    let zero = Real::zero(w);
    let mut polys: Vec<Vec<Real>> = vec![vec![Real::one(w)]];
    let (mut a, mut b, mut h, mut sigma) = (vec![zero.clone()], vec![], vec![], vec![zero.clone()]);
    let mut worst = 0u32;
    for k in 0..=n {
        let pk = &polys[k];
        // v_i = Σ_j p_j ℓ_{i+j}, for i = 0..=k+1
        let v: Vec<Real> = (0..=k + 1)
            .map(|i| pk.iter().enumerate().fold(zero.clone(), |acc, (j, c)| acc + c * &l[i + j]))
            .collect();
        let mut hk = zero.clone();
        let mut xk = zero.clone();
        let mut mag = zero.clone();
        for (i, c) in pk.iter().enumerate() {
            hk += c * &v[i];
            xk += c * &v[i + 1];
            for (j, d) in pk.iter().enumerate() {
                mag += (c * d).abs() * &l[i + j];
            }
        }
        if !hk.is_positive() {
            return Err(Error::PrecisionExhausted(format!("h_{k} is not positive")));
        }
        let lost = (&mag / &hk).log2().to_f64().max(0.0).ceil() as u32;
        worst = worst.max(lost);
        let bk = &xk / &hk;
        if k >= 1 {
            a.push(&hk / &h[k - 1]);
        }
        // P_{k+1} = (x − b_k)P_k − a_kP_{k−1}
        let mut next = vec![zero.clone(); k + 2];
        for (i, c) in pk.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= &bk * c;
        }
        if k >= 1 {
            for (i, c) in polys[k - 1].iter().enumerate() {
                next[i] -= &a[k] * c;
            }
        }
        h.push(hk);
        b.push(bk);
        if k + 1 <= n {
            sigma.push(-next[k].clone());
        }
        polys.push(next);
    }
    let t = RecurrenceTable {
        params: p,
        n_max: n,
        a,
        b,
        h,
        sigma,
        ctx: wctx,
        backend: Backend::Moment,
    };
    Ok((t, worst))
}

/// Recurrence coefficients from the moment table, carried at a working
/// precision that covers the measured cancellation; one doubling of the
/// guard on failure.
pub fn recurrence_from_moments(n: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<RecurrenceTable> {
    params.validate()?;
    let bits = ctx.bits();
    let mut guard = 64 + 4 * n as u32;
    let mut last_err = None;
    for _ in 0..3 {
        let (t, lost) = gram_schmidt(n, params, bits + guard)?;
        if lost + 32 > guard {
            guard = 2 * lost + 64;
            continue;
        }
        let t = t.rounded(ctx);
        match t.check_invariants() {
            Ok(()) => return Ok(t),
            Err(e) => {
                last_err = Some(e);
                guard *= 2;
            }
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::PrecisionExhausted(format!("moment Gram-Schmidt for N = {n} needs more than {guard} guard bits"))
    }))
}

/// Monic Jacobi recurrence for the weight (1+t)^β on [−1, 1]: (diag, a).
fn jacobi_coeffs(m: usize, beta: &Real) -> (Vec<Real>, Vec<Real>) {
    let p = beta.prec();
    let mut diag = Vec::with_capacity(m);
    let mut a = vec![Real::zero(p)];
    for k in 0..m {
        let s = beta + (2 * k) as i64;
        let d = if k == 0 {
            beta / (beta + 2)
        } else {
            beta.square() / (&s * (&s + 2))
        };
        diag.push(d);
        if k >= 1 {
            let kk = k as i64;
            let num = (beta + kk).square() * kk * kk * 4;
            let den = s.square() * (&s + 1) * (&s - 1);
            a.push(num / den);
        }
    }
    (diag, a)
}

/// Monic value and derivative of the degree-m polynomial of a recurrence.
fn monic_eval(diag: &[Real], a: &[Real], m: usize, x: &Real) -> (Real, Real, Real) {
    let p = x.prec();
    let (mut p0, mut p1) = (Real::zero(p), Real::one(p));
    let (mut d0, mut d1) = (Real::zero(p), Real::zero(p));
    for k in 0..m {
        let p2 = (x - &diag[k]) * &p1 - &a[k] * &p0;
        let d2 = &p1 + (x - &diag[k]) * &d1 - &a[k] * &d0;
        p0 = std::mem::replace(&mut p1, p2);
        d0 = std::mem::replace(&mut d1, d2);
    }
    // (P_m, P_m′, P_{m−1})
    (p1, d1, p0)
}

/// Gauss–Jacobi nodes and weights for (1+t)^β on [−1, 1] at `w` bits.
fn gauss_jacobi(m: usize, beta: &Real, w: u32) -> Result<(Vec<Real>, Vec<Real>)> {
    let beta = beta.with_prec(w);
    let (diag, a) = jacobi_coeffs(m, &beta);
    // coarse nodes by bisection, then Newton on P_m
    let coarse_ctx = make_context(64)?;
    let off: Vec<Real> = a[1..].iter().map(|x| x.with_prec(64).sqrt()).collect();
    let d64: Vec<Real> = diag.iter().map(|x| x.with_prec(64)).collect();
    let coarse = tridiag_eigen(&d64, &off, &coarse_ctx)?;
    let eps = Real::exp2i(w, 8 - w as i32);
    let mut mu0 = Real::exp2i(w, 1).pow(&(&beta + 1)) / (&beta + 1);
    for x in &a[1..m] {
        mu0 *= x;
    }
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for t0 in coarse {
        let mut t = t0.with_prec(w);
        for _ in 0..64 {
            let (v, d, _) = monic_eval(&diag, &a, m, &t);
            let step = &v / &d;
            t -= &step;
            if step.abs() <= &eps * t.abs().max(Real::one(w)) {
                break;
            }
        }
        let (_, d, prev) = monic_eval(&diag, &a, m, &t);
        weights.push(&mu0 / (prev * d));
        nodes.push(t);
    }
    Ok((nodes, weights))
}

/// Node count for the discretized backend: at least 4N+32, and enough that
/// the Taylor tail of e^{−x} on (0, z) is below the working epsilon.
pub fn discretization_nodes(n: usize, z: f64, bits: u32) -> usize {
    let half = (z / 2.0).max(1e-300);
    let target = -((bits + 32) as f64) * std::f64::consts::LN_2;
    let mut k = 2.0f64;
    while k * (1.0 + half.ln() - k.ln()) > target {
        k += 2.0;
    }
    (4 * n + 32).max(n + (k / 2.0) as usize + 1)
}

/// Stieltjes procedure on an M-point Gauss–Jacobi rule mapped to (0, z).
pub fn recurrence_discretized_with(
    n: usize,
    params: &FunctionalParams,
    ctx: &PrecisionContext,
    nodes: usize,
) -> Result<RecurrenceTable> {
    params.validate()?;
    if n < 1 {
        return Err(Error::InvalidParam("discretized backend needs N >= 1".into()));
    }
    let w = ctx.bits() + 64;
    let wctx = make_context(w)?;
    let p = params.at_bits(w);
    let expo = &p.alpha + p.variant.shift() as i64;
    let (t, wt) = gauss_jacobi(nodes, &expo, w)?;
    let half = &p.z / 2;
    let scale = half.pow(&(&expo + 1));
    let xs: Vec<Real> = t.iter().map(|ti| &half * (ti + 1)).collect();
    let ws: Vec<Real> = wt.iter().zip(&xs).map(|(wi, xi)| &scale * wi * (-xi).exp()).collect();

    let zero = Real::zero(w);
    let mut prev = vec![zero.clone(); nodes];
    let mut cur = vec![Real::one(w); nodes];
    let (mut a, mut b, mut h, mut sigma) = (vec![zero.clone()], vec![], vec![], vec![zero.clone()]);
    for k in 0..=n {
        let mut hk = zero.clone();
        let mut xk = zero.clone();
        for j in 0..nodes {
            let q = &ws[j] * cur[j].square();
            xk += &q * &xs[j];
            hk += q;
        }
        let bk = &xk / &hk;
        if k >= 1 {
            a.push(&hk / &h[k - 1]);
        }
        if k + 1 <= n {
            sigma.push(&sigma[k] + &bk);
        }
        let next: Vec<Real> = (0..nodes)
            .map(|j| (&xs[j] - &bk) * &cur[j] - &a[k] * &prev[j])
            .collect();
        prev = std::mem::replace(&mut cur, next);
        h.push(hk);
        b.push(bk);
    }
    let t = RecurrenceTable {
        params: p,
        n_max: n,
        a,
        b,
        h,
        sigma,
        ctx: wctx,
        backend: Backend::Discretized,
    }
    .rounded(ctx);
    t.check_invariants()?;
    Ok(t)
}

pub fn recurrence_discretized(n: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<RecurrenceTable> {
    let m = discretization_nodes(n, params.z.to_f64(), ctx.bits());
    recurrence_discretized_with(n, params, ctx, m)
}

/// Largest entrywise relative difference between two tables of equal size
/// over a (n ≥ 1), b, h and σ (n ≥ 1), with the worst entry's label.
pub fn compare_tables(x: &RecurrenceTable, y: &RecurrenceTable) -> (Real, String) {
    let p = x.ctx.bits();
    let mut worst = Real::zero(p);
    let mut label = String::new();
    let n = x.n_max.min(y.n_max);
    let fields: [(&str, &Vec<Real>, &Vec<Real>, usize); 4] =
        [("a", &x.a, &y.a, 1), ("b", &x.b, &y.b, 0), ("h", &x.h, &y.h, 0), ("sigma", &x.sigma, &y.sigma, 1)];
    for (name, u, v, from) in fields {
        for k in from..=n.min(u.len() - 1).min(v.len() - 1) {
            let rel = (&u[k] - &v[k]).abs() / u[k].abs();
            if rel > worst {
                worst = rel;
                label = format!("{name}_{k}");
            }
        }
    }
    (worst, label)
}

/// Both backends, with the discretized rule refined once if they disagree
/// by more than `tol`.
pub fn recurrence_both(
    n: usize,
    params: &FunctionalParams,
    ctx: &PrecisionContext,
    tol: &Real,
) -> Result<(RecurrenceTable, RecurrenceTable)> {
    let mt = recurrence_from_moments(n, params, ctx)?;
    let m = discretization_nodes(n, params.z.to_f64(), ctx.bits());
    let mut last = String::new();
    for nodes in [m, 2 * m] {
        let dt = recurrence_discretized_with(n, params, ctx, nodes)?;
        let (err, at) = compare_tables(&mt, &dt);
        if err <= *tol {
            return Ok((mt, dt));
        }
        last = format!("{at} differs by {} (M = {nodes})", err.to_decimal(6));
    }
    Err(Error::BackendMismatch(last))
}

/// Coefficients of the symmetrized family: xS_n = S_{n+1} + γ_nS_{n−1}.
#[derive(Clone, Debug)]
pub struct SymmetricTable {
    /// γ_0 … γ_{2N+1}, γ_0 = 0
    pub gamma: Vec<Real>,
    /// c_0 … c_N (c_0 = 0) of the x·ℓ recurrence
    pub c: Vec<Real>,
    /// d_0 … d_{N−1}
    pub d: Vec<Real>,
}

impl SymmetricTable {
    /// γ_k, zero for negative k.
    pub fn g(&self, k: i64) -> Real {
        if k < 0 {
            Real::zero(self.gamma[0].prec())
        } else {
            self.gamma[k as usize].clone()
        }
    }
}

/// γ_1 = b_0, then γ_{2n} = a_n/γ_{2n−1} and γ_{2n+1} = b_n − γ_{2n}.
pub fn symmetrize_unchecked(t: &RecurrenceTable) -> Result<SymmetricTable> {
    let p = t.ctx.bits();
    let mut gamma = vec![Real::zero(p), t.b[0].clone()];
    for n in 1..=t.n_max {
        let g2 = &t.a[n] / &gamma[2 * n - 1];
        let g1 = &t.b[n] - &g2;
        gamma.push(g2);
        gamma.push(g1);
    }
    for (k, g) in gamma.iter().enumerate().skip(1) {
        if !g.is_positive() {
            return Err(Error::PrecisionExhausted(format!("gamma_{k} is not positive")));
        }
    }
    let c = (0..=t.n_max).map(|n| &gamma[2 * n + 1] * &gamma[2 * n]).collect();
    let d = (0..t.n_max).map(|n| &gamma[2 * n + 2] + &gamma[2 * n + 1]).collect();
    Ok(SymmetricTable { gamma, c, d })
}

/// Symmetrization with the c, d sequences cross-checked against a fresh
/// x·ℓ table from the moment backend.
pub fn symmetrize(t: &RecurrenceTable) -> Result<SymmetricTable> {
    let s = symmetrize_unchecked(t)?;
    if t.n_max < 2 {
        return Ok(s);
    }
    let xl = recurrence_from_moments(t.n_max - 1, &t.params.with_variant(Variant::XL), &t.ctx)?;
    let tol = &t.ctx.residual_tol;
    for n in 0..t.n_max {
        if (&s.d[n] - &xl.b[n]).abs() > tol * &xl.b[n] {
            return Err(Error::BackendMismatch(format!("d_{n} disagrees with the x.l table")));
        }
        if n >= 1 && (&s.c[n] - &xl.a[n]).abs() > tol * &xl.a[n] {
            return Err(Error::BackendMismatch(format!("c_{n} disagrees with the x.l table")));
        }
    }
    Ok(s)
}

/// A recurrence table together with its symmetrization.
#[derive(Clone, Debug)]
pub struct Tables {
    pub rec: RecurrenceTable,
    pub sym: SymmetricTable,
}

impl Tables {
    /// Tables through degree N, with the x·ℓ cross-check.
    pub fn build(n: usize, params: &FunctionalParams, ctx: &PrecisionContext, backend: Backend) -> Result<Self> {
        let rec = Self::table(n, params, ctx, backend)?;
        let sym = symmetrize(&rec)?;
        Ok(Tables { rec, sym })
    }

    /// As `build` without the x·ℓ cross-check; used at finite-difference
    /// stencil points.
    pub fn build_unchecked(
        n: usize,
        params: &FunctionalParams,
        ctx: &PrecisionContext,
        backend: Backend,
    ) -> Result<Self> {
        let rec = Self::table(n, params, ctx, backend)?;
        let sym = symmetrize_unchecked(&rec)?;
        Ok(Tables { rec, sym })
    }

    fn table(n: usize, params: &FunctionalParams, ctx: &PrecisionContext, backend: Backend) -> Result<RecurrenceTable> {
        match backend {
            Backend::Moment => recurrence_from_moments(n, params, ctx),
            Backend::Discretized => recurrence_discretized(n, params, ctx),
        }
    }

    pub fn alpha(&self) -> &Real {
        &self.rec.params.alpha
    }

    pub fn z(&self) -> &Real {
        &self.rec.params.z
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.rec.ctx
    }

    pub fn n_max(&self) -> usize {
        self.rec.n_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(a: &str, z: &str, bits: u32) -> (FunctionalParams, PrecisionContext) {
        (FunctionalParams::parse(a, z, Variant::L, bits).unwrap(), make_context(bits).unwrap())
    }

    #[test]
    fn first_row_closed_forms() {
        let (p, ctx) = setup("0", "1", 256);
        let t = recurrence_from_moments(4, &p, &ctx).unwrap();
        let e = Real::one(256).exp();
        // b_0 = ℓ_1/ℓ_0 = (1 − 2/e)/(1 − 1/e)
        let b0 = (1 - 2 / e.clone()) / (1 - 1 / e.clone());
        assert!((&t.b[0] - &b0).abs() < &ctx.eps * 64);
        assert_eq!(t.b[0].to_decimal(9), "0.418023293");
        assert!((&t.h[0] - (1 - 1 / e)).abs() < &ctx.eps * 64);
        let a1 = (&p.z + 2 + &p.alpha) * &b0 - &p.z * (&p.alpha + 1) - b0.square();
        assert!((&t.a[1] - a1).abs() < &ctx.eps * 1024);
        assert_eq!(t.a[1].to_decimal(6), "0.0793264");
    }

    #[test]
    fn small_z_b0_series() {
        let (p, ctx) = setup("0", "0.01", 256);
        let t = recurrence_from_moments(1, &p, &ctx).unwrap();
        let z = &p.z;
        let approx = z / 2 - z.square() / 12;
        assert!((&t.b[0] - approx).abs() < z.powi(3));
    }

    #[test]
    fn sigma_is_partial_sum_of_b() {
        let (p, ctx) = setup("0.5", "2", 256);
        let t = recurrence_from_moments(8, &p, &ctx).unwrap();
        for n in 1..=8 {
            let s = t.b[..n].iter().fold(Real::zero(256), |acc, x| acc + x);
            assert!((&s - &t.sigma[n]).abs() < &ctx.residual_tol * &s);
        }
    }

    #[test]
    fn backends_agree() {
        for (a, z) in [("0", "1"), ("-0.5", "2")] {
            let (p, ctx) = setup(a, z, 256);
            let tol = Real::from_f64(256, 1e-40);
            recurrence_both(10, &p, &ctx, &tol).unwrap();
        }
        let (p, ctx) = setup("0", "1", 128);
        let t = recurrence_discretized(1, &p, &ctx).unwrap();
        let m = moment_table(1, &p, &ctx).unwrap();
        let b0 = &m.values[1] / &m.values[0];
        assert!((&t.b[0] - b0).abs() < &ctx.residual_tol);
    }

    #[test]
    fn gauss_jacobi_reproduces_mass() {
        let beta = Real::from_f64(128, -0.5);
        let (t, w) = gauss_jacobi(12, &beta, 128).unwrap();
        let mass = w.iter().fold(Real::zero(128), |acc, x| acc + x);
        // ∫(1+t)^{-1/2} dt over [−1, 1] = 2·√2
        let want = Real::from_int(128, 8).sqrt();
        assert!((mass - want).abs() < 1e-30);
        assert!(t.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn symmetric_relations() {
        let (p, ctx) = setup("0", "1", 256);
        let t = recurrence_from_moments(8, &p, &ctx).unwrap();
        let s = symmetrize(&t).unwrap();
        assert!(s.gamma[0].is_zero());
        assert_eq!(s.gamma[1], t.b[0]);
        // γ_1 = α + 1 − z^{α+1}e^{−z}/h_0
        let alt = &p.alpha + 1 - p.z.pow(&(&p.alpha + 1)) * (-&p.z).exp() / &t.h[0];
        assert!((&s.gamma[1] - alt).abs() < &ctx.residual_tol);
        for n in 1..8 {
            let bn = &s.gamma[2 * n + 1] + &s.gamma[2 * n];
            let an = &s.gamma[2 * n] * &s.gamma[2 * n - 1];
            assert!((bn - &t.b[n]).abs() < &ctx.residual_tol);
            assert!((an - &t.a[n]).abs() < &ctx.residual_tol);
        }
    }

    #[test]
    fn laguerre_limit() {
        let (p, ctx) = setup("0", "60", 256);
        let t = recurrence_from_moments(5, &p, &ctx).unwrap();
        for n in 0..=5i64 {
            assert!((&t.b[n as usize] - (2 * n + 1)).abs() < 1e-6);
            assert!((&t.a[n as usize] - n * n).abs() < 1e-5);
        }
    }
}
