//! Small-z Taylor coefficients of a_n, b_n, σ_n and the large-n law for
//! the σ_n coefficients.
//!
//! σ_n(z) = Σ s_{n,k}z^k, a_n = Σ A_{n,k}z^k, b_n = Σ B_{n,k}z^k with
//! A_{n,k} = (1−k)s_{n,k} and B_{n,k} = s_{n+1,k} − s_{n,k}. Everything is a
//! rational function of α, so the table is generic over the scalar field:
//! exact rationals when α is a terminating decimal, `Real` otherwise.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::FunctionalParams;
use crate::numerics::PrecisionContext;
use crate::real::Real;
use crate::recurrence::recurrence_from_moments;

pub trait Field:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// Integer in the same field (and precision) as `self`.
    fn int(&self, v: i64) -> Self;
    fn is_zero_value(&self) -> bool;
    fn to_real(&self, prec: u32) -> Real;
    /// "p/q" for exact values.
    fn exact(&self) -> Option<String>;
}

impl Field for BigRational {
    fn int(&self, v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn to_real(&self, prec: u32) -> Real {
        let n = Real::parse(prec, &self.numer().to_string()).expect("integer literal");
        let d = Real::parse(prec, &self.denom().to_string()).expect("integer literal");
        n / d
    }
    fn exact(&self) -> Option<String> {
        Some(if self.denom().is_one() { self.numer().to_string() } else { self.to_string() })
    }
}

impl Field for Real {
    fn int(&self, v: i64) -> Self {
        Real::from_int(self.prec(), v)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn to_real(&self, prec: u32) -> Real {
        self.with_prec(prec)
    }
    fn exact(&self) -> Option<String> {
        None
    }
}

/// Exact value of a plain decimal literal ("1.7", "-0.5", "2"); `None`
/// for anything else (exponents, non-numbers).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let den = num_traits::pow(BigInt::from(10), fp.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

fn nonzero<F: Field>(v: F, what: &str) -> Result<F> {
    if v.is_zero_value() {
        Err(Error::Resonance(format!("{what} vanishes for this alpha")))
    } else {
        Ok(v)
    }
}

#[derive(Clone, Debug)]
pub struct ClosedForm<F> {
    pub s1: F,
    pub s2: F,
    pub b1: F,
    pub a2: F,
    pub b2: F,
}

fn s1<F: Field>(n: usize, al: &F) -> Result<F> {
    if n == 0 {
        return Ok(al.int(0));
    }
    let ni = al.int(n as i64);
    let d = nonzero(ni.clone() * al.int(2) + al.clone(), "2n+alpha")?;
    Ok(ni.clone() * (ni + al.clone()) / d)
}

fn a2<F: Field>(n: usize, al: &F) -> Result<F> {
    if n == 0 {
        return Ok(al.int(0));
    }
    let ni = al.int(n as i64);
    let s = ni.clone() * al.int(2) + al.clone();
    let lo = nonzero(s.clone() - al.int(1), "2n+alpha-1")?;
    let hi = nonzero(s.clone() + al.int(1), "2n+alpha+1")?;
    let s = nonzero(s, "2n+alpha")?;
    let m = ni.clone() * (ni + al.clone());
    Ok(m.clone() * m / (lo * s.clone() * s * hi))
}

/// s_{n,1}, s_{n,2}, B_{n,1}, A_{n,2}, B_{n,2} from their closed forms.
pub fn closed_form_coeffs<F: Field>(n: usize, al: &F) -> Result<ClosedForm<F>> {
    let ni = al.int(n as i64);
    let b1 = if n == 0 {
        (al.clone() + al.int(1)) / nonzero(al.clone() + al.int(2), "alpha+2")?
    } else {
        let s = ni.clone() * al.int(2) + al.clone();
        let num = ni.clone() * al.int(2) * (ni + al.clone() + al.int(1)) + al.clone() * (al.clone() + al.int(1));
        num / (nonzero(s.clone(), "2n+alpha")? * nonzero(s + al.int(2), "2n+alpha+2")?)
    };
    let a = a2(n, al)?;
    Ok(ClosedForm { s1: s1(n, al)?, s2: -a.clone(), b1, b2: -(a2(n + 1, al)? - a.clone()), a2: a })
}

#[derive(Clone, Debug)]
pub struct SeriesTable<F> {
    pub alpha: F,
    pub nmax: usize,
    pub kmax: usize,
    /// s[n][k], 0 ≤ n ≤ nmax, 0 ≤ k ≤ kmax
    pub s: Vec<Vec<F>>,
    pub a: Vec<Vec<F>>,
    pub b: Vec<Vec<F>>,
}

/// Fills s_{n,k} from the closed forms for k ≤ 2 and
/// s_{n,k} = −1/((k−1)(k−2)) Σ_{j=1}^{k−2} (k−1−j) s_{n,k−j} Δ∇s_{n,j}
/// for k ≥ 3. Row 0 is σ_0 ≡ 0. The recursion reads neighbouring rows, so
/// it runs on n ≤ nmax+kmax+1 and the result is truncated.
pub fn snk_table<F: Field>(nmax: usize, kmax: usize, al: &F) -> Result<SeriesTable<F>> {
    let top = nmax + kmax + 1;
    let zero = al.int(0);
    let mut s = vec![vec![zero.clone(); kmax + 1]; top + 1];
    for (n, row) in s.iter_mut().enumerate().skip(1) {
        if kmax >= 1 {
            row[1] = s1(n, al)?;
        }
        if kmax >= 2 {
            row[2] = -a2(n, al)?;
        }
    }
    for k in 3..=kmax {
        let scale = al.int(-1) / al.int(((k - 1) * (k - 2)) as i64);
        // column k is exact for n ≤ top − k
        for n in 1..=top - k {
            let mut acc = zero.clone();
            for j in 1..=k - 2 {
                let dd = s[n + 1][j].clone() - s[n][j].clone() * al.int(2) + s[n - 1][j].clone();
                acc = acc + al.int((k - 1 - j) as i64) * s[n][k - j].clone() * dd;
            }
            s[n][k] = scale.clone() * acc;
        }
    }
    let a = (0..=nmax)
        .map(|n| (0..=kmax).map(|k| al.int(1 - k as i64) * s[n][k].clone()).collect())
        .collect();
    let b = (0..=nmax)
        .map(|n| (0..=kmax).map(|k| s[n + 1][k].clone() - s[n][k].clone()).collect())
        .collect();
    s.truncate(nmax + 1);
    Ok(SeriesTable { alpha: al.clone(), nmax, kmax, s, a, b })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesErrors {
    #[serde(serialize_with = "crate::series::decimal")]
    pub err_a: Real,
    #[serde(serialize_with = "crate::series::decimal")]
    pub err_b: Real,
    #[serde(serialize_with = "crate::series::decimal")]
    pub err_sigma: Real,
}

pub(crate) fn decimal<S: serde::Serializer>(v: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_decimal(40))
}

fn horner(c: &[Real], z: &Real) -> Real {
    c.iter().rev().fold(Real::zero(z.prec()), |acc, v| acc * z + v)
}

/// |a_n − Σ_{k≤kmax}A_{n,k}z^k| and likewise for b_n and σ_n, with the
/// coefficients at the working precision.
pub fn series_vs_table(n: usize, params: &FunctionalParams, kmax: usize, ctx: &PrecisionContext) -> Result<SeriesErrors> {
    let t = recurrence_from_moments(n + 1, params, ctx)?;
    let p = ctx.bits();
    let al = params.alpha.with_prec(p);
    let st = snk_table(n, kmax, &al)?;
    let z = &params.z;
    Ok(SeriesErrors {
        err_a: (&t.a[n] - horner(&st.a[n], z)).abs(),
        err_b: (&t.b[n] - horner(&st.b[n], z)).abs(),
        err_sigma: (&t.sigma[n] - horner(&st.s[n], z)).abs(),
    })
}

/// c_k = ((−1)^k(4α²−1) − 1)/2^{2k+3}.
pub fn c_k<F: Field>(k: usize, al: &F) -> F {
    let q = al.clone() * al.clone() * al.int(4) - al.int(1);
    let q = if k % 2 == 0 { q } else { -q };
    (q - al.int(1)) / al.int(1i64 << (2 * k + 3))
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "decimal")]
    pub c_k: Real,
    /// s_{n,k}·n^k/c_k
    #[serde(serialize_with = "decimal")]
    pub ratio: Real,
    /// |a_n − z²/16|
    #[serde(serialize_with = "decimal")]
    pub a_dev: Real,
    /// |b_n − z/2|
    #[serde(serialize_with = "decimal")]
    pub b_dev: Real,
}

/// Large-n checks: the c_k law for s_{n,k}, and the distance of a_n, b_n
/// from their limits z²/16, z/2.
pub fn asymptotic_checks(n: usize, k: usize, params: &FunctionalParams, ctx: &PrecisionContext) -> Result<AsymptoticReport> {
    if k < 3 {
        return Err(Error::InvalidParam("the c_k law is stated for k >= 3".into()));
    }
    let p = ctx.bits();
    let al = params.alpha.with_prec(p);
    let ck = c_k(k, &al);
    if ck.is_zero() {
        return Err(Error::Degenerate(format!("c_{k} = 0 for this alpha")));
    }
    let st = snk_table(n, k, &al)?;
    let ratio = &st.s[n][k] * Real::from_int(p, n as i64).powi(k as i32) / &ck;
    let t = recurrence_from_moments(n, params, ctx)?;
    let z = &params.z;
    Ok(AsymptoticReport {
        n,
        k,
        c_k: ck,
        ratio,
        a_dev: (&t.a[n] - z.square() / 16).abs(),
        b_dev: (&t.b[n] - z / 2).abs(),
    })
}

/// First row where s_{n,0} or A_{n,1} fails to vanish.
pub fn check_table<F: Field>(t: &SeriesTable<F>) -> Option<(usize, usize)> {
    for n in 0..=t.nmax {
        if !t.s[n][0].is_zero_value() || (t.kmax >= 1 && !t.a[n][1].is_zero_value()) {
            return Some((n, 0));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Variant;
    use crate::numerics::make_context;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn parse_decimal_exactly() {
        assert_eq!(parse_rational("1.7").unwrap(), q(17, 10));
        assert_eq!(parse_rational("-0.5").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert!(parse_rational("1e3").is_none());
        assert!(parse_rational(".").is_none());
    }

    #[test]
    fn closed_forms() {
        let c = closed_form_coeffs(1, &q(0, 1)).unwrap();
        assert_eq!(c.s1, q(1, 2));
        assert_eq!(c.s2, q(-1, 12));
        assert_eq!(c.a2, q(1, 12));
        for al in [q(-1, 2), q(0, 1), q(17, 10)] {
            let c0 = closed_form_coeffs(0, &al).unwrap();
            assert_eq!(c0.b1, (al.clone() + q(1, 1)) / (al.clone() + q(2, 1)));
            assert!(c0.s1.is_zero() && c0.s2.is_zero() && c0.a2.is_zero());
        }
        assert_eq!(closed_form_coeffs(2, &q(1, 1)).unwrap().s1, q(6, 5));
    }

    #[test]
    fn b2_matches_display_numerator() {
        for al in [q(0, 1), q(1, 2), q(3, 1)] {
            for n in 1..5i64 {
                let c = closed_form_coeffs(n as usize, &al).unwrap();
                let nn = q(n, 1);
                let a = al.clone();
                let s = q(2 * n, 1) + a.clone();
                let num = -q(4, 1) * (q(2, 1) * a.clone() * a.clone() - q(1, 1)) * num_traits::pow(nn.clone(), 4)
                    - q(8, 1) * (a.clone() + q(1, 1)) * (q(2, 1) * a.clone() * a.clone() - q(1, 1)) * num_traits::pow(nn.clone(), 3)
                    - q(2, 1)
                        * (q(5, 1) * num_traits::pow(a.clone(), 4) + q(12, 1) * num_traits::pow(a.clone(), 3) + a.clone() * a.clone()
                            - q(6, 1) * a.clone()
                            - q(2, 1))
                        * nn.clone()
                        * nn.clone()
                    - q(2, 1) * a.clone() * (a.clone() + q(1, 1)) * (num_traits::pow(a.clone(), 3) + q(4, 1) * a.clone() * a.clone() - a.clone() - q(2, 1)) * nn.clone()
                    - (a.clone() - q(1, 1)) * a.clone() * a.clone() * (a.clone() + q(1, 1)) * (a.clone() + q(1, 1));
                let den = (s.clone() - q(1, 1)) * s.clone() * s.clone() * (s.clone() + q(1, 1)) * (s.clone() + q(2, 1)) * (s.clone() + q(2, 1)) * (s + q(3, 1));
                assert_eq!(c.b2, num / den, "alpha={a} n={n}");
            }
        }
    }

    #[test]
    fn table_structure() {
        let al = q(0, 1);
        let t = snk_table(6, 5, &al).unwrap();
        assert!(check_table(&t).is_none());
        for n in 0..=6 {
            let c = closed_form_coeffs(n, &al).unwrap();
            assert_eq!(t.b[n][1], c.b1, "B1 n={n}");
            assert_eq!(t.a[n][2], c.a2, "A2 n={n}");
            assert_eq!(t.b[n][2], c.b2, "B2 n={n}");
        }
        // k = 3, n = 1: the single j = 1 term
        let s = |n: usize, k: usize| t.s[n][k].clone();
        let dd = s(2, 1) - q(2, 1) * s(1, 1) + s(0, 1);
        assert_eq!(s(1, 3), -q(1, 2) * s(1, 2) * dd);
        // Σ_{k<n} B_{k,1} = s_{n,1}
        let sum: BigRational = (0..4).map(|k| t.b[k][1].clone()).sum();
        assert_eq!(sum, t.s[4][1]);
    }

    #[test]
    fn float_table_matches_rational() {
        let tq = snk_table(4, 6, &q(1, 2)).unwrap();
        let tr = snk_table(4, 6, &Real::from_f64(256, 0.5)).unwrap();
        for n in 0..=4 {
            for k in 0..=6 {
                let want = tq.s[n][k].to_real(256);
                assert!((&tr.s[n][k] - &want).abs() <= want.abs() * 1e-70);
            }
        }
    }

    #[test]
    fn taylor_agrees_with_recurrence() {
        let ctx = make_context(256).unwrap();
        let p = FunctionalParams::parse("0", "0.01", Variant::L, 256).unwrap();
        let e = series_vs_table(1, &p, 4, &ctx).unwrap();
        let z5 = Real::from_f64(256, 0.01).powi(5);
        assert!(e.err_sigma <= z5.clone() * 10, "{}", e.err_sigma);
        let e0 = series_vs_table(0, &p, 4, &ctx).unwrap();
        assert!(e0.err_a.is_zero());
        let ph = FunctionalParams::parse("0", "0.005", Variant::L, 256).unwrap();
        let eh = series_vs_table(1, &ph, 4, &ctx).unwrap();
        assert!(eh.err_a.clone() * 16 <= e.err_a, "{} {}", e.err_a, eh.err_a);
    }

    #[test]
    fn asymptotic_coefficients() {
        assert_eq!(c_k(3, &q(1, 1)), q(-1, 128));
        assert_eq!(c_k(4, &q(1, 1)), q(1, 1024));
        // 4α² − 1 = 0 at α = 1/2
        assert_eq!(c_k(3, &q(1, 2)), q(-1, 512));
        for al in [q(1, 1), q(1, 2)] {
            let t = snk_table(40, 3, &al).unwrap();
            let r = t.s[40][3].clone() * q(64000, 1) / c_k(3, &al);
            assert!(r > q(9, 10) && r < q(11, 10), "alpha={al}: {r}");
        }
    }
}
