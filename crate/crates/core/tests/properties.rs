use num_rational::BigRational;
use proptest::prelude::*;

use trunclag::moments::{FunctionalParams, Variant};
use trunclag::numerics::make_context;
use trunclag::polyeval::{eval_s, normalized};
use trunclag::recurrence::{recurrence_from_moments, Backend, Tables};
use trunclag::series::{snk_table, Field};
use trunclag::zeros::zeros;
use trunclag::Real;

const P: u32 = 192;

fn params(alpha_tenths: i64, z_tenths: i64) -> FunctionalParams {
    let al = Real::from_int(P, alpha_tenths) / 10;
    let z = Real::from_int(P, z_tenths) / 10;
    FunctionalParams::from_reals(al, z, Variant::L).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_family_has_parity(a in -9i64..30, z in 1i64..80, n in 0usize..9, x in 1i64..100) {
        let p = params(a, z);
        let ctx = make_context(P).unwrap();
        let tb = Tables::build(n / 2 + 2, &p, &ctx, Backend::Moment).unwrap();
        let x = p.z.sqrt() * x / 100;
        let l = eval_s(n, &x, &tb).unwrap().value;
        let r = eval_s(n, &-&x, &tb).unwrap().value;
        let want = if n % 2 == 0 { l.clone() } else { -&l };
        prop_assert!((&r - &want).abs() <= Real::exp2i(P, -150) * (l.abs() + 1));
    }

    #[test]
    fn normalized_residual_is_scale_free(v in prop::collection::vec(-1e6f64..1e6, 2..6), k in -40i32..40) {
        let t: Vec<Real> = v.iter().map(|x| Real::from_f64(P, *x)).collect();
        let s: Vec<Real> = t.iter().map(|x| x * Real::exp2i(P, k)).collect();
        let (a, b) = (normalized(&t), normalized(&s));
        prop_assert!((&a - &b).abs() <= Real::exp2i(P, -170));
        prop_assert!(a <= 1.0 * (v.len() as f64));
    }

    #[test]
    fn float_series_tracks_rational(num in -9i64..40, n in 0usize..4, k in 1usize..5) {
        let q = BigRational::new(num.into(), 10.into());
        let exact = snk_table(n, k, &q).unwrap();
        let float = snk_table(n, k, &(Real::from_int(P, num) / 10)).unwrap();
        let tol = Real::exp2i(P, -140);
        for (e, f) in [(&exact.s[n][k], &float.s[n][k]), (&exact.a[n][k], &float.a[n][k]), (&exact.b[n][k], &float.b[n][k])] {
            let e = e.to_real(P);
            prop_assert!((&e - f).abs() <= &tol * (e.abs() + 1));
        }
    }

    #[test]
    fn zeros_lie_inside_and_interlace(a in -9i64..30, z in 1i64..200, n in 2usize..10) {
        let p = params(a, z);
        let ctx = make_context(P).unwrap();
        let t = recurrence_from_moments(n, &p, &ctx).unwrap();
        let lo = zeros(n - 1, &t).unwrap().points;
        let hi = zeros(n, &t).unwrap().points;
        prop_assert!(hi[0].is_positive() && hi[n - 1] < p.z);
        for k in 0..n - 1 {
            prop_assert!(hi[k] < lo[k] && lo[k] < hi[k + 1]);
        }
    }
}
