use fracpoisson::funcspace::TestFunction;
use fracpoisson::poisson::{poisson_apply, poisson_dtau, PoissonParams};
use fracpoisson::quad::{integrate_interval, QuadConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn positive_and_bounded(
        alpha in 0.05f64..0.95,
        tau in 0.01f64..10.0,
        lo in -3.0f64..2.0,
        len in 0.1f64..3.0,
        t in -4.0f64..6.0,
        height in 0.1f64..4.0,
    ) {
        let p = PoissonParams::new(alpha, tau).unwrap();
        let cfg = QuadConfig::default();
        let ind = TestFunction::Indicator { lo, hi: lo + len };
        let v = poisson_apply(&ind, &p, t, &cfg).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&v), "indicator gave {}", v);
        let bump = TestFunction::SmoothBump { center: lo, halfwidth: len };
        let b = poisson_apply(&bump, &p, t, &cfg).unwrap() * height;
        prop_assert!(b >= -1e-12 && b <= height * (1.0 + 1e-9));
    }

    #[test]
    fn translation_equivariant(
        alpha in 0.1f64..0.9,
        tau in 0.05f64..5.0,
        center in -2.0f64..2.0,
        h in -5.0f64..5.0,
        t in -3.0f64..5.0,
    ) {
        let p = PoissonParams::new(alpha, tau).unwrap();
        let cfg = QuadConfig::default();
        let f = TestFunction::SmoothBump { center, halfwidth: 0.7 };
        let g = TestFunction::SmoothBump { center: center + h, halfwidth: 0.7 };
        let a = poisson_apply(&f, &p, t, &cfg).unwrap();
        let b = poisson_apply(&g, &p, t + h, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn blind_to_the_future(
        alpha in 0.1f64..0.9,
        tau in 0.05f64..5.0,
        lo in -4.0f64..0.0,
        t in 0.0f64..3.0,
        extra in 0.0f64..5.0,
    ) {
        // both indicators agree on (−inf, t) and differ only after t
        let p = PoissonParams::new(alpha, tau).unwrap();
        let cfg = QuadConfig::default();
        let f = TestFunction::Indicator { lo, hi: t };
        let g = TestFunction::Indicator { lo, hi: t + extra };
        let a = poisson_apply(&f, &p, t, &cfg).unwrap();
        let b = poisson_apply(&g, &p, t, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }
}

#[test]
fn dtau_only_sees_lags_in_the_support() {
    let f = TestFunction::Indicator { lo: -2.0, hi: -1.0 };
    let p = PoissonParams::new(0.5, 1.0).unwrap();
    let cfg = QuadConfig::default().with_tolerances(1e-11, 1e-15);
    let got = poisson_dtau(&f, &p, 0.0, &cfg).unwrap();
    let want = integrate_interval(|s: f64| p.kernel_dtau(s), 1.0, 2.0, &cfg).unwrap().value;
    assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
}
