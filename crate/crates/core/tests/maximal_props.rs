use fracpoisson::funcspace::Grid;
use fracpoisson::maximal::{check_a1_minus, check_ap_minus, eps_grid, m_minus_field, WeightSample};
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(-4.0f64..4.0, n),
            prop::collection::vec(-4.0f64..4.0, n),
        )
    })
}

const STEP: f64 = 0.05;

proptest! {
    #[test]
    fn sublinear((f, g) in pair()) {
        let eps = eps_grid(STEP, STEP * f.len() as f64);
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let ms = m_minus_field(&sum, STEP, &eps);
        let mf = m_minus_field(&f, STEP, &eps);
        let mg = m_minus_field(&g, STEP, &eps);
        for i in 0..f.len() {
            prop_assert!(ms[i] <= mf[i] + mg[i] + 1e-12, "at {}: {} > {} + {}", i, ms[i], mf[i], mg[i]);
        }
    }

    #[test]
    fn homogeneous((f, _) in pair(), c in -20.0f64..20.0) {
        let eps = eps_grid(STEP, STEP * f.len() as f64);
        let scaled: Vec<f64> = f.iter().map(|v| c * v).collect();
        let a = m_minus_field(&scaled, STEP, &eps);
        let b = m_minus_field(&f, STEP, &eps);
        for i in 0..f.len() {
            prop_assert!((a[i] - c.abs() * b[i]).abs() <= 1e-12 * (1.0 + c.abs() * b[i]));
        }
    }

    #[test]
    fn more_radii_never_lower((f, _) in pair(), extra in prop::collection::vec(0.05f64..6.0, 1..5)) {
        let eps = eps_grid(STEP, STEP * f.len() as f64);
        let mut more = eps.clone();
        more.extend(extra);
        let a = m_minus_field(&f, STEP, &eps);
        let b = m_minus_field(&f, STEP, &more);
        for i in 0..f.len() {
            prop_assert!(b[i] >= a[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn a1_weights_are_ap_weights(rate in 0.2f64..2.0) {
        let grid = Grid::from_range(-4.0, 4.0, 1.0 / 32.0).unwrap();
        let w = WeightSample::from_fn(grid, |t| (-rate * t).exp()).unwrap();
        let a1 = check_a1_minus(&w, &eps_grid(grid.step(), grid.hi() - grid.lo()));
        prop_assert!(a1.pass);
        for p in [1.5, 2.0, 4.0] {
            let ap = check_ap_minus(&w, p, 100_000).unwrap();
            prop_assert!(ap.pass, "p = {}: {:?}", p, ap);
            prop_assert!(ap.constant <= 2.0 * a1.constant, "p = {}: {} vs {}", p, ap.constant, a1.constant);
        }
    }
}
