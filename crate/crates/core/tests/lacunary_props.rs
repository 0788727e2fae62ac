use fracpoisson::lacunary::{normalize, LacunarySpec};
use proptest::prelude::*;

fn lacunary() -> impl Strategy<Value = LacunarySpec> {
    (1.2f64..3.0, -4i32..2, 0.05f64..2.0, 2usize..10).prop_flat_map(|(rho, j_min, a0, n)| {
        (
            prop::collection::vec(1.0f64..6.0, n - 1),
            prop::collection::vec(-3.0f64..3.0, n),
        )
            .prop_map(move |(stretch, v)| {
                let mut a = vec![a0];
                for s in stretch {
                    let last = *a.last().unwrap();
                    a.push(last * rho * s);
                }
                LacunarySpec::new(rho, j_min, a, v).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn normalization_is_idempotent(spec in lacunary()) {
        let once = normalize(&spec);
        let twice = normalize(once.as_spec());
        prop_assert_eq!(once.eta(), twice.eta());
        prop_assert_eq!(once.omega(), twice.omega());
    }

    #[test]
    fn normalization_keeps_sup_and_points(spec in lacunary()) {
        let n = normalize(&spec);
        let sup = n.omega().iter().fold(0.0f64, |m, w| m.max(w.abs()));
        prop_assert_eq!(sup, spec.v_sup());
        for a in spec.a_values() {
            prop_assert!(n.eta().contains(a), "{} missing", a);
        }
        let rho = spec.rho();
        for w in n.eta().windows(2) {
            let r = w[1] / w[0];
            prop_assert!(r >= rho * (1.0 - 1e-12) && r <= rho * rho * (1.0 + 1e-12), "ratio {}", r);
        }
    }

    #[test]
    fn text_round_trip(spec in lacunary()) {
        let back = LacunarySpec::from_text(&spec.to_text()).unwrap();
        prop_assert_eq!(back.a_values(), spec.a_values());
        prop_assert_eq!(back.v_values(), spec.v_values());
        prop_assert_eq!(back.j_min(), spec.j_min());
    }
}
